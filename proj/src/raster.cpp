#include "asd/errors.hpp"
#include "asd/media.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>

namespace asd {
namespace {

// Tokenizer over the PGM header; '#' comments run to end of line.
class PgmReader {
 public:
  PgmReader(std::span<const std::uint8_t> bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  std::size_t offset() const { return pos_; }

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_unsigned(const char* what) {
    skip_whitespace_and_comments();
    const std::size_t start = pos_;
    token_start_ = start;
    if (pos_ >= bytes_.size()) throw ParseError(std::string("pgm: unexpected end of data reading ") + what, pos_);
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (value > std::numeric_limits<unsigned int>::max()) throw ParseError(std::string("pgm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("pgm: expected ") + what, pos_);
    return value;
  }

  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw ParseError("pgm: expected whitespace before raster data", pos_);
    ++pos_;
  }

  std::size_t token_start() const { return token_start_; }

  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) throw ParseError("pgm: truncated raster data", pos_);
    return bytes_[pos_++];
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::size_t token_start_ = 0;
};

}  // namespace

RasterMedium medium_from_raster(std::span<const std::uint8_t> bytes, const Rectangle& domain) {
  if (!domain.valid()) throw InputError("medium_from_raster: domain rectangle has no area");
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("pgm: missing P2/P5 magic number", 0);
  const bool binary = bytes[1] == '5';

  PgmReader in(bytes, 2);
  RasterMedium r;
  r.domain = domain;
  const auto width = in.read_unsigned("width");
  if (width == 0) throw ParseError("pgm: zero image dimension", in.token_start());
  const auto height = in.read_unsigned("height");
  if (height == 0) throw ParseError("pgm: zero image dimension", in.token_start());
  const auto maxval = in.read_unsigned("maxval");
  if (maxval == 0 || maxval > 65535) throw ParseError("pgm: maxval must be in 1..65535", in.token_start());
  r.width = static_cast<int>(width);
  r.height = static_cast<int>(height);
  const std::size_t count = width * height;
  r.pixels.resize(count);

  if (binary) {
    in.expect_single_whitespace();
    const bool wide = maxval > 255;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = in.offset();
      unsigned value = in.byte();
      if (wide) value = (value << 8) | in.byte();
      if (value > maxval) throw ParseError("pgm: pixel exceeds maxval", at);
      r.pixels[i] = static_cast<double>(value);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto value = in.read_unsigned("pixel value");
      if (value > maxval) throw ParseError("pgm: pixel exceeds maxval", in.token_start());
      r.pixels[i] = static_cast<double>(value);
    }
  }
  return r;
}

RasterMedium medium_from_raster_file(const std::string& path, const Rectangle& domain) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open raster file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return medium_from_raster(bytes, domain);
}

}  // namespace asd
