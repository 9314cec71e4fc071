#pragma once

// File formats: binary PGM (P5, 8-bit) images, CSV tables.
//
// Images are stored on the [0, 255] intensity scale used throughout the
// experiments. write_pgm rounds each value to the nearest integer and clamps
// to [0, 255], so integer-valued images in that range round-trip exactly.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsplit/array.hpp"

namespace proxsplit {

/// Malformed input; what() names the file and byte offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t offset, const std::string& what)
      : std::runtime_error(source + ": byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<unsigned char> encode_pgm(const RealArray& image) {
  if (image.rank() != 2) throw ShapeError("encode_pgm: expects an image, got " + image.shape().str());
  const std::string header =
      "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + image.size());
  for (double v : image) {
    const double c = std::isfinite(v) ? std::clamp(std::round(v), 0.0, 255.0) : 0.0;
    out.push_back(static_cast<unsigned char>(c));
  }
  return out;
}

/// Parses P5 with maxval <= 255; '#' comments are allowed between header fields.
inline RealArray decode_pgm(const std::vector<unsigned char>& bytes, const std::string& source = "<memory>") {
  std::size_t pos = 0;
  const auto fail = [&](const std::string& what) { throw ParseError(source, pos, what); };
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_int = [&](const char* field) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail(std::string("expected ") + field);
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
      if (v > (1u << 24)) fail(std::string(field) + " too large");
      ++pos;
    }
    return static_cast<std::size_t>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail("not a binary PGM (magic P5 expected)");
  pos = 2;
  const std::size_t width = read_int("width");
  const std::size_t height = read_int("height");
  const std::size_t maxval = read_int("maxval");
  if (width == 0 || height == 0) fail("empty image");
  if (maxval == 0 || maxval > 255) fail("maxval " + std::to_string(maxval) + " unsupported (1..255)");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("expected a single whitespace after maxval");
  ++pos;
  if (bytes.size() - pos < width * height) {
    const std::size_t have = bytes.size() - pos;
    pos = bytes.size();
    fail("truncated raster: " + std::to_string(have) + " of " + std::to_string(width * height) + " bytes");
  }
  RealArray img(static_cast<int>(height), static_cast<int>(width), 0.0);
  for (std::size_t i = 0; i < width * height; ++i) {
    const unsigned v = bytes[pos + i];
    if (v > maxval) {
      pos += i;
      fail("sample " + std::to_string(v) + " exceeds maxval");
    }
    img[i] = static_cast<double>(v);
  }
  return img;
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline RealArray read_pgm(const std::filesystem::path& path) { return decode_pgm(read_bytes(path), path.string()); }
inline void write_pgm(const std::filesystem::path& path, const RealArray& image) {
  write_bytes(path, encode_pgm(image));
}

/// Comma-separated table with a header row; numbers printed with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) {
      throw std::invalid_argument("CsvTable: row has " + std::to_string(values.size()) + " values for " +
                                  std::to_string(columns_.size()) + " columns");
    }
    rows_.push_back(values);
  }
  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
      os << '\n';
    }
    return os.str();
  }
  void write(const std::filesystem::path& path) const { write_text(path, str()); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace proxsplit
