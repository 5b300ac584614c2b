#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fsg/errors.hpp"

namespace fsg {

// 8-bit grayscale image, row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }
};

namespace detail {

// Reads the next header token of a PNM file, skipping whitespace and
// '#'-to-end-of-line comments. Returns false at end of stream.
inline bool next_pnm_token(std::istream& in, std::string& token) {
  token.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) return false;
  while (c != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  // Leave the delimiter unread: after the maxval token the caller has to see
  // the single header/payload separator byte itself.
  if (c != EOF) in.unget();
  return true;
}

inline int parse_pnm_int(std::istream& in, const char* field) {
  std::string tok;
  if (!next_pnm_token(in, tok)) throw FormatError(std::string("malformed PGM header: missing ") + field);
  for (char ch : tok)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw FormatError(std::string("malformed PGM header: ") + field + " is not a number: '" + tok + "'");
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw FormatError(std::string("malformed PGM header: ") + field + " out of range: '" + tok + "'");
  }
}

}  // namespace detail

// Binary PGM (P5) reader. Only 8-bit data is supported: maxval above 255
// would change the payload width and nothing downstream wants 16-bit input.
inline ImageBuffer load_pgm(std::istream& in) {
  std::string magic;
  if (!detail::next_pnm_token(in, magic)) throw FormatError("malformed PGM header: missing magic");
  if (magic != "P5") throw FormatError("unsupported PGM magic '" + magic + "', expected P5");
  int width = detail::parse_pnm_int(in, "width");
  int height = detail::parse_pnm_int(in, "height");
  int maxval = detail::parse_pnm_int(in, "maxval");
  if (width <= 0 || height <= 0)
    throw FormatError("malformed PGM header: non-positive dimensions " + std::to_string(width) + "x" +
                      std::to_string(height));
  if (maxval <= 0 || maxval > 255)
    throw FormatError("unsupported PGM maxval " + std::to_string(maxval) + ", expected 1..255");
  // Exactly one whitespace byte separates the header from the payload.
  int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) throw FormatError("malformed PGM header: missing payload separator");
  ImageBuffer img(width, height);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
  if (static_cast<size_t>(in.gcount()) != img.size())
    throw FormatError("truncated PGM payload: expected " + std::to_string(img.size()) + " bytes, got " +
                      std::to_string(in.gcount()));
  return img;
}

inline ImageBuffer load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);
  return load_pgm(in);
}

inline void save_pgm(const ImageBuffer& img, std::ostream& out) {
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.size()));
}

inline void save_pgm(const ImageBuffer& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  save_pgm(img, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fsg
