#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"
#include "fsg/image.hpp"

namespace fsg {

// Location of one square patch inside the source image.
struct PatchGeometry {
  int x0 = 0;
  int y0 = 0;
  int size = 0;

  bool operator==(const PatchGeometry&) const = default;
};

// Regular grid of patches sampled from one image, row-major order. The vertex
// index of every downstream graph equals the position in `geometries`.
struct PatchSet {
  std::vector<PatchGeometry> geometries;
  int image_width = 0;
  int image_height = 0;
  int patch_size = 0;
  double overlap = 0.0;

  int size() const { return static_cast<int>(geometries.size()); }
};

// Pixel payload of one patch, row-major `size` x `size`.
struct PixelBlock {
  int size = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * size + x]; }
};

// Grid step between neighbouring patch origins. Rounded to the nearest pixel
// and floored at 1 so an overlap arbitrarily close to 1 still advances.
inline int patch_stride(int patch_size, double overlap) {
  if (patch_size < 1) throw std::invalid_argument("patch_size must be >= 1");
  if (!(overlap >= 0.0) || overlap >= 1.0)
    throw std::invalid_argument("overlap must lie in [0, 1), got " + std::to_string(overlap));
  long s = std::lround(static_cast<double>(patch_size) * (1.0 - overlap));
  return s < 1 ? 1 : static_cast<int>(s);
}

// Samples the full axis-aligned patch grid: origins at multiples of the
// stride, keeping only patches that fit entirely inside the image. Row-major:
// y outer, x inner. The geometry depends only on the image dimensions.
inline PatchSet sample_patches(int image_width, int image_height, int patch_size, double overlap) {
  if (patch_size < 1) throw std::invalid_argument("patch_size must be >= 1");
  if (patch_size > image_width || patch_size > image_height)
    throw std::invalid_argument("patch_size " + std::to_string(patch_size) + " exceeds image " +
                                std::to_string(image_width) + "x" + std::to_string(image_height));
  const int stride = patch_stride(patch_size, overlap);
  PatchSet set;
  set.image_width = image_width;
  set.image_height = image_height;
  set.patch_size = patch_size;
  set.overlap = overlap;
  for (int y0 = 0; y0 + patch_size <= image_height; y0 += stride)
    for (int x0 = 0; x0 + patch_size <= image_width; x0 += stride)
      set.geometries.push_back({x0, y0, patch_size});
  return set;
}

inline PatchSet sample_patches(const ImageBuffer& img, int patch_size, double overlap) {
  return sample_patches(img.width, img.height, patch_size, overlap);
}

inline PixelBlock extract_pixels(const ImageBuffer& img, const PatchGeometry& g) {
  if (g.size < 1 || g.x0 < 0 || g.y0 < 0 || g.x0 + g.size > img.width || g.y0 + g.size > img.height)
    throw std::invalid_argument("patch (" + std::to_string(g.x0) + ", " + std::to_string(g.y0) + ", size " +
                                std::to_string(g.size) + ") outside image " + std::to_string(img.width) +
                                "x" + std::to_string(img.height));
  PixelBlock block;
  block.size = g.size;
  block.pixels.resize(static_cast<size_t>(g.size) * g.size);
  for (int y = 0; y < g.size; ++y) {
    const uint8_t* src = img.data.data() + static_cast<size_t>(g.y0 + y) * img.width + g.x0;
    std::copy(src, src + g.size, block.pixels.data() + static_cast<size_t>(y) * g.size);
  }
  return block;
}

inline std::vector<PixelBlock> extract_all(const ImageBuffer& img, const PatchSet& set) {
  std::vector<PixelBlock> blocks;
  blocks.reserve(set.geometries.size());
  for (const auto& g : set.geometries) blocks.push_back(extract_pixels(img, g));
  return blocks;
}

inline void save_patches_tsv(const PatchSet& set, std::ostream& out) {
  out << "index\tx0\ty0\tsize\n";
  for (size_t i = 0; i < set.geometries.size(); ++i) {
    const auto& g = set.geometries[i];
    out << i << '\t' << g.x0 << '\t' << g.y0 << '\t' << g.size << '\n';
  }
}

inline void save_patches_tsv(const PatchSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  save_patches_tsv(set, out);
  if (!out) throw IoError("write failed: " + path);
}

// Reads a patch table back; used when an externally computed similarity
// matrix is paired with its patch layout for localization. Image dimensions
// are not part of the table and must be supplied by the caller.
inline PatchSet load_patches_tsv(std::istream& in, int image_width, int image_height) {
  PatchSet set;
  set.image_width = image_width;
  set.image_height = image_height;
  std::string line;
  if (!std::getline(in, line) || line != "index\tx0\ty0\tsize")
    throw FormatError("malformed patch table: expected header 'index\\tx0\\ty0\\tsize'");
  size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    size_t index;
    PatchGeometry g;
    if (!(row >> index >> g.x0 >> g.y0 >> g.size))
      throw FormatError("malformed patch table row: '" + line + "'");
    if (index != expected)
      throw FormatError("patch table rows out of order: expected index " + std::to_string(expected) +
                        ", got " + std::to_string(index));
    if (g.x0 < 0 || g.y0 < 0 || g.size < 1 || g.x0 + g.size > image_width || g.y0 + g.size > image_height)
      throw FormatError("patch table row " + std::to_string(index) + " outside image bounds");
    set.geometries.push_back(g);
    ++expected;
  }
  if (!set.geometries.empty()) set.patch_size = set.geometries.front().size;
  return set;
}

inline PatchSet load_patches_tsv(const std::string& path, int image_width, int image_height) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open patch table: " + path);
  return load_patches_tsv(in, image_width, image_height);
}

}  // namespace fsg
