#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"
#include "fsg/image.hpp"
#include "fsg/partition.hpp"
#include "fsg/patch.hpp"

namespace fsg {

// Per-pixel vote counts rasterized from a patch partition: `prediction`
// counts covering patches whose community is the suspect one, `coverage`
// counts all covering patches, and `normalized` is their ratio (0 where a
// pixel is covered by no patch at all).
struct PixelMaps {
  int width = 0;
  int height = 0;
  std::vector<int> prediction;
  std::vector<int> coverage;
  std::vector<double> normalized;
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> values;  // 0 or 255

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}
  uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

// The suspect community for a two-way split: forged regions are assumed to
// be the minority of the image, so the smaller community is flagged; an
// exact tie flags community 2. Any other k needs an explicit caller choice.
inline int select_alpha(const Partition& p) {
  if (p.k != 2)
    throw std::invalid_argument("automatic community selection requires exactly 2 communities, got k=" +
                                std::to_string(p.k));
  int size1 = 0, size2 = 0;
  for (int label : p.labels) (label == 1 ? size1 : size2) += 1;
  return size1 < size2 ? 1 : 2;
}

inline PixelMaps build_pixel_maps(const PatchSet& set, const Partition& p, int alpha) {
  if (p.size() != set.size())
    throw std::invalid_argument("partition covers " + std::to_string(p.size()) + " vertices, patch set has " +
                                std::to_string(set.size()));
  if (alpha < 1 || alpha > p.k)
    throw std::invalid_argument("community " + std::to_string(alpha) + " outside 1.." + std::to_string(p.k));
  PixelMaps maps;
  maps.width = set.image_width;
  maps.height = set.image_height;
  const size_t total = static_cast<size_t>(maps.width) * maps.height;
  maps.prediction.assign(total, 0);
  maps.coverage.assign(total, 0);
  maps.normalized.assign(total, 0.0);
  for (int i = 0; i < set.size(); ++i) {
    const PatchGeometry& g = set.geometries[static_cast<size_t>(i)];
    const bool hit = p.labels[static_cast<size_t>(i)] == alpha;
    for (int y = g.y0; y < g.y0 + g.size; ++y) {
      int* pred = maps.prediction.data() + static_cast<size_t>(y) * maps.width;
      int* cov = maps.coverage.data() + static_cast<size_t>(y) * maps.width;
      for (int x = g.x0; x < g.x0 + g.size; ++x) {
        ++cov[x];
        if (hit) ++pred[x];
      }
    }
  }
  for (size_t i = 0; i < total; ++i)
    if (maps.coverage[i] > 0)
      maps.normalized[i] = static_cast<double>(maps.prediction[i]) / maps.coverage[i];
  return maps;
}

// Separable Gaussian smoothing with border renormalization: near edges the
// kernel is cut off and re-divided by the in-bounds weight sum, so constant
// inputs come back unchanged everywhere. `window` is the kernel diameter;
// taps run over offsets -window/2 .. window/2.
inline std::vector<double> gaussian_smooth(const std::vector<double>& values, int width, int height,
                                           int window, double sigma) {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("smoothing sigma must be positive");
  if (static_cast<size_t>(width) * height != values.size())
    throw std::invalid_argument("pixel buffer size does not match dimensions");
  const int radius = window / 2;  // even windows round up to the next odd size
  if (2 * radius + 1 > width || 2 * radius + 1 > height)
    throw std::invalid_argument("smoothing window " + std::to_string(2 * radius + 1) + " exceeds image " +
                                std::to_string(width) + "x" + std::to_string(height));
  std::vector<double> kernel(static_cast<size_t>(radius) + 1);
  for (int j = 0; j <= radius; ++j) kernel[static_cast<size_t>(j)] = std::exp(-0.5 * (j * j) / (sigma * sigma));

  std::vector<double> pass1(values.size());
  for (int y = 0; y < height; ++y) {
    const double* in = values.data() + static_cast<size_t>(y) * width;
    double* out = pass1.data() + static_cast<size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double num = 0.0, den = 0.0;
      const int lo = std::max(-radius, -x);
      const int hi = std::min(radius, width - 1 - x);
      for (int j = lo; j <= hi; ++j) {
        const double w = kernel[static_cast<size_t>(j < 0 ? -j : j)];
        num += w * in[x + j];
        den += w;
      }
      out[x] = num / den;
    }
  }
  std::vector<double> pass2(values.size());
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      double num = 0.0, den = 0.0;
      const int lo = std::max(-radius, -y);
      const int hi = std::min(radius, height - 1 - y);
      for (int j = lo; j <= hi; ++j) {
        const double w = kernel[static_cast<size_t>(j < 0 ? -j : j)];
        num += w * pass1[static_cast<size_t>(y + j) * width + x];
        den += w;
      }
      pass2[static_cast<size_t>(y) * width + x] = num / den;
    }
  }
  return pass2;
}

inline BinaryMask smooth_and_threshold(const PixelMaps& maps, int window, double sigma, double threshold) {
  const std::vector<double> smooth = gaussian_smooth(maps.normalized, maps.width, maps.height, window, sigma);
  BinaryMask mask(maps.width, maps.height);
  for (size_t i = 0; i < smooth.size(); ++i) mask.values[i] = smooth[i] >= threshold ? 255 : 0;
  return mask;
}

// Grayscale render of a [0,1] map, rounded half-up to 0..255.
inline ImageBuffer map_to_image(const std::vector<double>& values, int width, int height) {
  if (static_cast<size_t>(width) * height != values.size())
    throw std::invalid_argument("pixel buffer size does not match dimensions");
  ImageBuffer img(width, height);
  for (size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    img.data[i] = static_cast<uint8_t>(std::llround(v * 255.0));
  }
  return img;
}

inline ImageBuffer mask_to_image(const BinaryMask& mask) {
  ImageBuffer img(mask.width, mask.height);
  img.data = mask.values;
  return img;
}

inline void save_mask_pgm(const BinaryMask& mask, const std::string& path) {
  save_pgm(mask_to_image(mask), path);
}

}  // namespace fsg
