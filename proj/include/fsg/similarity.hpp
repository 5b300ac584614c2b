#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"
#include "fsg/matrix.hpp"
#include "fsg/parallel.hpp"
#include "fsg/patch.hpp"

namespace fsg {

// Pairwise patch similarity S, symmetric, entries in [0, 1], zero diagonal.
// Row/column index i refers to patch i of the sampling order.
struct SimilarityMatrix {
  int n = 0;
  Matrix values;
};

// Scoring backend. Implementations must be symmetric in their arguments and
// return values in [0, 1]; compute_matrix enforces both at runtime since a
// broken provider would silently corrupt every downstream statistic.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double score(const PixelBlock& a, const PixelBlock& b) const = 0;
};

// Summary statistics of the 4-neighbour Laplacian residual of a patch:
// (mean, standard deviation, mean absolute value, lag-1 horizontal
// autocorrelation). The residual suppresses scene content and keeps the
// noise/processing signature, which is what should drive patch similarity.
struct ResidualFeatures {
  std::array<double, 4> values{};
};

namespace detail {

// Pixels are normalized to [0,1] and the residual is scaled by a fixed factor
// so that feature distances for realistic noise levels land at O(1), where
// the default score decay rate is meaningful.
constexpr double kResidualScale = 4.0 / 255.0;

}  // namespace detail

inline ResidualFeatures residual_features(const PixelBlock& block) {
  const int s = block.size;
  ResidualFeatures f;
  if (s < 3) return f;  // no interior pixels, all statistics are zero
  double sum = 0.0, sum_sq = 0.0, sum_abs = 0.0;
  double pair_xy = 0.0, pair_x = 0.0, pair_y = 0.0;
  const long n = static_cast<long>(s - 2) * (s - 2);
  const long pairs = static_cast<long>(s - 2) * (s - 3);
  for (int y = 1; y < s - 1; ++y) {
    const uint8_t* row = block.pixels.data() + static_cast<size_t>(y) * s;
    const uint8_t* up = row - s;
    const uint8_t* down = row + s;
    double prev = 0.0;
    for (int x = 1; x < s - 1; ++x) {
      const double r = detail::kResidualScale *
                       (4.0 * row[x] - row[x - 1] - row[x + 1] - up[x] - down[x]);
      sum += r;
      sum_sq += r * r;
      sum_abs += std::fabs(r);
      if (x > 1) {
        pair_xy += prev * r;
        pair_x += prev;
        pair_y += r;
      }
      prev = r;
    }
  }
  const double mean = sum / static_cast<double>(n);
  double var = sum_sq / static_cast<double>(n) - mean * mean;
  if (var < 0.0) var = 0.0;
  f.values[0] = mean;
  f.values[1] = std::sqrt(var);
  f.values[2] = sum_abs / static_cast<double>(n);
  if (pairs > 0 && var > 0.0) {
    const double cov =
        pair_xy / static_cast<double>(pairs) -
        mean * (pair_x + pair_y) / static_cast<double>(pairs) + mean * mean;
    f.values[3] = cov / var;
  }
  return f;
}

// Reference provider: squared-exponential kernel over residual features.
// Identical patches score exactly 1; a flat patch has a zero residual and
// therefore also scores 1 against any other flat patch.
class ResidualSimilarityProvider : public SimilarityProvider {
 public:
  explicit ResidualSimilarityProvider(double gamma = 1.0) : gamma_(gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive, got " + std::to_string(gamma));
  }

  double gamma() const { return gamma_; }

  double score(const PixelBlock& a, const PixelBlock& b) const override {
    if (a.size != b.size)
      throw std::invalid_argument("patches of unequal size: " + std::to_string(a.size) + " vs " +
                                  std::to_string(b.size));
    const ResidualFeatures fa = residual_features(a);
    const ResidualFeatures fb = residual_features(b);
    double d2 = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double d = fa.values[k] - fb.values[k];
      d2 += d * d;
    }
    return std::exp(-gamma_ * d2);
  }

 private:
  double gamma_;
};

// Scores every unordered patch pair, exactly one provider call per pair.
// Deterministic for any worker count: each pair owns its two mirror slots.
inline SimilarityMatrix compute_matrix(const std::vector<PixelBlock>& blocks,
                                       const SimilarityProvider& provider) {
  const int n = static_cast<int>(blocks.size());
  if (n < 2) throw std::invalid_argument("similarity matrix needs at least 2 patches, got " + std::to_string(n));
  SimilarityMatrix s;
  s.n = n;
  s.values = Matrix(n, n, 0.0);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  parallel_for(0, static_cast<int>(pairs.size()), [&](int k) {
    const auto [i, j] = pairs[static_cast<size_t>(k)];
    double v;
    try {
      v = provider.score(blocks[i], blocks[j]);
    } catch (const std::exception& e) {
      throw std::runtime_error("similarity provider failed on pair (" + std::to_string(i) + ", " +
                               std::to_string(j) + "): " + e.what());
    }
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::runtime_error("similarity provider returned out-of-range score " + std::to_string(v) +
                               " on pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    s.values(i, j) = v;
    s.values(j, i) = v;
  });
  return s;
}

inline SimilarityMatrix compute_matrix(const ImageBuffer& img, const PatchSet& set,
                                       const SimilarityProvider& provider) {
  return compute_matrix(extract_all(img, set), provider);
}

namespace detail {

// 17 significant digits round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// FSM text format: header line "FSM <n>", then n rows of n values.
inline void save_matrix(const SimilarityMatrix& s, std::ostream& out) {
  out << "FSM " << s.n << "\n";
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) {
      if (j) out << ' ';
      out << detail::format_double(s.values(i, j));
    }
    out << '\n';
  }
}

inline void save_matrix(const SimilarityMatrix& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  save_matrix(s, out);
  if (!out) throw IoError("write failed: " + path);
}

inline SimilarityMatrix load_matrix(std::istream& in) {
  std::string magic;
  int n = -1;
  if (!(in >> magic) || magic != "FSM")
    throw FormatError("malformed similarity matrix: expected 'FSM' header, got '" + magic + "'");
  if (!(in >> n) || n < 1)
    throw FormatError("malformed similarity matrix: invalid dimension");
  SimilarityMatrix s;
  s.n = n;
  s.values = Matrix(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v;
      if (!(in >> v))
        throw FormatError("truncated similarity matrix at row " + std::to_string(i) + " column " +
                          std::to_string(j));
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw FormatError("similarity value out of range at row " + std::to_string(i) + " column " +
                          std::to_string(j) + ": " + detail::format_double(v));
      s.values(i, j) = v;
    }
  }
  std::string trailing;
  if (in >> trailing)
    throw FormatError("trailing data after similarity matrix: '" + trailing + "'");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::fabs(s.values(i, j) - s.values(j, i)) > 1e-9)
        throw FormatError("similarity matrix asymmetric at row " + std::to_string(i) + " column " +
                          std::to_string(j));
      const double v = 0.5 * (s.values(i, j) + s.values(j, i));
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
    s.values(i, i) = 0.0;
  }
  return s;
}

inline SimilarityMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open similarity matrix: " + path);
  return load_matrix(in);
}

}  // namespace fsg
