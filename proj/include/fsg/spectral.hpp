#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"
#include "fsg/graph.hpp"
#include "fsg/matrix.hpp"
#include "fsg/partition.hpp"

namespace fsg {

// Full eigendecomposition of a symmetric matrix. Eigenvalues ascend; row i of
// `vectors` is the unit eigenvector paired with eigenvalues[i], sign-fixed so
// the largest-magnitude component is positive (ties: lowest index wins).
struct Spectrum {
  std::vector<double> eigenvalues;
  Matrix vectors;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  const double* eigenvector(int i) const { return vectors.row(i); }
};

namespace detail {

// One cyclic Jacobi rotation pass over all (p, q) pairs. Each rotation only
// touches the two rows of A (and of the transposed eigenvector accumulator),
// which are contiguous and vectorize; the symmetric mirror columns are
// deferred and written in batches because strided column stores dominate the
// runtime at large n. Deferral is safe because of who reads what:
//   - column p is reconciled once per p-pass, at the end. Within the pass the
//     only reads of stale column-p slots happen at k == p of the fused loop,
//     and those results are discarded by the closed-form pivot updates below.
//   - columns q are mirrored once per chunk of kMirrorChunk consecutive
//     pivots, so the strided stores of neighbouring columns share cache
//     lines. Within a chunk, the fresh value of a stale row-q slot lives
//     transposed in the younger rotated row, so the rotation first patches
//     its in-chunk span from those rows, and a small transpose pass
//     reconciles the chunk's own block before the batched mirror. The mirror
//     skips row p (whose row is authoritative until the end of the p-pass)
//     and the chunk rows themselves.
// The rotation order and arithmetic are identical to the naive eager-mirror
// form, so results are bit-for-bit the same.
inline constexpr int kMirrorChunk = 8;  // doubles per cache line

inline bool jacobi_sweep(Matrix& a, Matrix& vt, int n, double skip) {
  bool rotated = false;
  double* base = a.data().data();
  for (int p = 0; p < n - 1; ++p) {
    double* rp = a.row(p);
    double* vp = vt.row(p);
    bool row_dirty = false;
    for (int q0 = p + 1; q0 < n; q0 += kMirrorChunk) {
      const int q1 = std::min(q0 + kMirrorChunk, n);
      bool chunk_dirty = false;
      bool spun[kMirrorChunk] = {};  // which in-chunk pivots actually rotated
      for (int q = q0; q < q1; ++q) {
        const double apq = rp[q];
        if (std::fabs(apq) <= skip) continue;
        rotated = true;
        row_dirty = true;
        chunk_dirty = true;
        spun[q - q0] = true;
        double* rq = a.row(q);
        double* vq = vt.row(q);
        const double app = rp[p];
        const double aqq = rq[q];
        const double diff = aqq - app;
        double t;
        if (std::fabs(apq) * 100.0 + std::fabs(diff) == std::fabs(diff)) {
          // |apq| is negligible against the diagonal gap; the small-angle
          // formula avoids overflow in theta^2.
          t = apq / diff;
        } else {
          const double theta = diff / (2.0 * apq);
          t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Patch the stale in-chunk span of row q from the younger rows.
        for (int k = q0; k < q; ++k) rq[k] = base[static_cast<size_t>(k) * n + q];
        for (int k = 0; k < n; ++k) {
          const double akp = rp[k];
          const double akq = rq[k];
          rp[k] = c * akp - s * akq;
          rq[k] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vp[k];
          const double vkq = vq[k];
          vp[k] = c * vkp - s * vkq;
          vq[k] = s * vkp + c * vkq;
        }
        // The 2x2 pivot block has a closed form; the generic update above is
        // not exact for it and would leave apq slightly nonzero.
        rp[p] = app - t * apq;
        rq[q] = aqq + t * apq;
        rp[q] = 0.0;
        rq[p] = 0.0;
      }
      if (!chunk_dirty) continue;
      // Reconcile the chunk's own block. For a pair (qi, qj) the younger
      // rotated row is authoritative; if only the older pivot rotated, its
      // row holds the fresh value and the copy has to go the other way.
      // Pairs where neither pivot rotated kept their pass-start values.
      for (int qi = q0; qi < q1; ++qi) {
        double* ri = a.row(qi);
        for (int qj = qi + 1; qj < q1; ++qj) {
          if (spun[qj - q0])
            ri[qj] = base[static_cast<size_t>(qj) * n + qi];
          else if (spun[qi - q0])
            base[static_cast<size_t>(qj) * n + qi] = ri[qj];
        }
      }
      // Batched column mirror; per k the stores for the chunk are adjacent.
      for (int k = 0; k < n; ++k) {
        if (k == p || (k >= q0 && k < q1)) continue;
        double* dst = base + static_cast<size_t>(k) * n;
        for (int q = q0; q < q1; ++q) dst[q] = base[static_cast<size_t>(q) * n + k];
      }
    }
    if (row_dirty) {
      double* colp = base + p;
      for (int k = 0; k < n; ++k) colp[static_cast<size_t>(k) * n] = rp[k];
    }
  }
  return rotated;
}

inline double max_offdiagonal(const Matrix& a, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = a.row(i);
    for (int j = i + 1; j < n; ++j) m = std::max(m, std::fabs(row[j]));
  }
  return m;
}

}  // namespace detail

// Cyclic Jacobi eigensolver. Input must be symmetric to 1e-9; it is averaged
// into exact symmetry before iterating. Converges when every off-diagonal
// element is below 1e-12 times the Frobenius norm of the input; more than
// 100 sweeps without convergence is reported as a numerical failure.
inline Spectrum eigh(const Matrix& input) {
  const int n = input.rows();
  if (n == 0 || input.cols() != n)
    throw std::invalid_argument("eigh requires a non-empty square matrix, got " +
                                std::to_string(input.rows()) + "x" + std::to_string(input.cols()));
  for (double v : input.data())
    if (!std::isfinite(v)) throw std::invalid_argument("eigh input contains a non-finite value");
  if (input.max_asymmetry() > 1e-9)
    throw std::invalid_argument("eigh input is not symmetric: max |a_ij - a_ji| = " +
                                std::to_string(input.max_asymmetry()));

  Matrix a = input;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }

  Matrix vt = Matrix::identity(n);
  const double tol = 1e-12 * a.frobenius_norm();

  int sweep = 0;
  for (; sweep < 100; ++sweep) {
    if (detail::max_offdiagonal(a, n) <= tol) break;
    detail::jacobi_sweep(a, vt, n, tol);
  }
  if (sweep == 100 && detail::max_offdiagonal(a, n) > tol)
    throw NumericalError("jacobi eigensolver did not converge after 100 sweeps, off-diagonal residual " +
                         std::to_string(detail::max_offdiagonal(a, n)));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  Spectrum spec;
  spec.eigenvalues.resize(n);
  spec.vectors = Matrix(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int src = order[i];
    spec.eigenvalues[i] = a(src, src);
    double* dst = spec.vectors.row(i);
    const double* v = vt.row(src);
    int peak = 0;
    for (int k = 1; k < n; ++k)
      if (std::fabs(v[k]) > std::fabs(v[peak])) peak = k;
    const double flip = v[peak] < 0.0 ? -1.0 : 1.0;
    for (int k = 0; k < n; ++k) dst[k] = flip * v[k];
  }
  return spec;
}

inline Spectrum eigh(const LaplacianMatrix& l) { return eigh(l.values); }

// Whole-image rule: a strong second eigenvalue means the graph has no
// low-weight cut, i.e. the patches form one community.
inline DetectionResult detect_spectral_gap(const Spectrum& spec, double tau) {
  if (spec.size() < 2) throw std::invalid_argument("spectral gap needs at least 2 vertices");
  DetectionResult r;
  r.method = "spectral-gap";
  r.statistic = spec.eigenvalues[1];
  r.tau = tau;
  r.decision = r.statistic >= tau ? Decision::Unaltered : Decision::Forged;
  return r;
}

// Two-way split by the sign structure of the second eigenvector.
inline Partition partition_sign(const Spectrum& spec) {
  if (spec.size() < 2) throw std::invalid_argument("sign partition needs at least 2 vertices");
  Partition p;
  p.k = 2;
  p.labels.reserve(spec.size());
  const double* u2 = spec.eigenvector(1);
  for (int i = 0; i < spec.size(); ++i) p.labels.push_back(u2[i] >= 0.0 ? 1 : 2);
  p.score = spec.eigenvalues[1];
  return p;
}

// k-way split: embed vertex i as (u_1[i], ..., u_k[i]) and run Lloyd k-means
// with deterministic farthest-point seeding. All tie-breaks resolve to the
// lowest index, so the result is a pure function of (spectrum, k, seed).
inline Partition partition_kmeans(const Spectrum& spec, int k, uint64_t seed) {
  const int n = spec.size();
  if (k < 2 || k > n)
    throw std::invalid_argument("kmeans community count must lie in [2, n], got k=" + std::to_string(k) +
                                " for n=" + std::to_string(n));
  std::vector<std::vector<double>> points(n, std::vector<double>(k));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) points[i][j] = spec.vectors(j, i);

  auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (int j = 0; j < k; ++j) {
      const double diff = a[j] - b[j];
      d += diff * diff;
    }
    return d;
  };

  std::vector<std::vector<double>> centers;
  centers.push_back(points[static_cast<int>(seed % static_cast<uint64_t>(n))]);
  std::vector<double> nearest(n);
  while (static_cast<int>(centers.size()) < k) {
    for (int i = 0; i < n; ++i) {
      double best = dist2(points[i], centers[0]);
      for (size_t c = 1; c < centers.size(); ++c) best = std::min(best, dist2(points[i], centers[c]));
      nearest[i] = best;
    }
    int far = 0;
    for (int i = 1; i < n; ++i)
      if (nearest[i] > nearest[far]) far = i;
    centers.push_back(points[far]);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(points[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(k, 0.0);
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (assign[i] != c) continue;
        ++count;
        for (int j = 0; j < k; ++j) mean[j] += points[i][j];
      }
      if (count == 0) continue;  // empty cluster keeps its previous center
      for (int j = 0; j < k; ++j) centers[c][j] = mean[j] / count;
    }
  }

  Partition p = canonical_partition(assign);
  double sse = 0.0;
  for (int i = 0; i < n; ++i) sse += dist2(points[i], centers[assign[i]]);
  p.score = sse;
  return p;
}

inline void save_spectrum_tsv(const Spectrum& spec, std::ostream& out) {
  out << "lambda_i\tvalue\n";
  for (int i = 0; i < spec.size(); ++i)
    out << (i + 1) << '\t' << detail::format_double(spec.eigenvalues[i]) << '\n';
}

inline void save_spectrum_tsv(const Spectrum& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  save_spectrum_tsv(spec, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fsg
