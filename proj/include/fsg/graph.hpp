#pragma once

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"
#include "fsg/matrix.hpp"
#include "fsg/similarity.hpp"

namespace fsg {

// Weighted undirected graph over patches: W_ij = S_ij where S_ij >= t, else
// 0. Keeping the dense matrix is deliberate — n stays in the hundreds for
// realistic images and every consumer (Laplacian, modularity) wants dense
// scans anyway.
struct SimilarityGraph {
  int n = 0;
  Matrix weights;
  double threshold = 0.0;
  std::vector<double> degree;  // d_i = sum_j W_ij
  double total_weight = 0.0;   // m = sum of edge weights, each edge once
};

inline SimilarityGraph build_graph(const SimilarityMatrix& s, double threshold) {
  if (s.n < 1) throw std::invalid_argument("similarity matrix is empty");
  if (!(threshold >= 0.0) || threshold >= 1.0)
    throw std::invalid_argument("edge threshold must lie in [0, 1), got " + std::to_string(threshold));
  SimilarityGraph g;
  g.n = s.n;
  g.threshold = threshold;
  g.weights = Matrix(s.n, s.n, 0.0);
  g.degree.assign(s.n, 0.0);
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      const double v = s.values(i, j);
      if (v >= threshold && v > 0.0) {
        g.weights(i, j) = v;
        g.weights(j, i) = v;
        g.degree[i] += v;
        g.degree[j] += v;
        g.total_weight += v;
      }
    }
  }
  return g;
}

inline int edge_count(const SimilarityGraph& g) {
  int count = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.weights(i, j) > 0.0) ++count;
  return count;
}

enum class LaplacianKind { Unnormalized, Normalized };

struct LaplacianMatrix {
  int n = 0;
  Matrix values;
  LaplacianKind kind = LaplacianKind::Unnormalized;
};

// L = D - W, or the symmetric normalized form D^{-1/2} L D^{-1/2}. Isolated
// vertices have degree 0; the normalized form treats 0/0 as 0, which leaves
// such a vertex as an all-zero row (its own connected component).
inline LaplacianMatrix laplacian(const SimilarityGraph& g, LaplacianKind kind) {
  LaplacianMatrix l;
  l.n = g.n;
  l.kind = kind;
  l.values = Matrix(g.n, g.n, 0.0);
  if (kind == LaplacianKind::Unnormalized) {
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j)
        if (j != i) l.values(i, j) = -g.weights(i, j);
      l.values(i, i) = g.degree[i];
    }
  } else {
    std::vector<double> inv_sqrt(g.n, 0.0);
    for (int i = 0; i < g.n; ++i)
      if (g.degree[i] > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(g.degree[i]);
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        if (j == i) {
          l.values(i, i) = g.degree[i] > 0.0 ? 1.0 : 0.0;
        } else {
          l.values(i, j) = -g.weights(i, j) * inv_sqrt[i] * inv_sqrt[j];
        }
      }
    }
  }
  return l;
}

// Edge list as TSV: "i<TAB>j<TAB>weight" with i < j, positive weights only.
inline void save_edges_tsv(const SimilarityGraph& g, std::ostream& out) {
  out << "i\tj\tw\n";
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.weights(i, j) > 0.0)
        out << i << '\t' << j << '\t' << detail::format_double(g.weights(i, j)) << '\n';
}

inline void save_edges_tsv(const SimilarityGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  save_edges_tsv(g, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fsg
