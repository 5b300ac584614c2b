#include "fsg/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "fsg/graph.hpp"
#include "fsg/random.hpp"
#include "oracles.hpp"

using fsg::build_graph;
using fsg::canonical_partition;
using fsg::Decision;
using fsg::detect_spectral_gap;
using fsg::DetectionResult;
using fsg::eigh;
using fsg::laplacian;
using fsg::LaplacianKind;
using fsg::Matrix;
using fsg::Partition;
using fsg::partition_kmeans;
using fsg::partition_sign;
using fsg::Rng;
using fsg::save_spectrum_tsv;
using fsg::SimilarityGraph;
using fsg::SimilarityMatrix;
using fsg::Spectrum;

namespace {

SimilarityMatrix similarity_from(const Matrix& values) {
  SimilarityMatrix s;
  s.n = values.rows();
  s.values = values;
  return s;
}

// Unnormalized Laplacian of a weighted similarity matrix with no threshold.
Matrix laplacian_of(const Matrix& weights) {
  return laplacian(build_graph(similarity_from(weights), 0.0), LaplacianKind::Unnormalized).values;
}

Matrix clique_blocks(const std::vector<int>& sizes, double inside, double outside) {
  int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  Matrix w(n, n, 0.0);
  std::vector<int> block_of(static_cast<size_t>(n));
  int v = 0;
  for (size_t b = 0; b < sizes.size(); ++b)
    for (int k = 0; k < sizes[b]; ++k) block_of[static_cast<size_t>(v++)] = static_cast<int>(b);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      w(i, j) = block_of[static_cast<size_t>(i)] == block_of[static_cast<size_t>(j)] ? inside
                                                                                     : outside;
    }
  return w;
}

Matrix random_symmetric(int n, uint64_t seed, double scale = 1.0) {
  Matrix a(n, n, 0.0);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = scale * (2.0 * rng.uniform() - 1.0);
  return a;
}

// Random symmetric positive semidefinite matrix B^T B.
Matrix random_psd(int n, uint64_t seed) {
  Matrix b = random_symmetric(n, seed);
  Matrix a(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += b(k, i) * b(k, j);
      a(i, j) = s;
    }
  return a;
}

TEST(Eigh, CompleteGraphSpectrum) {
  // K_n with unit weights: Laplacian eigenvalues are 0 and n (multiplicity n-1).
  for (int n = 3; n <= 8; ++n) {
    Spectrum spec = eigh(laplacian_of(clique_blocks({n}, 1.0, 1.0)));
    ASSERT_EQ(spec.size(), n);
    EXPECT_NEAR(spec.eigenvalues[0], 0.0, 1e-9);
    for (int i = 1; i < n; ++i) EXPECT_NEAR(spec.eigenvalues[i], n, 1e-9) << "n=" << n;
  }
}

TEST(Eigh, PathGraphOnThreeVertices) {
  Matrix w(3, 3, 0.0);
  w(0, 1) = w(1, 0) = 1.0;
  w(1, 2) = w(2, 1) = 1.0;
  Spectrum spec = eigh(laplacian_of(w));
  EXPECT_NEAR(spec.eigenvalues[0], 0.0, 1e-9);
  EXPECT_NEAR(spec.eigenvalues[1], 1.0, 1e-9);
  EXPECT_NEAR(spec.eigenvalues[2], 3.0, 1e-9);
}

TEST(Eigh, DisconnectedCliquesHaveZeroMultiplicityTwo) {
  Spectrum spec = eigh(laplacian_of(clique_blocks({4, 4}, 1.0, 0.0)));
  EXPECT_LT(std::fabs(spec.eigenvalues[0]), 1e-8);
  EXPECT_LT(std::fabs(spec.eigenvalues[1]), 1e-8);
  EXPECT_GT(spec.eigenvalues[2], 1e-8);
}

TEST(Eigh, ZeroEigenvalueCountEqualsComponentCount) {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int components = 1 + static_cast<int>(rng.uniform_int(5));
    std::vector<int> sizes;
    int total = 0;
    for (int c = 0; c < components; ++c) {
      const int s = 2 + static_cast<int>(rng.uniform_int(6));
      sizes.push_back(s);
      total += s;
    }
    Matrix w = clique_blocks(sizes, 0.0, 0.0);
    // random positive weights inside each block keep blocks connected
    {
      int offset = 0;
      for (int s : sizes) {
        for (int i = 0; i < s; ++i)
          for (int j = i + 1; j < s; ++j) {
            const double v = 0.5 + 0.5 * rng.uniform();
            w(offset + i, offset + j) = v;
            w(offset + j, offset + i) = v;
          }
        offset += s;
      }
    }
    ASSERT_EQ(oracle::count_components(w), components);
    Spectrum spec = eigh(laplacian_of(w));
    int zeros = 0;
    for (double v : spec.eigenvalues) zeros += std::fabs(v) < 1e-8 ? 1 : 0;
    EXPECT_EQ(zeros, components) << "n=" << total;
  }
}

TEST(Eigh, MatchesCharacteristicPolynomialRoots) {
  Rng rng(505);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4
    Matrix a = random_symmetric(n, 600 + static_cast<uint64_t>(trial), 3.0);
    Spectrum spec = eigh(a);

    // Library eigenvalues are roots of det(xI - A)...
    std::vector<double> coeff = oracle::charpoly_coefficients(a);
    double poly_scale = 1.0;
    for (double c : coeff) poly_scale = std::max(poly_scale, std::fabs(c));
    for (double lambda : spec.eigenvalues)
      EXPECT_LE(std::fabs(oracle::charpoly_eval(coeff, lambda)), 1e-8 * poly_scale);

    // ...and agree one-by-one with bisection on the inertia count.
    std::vector<double> ref = oracle::bisection_eigenvalues(a);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(spec.eigenvalues[i], ref[static_cast<size_t>(i)], 1e-8);
  }
}

TEST(Eigh, ReconstructsTheInputMatrix) {
  Rng rng(707);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(19));  // 2..20
    Matrix a = random_psd(n, 800 + static_cast<uint64_t>(trial));
    Spectrum spec = eigh(a);
    const double tol = 1e-8 * std::max(a.frobenius_norm(), 1.0);

    // sum_k lambda_k u_k u_k^T must reproduce A entrywise.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          s += spec.eigenvalues[static_cast<size_t>(k)] * spec.vectors(k, i) * spec.vectors(k, j);
        ASSERT_NEAR(s, a(i, j), tol) << "n=" << n << " trial=" << trial;
      }

    // eigenvectors are orthonormal
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += spec.vectors(p, i) * spec.vectors(q, i);
        ASSERT_NEAR(dot, p == q ? 1.0 : 0.0, 1e-8);
      }

    // ascending eigenvalue order
    for (int i = 1; i < n; ++i)
      EXPECT_LE(spec.eigenvalues[static_cast<size_t>(i - 1)],
                spec.eigenvalues[static_cast<size_t>(i)]);
  }
}

TEST(Eigh, DiagonalMatrixCanonicalSigns) {
  Matrix a(3, 3, 0.0);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  Spectrum spec = eigh(a);
  EXPECT_NEAR(spec.eigenvalues[0], 1.0, 1e-12);
  EXPECT_NEAR(spec.eigenvalues[1], 2.0, 1e-12);
  EXPECT_NEAR(spec.eigenvalues[2], 3.0, 1e-12);
  // canonical sign: the largest-magnitude component is positive
  EXPECT_NEAR(spec.vectors(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(spec.vectors(1, 2), 1.0, 1e-12);
  EXPECT_NEAR(spec.vectors(2, 0), 1.0, 1e-12);
}

TEST(Eigh, DeterministicAcrossCalls) {
  Matrix a = random_psd(12, 4242);
  Spectrum s1 = eigh(a);
  Spectrum s2 = eigh(a);
  EXPECT_EQ(s1.eigenvalues, s2.eigenvalues);
  EXPECT_TRUE(s1.vectors == s2.vectors);
}

TEST(Eigh, PermutationEquivariantLambda2) {
  Matrix w = clique_blocks({5, 4}, 0.9, 0.1);
  const int n = w.rows();
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(11);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<size_t>(i)], perm[rng.uniform_int(static_cast<uint64_t>(i) + 1)]);

  Matrix wp(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      wp(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]) = w(i, j);

  Spectrum orig = eigh(laplacian_of(w));
  Spectrum permuted = eigh(laplacian_of(wp));
  EXPECT_NEAR(orig.eigenvalues[1], permuted.eigenvalues[1], 1e-9);

  // the sign split moves with the permutation (same grouping of vertices)
  Partition p1 = partition_sign(orig);
  Partition p2 = partition_sign(permuted);
  std::vector<int> relabeled(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    relabeled[static_cast<size_t>(i)] = p2.labels[static_cast<size_t>(perm[static_cast<size_t>(i)])];
  EXPECT_TRUE(oracle::same_grouping(p1.labels, relabeled));
}

TEST(Eigh, RejectsAsymmetricInput) {
  Matrix a(2, 2, 0.0);
  a(0, 1) = 1.0;
  a(1, 0) = 1.0 + 1e-6;
  EXPECT_THROW(eigh(a), std::invalid_argument);
  // rounding-level asymmetry is symmetrized instead
  a(1, 0) = 1.0 + 1e-10;
  Spectrum spec = eigh(a);
  EXPECT_EQ(spec.size(), 2);
}

TEST(Eigh, RejectsNonFiniteAndEmptyInput) {
  Matrix a(2, 2, 0.0);
  a(0, 1) = a(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(eigh(a), std::invalid_argument);
  EXPECT_THROW(eigh(Matrix()), std::invalid_argument);
  EXPECT_THROW(eigh(Matrix(2, 3, 0.0)), std::invalid_argument);
}

Spectrum fake_spectrum(std::vector<double> eigenvalues, const Matrix& vectors) {
  Spectrum s;
  s.eigenvalues = std::move(eigenvalues);
  s.vectors = vectors;
  return s;
}

TEST(DetectSpectralGap, GapAboveTauIsUnaltered) {
  Spectrum s = fake_spectrum({0.0, 318.42}, Matrix::identity(2));
  DetectionResult r = detect_spectral_gap(s, 100.0);
  EXPECT_EQ(r.decision, Decision::Unaltered);
  EXPECT_EQ(r.statistic, 318.42);
  EXPECT_EQ(r.method, "spectral-gap");
  EXPECT_EQ(r.tau, 100.0);
}

TEST(DetectSpectralGap, GapBelowTauIsForged) {
  Spectrum s = fake_spectrum({0.0, 4.28}, Matrix::identity(2));
  EXPECT_EQ(detect_spectral_gap(s, 100.0).decision, Decision::Forged);
}

TEST(DetectSpectralGap, BoundaryCountsAsUnaltered) {
  Spectrum s = fake_spectrum({0.0, 100.0}, Matrix::identity(2));
  EXPECT_EQ(detect_spectral_gap(s, 100.0).decision, Decision::Unaltered);
}

TEST(DetectSpectralGap, NeedsAtLeastTwoVertices) {
  Spectrum s = fake_spectrum({0.0}, Matrix::identity(1));
  EXPECT_THROW(detect_spectral_gap(s, 100.0), std::invalid_argument);
}

// With a weak bridge the Fiedler vector is unique and constant-signed per
// block. (Fully disconnected blocks make lambda_2 = 0 degenerate, where the
// sign of an arbitrary nullspace basis says nothing — that case belongs to
// the k-means split below.)
TEST(PartitionSign, SplitsWeaklyCoupledCliques) {
  Spectrum spec = eigh(laplacian_of(clique_blocks({3, 3}, 1.0, 0.05)));
  Partition p = partition_sign(spec);
  EXPECT_EQ(p.k, 2);
  EXPECT_EQ(p.labels[0], p.labels[1]);
  EXPECT_EQ(p.labels[0], p.labels[2]);
  EXPECT_EQ(p.labels[3], p.labels[4]);
  EXPECT_EQ(p.labels[3], p.labels[5]);
  EXPECT_NE(p.labels[0], p.labels[3]);
  EXPECT_EQ(p.score, spec.eigenvalues[1]);
}

TEST(PartitionSign, NonNegativeComponentsGoToCommunityOne) {
  Matrix vectors(2, 2, 0.0);
  vectors(0, 0) = vectors(0, 1) = 1.0 / std::sqrt(2.0);
  vectors(1, 0) = 0.0;  // exactly zero lands in community 1
  vectors(1, 1) = -1.0;
  Partition p = partition_sign(fake_spectrum({0.0, 1.0}, vectors));
  EXPECT_EQ(p.labels, (std::vector<int>{1, 2}));
}

TEST(PartitionSign, AgreesWithMinimumRatioCut) {
  Matrix w = clique_blocks({4, 4}, 0.9, 0.1);
  Partition p = partition_sign(eigh(laplacian_of(w)));
  std::vector<int> best = oracle::min_ratio_cut(w);
  EXPECT_TRUE(oracle::same_grouping(p.labels, best));
}

TEST(PartitionKmeans, TwoCliquesMatchSignSplit) {
  Spectrum spec = eigh(laplacian_of(clique_blocks({4, 3}, 0.9, 0.05)));
  Partition sign = partition_sign(spec);
  Partition km = partition_kmeans(spec, 2, 0);
  EXPECT_TRUE(oracle::same_grouping(sign.labels, km.labels));
}

// Fully disconnected blocks: both zero eigenvectors are block indicators, so
// the 2-vector embedding has exactly two distinct points.
TEST(PartitionKmeans, SeparatesDisconnectedCliques) {
  Spectrum spec = eigh(laplacian_of(clique_blocks({3, 3}, 1.0, 0.0)));
  Partition p = partition_kmeans(spec, 2, 0);
  EXPECT_EQ(p.labels[0], p.labels[1]);
  EXPECT_EQ(p.labels[0], p.labels[2]);
  EXPECT_EQ(p.labels[3], p.labels[4]);
  EXPECT_EQ(p.labels[3], p.labels[5]);
  EXPECT_NE(p.labels[0], p.labels[3]);
}

TEST(PartitionKmeans, RecoversThreePlantedCliques) {
  Matrix w = clique_blocks({4, 4, 4}, 0.9, 0.05);
  Partition p = partition_kmeans(eigh(laplacian_of(w)), 3, 0);
  EXPECT_EQ(p.k, 3);
  std::vector<int> truth(12);
  for (int i = 0; i < 12; ++i) truth[static_cast<size_t>(i)] = i / 4;
  EXPECT_TRUE(oracle::same_grouping(p.labels, truth));
}

TEST(PartitionKmeans, CanonicalLabelsFirstOccurrenceOrder) {
  Matrix w = clique_blocks({3, 3, 3}, 0.9, 0.05);
  Partition p = partition_kmeans(eigh(laplacian_of(w)), 3, 7);
  EXPECT_EQ(p.labels[0], 1);  // first vertex always opens community 1
  int seen = 1;
  for (int label : p.labels) {
    EXPECT_LE(label, seen + 1);
    seen = std::max(seen, label);
  }
  EXPECT_EQ(seen, 3);
}

TEST(PartitionKmeans, SeedChangesAreStillValidPartitions) {
  Spectrum spec = eigh(laplacian_of(clique_blocks({5, 5}, 0.8, 0.2)));
  for (uint64_t seed : {0ull, 1ull, 2ull, 99ull}) {
    Partition p = partition_kmeans(spec, 2, seed);
    EXPECT_EQ(p.size(), 10);
    EXPECT_EQ(p.k, 2);
    EXPECT_NO_THROW(fsg::validate_partition(p));
  }
}

TEST(PartitionKmeans, RejectsBadK) {
  Spectrum spec = eigh(laplacian_of(clique_blocks({3, 3}, 1.0, 0.0)));
  EXPECT_THROW(partition_kmeans(spec, 1, 0), std::invalid_argument);
  EXPECT_THROW(partition_kmeans(spec, 7, 0), std::invalid_argument);
}

TEST(SpectrumTsv, WritesIndexedEigenvalues) {
  Spectrum s = fake_spectrum({0.0, 2.5}, Matrix::identity(2));
  std::ostringstream out;
  save_spectrum_tsv(s, out);
  EXPECT_EQ(out.str(), "lambda_i\tvalue\n1\t0\n2\t2.5\n");
}

}  // namespace
