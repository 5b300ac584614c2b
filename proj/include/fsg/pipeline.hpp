#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fsg/graph.hpp"
#include "fsg/image.hpp"
#include "fsg/localize.hpp"
#include "fsg/metrics.hpp"
#include "fsg/modularity.hpp"
#include "fsg/patch.hpp"
#include "fsg/similarity.hpp"
#include "fsg/spectral.hpp"
#include "fsg/synth.hpp"

namespace fsg {

// Everything an analysis run needs. Negative sentinel values mean "resolve
// the method's default" so the CLI can distinguish "user said 0.7" from
// "user said nothing".
struct RunConfig {
  std::string image_path;   // exactly one of image_path / matrix_path is set
  std::string matrix_path;
  std::string patches_path;  // patch table, required with matrix input for localization
  int image_width = 0;       // image dimensions for matrix-input localization
  int image_height = 0;
  std::string method = "spectral-gap";
  int patch_size = 128;
  double overlap = -1.0;          // default: 0.5 for detection, 0.75 for localization
  double edge_threshold = -1.0;   // default: 0 spectral/baselines, 0.7 modularity
  double tau = -1.0;              // default: 100 spectral-gap, 0.025 modularity, 0.5 baselines
  int k = 2;
  int alpha = 0;                  // 0 = automatic (smaller community)
  int window = 32;
  double sigma = -1.0;            // default: window / 6
  double mask_threshold = 0.5;
  double gamma = 1.0;
  uint64_t seed = 0;
};

inline double default_edge_threshold(const std::string& method) {
  if (method == "modularity" || method == "modularity-loc") return 0.7;
  return 0.0;
}

inline double default_tau(const std::string& method) {
  if (method == "spectral-gap") return 100.0;
  if (method == "modularity") return 0.025;
  return 0.5;  // mean-sim / min-sim operating point; evaluation rarely uses it
}

inline double default_overlap(bool localization) { return localization ? 0.75 : 0.5; }

// Wall-clock stage costs, milliseconds. The eigendecomposition is also
// reported on its own because it dominates the community stage for the
// spectral methods.
struct StageTimings {
  double features_ms = 0.0;
  double graph_ms = 0.0;
  double community_ms = 0.0;
  double eigendecomposition_ms = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Loads or computes the similarity matrix and, for image input, the patch
// layout. Patch-stage and pair-stage costs go to separate timers.
struct PreparedInput {
  SimilarityMatrix matrix;
  PatchSet patches;  // empty for matrix input without a patch table
  bool has_patches = false;
};

inline PreparedInput prepare_input(const RunConfig& config, bool localization, double overlap,
                                   StageTimings& timing) {
  PreparedInput prep;
  if (!config.image_path.empty() && !config.matrix_path.empty())
    throw std::invalid_argument("give either an image or a similarity matrix, not both");
  if (config.image_path.empty() && config.matrix_path.empty())
    throw std::invalid_argument("no input: expected an image or a similarity matrix");
  if (!config.image_path.empty()) {
    const ImageBuffer img = load_pgm(config.image_path);
    auto t0 = Clock::now();
    prep.patches = sample_patches(img, config.patch_size, overlap);
    const std::vector<PixelBlock> blocks = extract_all(img, prep.patches);
    prep.has_patches = true;
    timing.features_ms = ms_since(t0);
    t0 = Clock::now();
    const ResidualSimilarityProvider provider(config.gamma);
    prep.matrix = compute_matrix(blocks, provider);
    timing.graph_ms = ms_since(t0);
  } else {
    prep.matrix = load_matrix(config.matrix_path);
    if (!config.patches_path.empty()) {
      if (config.image_width < 1 || config.image_height < 1)
        throw std::invalid_argument("matrix input with a patch table needs --width and --height");
      prep.patches = load_patches_tsv(config.patches_path, config.image_width, config.image_height);
      if (prep.patches.size() != prep.matrix.n)
        throw std::invalid_argument("patch table has " + std::to_string(prep.patches.size()) +
                                    " entries, similarity matrix has " + std::to_string(prep.matrix.n));
      prep.has_patches = true;
    } else if (localization) {
      throw std::invalid_argument("localization from a similarity matrix needs --patches");
    }
  }
  return prep;
}

}  // namespace detail

struct DetectOutcome {
  DetectionResult result;
  int n = 0;
  double edge_threshold = 0.0;
  StageTimings timing;
};

inline DetectOutcome run_detect(const RunConfig& config) {
  DetectOutcome out;
  const double overlap = config.overlap < 0.0 ? default_overlap(false) : config.overlap;
  const double threshold =
      config.edge_threshold < 0.0 ? default_edge_threshold(config.method) : config.edge_threshold;
  const double tau = config.tau < 0.0 ? default_tau(config.method) : config.tau;
  detail::PreparedInput prep = detail::prepare_input(config, false, overlap, out.timing);
  out.n = prep.matrix.n;
  out.edge_threshold = threshold;

  auto t0 = detail::Clock::now();
  if (config.method == "spectral-gap") {
    const SimilarityGraph g = build_graph(prep.matrix, threshold);
    const LaplacianMatrix l = laplacian(g, LaplacianKind::Unnormalized);
    auto te = detail::Clock::now();
    const Spectrum spec = eigh(l);
    out.timing.eigendecomposition_ms = detail::ms_since(te);
    out.result = detect_spectral_gap(spec, tau);
  } else if (config.method == "modularity") {
    const SimilarityGraph g = build_graph(prep.matrix, threshold);
    out.result = detect_modularity(fast_greedy(g), tau);
  } else if (config.method == "mean-sim") {
    out.result = detect_baseline(mean_similarity(prep.matrix), "mean-sim", tau);
  } else if (config.method == "min-sim") {
    out.result = detect_baseline(min_similarity(prep.matrix), "min-sim", tau);
  } else {
    throw std::invalid_argument("unknown detection method '" + config.method + "'");
  }
  out.timing.community_ms = detail::ms_since(t0);
  return out;
}

struct LocalizeOutcome {
  Partition partition;
  int alpha = 0;
  double statistic = 0.0;  // lambda_2 or Q of the reported partition
  PixelMaps maps;
  BinaryMask mask;
  int n = 0;
  double edge_threshold = 0.0;
  StageTimings timing;
};

inline LocalizeOutcome run_localize(const RunConfig& config) {
  LocalizeOutcome out;
  const double overlap = config.overlap < 0.0 ? default_overlap(true) : config.overlap;
  const double threshold =
      config.edge_threshold < 0.0 ? default_edge_threshold(config.method) : config.edge_threshold;
  detail::PreparedInput prep = detail::prepare_input(config, true, overlap, out.timing);
  out.n = prep.matrix.n;
  out.edge_threshold = threshold;

  auto t0 = detail::Clock::now();
  if (config.method == "spectral" || config.method == "normed-spectral") {
    const SimilarityGraph g = build_graph(prep.matrix, threshold);
    const LaplacianKind kind =
        config.method == "spectral" ? LaplacianKind::Unnormalized : LaplacianKind::Normalized;
    const LaplacianMatrix l = laplacian(g, kind);
    auto te = detail::Clock::now();
    const Spectrum spec = eigh(l);
    out.timing.eigendecomposition_ms = detail::ms_since(te);
    out.partition = config.k == 2 ? partition_sign(spec) : partition_kmeans(spec, config.k, config.seed);
    out.statistic = spec.eigenvalues[1];
  } else if (config.method == "modularity-loc") {
    const SimilarityGraph g = build_graph(prep.matrix, threshold);
    out.partition = localize_modularity(g, config.k);
    out.statistic = out.partition.score;
  } else {
    throw std::invalid_argument("unknown localization method '" + config.method + "'");
  }
  out.timing.community_ms = detail::ms_since(t0);

  out.alpha = config.alpha != 0 ? config.alpha : select_alpha(out.partition);
  if (out.alpha < 1 || out.alpha > out.partition.k)
    throw std::invalid_argument("community " + std::to_string(out.alpha) + " outside 1.." +
                                std::to_string(out.partition.k));
  out.maps = build_pixel_maps(prep.patches, out.partition, out.alpha);
  const double sigma = config.sigma > 0.0 ? config.sigma : config.window / 6.0;
  out.mask = smooth_and_threshold(out.maps, config.window, sigma, config.mask_threshold);
  return out;
}

// ---- JSON reports ---------------------------------------------------------
// The timing subtree is the only nondeterministic part of any report.

inline nlohmann::json to_json(const StageTimings& t) {
  return {{"features", t.features_ms},
          {"graph", t.graph_ms},
          {"community", t.community_ms},
          {"eigendecomposition", t.eigendecomposition_ms}};
}

inline nlohmann::json detect_report(const DetectOutcome& out, const RunConfig& config) {
  return {{"command", "detect"},
          {"method", out.result.method},
          {"statistic", out.result.statistic},
          {"tau", out.result.tau},
          {"decision", to_string(out.result.decision)},
          {"n", out.n},
          {"edge_threshold", out.edge_threshold},
          {"gamma", config.gamma},
          {"patch_size", config.patch_size},
          {"timing_ms", to_json(out.timing)}};
}

inline nlohmann::json localize_report(const LocalizeOutcome& out, const RunConfig& config) {
  Partition p = out.partition;
  return {{"command", "localize"},
          {"method", config.method},
          {"statistic", out.statistic},
          {"k", out.partition.k},
          {"alpha", out.alpha},
          {"community_sizes", community_sizes(p)},
          {"n", out.n},
          {"edge_threshold", out.edge_threshold},
          {"gamma", config.gamma},
          {"patch_size", config.patch_size},
          {"seed", config.seed},
          {"timing_ms", to_json(out.timing)}};
}

inline nlohmann::json to_json(const BenchReport& report, double runtime_ms) {
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& size : report.sizes) {
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& m : size.methods) {
      methods[m.method] = {{"auc", m.auc}, {"pd_at_pfa", m.pd}, {"map", m.map}};
    }
    sizes.push_back({{"block_size", size.block_size},
                     {"relative_area", size.relative_area},
                     {"methods", methods}});
  }
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& size : report.sizes)
    for (const auto& m : size.methods)
      if (m.method == "spectral-gap")
        curve.push_back({{"relative_area", size.relative_area}, {"auc", m.auc}});
  return {{"command", "bench"},
          {"config",
           {{"width", report.config.image_width},
            {"height", report.config.image_height},
            {"patch_size", report.config.patch_size},
            {"overlap", report.config.overlap},
            {"forged", report.config.forged_count},
            {"unaltered", report.config.unaltered_count},
            {"gamma", report.config.gamma},
            {"modularity_threshold", report.config.modularity_threshold},
            {"pfa", report.config.pfa},
            {"seed", report.config.seed}}},
          {"sizes", sizes},
          {"relative_size_curve", curve},
          {"timing_ms", {{"total", runtime_ms}}}};
}

}  // namespace fsg
