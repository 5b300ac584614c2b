#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"
#include "fsg/graph.hpp"
#include "fsg/image.hpp"
#include "fsg/localize.hpp"
#include "fsg/metrics.hpp"
#include "fsg/modularity.hpp"
#include "fsg/patch.hpp"
#include "fsg/random.hpp"
#include "fsg/similarity.hpp"
#include "fsg/spectral.hpp"

namespace fsg {

// Synthetic capture model: a smooth intensity gradient plus Gaussian sensor
// noise, optionally followed by a 3x3 in-camera filter and re-quantization.
// The noise level drifts horizontally (noise_sigma_slope) so that even a
// pristine image is not statistically uniform — patch similarity within one
// image varies smoothly, while a different model produces a distinctly
// different residual signature.
struct SourceModel {
  int id = 0;
  double base_offset = 128.0;
  double gradient_x = 0.0;  // intensity change across the full width
  double gradient_y = 0.0;  // intensity change across the full height
  double noise_sigma = 3.0;
  double noise_sigma_slope = 0.0;  // sigma change across the full width
  std::optional<std::array<double, 9>> blur_kernel;  // row-major 3x3, non-negative
  int quantization_step = 1;
};

// Two frozen presets with deliberately different residual statistics: the
// second model is noisier, low-pass filtered and more coarsely quantized.
inline SourceModel source_model_preset(int id) {
  switch (id) {
    case 0: {
      SourceModel m;
      m.id = 0;
      m.base_offset = 80.0;
      m.gradient_x = 60.0;
      m.gradient_y = 30.0;
      m.noise_sigma = 4.0;
      m.noise_sigma_slope = 14.0;
      m.quantization_step = 1;
      return m;
    }
    case 1: {
      SourceModel m;
      m.id = 1;
      m.base_offset = 120.0;
      m.gradient_x = -50.0;
      m.gradient_y = 40.0;
      m.noise_sigma = 12.0;
      m.noise_sigma_slope = 10.0;
      m.blur_kernel = {{0.0625, 0.125, 0.0625, 0.125, 0.25, 0.125, 0.0625, 0.125, 0.0625}};
      m.quantization_step = 2;
      return m;
    }
    default:
      throw std::invalid_argument("unknown source model preset " + std::to_string(id));
  }
}

namespace detail {

// 3x3 convolution with border renormalization by the in-bounds weight sum.
inline std::vector<double> convolve3(const std::vector<double>& in, int width, int height,
                                     const std::array<double, 9>& kernel) {
  std::vector<double> out(in.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double num = 0.0, den = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= height) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= width) continue;
          const double w = kernel[static_cast<size_t>((dy + 1) * 3 + dx + 1)];
          num += w * in[static_cast<size_t>(yy) * width + xx];
          den += w;
        }
      }
      out[static_cast<size_t>(y) * width + x] = den > 0.0 ? num / den : 0.0;
    }
  }
  return out;
}

}  // namespace detail

// Renders one image of the model. Bit-exact reproducible: the pixel noise is
// drawn row-major from the model's own generator, so (model, seed, size)
// pins every byte.
inline ImageBuffer render(const SourceModel& model, int width, int height, uint64_t seed) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  if (!(model.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  if (model.quantization_step < 1)
    throw std::invalid_argument("quantization step must be >= 1, got " + std::to_string(model.quantization_step));
  if (model.blur_kernel) {
    double sum = 0.0;
    for (double w : *model.blur_kernel) {
      if (w < 0.0) throw std::invalid_argument("blur kernel entries must be non-negative");
      sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("blur kernel must have positive weight");
  }

  Rng rng(mix_seed(seed, static_cast<uint64_t>(model.id)));
  // Each exposure gets its own drift strength in [0, noise_sigma_slope]:
  // captures from one model share a signature but are not statistically
  // uniform, neither within an image nor across images.
  const double slope = model.noise_sigma_slope * rng.uniform();
  std::vector<double> pix(static_cast<size_t>(width) * height);
  const double x_den = width > 1 ? width - 1.0 : 1.0;
  const double y_den = height > 1 ? height - 1.0 : 1.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double fx = x / x_den;
      const double base = model.base_offset + model.gradient_x * fx + model.gradient_y * (y / y_den);
      const double sigma = model.noise_sigma + slope * fx;
      pix[static_cast<size_t>(y) * width + x] = base + sigma * rng.gaussian();
    }
  }
  if (model.blur_kernel) pix = detail::convolve3(pix, width, height, *model.blur_kernel);

  ImageBuffer img(width, height);
  const double step = static_cast<double>(model.quantization_step);
  for (size_t i = 0; i < pix.size(); ++i) {
    double v = std::round(pix[i] / step) * step;
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
    img.data[i] = static_cast<uint8_t>(std::llround(v));
  }
  return img;
}

// A spliced image and its exact ground truth.
struct ForgeryCase {
  ImageBuffer image;
  BinaryMask truth;
  int block_size = 0;
  int paste_x = 0;
  int paste_y = 0;
};

// Copies a random square block of the donor into the host at a random
// position. Draw order (donor x, donor y, host x, host y) is part of the
// reproducibility contract.
inline ForgeryCase make_forgery(const ImageBuffer& host, const ImageBuffer& donor, int block,
                                uint64_t seed) {
  if (block < 1) throw std::invalid_argument("forgery block size must be >= 1");
  if (block > host.width || block > host.height)
    throw std::invalid_argument("forgery block " + std::to_string(block) + " exceeds host " +
                                std::to_string(host.width) + "x" + std::to_string(host.height));
  if (block > donor.width || block > donor.height)
    throw std::invalid_argument("forgery block " + std::to_string(block) + " exceeds donor " +
                                std::to_string(donor.width) + "x" + std::to_string(donor.height));
  Rng rng(seed);
  const int dx = rng.uniform_int(donor.width - block + 1);
  const int dy = rng.uniform_int(donor.height - block + 1);
  const int hx = rng.uniform_int(host.width - block + 1);
  const int hy = rng.uniform_int(host.height - block + 1);
  ForgeryCase fc;
  fc.image = host;
  fc.truth = BinaryMask(host.width, host.height);
  fc.block_size = block;
  fc.paste_x = hx;
  fc.paste_y = hy;
  for (int y = 0; y < block; ++y)
    for (int x = 0; x < block; ++x) {
      fc.image.at(hx + x, hy + y) = donor.at(dx + x, dy + y);
      fc.truth.at(hx + x, hy + y) = 255;
    }
  return fc;
}

// Everything the synthetic benchmark needs. Desk-scale defaults match the
// evaluation protocol: 512x512 images, 100 forged + 100 unaltered per
// forgery size, analysis patches of 128 at 50% overlap.
struct BenchConfig {
  int image_width = 512;
  int image_height = 512;
  int patch_size = 128;
  double overlap = 0.5;
  int forged_count = 100;
  int unaltered_count = 100;
  std::vector<int> block_sizes = {64, 128, 256};
  std::vector<SourceModel> models = {source_model_preset(0), source_model_preset(1)};
  std::vector<std::string> methods = {"spectral-gap", "modularity", "mean-sim", "min-sim"};
  double gamma = 1.0;
  double modularity_threshold = 0.7;
  double pfa = 0.1;
  uint64_t seed = 1;
};

// All four whole-image statistics of one image, computed from a single
// similarity matrix.
struct ImageStatistics {
  double lambda2 = 0.0;
  double q_opt = 0.0;
  double mean_sim = 0.0;
  double min_sim = 0.0;
};

inline ImageStatistics evaluate_image_statistics(const ImageBuffer& img, int patch_size, double overlap,
                                                 double gamma, double modularity_threshold) {
  const PatchSet patches = sample_patches(img, patch_size, overlap);
  const ResidualSimilarityProvider provider(gamma);
  const SimilarityMatrix s = compute_matrix(img, patches, provider);
  ImageStatistics stats;
  stats.mean_sim = mean_similarity(s);
  stats.min_sim = min_similarity(s);
  const SimilarityGraph dense = build_graph(s, 0.0);
  stats.lambda2 = eigh(laplacian(dense, LaplacianKind::Unnormalized)).eigenvalues[1];
  const SimilarityGraph pruned = build_graph(s, modularity_threshold);
  // An empty pruned graph has no community structure to score; Q stays 0.
  stats.q_opt = pruned.total_weight > 0.0 ? fast_greedy(pruned).q_opt : 0.0;
  return stats;
}

inline double statistic_for_method(const ImageStatistics& stats, const std::string& method) {
  if (method == "spectral-gap") return stats.lambda2;
  if (method == "modularity") return stats.q_opt;
  if (method == "mean-sim") return stats.mean_sim;
  if (method == "min-sim") return stats.min_sim;
  throw std::invalid_argument("unknown detection method '" + method + "'");
}

inline Polarity polarity_for_method(const std::string& method) {
  // Modularity grows when the graph fractures; everything else shrinks.
  if (method == "modularity") return Polarity::HigherIsForged;
  if (method == "spectral-gap" || method == "mean-sim" || method == "min-sim")
    return Polarity::LowerIsForged;
  throw std::invalid_argument("unknown detection method '" + method + "'");
}

struct MethodEval {
  std::string method;
  double auc = 0.0;
  double pd = 0.0;   // detection rate at the configured false-alarm budget
  double map = 0.0;  // average precision of the ranked statistic
  RocCurve roc;
};

struct SizeEval {
  int block_size = 0;
  double relative_area = 0.0;  // forged pixels / image pixels
  std::vector<MethodEval> methods;
};

struct BenchReport {
  BenchConfig config;
  std::vector<SizeEval> sizes;
};

// Runs the full detection protocol: per forgery size, generate forged and
// unaltered images from the model pool and score every configured method on
// the same statistics. Hosts cycle through the pool; the donor is the next
// model in the cycle, so host and donor always differ when the pool entries
// differ. Every image seed derives from (seed, size, index, role).
inline BenchReport run_synth_benchmark(const BenchConfig& config) {
  if (config.models.size() < 2)
    throw std::invalid_argument("benchmark needs at least 2 source models, got " +
                                std::to_string(config.models.size()));
  if (config.forged_count < 1 || config.unaltered_count < 1)
    throw std::invalid_argument("benchmark needs at least 1 forged and 1 unaltered image");
  if (config.block_sizes.empty()) throw std::invalid_argument("benchmark needs at least one forgery size");
  if (config.methods.empty()) throw std::invalid_argument("benchmark needs at least one method");
  for (const auto& m : config.methods) polarity_for_method(m);  // validate names up front

  BenchReport report;
  report.config = config;
  const int models = static_cast<int>(config.models.size());
  for (int block : config.block_sizes) {
    SizeEval eval;
    eval.block_size = block;
    eval.relative_area = static_cast<double>(block) * block /
                         (static_cast<double>(config.image_width) * config.image_height);
    std::vector<ImageStatistics> stats;
    std::vector<bool> forged_flags;
    for (int j = 0; j < config.forged_count; ++j) {
      const SourceModel& host_model = config.models[static_cast<size_t>(j % models)];
      const SourceModel& donor_model = config.models[static_cast<size_t>((j + 1) % models)];
      const ImageBuffer host = render(host_model, config.image_width, config.image_height,
                                      mix_seed(config.seed, static_cast<uint64_t>(block), j, 0));
      const ImageBuffer donor = render(donor_model, config.image_width, config.image_height,
                                       mix_seed(config.seed, static_cast<uint64_t>(block), j, 1));
      const ForgeryCase fc =
          make_forgery(host, donor, block, mix_seed(config.seed, static_cast<uint64_t>(block), j, 2));
      stats.push_back(evaluate_image_statistics(fc.image, config.patch_size, config.overlap, config.gamma,
                                                config.modularity_threshold));
      forged_flags.push_back(true);
    }
    for (int j = 0; j < config.unaltered_count; ++j) {
      const SourceModel& model = config.models[static_cast<size_t>(j % models)];
      const ImageBuffer img = render(model, config.image_width, config.image_height,
                                     mix_seed(config.seed, static_cast<uint64_t>(block), j, 3));
      stats.push_back(evaluate_image_statistics(img, config.patch_size, config.overlap, config.gamma,
                                                config.modularity_threshold));
      forged_flags.push_back(false);
    }
    for (const auto& method : config.methods) {
      std::vector<ScoredSample> samples;
      samples.reserve(stats.size());
      for (size_t i = 0; i < stats.size(); ++i)
        samples.push_back({statistic_for_method(stats[i], method), forged_flags[i]});
      const Polarity polarity = polarity_for_method(method);
      MethodEval me;
      me.method = method;
      me.roc = roc_auc(samples, polarity);
      me.auc = me.roc.auc;
      me.pd = pd_at_pfa(me.roc, config.pfa);
      me.map = mean_average_precision(samples, polarity);
      eval.methods.push_back(std::move(me));
    }
    report.sizes.push_back(std::move(eval));
  }
  return report;
}

// Plain key = value config file for the benchmark CLI; '#' starts a comment.
// Unknown keys are rejected so typos do not silently fall back to defaults.
inline BenchConfig load_bench_config(std::istream& in) {
  BenchConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), not_space));
    line.erase(std::find_if(line.rbegin(), line.rend(), not_space).base(), line.end());
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("benchmark config line " + std::to_string(line_no) + " is not 'key = value': '" +
                        line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), not_space).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), not_space));
    try {
      if (key == "width") config.image_width = std::stoi(value);
      else if (key == "height") config.image_height = std::stoi(value);
      else if (key == "patch_size") config.patch_size = std::stoi(value);
      else if (key == "overlap") config.overlap = std::stod(value);
      else if (key == "forged") config.forged_count = std::stoi(value);
      else if (key == "unaltered") config.unaltered_count = std::stoi(value);
      else if (key == "gamma") config.gamma = std::stod(value);
      else if (key == "modularity_threshold") config.modularity_threshold = std::stod(value);
      else if (key == "pfa") config.pfa = std::stod(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "block_sizes") {
        config.block_sizes.clear();
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) config.block_sizes.push_back(std::stoi(item));
      } else if (key == "models") {
        config.models.clear();
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) config.models.push_back(source_model_preset(std::stoi(item)));
      } else if (key == "methods") {
        config.methods.clear();
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
          item.erase(item.begin(), std::find_if(item.begin(), item.end(), not_space));
          item.erase(std::find_if(item.rbegin(), item.rend(), not_space).base(), item.end());
          config.methods.push_back(item);
        }
      } else {
        throw FormatError("unknown benchmark config key '" + key + "' on line " + std::to_string(line_no));
      }
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError("invalid value for benchmark config key '" + key + "' on line " +
                        std::to_string(line_no) + ": '" + value + "'");
    }
  }
  return config;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open benchmark config: " + path);
  return load_bench_config(in);
}

}  // namespace fsg
