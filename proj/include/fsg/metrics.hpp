#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsg/localize.hpp"
#include "fsg/partition.hpp"
#include "fsg/similarity.hpp"

namespace fsg {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;
};

inline ConfusionCounts confusion(const BinaryMask& predicted, const BinaryMask& truth) {
  if (predicted.width != truth.width || predicted.height != truth.height)
    throw std::invalid_argument("mask dimensions differ: " + std::to_string(predicted.width) + "x" +
                                std::to_string(predicted.height) + " vs " + std::to_string(truth.width) +
                                "x" + std::to_string(truth.height));
  ConfusionCounts c;
  for (size_t i = 0; i < predicted.values.size(); ++i) {
    const bool p = predicted.values[i] != 0;
    const bool t = truth.values[i] != 0;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// Prediction by thresholding a score map at `threshold` (score >= threshold
// reads as forged), compared against a 0/nonzero truth buffer.
inline ConfusionCounts confusion_at(const std::vector<double>& scores, const std::vector<uint8_t>& truth,
                                    double threshold) {
  if (scores.size() != truth.size())
    throw std::invalid_argument("score and truth buffers differ in size");
  ConfusionCounts c;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool p = scores[i] >= threshold;
    const bool t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// Matthews correlation coefficient with the standard denominator
// sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN)); defined as 0 whenever a factor
// vanishes (a degenerate prediction or degenerate truth carries no signal).
inline double mcc(const ConfusionCounts& c) {
  const double f1_ = static_cast<double>(c.tp + c.fp);
  const double f2_ = static_cast<double>(c.tp + c.fn);
  const double f3_ = static_cast<double>(c.tn + c.fp);
  const double f4_ = static_cast<double>(c.tn + c.fn);
  if (f1_ == 0.0 || f2_ == 0.0 || f3_ == 0.0 || f4_ == 0.0) return 0.0;
  const double num =
      static_cast<double>(c.tp) * static_cast<double>(c.tn) - static_cast<double>(c.fp) * static_cast<double>(c.fn);
  return num / std::sqrt(f1_ * f2_ * f3_ * f4_);
}

// F1 = 2TP / (2TP + FP + FN); 0 when there are neither predicted nor actual
// positives.
inline double f1_score(const ConfusionCounts& c) {
  const double den = static_cast<double>(2 * c.tp + c.fp + c.fn);
  if (den == 0.0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / den;
}

// Which direction of a detection statistic indicates tampering.
enum class Polarity { HigherIsForged, LowerIsForged };

struct ScoredSample {
  double score = 0.0;
  bool forged = false;
};

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (P_FA, P_D), starts at (0,0), ends at (1,1)
  double auc = 0.0;
};

// ROC by descending sweep over the oriented statistic; tied scores advance
// as one group, which makes the trapezoid area equal the Mann-Whitney
// statistic with half credit for ties.
inline RocCurve roc_auc(const std::vector<ScoredSample>& samples, Polarity polarity) {
  long long pos = 0, neg = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) throw std::invalid_argument("non-finite detection score");
    (s.forged ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0)
    throw std::domain_error("ROC needs both forged and unaltered samples, got " + std::to_string(pos) +
                            " forged / " + std::to_string(neg) + " unaltered");
  std::vector<std::pair<double, bool>> oriented;
  oriented.reserve(samples.size());
  for (const auto& s : samples)
    oriented.emplace_back(polarity == Polarity::HigherIsForged ? s.score : -s.score, s.forged);
  std::sort(oriented.begin(), oriented.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  long long tp = 0, fp = 0;
  double area_num = 0.0;  // sum of fp_inc * (tp_before + tp_inc / 2)
  size_t i = 0;
  while (i < oriented.size()) {
    size_t j = i;
    long long tp_inc = 0, fp_inc = 0;
    while (j < oriented.size() && oriented[j].first == oriented[i].first) {
      (oriented[j].second ? tp_inc : fp_inc) += 1;
      ++j;
    }
    area_num += static_cast<double>(fp_inc) * (static_cast<double>(tp) + 0.5 * static_cast<double>(tp_inc));
    tp += tp_inc;
    fp += fp_inc;
    curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                              static_cast<double>(tp) / static_cast<double>(pos));
    i = j;
  }
  curve.auc = area_num / (static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

// Largest detection rate among operating points whose false-alarm rate does
// not exceed the budget. (0,0) always qualifies, so the result is defined
// for any budget in [0,1].
inline double pd_at_pfa(const RocCurve& curve, double pfa) {
  if (!(pfa >= 0.0) || pfa > 1.0)
    throw std::invalid_argument("false-alarm budget must lie in [0,1], got " + std::to_string(pfa));
  double best = 0.0;
  for (const auto& [fa, pd] : curve.points)
    if (fa <= pfa) best = std::max(best, pd);
  return best;
}

// Average precision of the ranked sample list (higher oriented score first,
// ties kept in input order by the stable sort).
inline double mean_average_precision(const std::vector<ScoredSample>& samples, Polarity polarity) {
  long long pos = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) throw std::invalid_argument("non-finite detection score");
    if (s.forged) ++pos;
  }
  if (pos == 0) throw std::domain_error("average precision needs at least one forged sample");
  std::vector<std::pair<double, bool>> oriented;
  oriented.reserve(samples.size());
  for (const auto& s : samples)
    oriented.emplace_back(polarity == Polarity::HigherIsForged ? s.score : -s.score, s.forged);
  std::stable_sort(oriented.begin(), oriented.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  double sum = 0.0;
  long long hits = 0;
  for (size_t r = 0; r < oriented.size(); ++r) {
    if (!oriented[r].second) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(pos);
}

// Baseline statistics over the raw (pre-threshold) similarity matrix.
inline double mean_similarity(const SimilarityMatrix& s) {
  if (s.n < 2) throw std::invalid_argument("mean similarity needs at least 2 patches");
  double sum = 0.0;
  for (int i = 0; i < s.n; ++i)
    for (int j = i + 1; j < s.n; ++j) sum += s.values(i, j);
  return sum / (static_cast<double>(s.n) * (s.n - 1) / 2.0);
}

inline double min_similarity(const SimilarityMatrix& s) {
  if (s.n < 2) throw std::invalid_argument("min similarity needs at least 2 patches");
  double best = s.values(0, 1);
  for (int i = 0; i < s.n; ++i)
    for (int j = i + 1; j < s.n; ++j) best = std::min(best, s.values(i, j));
  return best;
}

// Baseline whole-image rule: high similarity everywhere means unaltered.
inline DetectionResult detect_baseline(double statistic, const std::string& method, double tau) {
  DetectionResult r;
  r.method = method;
  r.statistic = statistic;
  r.tau = tau;
  r.decision = statistic >= tau ? Decision::Unaltered : Decision::Forged;
  return r;
}

// One localization instance: a per-pixel score map and its ground truth
// (nonzero = forged pixel).
struct LocalizationCase {
  std::vector<double> scores;
  std::vector<uint8_t> truth;
};

enum class LocalizationMetric { Mcc, F1 };

struct ThresholdStudy {
  std::vector<double> per_image_thresholds;
  double per_image_mean = 0.0;      // mean of per-image best metric values
  double per_database_threshold = 0.0;
  double per_database_mean = 0.0;   // best single-threshold mean metric
};

namespace detail {

inline double eval_metric(const LocalizationCase& c, double threshold, LocalizationMetric metric) {
  const ConfusionCounts counts = confusion_at(c.scores, c.truth, threshold);
  return metric == LocalizationMetric::Mcc ? mcc(counts) : f1_score(counts);
}

// Candidate thresholds: every distinct score (each is the lowest threshold
// producing its prediction set) plus one value above the maximum for the
// all-negative prediction.
inline std::vector<double> candidate_thresholds(const std::vector<double>& scores) {
  std::vector<double> c = scores;
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  c.push_back(c.empty() ? 1.0 : c.back() + 1.0);
  return c;
}

}  // namespace detail

// Evaluates localization in the two scoring regimes: a different optimal
// threshold per image versus a single threshold for the whole database. The
// per-image mean always dominates the per-database mean.
inline ThresholdStudy threshold_modes(const std::vector<LocalizationCase>& database,
                                      LocalizationMetric metric) {
  if (database.empty()) throw std::invalid_argument("threshold study needs at least one image");
  for (const auto& c : database) {
    if (c.scores.empty()) throw std::invalid_argument("threshold study image has no pixels");
    if (c.scores.size() != c.truth.size())
      throw std::invalid_argument("score and truth buffers differ in size");
  }
  ThresholdStudy study;
  double sum = 0.0;
  std::vector<double> all_scores;
  for (const auto& c : database) {
    double best = -2.0;  // below any reachable metric value
    double best_threshold = 0.0;
    for (double t : detail::candidate_thresholds(c.scores)) {
      const double v = detail::eval_metric(c, t, metric);
      if (v > best) {
        best = v;
        best_threshold = t;
      }
    }
    study.per_image_thresholds.push_back(best_threshold);
    sum += best;
    all_scores.insert(all_scores.end(), c.scores.begin(), c.scores.end());
  }
  study.per_image_mean = sum / static_cast<double>(database.size());

  double best_mean = -2.0;
  double best_threshold = 0.0;
  for (double t : detail::candidate_thresholds(all_scores)) {
    double mean = 0.0;
    for (const auto& c : database) mean += detail::eval_metric(c, t, metric);
    mean /= static_cast<double>(database.size());
    if (mean > best_mean) {
      best_mean = mean;
      best_threshold = t;
    }
  }
  study.per_database_threshold = best_threshold;
  study.per_database_mean = best_mean;
  return study;
}

}  // namespace fsg
