#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsg/errors.hpp"

namespace fsg {

enum class Decision { Unaltered, Forged };

inline const char* to_string(Decision d) { return d == Decision::Forged ? "forged" : "unaltered"; }

// Outcome of a whole-image detection rule: the scalar statistic, the rule
// that produced it, and the thresholded verdict.
struct DetectionResult {
  double statistic = 0.0;
  std::string method;
  double tau = 0.0;
  Decision decision = Decision::Unaltered;
};

// Vertex-to-community assignment. Labels run 1..k; vertex order matches the
// patch sampling order of the graph it was computed from.
struct Partition {
  std::vector<int> labels;
  int k = 0;
  double score = 0.0;  // meaning depends on the producer (e.g. Q for modularity)

  int size() const { return static_cast<int>(labels.size()); }
};

inline void validate_partition(const Partition& p) {
  if (p.k < 1) throw std::invalid_argument("partition must have at least one community");
  for (size_t i = 0; i < p.labels.size(); ++i)
    if (p.labels[i] < 1 || p.labels[i] > p.k)
      throw std::invalid_argument("partition label " + std::to_string(p.labels[i]) + " at vertex " +
                                  std::to_string(i) + " outside 1.." + std::to_string(p.k));
}

inline std::vector<int> community_sizes(const Partition& p) {
  validate_partition(p);
  std::vector<int> sizes(p.k, 0);
  for (int label : p.labels) ++sizes[label - 1];
  return sizes;
}

// Renumbers arbitrary integer labels to 1..k by first occurrence, preserving
// vertex order. Used by every producer so exported partitions are canonical.
inline Partition canonical_partition(const std::vector<int>& raw_labels) {
  Partition p;
  p.labels.reserve(raw_labels.size());
  std::map<int, int> remap;
  for (int raw : raw_labels) {
    auto [it, inserted] = remap.emplace(raw, static_cast<int>(remap.size()) + 1);
    p.labels.push_back(it->second);
  }
  p.k = static_cast<int>(remap.size());
  return p;
}

inline void save_partition_tsv(const Partition& p, std::ostream& out) {
  out << "vertex\tlabel\n";
  for (size_t i = 0; i < p.labels.size(); ++i) out << i << '\t' << p.labels[i] << '\n';
}

inline void save_partition_tsv(const Partition& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  save_partition_tsv(p, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fsg
