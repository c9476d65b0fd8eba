#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "embeval/features.hpp"
#include "embeval/taxonomy.hpp"

namespace embeval {

// 100-bin histogram over [-1, 1]. Bin k covers [-1 + 0.02k, -1 + 0.02(k+1));
// the final bin is closed at 1.0. Counts are kept exact, masses are derived.
struct SimilarityHistogram {
  std::array<uint64_t, 100> counts{};
  uint64_t total = 0;

  // Scores up to 1e-6 outside [-1, 1] are clamped; anything further throws.
  static int bin_index(double score);
  static double bin_center(int k) { return double(2 * k - 99) / 100.0; }

  void add(double score) {
    ++counts[size_t(bin_index(score))];
    ++total;
  }
  double mass(size_t k) const {
    return total ? double(counts[k]) / double(total) : 0.0;
  }
};

SimilarityHistogram histogram(std::span<const double> scores);

struct SamplingConfig {
  double fraction = 0.3;               // share of each cluster to draw
  uint64_t per_cluster_cap = 500;      // max sampled items per cluster
  uint64_t inter_pair_cap = 1000000;   // max inter pairs per cluster
  uint64_t seed = 0;
};

struct ClusterDistributions {
  uint32_t cluster_index = 0;
  SimilarityHistogram intra;
  SimilarityHistogram inter;
  bool skipped = false;  // cluster had < 2 usable samples or no inter pairs
};

// Deterministic subset of min(max(2, ceil(fraction*|members|)), cap, |members|)
// entries, drawn without replacement from a stream seeded by
// mix(seed, fnv1a(node_id), cluster_key). When every member is taken the
// input order is preserved; otherwise the subset keeps ascending input order.
std::vector<uint32_t> subsample(std::span<const uint32_t> members,
                                const SamplingConfig& cfg,
                                std::string_view node_id,
                                uint64_t cluster_key);

// Resolved cluster membership: row indices of usable (nonzero-norm) samples,
// ascending.
struct ClusterMembers {
  uint32_t cluster_index = 0;
  std::vector<uint32_t> rows;
};

// Estimates per-cluster intra/inter similarity histograms for one node.
// Intra: all unordered pairs within the cluster's subsample. Inter: pairs
// (i in subsample(c), j in subsample(c' != c)), thinned to inter_pair_cap by
// a deterministic stride over the implicit pair index p = jp * m + ii, where
// jp walks the pooled other-cluster subsamples in cluster order.
// Results are identical for any worker count.
std::vector<ClusterDistributions> estimate_node(
    const FeatureMatrix& features, std::span<const double> row_norm,
    std::string_view node_id, std::span<const ClusterMembers> clusters,
    const SamplingConfig& cfg, int workers = 1);

// Convenience entry matching the cluster specs produced by the taxonomy:
// resolves class ids to rows via the labels and drops zero-norm rows.
std::vector<ClusterDistributions> estimate_node(
    const FeatureMatrix& features, const LabelVector& labels,
    const std::vector<ClusterSpec>& clusters, const SamplingConfig& cfg);

}  // namespace embeval
