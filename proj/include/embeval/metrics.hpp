#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "embeval/distributions.hpp"

namespace embeval {

// Intersection area of two bin-aligned histograms: sum over bins of
// min(p+, p-). 0 means perfectly separable, 1 indistinguishable. Computed
// on exact pair counts, so overlap(h, h) == 1.0 holds bit-exactly.
double overlap(const SimilarityHistogram& intra,
               const SimilarityHistogram& inter);

struct AstdValue {
  double mu = 0;
  double sigma = 0;
};

enum class AstdMode {
  mixture,         // sigma of the bin-wise average distribution (default)
  per_class_mean,  // mean of per-histogram sigmas (non-default alternative)
};

AstdMode parse_astd_mode(std::string_view name);
std::string_view astd_mode_name(AstdMode mode);

// Bin-wise average of the histograms, then the mean/stddev of that mixture
// over bin centers.
AstdValue astd(std::span<const SimilarityHistogram> hists);

// Alternative estimator: arithmetic mean of each histogram's own mu/sigma.
AstdValue astd_per_class_mean(std::span<const SimilarityHistogram> hists);

// (mean, max) of per-cluster overlaps over the valid clusters.
std::pair<double, double> node_overlap(
    std::span<const ClusterDistributions> dists);

struct NodeReport {
  std::string node_id;
  int level = 0;
  uint32_t n_clusters = 0;  // valid clusters
  float mean_overlap = 0;
  float max_overlap = 0;
  float inter_astd = 0;
  float intra_astd = 0;
  std::vector<float> cluster_overlaps;
  uint32_t skipped_clusters = 0;
};

NodeReport make_node_report(std::string node_id, int level,
                            std::span<const ClusterDistributions> dists,
                            AstdMode mode = AstdMode::mixture);

// Flat, taxonomy-free evaluation: each class is one cluster, every other
// class is its inter pool.
struct FlatEvaluation {
  std::vector<std::string> class_ids;       // cluster_index -> class id
  std::vector<ClusterDistributions> dists;  // parallel to class_ids
  std::map<std::string, double> overlaps;   // scored classes only
  std::vector<std::string> skipped;         // classes with < 2 usable samples
  uint64_t zero_norm_rows = 0;
};

FlatEvaluation per_class_overlap(const FeatureMatrix& features,
                                 const LabelVector& labels,
                                 const SamplingConfig& cfg, int workers = 1);

enum class Direction { easy, hard };

// n lowest-overlap (easy) or highest-overlap (hard) classes; ties broken by
// ascending class id.
std::set<std::string> extreme_classes(
    const std::map<std::string, double>& per_class, size_t n, Direction dir);

// |a n b| / |a u b|; 1.0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace embeval
