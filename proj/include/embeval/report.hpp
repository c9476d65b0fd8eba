#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "embeval/metrics.hpp"
#include "embeval/taxonomy.hpp"

namespace embeval {

// All CSV cells hold float32 values printed with 9 significant digits, which
// round-trips them bit-exactly.
std::string fmt_f32(float v);

struct LevelRow {
  int level = 0;
  float mean_overlap = 0;
  float mean_inter_astd = 0;
  float mean_intra_astd = 0;
  size_t nodes = 0;
};

// Per-level means plus an AVG row weighted by node count (mean over all
// nodes, not the mean of level means).
struct LevelTable {
  std::vector<LevelRow> rows;
  LevelRow avg;
};

LevelTable level_table(std::span<const NodeReport> reports);

// Human-readable rendering with 3-decimal cells; the CSV keeps full precision.
std::string render_level_table_text(const LevelTable& table);

// 20 bins of width 0.05 over [0, 1]; 1.0 falls in the last bin.
struct OverlapHistogram {
  std::array<uint64_t, 20> counts{};
  uint64_t total = 0;
};

OverlapHistogram class_overlap_histogram(
    const std::map<std::string, double>& per_class);

struct RatioScatter {
  struct Point {
    std::string node_id;
    float ratio = 0;  // |node classes in subset| / |node classes|
    float overlap = 0;
  };
  std::vector<Point> points;
};

// Ratio of each node's cluster-class universe covered by `subset`, paired
// with the node's mean overlap.
RatioScatter ratio_scatter(std::span<const NodeReport> reports,
                           const Taxonomy& taxonomy,
                           const std::set<std::string>& subset);

void write_nodes_csv(const std::filesystem::path& path,
                     std::span<const NodeReport> reports);
std::vector<NodeReport> read_nodes_csv(const std::filesystem::path& path);

void write_levels_csv(const std::filesystem::path& path,
                      const LevelTable& table);

void write_classes_csv(const std::filesystem::path& path,
                       const std::map<std::string, double>& per_class);

void write_overlap_histogram_csv(const std::filesystem::path& path,
                                 const OverlapHistogram& hist);

std::string render_histogram_svg(const OverlapHistogram& hist,
                                 std::string_view title);

void write_scatter_csv(const std::filesystem::path& path,
                       const RatioScatter& scatter);

// Histogram dump: node_id,cluster_index,kind,bin_0..bin_99,count
void write_histograms_csv(
    const std::filesystem::path& path,
    std::span<const std::pair<std::string, std::vector<ClusterDistributions>>>
        nodes);

void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

}  // namespace embeval
