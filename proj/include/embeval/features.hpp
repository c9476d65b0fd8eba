#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace embeval {

// Clamp applied to zero-variance dimensions during standardization.
inline constexpr double kStdEpsilon = 1e-6;

// Row-major float32 feature matrix: 32-bit storage, 64-bit accumulation in
// every computation downstream.
struct FeatureMatrix {
  uint64_t n = 0;
  uint32_t d = 0;
  std::vector<float> data;

  std::span<const float> row(uint64_t i) const {
    return {data.data() + i * d, d};
  }
};

struct LabelVector {
  std::vector<std::string> labels;  // labels[i] is the class id of row i
};

// Per-dimension population mean / standard deviation.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

enum class NormKind { none, target, source };

struct NormStrategy {
  NormKind kind = NormKind::none;
  NormStats stats;  // consulted only when kind == source
};

NormKind parse_norm_kind(std::string_view name);
std::string_view norm_kind_name(NormKind kind);

// Binary feature file layout (bit-exact, little endian):
//   magic "SMLB" | u32 version=1 | u64 n | u32 d | u32 reserved=0
//   | n*d float32, row-major
// load_features() sniffs the magic and falls back to CSV (one row per line,
// comma-separated decimals). Non-finite values are rejected with the
// offending row index.
FeatureMatrix load_features(const std::filesystem::path& path);
void save_features(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix parse_features_csv(std::string_view text);

// Labels file: one class id per line, line i labels row i.
LabelVector load_labels(const std::filesystem::path& path);
void save_labels(const LabelVector& labels, const std::filesystem::path& path);

NormStats compute_stats(const FeatureMatrix& m);
FeatureMatrix normalize(const FeatureMatrix& m, const NormStrategy& strategy);

// Stats files reuse the binary feature format as a 2 x d matrix
// (row 0 = mean, row 1 = stddev).
NormStats load_stats(const std::filesystem::path& path);
void save_stats(const NormStats& stats, const std::filesystem::path& path);

// Dot product with a fixed eight-lane accumulation order, so the result is
// bit-reproducible across call sites and optimization levels within a build.
double dot(std::span<const float> a, std::span<const float> b);

// a.b / (|a||b|), clamped to [-1, 1]. Throws InvariantError on zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

// sqrt(dot(r, r)) per row; 0 marks a dead row.
std::vector<double> row_norms(const FeatureMatrix& m);

}  // namespace embeval
