#include "embeval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "embeval/error.hpp"

namespace embeval {

double overlap(const SimilarityHistogram& intra,
               const SimilarityHistogram& inter) {
  if (intra.total == 0 || inter.total == 0)
    throw InvariantError("overlap: empty histogram");
  using u128 = unsigned __int128;
  u128 num = 0;
  for (size_t k = 0; k < 100; ++k) {
    u128 a = u128(intra.counts[k]) * inter.total;
    u128 b = u128(inter.counts[k]) * intra.total;
    num += a < b ? a : b;
  }
  u128 den = u128(intra.total) * inter.total;
  if (num == den) return 1.0;
  return double(num) / double(den);
}

AstdMode parse_astd_mode(std::string_view name) {
  if (name == "mixture") return AstdMode::mixture;
  if (name == "perclass") return AstdMode::per_class_mean;
  throw InputError("unknown aSTD mode '" + std::string(name) +
                   "' (expected mixture|perclass)");
}

std::string_view astd_mode_name(AstdMode mode) {
  return mode == AstdMode::mixture ? "mixture" : "perclass";
}

namespace {

AstdValue moments(std::span<const double> p) {
  AstdValue v;
  for (int k = 0; k < 100; ++k)
    v.mu += p[size_t(k)] * SimilarityHistogram::bin_center(k);
  double var = 0;
  for (int k = 0; k < 100; ++k) {
    double dev = SimilarityHistogram::bin_center(k) - v.mu;
    var += p[size_t(k)] * (dev * dev);
  }
  v.sigma = std::sqrt(var);
  return v;
}

void require_nonempty(std::span<const SimilarityHistogram> hists) {
  if (hists.empty()) throw InvariantError("astd: empty histogram list");
  for (const auto& h : hists)
    if (h.total == 0) throw InvariantError("astd: empty histogram");
}

}  // namespace

AstdValue astd(std::span<const SimilarityHistogram> hists) {
  require_nonempty(hists);
  std::array<double, 100> p{};
  for (const auto& h : hists)
    for (size_t k = 0; k < 100; ++k) p[k] += h.mass(k);
  for (size_t k = 0; k < 100; ++k) p[k] /= double(hists.size());
  return moments(p);
}

AstdValue astd_per_class_mean(std::span<const SimilarityHistogram> hists) {
  require_nonempty(hists);
  AstdValue acc;
  for (const auto& h : hists) {
    std::array<double, 100> p{};
    for (size_t k = 0; k < 100; ++k) p[k] = h.mass(k);
    AstdValue v = moments(p);
    acc.mu += v.mu;
    acc.sigma += v.sigma;
  }
  acc.mu /= double(hists.size());
  acc.sigma /= double(hists.size());
  return acc;
}

std::pair<double, double> node_overlap(
    std::span<const ClusterDistributions> dists) {
  double sum = 0, best = 0;
  size_t valid = 0;
  for (const auto& d : dists) {
    if (d.skipped || d.intra.total == 0 || d.inter.total == 0) continue;
    double ov = overlap(d.intra, d.inter);
    sum += ov;
    best = std::max(best, ov);
    ++valid;
  }
  if (valid == 0) throw InvariantError("node_overlap: all clusters skipped");
  return {sum / double(valid), best};
}

NodeReport make_node_report(std::string node_id, int level,
                            std::span<const ClusterDistributions> dists,
                            AstdMode mode) {
  NodeReport report;
  report.node_id = std::move(node_id);
  report.level = level;

  std::vector<double> overlaps;
  std::vector<SimilarityHistogram> intras, inters;
  for (const auto& d : dists) {
    if (d.skipped || d.intra.total == 0 || d.inter.total == 0) {
      ++report.skipped_clusters;
      continue;
    }
    overlaps.push_back(overlap(d.intra, d.inter));
    intras.push_back(d.intra);
    inters.push_back(d.inter);
  }
  if (overlaps.empty())
    throw InvariantError("node '" + report.node_id +
                         "': all clusters skipped");
  report.n_clusters = uint32_t(overlaps.size());
  double sum = 0, best = 0;
  for (double ov : overlaps) {
    sum += ov;
    best = std::max(best, ov);
    report.cluster_overlaps.push_back(float(ov));
  }
  report.mean_overlap = float(sum / double(overlaps.size()));
  report.max_overlap = float(best);
  auto estimator = mode == AstdMode::mixture ? astd : astd_per_class_mean;
  report.inter_astd = float(estimator(inters).sigma);
  report.intra_astd = float(estimator(intras).sigma);
  return report;
}

FlatEvaluation per_class_overlap(const FeatureMatrix& features,
                                 const LabelVector& labels,
                                 const SamplingConfig& cfg, int workers) {
  if (labels.labels.size() != features.n)
    throw InputError("labels count " + std::to_string(labels.labels.size()) +
                     " does not match feature count " +
                     std::to_string(features.n));
  std::vector<double> norms = row_norms(features);

  FlatEvaluation out;
  std::map<std::string, std::vector<uint32_t>> by_class;
  for (uint32_t i = 0; i < features.n; ++i) {
    if (norms[i] > 0.0)
      by_class[labels.labels[i]].push_back(i);
    else
      ++out.zero_norm_rows;
  }
  if (by_class.size() < 2)
    throw InputError("per-class evaluation needs >= 2 classes, got " +
                     std::to_string(by_class.size()));

  std::vector<ClusterMembers> members;
  members.reserve(by_class.size());
  uint32_t index = 0;
  for (auto& [cls, rows] : by_class) {
    out.class_ids.push_back(cls);
    members.push_back(ClusterMembers{index++, std::move(rows)});
  }
  out.dists = estimate_node(features, norms, "flat", members, cfg, workers);
  for (size_t c = 0; c < out.dists.size(); ++c) {
    const ClusterDistributions& d = out.dists[c];
    if (d.skipped || d.intra.total == 0 || d.inter.total == 0)
      out.skipped.push_back(out.class_ids[c]);
    else
      out.overlaps[out.class_ids[c]] = overlap(d.intra, d.inter);
  }
  return out;
}

std::set<std::string> extreme_classes(
    const std::map<std::string, double>& per_class, size_t n, Direction dir) {
  if (n > per_class.size())
    throw InputError("requested " + std::to_string(n) + " classes, only " +
                     std::to_string(per_class.size()) + " scored");
  std::vector<std::pair<std::string, double>> items(per_class.begin(),
                                                    per_class.end());
  std::stable_sort(items.begin(), items.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second)
      return dir == Direction::easy ? a.second < b.second
                                    : a.second > b.second;
    return a.first < b.first;
  });
  std::set<std::string> out;
  for (size_t i = 0; i < n; ++i) out.insert(items[i].first);
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  size_t uni = a.size() + b.size() - inter;
  return double(inter) / double(uni);
}

}  // namespace embeval
