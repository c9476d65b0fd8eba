#include "embeval/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "embeval/error.hpp"
#include "embeval/parallel.hpp"
#include "embeval/rng.hpp"

namespace embeval {

namespace {

void validate(const SamplingConfig& cfg) {
  if (!(cfg.fraction > 0.0) || cfg.fraction > 1.0)
    throw InputError("sampling fraction must be in (0, 1]");
  if (cfg.per_cluster_cap < 2) throw InputError("per-cluster cap must be >= 2");
  if (cfg.inter_pair_cap < 2) throw InputError("inter-pair cap must be >= 2");
}

}  // namespace

int SimilarityHistogram::bin_index(double score) {
  if (score < -1.0) {
    if (score < -1.0 - 1e-6)
      throw InputError("similarity " + std::to_string(score) +
                       " outside [-1, 1]");
    score = -1.0;
  } else if (score > 1.0) {
    if (score > 1.0 + 1e-6)
      throw InputError("similarity " + std::to_string(score) +
                       " outside [-1, 1]");
    score = 1.0;
  }
  int k = int((score + 1.0) * 50.0);
  return k > 99 ? 99 : k;
}

SimilarityHistogram histogram(std::span<const double> scores) {
  SimilarityHistogram h;
  for (double s : scores) h.add(s);
  return h;
}

std::vector<uint32_t> subsample(std::span<const uint32_t> members,
                                const SamplingConfig& cfg,
                                std::string_view node_id,
                                uint64_t cluster_key) {
  validate(cfg);
  if (members.empty())
    throw InvariantError("subsample: empty member list");
  const uint64_t size = members.size();
  uint64_t want = uint64_t(std::ceil(cfg.fraction * double(size)));
  uint64_t k = std::min({std::max<uint64_t>(2, want), cfg.per_cluster_cap, size});
  if (k == size) return {members.begin(), members.end()};

  rng::Stream stream(rng::mix(cfg.seed, rng::fnv1a(node_id), cluster_key));
  std::vector<uint32_t> pos(size);
  std::iota(pos.begin(), pos.end(), 0u);
  for (uint64_t i = 0; i < k; ++i) {
    uint64_t j = i + stream.bounded(size - i);
    std::swap(pos[i], pos[j]);
  }
  pos.resize(k);
  std::sort(pos.begin(), pos.end());
  std::vector<uint32_t> out(k);
  for (uint64_t i = 0; i < k; ++i) out[i] = members[pos[i]];
  return out;
}

std::vector<ClusterDistributions> estimate_node(
    const FeatureMatrix& features, std::span<const double> row_norm,
    std::string_view node_id, std::span<const ClusterMembers> clusters,
    const SamplingConfig& cfg, int workers) {
  validate(cfg);
  if (clusters.size() < 2)
    throw InputError("node '" + std::string(node_id) +
                     "': fewer than 2 clusters");
  if (row_norm.size() != features.n)
    throw InvariantError("row norms do not match feature count");

  const size_t nc = clusters.size();
  std::vector<std::vector<uint32_t>> subs(nc);
  for (size_t c = 0; c < nc; ++c) {
    if (!clusters[c].rows.empty())
      subs[c] = subsample(clusters[c].rows, cfg, node_id,
                          clusters[c].cluster_index);
  }

  // Pooled subsamples in cluster order; segment c is the own-cluster span
  // that inter enumeration skips.
  std::vector<uint32_t> pool;
  std::vector<size_t> seg(nc + 1, 0);
  for (size_t c = 0; c < nc; ++c) seg[c + 1] = seg[c] + subs[c].size();
  pool.reserve(seg[nc]);
  for (const auto& s : subs) pool.insert(pool.end(), s.begin(), s.end());
  const size_t pool_total = pool.size();

  const float* base = features.data.data();
  const uint32_t d = features.d;
  auto score_of = [&](uint32_t i, uint32_t j) {
    double s = dot({base + size_t(i) * d, d}, {base + size_t(j) * d, d}) /
               (row_norm[i] * row_norm[j]);
    return std::clamp(s, -1.0, 1.0);
  };

  std::vector<ClusterDistributions> results(nc);
  parallel_for(nc, workers, [&](size_t c) {
    ClusterDistributions& out = results[c];
    out.cluster_index = clusters[c].cluster_index;
    const std::vector<uint32_t>& sub = subs[c];
    const uint64_t m = sub.size();
    if (m < 2) {
      out.skipped = true;
      return;
    }
    for (uint64_t a = 0; a + 1 < m; ++a) {
      for (uint64_t b = a + 1; b < m; ++b)
        out.intra.add(score_of(sub[a], sub[b]));
    }
    const uint64_t pool_other = pool_total - m;
    if (pool_other == 0) {
      out.skipped = true;
      return;
    }
    auto pool_at = [&](uint64_t jp) {
      return pool[jp < seg[c] ? jp : jp + m];
    };
    const unsigned __int128 pairs =
        static_cast<unsigned __int128>(m) * pool_other;
    if (pairs <= cfg.inter_pair_cap) {
      for (uint64_t jp = 0; jp < pool_other; ++jp) {
        uint32_t j = pool_at(jp);
        for (uint64_t ii = 0; ii < m; ++ii)
          out.inter.add(score_of(sub[ii], j));
      }
    } else {
      for (uint64_t t = 0; t < cfg.inter_pair_cap; ++t) {
        unsigned __int128 p = static_cast<unsigned __int128>(t) * pairs /
                              cfg.inter_pair_cap;
        uint64_t ii = uint64_t(p % m);
        uint64_t jp = uint64_t(p / m);
        out.inter.add(score_of(sub[ii], pool_at(jp)));
      }
    }
  });
  return results;
}

std::vector<ClusterDistributions> estimate_node(
    const FeatureMatrix& features, const LabelVector& labels,
    const std::vector<ClusterSpec>& clusters, const SamplingConfig& cfg) {
  if (labels.labels.size() != features.n)
    throw InputError("labels count " + std::to_string(labels.labels.size()) +
                     " does not match feature count " +
                     std::to_string(features.n));
  std::vector<double> norms = row_norms(features);

  std::map<std::string, std::vector<uint32_t>> by_class;
  for (uint32_t i = 0; i < features.n; ++i)
    if (norms[i] > 0.0) by_class[labels.labels[i]].push_back(i);

  std::string node_id = clusters.empty() ? "" : clusters.front().node_id;
  std::vector<ClusterMembers> members(clusters.size());
  for (size_t c = 0; c < clusters.size(); ++c) {
    members[c].cluster_index = clusters[c].cluster_index;
    for (const std::string& cls : clusters[c].class_ids) {
      auto it = by_class.find(cls);
      if (it == by_class.end()) continue;
      members[c].rows.insert(members[c].rows.end(), it->second.begin(),
                             it->second.end());
    }
    std::sort(members[c].rows.begin(), members[c].rows.end());
  }
  return estimate_node(features, norms, node_id, members, cfg);
}

}  // namespace embeval
