#include "embeval/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "embeval/error.hpp"
#include "embeval/parallel.hpp"
#include "embeval/rng.hpp"

namespace embeval {

namespace {

struct InternedLabels {
  std::vector<int32_t> ids;
  std::map<std::string, int32_t> table;

  int32_t intern(const std::string& s) {
    auto [it, inserted] = table.emplace(s, int32_t(table.size()));
    return it->second;
  }
};

int32_t predict_interned(const FeatureMatrix& train,
                         std::span<const int32_t> labels,
                         std::span<const double> train_norm,
                         std::span<const float> query, int k) {
  double qn = std::sqrt(dot(query, query));
  if (qn == 0.0) throw InvariantError("knn: zero-norm query");

  const uint64_t n = train.n;
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<double> sim(n);
  for (uint64_t i = 0; i < n; ++i) {
    double ni = train_norm[i];
    sim[i] = ni == 0.0
                 ? -2.0  // dead rows sort last
                 : std::clamp(dot(train.row(i), query) / (ni * qn), -1.0, 1.0);
  }
  auto closer = [&](uint32_t a, uint32_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return a < b;
  };
  uint64_t kk = std::min<uint64_t>(uint64_t(k), n);
  std::partial_sort(order.begin(), order.begin() + kk, order.end(), closer);

  // votes per class; break vote ties by the rank of the class's nearest member
  std::map<int32_t, std::pair<uint32_t, uint64_t>> tally;  // class -> (votes, best rank)
  for (uint64_t r = 0; r < kk; ++r) {
    int32_t cls = labels[order[r]];
    auto [it, inserted] = tally.emplace(cls, std::make_pair(0u, r));
    ++it->second.first;
  }
  int32_t winner = -1;
  uint32_t best_votes = 0;
  uint64_t best_rank = n;
  for (const auto& [cls, entry] : tally) {
    auto [votes, rank] = entry;
    if (votes > best_votes || (votes == best_votes && rank < best_rank)) {
      winner = cls;
      best_votes = votes;
      best_rank = rank;
    }
  }
  return winner;
}

}  // namespace

std::string knn_predict(const FeatureMatrix& train, const LabelVector& labels,
                        std::span<const float> query, const KnnConfig& cfg) {
  if (train.n == 0) throw InputError("knn: empty training set");
  if (labels.labels.size() != train.n)
    throw InputError("knn: labels count does not match training set");
  if (cfg.k < 1) throw InputError("knn: k must be >= 1");
  if (query.size() != train.d)
    throw InputError("knn: query dimension mismatch");

  InternedLabels interned;
  interned.ids.reserve(train.n);
  for (const auto& l : labels.labels) interned.ids.push_back(interned.intern(l));
  std::vector<double> norms = row_norms(train);
  int32_t winner =
      predict_interned(train, interned.ids, norms, query, cfg.k);
  for (const auto& [name, id] : interned.table)
    if (id == winner) return name;
  throw InvariantError("knn: no prediction");
}

double knn_accuracy(const FeatureMatrix& train, const LabelVector& train_labels,
                    const FeatureMatrix& test, const LabelVector& test_labels,
                    const KnnConfig& cfg, int workers) {
  if (test.n == 0) throw InputError("knn: empty test set");
  if (train.n == 0) throw InputError("knn: empty training set");
  if (train.d != test.d) throw InputError("knn: dimension mismatch");
  if (train_labels.labels.size() != train.n ||
      test_labels.labels.size() != test.n)
    throw InputError("knn: labels count mismatch");
  if (cfg.k < 1) throw InputError("knn: k must be >= 1");

  InternedLabels interned;
  interned.ids.reserve(train.n);
  for (const auto& l : train_labels.labels)
    interned.ids.push_back(interned.intern(l));
  std::vector<int32_t> expected(test.n, -1);
  for (uint64_t i = 0; i < test.n; ++i) {
    auto it = interned.table.find(test_labels.labels[i]);
    expected[i] = it == interned.table.end() ? -1 : it->second;
  }
  std::vector<double> norms = row_norms(train);

  std::vector<uint8_t> correct(test.n, 0);
  parallel_for(test.n, workers, [&](size_t i) {
    int32_t got =
        predict_interned(train, interned.ids, norms, test.row(i), cfg.k);
    correct[i] = got == expected[i] ? 1 : 0;
  });
  uint64_t hits = 0;
  for (uint8_t c : correct) hits += c;
  return double(hits) / double(test.n);
}

CorrelationResult pearson(std::span<const double> xs,
                          std::span<const double> ys, uint64_t seed,
                          int permutations) {
  if (xs.size() != ys.size())
    throw InputError("pearson: length mismatch");
  const size_t n = xs.size();
  if (n < 3) throw InputError("pearson: need at least 3 points");
  if (permutations < 1) throw InputError("pearson: permutations must be >= 1");

  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, syy = 0;
  std::vector<double> dx(n), dy(n);
  for (size_t i = 0; i < n; ++i) {
    dx[i] = xs[i] - mx;
    dy[i] = ys[i] - my;
    sxx += dx[i] * dx[i];
    syy += dy[i] * dy[i];
  }
  if (sxx == 0.0 || syy == 0.0)
    throw InputError("pearson: zero variance input");
  auto r_of = [&](std::span<const double> devy) {
    double num = 0;
    for (size_t i = 0; i < n; ++i) num += dx[i] * devy[i];
    return std::clamp(num / std::sqrt(sxx * syy), -1.0, 1.0);
  };
  CorrelationResult result;
  result.n = n;
  result.r = r_of(dy);

  rng::Stream stream(rng::mix(seed, rng::fnv1a("pearson")));
  std::vector<double> perm(dy.begin(), dy.end());
  const double threshold = std::abs(result.r);
  uint64_t exceed = 0;
  for (int it = 0; it < permutations; ++it) {
    for (size_t i = n - 1; i > 0; --i) {
      size_t j = size_t(stream.bounded(i + 1));
      std::swap(perm[i], perm[j]);
    }
    if (std::abs(r_of(perm)) >= threshold) ++exceed;
  }
  result.p = double(exceed + 1) / double(permutations + 1);
  return result;
}

}  // namespace embeval
