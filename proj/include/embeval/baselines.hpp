#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embeval/features.hpp"

namespace embeval {

struct KnnConfig {
  int k = 10;  // cosine metric, uniform votes
};

// Majority label among the k nearest training rows by cosine similarity.
// Similarity ties break toward the lower train index; vote ties toward the
// class whose nearest member ranks first.
std::string knn_predict(const FeatureMatrix& train, const LabelVector& labels,
                        std::span<const float> query, const KnnConfig& cfg);

// Fraction of test rows whose prediction matches. The caller decides whether
// train and test overlap; self matches are not excluded.
double knn_accuracy(const FeatureMatrix& train, const LabelVector& train_labels,
                    const FeatureMatrix& test, const LabelVector& test_labels,
                    const KnnConfig& cfg, int workers = 1);

struct CorrelationResult {
  double r = 0;
  double p = 1;
  size_t n = 0;
};

// Product-moment r with a two-sided permutation p-value (seeded, >= 10000
// permutations by default).
CorrelationResult pearson(std::span<const double> xs,
                          std::span<const double> ys, uint64_t seed,
                          int permutations = 10000);

}  // namespace embeval
