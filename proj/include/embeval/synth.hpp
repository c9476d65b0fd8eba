#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embeval/features.hpp"

namespace embeval {

// Generative model: per sample of class y, draw binary factors
// z_m ~ Bernoulli(p[y][m]) and emit x = B z + e, e ~ N(0, noise_sigma^2 I).
// B has orthogonal columns scaled so that B^T B = diag(factor_scales).
struct SynthSpec {
  uint32_t n_classes = 2;
  uint32_t n_factors = 2;
  uint32_t embed_dim = 8;
  uint32_t samples_per_class = 100;
  std::vector<double> factor_probs;   // n_classes x n_factors, row-major
  std::vector<double> factor_scales;  // length n_factors; empty means all 1
  double noise_sigma = 0.0;
  uint64_t seed = 0;
};

struct SynthDataset {
  FeatureMatrix features;
  LabelVector labels;
  std::vector<uint8_t> latents;  // n x n_factors
  uint32_t n_factors = 0;
};

// Deterministic seeded basis, column-major (column m at [m*d, (m+1)*d)).
std::vector<double> factor_basis(const SynthSpec& spec);

// Rows are class-major; labels are zero-padded ("c00000", "c00001", ...).
// Latent and noise draws use separate per-class streams, so changing
// noise_sigma never changes the factor draws.
SynthDataset generate(const SynthSpec& spec, int workers = 1);

std::string synth_class_label(uint32_t index);

// Exact all-pairs statistics of the latent dot product z_i . z_j between two
// classes (cross pairs) or within one class (unordered distinct pairs).
struct LatentDotStats {
  double mean = 0;
  double variance = 0;
  uint64_t pairs = 0;
};

LatentDotStats latent_dot_stats(const SynthDataset& ds,
                                const std::string& class_a,
                                const std::string& class_b);

void validate(const SynthSpec& spec);

}  // namespace embeval
