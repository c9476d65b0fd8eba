#include "embeval/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "embeval/error.hpp"
#include "embeval/parallel.hpp"
#include "embeval/rng.hpp"

namespace embeval {

void validate(const SynthSpec& spec) {
  if (spec.n_classes < 1) throw InputError("synth: n_classes must be >= 1");
  if (spec.n_factors < 1) throw InputError("synth: n_factors must be >= 1");
  if (spec.embed_dim < spec.n_factors)
    throw InputError("synth: embed_dim must be >= n_factors");
  if (spec.samples_per_class < 1)
    throw InputError("synth: samples_per_class must be >= 1");
  if (spec.factor_probs.size() !=
      size_t(spec.n_classes) * spec.n_factors)
    throw InputError("synth: factor_probs must be n_classes x n_factors");
  for (double p : spec.factor_probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw InputError("synth: factor probabilities must lie in [0, 1]");
  if (!spec.factor_scales.empty()) {
    if (spec.factor_scales.size() != spec.n_factors)
      throw InputError("synth: factor_scales must have n_factors entries");
    for (double s : spec.factor_scales)
      if (!(s > 0.0)) throw InputError("synth: factor scales must be > 0");
  }
  if (spec.noise_sigma < 0)
    throw InputError("synth: noise_sigma must be >= 0");
}

std::string synth_class_label(uint32_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%05u", index);
  return buf;
}

std::vector<double> factor_basis(const SynthSpec& spec) {
  validate(spec);
  const uint32_t d = spec.embed_dim;
  const uint32_t m = spec.n_factors;
  rng::Stream stream(rng::mix(spec.seed, rng::fnv1a("basis")));
  std::vector<double> b(size_t(d) * m);
  for (double& v : b) v = stream.gaussian();

  // Modified Gram-Schmidt with one re-orthogonalization sweep, then column
  // scaling by sqrt(factor_scales).
  for (uint32_t col = 0; col < m; ++col) {
    double* v = b.data() + size_t(col) * d;
    for (int pass = 0; pass < 2; ++pass) {
      for (uint32_t prev = 0; prev < col; ++prev) {
        const double* u = b.data() + size_t(prev) * d;
        double proj = 0;
        for (uint32_t j = 0; j < d; ++j) proj += u[j] * v[j];
        for (uint32_t j = 0; j < d; ++j) v[j] -= proj * u[j];
      }
    }
    double norm = 0;
    for (uint32_t j = 0; j < d; ++j) norm += v[j] * v[j];
    norm = std::sqrt(norm);
    if (norm < 1e-10)
      throw InvariantError("synth: degenerate basis column");
    for (uint32_t j = 0; j < d; ++j) v[j] /= norm;
  }
  for (uint32_t col = 0; col < m; ++col) {
    double scale = std::sqrt(spec.factor_scales.empty()
                                 ? 1.0
                                 : spec.factor_scales[col]);
    double* v = b.data() + size_t(col) * d;
    for (uint32_t j = 0; j < d; ++j) v[j] *= scale;
  }
  return b;
}

SynthDataset generate(const SynthSpec& spec, int workers) {
  validate(spec);
  const std::vector<double> basis = factor_basis(spec);
  const uint32_t d = spec.embed_dim;
  const uint32_t m = spec.n_factors;
  const uint64_t per_class = spec.samples_per_class;
  const uint64_t n = uint64_t(spec.n_classes) * per_class;

  SynthDataset ds;
  ds.n_factors = m;
  ds.features.n = n;
  ds.features.d = d;
  ds.features.data.resize(n * size_t(d));
  ds.latents.resize(n * size_t(m));
  ds.labels.labels.resize(n);

  parallel_for(spec.n_classes, workers, [&](size_t y) {
    rng::Stream latent(rng::mix(spec.seed, rng::fnv1a("latent"), y));
    rng::Stream noise(rng::mix(spec.seed, rng::fnv1a("noise"), y));
    const double* probs = spec.factor_probs.data() + y * m;
    const std::string label = synth_class_label(uint32_t(y));
    std::vector<double> x(d);
    for (uint64_t s = 0; s < per_class; ++s) {
      const uint64_t row = y * per_class + s;
      uint8_t* z = ds.latents.data() + row * m;
      for (uint32_t f = 0; f < m; ++f)
        z[f] = latent.unit() < probs[f] ? 1 : 0;
      std::fill(x.begin(), x.end(), 0.0);
      for (uint32_t f = 0; f < m; ++f) {
        if (!z[f]) continue;
        const double* col = basis.data() + size_t(f) * d;
        for (uint32_t j = 0; j < d; ++j) x[j] += col[j];
      }
      if (spec.noise_sigma > 0) {
        for (uint32_t j = 0; j < d; ++j)
          x[j] += spec.noise_sigma * noise.gaussian();
      }
      float* out = ds.features.data.data() + row * d;
      for (uint32_t j = 0; j < d; ++j) out[j] = float(x[j]);
      ds.labels.labels[row] = label;
    }
  });
  return ds;
}

LatentDotStats latent_dot_stats(const SynthDataset& ds,
                                const std::string& class_a,
                                const std::string& class_b) {
  const uint32_t m = ds.n_factors;
  if (m == 0) throw InvariantError("latent_dot_stats: latents not retained");

  std::map<std::string, std::vector<uint64_t>> rows;
  for (uint64_t i = 0; i < ds.labels.labels.size(); ++i)
    rows[ds.labels.labels[i]].push_back(i);
  auto find = [&](const std::string& cls) -> const std::vector<uint64_t>& {
    auto it = rows.find(cls);
    if (it == rows.end())
      throw InputError("latent_dot_stats: unknown class '" + cls + "'");
    return it->second;
  };
  const auto& ra = find(class_a);
  const auto& rb = find(class_b);

  // Factor sums S_i and co-occurrence counts C_ij give the exact all-pairs
  // mean and variance without enumerating pairs.
  auto accumulate = [&](const std::vector<uint64_t>& members) {
    std::vector<uint64_t> c(size_t(m) * m, 0);
    for (uint64_t row : members) {
      const uint8_t* z = ds.latents.data() + row * m;
      for (uint32_t i = 0; i < m; ++i) {
        if (!z[i]) continue;
        for (uint32_t j = 0; j < m; ++j)
          if (z[j]) ++c[size_t(i) * m + j];
      }
    }
    return c;
  };
  std::vector<uint64_t> ca = accumulate(ra);
  LatentDotStats stats;
  if (class_a == class_b) {
    const uint64_t n = ra.size();
    if (n < 2)
      throw InputError("latent_dot_stats: class '" + class_a +
                       "' needs >= 2 samples");
    stats.pairs = n * (n - 1) / 2;
    double mean = 0, e2 = 0;
    const double ordered = double(n) * double(n - 1);
    for (uint32_t i = 0; i < m; ++i) {
      double s = double(ca[size_t(i) * m + i]);
      mean += (s * s - s) / ordered;
    }
    for (uint32_t i = 0; i < m; ++i)
      for (uint32_t j = 0; j < m; ++j) {
        double c = double(ca[size_t(i) * m + j]);
        e2 += (c * c - c) / ordered;
      }
    stats.mean = mean;
    stats.variance = e2 - mean * mean;
  } else {
    std::vector<uint64_t> cb = accumulate(rb);
    stats.pairs = uint64_t(ra.size()) * rb.size();
    const double pairs = double(ra.size()) * double(rb.size());
    double mean = 0, e2 = 0;
    for (uint32_t i = 0; i < m; ++i)
      mean += double(ca[size_t(i) * m + i]) * double(cb[size_t(i) * m + i]) /
              pairs;
    for (uint32_t i = 0; i < m; ++i)
      for (uint32_t j = 0; j < m; ++j)
        e2 += double(ca[size_t(i) * m + j]) * double(cb[size_t(i) * m + j]) /
              pairs;
    stats.mean = mean;
    stats.variance = e2 - mean * mean;
  }
  return stats;
}

}  // namespace embeval
