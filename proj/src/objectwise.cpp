#include "embeval/objectwise.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "embeval/error.hpp"
#include "embeval/rng.hpp"

namespace embeval {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

void standardize(FeatureMatrix& m, const NormStats& stats) {
  for (uint64_t i = 0; i < m.n; ++i) {
    float* row = m.data.data() + i * m.d;
    for (uint32_t j = 0; j < m.d; ++j) {
      double denom = std::max(stats.stddev[j], kStdEpsilon);
      row[j] = float((double(row[j]) - stats.mean[j]) / denom);
    }
  }
}

// A patch across the set: (image index, patch index within the image).
struct PatchRef {
  uint32_t image = 0;
  uint32_t patch = 0;
};

}  // namespace

PatchNormType parse_patch_norm(int kind) {
  switch (kind) {
    case 0: return PatchNormType::across_samples;
    case 1: return PatchNormType::within_image;
    case 2: return PatchNormType::both;
  }
  throw InputError("patch normalization type must be 0, 1 or 2");
}

PatchNormResult normalize_patches(const PatchSet& ps, PatchNormType type) {
  if (ps.images.empty()) throw InputError("empty patch set");
  PatchNormResult result;
  result.set = ps;

  if (type == PatchNormType::across_samples || type == PatchNormType::both) {
    const uint32_t d = result.set.images.front().patches.d;
    NormStats stats;
    stats.mean.assign(d, 0.0);
    stats.stddev.assign(d, 0.0);
    uint64_t total = 0;
    for (const auto& img : result.set.images) {
      for (uint64_t i = 0; i < img.patches.n; ++i) {
        const float* row = img.patches.data.data() + i * d;
        for (uint32_t j = 0; j < d; ++j) stats.mean[j] += double(row[j]);
      }
      total += img.patches.n;
    }
    for (uint32_t j = 0; j < d; ++j) stats.mean[j] /= double(total);
    for (const auto& img : result.set.images) {
      for (uint64_t i = 0; i < img.patches.n; ++i) {
        const float* row = img.patches.data.data() + i * d;
        for (uint32_t j = 0; j < d; ++j) {
          double dev = double(row[j]) - stats.mean[j];
          stats.stddev[j] += dev * dev;
        }
      }
    }
    for (uint32_t j = 0; j < d; ++j)
      stats.stddev[j] = std::sqrt(stats.stddev[j] / double(total));
    for (auto& img : result.set.images) standardize(img.patches, stats);
  }

  if (type == PatchNormType::within_image || type == PatchNormType::both) {
    std::vector<PatchImage> kept;
    kept.reserve(result.set.images.size());
    for (auto& img : result.set.images) {
      if (img.patches.n < 2) {
        result.skipped_images.push_back(img.image_id);
        continue;
      }
      NormStats stats = compute_stats(img.patches);
      standardize(img.patches, stats);
      kept.push_back(std::move(img));
    }
    result.set.images = std::move(kept);
  }
  return result;
}

ObjectwiseResult objectwise_distributions(
    const PatchSet& ps, const SamplingConfig& cfg,
    const std::map<uint16_t, std::string>& class_names,
    const ObjectwiseOptions& options) {
  if (ps.images.empty()) throw InputError("empty patch set");
  const uint32_t d = ps.images.front().patches.d;
  for (const auto& img : ps.images) {
    if (img.patches.d != d)
      throw InputError("image '" + img.image_id +
                       "': patch dimension mismatch");
    if (img.mask.size() != img.patches.n)
      throw InputError("image '" + img.image_id +
                       "': mask length does not match patch count");
  }

  ObjectwiseResult result;
  std::vector<std::vector<double>> norms(ps.images.size());
  // usable foreground patches per (object id, image)
  std::map<uint16_t, std::map<uint32_t, std::vector<uint32_t>>> groups;
  for (uint32_t ii = 0; ii < ps.images.size(); ++ii) {
    const PatchImage& img = ps.images[ii];
    norms[ii] = row_norms(img.patches);
    bool usable_image = false;
    for (uint32_t p = 0; p < img.patches.n; ++p) {
      if (img.mask[p] == kBackgroundId) {
        ++result.background_patches;
        continue;
      }
      if (norms[ii][p] == 0.0) continue;
      groups[img.mask[p]][ii].push_back(p);
      usable_image = true;
    }
    if (!usable_image) ++result.excluded_images;
  }
  if (groups.size() < 2)
    throw InputError("object-wise evaluation needs >= 2 object classes, got " +
                     std::to_string(groups.size()));

  for (const auto& [id, _] : groups) {
    result.object_ids.push_back(id);
    auto named = class_names.find(id);
    result.object_names.push_back(named == class_names.end()
                                      ? std::to_string(id)
                                      : named->second);
  }

  // Per-(class, image) subsamples; the sampled patches also form the pools
  // for inter pairs.
  const std::string node_id = "objectwise";
  std::vector<std::vector<std::pair<uint32_t, std::vector<uint32_t>>>> sampled(
      result.object_ids.size());
  for (size_t c = 0; c < result.object_ids.size(); ++c) {
    for (const auto& [img_index, patches] : groups.at(result.object_ids[c])) {
      uint64_t key = rng::mix(uint64_t(c),
                              rng::fnv1a(ps.images[img_index].image_id));
      sampled[c].emplace_back(
          img_index, subsample(patches, cfg, node_id, key));
    }
  }

  // Flattened pool of sampled patches in class order, with class segments.
  std::vector<PatchRef> pool;
  std::vector<size_t> seg(result.object_ids.size() + 1, 0);
  for (size_t c = 0; c < sampled.size(); ++c) {
    size_t count = 0;
    for (const auto& [img_index, patches] : sampled[c]) count += patches.size();
    seg[c + 1] = seg[c] + count;
  }
  pool.reserve(seg.back());
  for (const auto& per_class : sampled)
    for (const auto& [img_index, patches] : per_class)
      for (uint32_t p : patches) pool.push_back(PatchRef{img_index, p});

  auto score_of = [&](PatchRef a, PatchRef b) {
    const PatchImage& ia = ps.images[a.image];
    const PatchImage& ib = ps.images[b.image];
    double s = dot(ia.patches.row(a.patch), ib.patches.row(b.patch)) /
               (norms[a.image][a.patch] * norms[b.image][b.patch]);
    return std::clamp(s, -1.0, 1.0);
  };

  result.dists.resize(result.object_ids.size());
  for (size_t c = 0; c < result.object_ids.size(); ++c) {
    ClusterDistributions& out = result.dists[c];
    out.cluster_index = uint32_t(c);
    const uint64_t m = seg[c + 1] - seg[c];

    // intra: same object within the same image
    for (const auto& [img_index, patches] : sampled[c]) {
      for (size_t a = 0; a + 1 < patches.size(); ++a)
        for (size_t b = a + 1; b < patches.size(); ++b)
          out.intra.add(score_of(PatchRef{img_index, patches[a]},
                                 PatchRef{img_index, patches[b]}));
    }
    if (out.intra.total == 0) {
      out.skipped = true;
      continue;
    }

    if (options.inter_across_images) {
      const uint64_t pool_other = pool.size() - m;
      if (pool_other == 0) {
        out.skipped = true;
        continue;
      }
      auto own = [&](uint64_t idx) { return pool[seg[c] + idx]; };
      auto other = [&](uint64_t jp) {
        return pool[jp < seg[c] ? jp : jp + m];
      };
      const unsigned __int128 pairs =
          static_cast<unsigned __int128>(m) * pool_other;
      if (pairs <= cfg.inter_pair_cap) {
        for (uint64_t jp = 0; jp < pool_other; ++jp)
          for (uint64_t ii = 0; ii < m; ++ii)
            out.inter.add(score_of(own(ii), other(jp)));
      } else {
        for (uint64_t t = 0; t < cfg.inter_pair_cap; ++t) {
          unsigned __int128 p =
              static_cast<unsigned __int128>(t) * pairs / cfg.inter_pair_cap;
          out.inter.add(score_of(own(uint64_t(p % m)), other(uint64_t(p / m))));
        }
      }
    } else {
      // same-image inter pairs: own sampled patches vs other-class sampled
      // patches of that image
      struct Block {
        uint32_t image;
        std::vector<uint32_t> own;
        std::vector<PatchRef> others;
      };
      std::vector<Block> blocks;
      for (const auto& [img_index, patches] : sampled[c]) {
        std::vector<PatchRef> others;
        for (size_t c2 = 0; c2 < sampled.size(); ++c2) {
          if (c2 == c) continue;
          for (const auto& [img2, patches2] : sampled[c2])
            if (img2 == img_index)
              for (uint32_t p : patches2)
                others.push_back(PatchRef{img_index, p});
        }
        if (!others.empty())
          blocks.push_back(Block{img_index, patches, std::move(others)});
      }
      unsigned __int128 pairs = 0;
      std::vector<unsigned __int128> prefix{0};
      for (const auto& blk : blocks) {
        pairs += static_cast<unsigned __int128>(blk.own.size()) *
                 blk.others.size();
        prefix.push_back(pairs);
      }
      if (pairs == 0) {
        out.skipped = true;
        continue;
      }
      auto add_pair = [&](size_t block, uint64_t local) {
        const Block& blk = blocks[block];
        uint64_t ii = local % blk.own.size();
        uint64_t jp = local / blk.own.size();
        out.inter.add(
            score_of(PatchRef{blk.image, blk.own[ii]}, blk.others[jp]));
      };
      if (pairs <= cfg.inter_pair_cap) {
        for (size_t blk = 0; blk < blocks.size(); ++blk) {
          uint64_t count = uint64_t(prefix[blk + 1] - prefix[blk]);
          for (uint64_t local = 0; local < count; ++local) add_pair(blk, local);
        }
      } else {
        size_t blk = 0;
        for (uint64_t t = 0; t < cfg.inter_pair_cap; ++t) {
          unsigned __int128 p =
              static_cast<unsigned __int128>(t) * pairs / cfg.inter_pair_cap;
          while (p >= prefix[blk + 1]) ++blk;
          add_pair(blk, uint64_t(p - prefix[blk]));
        }
      }
    }
    if (out.inter.total == 0) out.skipped = true;
  }
  return result;
}

PatchSet load_patchset(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open manifest: " + manifest.string());
  const std::filesystem::path base = manifest.parent_path();

  PatchSet ps;
  std::string raw;
  uint64_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    size_t c1 = line.find(',');
    size_t c2 = c1 == std::string_view::npos ? std::string_view::npos
                                             : line.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw InputError("manifest line " + std::to_string(line_no) +
                       ": expected image_id,feature_path,mask_path");
    PatchImage img;
    img.image_id = std::string(trim(line.substr(0, c1)));
    std::filesystem::path fpath{
        std::string(trim(line.substr(c1 + 1, c2 - c1 - 1)))};
    std::filesystem::path mpath{std::string(trim(line.substr(c2 + 1)))};
    if (fpath.is_relative()) fpath = base / fpath;
    if (mpath.is_relative()) mpath = base / mpath;
    img.patches = load_features(fpath);

    std::ifstream mf(mpath, std::ios::binary);
    if (!mf) throw InputError("cannot open mask: " + mpath.string());
    std::string bytes((std::istreambuf_iterator<char>(mf)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() != img.patches.n * 2)
      throw InputError("mask " + mpath.string() + ": expected " +
                       std::to_string(img.patches.n * 2) + " bytes, got " +
                       std::to_string(bytes.size()));
    img.mask.resize(img.patches.n);
    for (uint64_t i = 0; i < img.patches.n; ++i) {
      img.mask[i] = uint16_t(uint8_t(bytes[2 * i])) |
                    uint16_t(uint8_t(bytes[2 * i + 1])) << 8;
    }
    ps.images.push_back(std::move(img));
  }
  if (ps.images.empty())
    throw InputError(manifest.string() + ": manifest is empty");
  return ps;
}

void save_mask(const std::vector<uint16_t>& mask,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open file for writing: " + path.string());
  for (uint16_t v : mask) {
    char bytes[2] = {char(v & 0xff), char(v >> 8)};
    out.write(bytes, 2);
  }
  if (!out) throw InputError("failed writing file: " + path.string());
}

}  // namespace embeval
