#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "embeval/distributions.hpp"
#include "embeval/features.hpp"

namespace embeval {

// Mask id 0 is reserved for background; background patches never pair.
inline constexpr uint16_t kBackgroundId = 0;

struct PatchImage {
  std::string image_id;
  FeatureMatrix patches;        // P x D
  std::vector<uint16_t> mask;   // object id per patch
};

struct PatchSet {
  std::vector<PatchImage> images;
};

enum class PatchNormType {
  across_samples = 0,  // standardize each dimension over all patches
  within_image = 1,    // standardize each dimension per image
  both = 2,            // across-samples pass, then within-image pass
};

PatchNormType parse_patch_norm(int kind);

struct PatchNormResult {
  PatchSet set;
  std::vector<std::string> skipped_images;  // single-patch images under kind 1
};

PatchNormResult normalize_patches(const PatchSet& ps, PatchNormType type);

struct ObjectwiseOptions {
  // Intra pairs always stay within one image. Inter pairs span images by
  // default; set false to restrict them to the same image.
  bool inter_across_images = true;
};

struct ObjectwiseResult {
  std::vector<ClusterDistributions> dists;  // one per object class
  std::vector<uint16_t> object_ids;         // cluster_index -> mask id
  std::vector<std::string> object_names;    // resolved display names
  uint64_t background_patches = 0;
  uint64_t excluded_images = 0;  // images without a usable foreground patch
};

// Per-object-class intra/inter similarity distributions. Object classes are
// the distinct non-background mask ids; `class_names` optionally maps them to
// display names.
ObjectwiseResult objectwise_distributions(
    const PatchSet& ps, const SamplingConfig& cfg,
    const std::map<uint16_t, std::string>& class_names = {},
    const ObjectwiseOptions& options = {});

// Manifest CSV: `image_id,feature_path,mask_path` per line; relative paths
// resolve against the manifest directory. Mask files are raw little-endian
// u16 arrays with one id per patch.
PatchSet load_patchset(const std::filesystem::path& manifest);
void save_mask(const std::vector<uint16_t>& mask,
               const std::filesystem::path& path);

}  // namespace embeval
