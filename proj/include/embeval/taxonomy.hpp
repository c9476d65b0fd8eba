#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace embeval {

struct TaxNode {
  std::string id;
  std::string name;  // defaults to id; the edge-list format carries no names
  std::optional<std::string> parent;
  std::vector<std::string> children;   // input order
  std::vector<std::string> class_ids;  // classes tagged directly at this node
  int level = -1;
  // A node is eligible when at least min_clusters_per_node of its children
  // have a non-empty class closure. Samples tagged directly at a node belong
  // to its parent's cluster, never to one of its own.
  bool eligible = false;
};

struct Taxonomy {
  std::map<std::string, TaxNode> nodes;
  std::string root_id;

  const TaxNode& node(const std::string& id) const;
};

// One cluster per direct child of a node: the child's classes plus every
// descendant's classes.
struct ClusterSpec {
  std::string node_id;
  uint32_t cluster_index = 0;  // 0-based position in the parent's child list
  std::set<std::string> class_ids;
};

struct CurationPolicy {
  uint32_t min_images_per_class = 10;
  uint32_t min_clusters_per_node = 2;
};

// Hierarchy file: one node per line, `node_id,parent_id,class_id[;class_id...]`,
// parent `-` marks the root, the class field may be empty or absent, and `#`
// starts a comment line. Levels are assigned breadth-first from the root.
Taxonomy parse_taxonomy(std::string_view text);
Taxonomy load_taxonomy(const std::filesystem::path& path);
std::string to_text(const Taxonomy& taxonomy);

// Drops classes below the size threshold everywhere and re-derives node
// eligibility. Nodes stay in the tree for level bookkeeping.
Taxonomy curate(const Taxonomy& taxonomy,
                const std::map<std::string, uint64_t>& class_sizes,
                const CurationPolicy& policy);

// Clusters of an eligible node, in child order; children whose closure is
// empty are dropped. Sibling closures sharing a class id are an input error.
std::vector<ClusterSpec> node_clusters(const Taxonomy& taxonomy,
                                       const std::string& node_id);

// Same computation for every eligible node in one bottom-up pass.
std::map<std::string, std::vector<ClusterSpec>> all_node_clusters(
    const Taxonomy& taxonomy);

// Class closure (own classes plus descendants) for every node.
std::map<std::string, std::set<std::string>> subtree_classes(
    const Taxonomy& taxonomy);

struct LevelSummaryRow {
  int level = 0;
  size_t nodes = 0;
  size_t eligible = 0;
  size_t classes = 0;   // distinct classes in subtrees rooted at this level
  uint64_t samples = 0;
};

std::vector<LevelSummaryRow> level_summary(
    const Taxonomy& taxonomy,
    const std::map<std::string, uint64_t>& class_sizes);

// Class-sizes file: `class_id,count` per line, `#` comments allowed.
std::map<std::string, uint64_t> parse_class_sizes(std::string_view text);
std::map<std::string, uint64_t> load_class_sizes(
    const std::filesystem::path& path);

}  // namespace embeval
