#include "embeval/taxonomy.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "embeval/error.hpp"

namespace embeval {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos
                                      ? std::string_view::npos
                                      : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Nodes in breadth-first order from the root; assigns levels as it goes and
// reports a cycle if anything stays unreachable.
std::vector<std::string> bfs_order_and_levels(Taxonomy& tax,
                                              const std::vector<std::string>& input_order) {
  std::vector<std::string> order;
  order.reserve(tax.nodes.size());
  std::deque<std::string> queue;
  tax.nodes.at(tax.root_id).level = 0;
  queue.push_back(tax.root_id);
  while (!queue.empty()) {
    std::string id = std::move(queue.front());
    queue.pop_front();
    const TaxNode& node = tax.nodes.at(id);
    for (const std::string& child : node.children) {
      tax.nodes.at(child).level = node.level + 1;
      queue.push_back(child);
    }
    order.push_back(std::move(id));
  }
  if (order.size() != tax.nodes.size()) {
    for (const std::string& id : input_order)
      if (tax.nodes.at(id).level < 0)
        throw InputError("cycle detected involving node '" + id + "'");
  }
  return order;
}

void refresh_eligibility(Taxonomy& tax, uint32_t min_clusters) {
  auto closures = subtree_classes(tax);
  for (auto& [id, node] : tax.nodes) {
    uint32_t surviving = 0;
    for (const std::string& child : node.children)
      if (!closures.at(child).empty()) ++surviving;
    node.eligible = surviving >= min_clusters;
  }
}

}  // namespace

const TaxNode& Taxonomy::node(const std::string& id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw InputError("unknown node-id '" + id + "'");
  return it->second;
}

Taxonomy parse_taxonomy(std::string_view text) {
  Taxonomy tax;
  std::vector<std::string> input_order;
  size_t pos = 0;
  uint64_t line_no = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) break;
    size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    auto fields = split(line, ',');
    if (fields.size() < 2 || fields.size() > 3)
      throw InputError("taxonomy line " + std::to_string(line_no) +
                       ": expected node_id,parent_id[,classes]");
    TaxNode node;
    node.id = std::string(trim(fields[0]));
    if (node.id.empty())
      throw InputError("taxonomy line " + std::to_string(line_no) +
                       ": empty node-id");
    std::string parent{trim(fields[1])};
    if (parent != "-") {
      if (parent.empty())
        throw InputError("taxonomy line " + std::to_string(line_no) +
                         ": empty parent for node '" + node.id + "'");
      if (parent == node.id)
        throw InputError("cycle detected involving node '" + node.id + "'");
      node.parent = parent;
    }
    if (fields.size() == 3) {
      std::unordered_set<std::string_view> seen;
      for (std::string_view cls : split(fields[2], ';')) {
        cls = trim(cls);
        if (cls.empty()) continue;
        if (seen.insert(cls).second) node.class_ids.emplace_back(cls);
      }
    }
    node.name = node.id;
    if (!node.parent && !tax.root_id.empty())
      throw InputError("multiple roots: '" + tax.root_id + "' and '" +
                       node.id + "'");
    if (!node.parent) tax.root_id = node.id;
    if (!tax.nodes.emplace(node.id, std::move(node)).second)
      throw InputError("duplicate node-id '" + std::string(trim(fields[0])) +
                       "'");
    input_order.emplace_back(trim(fields[0]));
  }
  if (tax.nodes.empty()) throw InputError("taxonomy input is empty");
  if (tax.root_id.empty())
    throw InputError("no root node (expected one line with parent '-')");

  // Children in the order the child lines appear.
  for (const std::string& id : input_order) {
    const TaxNode& node = tax.nodes.at(id);
    if (node.parent) {
      auto it = tax.nodes.find(*node.parent);
      if (it == tax.nodes.end())
        throw InputError("dangling parent reference '" + *node.parent +
                         "' from node '" + id + "'");
      it->second.children.push_back(id);
    }
  }
  bfs_order_and_levels(tax, input_order);
  refresh_eligibility(tax, CurationPolicy{}.min_clusters_per_node);
  return tax;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  return parse_taxonomy(read_text(path));
}

std::string to_text(const Taxonomy& taxonomy) {
  Taxonomy copy = taxonomy;
  std::vector<std::string> ids;
  ids.reserve(copy.nodes.size());
  for (const auto& [id, node] : copy.nodes) ids.push_back(id);
  std::vector<std::string> order = bfs_order_and_levels(copy, ids);
  std::string out;
  for (const std::string& id : order) {
    const TaxNode& node = taxonomy.nodes.at(id);
    out += id;
    out += ',';
    out += node.parent ? *node.parent : "-";
    out += ',';
    for (size_t i = 0; i < node.class_ids.size(); ++i) {
      if (i) out += ';';
      out += node.class_ids[i];
    }
    out += '\n';
  }
  return out;
}

std::map<std::string, std::set<std::string>> subtree_classes(
    const Taxonomy& taxonomy) {
  Taxonomy copy = taxonomy;
  std::vector<std::string> ids;
  for (const auto& [id, node] : copy.nodes) ids.push_back(id);
  std::vector<std::string> order = bfs_order_and_levels(copy, ids);

  std::map<std::string, std::set<std::string>> closures;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const TaxNode& node = taxonomy.nodes.at(*it);
    std::set<std::string> acc(node.class_ids.begin(), node.class_ids.end());
    for (const std::string& child : node.children) {
      const std::set<std::string>& sub = closures.at(child);
      acc.insert(sub.begin(), sub.end());
    }
    closures.emplace(*it, std::move(acc));
  }
  return closures;
}

Taxonomy curate(const Taxonomy& taxonomy,
                const std::map<std::string, uint64_t>& class_sizes,
                const CurationPolicy& policy) {
  if (policy.min_clusters_per_node < 2)
    throw InputError("min_clusters_per_node must be >= 2");
  if (policy.min_images_per_class < 1)
    throw InputError("min_images_per_class must be >= 1");

  std::vector<std::string> missing;
  for (const auto& [id, node] : taxonomy.nodes)
    for (const std::string& cls : node.class_ids)
      if (!class_sizes.count(cls) && missing.size() < 5) missing.push_back(cls);
  if (!missing.empty()) {
    std::string msg = "class sizes missing for:";
    for (const auto& c : missing) msg += " '" + c + "'";
    throw InputError(msg);
  }

  Taxonomy out = taxonomy;
  for (auto& [id, node] : out.nodes) {
    std::erase_if(node.class_ids, [&](const std::string& cls) {
      return class_sizes.at(cls) < policy.min_images_per_class;
    });
  }
  refresh_eligibility(out, policy.min_clusters_per_node);
  return out;
}

std::vector<ClusterSpec> node_clusters(const Taxonomy& taxonomy,
                                       const std::string& node_id) {
  const TaxNode& node = taxonomy.node(node_id);
  if (!node.eligible)
    throw InputError("node '" + node_id + "' is ineligible");
  auto closures = subtree_classes(taxonomy);

  std::vector<ClusterSpec> clusters;
  std::map<std::string, std::string> owner;  // class -> first sibling
  for (uint32_t i = 0; i < node.children.size(); ++i) {
    const std::string& child = node.children[i];
    const std::set<std::string>& closure = closures.at(child);
    if (closure.empty()) continue;
    for (const std::string& cls : closure) {
      auto [it, inserted] = owner.emplace(cls, child);
      if (!inserted)
        throw InputError("class '" + cls + "' appears under siblings '" +
                         it->second + "' and '" + child + "' of node '" +
                         node_id + "'");
    }
    clusters.push_back(ClusterSpec{node_id, i, closure});
  }
  return clusters;
}

std::map<std::string, std::vector<ClusterSpec>> all_node_clusters(
    const Taxonomy& taxonomy) {
  auto closures = subtree_classes(taxonomy);
  std::map<std::string, std::vector<ClusterSpec>> out;
  for (const auto& [id, node] : taxonomy.nodes) {
    if (!node.eligible) continue;
    std::vector<ClusterSpec> clusters;
    std::map<std::string, std::string> owner;
    for (uint32_t i = 0; i < node.children.size(); ++i) {
      const std::string& child = node.children[i];
      const std::set<std::string>& closure = closures.at(child);
      if (closure.empty()) continue;
      for (const std::string& cls : closure) {
        auto [it, inserted] = owner.emplace(cls, child);
        if (!inserted)
          throw InputError("class '" + cls + "' appears under siblings '" +
                           it->second + "' and '" + child + "' of node '" +
                           id + "'");
      }
      clusters.push_back(ClusterSpec{id, i, closure});
    }
    out.emplace(id, std::move(clusters));
  }
  return out;
}

std::vector<LevelSummaryRow> level_summary(
    const Taxonomy& taxonomy,
    const std::map<std::string, uint64_t>& class_sizes) {
  auto closures = subtree_classes(taxonomy);
  std::map<int, LevelSummaryRow> rows;
  std::map<int, std::set<std::string>> level_classes;
  for (const auto& [id, node] : taxonomy.nodes) {
    LevelSummaryRow& row = rows[node.level];
    row.level = node.level;
    row.nodes += 1;
    if (node.eligible) row.eligible += 1;
    const std::set<std::string>& closure = closures.at(id);
    level_classes[node.level].insert(closure.begin(), closure.end());
  }
  std::vector<LevelSummaryRow> out;
  for (auto& [level, row] : rows) {
    const std::set<std::string>& classes = level_classes.at(level);
    row.classes = classes.size();
    for (const std::string& cls : classes) {
      auto it = class_sizes.find(cls);
      row.samples += it == class_sizes.end() ? 0 : it->second;
    }
    out.push_back(row);
  }
  return out;
}

std::map<std::string, uint64_t> parse_class_sizes(std::string_view text) {
  std::map<std::string, uint64_t> out;
  size_t pos = 0;
  uint64_t line_no = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() != 2)
      throw InputError("class-sizes line " + std::to_string(line_no) +
                       ": expected class_id,count");
    std::string cls{trim(fields[0])};
    std::string_view count_str = trim(fields[1]);
    uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(count_str.data(),
                                     count_str.data() + count_str.size(), count);
    if (ec != std::errc{} || ptr != count_str.data() + count_str.size())
      throw InputError("class-sizes line " + std::to_string(line_no) +
                       ": bad count '" + std::string(count_str) + "'");
    if (!out.emplace(cls, count).second)
      throw InputError("class-sizes line " + std::to_string(line_no) +
                       ": duplicate class '" + cls + "'");
  }
  return out;
}

std::map<std::string, uint64_t> load_class_sizes(
    const std::filesystem::path& path) {
  return parse_class_sizes(read_text(path));
}

}  // namespace embeval
