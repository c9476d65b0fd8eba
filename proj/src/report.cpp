#include "embeval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "embeval/error.hpp"

namespace embeval {

std::string fmt_f32(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", double(v));
  return buf;
}

LevelTable level_table(std::span<const NodeReport> reports) {
  if (reports.empty()) throw InvariantError("level_table: no node reports");

  struct Acc {
    double overlap = 0, inter = 0, intra = 0;
    size_t nodes = 0;
  };
  std::map<int, Acc> levels;
  Acc all;
  for (const auto& r : reports) {
    for (Acc* acc : {&levels[r.level], &all}) {
      acc->overlap += double(r.mean_overlap);
      acc->inter += double(r.inter_astd);
      acc->intra += double(r.intra_astd);
      acc->nodes += 1;
    }
  }
  auto to_row = [](int level, const Acc& a) {
    LevelRow row;
    row.level = level;
    row.nodes = a.nodes;
    row.mean_overlap = float(a.overlap / double(a.nodes));
    row.mean_inter_astd = float(a.inter / double(a.nodes));
    row.mean_intra_astd = float(a.intra / double(a.nodes));
    return row;
  };
  LevelTable table;
  for (const auto& [level, acc] : levels) table.rows.push_back(to_row(level, acc));
  table.avg = to_row(-1, all);
  return table;
}

std::string render_level_table_text(const LevelTable& table) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %8s %12s %12s %8s\n", "level",
                "overlap", "inter_astd", "intra_astd", "nodes");
  out << line;
  auto print = [&](const char* name, const LevelRow& row) {
    std::snprintf(line, sizeof line, "%-6s %8.3f %12.3f %12.3f %8zu\n", name,
                  double(row.mean_overlap), double(row.mean_inter_astd),
                  double(row.mean_intra_astd), row.nodes);
    out << line;
  };
  for (const auto& row : table.rows)
    print(std::to_string(row.level).c_str(), row);
  print("AVG", table.avg);
  return out.str();
}

OverlapHistogram class_overlap_histogram(
    const std::map<std::string, double>& per_class) {
  if (per_class.empty())
    throw InvariantError("class_overlap_histogram: no classes");
  OverlapHistogram h;
  for (const auto& [cls, overlap] : per_class) {
    int bin = int(overlap * 20.0);
    if (bin < 0) bin = 0;
    if (bin > 19) bin = 19;
    ++h.counts[size_t(bin)];
    ++h.total;
  }
  return h;
}

RatioScatter ratio_scatter(std::span<const NodeReport> reports,
                           const Taxonomy& taxonomy,
                           const std::set<std::string>& subset) {
  auto closures = subtree_classes(taxonomy);
  RatioScatter scatter;
  for (const auto& r : reports) {
    auto node_it = taxonomy.nodes.find(r.node_id);
    if (node_it == taxonomy.nodes.end()) continue;
    // cluster-class universe: union of the children's closures
    std::set<std::string> classes;
    for (const std::string& child : node_it->second.children) {
      const auto& sub = closures.at(child);
      classes.insert(sub.begin(), sub.end());
    }
    if (classes.empty()) continue;
    size_t hit = 0;
    for (const auto& cls : classes) hit += subset.count(cls);
    RatioScatter::Point point;
    point.node_id = r.node_id;
    point.ratio = float(double(hit) / double(classes.size()));
    point.overlap = r.mean_overlap;
    scatter.points.push_back(std::move(point));
  }
  return scatter;
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open file for writing: " + path.string());
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw InputError("failed writing file: " + path.string());
}

void write_nodes_csv(const std::filesystem::path& path,
                     std::span<const NodeReport> reports) {
  std::string out =
      "node_id,level,n_clusters,mean_overlap,max_overlap,inter_astd,"
      "intra_astd,skipped\n";
  for (const auto& r : reports) {
    out += r.node_id;
    out += ',' + std::to_string(r.level);
    out += ',' + std::to_string(r.n_clusters);
    out += ',' + fmt_f32(r.mean_overlap);
    out += ',' + fmt_f32(r.max_overlap);
    out += ',' + fmt_f32(r.inter_astd);
    out += ',' + fmt_f32(r.intra_astd);
    out += ',' + std::to_string(r.skipped_clusters);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<NodeReport> read_nodes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw InputError(path.string() + ": missing header");
  std::vector<NodeReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      cells.push_back(line.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 8)
      throw InputError(path.string() + ": malformed row '" + line + "'");
    NodeReport r;
    r.node_id = cells[0];
    r.level = std::stoi(cells[1]);
    r.n_clusters = uint32_t(std::stoul(cells[2]));
    r.mean_overlap = std::strtof(cells[3].c_str(), nullptr);
    r.max_overlap = std::strtof(cells[4].c_str(), nullptr);
    r.inter_astd = std::strtof(cells[5].c_str(), nullptr);
    r.intra_astd = std::strtof(cells[6].c_str(), nullptr);
    r.skipped_clusters = uint32_t(std::stoul(cells[7]));
    reports.push_back(std::move(r));
  }
  return reports;
}

void write_levels_csv(const std::filesystem::path& path,
                      const LevelTable& table) {
  std::string out = "level,mean_overlap,mean_inter_astd,mean_intra_astd,nodes\n";
  auto row_text = [](const std::string& level, const LevelRow& row) {
    return level + ',' + fmt_f32(row.mean_overlap) + ',' +
           fmt_f32(row.mean_inter_astd) + ',' + fmt_f32(row.mean_intra_astd) +
           ',' + std::to_string(row.nodes) + '\n';
  };
  for (const auto& row : table.rows)
    out += row_text(std::to_string(row.level), row);
  out += row_text("AVG", table.avg);
  write_text_file(path, out);
}

void write_classes_csv(const std::filesystem::path& path,
                       const std::map<std::string, double>& per_class) {
  std::string out = "class_id,overlap\n";
  for (const auto& [cls, overlap] : per_class)
    out += cls + ',' + fmt_f32(float(overlap)) + '\n';
  write_text_file(path, out);
}

void write_overlap_histogram_csv(const std::filesystem::path& path,
                                 const OverlapHistogram& hist) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (size_t k = 0; k < hist.counts.size(); ++k) {
    out += fmt_f32(float(k) * 0.05f) + ',' + fmt_f32(float(k + 1) * 0.05f) +
           ',' + std::to_string(hist.counts[k]) + '\n';
  }
  write_text_file(path, out);
}

std::string render_histogram_svg(const OverlapHistogram& hist,
                                 std::string_view title) {
  constexpr int kWidth = 640, kHeight = 420;
  constexpr int kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;
  uint64_t peak = 1;
  for (uint64_t c : hist.counts) peak = std::max(peak, c);

  std::string svg;
  char buf[256];
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"420\" viewBox=\"0 0 640 420\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" "
                "font-size=\"16\" text-anchor=\"middle\">%.*s</text>\n",
                kWidth / 2, int(title.size()), title.data());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"black\"/>\n",
                kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"black\"/>\n",
                kLeft, kTop, kLeft, kTop + plot_h);
  svg += buf;
  for (size_t k = 0; k < hist.counts.size(); ++k) {
    double h = double(hist.counts[k]) / double(peak) * plot_h;
    double x = kLeft + double(k) / 20.0 * plot_w;
    double w = double(plot_w) / 20.0 - 2.0;
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                  "height=\"%.2f\" fill=\"#4878a8\"/>\n",
                  x + 1.0, kTop + plot_h - h, w, h);
    svg += buf;
  }
  for (int tick = 0; tick <= 4; ++tick) {
    double x = kLeft + tick / 4.0 * plot_w;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"12\" text-anchor=\"middle\">%.2f</text>\n",
                  x, kTop + plot_h + 20, tick / 4.0);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"12\" text-anchor=\"end\">%llu</text>\n",
                kLeft - 6, kTop + 12, static_cast<unsigned long long>(peak));
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"12\" text-anchor=\"end\">0</text>\n",
                kLeft - 6, kTop + plot_h);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

void write_scatter_csv(const std::filesystem::path& path,
                       const RatioScatter& scatter) {
  std::string out = "node_id,ratio,overlap\n";
  for (const auto& p : scatter.points)
    out += p.node_id + ',' + fmt_f32(p.ratio) + ',' + fmt_f32(p.overlap) + '\n';
  write_text_file(path, out);
}

void write_histograms_csv(
    const std::filesystem::path& path,
    std::span<const std::pair<std::string, std::vector<ClusterDistributions>>>
        nodes) {
  std::string out = "node_id,cluster_index,kind";
  for (int k = 0; k < 100; ++k) out += ",bin_" + std::to_string(k);
  out += ",count\n";
  for (const auto& [node_id, dists] : nodes) {
    for (const auto& d : dists) {
      for (const char* kind : {"intra", "inter"}) {
        const SimilarityHistogram& h =
            kind[2] == 't' ? d.intra : d.inter;  // "intra" vs "inter"
        out += node_id + ',' + std::to_string(d.cluster_index) + ',' + kind;
        for (size_t k = 0; k < 100; ++k)
          out += ',' + fmt_f32(float(h.mass(k)));
        out += ',' + std::to_string(h.total) + '\n';
      }
    }
  }
  write_text_file(path, out);
}

}  // namespace embeval
