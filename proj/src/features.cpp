#include "embeval/features.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "embeval/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature file IO assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace embeval {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'L', 'B'};
constexpr uint32_t kVersion = 1;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw InputError("failed reading file: " + path.string());
  return bytes;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

void check_finite(const FeatureMatrix& m, const std::string& origin) {
  for (uint64_t i = 0; i < m.n; ++i) {
    for (uint32_t j = 0; j < m.d; ++j) {
      if (!std::isfinite(m.data[i * m.d + j]))
        throw InputError(origin + ": non-finite value at row " +
                         std::to_string(i));
    }
  }
}

FeatureMatrix parse_features_binary(std::string_view bytes,
                                    const std::string& origin) {
  constexpr size_t kHeader = 4 + 4 + 8 + 4 + 4;
  if (bytes.size() < kHeader)
    throw InputError(origin + ": truncated header");
  uint32_t version = read_le<uint32_t>(bytes.data() + 4);
  if (version != kVersion)
    throw InputError(origin + ": unsupported version " +
                     std::to_string(version));
  uint64_t n = read_le<uint64_t>(bytes.data() + 8);
  uint32_t d = read_le<uint32_t>(bytes.data() + 16);
  uint32_t reserved = read_le<uint32_t>(bytes.data() + 20);
  if (reserved != 0) throw InputError(origin + ": nonzero reserved field");
  if (n == 0 || d == 0)
    throw InputError(origin + ": empty matrix (n=" + std::to_string(n) +
                     ", d=" + std::to_string(d) + ")");
  uint64_t values = n * uint64_t(d);
  if (d != 0 && values / d != n)
    throw InputError(origin + ": dimension overflow");
  uint64_t payload = values * 4;
  if (bytes.size() - kHeader < payload)
    throw InputError(origin + ": truncated payload (expected " +
                     std::to_string(payload) + " bytes, got " +
                     std::to_string(bytes.size() - kHeader) + ")");
  if (bytes.size() - kHeader > payload)
    throw InputError(origin + ": trailing bytes after payload");
  FeatureMatrix m;
  m.n = n;
  m.d = d;
  m.data.resize(values);
  std::memcpy(m.data.data(), bytes.data() + kHeader, payload);
  check_finite(m, origin);
  return m;
}

}  // namespace

NormKind parse_norm_kind(std::string_view name) {
  if (name == "none") return NormKind::none;
  if (name == "target") return NormKind::target;
  if (name == "source") return NormKind::source;
  throw InputError("unknown normalization '" + std::string(name) +
                   "' (expected none|target|source)");
}

std::string_view norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::none: return "none";
    case NormKind::target: return "target";
    case NormKind::source: return "source";
  }
  return "none";
}

FeatureMatrix parse_features_csv(std::string_view text) {
  FeatureMatrix m;
  size_t pos = 0;
  uint64_t line_no = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos
                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line.empty()) continue;
    uint32_t width = 0;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      std::string_view field = line.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      float v = 0;
      auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size())
        throw InputError("CSV line " + std::to_string(line_no) +
                         ": bad number '" + std::string(field) + "'");
      m.data.push_back(v);
      ++width;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (m.n == 0) {
      m.d = width;
    } else if (width != m.d) {
      throw InputError("CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(m.d) + " values, got " +
                       std::to_string(width));
    }
    ++m.n;
  }
  if (m.n == 0) throw InputError("CSV feature input is empty");
  check_finite(m, "CSV input");
  return m;
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0)
    return parse_features_binary(bytes, path.string());
  return parse_features_csv(bytes);
}

void save_features(const FeatureMatrix& m, const std::filesystem::path& path) {
  if (m.n == 0 || m.d == 0) throw InvariantError("cannot save empty matrix");
  if (m.data.size() != m.n * uint64_t(m.d))
    throw InvariantError("matrix payload size does not match header");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open file for writing: " + path.string());
  out.write(kMagic, 4);
  uint32_t version = kVersion;
  uint32_t reserved = 0;
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&m.n), 8);
  out.write(reinterpret_cast<const char*>(&m.d), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  out.write(reinterpret_cast<const char*>(m.data.data()),
            std::streamsize(m.data.size() * 4));
  if (!out) throw InputError("failed writing file: " + path.string());
}

LabelVector load_labels(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  LabelVector out;
  size_t pos = 0;
  uint64_t line_no = 0;
  while (pos < bytes.size()) {
    size_t eol = bytes.find('\n', pos);
    std::string_view line{bytes.data() + pos,
                          (eol == std::string::npos ? bytes.size() : eol) -
                              pos};
    pos = eol == std::string::npos ? bytes.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line.empty()) {
      if (pos >= bytes.size()) break;  // trailing newline
      throw InputError(path.string() + ": empty label at line " +
                       std::to_string(line_no));
    }
    out.labels.emplace_back(line);
  }
  if (out.labels.empty())
    throw InputError(path.string() + ": labels file is empty");
  return out;
}

void save_labels(const LabelVector& labels,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open file for writing: " + path.string());
  for (const auto& l : labels.labels) out << l << '\n';
  if (!out) throw InputError("failed writing file: " + path.string());
}

NormStats compute_stats(const FeatureMatrix& m) {
  if (m.n == 0 || m.d == 0)
    throw InvariantError("compute_stats: empty matrix");
  NormStats st;
  st.mean.assign(m.d, 0.0);
  st.stddev.assign(m.d, 0.0);
  for (uint64_t i = 0; i < m.n; ++i) {
    const float* row = m.data.data() + i * m.d;
    for (uint32_t j = 0; j < m.d; ++j) st.mean[j] += double(row[j]);
  }
  for (uint32_t j = 0; j < m.d; ++j) st.mean[j] /= double(m.n);
  for (uint64_t i = 0; i < m.n; ++i) {
    const float* row = m.data.data() + i * m.d;
    for (uint32_t j = 0; j < m.d; ++j) {
      double dev = double(row[j]) - st.mean[j];
      st.stddev[j] += dev * dev;
    }
  }
  for (uint32_t j = 0; j < m.d; ++j)
    st.stddev[j] = std::sqrt(st.stddev[j] / double(m.n));
  return st;
}

FeatureMatrix normalize(const FeatureMatrix& m, const NormStrategy& strategy) {
  if (strategy.kind == NormKind::none) return m;
  const NormStats stats = strategy.kind == NormKind::target
                              ? compute_stats(m)
                              : strategy.stats;
  if (stats.mean.size() != m.d || stats.stddev.size() != m.d)
    throw InputError("normalization stats dimension " +
                     std::to_string(stats.mean.size()) +
                     " does not match feature dimension " +
                     std::to_string(m.d));
  FeatureMatrix out;
  out.n = m.n;
  out.d = m.d;
  out.data.resize(m.data.size());
  std::vector<double> denom(m.d);
  for (uint32_t j = 0; j < m.d; ++j)
    denom[j] = std::max(stats.stddev[j], kStdEpsilon);
  for (uint64_t i = 0; i < m.n; ++i) {
    const float* src = m.data.data() + i * m.d;
    float* dst = out.data.data() + i * m.d;
    for (uint32_t j = 0; j < m.d; ++j)
      dst[j] = float((double(src[j]) - stats.mean[j]) / denom[j]);
  }
  return out;
}

NormStats load_stats(const std::filesystem::path& path) {
  FeatureMatrix m = load_features(path);
  if (m.n != 2)
    throw InputError(path.string() + ": stats file must be a 2 x d matrix");
  NormStats st;
  st.mean.resize(m.d);
  st.stddev.resize(m.d);
  for (uint32_t j = 0; j < m.d; ++j) {
    st.mean[j] = double(m.data[j]);
    st.stddev[j] = double(m.data[m.d + j]);
    if (st.stddev[j] < 0)
      throw InputError(path.string() + ": negative stddev at dimension " +
                       std::to_string(j));
  }
  return st;
}

void save_stats(const NormStats& stats, const std::filesystem::path& path) {
  if (stats.mean.size() != stats.stddev.size())
    throw InvariantError("stats mean/stddev length mismatch");
  FeatureMatrix m;
  m.n = 2;
  m.d = uint32_t(stats.mean.size());
  m.data.resize(2 * size_t(m.d));
  for (uint32_t j = 0; j < m.d; ++j) {
    m.data[j] = float(stats.mean[j]);
    m.data[m.d + j] = float(stats.stddev[j]);
  }
  save_features(m, path);
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw InvariantError("dot: dimension mismatch");
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t d = a.size();
  size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (size_t l = 0; l < 8; ++l)
      acc[l] += double(a[i + l]) * double(b[i + l]);
  }
  for (; i < d; ++i) acc[i & 7] += double(a[i]) * double(b[i]);
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) +
         ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double na = std::sqrt(dot(a, a));
  double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0)
    throw InvariantError("cosine: zero-norm vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<double> row_norms(const FeatureMatrix& m) {
  std::vector<double> norms(m.n);
  for (uint64_t i = 0; i < m.n; ++i) norms[i] = std::sqrt(dot(m.row(i), m.row(i)));
  return norms;
}

}  // namespace embeval
