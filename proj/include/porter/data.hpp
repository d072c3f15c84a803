#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "porter/rng.hpp"

namespace porter {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// In-memory dataset: one dense feature row per sample plus an integer label.
struct Dataset {
  Eigen::MatrixXd features;  // m_total x d
  std::vector<int> labels;
  std::string name;

  std::int64_t size() const { return features.rows(); }
  int dim() const { return static_cast<int>(features.cols()); }
};

namespace detail {

struct LibsvmEntry {
  int label = 0;
  std::vector<std::pair<int, double>> coords;  // 1-based indices
};

inline LibsvmEntry parse_libsvm_line(const std::string& line, std::size_t lineno) {
  std::istringstream in(line);
  LibsvmEntry entry;
  std::string token;
  if (!(in >> token))
    throw ParseError("libsvm: empty record at line " + std::to_string(lineno));
  try {
    std::size_t used = 0;
    const double raw = std::stod(token, &used);
    if (used != token.size() || raw != static_cast<double>(static_cast<int>(raw)))
      throw std::invalid_argument(token);
    entry.label = static_cast<int>(raw);
  } catch (const std::exception&) {
    throw ParseError("libsvm: bad label '" + token + "' at line " +
                     std::to_string(lineno));
  }
  while (in >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos)
      throw ParseError("libsvm: expected 'index:value', got '" + token +
                       "' at line " + std::to_string(lineno));
    int index = 0;
    double value = 0.0;
    try {
      std::size_t used = 0;
      index = std::stoi(token.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(token);
      const std::string vs = token.substr(colon + 1);
      value = std::stod(vs, &used);
      if (used != vs.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ParseError("libsvm: bad pair '" + token + "' at line " +
                       std::to_string(lineno));
    }
    if (index < 1)
      throw ParseError("libsvm: indices are 1-based, got " +
                       std::to_string(index) + " at line " + std::to_string(lineno));
    entry.coords.emplace_back(index, value);
  }
  return entry;
}

}  // namespace detail

/// LIBSVM sparse text format, 1-based indices, dimension taken from the
/// largest index seen. Binary {-1,+1} labels are remapped to {0,1}.
inline Dataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("libsvm: cannot open " + path);
  std::vector<detail::LibsvmEntry> entries;
  int d = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto entry = detail::parse_libsvm_line(line, lineno);
    for (const auto& [index, value] : entry.coords) d = std::max(d, index);
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw ParseError("libsvm: no records in " + path);

  bool signed_binary = true;
  for (const auto& e : entries)
    if (e.label != -1 && e.label != 1) signed_binary = false;

  Dataset ds;
  ds.name = path;
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(entries.size()), d);
  ds.labels.reserve(entries.size());
  for (std::size_t r = 0; r < entries.size(); ++r) {
    for (const auto& [index, value] : entries[r].coords)
      ds.features(static_cast<Eigen::Index>(r), index - 1) = value;
    const int l = entries[r].label;
    ds.labels.push_back(signed_binary ? (l == 1 ? 1 : 0) : l);
  }
  return ds;
}

/// Writes features at full precision so parse(write(ds)) round-trips exactly.
/// Binary {0,1} labels are written back as -1/+1.
inline void write_libsvm(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("libsvm: cannot write " + path);
  bool binary01 = true;
  for (int l : ds.labels)
    if (l != 0 && l != 1) binary01 = false;
  char buf[64];
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    const int l = ds.labels[static_cast<std::size_t>(r)];
    out << (binary01 ? (l == 1 ? 1 : -1) : l);
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      const double v = ds.features(r, c);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << " " << (c + 1) << ":" << buf;
    }
    out << "\n";
  }
}

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw ParseError(std::string("idx: truncated while reading ") + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// IDX image/label pair (the MNIST container format). Big-endian magics
/// 0x803/0x801, unsigned byte pixels scaled to [0, 1] by /255, rows*cols
/// flattened row-major.
inline Dataset parse_idx(const std::string& images_path,
                         const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw ParseError("idx: cannot open " + images_path);
  if (detail::read_be32(img, "image magic") != kIdxImagesMagic)
    throw ParseError("idx: bad image magic in " + images_path);
  const std::uint32_t count = detail::read_be32(img, "image count");
  const std::uint32_t rows = detail::read_be32(img, "rows");
  const std::uint32_t cols = detail::read_be32(img, "cols");
  const std::size_t d = std::size_t(rows) * std::size_t(cols);
  if (d == 0) throw ParseError("idx: zero image size in " + images_path);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw ParseError("idx: cannot open " + labels_path);
  if (detail::read_be32(lab, "label magic") != kIdxLabelsMagic)
    throw ParseError("idx: bad label magic in " + labels_path);
  if (detail::read_be32(lab, "label count") != count)
    throw ParseError("idx: image/label count mismatch");

  Dataset ds;
  ds.name = images_path;
  ds.features.resize(count, static_cast<Eigen::Index>(d));
  ds.labels.resize(count);
  std::vector<unsigned char> pixel_row(d);
  for (std::uint32_t r = 0; r < count; ++r) {
    if (!img.read(reinterpret_cast<char*>(pixel_row.data()),
                  static_cast<std::streamsize>(d)))
      throw ParseError("idx: truncated image data in " + images_path);
    for (std::size_t c = 0; c < d; ++c)
      ds.features(r, static_cast<Eigen::Index>(c)) = pixel_row[c] / 255.0;
    char lbl = 0;
    if (!lab.read(&lbl, 1))
      throw ParseError("idx: truncated label data in " + labels_path);
    ds.labels[r] = static_cast<unsigned char>(lbl);
  }
  return ds;
}

/// Inverse of parse_idx for byte-valued data (features in {0/255,...,255/255}).
inline void write_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols,
                      const std::string& images_path,
                      const std::string& labels_path) {
  if (static_cast<Eigen::Index>(rows) * static_cast<Eigen::Index>(cols) !=
      ds.features.cols())
    throw std::invalid_argument("write_idx: rows*cols must equal feature dim");
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("idx: cannot write " + images_path);
  detail::write_be32(img, kIdxImagesMagic);
  detail::write_be32(img, static_cast<std::uint32_t>(ds.features.rows()));
  detail::write_be32(img, rows);
  detail::write_be32(img, cols);
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r)
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      const auto byte = static_cast<unsigned char>(
          std::lround(ds.features(r, c) * 255.0));
      img.write(reinterpret_cast<const char*>(&byte), 1);
    }
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("idx: cannot write " + labels_path);
  detail::write_be32(lab, kIdxLabelsMagic);
  detail::write_be32(lab, static_cast<std::uint32_t>(ds.labels.size()));
  for (int l : ds.labels) {
    const auto byte = static_cast<unsigned char>(l);
    lab.write(reinterpret_cast<const char*>(&byte), 1);
  }
}

/// Shuffle rows with a seeded permutation and split into n contiguous blocks
/// of floor(m_total/n); remainder rows are dropped so every agent holds the
/// same sample count.
inline std::vector<Dataset> partition(const Dataset& ds, int n,
                                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("partition: need n >= 1");
  const std::int64_t m_total = ds.size();
  if (m_total < n)
    throw std::invalid_argument("partition: fewer samples than agents");
  auto stream = rng::make_stream(seed, rng::Purpose::Partition);
  const auto perm = stream.permutation(static_cast<std::size_t>(m_total));
  const std::int64_t per_agent = m_total / n;
  std::vector<Dataset> out(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Dataset& part = out[static_cast<std::size_t>(a)];
    part.name = ds.name + "/agent" + std::to_string(a);
    part.features.resize(per_agent, ds.features.cols());
    part.labels.resize(static_cast<std::size_t>(per_agent));
    for (std::int64_t r = 0; r < per_agent; ++r) {
      const auto src = perm[static_cast<std::size_t>(a * per_agent + r)];
      part.features.row(r) = ds.features.row(static_cast<Eigen::Index>(src));
      part.labels[static_cast<std::size_t>(r)] = ds.labels[src];
    }
  }
  return out;
}

}  // namespace porter
