#include "hyfi/hypergraph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyfi {

namespace {

[[noreturn]] void dataset_error(const std::string& msg) {
  throw std::runtime_error("dataset error: " + msg);
}

std::ifstream open_or_fail(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) dataset_error("missing file: " + file.string());
  return in;
}

}  // namespace

std::int64_t OverlapMatrix::count(Index i, Index j) const {
  if (i == j) return diagonal(i);
  auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), static_cast<std::int32_t>(j),
                             [](const Entry& e, std::int32_t col) { return e.col < col; });
  if (it != r.end() && it->col == j) return it->count;
  return 0;
}

OverlapMatrix OverlapMatrix::build(const std::vector<std::vector<int>>& groups_of,
                                   const std::vector<std::vector<int>>& members_of,
                                   Index size) {
  OverlapMatrix om;
  om.diagonal_.resize(static_cast<std::size_t>(size));
  om.offsets_.assign(static_cast<std::size_t>(size) + 1, 0);

  std::vector<int> scratch;
  for (Index i = 0; i < size; ++i) {
    const auto& groups = groups_of[static_cast<std::size_t>(i)];
    om.diagonal_[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(groups.size());

    scratch.clear();
    for (int g : groups) {
      for (int j : members_of[static_cast<std::size_t>(g)]) {
        if (j != i) scratch.push_back(j);
      }
    }
    std::sort(scratch.begin(), scratch.end());

    std::size_t k = 0;
    while (k < scratch.size()) {
      std::size_t run = k;
      while (run < scratch.size() && scratch[run] == scratch[k]) ++run;
      om.entries_.push_back({static_cast<std::int32_t>(scratch[k]),
                             static_cast<std::int32_t>(run - k)});
      k = run;
    }
    om.offsets_[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(om.entries_.size());
  }
  return om;
}

Hypergraph Hypergraph::from_hyperedges(Index num_nodes, std::vector<std::vector<int>> hyperedges) {
  if (num_nodes < 0) dataset_error("negative node count");
  Hypergraph h;
  h.num_nodes_ = num_nodes;
  h.edge_members_ = std::move(hyperedges);
  h.node_edges_.assign(static_cast<std::size_t>(num_nodes), {});
  h.node_degree_.assign(static_cast<std::size_t>(num_nodes), 0);
  h.edge_degree_.resize(h.edge_members_.size());

  for (std::size_t e = 0; e < h.edge_members_.size(); ++e) {
    auto& members = h.edge_members_[e];
    std::sort(members.begin(), members.end());
    for (std::size_t k = 0; k < members.size(); ++k) {
      int v = members[k];
      if (v < 0 || v >= num_nodes)
        dataset_error("node id out of range: " + std::to_string(v) + " in hyperedge " + std::to_string(e));
      if (k > 0 && members[k - 1] == v)
        dataset_error("duplicate node id " + std::to_string(v) + " in hyperedge " + std::to_string(e));
      h.node_edges_[static_cast<std::size_t>(v)].push_back(static_cast<int>(e));
      h.node_degree_[static_cast<std::size_t>(v)] += 1;
    }
    h.edge_degree_[e] = static_cast<int>(members.size());
    h.num_incidences_ += static_cast<std::int64_t>(members.size());
  }
  return h;
}

const OverlapMatrix& Hypergraph::overlap(OverlapLevel level) const {
  if (level == OverlapLevel::node) {
    std::call_once(cache_->node_once, [this] {
      cache_->node_level = std::make_unique<OverlapMatrix>(
          OverlapMatrix::build(node_edges_, edge_members_, num_nodes()));
    });
    return *cache_->node_level;
  }
  std::call_once(cache_->edge_once, [this] {
    cache_->edge_level = std::make_unique<OverlapMatrix>(
        OverlapMatrix::build(edge_members_, node_edges_, num_hyperedges()));
  });
  return *cache_->edge_level;
}

OverlapMatrix overlap_matrix(const Hypergraph& h, OverlapLevel level) {
  return OverlapMatrix(h.overlap(level));
}

std::vector<std::pair<int, std::int64_t>> shared_neighbors(const OverlapMatrix& om, Index i) {
  if (i < 0 || i >= om.size())
    throw std::out_of_range("shared_neighbors: id " + std::to_string(i) + " out of range");
  std::vector<std::pair<int, std::int64_t>> out;
  for (const auto& e : om.row(i)) out.emplace_back(e.col, e.count);
  return out;
}

namespace {

std::vector<std::vector<int>> read_hyperedges(const std::filesystem::path& file) {
  std::ifstream in = open_or_fail(file);
  std::vector<std::vector<int>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<int> members;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      int v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' '))
        dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": malformed node id");
      members.push_back(v);
      p = next;
    }
    if (members.empty())
      dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": empty hyperedge line");
    edges.push_back(std::move(members));
  }
  return edges;
}

Matrix read_features(const std::filesystem::path& file) {
  std::ifstream in = open_or_fail(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
      dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": empty feature row");
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        if (!std::isfinite(v))
          dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": non-finite feature value");
        row.push_back(v);
      } catch (const std::logic_error&) {
        dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": malformed feature value '" + cell + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

LabelVector read_labels(const std::filesystem::path& file) {
  std::ifstream in = open_or_fail(file);
  LabelVector out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int v = 0;
    auto [next, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || next != line.data() + line.size() || v < 0)
      dataset_error(file.filename().string() + ":" + std::to_string(line_no) + ": malformed label");
    out.labels.push_back(v);
    out.num_classes = std::max(out.num_classes, v + 1);
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  auto edges = read_hyperedges(dir / "hyperedges.txt");
  Matrix features = read_features(dir / "features.csv");
  LabelVector labels = read_labels(dir / "labels.txt");

  Index num_nodes = features.rows();
  if (static_cast<Index>(labels.labels.size()) != num_nodes)
    dataset_error("row-count mismatch: " + std::to_string(features.rows()) + " feature rows vs " +
                  std::to_string(labels.labels.size()) + " labels");

  Dataset data;
  data.graph = Hypergraph::from_hyperedges(num_nodes, std::move(edges));
  data.features = FeatureMatrix{std::move(features)};
  data.labels = std::move(labels);
  return data;
}

void save_hyperedges(const Hypergraph& h, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) dataset_error("cannot write " + file.string());
  for (Index e = 0; e < h.num_hyperedges(); ++e) {
    const auto& members = h.hyperedge_members(e);
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k > 0) out << ' ';
      out << members[k];
    }
    out << '\n';
  }
}

void save_features(const FeatureMatrix& x, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) dataset_error("cannot write " + file.string());
  out.precision(17);
  for (Index i = 0; i < x.values.rows(); ++i) {
    for (Index j = 0; j < x.values.cols(); ++j) {
      if (j > 0) out << ',';
      out << x.values(i, j);
    }
    out << '\n';
  }
}

void save_labels(const LabelVector& y, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) dataset_error("cannot write " + file.string());
  for (int v : y.labels) out << v << '\n';
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_hyperedges(data.graph, dir / "hyperedges.txt");
  save_features(data.features, dir / "features.csv");
  save_labels(data.labels, dir / "labels.txt");
}

std::uint64_t dataset_fingerprint(const std::filesystem::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char* name : {"hyperedges.txt", "features.csv", "labels.txt"}) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) dataset_error("missing file: " + (dir / name).string());
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
      for (std::streamsize i = 0; i < in.gcount(); ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 0x100000001b3ull;
      }
    }
  }
  return h;
}

}  // namespace hyfi
