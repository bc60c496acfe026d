#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hyfi/hypergraph.hpp"
#include "hyfi/rng.hpp"
#include "support/datagen.hpp"
#include "support/oracles.hpp"

using namespace hyfi;
namespace ts = hyfi::testsupport;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("hyfi_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& file, const std::string& content) {
  std::ofstream out(file);
  out << content;
}

Hypergraph toy_graph() {
  // H = [[1,1],[1,0],[0,1]]
  return Hypergraph::from_hyperedges(3, {{0, 1}, {0, 2}});
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("load_dataset parses the canonical format") {
  auto dir = make_temp_dir("load");
  write_file(dir / "hyperedges.txt", "0 1\n0 2\n");
  write_file(dir / "features.csv", "1.0,0.5\n0.0,0.25\n1.0,1.0\n");
  write_file(dir / "labels.txt", "0\n1\n1\n");

  Dataset data = load_dataset(dir);
  CHECK(data.graph.num_nodes() == 3);
  CHECK(data.graph.num_hyperedges() == 2);
  CHECK(data.graph.node_degree() == std::vector<int>{2, 1, 1});
  CHECK(data.graph.hyperedge_degree() == std::vector<int>{2, 2});
  CHECK(data.features.feature_dim() == 2);
  CHECK(data.labels.num_classes == 2);
}

TEST_CASE("load_dataset error paths") {
  auto dir = make_temp_dir("load_err");
  write_file(dir / "features.csv", "1.0\n1.0\n1.0\n");
  write_file(dir / "labels.txt", "0\n0\n0\n");

  SUBCASE("missing hyperedges file") {
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("hyperedges.txt"),
                         std::runtime_error);
  }
  SUBCASE("node id out of range") {
    write_file(dir / "hyperedges.txt", "0 7\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("node id out of range"),
                         std::runtime_error);
  }
  SUBCASE("empty hyperedge line") {
    write_file(dir / "hyperedges.txt", "0 1\n\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("empty hyperedge"),
                         std::runtime_error);
  }
  SUBCASE("duplicate membership") {
    write_file(dir / "hyperedges.txt", "0 0 1\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("duplicate"), std::runtime_error);
  }
  SUBCASE("row-count mismatch") {
    write_file(dir / "hyperedges.txt", "0 1\n");
    write_file(dir / "labels.txt", "0\n0\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("mismatch"), std::runtime_error);
  }
}

TEST_CASE("zoo-shaped stand-in loads with the published shape") {
  auto dir = make_temp_dir("zoo");
  save_dataset(ts::make_zoo_like(7), dir);
  Dataset data = load_dataset(dir);
  CHECK(data.graph.num_nodes() == 101);
  CHECK(data.graph.num_hyperedges() == 43);
  CHECK(data.labels.num_classes == 7);
}

TEST_CASE("overlap matrix on the toy graph") {
  Hypergraph h = toy_graph();
  const OverlapMatrix& node = h.overlap(OverlapLevel::node);
  // [[2,1,1],[1,1,0],[1,0,1]]
  CHECK(node.diagonal(0) == 2);
  CHECK(node.diagonal(1) == 1);
  CHECK(node.diagonal(2) == 1);
  CHECK(node.count(0, 1) == 1);
  CHECK(node.count(0, 2) == 1);
  CHECK(node.count(1, 2) == 0);
  CHECK(node.count(1, 0) == 1);

  const OverlapMatrix& edge = h.overlap(OverlapLevel::edge);
  // [[2,1],[1,2]]
  CHECK(edge.diagonal(0) == 2);
  CHECK(edge.diagonal(1) == 2);
  CHECK(edge.count(0, 1) == 1);
}

TEST_CASE("overlap matrix of a singleton hyperedge") {
  Hypergraph h = Hypergraph::from_hyperedges(1, {{0}});
  const OverlapMatrix& node = h.overlap(OverlapLevel::node);
  CHECK(node.size() == 1);
  CHECK(node.diagonal(0) == 1);
  CHECK(node.row(0).empty());
}

TEST_CASE("shared_neighbors") {
  Hypergraph h = toy_graph();
  const OverlapMatrix& om = h.overlap(OverlapLevel::node);
  auto n0 = shared_neighbors(om, 0);
  REQUIRE(n0.size() == 2);
  CHECK(n0[0] == std::pair<int, std::int64_t>{1, 1});
  CHECK(n0[1] == std::pair<int, std::int64_t>{2, 1});
  auto n1 = shared_neighbors(om, 1);
  REQUIRE(n1.size() == 1);
  CHECK(n1[0] == std::pair<int, std::int64_t>{0, 1});

  Hypergraph iso = Hypergraph::from_hyperedges(3, {{0, 1}});
  CHECK(shared_neighbors(iso.overlap(OverlapLevel::node), 2).empty());

  CHECK_THROWS_AS(shared_neighbors(om, 99), std::out_of_range);
}

TEST_CASE("overlap matches the dense product oracle on random hypergraphs") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Hypergraph h = ts::random_hypergraph({.seed = seed});
    for (OverlapLevel level : {OverlapLevel::node, OverlapLevel::edge}) {
      const Matrix dense = ts::dense_overlap(h, level);
      const OverlapMatrix& sparse = h.overlap(level);
      REQUIRE(sparse.size() == dense.rows());
      for (Index i = 0; i < dense.rows(); ++i) {
        for (Index j = 0; j < dense.cols(); ++j) {
          CHECK(static_cast<double>(sparse.count(i, j)) == dense(i, j));
        }
      }
    }
  }
}

TEST_CASE("overlap diagonal equals the degree vectors") {
  for (std::uint64_t seed = 300; seed < 320; ++seed) {
    Hypergraph h = ts::random_hypergraph({.seed = seed});
    const auto& node = h.overlap(OverlapLevel::node);
    for (Index v = 0; v < h.num_nodes(); ++v)
      CHECK(node.diagonal(v) == h.node_degree()[static_cast<std::size_t>(v)]);
    const auto& edge = h.overlap(OverlapLevel::edge);
    for (Index e = 0; e < h.num_hyperedges(); ++e)
      CHECK(edge.diagonal(e) == h.hyperedge_degree()[static_cast<std::size_t>(e)]);
  }
}

TEST_CASE("relabeling nodes permutes the node-level overlap") {
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    Hypergraph h = ts::random_hypergraph({.max_nodes = 12, .max_edges = 10, .seed = seed});
    const Index n = h.num_nodes();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    auto engine = rng::make_engine(seed + 1);
    std::shuffle(perm.begin(), perm.end(), engine);

    std::vector<std::vector<int>> relabeled;
    for (Index e = 0; e < h.num_hyperedges(); ++e) {
      std::vector<int> members;
      for (int v : h.hyperedge_members(e)) members.push_back(perm[static_cast<std::size_t>(v)]);
      relabeled.push_back(std::move(members));
    }
    Hypergraph hp = Hypergraph::from_hyperedges(n, std::move(relabeled));

    const auto& om = h.overlap(OverlapLevel::node);
    const auto& omp = hp.overlap(OverlapLevel::node);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        CHECK(om.count(i, j) == omp.count(perm[static_cast<std::size_t>(i)],
                                          perm[static_cast<std::size_t>(j)]));
  }
}

TEST_CASE("canonical hyperedge files round-trip byte-identically") {
  auto dir = make_temp_dir("roundtrip");
  const std::string canonical = "0 1 4\n2 3\n1\n0 2 3 4\n";
  write_file(dir / "hyperedges.txt", canonical);
  write_file(dir / "features.csv", "1\n1\n1\n1\n1\n");
  write_file(dir / "labels.txt", "0\n0\n1\n1\n0\n");

  Dataset data = load_dataset(dir);
  save_hyperedges(data.graph, dir / "rewritten.txt");
  CHECK(slurp(dir / "rewritten.txt") == canonical);
}

TEST_CASE("hypergraph rejects invalid construction") {
  CHECK_THROWS(Hypergraph::from_hyperedges(2, {{0, 5}}));
  CHECK_THROWS(Hypergraph::from_hyperedges(2, {{-1}}));
  CHECK_THROWS(Hypergraph::from_hyperedges(3, {{1, 1}}));
}

TEST_CASE("adjacency lists are mutually consistent") {
  for (std::uint64_t seed = 700; seed < 720; ++seed) {
    Hypergraph h = ts::random_hypergraph({.seed = seed});
    for (Index e = 0; e < h.num_hyperedges(); ++e) {
      for (int v : h.hyperedge_members(e)) {
        const auto& mem = h.node_memberships(v);
        CHECK(std::find(mem.begin(), mem.end(), static_cast<int>(e)) != mem.end());
      }
    }
    for (Index v = 0; v < h.num_nodes(); ++v) {
      for (int e : h.node_memberships(v)) {
        const auto& members = h.hyperedge_members(e);
        CHECK(std::find(members.begin(), members.end(), static_cast<int>(v)) != members.end());
      }
    }
  }
}
