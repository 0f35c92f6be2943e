#include "placefm/knn_graph.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "test_support.hpp"

using namespace placefm;
namespace ts = test_support;

namespace {

PoiRecord poi_at(const std::string& id, double lon, double lat) {
  PoiRecord r;
  r.id = id;
  r.name = id;
  r.location = {lon, lat};
  r.category_path = {"Cafe"};
  return r;
}

std::vector<PoiRecord> random_records(std::size_t n, std::mt19937_64& rng) {
  std::vector<PoiRecord> records;
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "p%04zu", i);
    records.push_back(
        poi_at(buf, ts::uniform(rng, -1, 1), ts::uniform(rng, 44, 46)));
  }
  return records;
}

std::set<std::pair<std::string, std::string>> edge_id_set(
    const KnnGraph& graph, const std::vector<PoiRecord>& records) {
  std::set<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < graph.n; ++i) {
    for (std::size_t e = graph.adjacency.row_ptr[i];
         e < graph.adjacency.row_ptr[i + 1]; ++e) {
      const std::size_t j = graph.adjacency.cols[e];
      if (j > i) {
        edges.emplace(std::min(records[i].id, records[j].id),
                      std::max(records[i].id, records[j].id));
      }
    }
  }
  return edges;
}

// 12 equally spaced points around the equator: each node's two nearest
// neighbors are its ring neighbors, giving a 2-regular graph.
std::vector<PoiRecord> ring_records() {
  std::vector<PoiRecord> records;
  for (int i = 0; i < 12; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "r%02d", i);
    records.push_back(poi_at(buf, -180.0 + 30.0 * i, 0.0));
  }
  return records;
}

}  // namespace

TEST_CASE("three collinear points with k=1") {
  const std::vector<PoiRecord> records{poi_at("A", 0, 0), poi_at("B", 0.001, 0),
                                       poi_at("C", 0.002, 0)};
  const auto graph = build_knn_graph(records, 1);
  // kNN(A)={B}, kNN(B)={A}, kNN(C)={B}: union gives {A,B} and {B,C}.
  CHECK(edge_id_set(graph, records) ==
        std::set<std::pair<std::string, std::string>>{{"A", "B"}, {"B", "C"}});
  CHECK(graph.degree(0) == 1);
  CHECK(graph.degree(1) == 2);
  CHECK(graph.degree(2) == 1);
  CHECK(graph.edge_count() == 2);
}

TEST_CASE("two nodes form a single edge for any k") {
  const std::vector<PoiRecord> records{poi_at("A", 0, 0), poi_at("B", 1, 1)};
  for (const std::size_t k : {std::size_t{1}, std::size_t{4}}) {
    const auto graph = build_knn_graph(records, k);
    CHECK(graph.edge_count() == 1);
    CHECK(graph.degree(0) == 1);
    CHECK(graph.degree(1) == 1);
  }
}

TEST_CASE("k >= n-1 yields the complete graph") {
  std::mt19937_64 rng(88);
  const auto records = random_records(7, rng);
  const auto graph = build_knn_graph(records, 6);
  CHECK(graph.edge_count() == 7 * 6 / 2);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(graph.degree(i) == 6);
  }
}

TEST_CASE("build_knn_graph argument validation") {
  const std::vector<PoiRecord> one{poi_at("A", 0, 0)};
  CHECK_THROWS_AS(static_cast<void>(build_knn_graph(one, 1)), std::invalid_argument);
  const std::vector<PoiRecord> two{poi_at("A", 0, 0), poi_at("B", 1, 0)};
  CHECK_THROWS_AS(static_cast<void>(build_knn_graph(two, 0)), std::invalid_argument);
}

TEST_CASE("duplicate coordinates are tolerated") {
  const std::vector<PoiRecord> records{poi_at("A", 0, 0), poi_at("B", 0, 0),
                                       poi_at("C", 0.001, 0)};
  const auto graph = build_knn_graph(records, 1);
  // A and B are mutually nearest (tie on C against either resolves by id).
  CHECK(graph.adjacency.has_entry(0, 1));
  CHECK(graph.degree(2) >= 1);
}

TEST_CASE("adjacency is symmetric with zero diagonal and degree bounds") {
  std::mt19937_64 rng(99);
  for (const std::size_t n : {std::size_t{10}, std::size_t{60}}) {
    for (const std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
      const auto records = random_records(n, rng);
      const auto graph = build_knn_graph(records, k);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(!graph.adjacency.has_entry(i, static_cast<std::uint32_t>(i)));
        CHECK(graph.degree(i) >= std::min(k, n - 1));
        CHECK(graph.degree(i) <= n - 1);
        for (std::size_t e = graph.adjacency.row_ptr[i];
             e < graph.adjacency.row_ptr[i + 1]; ++e) {
          CHECK(graph.adjacency.has_entry(graph.adjacency.cols[e],
                                          static_cast<std::uint32_t>(i)));
        }
      }
    }
  }
}

TEST_CASE("relabeling records permutes the adjacency") {
  std::mt19937_64 rng(111);
  auto records = random_records(40, rng);
  const auto graph = build_knn_graph(records, 3);
  const auto edges = edge_id_set(graph, records);

  auto shuffled = records;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto permuted = build_knn_graph(shuffled, 3);
  CHECK(edge_id_set(permuted, shuffled) == edges);
}

TEST_CASE("two-node normalization is exactly one half everywhere") {
  const std::vector<PoiRecord> records{poi_at("A", 0, 0), poi_at("B", 1, 0)};
  const auto a_hat = normalize(build_knn_graph(records, 1));
  REQUIRE(a_hat.matrix.nnz() == 4);
  for (const double v : a_hat.matrix.vals) {
    CHECK(v == 0.5);
  }
}

TEST_CASE("normalized rows of a regular graph sum to one") {
  const auto records = ring_records();
  const auto graph = build_knn_graph(records, 2);
  for (std::size_t i = 0; i < graph.n; ++i) {
    CHECK(graph.degree(i) == 2);
  }
  const auto a_hat = normalize(graph);
  for (std::size_t i = 0; i < a_hat.n; ++i) {
    double sum = 0.0;
    for (std::size_t e = a_hat.matrix.row_ptr[i]; e < a_hat.matrix.row_ptr[i + 1]; ++e) {
      sum += a_hat.matrix.vals[e];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalized operator is symmetric with entries in [0,1]") {
  std::mt19937_64 rng(123);
  const auto records = random_records(50, rng);
  const auto a_hat = normalize(build_knn_graph(records, 4));
  for (std::size_t i = 0; i < a_hat.n; ++i) {
    for (std::size_t e = a_hat.matrix.row_ptr[i]; e < a_hat.matrix.row_ptr[i + 1]; ++e) {
      const std::size_t j = a_hat.matrix.cols[e];
      CHECK(a_hat.matrix.vals[e] >= 0.0);
      CHECK(a_hat.matrix.vals[e] <= 1.0);
      // Symmetric value at (j, i).
      bool found = false;
      for (std::size_t f = a_hat.matrix.row_ptr[j]; f < a_hat.matrix.row_ptr[j + 1];
           ++f) {
        if (a_hat.matrix.cols[f] == i) {
          CHECK(a_hat.matrix.vals[f] == a_hat.matrix.vals[e]);
          found = true;
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("spectral norm of the normalized operator is at most one") {
  std::mt19937_64 rng(321);
  for (const std::size_t n : {std::size_t{30}, std::size_t{200}}) {
    const auto records = random_records(n, rng);
    const auto a_hat = normalize(build_knn_graph(records, 5));

    // Power iteration; the Rayleigh quotient of a symmetric operator never
    // exceeds the top eigenvalue.
    FeatureMatrix v = FeatureMatrix::zeros(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      v.at(i, 0) = ts::uniform(rng, -1, 1);
    }
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      FeatureMatrix w = spmm(a_hat.matrix, v, 1);
      double vv = 0.0, vw = 0.0, ww = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        vv += v.at(i, 0) * v.at(i, 0);
        vw += v.at(i, 0) * w.at(i, 0);
        ww += w.at(i, 0) * w.at(i, 0);
      }
      lambda = std::fabs(vw) / vv;
      const double norm = std::sqrt(ww);
      REQUIRE(norm > 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        v.at(i, 0) = w.at(i, 0) / norm;
      }
    }
    CHECK(lambda <= 1.0 + 1e-9);
  }
}

TEST_CASE("edge list dump is sorted with src < dst") {
  const std::vector<PoiRecord> records{poi_at("A", 0, 0), poi_at("B", 0.001, 0),
                                       poi_at("C", 0.002, 0)};
  const auto graph = build_knn_graph(records, 1);
  ts::TempDir dir("edges");
  write_edge_list(graph, records, dir.file("edges.tsv"));
  CHECK(ts::read_file(dir.file("edges.tsv")) == "A\tB\nB\tC\n");
}
