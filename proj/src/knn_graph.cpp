#include "placefm/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "placefm/geo.hpp"
#include "placefm/parallel.hpp"

namespace placefm {

bool CsrMatrix::has_entry(std::size_t i, std::uint32_t j) const {
  const auto begin = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto end = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  return std::binary_search(begin, end, j);
}

KnnGraph build_knn_graph(const std::vector<PoiRecord>& records, std::size_t k,
                         int threads) {
  const std::size_t n = records.size();
  if (n < 2) {
    throw std::invalid_argument("build_knn_graph: need at least 2 records");
  }
  if (k < 1) {
    throw std::invalid_argument("build_knn_graph: k must be >= 1");
  }

  std::vector<GeoPoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    points[i] = records[i].location;
  }
  const SpatialIndex index{points};

  std::vector<std::vector<std::uint32_t>> forward(n);
  parallel_for(0, n, threads, [&](std::size_t i) {
    const auto neighbors = index.k_nearest(points[i], k, i);
    forward[i].reserve(neighbors.size());
    for (const IndexMatch& m : neighbors) {
      forward[i].push_back(static_cast<std::uint32_t>(m.id));
    }
  });

  // Symmetric union of the directed k-NN lists.
  std::vector<std::vector<std::uint32_t>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::uint32_t j : forward[i]) {
      rows[i].push_back(j);
      rows[j].push_back(static_cast<std::uint32_t>(i));
    }
  }
  parallel_for(0, n, threads, [&rows](std::size_t i) {
    std::sort(rows[i].begin(), rows[i].end());
    rows[i].erase(std::unique(rows[i].begin(), rows[i].end()), rows[i].end());
  });

  KnnGraph graph;
  graph.n = n;
  graph.k = k;
  graph.adjacency.n = n;
  graph.adjacency.row_ptr.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    graph.adjacency.row_ptr[i + 1] = graph.adjacency.row_ptr[i] + rows[i].size();
  }
  graph.adjacency.cols.reserve(graph.adjacency.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i) {
    graph.adjacency.cols.insert(graph.adjacency.cols.end(), rows[i].begin(),
                                rows[i].end());
  }
  graph.adjacency.vals.assign(graph.adjacency.cols.size(), 1.0);
  return graph;
}

NormalizedAdjacency normalize(const KnnGraph& graph) {
  const std::size_t n = graph.n;
  std::vector<double> deg_tilde(n);
  for (std::size_t i = 0; i < n; ++i) {
    deg_tilde[i] = static_cast<double>(graph.degree(i) + 1);
  }
  const auto entry = [&deg_tilde](std::size_t i, std::size_t j) {
    return 1.0 / std::sqrt(deg_tilde[i] * deg_tilde[j]);
  };

  NormalizedAdjacency result;
  result.n = n;
  result.matrix.n = n;
  result.matrix.row_ptr.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    result.matrix.row_ptr[i + 1] = result.matrix.row_ptr[i] + graph.degree(i) + 1;
  }
  result.matrix.cols.reserve(result.matrix.row_ptr[n]);
  result.matrix.vals.reserve(result.matrix.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t self = static_cast<std::uint32_t>(i);
    bool self_emitted = false;
    const std::size_t begin = graph.adjacency.row_ptr[i];
    const std::size_t end = graph.adjacency.row_ptr[i + 1];
    for (std::size_t e = begin; e < end; ++e) {
      const std::uint32_t j = graph.adjacency.cols[e];
      if (!self_emitted && j > self) {
        result.matrix.cols.push_back(self);
        result.matrix.vals.push_back(entry(i, i));
        self_emitted = true;
      }
      result.matrix.cols.push_back(j);
      result.matrix.vals.push_back(entry(i, j));
    }
    if (!self_emitted) {
      result.matrix.cols.push_back(self);
      result.matrix.vals.push_back(entry(i, i));
    }
  }
  return result;
}

FeatureMatrix spmm(const CsrMatrix& m, const FeatureMatrix& x, int threads) {
  if (m.n != x.n) {
    throw std::invalid_argument("spmm: dimension mismatch (" +
                                std::to_string(m.n) + " vs " +
                                std::to_string(x.n) + " rows)");
  }
  FeatureMatrix out = FeatureMatrix::zeros(x.n, x.d);
  const std::size_t d = x.d;
  parallel_for(0, m.n, threads, [&](std::size_t i) {
    double* out_row = out.values.data() + i * d;
    for (std::size_t e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e) {
      const double v = m.vals[e];
      const double* x_row = x.values.data() + static_cast<std::size_t>(m.cols[e]) * d;
      for (std::size_t c = 0; c < d; ++c) {
        out_row[c] += v * x_row[c];
      }
    }
  });
  return out;
}

void write_edge_list(const KnnGraph& graph, const std::vector<PoiRecord>& records,
                     const std::string& path) {
  if (records.size() != graph.n) {
    throw std::invalid_argument("write_edge_list: record count does not match graph");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (std::size_t i = 0; i < graph.n; ++i) {
    for (std::size_t e = graph.adjacency.row_ptr[i]; e < graph.adjacency.row_ptr[i + 1];
         ++e) {
      const std::uint32_t j = graph.adjacency.cols[e];
      if (j > i) {
        out << records[i].id << '\t' << records[j].id << "\n";
      }
    }
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

}  // namespace placefm
