#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "placefm/poi.hpp"

namespace placefm {

// Square sparse matrix in compressed row form, columns sorted within rows.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // n + 1 entries
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;

  std::size_t nnz() const { return cols.size(); }
  std::size_t row_size(std::size_t i) const { return row_ptr[i + 1] - row_ptr[i]; }
  bool has_entry(std::size_t i, std::uint32_t j) const;
};

// Symmetric unweighted spatial neighborhood graph: edge {i, j} exists when
// either node is among the other's k nearest neighbors. No self-edges.
// Node i is row i of the dataset ordering.
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  CsrMatrix adjacency;  // 0/1 values

  std::size_t degree(std::size_t i) const { return adjacency.row_size(i); }
  std::size_t edge_count() const { return adjacency.nnz() / 2; }
};

// Self-looped, symmetrically degree-normalized operator
// D~^{-1/2} (A + I) D~^{-1/2}; entries in [0, 1], spectral norm <= 1.
struct NormalizedAdjacency {
  std::size_t n = 0;
  CsrMatrix matrix;
};

// Builds the symmetric-union k-NN graph over the records' coordinates.
// Neighbor ties at equal distance resolve by ascending node index, which is
// ascending record id under the dataset ordering. Requires n >= 2, k >= 1.
KnnGraph build_knn_graph(const std::vector<PoiRecord>& records, std::size_t k,
                         int threads = 1);

NormalizedAdjacency normalize(const KnnGraph& graph);

// Sparse-dense product out = m * x; x and out are n x d row-major.
FeatureMatrix spmm(const CsrMatrix& m, const FeatureMatrix& x, int threads = 1);

// One undirected edge per line as "src_id<TAB>dst_id" with src_id < dst_id,
// lines sorted ascending.
void write_edge_list(const KnnGraph& graph, const std::vector<PoiRecord>& records,
                     const std::string& path);

}  // namespace placefm
