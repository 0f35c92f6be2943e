#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "placefm/condense.hpp"
#include "placefm/poi.hpp"

namespace placefm {

// Sum of squared Euclidean distances from each point to its assigned center.
double wcss(const FeatureMatrix& points, const FeatureMatrix& centers,
            std::span<const std::uint32_t> assignment);

// Within-place WCSS of every place against its centroid, summed. For k-means
// output this equals the sum of the per-class clustering objectives.
double total_wcss(const CondensedGraph& condensed, const FeatureMatrix& features);

struct SweepConfig {
  std::vector<std::size_t> knn_ks;
  std::vector<std::string> granularities;
  std::vector<ClusterAlgo> algorithms;
  std::vector<std::uint64_t> seeds;
  double r = 0.1;
  std::size_t hops = 2;
  std::vector<double> alphas;  // empty = uniform over hops+1
  int threads = 1;
};

struct SweepCell {
  std::size_t knn_k = 0;
  std::string granularity;
  ClusterAlgo algorithm = ClusterAlgo::kmeans;
  bool failed = false;
  std::string error;
  double mean_wcss = 0.0;
  double std_wcss = 0.0;  // population standard deviation over seeds
  std::size_t seed_count = 0;
  std::vector<double> per_seed_wcss;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepCell> cells;  // knn_k-major, then granularity, then algorithm

  const SweepCell* find(std::size_t knn_k, const std::string& granularity,
                        ClusterAlgo algo) const;
  // Mean over a (granularity, algorithm) column of the per-knn_k means.
  double column_average(const std::string& granularity, ClusterAlgo algo) const;
  // knn_k with the lowest mean WCSS in a column; 0 when every cell failed.
  std::size_t best_knn_k(const std::string& granularity, ClusterAlgo algo) const;
};

// Runs the full pipeline (graph, propagation, condensation, WCSS) for every
// (knn_k, granularity, algorithm) cell and every seed. A failing cell records
// its error and the sweep continues; graph construction and propagation are
// shared across the cells of one knn_k.
SweepResult run_sweep(const std::vector<PoiRecord>& records, const SweepConfig& config);

void write_sweep_csv(const SweepResult& result, const std::string& path);
// Rows = knn_k plus a trailing Average row, column groups = granularity x
// algorithm, entries mean+-std; appends the best-k line per column.
std::string format_sweep_table(const SweepResult& result);

}  // namespace placefm
