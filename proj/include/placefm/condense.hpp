#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "placefm/poi.hpp"

namespace placefm {

// Per-class cluster budget under a reduction ratio r = n' / n.
// cluster_counts[k] = clamp(round_half_up(r * n_k), 1, n_k), so every class
// keeps at least one cluster and never exceeds its population.
struct CondensePlan {
  double r = 1.0;
  std::vector<std::size_t> cluster_counts;
  std::size_t n_prime = 0;
};

CondensePlan allocate_clusters(const std::vector<std::size_t>& class_sizes, double r);

enum class ClusterAlgo { kmeans, kmedoids };

ClusterAlgo cluster_algo_from_string(const std::string& name);
const char* to_string(ClusterAlgo algo);

struct ClusteringResult {
  FeatureMatrix centers;                   // M x d
  std::vector<std::uint32_t> assignment;   // per point, center index
  double objective = 0.0;                  // final within-cluster squared cost
  std::vector<double> objective_history;   // one entry per accepted update
  std::size_t iterations = 0;
  std::vector<std::size_t> medoid_indices; // k-medoids only: input row of each center
};

// Lloyd's algorithm with k-means++ seeding. Runs until no assignment changes
// (so reassigning at the returned state is a fixed point) or 300 iterations;
// assignment stability implies centroid movement 0 < 1e-6. Empty clusters are
// repaired by reseeding the cluster on the point farthest from its current
// center. Deterministic for a given (points, M, seed), and independent of the
// thread count.
ClusteringResult kmeans(const FeatureMatrix& points, std::size_t M,
                        std::uint64_t seed, int threads = 1);

// PAM-style k-medoids under squared Euclidean cost: k-means++-style greedy
// seeding over the data rows, then best-improvement swaps until no swap
// reduces the total cost (or 100 swap rounds). Every center is an input row.
ClusteringResult kmedoids(const FeatureMatrix& points, std::size_t M,
                          std::uint64_t seed, int threads = 1);

// A condensed "place": one cluster of POIs represented by its centroid.
struct PlaceEmbedding {
  std::string place_id;                 // "<granularity>:<class>:<cluster>"
  std::uint32_t class_index = 0;
  std::vector<double> centroid;
  std::vector<std::string> member_ids;  // never empty
  std::size_t member_count = 0;
};

struct CondensedGraph {
  std::string granularity;
  std::vector<std::string> class_names;
  std::vector<PlaceEmbedding> places;
  std::vector<std::uint32_t> labels;      // per place, class index
  std::vector<std::uint32_t> provenance;  // per original node, place index
  double clustering_objective = 0.0;      // sum of per-class objectives
};

// Clusters each class of the propagated features independently (graph
// topology is not consulted) and emits cluster centroids as places.
// node_ids[i] is the record id of feature row i. Per-class runs are seeded
// with seed ^ class_index and may execute in parallel.
CondensedGraph condense(const FeatureMatrix& features,
                        const GranularityLabeling& labeling,
                        std::span<const std::string> node_ids, double r,
                        ClusterAlgo algo, std::uint64_t seed, int threads = 1);

// JSONL: one place per line with fields
// place_id, granularity, class, centroid, member_count, member_ids.
void write_places_jsonl(const CondensedGraph& graph, const std::string& path);
// Spreadsheet companion: centroid spread over columns c0..c{d-1}.
void write_places_csv(const CondensedGraph& graph, const std::string& path);

}  // namespace placefm
