#include "placefm/condense.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "placefm/parallel.hpp"

namespace placefm {
namespace {

constexpr std::size_t kMaxLloydIterations = 300;
constexpr std::size_t kMaxSwapRounds = 100;
// Full pairwise distance cache for PAM when it stays under ~50 MB.
constexpr std::size_t kMedoidCacheLimit = 2500;

double sqdist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_cluster_args(const FeatureMatrix& points, std::size_t M,
                        const char* op) {
  if (M < 1) {
    throw std::invalid_argument(std::string(op) + ": M must be >= 1");
  }
  if (M > points.n) {
    throw std::invalid_argument(std::string(op) + ": M = " + std::to_string(M) +
                                " exceeds point count " + std::to_string(points.n));
  }
}

// k-means++ D^2 seeding over squared Euclidean distance; returns M distinct
// row indices. When every remaining distance is zero (duplicate-heavy data)
// the smallest unchosen index is taken.
std::vector<std::size_t> kmeanspp_indices(const FeatureMatrix& points,
                                          std::size_t M, std::mt19937_64& rng) {
  const std::size_t n = points.n;
  const std::size_t d = points.d;
  std::vector<std::size_t> chosen;
  chosen.reserve(M);
  std::vector<bool> is_chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = static_cast<std::size_t>(rng() % n);
  chosen.push_back(first);
  is_chosen[first] = true;
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = sqdist(points.row(i).data(), points.row(first).data(), d);
  }

  while (chosen.size() < M) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    if (pick == n) {
      // All mass at zero (or rounding walked off the end): first unchosen.
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    is_chosen[pick] = true;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sqdist(points.row(i).data(), points.row(pick).data(), d));
    }
  }
  return chosen;
}

}  // namespace

CondensePlan allocate_clusters(const std::vector<std::size_t>& class_sizes, double r) {
  if (!(r > 0.0) || r > 1.0) {
    throw std::invalid_argument("allocate_clusters: r must be in (0, 1]");
  }
  CondensePlan plan;
  plan.r = r;
  plan.cluster_counts.reserve(class_sizes.size());
  for (const std::size_t n_k : class_sizes) {
    if (n_k < 1) {
      throw std::invalid_argument("allocate_clusters: empty class");
    }
    const double target = r * static_cast<double>(n_k);
    std::size_t m = static_cast<std::size_t>(std::floor(target + 0.5));
    m = std::clamp<std::size_t>(m, 1, n_k);
    plan.cluster_counts.push_back(m);
    plan.n_prime += m;
  }
  return plan;
}

ClusterAlgo cluster_algo_from_string(const std::string& name) {
  if (name == "kmeans") {
    return ClusterAlgo::kmeans;
  }
  if (name == "kmedoids") {
    return ClusterAlgo::kmedoids;
  }
  throw std::invalid_argument("unknown clustering algorithm '" + name +
                              "' (expected kmeans or kmedoids)");
}

const char* to_string(ClusterAlgo algo) {
  return algo == ClusterAlgo::kmeans ? "kmeans" : "kmedoids";
}

ClusteringResult kmeans(const FeatureMatrix& points, std::size_t M,
                        std::uint64_t seed, int threads) {
  check_cluster_args(points, M, "kmeans");
  const std::size_t n = points.n;
  const std::size_t d = points.d;

  std::mt19937_64 rng(seed);
  const std::vector<std::size_t> seeds = kmeanspp_indices(points, M, rng);
  FeatureMatrix centers = FeatureMatrix::zeros(M, d);
  for (std::size_t m = 0; m < M; ++m) {
    std::copy(points.row(seeds[m]).begin(), points.row(seeds[m]).end(),
              centers.row(m).begin());
  }

  ClusteringResult result;
  result.assignment.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> current_d2(n, 0.0);
  std::vector<std::size_t> counts(M, 0);

  for (std::size_t iter = 0; iter < kMaxLloydIterations; ++iter) {
    result.iterations = iter + 1;

    // Assignment. A point moves only on a strict improvement, so ties keep
    // the current cluster and duplicate centers cannot oscillate.
    std::atomic<std::size_t> changed{0};
    parallel_for(0, n, threads, [&](std::size_t i) {
      const double* row = points.row(i).data();
      std::uint32_t best = 0;
      double best_d2 = sqdist(row, centers.row(0).data(), d);
      for (std::uint32_t m = 1; m < M; ++m) {
        const double dist = sqdist(row, centers.row(m).data(), d);
        if (dist < best_d2) {
          best_d2 = dist;
          best = m;
        }
      }
      const std::uint32_t cur = result.assignment[i];
      if (cur != std::numeric_limits<std::uint32_t>::max()) {
        const double cur_d2 = sqdist(row, centers.row(cur).data(), d);
        if (!(best_d2 < cur_d2)) {
          best = cur;
          best_d2 = cur_d2;
        }
      }
      if (best != cur) {
        result.assignment[i] = best;
        changed.fetch_add(1, std::memory_order_relaxed);
      }
      current_d2[i] = best_d2;
    });

    if (changed.load() == 0) {
      break;  // fixed point: centers are already the means of this assignment
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[result.assignment[i]];
    }

    // Reseed each empty cluster on the farthest point from its own center;
    // donors must leave a non-empty cluster behind.
    for (std::uint32_t m = 0; m < M; ++m) {
      if (counts[m] != 0) {
        continue;
      }
      std::size_t donor = n;
      double donor_d2 = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.assignment[i]] > 1 && current_d2[i] > donor_d2) {
          donor_d2 = current_d2[i];
          donor = i;
        }
      }
      --counts[result.assignment[donor]];
      result.assignment[donor] = m;
      counts[m] = 1;
      current_d2[donor] = 0.0;
    }

    // Update step: sequential accumulation keeps summation order fixed.
    FeatureMatrix sums = FeatureMatrix::zeros(M, d);
    for (std::size_t i = 0; i < n; ++i) {
      double* sum_row = sums.row(result.assignment[i]).data();
      const double* row = points.row(i).data();
      for (std::size_t c = 0; c < d; ++c) {
        sum_row[c] += row[c];
      }
    }
    for (std::size_t m = 0; m < M; ++m) {
      const double inv = 1.0 / static_cast<double>(counts[m]);
      double* center_row = centers.row(m).data();
      const double* sum_row = sums.row(m).data();
      for (std::size_t c = 0; c < d; ++c) {
        center_row[c] = sum_row[c] * inv;
      }
    }

    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wcss += sqdist(points.row(i).data(), centers.row(result.assignment[i]).data(), d);
    }
    result.objective_history.push_back(wcss);
  }

  result.centers = std::move(centers);
  result.objective = result.objective_history.empty()
                         ? 0.0
                         : result.objective_history.back();
  return result;
}

namespace {

// Distance access for PAM: cached full matrix when small, otherwise rows are
// recomputed on demand into caller scratch.
class PairwiseDistances {
 public:
  PairwiseDistances(const FeatureMatrix& points, int threads)
      : points_(points), cached_(points.n <= kMedoidCacheLimit) {
    if (cached_) {
      const std::size_t n = points.n;
      matrix_.resize(n * n);
      parallel_for(0, n, threads, [&](std::size_t i) {
        double* row = matrix_.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
          row[j] = sqdist(points_.row(i).data(), points_.row(j).data(), points_.d);
        }
      });
    }
  }

  // Distances from point i to every point, valid until the next call with
  // the same scratch buffer.
  const double* row(std::size_t i, std::vector<double>& scratch) const {
    if (cached_) {
      return matrix_.data() + i * points_.n;
    }
    scratch.resize(points_.n);
    for (std::size_t j = 0; j < points_.n; ++j) {
      scratch[j] = sqdist(points_.row(i).data(), points_.row(j).data(), points_.d);
    }
    return scratch.data();
  }

 private:
  const FeatureMatrix& points_;
  bool cached_;
  std::vector<double> matrix_;
};

}  // namespace

ClusteringResult kmedoids(const FeatureMatrix& points, std::size_t M,
                          std::uint64_t seed, int threads) {
  check_cluster_args(points, M, "kmedoids");
  const std::size_t n = points.n;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> medoids = kmeanspp_indices(points, M, rng);
  std::vector<std::int64_t> slot_of(n, -1);

  const PairwiseDistances dist(points, threads);

  std::vector<std::uint32_t> nearest(n);
  std::vector<double> d_nearest(n), d_second(n);

  const auto rebuild = [&] {
    for (std::size_t m = 0; m < M; ++m) {
      slot_of[medoids[m]] = static_cast<std::int64_t>(m);
    }
    std::vector<const double*> medoid_rows(M);
    std::vector<std::vector<double>> medoid_scratch(M);
    for (std::size_t m = 0; m < M; ++m) {
      medoid_rows[m] = dist.row(medoids[m], medoid_scratch[m]);
    }
    parallel_for(0, n, threads, [&](std::size_t j) {
      std::uint32_t best_slot = 0;
      double best = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      for (std::uint32_t m = 0; m < M; ++m) {
        const double dj = medoid_rows[m][j];
        if (dj < best) {
          second = best;
          best = dj;
          best_slot = m;
        } else if (dj < second) {
          second = dj;
        }
      }
      // A medoid always owns itself, even under duplicate coordinates.
      if (slot_of[j] >= 0) {
        const std::uint32_t own = static_cast<std::uint32_t>(slot_of[j]);
        if (best_slot != own) {
          second = best;
          best = 0.0;
          best_slot = own;
        }
      }
      nearest[j] = best_slot;
      d_nearest[j] = best;
      d_second[j] = second;
    });
  };

  const auto total_cost = [&] {
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cost += d_nearest[j];
    }
    return cost;
  };

  rebuild();
  double cost = total_cost();

  ClusteringResult result;
  result.objective_history.push_back(cost);

  std::vector<double> best_delta(n);
  std::vector<std::uint32_t> best_slot_for(n);

  for (std::size_t round = 0; round < kMaxSwapRounds; ++round) {
    result.iterations = round + 1;

    // For every non-medoid candidate h, the cost change of the best swap
    // (m, h) over all medoids m, in one pass over the points.
    parallel_for(0, n, threads, [&](std::size_t h) {
      if (slot_of[h] >= 0) {
        best_delta[h] = std::numeric_limits<double>::infinity();
        return;
      }
      std::vector<double> scratch;
      const double* row_h = dist.row(h, scratch);
      std::vector<double> keep_gain(M, 0.0), replace_cost(M, 0.0);
      double shared = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dhj = row_h[j];
        const double gain = dhj < d_nearest[j] ? dhj - d_nearest[j] : 0.0;
        shared += gain;
        keep_gain[nearest[j]] += gain;
        replace_cost[nearest[j]] += std::min(dhj, d_second[j]) - d_nearest[j];
      }
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t best_m = 0;
      for (std::uint32_t m = 0; m < M; ++m) {
        const double delta = shared - keep_gain[m] + replace_cost[m];
        if (delta < best) {
          best = delta;
          best_m = m;
        }
      }
      best_delta[h] = best;
      best_slot_for[h] = best_m;
    });

    std::size_t best_h = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < n; ++h) {
      if (best_delta[h] < best) {
        best = best_delta[h];
        best_h = h;
      }
    }

    if (best_h == n || !(best < -1e-9 * (1.0 + cost))) {
      break;
    }
    slot_of[medoids[best_slot_for[best_h]]] = -1;
    medoids[best_slot_for[best_h]] = best_h;
    rebuild();
    cost = total_cost();
    result.objective_history.push_back(cost);
  }

  result.assignment = nearest;
  result.medoid_indices = medoids;
  result.centers = FeatureMatrix::zeros(M, points.d);
  for (std::size_t m = 0; m < M; ++m) {
    std::copy(points.row(medoids[m]).begin(), points.row(medoids[m]).end(),
              result.centers.row(m).begin());
  }
  result.objective = cost;
  return result;
}

CondensedGraph condense(const FeatureMatrix& features,
                        const GranularityLabeling& labeling,
                        std::span<const std::string> node_ids, double r,
                        ClusterAlgo algo, std::uint64_t seed, int threads) {
  const std::size_t n = features.n;
  if (labeling.assignment.size() != n || node_ids.size() != n) {
    throw std::invalid_argument("condense: features, labeling and node ids disagree on n");
  }
  const std::vector<std::size_t> sizes = labeling.class_sizes();
  const CondensePlan plan = allocate_clusters(sizes, r);
  const std::size_t c = labeling.class_count();

  std::vector<std::vector<std::size_t>> class_nodes(c);
  for (std::size_t k = 0; k < c; ++k) {
    class_nodes[k].reserve(sizes[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    class_nodes[labeling.assignment[i]].push_back(i);
  }

  std::vector<ClusteringResult> per_class(c);
  parallel_for(0, c, threads, [&](std::size_t k) {
    const auto& nodes = class_nodes[k];
    FeatureMatrix sub = FeatureMatrix::zeros(nodes.size(), features.d);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::copy(features.row(nodes[i]).begin(), features.row(nodes[i]).end(),
                sub.row(i).begin());
    }
    const std::uint64_t class_seed = seed ^ static_cast<std::uint64_t>(k);
    per_class[k] = algo == ClusterAlgo::kmeans
                       ? kmeans(sub, plan.cluster_counts[k], class_seed)
                       : kmedoids(sub, plan.cluster_counts[k], class_seed);
  });

  CondensedGraph graph;
  graph.granularity = labeling.granularity_name;
  graph.class_names = labeling.classes;
  graph.places.reserve(plan.n_prime);
  graph.labels.reserve(plan.n_prime);
  graph.provenance.assign(n, 0);

  for (std::size_t k = 0; k < c; ++k) {
    const auto& nodes = class_nodes[k];
    const ClusteringResult& clusters = per_class[k];
    const std::size_t base = graph.places.size();
    for (std::size_t m = 0; m < plan.cluster_counts[k]; ++m) {
      PlaceEmbedding place;
      place.place_id = labeling.granularity_name + ":" + labeling.classes[k] +
                       ":" + std::to_string(m);
      place.class_index = static_cast<std::uint32_t>(k);
      place.centroid.assign(clusters.centers.row(m).begin(),
                            clusters.centers.row(m).end());
      graph.places.push_back(std::move(place));
      graph.labels.push_back(static_cast<std::uint32_t>(k));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::size_t place_idx = base + clusters.assignment[i];
      graph.places[place_idx].member_ids.push_back(node_ids[nodes[i]]);
      graph.provenance[nodes[i]] = static_cast<std::uint32_t>(place_idx);
    }
    graph.clustering_objective += clusters.objective;
  }
  for (PlaceEmbedding& place : graph.places) {
    place.member_count = place.member_ids.size();
  }
  return graph;
}

void write_places_jsonl(const CondensedGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (const PlaceEmbedding& place : graph.places) {
    nlohmann::ordered_json obj;
    obj["place_id"] = place.place_id;
    obj["granularity"] = graph.granularity;
    obj["class"] = graph.class_names[place.class_index];
    obj["centroid"] = place.centroid;
    obj["member_count"] = place.member_count;
    obj["member_ids"] = place.member_ids;
    out << obj.dump() << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

void write_places_csv(const CondensedGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  const std::size_t d = graph.places.empty() ? 0 : graph.places.front().centroid.size();
  out << "place_id,granularity,class,member_count";
  for (std::size_t c = 0; c < d; ++c) {
    out << ",c" << c;
  }
  out << "\n";
  char buf[40];
  for (const PlaceEmbedding& place : graph.places) {
    out << place.place_id << ',' << graph.granularity << ','
        << graph.class_names[place.class_index] << ',' << place.member_count;
    for (const double v : place.centroid) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

}  // namespace placefm
