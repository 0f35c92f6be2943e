#include "placefm/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "placefm/knn_graph.hpp"
#include "placefm/propagation.hpp"

namespace placefm {

double wcss(const FeatureMatrix& points, const FeatureMatrix& centers,
            std::span<const std::uint32_t> assignment) {
  if (assignment.size() != points.n) {
    throw std::invalid_argument("wcss: assignment size does not match points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.n; ++i) {
    if (assignment[i] >= centers.n) {
      throw std::out_of_range("wcss: assignment[" + std::to_string(i) +
                              "] = " + std::to_string(assignment[i]) +
                              " exceeds center count " + std::to_string(centers.n));
    }
    const double* row = points.row(i).data();
    const double* center = centers.row(assignment[i]).data();
    for (std::size_t c = 0; c < points.d; ++c) {
      const double diff = row[c] - center[c];
      total += diff * diff;
    }
  }
  return total;
}

double total_wcss(const CondensedGraph& condensed, const FeatureMatrix& features) {
  if (condensed.provenance.size() != features.n) {
    throw std::invalid_argument("total_wcss: provenance does not cover the features");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < features.n; ++i) {
    const PlaceEmbedding& place = condensed.places[condensed.provenance[i]];
    const double* row = features.row(i).data();
    for (std::size_t c = 0; c < features.d; ++c) {
      const double diff = row[c] - place.centroid[c];
      total += diff * diff;
    }
  }
  return total;
}

const SweepCell* SweepResult::find(std::size_t knn_k, const std::string& granularity,
                                   ClusterAlgo algo) const {
  for (const SweepCell& cell : cells) {
    if (cell.knn_k == knn_k && cell.granularity == granularity &&
        cell.algorithm == algo) {
      return &cell;
    }
  }
  return nullptr;
}

double SweepResult::column_average(const std::string& granularity,
                                   ClusterAlgo algo) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const SweepCell& cell : cells) {
    if (!cell.failed && cell.granularity == granularity && cell.algorithm == algo) {
      sum += cell.mean_wcss;
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : sum / static_cast<double>(count);
}

std::size_t SweepResult::best_knn_k(const std::string& granularity,
                                    ClusterAlgo algo) const {
  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const SweepCell& cell : cells) {
    if (!cell.failed && cell.granularity == granularity && cell.algorithm == algo &&
        cell.mean_wcss < best) {
      best = cell.mean_wcss;
      best_k = cell.knn_k;
    }
  }
  return best_k;
}

SweepResult run_sweep(const std::vector<PoiRecord>& records, const SweepConfig& config) {
  if (config.knn_ks.empty() || config.granularities.empty() ||
      config.algorithms.empty() || config.seeds.empty()) {
    throw std::invalid_argument("run_sweep: every grid list must be non-empty");
  }
  SweepResult result;
  result.config = config;

  const HopWeights weights = config.alphas.empty()
                                 ? HopWeights::uniform(config.hops)
                                 : HopWeights{config.hops, config.alphas};
  weights.validate();

  std::vector<std::string> node_ids;
  node_ids.reserve(records.size());
  for (const PoiRecord& r : records) {
    node_ids.push_back(r.id);
  }

  // Labelings are shared across all knn_k values; a missing granularity
  // fails that column, not the sweep.
  std::map<std::string, GranularityLabeling> labelings;
  std::map<std::string, std::string> labeling_errors;
  for (const std::string& g : config.granularities) {
    try {
      labelings.emplace(g, labeling_for(records, g));
    } catch (const std::exception& e) {
      labeling_errors.emplace(g, e.what());
    }
  }

  FeatureMatrix x;
  std::string encode_error;
  try {
    const CategoryVocabulary vocab = build_vocabulary(records, max_category_depth(records));
    x = encode_features(records, vocab);
  } catch (const std::exception& e) {
    encode_error = e.what();
  }

  for (const std::size_t knn_k : config.knn_ks) {
    FeatureMatrix propagated;
    std::string graph_error = encode_error;
    if (graph_error.empty()) {
      try {
        const KnnGraph graph = build_knn_graph(records, knn_k, config.threads);
        const NormalizedAdjacency a_hat = normalize(graph);
        propagated = propagate_features(a_hat, x, weights, config.threads);
      } catch (const std::exception& e) {
        graph_error = e.what();
      }
    }

    for (const std::string& granularity : config.granularities) {
      for (const ClusterAlgo algo : config.algorithms) {
        SweepCell cell;
        cell.knn_k = knn_k;
        cell.granularity = granularity;
        cell.algorithm = algo;
        try {
          if (!graph_error.empty()) {
            throw std::runtime_error(graph_error);
          }
          const auto labeling_error = labeling_errors.find(granularity);
          if (labeling_error != labeling_errors.end()) {
            throw std::runtime_error(labeling_error->second);
          }
          const GranularityLabeling& labeling = labelings.at(granularity);
          for (const std::uint64_t seed : config.seeds) {
            const CondensedGraph condensed = condense(
                propagated, labeling, node_ids, config.r, algo, seed, config.threads);
            cell.per_seed_wcss.push_back(total_wcss(condensed, propagated));
          }
          cell.seed_count = cell.per_seed_wcss.size();
          double mean = 0.0;
          for (const double v : cell.per_seed_wcss) {
            mean += v;
          }
          mean /= static_cast<double>(cell.seed_count);
          double var = 0.0;
          for (const double v : cell.per_seed_wcss) {
            var += (v - mean) * (v - mean);
          }
          cell.mean_wcss = mean;
          cell.std_wcss = std::sqrt(var / static_cast<double>(cell.seed_count));
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
          cell.per_seed_wcss.clear();
          cell.seed_count = 0;
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "knn_k,granularity,algorithm,mean_wcss,std_wcss,seeds\n";
  char buf[80];
  for (const SweepCell& cell : result.cells) {
    if (cell.failed) {
      out << cell.knn_k << ',' << cell.granularity << ',' << to_string(cell.algorithm)
          << ",nan,nan,0\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g", cell.mean_wcss, cell.std_wcss);
      out << cell.knn_k << ',' << cell.granularity << ',' << to_string(cell.algorithm)
          << ',' << buf << ',' << cell.seed_count << "\n";
    }
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

namespace {

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + "  " : s + std::string(width - s.size(), ' ');
}

std::string cell_text(const SweepCell* cell) {
  if (cell == nullptr) {
    return "-";
  }
  if (cell->failed) {
    return "FAILED";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f+-%.2f", cell->mean_wcss, cell->std_wcss);
  return buf;
}

std::string average_text(double value) {
  if (std::isnan(value)) {
    return "-";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

}  // namespace

std::string format_sweep_table(const SweepResult& result) {
  const auto& granularities = result.config.granularities;
  const auto& algorithms = result.config.algorithms;
  const int width = 16;

  std::ostringstream out;
  out << pad("k-NN", 8);
  for (const std::string& g : granularities) {
    for (const ClusterAlgo algo : algorithms) {
      out << pad(g + "/" + to_string(algo), width);
    }
  }
  out << "\n";

  for (const std::size_t k : result.config.knn_ks) {
    out << pad("k=" + std::to_string(k), 8);
    for (const std::string& g : granularities) {
      for (const ClusterAlgo algo : algorithms) {
        out << pad(cell_text(result.find(k, g, algo)), width);
      }
    }
    out << "\n";
  }

  out << pad("Average", 8);
  for (const std::string& g : granularities) {
    for (const ClusterAlgo algo : algorithms) {
      out << pad(average_text(result.column_average(g, algo)), width);
    }
  }
  out << "\n\n";

  for (const std::string& g : granularities) {
    for (const ClusterAlgo algo : algorithms) {
      const std::size_t best = result.best_knn_k(g, algo);
      out << "best knn_k (" << g << ", " << to_string(algo)
          << "): " << (best == 0 ? "n/a" : "k=" + std::to_string(best)) << "\n";
    }
  }
  return out.str();
}

}  // namespace placefm
