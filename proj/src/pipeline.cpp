#include "placefm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "placefm/condense.hpp"
#include "placefm/fusion.hpp"
#include "placefm/knn_graph.hpp"
#include "placefm/parallel.hpp"
#include "placefm/propagation.hpp"

namespace placefm {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void write_json_file(const nlohmann::ordered_json& obj, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << obj.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

std::string output_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open config file");
  }
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  PipelineConfig config;
  try {
    for (const auto& [key, value] : obj.items()) {
      if (key == "input") {
        config.input = value.get<std::string>();
      } else if (key == "output_dir") {
        config.output_dir = value.get<std::string>();
      } else if (key == "knn_k") {
        config.knn_k = value.get<std::size_t>();
      } else if (key == "hops") {
        config.hops = value.get<std::size_t>();
      } else if (key == "alphas") {
        config.alphas = value.get<std::vector<double>>();
      } else if (key == "granularity") {
        config.granularity = value.get<std::string>();
      } else if (key == "r") {
        config.r = value.get<double>();
      } else if (key == "algorithm") {
        config.algorithm = value.get<std::string>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "threads") {
        config.threads = value.get<int>();
      } else if (key == "knn_ks") {
        config.knn_ks = value.get<std::vector<std::size_t>>();
      } else if (key == "granularities") {
        config.granularities = value.get<std::vector<std::string>>();
      } else if (key == "algorithms") {
        config.algorithms = value.get<std::vector<std::string>>();
      } else if (key == "seeds") {
        config.seeds = value.get<std::vector<std::uint64_t>>();
      } else {
        throw std::runtime_error(path + ": unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad config value: " + e.what());
  }
  return config;
}

void PipelineConfig::write_resolved(const std::string& path) const {
  nlohmann::ordered_json obj;
  obj["input"] = input;
  obj["output_dir"] = output_dir;
  obj["knn_k"] = knn_k;
  obj["hops"] = hops;
  obj["alphas"] = alphas.empty() ? HopWeights::uniform(hops).alphas : alphas;
  obj["granularity"] = granularity;
  obj["r"] = r;
  obj["algorithm"] = algorithm;
  obj["seed"] = seed;
  obj["threads"] = threads;
  obj["knn_ks"] = knn_ks;
  obj["granularities"] = granularities;
  obj["algorithms"] = algorithms;
  obj["seeds"] = seeds;
  write_json_file(obj, path);
}

EmbedSummary cmd_embed(const PipelineConfig& config) {
  if (config.input.empty() || config.output_dir.empty()) {
    throw std::invalid_argument("cmd_embed: input and output_dir are required");
  }
  const int threads = resolve_thread_count(config.threads);
  const ClusterAlgo algo = cluster_algo_from_string(config.algorithm);
  const HopWeights weights = config.alphas.empty()
                                 ? HopWeights::uniform(config.hops)
                                 : HopWeights{config.hops, config.alphas};
  weights.validate();
  std::filesystem::create_directories(config.output_dir);

  nlohmann::ordered_json timing;

  auto t0 = Clock::now();
  const std::vector<PoiRecord> records = load_pois(config.input);
  const GranularityLabeling labeling = labeling_for(records, config.granularity);
  std::vector<std::string> node_ids;
  node_ids.reserve(records.size());
  for (const PoiRecord& r : records) {
    node_ids.push_back(r.id);
  }
  timing["load"] = ms_since(t0);

  t0 = Clock::now();
  const KnnGraph graph = build_knn_graph(records, config.knn_k, threads);
  const NormalizedAdjacency a_hat = normalize(graph);
  timing["graph"] = ms_since(t0);

  t0 = Clock::now();
  const CategoryVocabulary vocab = build_vocabulary(records, max_category_depth(records));
  const FeatureMatrix x = encode_features(records, vocab);
  const FeatureMatrix features = propagate_features(a_hat, x, weights, threads);
  timing["propagate"] = ms_since(t0);

  t0 = Clock::now();
  const CondensedGraph condensed = condense(features, labeling, node_ids, config.r,
                                            algo, config.seed, threads);
  const double wcss_total = total_wcss(condensed, features);
  timing["condense"] = ms_since(t0);

  EmbedSummary summary;
  summary.n = records.size();
  summary.feature_dim = features.d;
  summary.edges = graph.edge_count();
  summary.class_count = labeling.class_count();
  summary.n_prime = condensed.places.size();
  summary.total_wcss = wcss_total;
  summary.places_jsonl = output_path(config.output_dir, "places.jsonl");
  summary.places_csv = output_path(config.output_dir, "places.csv");
  summary.manifest_path = output_path(config.output_dir, "manifest.json");
  summary.resolved_config_path = output_path(config.output_dir, "resolved_config.json");

  t0 = Clock::now();
  write_places_jsonl(condensed, summary.places_jsonl);
  write_places_csv(condensed, summary.places_csv);
  config.write_resolved(summary.resolved_config_path);
  timing["write"] = ms_since(t0);

  nlohmann::ordered_json manifest;
  manifest["n"] = summary.n;
  manifest["feature_dim"] = summary.feature_dim;
  manifest["edges"] = summary.edges;
  manifest["classes"] = summary.class_count;
  manifest["n_prime"] = summary.n_prime;
  manifest["places"] = condensed.places.size();
  manifest["total_wcss"] = wcss_total;
  manifest["granularity"] = config.granularity;
  manifest["algorithm"] = config.algorithm;
  // Timing is the only non-deterministic block; everything above is
  // byte-stable for a fixed input, config and seed.
  manifest["timing_ms"] = timing;
  write_json_file(manifest, summary.manifest_path);
  return summary;
}

FuseSummary cmd_fuse(const std::string& primary_path, const std::string& secondary_path,
                     const std::string& out_path, double radius_m,
                     double min_similarity, int threads) {
  const std::vector<PoiRecord> primary = load_pois(primary_path);
  const std::vector<PoiRecord> secondary = load_pois(secondary_path);
  const std::vector<FusedRecord> fused = spatial_join(
      primary, secondary, radius_m, min_similarity, resolve_thread_count(threads));

  if (poi_format_from_path(out_path) == PoiFormat::csv) {
    write_fused_csv(fused, out_path);
  } else {
    write_fused_jsonl(fused, out_path);
  }

  FuseSummary summary;
  summary.primary_count = primary.size();
  summary.secondary_count = secondary.size();
  summary.matched = fused.size();
  summary.match_rate = primary.empty()
                           ? 0.0
                           : static_cast<double>(fused.size()) /
                                 static_cast<double>(primary.size());
  double distance_sum = 0.0;
  std::vector<std::size_t> histogram(10, 0);
  for (const FusedRecord& f : fused) {
    distance_sum += f.distance_m;
    const auto bin = std::min<std::size_t>(
        9, static_cast<std::size_t>(f.name_similarity * 10.0));
    ++histogram[bin];
  }
  summary.mean_distance_m =
      fused.empty() ? 0.0 : distance_sum / static_cast<double>(fused.size());
  summary.fused_path = out_path;

  std::filesystem::path report = out_path;
  report.replace_filename(report.stem().string() + "_report.json");
  summary.report_path = report.string();

  nlohmann::ordered_json obj;
  obj["primary_count"] = summary.primary_count;
  obj["secondary_count"] = summary.secondary_count;
  obj["matched"] = summary.matched;
  obj["match_rate"] = summary.match_rate;
  obj["mean_distance_m"] = summary.mean_distance_m;
  obj["radius_m"] = radius_m;
  obj["min_similarity"] = min_similarity;
  obj["similarity_histogram"] = histogram;
  write_json_file(obj, summary.report_path);
  return summary;
}

SweepSummary cmd_sweep(const PipelineConfig& config) {
  if (config.input.empty() || config.output_dir.empty()) {
    throw std::invalid_argument("cmd_sweep: input and output_dir are required");
  }
  std::filesystem::create_directories(config.output_dir);
  const std::vector<PoiRecord> records = load_pois(config.input);

  SweepConfig sweep;
  sweep.knn_ks = config.knn_ks;
  sweep.granularities = config.granularities;
  sweep.algorithms.reserve(config.algorithms.size());
  for (const std::string& name : config.algorithms) {
    sweep.algorithms.push_back(cluster_algo_from_string(name));
  }
  sweep.seeds = config.seeds;
  sweep.r = config.r;
  sweep.hops = config.hops;
  sweep.alphas = config.alphas;
  sweep.threads = resolve_thread_count(config.threads);

  SweepSummary summary;
  summary.result = run_sweep(records, sweep);
  summary.csv_path = output_path(config.output_dir, "sweep.csv");
  summary.table_path = output_path(config.output_dir, "sweep_table.txt");
  summary.resolved_config_path = output_path(config.output_dir, "resolved_config.json");

  write_sweep_csv(summary.result, summary.csv_path);
  std::ofstream table(summary.table_path);
  if (!table) {
    throw std::runtime_error(summary.table_path + ": cannot open for writing");
  }
  table << format_sweep_table(summary.result);
  config.write_resolved(summary.resolved_config_path);
  return summary;
}

std::size_t cmd_synth(const SynthParams& params, const std::string& out_path) {
  const std::vector<PoiRecord> records = generate_synthetic_pois(params);
  write_pois_csv(records, out_path);
  return records.size();
}

std::size_t cmd_graph_dump(const std::string& input, std::size_t knn_k,
                           const std::string& out_path, int threads) {
  const std::vector<PoiRecord> records = load_pois(input);
  const KnnGraph graph = build_knn_graph(records, knn_k, resolve_thread_count(threads));
  write_edge_list(graph, records, out_path);
  return graph.edge_count();
}

}  // namespace placefm
