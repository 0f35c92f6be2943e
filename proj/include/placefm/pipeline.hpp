#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "placefm/evaluation.hpp"
#include "placefm/synth.hpp"

namespace placefm {

// Declarative run configuration. File values are overridden by CLI flags;
// whatever was consumed is echoed to resolved_config.json next to the
// outputs, and re-running from that echo reproduces the outputs.
struct PipelineConfig {
  std::string input;
  std::string output_dir;
  std::size_t knn_k = 5;
  std::size_t hops = 2;
  std::vector<double> alphas;  // empty = uniform 1/(hops+1)
  std::string granularity = "state";
  double r = 0.1;
  std::string algorithm = "kmeans";
  std::uint64_t seed = 0;
  int threads = 0;  // <1 resolves via PLACEFM_THREADS, then 1

  // sweep grids
  std::vector<std::size_t> knn_ks = {2, 5, 10};
  std::vector<std::string> granularities = {"state"};
  std::vector<std::string> algorithms = {"kmeans", "kmedoids"};
  std::vector<std::uint64_t> seeds = {0, 1, 2};

  static PipelineConfig from_json_file(const std::string& path);
  void write_resolved(const std::string& path) const;
};

struct EmbedSummary {
  std::size_t n = 0;
  std::size_t feature_dim = 0;
  std::size_t edges = 0;
  std::size_t class_count = 0;
  std::size_t n_prime = 0;
  double total_wcss = 0.0;
  std::string places_jsonl;
  std::string places_csv;
  std::string manifest_path;
  std::string resolved_config_path;
};

// Full pipeline: load -> k-NN graph -> propagate -> condense -> write.
// Outputs places.jsonl / places.csv / manifest.json / resolved_config.json
// under config.output_dir. Only the manifest's timing block is
// non-deterministic.
EmbedSummary cmd_embed(const PipelineConfig& config);

struct FuseSummary {
  std::size_t primary_count = 0;
  std::size_t secondary_count = 0;
  std::size_t matched = 0;
  double match_rate = 0.0;
  double mean_distance_m = 0.0;
  std::string fused_path;
  std::string report_path;
};

// Distance-bounded join of two POI files; output format follows the output
// extension (.csv / .jsonl). Writes <out stem>_report.json with match rate,
// mean match distance and a 10-bin similarity histogram.
FuseSummary cmd_fuse(const std::string& primary_path, const std::string& secondary_path,
                     const std::string& out_path, double radius_m = 111.0,
                     double min_similarity = 0.5, int threads = 0);

struct SweepSummary {
  SweepResult result;
  std::string csv_path;
  std::string table_path;
  std::string resolved_config_path;
};

SweepSummary cmd_sweep(const PipelineConfig& config);

// Writes a synthetic POI CSV; byte-identical for identical parameters.
std::size_t cmd_synth(const SynthParams& params, const std::string& out_path);

std::size_t cmd_graph_dump(const std::string& input, std::size_t knn_k,
                           const std::string& out_path, int threads = 0);

}  // namespace placefm
