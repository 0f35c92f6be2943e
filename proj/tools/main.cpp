#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "placefm/pipeline.hpp"

namespace {

struct CommonPipelineFlags {
  std::string config_path;
  std::string input;
  std::string output_dir;
  std::size_t knn_k = 0;
  std::size_t hops = 0;
  std::vector<double> alphas;
  std::string granularity;
  double r = 0.0;
  std::string algorithm;
  std::uint64_t seed = 0;
  int threads = 0;

  CLI::Option* opt_input = nullptr;
  CLI::Option* opt_output = nullptr;
  CLI::Option* opt_knn_k = nullptr;
  CLI::Option* opt_hops = nullptr;
  CLI::Option* opt_alphas = nullptr;
  CLI::Option* opt_granularity = nullptr;
  CLI::Option* opt_r = nullptr;
  CLI::Option* opt_algorithm = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_threads = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override it");
    opt_input = cmd->add_option("--input", input, "POI file (.csv or .jsonl)");
    opt_output = cmd->add_option("--out-dir", output_dir, "output directory");
    opt_knn_k = cmd->add_option("--knn-k", knn_k, "neighbors per node (default 5)");
    opt_hops = cmd->add_option("--hops", hops, "propagation hops (default 2)");
    opt_alphas = cmd->add_option("--alphas", alphas,
                                 "hop weights a0..aK (default uniform)");
    opt_granularity = cmd->add_option("--granularity", granularity,
                                      "labeling granularity (default state)");
    opt_r = cmd->add_option("--r", r, "reduction ratio in (0,1] (default 0.1)");
    opt_algorithm = cmd->add_option("--algorithm", algorithm,
                                    "kmeans or kmedoids (default kmeans)");
    opt_seed = cmd->add_option("--seed", seed, "clustering seed (default 0)");
    opt_threads = cmd->add_option("--threads", threads,
                                  "worker threads (default PLACEFM_THREADS or 1)");
  }

  placefm::PipelineConfig resolve() const {
    placefm::PipelineConfig cfg;
    if (!config_path.empty()) {
      cfg = placefm::PipelineConfig::from_json_file(config_path);
    }
    if (opt_input->count() > 0) cfg.input = input;
    if (opt_output->count() > 0) cfg.output_dir = output_dir;
    if (opt_knn_k->count() > 0) cfg.knn_k = knn_k;
    if (opt_hops->count() > 0) cfg.hops = hops;
    if (opt_alphas->count() > 0) cfg.alphas = alphas;
    if (opt_granularity->count() > 0) cfg.granularity = granularity;
    if (opt_r->count() > 0) cfg.r = r;
    if (opt_algorithm->count() > 0) cfg.algorithm = algorithm;
    if (opt_seed->count() > 0) cfg.seed = seed;
    if (opt_threads->count() > 0) cfg.threads = threads;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"placefm: POI fusion, spatial k-NN graphs and multi-granularity "
               "place embeddings"};
  app.require_subcommand(1);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "join two POI catalogs by proximity and name");
  std::string fuse_primary, fuse_secondary, fuse_out;
  double fuse_radius = 111.0, fuse_min_sim = 0.5;
  int fuse_threads = 0;
  fuse->add_option("--primary", fuse_primary, "primary POI file")->required();
  fuse->add_option("--secondary", fuse_secondary, "secondary POI file")->required();
  fuse->add_option("--out", fuse_out, "fused output (.csv or .jsonl)")->required();
  fuse->add_option("--radius-m", fuse_radius, "join radius in meters (default 111)");
  fuse->add_option("--min-similarity", fuse_min_sim,
                   "keep matches with name similarity strictly above this (default 0.5)");
  fuse->add_option("--threads", fuse_threads, "worker threads");

  // embed
  auto* embed = app.add_subcommand("embed", "run the full place-embedding pipeline");
  CommonPipelineFlags embed_flags;
  embed_flags.attach(embed);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "grid evaluation over k, granularity, algorithm");
  CommonPipelineFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::vector<std::size_t> sweep_ks;
  std::vector<std::string> sweep_grans, sweep_algos;
  std::vector<std::uint64_t> sweep_seeds;
  auto* opt_sweep_ks = sweep->add_option("--knn-ks", sweep_ks, "grid of k values");
  auto* opt_sweep_grans =
      sweep->add_option("--granularities", sweep_grans, "grid of granularities");
  auto* opt_sweep_algos =
      sweep->add_option("--algorithms", sweep_algos, "grid of algorithms");
  auto* opt_sweep_seeds = sweep->add_option("--seeds", sweep_seeds, "grid of seeds");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic POI dataset");
  placefm::SynthParams synth_params;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--n", synth_params.n, "record count (default 300)");
  synth->add_option("--states", synth_params.states, "state count (default 3)");
  synth->add_option("--cities-per-state", synth_params.cities_per_state,
                    "cities per state (default 2)");
  synth->add_option("--blobs-per-city", synth_params.blobs_per_city,
                    "blobs per city (default 2)");
  synth->add_option("--seed", synth_params.seed, "generator seed (default 0)");

  // graph-dump
  auto* dump = app.add_subcommand("graph-dump", "write the k-NN edge list");
  std::string dump_input, dump_out;
  std::size_t dump_k = 5;
  int dump_threads = 0;
  dump->add_option("--input", dump_input, "POI file")->required();
  dump->add_option("--out", dump_out, "edge list output path")->required();
  dump->add_option("--knn-k", dump_k, "neighbors per node (default 5)");
  dump->add_option("--threads", dump_threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fuse->parsed()) {
      const auto summary = placefm::cmd_fuse(fuse_primary, fuse_secondary, fuse_out,
                                             fuse_radius, fuse_min_sim, fuse_threads);
      std::printf("fused %zu of %zu primary records (match rate %.3f) -> %s\n",
                  summary.matched, summary.primary_count, summary.match_rate,
                  summary.fused_path.c_str());
      std::printf("report: %s\n", summary.report_path.c_str());
    } else if (embed->parsed()) {
      const auto summary = placefm::cmd_embed(embed_flags.resolve());
      std::printf("n=%zu d=%zu edges=%zu classes=%zu places=%zu total_wcss=%.6f\n",
                  summary.n, summary.feature_dim, summary.edges, summary.class_count,
                  summary.n_prime, summary.total_wcss);
      std::printf("embeddings: %s\n", summary.places_jsonl.c_str());
    } else if (sweep->parsed()) {
      placefm::PipelineConfig cfg = sweep_flags.resolve();
      if (opt_sweep_ks->count() > 0) cfg.knn_ks = sweep_ks;
      if (opt_sweep_grans->count() > 0) cfg.granularities = sweep_grans;
      if (opt_sweep_algos->count() > 0) cfg.algorithms = sweep_algos;
      if (opt_sweep_seeds->count() > 0) cfg.seeds = sweep_seeds;
      const auto summary = placefm::cmd_sweep(cfg);
      std::cout << placefm::format_sweep_table(summary.result);
      std::printf("sweep CSV: %s\n", summary.csv_path.c_str());
      std::size_t failed = 0;
      for (const auto& cell : summary.result.cells) {
        if (cell.failed) {
          ++failed;
          std::fprintf(stderr, "cell k=%zu %s/%s failed: %s\n", cell.knn_k,
                       cell.granularity.c_str(), placefm::to_string(cell.algorithm),
                       cell.error.c_str());
        }
      }
      if (failed == summary.result.cells.size()) {
        return 1;  // nothing succeeded
      }
    } else if (synth->parsed()) {
      const std::size_t count = placefm::cmd_synth(synth_params, synth_out);
      std::printf("wrote %zu synthetic POIs -> %s\n", count, synth_out.c_str());
    } else if (dump->parsed()) {
      const std::size_t edges = placefm::cmd_graph_dump(dump_input, dump_k, dump_out,
                                                        dump_threads);
      std::printf("wrote %zu edges -> %s\n", edges, dump_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
