#include "placefm/pipeline.hpp"

#include <cstdlib>
#include <set>

#include "doctest.h"
#include "placefm/condense.hpp"
#include "placefm/parallel.hpp"
#include "test_support.hpp"

using namespace placefm;
namespace ts = test_support;

TEST_CASE("cmd_synth writes the declared structure deterministically") {
  ts::TempDir dir("synth");
  SynthParams params;
  params.n = 300;
  params.states = 3;
  params.cities_per_state = 2;
  params.seed = 12;

  CHECK(cmd_synth(params, dir.file("a.csv")) == 300);
  const auto records = load_pois(dir.file("a.csv"));
  REQUIRE(records.size() == 300);

  std::set<std::string> states, cities;
  for (const auto& r : records) {
    states.insert(r.admin.at("state"));
    cities.insert(r.admin.at("city"));
    CHECK(r.category_path.size() == 3);
  }
  CHECK(states.size() == 3);
  CHECK(cities.size() == 6);

  SUBCASE("same seed is byte-identical, different seed is not") {
    cmd_synth(params, dir.file("b.csv"));
    CHECK(ts::read_file(dir.file("a.csv")) == ts::read_file(dir.file("b.csv")));
    params.seed = 13;
    cmd_synth(params, dir.file("c.csv"));
    CHECK(ts::read_file(dir.file("a.csv")) != ts::read_file(dir.file("c.csv")));
  }
  SUBCASE("n = 1 yields a single valid row") {
    params.n = 1;
    CHECK(cmd_synth(params, dir.file("one.csv")) == 1);
    CHECK(load_pois(dir.file("one.csv")).size() == 1);
  }
  SUBCASE("invalid counts are rejected") {
    params.states = 0;
    CHECK_THROWS_AS(static_cast<void>(cmd_synth(params, dir.file("x.csv"))),
                    std::invalid_argument);
  }
}

TEST_CASE("synthetic taxonomy reaches the full 10-column encoding") {
  const auto records = generate_synthetic_pois({2000, 3, 2, 2, 1});
  const auto vocab = build_vocabulary(records, 3);
  CHECK(vocab.dimension() == 10);
  CHECK(vocab.levels[0].size() == 2);
  CHECK(vocab.levels[1].size() == 3);
  CHECK(vocab.levels[2].size() == 5);
}

TEST_CASE("cmd_fuse reports match statistics") {
  ts::TempDir dir("fuse");
  ts::write_file(dir.file("primary.csv"),
                 "id,name,lon,lat,category,state,city,zip\n"
                 "p1,Blue Bottle,0.0000,0.0,Cafe,GA,Atlanta,1\n"
                 "p2,Taqueria,0.0500,0.0,Food,GA,Atlanta,1\n"
                 "p3,Books,0.1000,0.0,Retail,GA,Atlanta,1\n");
  ts::write_file(dir.file("secondary.csv"),
                 "id,name,lon,lat,category,state,city,zip\n"
                 "s1,Blue Bottle,0.0002,0.0,Cafe,,,\n"
                 "s2,Laundry,0.0502,0.0,Other,,,\n"
                 "s3,Far Away,3.0,0.0,Other,,,\n");

  const auto summary =
      cmd_fuse(dir.file("primary.csv"), dir.file("secondary.csv"), dir.file("fused.csv"));
  CHECK(summary.primary_count == 3);
  CHECK(summary.matched == 1);
  CHECK(summary.match_rate == doctest::Approx(1.0 / 3.0));
  const std::string fused = ts::read_file(dir.file("fused.csv"));
  CHECK(fused.find("p1") != std::string::npos);
  CHECK(fused.find("p2") == std::string::npos);
  const std::string report = ts::read_file(summary.report_path);
  CHECK(report.find("\"matched\": 1") != std::string::npos);
  CHECK(report.find("similarity_histogram") != std::string::npos);

  SUBCASE("empty secondary is a clean zero-match run") {
    ts::write_file(dir.file("empty.csv"), "id,name,lon,lat,category,state,city,zip\n");
    const auto none =
        cmd_fuse(dir.file("primary.csv"), dir.file("empty.csv"), dir.file("none.csv"));
    CHECK(none.matched == 0);
    CHECK(ts::read_file(dir.file("none.csv")).find("p1") == std::string::npos);
  }
  SUBCASE("bad input propagates a line-numbered error") {
    ts::write_file(dir.file("bad.csv"),
                   "id,name,lon,lat,category,state,city,zip\np1,A,zzz,0,C,,,\n");
    CHECK_THROWS_WITH_AS(
        static_cast<void>(cmd_fuse(dir.file("bad.csv"), dir.file("secondary.csv"),
                                   dir.file("out.csv"))),
        doctest::Contains(":2:"), std::runtime_error);
  }
}

TEST_CASE("cmd_embed end to end on synthetic data") {
  ts::TempDir dir("embed");
  cmd_synth({300, 3, 2, 2, 21}, dir.file("pois.csv"));

  PipelineConfig config;
  config.input = dir.file("pois.csv");
  config.output_dir = dir.file("out");
  config.granularity = "state";
  config.r = 0.1;
  config.seed = 4;

  const auto summary = cmd_embed(config);
  CHECK(summary.n == 300);
  CHECK(summary.class_count == 3);

  // Expected place count comes straight from the allocation rule.
  const auto records = load_pois(config.input);
  const auto labeling = labeling_for(records, "state");
  const auto plan = allocate_clusters(labeling.class_sizes(), 0.1);
  CHECK(summary.n_prime == plan.n_prime);

  // Every state appears among the emitted places.
  const std::string places = ts::read_file(summary.places_jsonl);
  for (const auto& cls : labeling.classes) {
    CHECK(places.find("state:" + cls + ":") != std::string::npos);
  }

  // The manifest's content fields are deterministic; timing is separate.
  const std::string manifest = ts::read_file(summary.manifest_path);
  CHECK(manifest.find("\"n_prime\": " + std::to_string(plan.n_prime)) !=
        std::string::npos);
  CHECK(manifest.find("timing_ms") != std::string::npos);

  SUBCASE("r = 1 emits one place per node with zero cost") {
    config.r = 1.0;
    config.output_dir = dir.file("identity");
    const auto identity = cmd_embed(config);
    CHECK(identity.n_prime == 300);
    CHECK(identity.total_wcss == 0.0);
  }
  SUBCASE("missing granularity fails with the field name") {
    config.granularity = "county";
    config.output_dir = dir.file("broken");
    CHECK_THROWS_WITH_AS(static_cast<void>(cmd_embed(config)),
                         doctest::Contains("county"), std::runtime_error);
  }
  SUBCASE("the resolved config reproduces the run byte for byte") {
    PipelineConfig echoed =
        PipelineConfig::from_json_file(summary.resolved_config_path);
    echoed.output_dir = dir.file("replay");
    const auto replay = cmd_embed(echoed);
    CHECK(ts::read_file(replay.places_jsonl) == ts::read_file(summary.places_jsonl));
    CHECK(ts::read_file(replay.places_csv) == ts::read_file(summary.places_csv));
  }
  SUBCASE("thread counts do not change the embedding bytes") {
    config.threads = 7;
    config.output_dir = dir.file("threaded");
    const auto threaded = cmd_embed(config);
    CHECK(ts::read_file(threaded.places_jsonl) == ts::read_file(summary.places_jsonl));
  }
}

TEST_CASE("cmd_embed honors kmedoids centers") {
  ts::TempDir dir("embed_med");
  cmd_synth({150, 2, 2, 1, 3}, dir.file("pois.csv"));
  PipelineConfig config;
  config.input = dir.file("pois.csv");
  config.output_dir = dir.file("out");
  config.algorithm = "kmedoids";
  config.r = 0.05;
  const auto summary = cmd_embed(config);
  CHECK(summary.n_prime >= 2);
}

TEST_CASE("cmd_sweep writes csv, table and resolved config") {
  ts::TempDir dir("sweep_cmd");
  cmd_synth({200, 2, 2, 1, 8}, dir.file("pois.csv"));
  PipelineConfig config;
  config.input = dir.file("pois.csv");
  config.output_dir = dir.file("out");
  config.knn_ks = {2, 4};
  config.granularities = {"state"};
  config.algorithms = {"kmeans", "kmedoids"};
  config.seeds = {0, 1, 2};
  config.r = 0.08;

  const auto summary = cmd_sweep(config);
  CHECK(summary.result.cells.size() == 4);
  const std::string csv = ts::read_file(summary.csv_path);
  CHECK(csv.find("2,state,kmeans,") != std::string::npos);
  const std::string table = ts::read_file(summary.table_path);
  CHECK(table.find("Average") != std::string::npos);
  CHECK(ts::read_file(summary.resolved_config_path).find("\"r\": 0.08") !=
        std::string::npos);
}

TEST_CASE("cmd_graph_dump writes a sorted edge list") {
  ts::TempDir dir("dump");
  ts::write_file(dir.file("pois.csv"),
                 "id,name,lon,lat,category,state,city,zip\n"
                 "a,A,0.000,0,C,,,\n"
                 "b,B,0.001,0,C,,,\n"
                 "c,C,0.002,0,C,,,\n");
  CHECK(cmd_graph_dump(dir.file("pois.csv"), 1, dir.file("edges.tsv")) == 2);
  CHECK(ts::read_file(dir.file("edges.tsv")) == "a\tb\nb\tc\n");
}

TEST_CASE("thread count resolution falls back to the environment") {
  unsetenv("PLACEFM_THREADS");
  CHECK(resolve_thread_count(4) == 4);
  CHECK(resolve_thread_count(0) == 1);
  setenv("PLACEFM_THREADS", "6", 1);
  CHECK(resolve_thread_count(0) == 6);
  CHECK(resolve_thread_count(2) == 2);  // explicit value wins
  setenv("PLACEFM_THREADS", "bogus", 1);
  CHECK(resolve_thread_count(0) == 1);
  unsetenv("PLACEFM_THREADS");
}

TEST_CASE("config file loading with overrides and validation") {
  ts::TempDir dir("config");
  ts::write_file(dir.file("config.json"),
                 R"({"input": "in.csv", "knn_k": 7, "r": 0.25,
                     "alphas": [0.2, 0.8], "hops": 1, "seeds": [3, 4]})");
  const auto config = PipelineConfig::from_json_file(dir.file("config.json"));
  CHECK(config.input == "in.csv");
  CHECK(config.knn_k == 7);
  CHECK(config.r == 0.25);
  CHECK(config.hops == 1);
  CHECK(config.alphas == std::vector<double>{0.2, 0.8});
  CHECK(config.seeds == std::vector<std::uint64_t>{3, 4});
  // Untouched fields keep their defaults.
  CHECK(config.algorithm == "kmeans");
  CHECK(config.granularity == "state");

  SUBCASE("unknown keys are rejected") {
    ts::write_file(dir.file("typo.json"), R"({"knnk": 7})");
    CHECK_THROWS_WITH_AS(
        static_cast<void>(PipelineConfig::from_json_file(dir.file("typo.json"))),
        doctest::Contains("knnk"), std::runtime_error);
  }
  SUBCASE("invalid json is rejected") {
    ts::write_file(dir.file("broken.json"), "{");
    CHECK_THROWS_AS(
        static_cast<void>(PipelineConfig::from_json_file(dir.file("broken.json"))),
        std::runtime_error);
  }
}
