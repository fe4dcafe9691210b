#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "partrep/runner/run.hpp"

using namespace partrep;
using namespace partrep::runner;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

json tiny_vae_config(const std::string& out_root, uint64_t seed) {
  return json{{"task", "train-vae"},
              {"seed", seed},
              {"out_root", out_root},
              {"dataset",
               {{"source", "synthetic"}, {"count", 48}, {"test_count", 24}, {"image_size", 8},
                {"mode", "biased"}, {"seed", 1000}}},
              {"model",
               {{"type", "vae"}, {"channels", {4, 8}}, {"latent_dim", 6}, {"content_dim", 4},
                {"style_dim", 2}}},
              {"optim", {{"alpha", 0.5}, {"epochs", 2}, {"batch_size", 48}}}};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct CommandResult {
  int exit_code;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  std::string cmd = std::string(PARTREP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) out += buf;
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

}  // namespace

TEST_CASE("parse_config: strict keys and mandatory seed") {
  CHECK_THROWS_WITH_AS(parse_config(json{{"task", "synth-data"}}), doctest::Contains("seed"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(json{{"seed", 1}}), doctest::Contains("task"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(json{{"task", "synth-data"}, {"seed", 1}, {"bogus", 2}}),
                       doctest::Contains("unknown key"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_config(json{{"task", "synth-data"}, {"seed", 1}, {"dataset", {{"modes", "x"}}}}),
      doctest::Contains("unknown key"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(json{{"task", "no-such-task"}, {"seed", 1}}),
                  std::invalid_argument);
}

TEST_CASE("run ids: stable under re-serialization, sensitive to seed") {
  json a = tiny_vae_config("/tmp/partrep_runs", 7);
  json b = tiny_vae_config("/tmp/partrep_runs", 7);
  json c = tiny_vae_config("/tmp/partrep_runs", 8);
  CHECK(run_id_for(a, kCodeVersion) == run_id_for(b, kCodeVersion));
  CHECK(run_id_for(a, kCodeVersion) != run_id_for(c, kCodeVersion));
  CHECK(run_id_for(a, kCodeVersion) != run_id_for(a, "other-version"));

  // parse -> to_json round trip preserves the id
  ExperimentConfig cfg = parse_config(a);
  CHECK(run_id_for(cfg.to_json(), kCodeVersion) ==
        run_id_for(parse_config(cfg.to_json()).to_json(), kCodeVersion));
}

TEST_CASE("checkpoint: truncation and version errors are explicit") {
  std::string path = "/tmp/partrep_trunc.ckpt";
  Tensor<float> t({8});
  for (int64_t i = 0; i < 8; ++i) t[i] = static_cast<float>(i);
  save_checkpoint(path, "vae", json{{"epoch", 0}}, {{"w", &t}});

  std::string bytes = slurp(path);
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(load_checkpoint(path)), doctest::Contains("truncated"),
                       std::runtime_error);

  // corrupt the container version field (bytes 4..7, little endian)
  bytes[4] = 99;
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(load_checkpoint(path)),
                       doctest::Contains("incompatible"), std::runtime_error);

  std::ofstream f("/tmp/partrep_not_ckpt", std::ios::trunc);
  f << "hello";
  f.close();
  CHECK_THROWS_AS(static_cast<void>(inspect_checkpoint("/tmp/partrep_not_ckpt")),
                  std::runtime_error);
}

TEST_CASE("run_experiment: synth -> train -> noise-eval chain with stable ids") {
  std::string root = "/tmp/partrep_runs_chain";
  fs::remove_all(root);

  json train_cfg = tiny_vae_config(root, 7);
  RunRecord train1 = run_experiment(parse_config(train_cfg));
  RunRecord train2 = run_experiment(parse_config(train_cfg));
  CHECK(train1.run_id == train2.run_id);  // idempotent rerun, same id
  std::string ckpt = root + "/" + train1.run_id + "/vae.ckpt";
  CHECK(fs::exists(ckpt));

  json synth = {{"task", "synth-data"}, {"seed", 3}, {"out_root", root},
                {"dataset",
                 {{"source", "synthetic"}, {"count", 16}, {"test_count", 8}, {"image_size", 8},
                  {"mode", "biased"}}}};
  RunRecord synth_rec = run_experiment(parse_config(synth));
  CHECK(fs::exists(root + "/" + synth_rec.run_id + "/dataset/manifest.json"));

  json eval_cfg = {{"task", "noise-eval"}, {"seed", 11}, {"out_root", root},
                   {"dataset",
                    {{"source", "synthetic"}, {"count", 48}, {"test_count", 24},
                     {"image_size", 8}, {"mode", "biased"}, {"seed", 1000}}},
                   {"eval", {{"checkpoint", ckpt}, {"t_values", {1, 2}}}}};
  RunRecord eval1 = run_experiment(parse_config(eval_cfg));
  std::string csv1 = slurp(root + "/" + eval1.run_id + "/noise.csv");
  CHECK(csv1.substr(0, 24) == "dataset,part,t,accuracy\n");
  CHECK(fs::exists(root + "/" + eval1.run_id + "/report.json"));
  CHECK(eval1.metrics.contains("clean_accuracy"));

  // identical config -> byte-identical CSV (report determinism)
  RunRecord eval2 = run_experiment(parse_config(eval_cfg));
  CHECK(slurp(root + "/" + eval2.run_id + "/noise.csv") == csv1);

  // differing seed -> different run id
  json eval_cfg2 = eval_cfg;
  eval_cfg2["seed"] = 12;
  CHECK(run_id_for(parse_config(eval_cfg2).to_json(), kCodeVersion) != eval1.run_id);

  // traverse emits one grid PNG per requested input image
  json trav_cfg = {{"task", "traverse"}, {"seed", 13}, {"out_root", root},
                   {"dataset",
                    {{"source", "synthetic"}, {"count", 48}, {"test_count", 24},
                     {"image_size", 8}, {"mode", "biased"}, {"seed", 1000}}},
                   {"eval", {{"checkpoint", ckpt}, {"images", 2}}}};
  RunRecord trav = run_experiment(parse_config(trav_cfg));
  CHECK(fs::exists(root + "/" + trav.run_id + "/traversal_0.png"));
  CHECK(fs::exists(root + "/" + trav.run_id + "/traversal_1.png"));
  CHECK(trav.metrics.at("images").get<int>() == 2);

  // swap produces figures and the recovery metric
  json swap_cfg = {{"task", "swap"}, {"seed", 14}, {"out_root", root},
                   {"dataset",
                    {{"source", "synthetic"}, {"count", 48}, {"test_count", 24},
                     {"image_size", 8}, {"mode", "unbiased"}, {"seed", 1001}}},
                   {"eval", {{"checkpoint", ckpt}, {"pairs", 3}}}};
  RunRecord swap_rec = run_experiment(parse_config(swap_cfg));
  CHECK(fs::exists(root + "/" + swap_rec.run_id + "/swap_0.png"));
  CHECK(swap_rec.metrics.contains("content_recovery_percent"));

  // report aggregates the records of prior runs
  json rep_cfg = {{"task", "report"}, {"seed", 15}, {"out_root", root},
                  {"eval", {{"runs", {root + "/" + eval1.run_id, root + "/" + trav.run_id}}}}};
  RunRecord rep = run_experiment(parse_config(rep_cfg));
  CHECK(fs::exists(root + "/" + rep.run_id + "/summary.json"));
}

TEST_CASE("run directory lock excludes concurrent owners") {
  std::string root = "/tmp/partrep_runs_lock";
  fs::remove_all(root);
  json synth = {{"task", "synth-data"}, {"seed", 5}, {"out_root", root},
                {"dataset", {{"source", "synthetic"}, {"count", 4}, {"image_size", 8}}}};
  ExperimentConfig cfg = parse_config(synth);
  std::string run_id = run_id_for(cfg.to_json(), kCodeVersion);
  fs::create_directories(root + "/" + run_id);
  {
    std::ofstream lock(root + "/" + run_id + "/.lock");
    lock << "pid 0\n";
  }
  CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("locked"), std::runtime_error);
  fs::remove(root + "/" + run_id + "/.lock");
  RunRecord rec = run_experiment(cfg);
  CHECK(rec.run_id == run_id);
}

TEST_CASE("cli: help, usage errors, and flag-over-file precedence") {
  CommandResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("synth-data") != std::string::npos);

  CommandResult sub_help = run_cli("train-vae --help");
  CHECK(sub_help.exit_code == 0);

  CommandResult missing_seed = run_cli("synth-data --count 4");
  CHECK(missing_seed.exit_code == 1);
  CHECK(missing_seed.output.find("seed") != std::string::npos);

  CommandResult unknown_flag = run_cli("synth-data --seed 1 --no-such-flag 2");
  CHECK(unknown_flag.exit_code == 1);

  // file says biased/count 6; flags override mode and count
  std::string cfg_path = "/tmp/partrep_cli_cfg.json";
  {
    std::ofstream f(cfg_path, std::ios::trunc);
    f << R"({"dataset": {"source": "synthetic", "count": 6, "image_size": 8, "mode": "biased"}})";
  }
  std::string root = "/tmp/partrep_runs_cli";
  fs::remove_all(root);
  CommandResult run = run_cli("synth-data --config " + cfg_path +
                              " --seed 9 --count 10 --mode unbiased --out " + root);
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("\"mode\": \"unbiased\"") != std::string::npos);
  CHECK(run.output.find("\"count\": 10") != std::string::npos);
  CHECK(run.output.find("resolved config") != std::string::npos);

  CommandResult unknown_key = run_cli("synth-data --seed 1 --config /tmp/partrep_bad_cfg.json");
  {
    std::ofstream f("/tmp/partrep_bad_cfg.json", std::ios::trunc);
    f << R"({"datasets": {}})";
  }
  unknown_key = run_cli("synth-data --seed 1 --config /tmp/partrep_bad_cfg.json");
  CHECK(unknown_key.exit_code == 1);
  CHECK(unknown_key.output.find("unknown key") != std::string::npos);
}
