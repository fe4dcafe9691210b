#include "partrep/runner/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "partrep/eval/figures.hpp"
#include "partrep/eval/noise.hpp"
#include "partrep/eval/probe.hpp"
#include "partrep/eval/report.hpp"
#include "partrep/eval/traversal.hpp"
#include "partrep/io/png.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace partrep::runner {

namespace {

double epoch_mean_total(const std::vector<vae::StepLoss>& history, int64_t begin, int64_t end) {
  double acc = 0;
  for (int64_t i = begin; i < end; ++i) acc += history[static_cast<size_t>(i)].total;
  return end > begin ? acc / static_cast<double>(end - begin) : 0.0;
}

struct ProbeBundle {
  eval::LinearProbe probe;
  Tensor<float> mu_train, mu_test;
  std::vector<int> labels_train, labels_test;
};

ProbeBundle fit_vae_probe(const vae::VaeModel<float>& model, const DatasetBundle& data,
                          uint64_t seed) {
  ProbeBundle out;
  Tensor<float> train_images = vae::dataset_to_tensor(data.train);
  out.mu_train = vae::encode_mu(model, train_images);
  out.labels_train = data.train.labels();
  eval::ProbeConfig pcfg;
  pcfg.seed = seed;
  out.probe = eval::fit_probe(out.mu_train, out.labels_train, pcfg);
  if (!data.test.samples.empty()) {
    Tensor<float> test_images = vae::dataset_to_tensor(data.test);
    out.mu_test = vae::encode_mu(model, test_images);
    out.labels_test = data.test.labels();
  }
  return out;
}

void run_synth_data(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  DatasetBundle bundle = make_datasets(cfg);
  forge::save_dataset(bundle.train, dir.file("dataset"));
  record.artifacts.push_back("dataset");
  if (!bundle.test.samples.empty()) {
    forge::save_dataset(bundle.test, dir.file("dataset_test"));
    record.artifacts.push_back("dataset_test");
  }
  record.metrics["train_count"] = bundle.train.size();
  record.metrics["test_count"] = bundle.test.size();
  record.metrics["mode"] = forge::color_mode_name(bundle.train.mode);
}

void run_train_vae(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  DatasetBundle bundle = make_datasets(cfg);
  vae::VaeTrainConfig tcfg = to_vae_config(cfg);
  std::string ckpt_path = dir.file("vae.ckpt");
  vae::VaeTrainResult result = vae::train_vae(tcfg, bundle.train, nullptr, &ckpt_path);
  record.artifacts.push_back("vae.ckpt");
  int64_t steps = static_cast<int64_t>(result.history.size());
  int64_t per_epoch = std::max<int64_t>(1, steps / std::max(1, result.epoch));
  record.metrics["steps"] = steps;
  record.metrics["first_epoch_mean_loss"] = epoch_mean_total(result.history, 0, per_epoch);
  record.metrics["final_epoch_mean_loss"] =
      epoch_mean_total(result.history, steps - per_epoch, steps);
}

void run_train_byol(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  DatasetBundle bundle = make_datasets(cfg);
  byol::ByolTrainConfig tcfg = to_byol_config(cfg);
  std::string ckpt_path = dir.file("byol.ckpt");
  byol::ByolTrainResult result = byol::train_byol(tcfg, bundle.train, nullptr, &ckpt_path);
  record.artifacts.push_back("byol.ckpt");
  int64_t steps = static_cast<int64_t>(result.history.size());
  int64_t per_epoch = std::max<int64_t>(1, steps / std::max(1, result.epoch));
  auto mean_range = [&](int64_t b, int64_t e) {
    double acc = 0;
    for (int64_t i = b; i < e; ++i) acc += result.history[static_cast<size_t>(i)];
    return e > b ? acc / static_cast<double>(e - b) : 0.0;
  };
  record.metrics["steps"] = steps;
  record.metrics["first_epoch_mean_loss"] = mean_range(0, per_epoch);
  record.metrics["final_epoch_mean_loss"] = mean_range(steps - per_epoch, steps);
}

vae::VaeModel<float> load_vae_from(const std::string& path) {
  if (path.empty())
    throw std::invalid_argument("config: eval.checkpoint is required for this task");
  return vae::load_vae_model(load_checkpoint(path));
}

void run_probe(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  Checkpoint ckpt = load_checkpoint(cfg.eval.checkpoint);
  DatasetBundle bundle = make_datasets(cfg);
  Tensor<float> feat_train, feat_test;
  std::vector<int> labels_train = bundle.train.labels();
  std::vector<int> labels_test = bundle.test.labels();
  json meta;
  if (ckpt.header.kind == "vae") {
    vae::VaeModel<float> model = vae::load_vae_model(ckpt);
    feat_train = vae::encode_mu(model, vae::dataset_to_tensor(bundle.train));
    if (!bundle.test.samples.empty())
      feat_test = vae::encode_mu(model, vae::dataset_to_tensor(bundle.test));
    meta["features"] = "vae_mu";
  } else {
    byol::ByolNetworks nets = byol::load_byol(ckpt);
    feat_train = byol::project_all(nets.online, vae::dataset_to_tensor(bundle.train));
    if (!bundle.test.samples.empty())
      feat_test = byol::project_all(nets.online, vae::dataset_to_tensor(bundle.test));
    meta["features"] = "byol_projection";
  }
  eval::ProbeConfig pcfg;
  pcfg.seed = cfg.seed;
  eval::LinearProbe probe = eval::fit_probe(feat_train, labels_train, pcfg);
  meta["train_accuracy"] = probe.accuracy(feat_train, labels_train);
  record.metrics["train_accuracy"] = meta["train_accuracy"];
  if (feat_test.numel() > 0) {
    record.metrics["test_accuracy"] = probe.accuracy(feat_test, labels_test);
    meta["test_accuracy"] = record.metrics["test_accuracy"];
  }
  meta["epochs_run"] = probe.epochs_run;
  save_checkpoint(dir.file("probe.ckpt"), "probe", meta,
                  {{"weight", &probe.weight}, {"bias", &probe.bias}});
  record.artifacts.push_back("probe.ckpt");
}

void run_noise_eval(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  vae::VaeModel<float> model = load_vae_from(cfg.eval.checkpoint);
  DatasetBundle bundle = make_datasets(cfg);
  if (bundle.test.samples.empty())
    throw std::invalid_argument("noise-eval: a test split is required (dataset.test_count/test_dir)");
  ProbeBundle pb = fit_vae_probe(model, bundle, cfg.seed);

  eval::NoiseSweepResult sweep = eval::noise_sweep(
      pb.mu_test, pb.labels_test, pb.probe, model.spec().partition(), cfg.eval.t_values,
      derive_seed(cfg.seed, 0x0153u), cfg.eval.noise_draws);

  std::string dataset_name = forge::color_mode_name(bundle.train.mode);
  eval::write_noise_csv(dir.file("noise.csv"), dataset_name, sweep.rows);
  record.artifacts.push_back("noise.csv");

  eval::EvalReport report;
  report.run_id = record.run_id;
  report.dataset_name = dataset_name;
  report.clean_accuracy = sweep.clean_accuracy;
  report.noise_rows = sweep.rows;
  report.config_snapshot = cfg.to_json();
  eval::write_report_json(dir.file("report.json"), report);
  record.artifacts.push_back("report.json");

  record.metrics["clean_accuracy"] = sweep.clean_accuracy;
  for (const auto& row : sweep.rows)
    if (row.t > 0)
      record.metrics["acc_" + row.part + "_t" + std::to_string(row.t)] = row.accuracy;
}

void run_traverse(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  vae::VaeModel<float> model = load_vae_from(cfg.eval.checkpoint);
  DatasetBundle bundle = make_datasets(cfg);
  Tensor<float> train_images = vae::dataset_to_tensor(bundle.train);
  eval::LatentStats stats = eval::compute_latent_stats(vae::encode_mu(model, train_images));

  const forge::ColoredDataset& source =
      bundle.test.samples.empty() ? bundle.train : bundle.test;
  eval::TraversalConfig tcfg;
  tcfg.t_min = cfg.eval.traversal_t_min;
  tcfg.t_max = cfg.eval.traversal_t_max;
  tcfg.steps = cfg.eval.traversal_steps;
  tcfg.dims = cfg.eval.traversal_dims;
  int count = std::min<int>(cfg.eval.images, static_cast<int>(source.samples.size()));
  for (int i = 0; i < count; ++i) {
    auto chw = to_chw<float>(source.samples[static_cast<size_t>(i)].image);
    eval::TraversalGrid grid = eval::traversal_grid(model, chw, stats, tcfg);
    std::string name = "traversal_" + std::to_string(i) + ".png";
    io::write_png_rgb(dir.file(name), eval::grid_to_image(grid));
    record.artifacts.push_back(name);
  }
  record.metrics["images"] = count;
}

void run_swap(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  vae::VaeModel<float> model = load_vae_from(cfg.eval.checkpoint);
  DatasetBundle bundle = make_datasets(cfg);
  if (bundle.test.samples.empty())
    throw std::invalid_argument("swap: a test split is required");
  ProbeBundle pb = fit_vae_probe(model, bundle, cfg.seed);

  Tensor<float> test_images = vae::dataset_to_tensor(bundle.test);
  int64_t n = test_images.dim(0);
  int64_t per = test_images.numel() / n;
  Rng pair_rng(derive_seed(cfg.seed, 0x50a9u));
  int64_t latent = model.spec().latent_dim;
  int pairs = cfg.eval.pairs;
  int recovered = 0, total = 0;
  int figures = 0;
  for (int p = 0; p < pairs; ++p) {
    int64_t i = pair_rng.uniform_int(0, n - 1);
    int64_t j = pair_rng.uniform_int(0, n - 1);
    Tensor<float> x1({3, test_images.dim(2), test_images.dim(3)});
    Tensor<float> x2(x1.shape());
    std::copy(test_images.data() + i * per, test_images.data() + (i + 1) * per, x1.data());
    std::copy(test_images.data() + j * per, test_images.data() + (j + 1) * per, x2.data());
    eval::StyleSwapFigure fig = eval::style_swap_figure(model, x1, x2);

    // Re-encode both swapped reconstructions and probe their content.
    Tensor<float> batch({2, 3, test_images.dim(2), test_images.dim(3)});
    std::copy(fig.recon_c1_s2.data(), fig.recon_c1_s2.data() + per, batch.data());
    std::copy(fig.recon_c2_s1.data(), fig.recon_c2_s1.data() + per, batch.data() + per);
    typename vae::VaeModel<float>::EncodeCache cache;
    auto lat = model.encode(batch, cache);
    Tensor<float> mu_re({2, latent});
    std::copy(lat.mu.data(), lat.mu.data() + 2 * latent, mu_re.data());
    auto preds = pb.probe.predict(mu_re);
    recovered += preds[0] == pb.labels_test[static_cast<size_t>(i)] ? 1 : 0;
    recovered += preds[1] == pb.labels_test[static_cast<size_t>(j)] ? 1 : 0;
    total += 2;

    if (figures < 8) {
      std::string name = "swap_" + std::to_string(p) + ".png";
      io::write_png_rgb(dir.file(name), eval::swap_figure_image(x1, x2, fig));
      record.artifacts.push_back(name);
      ++figures;
    }
  }
  double rate = total ? 100.0 * recovered / total : 0.0;
  record.metrics["pairs"] = pairs;
  record.metrics["content_recovery_percent"] = rate;

  std::ofstream csv(dir.file("swap.csv"), std::ios::trunc);
  csv << "pairs,content_recovery_percent\n" << pairs << "," << rate << "\n";
  record.artifacts.push_back("swap.csv");
}

void run_report(const ExperimentConfig& cfg, const RunDir& dir, RunRecord& record) {
  json summary = json::array();
  for (const auto& run : cfg.eval.runs) {
    std::ifstream f(fs::path(run) / "record.json");
    if (!f) throw std::runtime_error("report: missing record.json under " + run);
    summary.push_back(json::parse(f));
  }
  std::ofstream out(dir.file("summary.json"), std::ios::trunc);
  out << summary.dump(1) << "\n";
  record.artifacts.push_back("summary.json");
  record.metrics["runs"] = cfg.eval.runs.size();
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.seed_set) throw std::invalid_argument("config: seed is mandatory");
  json config_json = cfg.to_json();
  std::string root = cfg.out_root.empty() ? default_output_root() : cfg.out_root;

  RunRecord record;
  record.run_id = run_id_for(config_json, kCodeVersion);
  record.task = task_name(cfg.task);
  record.config = config_json;
  record.code_version = kCodeVersion;
  record.started_at = now_iso8601();

  RunDir dir(root, record.run_id);
  {
    std::ofstream f(dir.file("config.json"), std::ios::trunc);
    f << config_json.dump(1) << "\n";
  }

  try {
    switch (cfg.task) {
      case Task::synth_data: run_synth_data(cfg, dir, record); break;
      case Task::train_vae: run_train_vae(cfg, dir, record); break;
      case Task::train_byol: run_train_byol(cfg, dir, record); break;
      case Task::probe: run_probe(cfg, dir, record); break;
      case Task::noise_eval: run_noise_eval(cfg, dir, record); break;
      case Task::traverse: run_traverse(cfg, dir, record); break;
      case Task::swap_task: run_swap(cfg, dir, record); break;
      case Task::report: run_report(cfg, dir, record); break;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("run " + record.run_id + " failed: " + e.what());
  }

  record.finished_at = now_iso8601();
  dir.write_record(record);
  return record;
}

}  // namespace partrep::runner
