#include "partrep/runner/config.hpp"

#include <set>
#include <stdexcept>

#include "partrep/forge/idx.hpp"

using nlohmann::json;

namespace partrep::runner {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Task task_from_name(const std::string& name) {
  if (name == "synth-data") return Task::synth_data;
  if (name == "train-vae") return Task::train_vae;
  if (name == "train-byol") return Task::train_byol;
  if (name == "probe") return Task::probe;
  if (name == "noise-eval") return Task::noise_eval;
  if (name == "traverse") return Task::traverse;
  if (name == "swap") return Task::swap_task;
  if (name == "report") return Task::report;
  throw std::invalid_argument("config: unknown task '" + name + "'");
}

const char* task_name(Task task) {
  switch (task) {
    case Task::synth_data: return "synth-data";
    case Task::train_vae: return "train-vae";
    case Task::train_byol: return "train-byol";
    case Task::probe: return "probe";
    case Task::noise_eval: return "noise-eval";
    case Task::traverse: return "traverse";
    case Task::swap_task: return "swap";
    case Task::report: return "report";
  }
  return "?";
}

json ExperimentConfig::to_json() const {
  json j;
  j["task"] = task_name(task);
  j["seed"] = seed;
  if (!out_root.empty()) j["out_root"] = out_root;
  json d;
  d["source"] = dataset.source;
  d["count"] = dataset.count;
  d["test_count"] = dataset.test_count;
  d["image_size"] = dataset.image_size;
  d["mode"] = forge::color_mode_name(dataset.mode);
  if (dataset.seed) d["seed"] = dataset.seed;
  if (!dataset.dir.empty()) d["dir"] = dataset.dir;
  if (!dataset.test_dir.empty()) d["test_dir"] = dataset.test_dir;
  if (!dataset.idx_images.empty()) {
    d["idx_images"] = dataset.idx_images;
    d["idx_labels"] = dataset.idx_labels;
  }
  if (!dataset.idx_test_images.empty()) {
    d["idx_test_images"] = dataset.idx_test_images;
    d["idx_test_labels"] = dataset.idx_test_labels;
  }
  j["dataset"] = d;
  json m;
  m["type"] = model.type;
  if (model.type == "vae") {
    m["channels"] = model.channels;
    m["latent_dim"] = model.latent_dim;
    m["content_dim"] = model.content_dim;
    m["style_dim"] = model.style_dim;
    m["mse_recon"] = model.mse_recon;
    m["symmetrize_elbo"] = model.symmetrize_elbo;
  } else {
    m["backbone"] = model.backbone;
    m["repr_width"] = model.repr_width;
    m["content_dim"] = model.byol_content_dim;
    m["style_dim"] = model.byol_style_dim;
    m["hidden_mult"] = model.hidden_mult;
  }
  j["model"] = m;
  json o;
  o["alpha"] = optim.alpha;
  o["lr"] = optim.lr;
  o["batch_size"] = optim.batch_size;
  o["epochs"] = optim.epochs;
  o["clip_norm"] = optim.clip_norm;
  o["tau_base"] = optim.tau_base;
  o["tau_cosine"] = optim.tau_cosine;
  j["optim"] = o;
  if (model.type == "byol") {
    json a;
    a["out_size"] = augment.out_size;
    a["crop_scale_min"] = augment.crop_scale_min;
    a["crop_scale_max"] = augment.crop_scale_max;
    j["augment"] = a;
  }
  json e;
  if (!eval.checkpoint.empty()) e["checkpoint"] = eval.checkpoint;
  e["t_values"] = eval.t_values;
  e["noise_draws"] = eval.noise_draws;
  e["traversal_t_min"] = eval.traversal_t_min;
  e["traversal_t_max"] = eval.traversal_t_max;
  e["traversal_steps"] = eval.traversal_steps;
  if (!eval.traversal_dims.empty()) e["traversal_dims"] = eval.traversal_dims;
  e["images"] = eval.images;
  e["pairs"] = eval.pairs;
  if (!eval.runs.empty()) e["runs"] = eval.runs;
  j["eval"] = e;
  return j;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, {"task", "seed", "out_root", "dataset", "model", "optim", "augment", "eval"},
             "top level");
  ExperimentConfig cfg;
  if (!j.contains("task")) throw std::invalid_argument("config: missing required 'task'");
  cfg.task = task_from_name(j.at("task").get<std::string>());
  if (!j.contains("seed")) throw std::invalid_argument("config: missing required 'seed'");
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.seed_set = true;
  maybe(j, "out_root", cfg.out_root);

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d,
               {"source", "count", "test_count", "image_size", "mode", "seed", "dir", "test_dir",
                "idx_images", "idx_labels", "idx_test_images", "idx_test_labels"},
               "dataset");
    maybe(d, "source", cfg.dataset.source);
    maybe(d, "count", cfg.dataset.count);
    maybe(d, "test_count", cfg.dataset.test_count);
    maybe(d, "image_size", cfg.dataset.image_size);
    if (d.contains("mode"))
      cfg.dataset.mode = forge::color_mode_from_name(d.at("mode").get<std::string>());
    maybe(d, "seed", cfg.dataset.seed);
    maybe(d, "dir", cfg.dataset.dir);
    maybe(d, "test_dir", cfg.dataset.test_dir);
    maybe(d, "idx_images", cfg.dataset.idx_images);
    maybe(d, "idx_labels", cfg.dataset.idx_labels);
    maybe(d, "idx_test_images", cfg.dataset.idx_test_images);
    maybe(d, "idx_test_labels", cfg.dataset.idx_test_labels);
    if (cfg.dataset.source != "synthetic" && cfg.dataset.source != "idx" &&
        cfg.dataset.source != "dir")
      throw std::invalid_argument("config: dataset.source must be synthetic|idx|dir");
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m,
               {"type", "channels", "latent_dim", "content_dim", "style_dim", "mse_recon",
                "symmetrize_elbo", "backbone", "repr_width", "hidden_mult"},
               "model");
    maybe(m, "type", cfg.model.type);
    if (cfg.model.type != "vae" && cfg.model.type != "byol")
      throw std::invalid_argument("config: model.type must be vae|byol");
    maybe(m, "channels", cfg.model.channels);
    maybe(m, "latent_dim", cfg.model.latent_dim);
    if (cfg.model.type == "vae") {
      maybe(m, "content_dim", cfg.model.content_dim);
      maybe(m, "style_dim", cfg.model.style_dim);
    } else {
      maybe(m, "content_dim", cfg.model.byol_content_dim);
      maybe(m, "style_dim", cfg.model.byol_style_dim);
    }
    maybe(m, "mse_recon", cfg.model.mse_recon);
    maybe(m, "symmetrize_elbo", cfg.model.symmetrize_elbo);
    maybe(m, "backbone", cfg.model.backbone);
    maybe(m, "repr_width", cfg.model.repr_width);
    maybe(m, "hidden_mult", cfg.model.hidden_mult);
  }

  if (j.contains("optim")) {
    const json& o = j.at("optim");
    check_keys(o, {"alpha", "lr", "batch_size", "epochs", "clip_norm", "tau_base", "tau_cosine"},
               "optim");
    maybe(o, "alpha", cfg.optim.alpha);
    maybe(o, "lr", cfg.optim.lr);
    maybe(o, "batch_size", cfg.optim.batch_size);
    maybe(o, "epochs", cfg.optim.epochs);
    maybe(o, "clip_norm", cfg.optim.clip_norm);
    maybe(o, "tau_base", cfg.optim.tau_base);
    maybe(o, "tau_cosine", cfg.optim.tau_cosine);
  }

  if (j.contains("augment")) {
    const json& a = j.at("augment");
    check_keys(a, {"out_size", "crop_scale_min", "crop_scale_max"}, "augment");
    maybe(a, "out_size", cfg.augment.out_size);
    maybe(a, "crop_scale_min", cfg.augment.crop_scale_min);
    maybe(a, "crop_scale_max", cfg.augment.crop_scale_max);
  }

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_keys(e,
               {"checkpoint", "t_values", "noise_draws", "traversal_t_min", "traversal_t_max",
                "traversal_steps", "traversal_dims", "images", "pairs", "runs"},
               "eval");
    maybe(e, "checkpoint", cfg.eval.checkpoint);
    maybe(e, "t_values", cfg.eval.t_values);
    maybe(e, "noise_draws", cfg.eval.noise_draws);
    maybe(e, "traversal_t_min", cfg.eval.traversal_t_min);
    maybe(e, "traversal_t_max", cfg.eval.traversal_t_max);
    maybe(e, "traversal_steps", cfg.eval.traversal_steps);
    maybe(e, "traversal_dims", cfg.eval.traversal_dims);
    maybe(e, "images", cfg.eval.images);
    maybe(e, "pairs", cfg.eval.pairs);
    maybe(e, "runs", cfg.eval.runs);
  }
  return cfg;
}

vae::VaeTrainConfig to_vae_config(const ExperimentConfig& cfg) {
  vae::VaeTrainConfig out;
  out.spec.in_channels = 3;
  out.spec.image_size = cfg.dataset.image_size;
  out.spec.channels = cfg.model.channels;
  out.spec.latent_dim = cfg.model.latent_dim;
  out.spec.content_dim = cfg.model.content_dim;
  out.spec.style_dim = cfg.model.style_dim;
  out.spec.alpha = cfg.optim.alpha;
  out.spec.mse_recon = cfg.model.mse_recon;
  out.spec.symmetrize_elbo = cfg.model.symmetrize_elbo;
  out.epochs = cfg.optim.epochs;
  out.batch_size = cfg.optim.batch_size;
  out.lr = cfg.optim.lr;
  out.clip_norm = cfg.optim.clip_norm;
  out.seed = cfg.seed;
  return out;
}

byol::ByolTrainConfig to_byol_config(const ExperimentConfig& cfg) {
  byol::ByolTrainConfig out;
  if (cfg.model.backbone == "resnet18") {
    out.spec.stem_channels = 64;
    out.spec.stage_channels = {64, 128, 256, 512};
    out.spec.blocks_per_stage = 2;
  } else if (cfg.model.backbone != "desk") {
    throw std::invalid_argument("config: model.backbone must be desk|resnet18");
  }
  out.spec.image_size = cfg.augment.out_size;
  out.spec.repr_width = cfg.model.repr_width;
  out.spec.content_dim = cfg.model.byol_content_dim;
  out.spec.style_dim = cfg.model.byol_style_dim;
  out.spec.alpha = cfg.optim.alpha;
  out.spec.hidden_mult = cfg.model.hidden_mult;
  out.policy = forge::default_two_view_policy(cfg.augment.out_size);
  out.policy.view1.crop_scale_min = cfg.augment.crop_scale_min;
  out.policy.view1.crop_scale_max = cfg.augment.crop_scale_max;
  out.policy.view2.crop_scale_min = cfg.augment.crop_scale_min;
  out.policy.view2.crop_scale_max = cfg.augment.crop_scale_max;
  out.epochs = cfg.optim.epochs;
  out.batch_size = cfg.optim.batch_size;
  out.lr = cfg.optim.lr;
  out.ema.tau_base = cfg.optim.tau_base;
  out.ema.cosine = cfg.optim.tau_cosine;
  out.seed = cfg.seed;
  return out;
}

DatasetBundle make_datasets(const ExperimentConfig& cfg) {
  const DatasetConfig& d = cfg.dataset;
  uint64_t seed = cfg.dataset_seed();
  DatasetBundle out;
  if (d.source == "synthetic") {
    out.train = forge::make_synthetic_colored(d.count, d.image_size, d.mode,
                                              derive_seed(seed, 0x7121u));
    if (d.test_count > 0)
      out.test = forge::make_synthetic_colored(d.test_count, d.image_size, d.mode,
                                               derive_seed(seed, 0x7e57u));
  } else if (d.source == "dir") {
    if (d.dir.empty()) throw std::invalid_argument("config: dataset.dir required for source=dir");
    out.train = forge::load_dataset(d.dir);
    if (!d.test_dir.empty()) out.test = forge::load_dataset(d.test_dir);
  } else {  // idx
    if (d.idx_images.empty() || d.idx_labels.empty())
      throw std::invalid_argument("config: idx_images/idx_labels required for source=idx");
    auto gray = forge::load_idx_pair(d.idx_images, d.idx_labels);
    if (d.count > 0 && static_cast<size_t>(d.count) < gray.size())
      gray.resize(static_cast<size_t>(d.count));
    out.train = forge::make_colored_from_gray(gray, d.mode, derive_seed(seed, 0x7121u));
    if (!d.idx_test_images.empty()) {
      auto gray_test = forge::load_idx_pair(d.idx_test_images, d.idx_test_labels);
      if (d.test_count > 0 && static_cast<size_t>(d.test_count) < gray_test.size())
        gray_test.resize(static_cast<size_t>(d.test_count));
      out.test = forge::make_colored_from_gray(gray_test, d.mode, derive_seed(seed, 0x7e57u));
    }
  }
  return out;
}

}  // namespace partrep::runner
