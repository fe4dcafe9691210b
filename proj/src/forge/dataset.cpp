#include "partrep/forge/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "partrep/io/png.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace partrep::forge {

std::vector<int> ColoredDataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.image.label);
  return out;
}

ColoredDataset make_synthetic_colored(int count, int image_size, ColorMode mode, uint64_t seed) {
  SynthSpec spec;
  spec.count = count;
  spec.image_size = image_size;
  spec.seed = derive_seed(seed, 0x57a7u);
  auto gray = synth_glyphs(spec);
  ColoredDataset ds;
  ds.mode = mode;
  ds.seed = seed;
  ds.palette = biased_palette();
  ds.samples = build_colored_mnist(gray, mode, derive_seed(seed, 0xc0deu));
  return ds;
}

ColoredDataset make_colored_from_gray(const std::vector<GrayImage>& gray, ColorMode mode,
                                      uint64_t seed) {
  ColoredDataset ds;
  ds.mode = mode;
  ds.seed = seed;
  ds.palette = biased_palette();
  ds.samples = build_colored_mnist(gray, mode, derive_seed(seed, 0xc0deu));
  return ds;
}

namespace {

std::string sample_name(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu.png", i);
  return buf;
}

}  // namespace

void save_dataset(const ColoredDataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["format_version"] = 1;
  manifest["mode"] = color_mode_name(ds.mode);
  manifest["seed"] = ds.seed;
  json palette = json::array();
  for (const auto& c : ds.palette.colors) palette.push_back({c[0], c[1], c[2]});
  manifest["palette"] = palette;
  json samples = json::array();
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    std::string name = sample_name(i);
    io::write_png_rgb((fs::path(dir) / name).string(), ds.samples[i].image);
    samples.push_back({{"file", name}, {"label", ds.samples[i].image.label}});
  }
  manifest["samples"] = samples;
  std::ofstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("dataset: cannot write manifest in " + dir);
  f << manifest.dump(1) << "\n";
}

ColoredDataset load_dataset(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("dataset: missing manifest.json in " + dir);
  json manifest = json::parse(f);
  if (manifest.at("format_version").get<int>() != 1)
    throw std::runtime_error("dataset: unsupported manifest version in " + dir);
  ColoredDataset ds;
  ds.mode = color_mode_from_name(manifest.at("mode").get<std::string>());
  ds.seed = manifest.at("seed").get<uint64_t>();
  const auto& palette = manifest.at("palette");
  for (size_t i = 0; i < ds.palette.colors.size(); ++i)
    for (int c = 0; c < 3; ++c)
      ds.palette.colors[i][static_cast<size_t>(c)] = palette.at(i).at(static_cast<size_t>(c)).get<int>();
  for (const auto& entry : manifest.at("samples")) {
    ColoredMnistSample s;
    s.mode = ds.mode;
    s.image = io::read_png_rgb((fs::path(dir) / entry.at("file").get<std::string>()).string());
    s.image.label = entry.at("label").get<int>();
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace partrep::forge
