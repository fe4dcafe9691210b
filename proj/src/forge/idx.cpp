#include "partrep/forge/idx.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace partrep::forge {

namespace {

uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw std::runtime_error("idx: truncated header: " + path);
  return (uint32_t(buf[0]) << 24) | (uint32_t(buf[1]) << 16) | (uint32_t(buf[2]) << 8) |
         uint32_t(buf[3]);
}

}  // namespace

std::vector<GrayImage> load_idx_images(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("idx: cannot open: " + path);
  uint32_t magic = read_u32_be(f, path);
  if (magic != 0x00000803u)
    throw std::runtime_error("idx: bad image magic (expected 0x00000803): " + path);
  uint32_t count = read_u32_be(f, path);
  uint32_t rows = read_u32_be(f, path);
  uint32_t cols = read_u32_be(f, path);
  std::vector<GrayImage> images(count);
  for (uint32_t i = 0; i < count; ++i) {
    GrayImage& img = images[i];
    img.h = static_cast<int>(rows);
    img.w = static_cast<int>(cols);
    img.pixels.resize(static_cast<size_t>(rows) * cols);
    f.read(reinterpret_cast<char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
    if (!f) throw std::runtime_error("idx: truncated image payload: " + path);
  }
  return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("idx: cannot open: " + path);
  uint32_t magic = read_u32_be(f, path);
  if (magic != 0x00000801u)
    throw std::runtime_error("idx: bad label magic (expected 0x00000801): " + path);
  uint32_t count = read_u32_be(f, path);
  std::vector<unsigned char> raw(count);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (!f) throw std::runtime_error("idx: truncated label payload: " + path);
  return std::vector<int>(raw.begin(), raw.end());
}

std::vector<GrayImage> load_idx_pair(const std::string& images_path,
                                     const std::string& labels_path) {
  auto images = load_idx_images(images_path);
  auto labels = load_idx_labels(labels_path);
  if (images.size() != labels.size())
    throw std::runtime_error("idx: image/label count mismatch (" +
                             std::to_string(images.size()) + " vs " +
                             std::to_string(labels.size()) + ")");
  for (size_t i = 0; i < images.size(); ++i) images[i].label = labels[i];
  return images;
}

}  // namespace partrep::forge
