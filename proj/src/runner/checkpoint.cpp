#include "partrep/runner/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace partrep::runner {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'C', 'K'};

json header_to_json(const CheckpointHeader& h) {
  json j;
  j["version"] = h.version;
  j["kind"] = h.kind;
  j["meta"] = h.meta;
  json tensors = json::array();
  for (const auto& t : h.tensors)
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", t.offset}, {"bytes", t.bytes}});
  j["tensors"] = tensors;
  return j;
}

CheckpointHeader header_from_json(const json& j) {
  CheckpointHeader h;
  h.version = j.at("version").get<uint32_t>();
  h.kind = j.at("kind").get<std::string>();
  h.meta = j.at("meta");
  for (const auto& t : j.at("tensors")) {
    TensorEntry e;
    e.name = t.at("name").get<std::string>();
    e.shape = t.at("shape").get<std::vector<int64_t>>();
    e.offset = t.at("offset").get<uint64_t>();
    e.bytes = t.at("bytes").get<uint64_t>();
    h.tensors.push_back(std::move(e));
  }
  return h;
}

struct RawHeader {
  CheckpointHeader header;
  uint64_t blob_start = 0;
};

RawHeader read_header(std::ifstream& f, const std::string& path) {
  char magic[4];
  uint32_t version = 0;
  uint64_t header_len = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  f.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: not a checkpoint file: " + path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: incompatible container version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kCheckpointVersion) + "): " + path);
  std::string header_bytes(header_len, '\0');
  f.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
  if (!f) throw std::runtime_error("checkpoint: truncated header: " + path);
  RawHeader out;
  out.header = header_from_json(json::parse(header_bytes));
  out.blob_start = 16 + header_len;
  return out;
}

}  // namespace

const Tensor<float>& Checkpoint::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end())
    throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
  return it->second;
}

void save_checkpoint(const std::string& path, const std::string& kind, const json& meta,
                     const std::vector<std::pair<std::string, const Tensor<float>*>>& tensors) {
  CheckpointHeader h;
  h.kind = kind;
  h.meta = meta;
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    TensorEntry e;
    e.name = name;
    e.shape = t->shape();
    e.offset = offset;
    e.bytes = static_cast<uint64_t>(t->numel()) * sizeof(float);
    offset += e.bytes;
    h.tensors.push_back(std::move(e));
  }
  std::string header_bytes = header_to_json(h).dump();
  uint64_t header_len = header_bytes.size();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  f.write(kMagic, 4);
  uint32_t version = kCheckpointVersion;
  f.write(reinterpret_cast<const char*>(&version), sizeof(version));
  f.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  f.write(header_bytes.data(), static_cast<std::streamsize>(header_len));
  for (const auto& [name, t] : tensors)
    f.write(reinterpret_cast<const char*>(t->data()),
            static_cast<std::streamsize>(t->numel() * sizeof(float)));
  if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

CheckpointHeader inspect_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
  return read_header(f, path).header;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
  RawHeader raw = read_header(f, path);

  f.seekg(0, std::ios::end);
  uint64_t file_size = static_cast<uint64_t>(f.tellg());
  uint64_t expected = raw.blob_start;
  for (const auto& t : raw.header.tensors) expected = std::max(expected, raw.blob_start + t.offset + t.bytes);
  if (file_size < expected)
    throw std::runtime_error("checkpoint: truncated blob (integrity check failed): " + path);

  Checkpoint ckpt;
  ckpt.header = raw.header;
  for (const auto& e : raw.header.tensors) {
    Tensor<float> t(e.shape);
    if (static_cast<uint64_t>(t.numel()) * sizeof(float) != e.bytes)
      throw std::runtime_error("checkpoint: manifest shape/bytes mismatch for " + e.name);
    f.seekg(static_cast<std::streamoff>(raw.blob_start + e.offset));
    f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(e.bytes));
    if (!f) throw std::runtime_error("checkpoint: read failed for " + e.name + ": " + path);
    ckpt.tensors.emplace(e.name, std::move(t));
  }
  return ckpt;
}

}  // namespace partrep::runner
