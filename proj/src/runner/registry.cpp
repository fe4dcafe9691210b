#include "partrep/runner/registry.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace partrep::runner {

std::string run_id_for(const json& config, const std::string& code_version) {
  // nlohmann::json keeps object keys sorted, so dump() is canonical.
  std::string payload = config.dump() + "\n" + code_version;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(payload.data(), payload.size(), digest, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("registry: SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out.substr(0, 16);
}

std::string default_output_root() {
  if (const char* env = std::getenv("PARTREP_OUTPUT_ROOT"))
    if (*env) return env;
  return "runs";
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json RunRecord::to_json() const {
  json j;
  j["run_id"] = run_id;
  j["task"] = task;
  j["config"] = config;
  j["code_version"] = code_version;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["artifacts"] = artifacts;
  j["metrics"] = metrics;
  return j;
}

RunDir::RunDir(const std::string& root, const std::string& run_id) {
  path_ = (fs::path(root) / run_id).string();
  fs::create_directories(path_);
  lock_path_ = (fs::path(path_) / ".lock").string();
  if (fs::exists(lock_path_))
    throw std::runtime_error("registry: run " + run_id + " is locked by another process (" +
                             lock_path_ + ")");
  std::ofstream lock(lock_path_, std::ios::trunc);
  if (!lock) throw std::runtime_error("registry: cannot create lock in " + path_);
  lock << "pid " << ::getpid() << "\n";
}

RunDir::~RunDir() {
  std::error_code ec;
  fs::remove(lock_path_, ec);
}

std::string RunDir::file(const std::string& name) const {
  return (fs::path(path_) / name).string();
}

void RunDir::write_record(const RunRecord& record) const {
  std::ofstream f(file("record.json"), std::ios::trunc);
  if (!f) throw std::runtime_error("registry: cannot write record.json in " + path_);
  f << record.to_json().dump(1) << "\n";
}

}  // namespace partrep::runner
