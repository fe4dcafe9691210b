#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace partrep::runner {

/// SHA-256 hex of the canonicalized config plus the code-version string;
/// the audit-trail identity of a run.
std::string run_id_for(const nlohmann::json& config, const std::string& code_version);

std::string default_output_root();  // $PARTREP_OUTPUT_ROOT or ./runs

struct RunRecord {
  std::string run_id;
  std::string task;
  nlohmann::json config;
  std::string code_version;
  std::string started_at, finished_at;  // ISO-8601 UTC
  std::vector<std::string> artifacts;   // paths relative to the run dir
  nlohmann::json metrics;

  nlohmann::json to_json() const;
};

/// Exclusive ownership of one run directory for the duration of a run:
/// creates the directory and a lock file, removes the lock on release.
class RunDir {
public:
  RunDir(const std::string& root, const std::string& run_id);
  ~RunDir();
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;
  void write_record(const RunRecord& record) const;

private:
  std::string path_;
  std::string lock_path_;
};

std::string now_iso8601();

}  // namespace partrep::runner
