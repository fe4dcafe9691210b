#include "partrep/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace partrep::eval {

void write_noise_csv(const std::string& path, const std::string& dataset,
                     const std::vector<NoiseSweepRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("report: cannot write " + path);
  f << "dataset,part,t,accuracy\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.4f", row.accuracy);
    f << dataset << "," << row.part << "," << row.t << "," << buf << "\n";
  }
  if (!f) throw std::runtime_error("report: write failed: " + path);
}

void write_report_json(const std::string& path, const EvalReport& report) {
  json j;
  j["run_id"] = report.run_id;
  j["dataset"] = report.dataset_name;
  j["clean_accuracy"] = report.clean_accuracy;
  json rows = json::array();
  for (const auto& r : report.noise_rows)
    rows.push_back({{"part", r.part}, {"t", r.t}, {"accuracy", r.accuracy}});
  j["noise"] = rows;
  j["figures"] = report.figure_paths;
  j["config"] = report.config_snapshot;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("report: cannot write " + path);
  f << j.dump(1) << "\n";
}

}  // namespace partrep::eval
