#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "partrep/eval/noise.hpp"

namespace partrep::eval {

/// Structured record of one evaluation run; the config snapshot is the
/// fully resolved configuration, sufficient to rerun.
struct EvalReport {
  std::string run_id;
  std::string dataset_name;
  double clean_accuracy = 0;
  std::vector<NoiseSweepRow> noise_rows;
  std::vector<std::string> figure_paths;
  nlohmann::json config_snapshot;
};

/// CSV mirroring the noise tables: header dataset,part,t,accuracy with
/// fixed 4-decimal accuracies ('.' decimal separator).
void write_noise_csv(const std::string& path, const std::string& dataset,
                     const std::vector<NoiseSweepRow>& rows);

void write_report_json(const std::string& path, const EvalReport& report);

}  // namespace partrep::eval
