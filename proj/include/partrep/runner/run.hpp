#pragma once

#include "partrep/runner/config.hpp"
#include "partrep/runner/registry.hpp"

namespace partrep::runner {

/// Dispatches the config to its owning module, writing every artifact and
/// the RunRecord under <out_root>/<run_id>/. Identical configs map to the
/// same run id and directory.
RunRecord run_experiment(const ExperimentConfig& cfg);

}  // namespace partrep::runner
