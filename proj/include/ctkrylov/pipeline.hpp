#pragma once

#include <filesystem>

#include "ctkrylov/config.hpp"

namespace ctk {

/// Generate phantom + clean projections + noisy projections (+ metadata) into
/// cfg.output_dir. The emitted metadata file is itself a valid config reproducing
/// the run.
void run_simulate(RunConfig cfg);

/// Reconstruct cfg.projections with the configured solver; writes the volume, two
/// central PGM slices, the convergence CSV and metadata.
void run_reconstruct(RunConfig cfg);

/// Run every solver in cfg.solvers on identical data; per-solver CSVs, a merged wide
/// CSV and a summary table.
void run_compare(RunConfig cfg);

/// Resolve auto (zero) geometry fields in-place to the desk-scale defaults and return
/// the acquisition the run will use.
ConeGeometry resolve_geometry(RunConfig& cfg);

}  // namespace ctk
