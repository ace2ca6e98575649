#pragma once

// CSV emission for paths and experiment results. Every number is written in
// shortest round-trip form, so parsing a cell gives back the exact double.

#include <ostream>
#include <span>
#include <string>

#include "fbmavg/experiments.hpp"
#include "fbmavg/fgn.hpp"

namespace fbmavg {

std::string format_double(double v);

/// path_id,t,value
void write_paths_csv(std::ostream& out, std::span<const FbmPath> paths);

/// replicate,t,x,z for the kept replicates of `run` (first state component).
void write_trajectories_csv(std::ostream& out, const PairedEnsemble& run);

/// t,mse,ci_lo,ci_hi
void write_mse_csv(std::ostream& out, const PairedEnsemble& run);

/// epsilon,sup_mse,mse_ci_lo,mse_ci_hi,exceedance,exc_ci_lo,exc_ci_hi
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

}  // namespace fbmavg
