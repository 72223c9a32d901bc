#pragma once

// Experiment dispatch: each named experiment runs the corresponding module
// pipeline, writes its run directory and returns a process exit code
// (0 ok, 2 config, 3 non-convergence, 4 certificate violation).

#include "ergoselect/config.hpp"

#include <iosfwd>

namespace ergoselect {

int run_experiment(const RunConfig& config, std::ostream& log);

}  // namespace ergoselect
