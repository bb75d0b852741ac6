#pragma once

#include <iosfwd>

#include "config.hpp"

namespace divprog::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitAcceptance = 2, kExitNumeric = 3 };

// Runs a validated configuration, writing reports under cfg.out.
int run(const ExperimentConfig& cfg, std::ostream& log);

// Full command line: parsing, config merge, validation, run, error mapping.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace divprog::cli
