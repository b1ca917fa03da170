#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddlure/sdp.hpp"

namespace ddlure::cli {

enum ExitCode : int {
  kOk = 0,
  kStructural = 1,
  kInfeasible = 2,
  kVerifyFailed = 3,
  kInconclusive = 4,
};

// `args` excludes the program name. Nothing is written to std::cout or
// std::cerr directly, which keeps the commands testable in-process.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

struct DemoOptions {
  std::uint64_t seed = 7;
  SolveOptions solve;
  double eps = 1e-7;
  std::string report;  // optional JSON verification report
};

// example1 | example2 | example3 | dt-random
int run_demo(const std::string& name, const DemoOptions& opts,
             std::ostream& out, std::ostream& err);

}  // namespace ddlure::cli
