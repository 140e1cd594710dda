// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace svtk::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kFormat = 3,
  kDomain = 4,
};

/// Runs one invocation. `args` excludes the program name. The JSON report
/// goes to `out` (or to --out); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svtk::cli
