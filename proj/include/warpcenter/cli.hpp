#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace warpcenter::cli {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kSegmentationEmpty = 3,
  kDisconnected = 4,
  kDuplicates = 5,
};

/// Runs one command line; args[0] is the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace warpcenter::cli
