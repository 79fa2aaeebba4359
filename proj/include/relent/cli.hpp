#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relent::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_fails = 1,          // check fails, network unbalanced, or runtime error
  exit_usage = 2,          // bad flags, unreadable or malformed input
  exit_not_monotone = 3,   // an expected-monotone channel increased beyond slack
  exit_inconclusive = 4,
};

/// Runs the command line `relent <args...>`; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a digest, as 16 lowercase hex digits.
std::string content_hash(const std::string& bytes);

}  // namespace relent::cli
