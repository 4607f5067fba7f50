#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace pathlift::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kBadInput = 2, kPrecondition = 3 };

/// Parsed command line. Flags override the matching config keys.
struct Request {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> preset;
  std::optional<int> level;
  std::optional<std::string> coupler;
  std::optional<double> alpha;
  std::optional<double> p;
  std::optional<std::string> norm;
};

/// Runs one subcommand. Without out_dir the primary artifact goes to out;
/// with it every artifact is written to a file there and out lists them.
/// Diagnostics and the seed derivation go to err.
int run(const Request& request, std::ostream& out, std::ostream& err);

}  // namespace pathlift::cli
