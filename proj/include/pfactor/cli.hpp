#pragma once

#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

namespace pfactor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitBreakdown = 4;

struct CommandRequest {
  std::string command;  // analyze | solve | kkt | optimality | cone | interp | certify
  std::string problem_path;
  /// Raw option values keyed by flag name without dashes ("x0", "max_iters", ...).
  /// Vectors are JSON arrays.
  std::map<std::string, std::string> options;
};

/// Every default used by the commands.
nlohmann::json default_config();

/// Runs one command, writing artifacts under options["out"] (default "pfactor_out").
/// Returns 0 on success, 2 for parse or validation errors, 3 for violated
/// preconditions and 4 for solver breakdown.
int run(const CommandRequest& request, std::ostream& out, std::ostream& err);

}  // namespace pfactor::cli
