#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epigain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     ///< I/O and other unexpected errors
inline constexpr int kExitValidation = 2;  ///< usage and schema errors
inline constexpr int kExitNumerical = 3;   ///< numerical or convergence failure

/// Runs the epigain command line in-process. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Removes `--config FILE` from args and splices the file's settings in
/// right after the subcommand name, so explicit flags (which come later)
/// win. Throws ValidationError on unreadable or malformed files.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace epigain::cli
