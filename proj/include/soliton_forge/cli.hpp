#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace soliton_forge {

/// Process exit codes of soliton-forge (usage/data/input follow sysexits.h).
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;   // a residual or invariant exceeded its tolerance
inline constexpr int neither = 2;        // classify: structure is neither kind
inline constexpr int empty_profile = 3;  // solve: alpha <= 0 immediately after s_min
inline constexpr int usage = 64;
inline constexpr int data = 65;
inline constexpr int no_input = 66;
}  // namespace exit_code

/// Runs the command line `args` (without the program name). Reports go to `out`,
/// diagnostics to `err`; the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace soliton_forge
