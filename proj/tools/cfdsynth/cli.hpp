#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cfd::cli {

/// Process exit status of every subcommand.
enum class Exit : int {
    Ok = 0,
    Internal = 1,
    Usage = 2,
    Parse = 3,            // unreadable netlist, library, graph or schedule
    PeriodBelowFloor = 4, // target period below the achievable floor
    IterationCap = 5,     // synthesis stopped before meeting the target
    Verification = 6,     // timing or functional check failed
};

/// Environment variable naming the default cell library file.
inline constexpr const char* kLibraryEnv = "CFDSYNTH_LIBRARY";

/// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cfd::cli
