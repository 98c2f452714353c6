#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trajlab/modes.hpp"

namespace trajlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataFailure = 2;
inline constexpr int kExitPropertyViolation = 3;

/// Runs one invocation; args[0] is the program name. `rules` replaces the
/// classifier table for mece-check (negative-control tests).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const ModeRules* rules = nullptr);

int main(int argc, char** argv);

}  // namespace trajlab::cli
