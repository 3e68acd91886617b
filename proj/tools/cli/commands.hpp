#pragma once

#include "auxsig/distance.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace auxsig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotSeparable = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitFaulty = 4;
inline constexpr int kExitAmbiguous = 5;
inline constexpr int kExitInconsistent = 6;

/// Entry point behind the executable. `args` excludes the program name.
/// Documents and CSV go to `out` (or --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 12 significant digits, as used in every document and CSV.
[[nodiscard]] std::string format_number(double value);

[[nodiscard]] std::string grid_csv(const distance::FeasibilityGrid& grid);
[[nodiscard]] std::string sweep_csv(const std::vector<distance::SweepRow>& rows);

}  // namespace auxsig::cli
