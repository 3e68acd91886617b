#pragma once

#include "auxsig/distance.hpp"
#include "auxsig/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace auxsig::cli {

/// Optional solver defaults stored under the "solver" key. Command-line
/// flags take precedence over these, and these over the built-in defaults.
struct SolverDefaults {
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma0;
  std::optional<double> gamma_max;
  std::optional<double> zeta;
  std::optional<int> max_iters;
  std::optional<int> starts;
};

struct ModelFile {
  std::variant<DesignProblem, distance::PhasorModelSpec> content;
  SolverDefaults solver;

  [[nodiscard]] bool is_distance() const {
    return std::holds_alternative<distance::PhasorModelSpec>(content);
  }
  /// The design problem, assembled from the impedances for a distance file.
  [[nodiscard]] DesignProblem problem() const;
};

/// Malformed text or schema; what() names the line or the offending key.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] ModelFile parse_model(std::string_view text);

/// Throws ParseError, also when the file cannot be read.
[[nodiscard]] ModelFile load_model(const std::filesystem::path& path);

}  // namespace auxsig::cli
