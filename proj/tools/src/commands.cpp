#include "cli/commands.hpp"

#include "auxsig/ccp.hpp"
#include "auxsig/dual.hpp"
#include "auxsig/sigma.hpp"
#include "cli/model_file.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>

namespace auxsig::cli {

namespace {

using nlohmann::json;

constexpr double kAgreementBand = 1e-6;

struct SharedFlags {
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma0;
  std::optional<double> gamma_max;
  std::optional<double> zeta;
  std::optional<int> max_iters;
  std::optional<int> starts;
  std::string out;
};

void add_shared(CLI::App& app, SharedFlags& flags) {
  app.add_option("--tol", flags.tol, "conic solver tolerance (default 1e-8)");
  app.add_option("--seed", flags.seed, "seed for the random CCP starts (default 0)");
  app.add_option("--gamma0", flags.gamma0, "initial penalty weight (default 1)");
  app.add_option("--gamma-max", flags.gamma_max, "penalty weight cap (default 1e4)");
  app.add_option("--zeta", flags.zeta, "penalty growth factor (default 1.5)");
  app.add_option("--max-iters", flags.max_iters, "CCP iterations per start (default 200)");
  app.add_option("--starts", flags.starts, "number of CCP starts (default 5)");
  app.add_option("--out", flags.out, "write the result here instead of standard output");
}

// Flags win over the model file, which wins over the built-in defaults.
CcpConfig make_config(const SharedFlags& flags, const SolverDefaults& file) {
  CcpConfig config;
  const auto pick = [](auto& field, const auto& flag, const auto& stored) {
    if (flag) {
      field = *flag;
    } else if (stored) {
      field = *stored;
    }
  };
  pick(config.conic_tolerance, flags.tol, file.tol);
  pick(config.rng_seed, flags.seed, file.seed);
  pick(config.gamma0, flags.gamma0, file.gamma0);
  pick(config.gamma_max, flags.gamma_max, file.gamma_max);
  pick(config.zeta, flags.zeta, file.zeta);
  pick(config.max_iters, flags.max_iters, file.max_iters);
  pick(config.n_starts, flags.starts, file.starts);
  validate(config);
  return config;
}

json number_json(double value) {
  if (!std::isfinite(value)) return nullptr;
  return std::strtod(format_number(value).c_str(), nullptr);
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v[i]));
  return out;
}

json optional_json(const std::optional<double>& value) {
  return value ? number_json(*value) : json(nullptr);
}

bool emit(const std::string& text, const std::string& path, std::ostream& out, std::ostream& err) {
  if (path.empty()) {
    out << text;
    out.flush();
    return true;
  }
  std::ofstream file(path, std::ios::binary);
  file << text;
  file.close();
  if (!file) {
    fmt::print(err, "error: cannot write {}\n", path);
    return false;
  }
  return true;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

// Loads and validates; reports problems on `err` and returns nullopt.
std::optional<std::pair<ModelFile, DesignProblem>> load(const std::string& path, std::ostream& err) {
  try {
    ModelFile file = load_model(path);
    if (const auto* spec = std::get_if<distance::PhasorModelSpec>(&file.content)) {
      for (const auto& warning : distance::warnings(*spec)) fmt::print(err, "warning: {}\n", warning);
    }
    DesignProblem problem = file.problem();
    const auto report = validate(problem);
    if (!report.empty()) {
      for (const auto& v : report) fmt::print(err, "error: {}: {}\n", to_string(v.code), v.detail);
      return std::nullopt;
    }
    return std::make_pair(std::move(file), std::move(problem));
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return std::nullopt;
  }
}

bool check_length(const Eigen::VectorXd& v, Eigen::Index expected, const char* flag,
                  std::ostream& err) {
  if (v.size() == expected) return true;
  fmt::print(err, "error: {} needs {} values, got {}\n", flag, expected, v.size());
  return false;
}

int exit_code(DesignStatus status) {
  switch (status) {
    case DesignStatus::Separable:
      return kExitOk;
    case DesignStatus::Inseparable:
      return kExitNotSeparable;
    case DesignStatus::IterLimit:
    case DesignStatus::SolverFailure:
      return kExitSolverFailure;
  }
  return kExitSolverFailure;
}

int cmd_design(const std::string& model_path, const SharedFlags& flags, std::ostream& out,
               std::ostream& err) {
  const auto loaded = load(model_path, err);
  if (!loaded) return kExitUsage;
  const auto& [file, problem] = *loaded;
  CcpConfig config;
  try {
    config = make_config(flags, file.solver);
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }

  const DesignResult result = design(problem, config);
  json doc;
  doc["status"] = to_string(result.status);
  doc["theta"] = vector_json(result.theta_star);
  doc["cost"] = number_json(result.cost);
  doc["sigma_verified"] = number_json(result.sigma_verified);
  doc["iterations"] = result.trace.size();
  doc["start_index"] = result.start_index;
  if (!emit(doc.dump(2) + "\n", flags.out, out, err)) return kExitUsage;
  fmt::print(err, "{}: cost {} after {} iterations (start {})\n", to_string(result.status),
             format_number(result.cost), result.trace.size(), result.start_index);
  return exit_code(result.status);
}

int cmd_verify(const std::string& model_path, const std::vector<double>& theta_values,
               const SharedFlags& flags, std::ostream& out, std::ostream& err) {
  const auto loaded = load(model_path, err);
  if (!loaded) return kExitUsage;
  const auto& [file, problem] = *loaded;
  const Eigen::VectorXd theta = to_vector(theta_values);
  if (!check_length(theta, problem.signal_dim(), "--theta", err)) return kExitUsage;
  const double tol = flags.tol.value_or(file.solver.tol.value_or(conic::kDefaultTolerance));
  if (!(tol > 0.0)) {
    fmt::print(err, "error: --tol must be positive\n");
    return kExitUsage;
  }

  const SigmaResult primal = evaluate_sigma(problem, theta, tol);
  const SeparabilityCheck dual = check_separability(problem, theta, tol);
  const double bound_sq = problem.noise_bound * problem.noise_bound;

  std::optional<double> ratio;
  if (primal.status == SigmaStatus::Optimal) ratio = primal.sigma / bound_sq;
  if (primal.status == SigmaStatus::Infeasible) ratio = std::numeric_limits<double>::infinity();

  json doc;
  doc["sigma"] = ratio ? number_json(primal.sigma) : json(nullptr);
  doc["sigma_status"] = to_string(primal.status);
  doc["dual_status"] = to_string(dual.status);

  int code = kExitOk;
  bool separable = false;
  if (!ratio || dual.status == SeparabilityStatus::SolverFailure) {
    fmt::print(err, "error: solver failure (sigma {}, dual {})\n", to_string(primal.status),
               to_string(dual.status));
    code = kExitSolverFailure;
  } else {
    const bool primal_separable = *ratio >= 1.0;
    separable = dual.separable();
    if (primal_separable != separable && std::abs(*ratio - 1.0) > kAgreementBand) {
      fmt::print(err, "error: primal and dual verdicts disagree (sigma / bound^2 = {})\n",
                 format_number(*ratio));
      code = kExitSolverFailure;
    } else {
      code = separable ? kExitOk : kExitNotSeparable;
    }
  }
  doc["separable"] = separable;
  if (!emit(doc.dump(2) + "\n", flags.out, out, err)) return kExitUsage;
  return code;
}

struct GridFlags {
  double re_min = -3.0, re_max = 3.0, im_min = -3.0, im_max = 3.0;
  int n = 41;
  std::size_t workers = 0;
};

int cmd_grid(const std::string& model_path, const GridFlags& grid_flags, const SharedFlags& flags,
             std::ostream& out, std::ostream& err) {
  const auto loaded = load(model_path, err);
  if (!loaded) return kExitUsage;
  const auto& [file, problem] = *loaded;
  const double tol = flags.tol.value_or(file.solver.tol.value_or(conic::kDefaultTolerance));
  distance::GridAxes axes{grid_flags.re_min, grid_flags.re_max, grid_flags.im_min,
                          grid_flags.im_max, grid_flags.n,      grid_flags.n};
  distance::FeasibilityGrid grid;
  try {
    grid = distance::feasibility_grid(problem, axes, tol, grid_flags.workers);
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }
  if (!emit(grid_csv(grid), flags.out, out, err)) return kExitUsage;
  fmt::print(err, "{} feasible, {} infeasible, {} errors\n",
             grid.count(distance::CellState::Feasible), grid.count(distance::CellState::Infeasible),
             grid.count(distance::CellState::Error));
  return kExitOk;
}

struct SweepFlags {
  double xf_min = 12.0;
  double xf_max = 58.0;
  int n = 24;
  std::size_t workers = 0;
};

int cmd_sweep(const std::string& model_path, const SweepFlags& sweep_flags,
              const SharedFlags& flags, std::ostream& out, std::ostream& err) {
  const auto loaded = load(model_path, err);
  if (!loaded) return kExitUsage;
  const auto& [file, problem] = *loaded;
  if (!file.is_distance()) {
    fmt::print(err, "error: sweep needs a distance spec (z_minus, z_plus, z_fault)\n");
    return kExitUsage;
  }
  std::vector<distance::SweepRow> rows;
  try {
    const CcpConfig config = make_config(flags, file.solver);
    rows = distance::sweep_xf(std::get<distance::PhasorModelSpec>(file.content), sweep_flags.xf_min,
                              sweep_flags.xf_max, sweep_flags.n, config, sweep_flags.workers);
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }
  if (!emit(sweep_csv(rows), flags.out, out, err)) return kExitUsage;
  return kExitOk;
}

int cmd_detect(const std::string& model_path, const std::vector<double>& theta_values,
               const std::vector<double>& x_values, const SharedFlags& flags, std::ostream& out,
               std::ostream& err) {
  const auto loaded = load(model_path, err);
  if (!loaded) return kExitUsage;
  const auto& problem = loaded->second;
  const Eigen::VectorXd theta = to_vector(theta_values);
  const Eigen::VectorXd x_obs = to_vector(x_values);
  if (!check_length(theta, problem.signal_dim(), "--theta", err) ||
      !check_length(x_obs, problem.meas_dim(), "--x-obs", err)) {
    return kExitUsage;
  }
  const Classification result = classify(problem, theta, x_obs);
  json doc;
  doc["verdict"] = to_string(result.verdict);
  doc["rho0"] = optional_json(result.rho0);
  doc["rho1"] = optional_json(result.rho1);
  if (!emit(doc.dump(2) + "\n", flags.out, out, err)) return kExitUsage;
  switch (result.verdict) {
    case Verdict::Normal:
      return kExitOk;
    case Verdict::Faulty:
      return kExitFaulty;
    case Verdict::Ambiguous:
      return kExitAmbiguous;
    case Verdict::InconsistentWithBoth:
      return kExitInconsistent;
  }
  return kExitInconsistent;
}

const char* cell_text(distance::CellState state) {
  switch (state) {
    case distance::CellState::Feasible:
      return "1";
    case distance::CellState::Infeasible:
      return "0";
    case distance::CellState::Error:
      return "err";
  }
  return "err";
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

std::string grid_csv(const distance::FeasibilityGrid& grid) {
  std::string text = "theta_re,theta_im,separable\n";
  const auto n_im = static_cast<int>(grid.im_values.size());
  for (int i = 0; i < static_cast<int>(grid.re_values.size()); ++i) {
    for (int j = 0; j < n_im; ++j) {
      text += fmt::format("{},{},{}\n", format_number(grid.re_values[i]),
                          format_number(grid.im_values[j]), cell_text(grid.at(i, j)));
    }
  }
  return text;
}

std::string sweep_csv(const std::vector<distance::SweepRow>& rows) {
  std::string text = "xf,theta_re,theta_im,theta_abs,cost,sigma,status\n";
  for (const auto& row : rows) {
    text += fmt::format("{},{},{},{},{},{},{}\n", format_number(row.xf), format_number(row.theta_re),
                        format_number(row.theta_im), format_number(row.theta_abs),
                        format_number(row.cost), format_number(row.sigma), to_string(row.status));
  }
  return text;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Auxiliary signal design for two-model fault detection", "auxsig"};
  app.require_subcommand(1);

  std::string model_path;
  SharedFlags flags;
  std::vector<double> theta;
  std::vector<double> x_obs;
  GridFlags grid_flags;
  SweepFlags sweep_flags;

  auto* design_cmd = app.add_subcommand("design", "design the cheapest separating signal");
  auto* verify_cmd = app.add_subcommand("verify", "check separability at a given signal");
  auto* grid_cmd = app.add_subcommand("grid", "separability over a grid of two-dimensional signals");
  auto* sweep_cmd = app.add_subcommand("sweep", "design over a range of fault reactances");
  auto* detect_cmd = app.add_subcommand("detect", "classify an observation");

  for (auto* sub : {design_cmd, verify_cmd, grid_cmd, sweep_cmd, detect_cmd}) {
    sub->add_option("model", model_path, "model file")->required();
    add_shared(*sub, flags);
  }
  verify_cmd->add_option("--theta", theta, "signal")->required()->expected(1, -1);
  detect_cmd->add_option("--theta", theta, "signal")->required()->expected(1, -1);
  detect_cmd->add_option("--x-obs", x_obs, "observed measurement")->required()->expected(1, -1);

  grid_cmd->add_option("--re-min", grid_flags.re_min, "lower real-part limit")->capture_default_str();
  grid_cmd->add_option("--re-max", grid_flags.re_max, "upper real-part limit")->capture_default_str();
  grid_cmd->add_option("--im-min", grid_flags.im_min, "lower imaginary-part limit")->capture_default_str();
  grid_cmd->add_option("--im-max", grid_flags.im_max, "upper imaginary-part limit")->capture_default_str();
  grid_cmd->add_option("--n", grid_flags.n, "nodes per axis")->capture_default_str();
  grid_cmd->add_option("--workers", grid_flags.workers, "threads, 0 for all")->capture_default_str();

  sweep_cmd->add_option("--xf-min", sweep_flags.xf_min, "lowest fault reactance")->capture_default_str();
  sweep_cmd->add_option("--xf-max", sweep_flags.xf_max, "highest fault reactance")->capture_default_str();
  sweep_cmd->add_option("--n", sweep_flags.n, "number of reactances")->capture_default_str();
  sweep_cmd->add_option("--workers", sweep_flags.workers, "threads, 0 for all")->capture_default_str();

  std::vector<const char*> argv{"auxsig"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (design_cmd->parsed()) return cmd_design(model_path, flags, out, err);
    if (verify_cmd->parsed()) return cmd_verify(model_path, theta, flags, out, err);
    if (grid_cmd->parsed()) return cmd_grid(model_path, grid_flags, flags, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(model_path, sweep_flags, flags, out, err);
    if (detect_cmd->parsed()) return cmd_detect(model_path, theta, x_obs, flags, out, err);
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitSolverFailure;
  }
  return kExitUsage;
}

}  // namespace auxsig::cli
