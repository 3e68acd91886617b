#include "cli/model_file.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace auxsig::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ParseError(fmt::format("key '{}': {}", key, what));
}

void reject_unknown(const json& object, const std::string& where,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : object.items()) {
    bool found = false;
    for (auto name : known) found = found || key == name;
    if (!found) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double number(const json& value, const std::string& key) {
  if (!value.is_number()) fail(key, fmt::format("expected a number, got {}", value.type_name()));
  return value.get<double>();
}

const json& member(const json& object, const std::string& name, const std::string& key) {
  const auto it = object.find(name);
  if (it == object.end()) fail(key, "missing");
  return *it;
}

Eigen::MatrixXd matrix(const json& value, const std::string& key) {
  if (!value.is_array()) fail(key, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(value.size());
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string row_key = fmt::format("{}[{}]", key, i);
    if (!value[i].is_array()) fail(row_key, "expected an array of numbers");
    const auto n = static_cast<Eigen::Index>(value[i].size());
    if (i == 0) {
      cols = n;
    } else if (n != cols) {
      fail(row_key, fmt::format("has {} entries, row 0 has {}", n, cols));
    }
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = number(value[i][j], fmt::format("{}[{}][{}]", key, i, j));
    }
  }
  return out;
}

Eigen::VectorXd vector(const json& value, const std::string& key) {
  if (!value.is_array()) fail(key, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = number(value[i], fmt::format("{}[{}]", key, i));
  }
  return out;
}

StaticModel static_model(const json& value, const std::string& key) {
  if (!value.is_object()) fail(key, "expected an object");
  reject_unknown(value, key, {"theta_map", "meas_map", "noise_map", "ineq_lhs", "ineq_rhs"});
  StaticModel model;
  model.theta_map = matrix(member(value, "theta_map", key + ".theta_map"), key + ".theta_map");
  model.meas_map = matrix(member(value, "meas_map", key + ".meas_map"), key + ".meas_map");
  model.noise_map = matrix(member(value, "noise_map", key + ".noise_map"), key + ".noise_map");
  model.ineq_lhs = Eigen::MatrixXd::Zero(0, model.meas_map.cols());
  model.ineq_rhs = Eigen::VectorXd::Zero(0);
  if (value.contains("ineq_lhs")) {
    model.ineq_lhs = matrix(value["ineq_lhs"], key + ".ineq_lhs");
    if (model.ineq_lhs.rows() == 0) model.ineq_lhs.resize(0, model.meas_map.cols());
  }
  if (value.contains("ineq_rhs")) model.ineq_rhs = vector(value["ineq_rhs"], key + ".ineq_rhs");
  return model;
}

distance::Phasor phasor(const json& value, const std::string& key) {
  if (!value.is_object()) fail(key, "expected an object {re, im}");
  reject_unknown(value, key, {"re", "im"});
  return {number(member(value, "re", key + ".re"), key + ".re"),
          number(member(value, "im", key + ".im"), key + ".im")};
}

template <typename Int>
Int integer(const json& value, const std::string& key) {
  if (!value.is_number_integer()) fail(key, "expected an integer");
  if (value.is_number_unsigned()) {
    const auto raw = value.get<std::uint64_t>();
    if (raw > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) fail(key, "out of range");
    return static_cast<Int>(raw);
  }
  const auto raw = value.get<std::int64_t>();
  if (raw < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
      raw > static_cast<std::int64_t>(std::numeric_limits<Int>::max())) {
    fail(key, "out of range");
  }
  return static_cast<Int>(raw);
}

SolverDefaults solver_defaults(const json& value) {
  if (!value.is_object()) fail("solver", "expected an object");
  reject_unknown(value, "solver",
                 {"tol", "seed", "gamma0", "gamma_max", "zeta", "max_iters", "starts"});
  SolverDefaults out;
  if (value.contains("tol")) out.tol = number(value["tol"], "solver.tol");
  if (value.contains("seed")) out.seed = integer<std::uint64_t>(value["seed"], "solver.seed");
  if (value.contains("gamma0")) out.gamma0 = number(value["gamma0"], "solver.gamma0");
  if (value.contains("gamma_max")) out.gamma_max = number(value["gamma_max"], "solver.gamma_max");
  if (value.contains("zeta")) out.zeta = number(value["zeta"], "solver.zeta");
  if (value.contains("max_iters")) out.max_iters = integer<int>(value["max_iters"], "solver.max_iters");
  if (value.contains("starts")) out.starts = integer<int>(value["starts"], "solver.starts");
  return out;
}

}  // namespace

DesignProblem ModelFile::problem() const {
  if (const auto* spec = std::get_if<distance::PhasorModelSpec>(&content)) {
    return distance::build_models(*spec);
  }
  return std::get<DesignProblem>(content);
}

ModelFile parse_model(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!root.is_object()) throw ParseError("top level: expected an object");

  const bool generic = root.contains("normal") || root.contains("faulty");
  const bool phasors = root.contains("z_minus") || root.contains("z_plus") || root.contains("z_fault");
  if (generic == phasors) {
    throw ParseError(
        "top level: expected exactly one of a generic model (normal, faulty, cost) or a "
        "distance spec (z_minus, z_plus, z_fault)");
  }

  ModelFile file;
  if (generic) {
    reject_unknown(root, "", {"normal", "faulty", "cost", "noise_bound", "solver"});
    DesignProblem problem;
    problem.normal = static_model(member(root, "normal", "normal"), "normal");
    problem.faulty = static_model(member(root, "faulty", "faulty"), "faulty");
    problem.cost = matrix(member(root, "cost", "cost"), "cost");
    problem.noise_bound = root.contains("noise_bound") ? number(root["noise_bound"], "noise_bound") : 1.0;
    file.content = std::move(problem);
  } else {
    reject_unknown(root, "", {"z_minus", "z_plus", "z_fault", "solver"});
    distance::PhasorModelSpec spec;
    spec.z_minus = phasor(member(root, "z_minus", "z_minus"), "z_minus");
    spec.z_plus = phasor(member(root, "z_plus", "z_plus"), "z_plus");
    spec.z_fault = phasor(member(root, "z_fault", "z_fault"), "z_fault");
    file.content = spec;
  }
  if (root.contains("solver")) file.solver = solver_defaults(root["solver"]);
  return file;
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_model(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace auxsig::cli
