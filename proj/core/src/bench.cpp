#include "gfe/bench.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "gfe/errors.hpp"

namespace gfe {

namespace {

template <typename S>
AmbientVector<S> vec3(const S& a, const S& b, const S& c) {
  AmbientVector<S> v(3);
  v << a, b, c;
  return v;
}

template <typename S>
AmbientVector<S> vec2(const S& a, const S& b) {
  AmbientVector<S> v(2);
  v << a, b;
  return v;
}

// Constant-speed great-circle arc of length 1 in the (x0, x1) plane.
struct Geodesic {
  template <typename S>
  AmbientVector<S> operator()(const std::array<S, 2>& x) const {
    using std::cos;
    using std::sin;
    return vec3<S>(cos(x[0]), sin(x[0]), S(0.0));
  }
};

// Inverse stereographic projection of w = 0.5 z (conformal, hence harmonic).
struct Stereographic {
  template <typename S>
  AmbientVector<S> operator()(const std::array<S, 2>& x) const {
    const S a = 0.5 * x[0];
    const S b = 0.5 * x[1];
    const S r2 = a * a + b * b;
    const S inv = 1.0 / (1.0 + r2);
    return vec3<S>(2.0 * a * inv, 2.0 * b * inv, (1.0 - r2) * inv);
  }
};

// Poincare disk -> hyperboloid applied to w = 0.35 z + 0.1 conj(z)^2 (not harmonic).
struct HyperbolicBoundary {
  template <typename S>
  AmbientVector<S> operator()(const std::array<S, 2>& x) const {
    const S wr = 0.35 * x[0] + 0.1 * (x[0] * x[0] - x[1] * x[1]);
    const S wi = 0.35 * x[1] - 0.2 * x[0] * x[1];
    const S r2 = wr * wr + wi * wi;
    const S inv = 1.0 / (1.0 - r2);
    return vec3<S>((1.0 + r2) * inv, 2.0 * wr * inv, 2.0 * wi * inv);
  }
};

// Re z^2, Im z^2.
struct SquareMap {
  template <typename S>
  AmbientVector<S> operator()(const std::array<S, 2>& x) const {
    return vec2<S>(x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]);
  }
};

template <typename F>
AnalyticMap::Function make_function(const Manifold& m, F f) {
  return [m, f](const Coord& x, int order) { return analytic_jet(m, f, x, order); };
}

std::vector<ProblemSpec> build_registry() {
  std::vector<ProblemSpec> r;
  {
    const Manifold m = Manifold::sphere();
    ProblemSpec p{"P1", "d=1 into S2: geodesic of length 1 on [0,1] (exact solution in the discrete space)",
                  Box::interval(0.0, 1.0), m, {1, 2}};
    p.exact = make_function(m, Geodesic{});
    p.boundary_map = p.exact;
    r.push_back(std::move(p));
  }
  {
    const Manifold m = Manifold::sphere();
    ProblemSpec p{"P2", "d=2 into S2: inverse stereographic projection of z/2 on [-1/2,1/2]^2",
                  Box::rectangle(-0.5, 0.5, -0.5, 0.5), m, {1, 2}};
    p.exact = make_function(m, Stereographic{});
    p.boundary_map = p.exact;
    r.push_back(std::move(p));
  }
  {
    const Manifold m = Manifold::hyperbolic();
    ProblemSpec p{"P3",
                  "d=2 into H2: boundary data of psi(0.35 z + 0.1 conj(z)^2) on [-1/2,1/2]^2, "
                  "reference solution two levels finer",
                  Box::rectangle(-0.5, 0.5, -0.5, 0.5), m, {1, 2}};
    p.boundary_map = make_function(m, HyperbolicBoundary{});
    p.reference_levels = 2;
    r.push_back(std::move(p));
  }
  {
    const Manifold m = Manifold::euclidean(2);
    ProblemSpec p{"P4", "d=2 into R2: harmonic polynomial z^2 on [0,1]^2", Box::rectangle(0.0, 1.0, 0.0, 1.0),
                  m, {1, 2}};
    p.exact = make_function(m, SquareMap{});
    p.boundary_map = p.exact;
    r.push_back(std::move(p));
  }
  return r;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Strips TOML comments and string quotes so that the INI reader accepts the file.
std::string normalize_toml(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    bool quoted = false;
    std::string kept;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
        continue;
      }
      if (c == '#' && !quoted) break;
      kept += c;
    }
    out << trim(kept) << '\n';
  }
  return out.str();
}

template <typename T>
T get_value(const boost::property_tree::ptree& tree, const std::string& key) {
  try {
    return tree.get<T>(key);
  } catch (const boost::property_tree::ptree_error&) {
    throw ConfigError("config: invalid value for '" + key + "'");
  }
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config: expected a boolean, got '" + s + "'");
}

GfeFunction initial_iterate(const ProblemSpec& problem, std::shared_ptr<const Mesh> mesh, int order,
                            const RunConfig& config) {
  const auto& map = problem.boundary_map;
  GfeFunction u = GfeFunction::interpolate(std::move(mesh), order, problem.manifold,
                                           [&](const Coord& x) { return map(x, 0).value; });
  if (config.perturbation > 0.0) {
    std::mt19937_64 rng(config.seed.value_or(0));
    const NodeTable& table = u.nodes();
    for (std::size_t j = 0; j < u.num_nodes(); ++j) {
      if (table.on_boundary[j]) continue;
      u.set_value(j, problem.manifold.random_point_near(u.value(j), rng, config.perturbation));
    }
  }
  return u;
}

QuadratureRule error_quadrature(const ProblemSpec& problem, const RunConfig& config) {
  const int degree = config.quadrature_degree > 0 ? config.quadrature_degree : error_quadrature_degree(config.order);
  return quadrature_for(problem.domain.dim(), degree);
}

void finish_report(RunResult& result) {
  std::vector<ErrorSample> samples;
  for (const auto& l : result.levels) samples.push_back({l.h, l.d_L2, l.D_12, l.energy});
  result.report = compute_eoc(std::move(samples));
}

}  // namespace

const std::vector<ProblemSpec>& problem_registry() {
  static const std::vector<ProblemSpec> registry = build_registry();
  return registry;
}

const ProblemSpec& find_problem(const std::string& name) {
  for (const auto& p : problem_registry()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown problem '" + name + "'");
}

void RunConfig::validate() const {
  const ProblemSpec& p = find_problem(problem);
  if (std::find(p.orders.begin(), p.orders.end(), order) == p.orders.end()) {
    throw ConfigError("problem " + problem + " does not support order " + std::to_string(order));
  }
  if (levels < 2) throw ConfigError("at least two levels are required");
  if (levels > 8) throw ConfigError("at most eight levels are supported");
  if (quadrature_degree > 10) throw ConfigError("quadrature degree must be <= 10");
  if (!(perturbation >= 0.0)) throw ConfigError("perturbation must be nonnegative");
  if (solver) solver->validate();
}

RunConfig parse_run_config(std::istream& in) {
  std::istringstream normalized(normalize_toml(in));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(normalized, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, table] : tree) {
    if (section != "problem" && section != "solver" && section != "output") {
      throw ConfigError("config: unknown table [" + section + "]");
    }
  }
  if (auto t = tree.get_child_optional("problem")) {
    for (const auto& [key, value] : *t) {
      if (key == "name") c.problem = value.data();
      else if (key == "order") c.order = get_value<int>(*t, key);
      else if (key == "levels") c.levels = get_value<int>(*t, key);
      else if (key == "quad_degree") c.quadrature_degree = get_value<int>(*t, key);
      else if (key == "seed") c.seed = get_value<std::uint64_t>(*t, key);
      else if (key == "perturbation") c.perturbation = get_value<double>(*t, key);
      else throw ConfigError("config: unknown key problem." + key);
    }
  }
  if (auto t = tree.get_child_optional("solver")) {
    SolverConfig s;
    if (!c.problem.empty()) s = find_problem(c.problem).solver;
    for (const auto& [key, value] : *t) {
      if (key == "grad_tol") s.grad_tol = get_value<double>(*t, key);
      else if (key == "max_iters") s.max_iters = get_value<int>(*t, key);
      else if (key == "method") s.method = solver_method_from_string(value.data());
      else if (key == "precondition") s.precondition = parse_bool(value.data());
      else if (key == "backtrack_factor") s.backtrack_factor = get_value<double>(*t, key);
      else if (key == "armijo_constant") s.armijo_constant = get_value<double>(*t, key);
      else if (key == "min_step") s.min_step = get_value<double>(*t, key);
      else if (key == "quad_degree") s.quadrature_degree = get_value<int>(*t, key);
      else throw ConfigError("config: unknown key solver." + key);
    }
    c.solver = s;
  }
  if (auto t = tree.get_child_optional("output")) {
    for (const auto& [key, value] : *t) {
      if (key == "path") c.output = value.data();
      else throw ConfigError("config: unknown key output." + key);
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_run_config(in);
}

std::shared_ptr<const Mesh> level_mesh(const ProblemSpec& problem, int level) {
  return std::make_shared<const Mesh>(build_uniform_mesh(problem.domain, problem.base_subdivisions << level));
}

RunResult run(const RunConfig& config) {
  config.validate();
  const ProblemSpec& problem = find_problem(config.problem);
  const SolverConfig solver = config.solver.value_or(problem.solver);
  const QuadratureRule quad = error_quadrature(problem, config);
  const int energy_degree = solver.quadrature_degree > 0 ? solver.quadrature_degree : energy_quadrature_degree(config.order);
  const QuadratureRule energy_quad = quadrature_for(problem.domain.dim(), energy_degree);

  RunResult result;
  for (int level = 0; level < config.levels; ++level) {
    auto mesh = level_mesh(problem, level);
    SolveResult solved = solve(initial_iterate(problem, mesh, config.order, config), solver);
    LevelResult row;
    row.level = level;
    row.subdivisions = problem.base_subdivisions << level;
    row.h = mesh->width();
    row.nodes = solved.solution.num_nodes();
    row.energy = solved.report.energy.back();
    row.grad_norm = solved.report.gradient_norm;
    row.iterations = solved.report.iterations;
    row.converged = solved.report.converged;
    row.stationarity = check_stationarity(solved.solution, energy_quad);
    row.theta_1q = smoothness_descriptor(GfeMap(solved.solution), *mesh, quad, 1, kThetaExponent);
    result.all_converged = result.all_converged && row.converged;
    result.levels.push_back(row);
    result.solutions.push_back(std::move(solved.solution));
  }

  if (problem.has_exact()) {
    const AnalyticMap exact(problem.manifold, problem.exact);
    for (std::size_t i = 0; i < result.levels.size(); ++i) {
      const GfeMap uh(result.solutions[i]);
      const Mesh& mesh = result.solutions[i].mesh();
      result.levels[i].d_L2 = lp_distance(exact, uh, mesh, quad);
      result.levels[i].D_12 = d12_halfmetric(exact, uh, mesh, quad);
    }
  } else {
    auto mesh = level_mesh(problem, config.levels - 1 + problem.reference_levels);
    SolveResult ref = solve(initial_iterate(problem, mesh, config.order, config), solver);
    result.all_converged = result.all_converged && ref.report.converged;
    const GfeMap reference(ref.solution);
    for (std::size_t i = 0; i < result.levels.size(); ++i) {
      const GfeMap uh(result.solutions[i]);
      result.levels[i].d_L2 = lp_distance(reference, uh, *mesh, quad);
      result.levels[i].D_12 = d12_halfmetric(reference, uh, *mesh, quad);
    }
    result.reference = std::move(ref.solution);
  }
  finish_report(result);
  return result;
}

RunResult interpolation_study(const RunConfig& config) {
  config.validate();
  const ProblemSpec& problem = find_problem(config.problem);
  const QuadratureRule quad = error_quadrature(problem, config);
  const auto& map = problem.has_exact() ? problem.exact : problem.boundary_map;
  const AnalyticMap smooth(problem.manifold, map);

  RunResult result;
  for (int level = 0; level < config.levels; ++level) {
    auto mesh = level_mesh(problem, level);
    GfeFunction ui = GfeFunction::interpolate(mesh, config.order, problem.manifold,
                                              [&](const Coord& x) { return map(x, 0).value; });
    const GfeMap interpolant(ui);
    LevelResult row;
    row.level = level;
    row.subdivisions = problem.base_subdivisions << level;
    row.h = mesh->width();
    row.nodes = ui.num_nodes();
    row.d_L2 = lp_distance(smooth, interpolant, *mesh, quad);
    row.D_12 = d12_halfmetric(smooth, interpolant, *mesh, quad);
    row.theta_1q = smoothness_descriptor(interpolant, *mesh, quad, 1, kThetaExponent);
    row.converged = true;
    result.levels.push_back(row);
    result.solutions.push_back(std::move(ui));
  }
  finish_report(result);
  return result;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_eoc(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string("exact");
}

void write_run_csv(std::ostream& os, const RunResult& result) {
  os << "level,h,nodes,d_L2,eoc_L2,D_12,eoc_D12,energy,grad_norm,iters\n";
  for (std::size_t i = 0; i < result.levels.size(); ++i) {
    const LevelResult& l = result.levels[i];
    os << l.level << ',' << format_number(l.h) << ',' << l.nodes << ',' << format_number(l.d_L2) << ','
       << (i == 0 ? "" : format_eoc(result.report.eoc_L2[i - 1])) << ',' << format_number(l.D_12) << ','
       << (i == 0 ? "" : format_eoc(result.report.eoc_D12[i - 1])) << ',' << format_number(l.energy) << ','
       << format_number(l.grad_norm) << ',' << l.iterations << '\n';
  }
}

void write_interpolation_csv(std::ostream& os, const RunResult& result) {
  os << "level,h,d_L2,eoc_L2,D_12,eoc_D12,theta_1q\n";
  for (std::size_t i = 0; i < result.levels.size(); ++i) {
    const LevelResult& l = result.levels[i];
    os << l.level << ',' << format_number(l.h) << ',' << format_number(l.d_L2) << ','
       << (i == 0 ? "" : format_eoc(result.report.eoc_L2[i - 1])) << ',' << format_number(l.D_12) << ','
       << (i == 0 ? "" : format_eoc(result.report.eoc_D12[i - 1])) << ',' << format_number(l.theta_1q) << '\n';
  }
}

}  // namespace gfe
