#pragma once

// Manufactured test problems and the refinement-study driver behind the
// `gfe` command-line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gfe/error_metrics.hpp"
#include "gfe/solver.hpp"

namespace gfe {

struct ProblemSpec {
  std::string name;
  std::string description;
  Box domain;
  Manifold manifold;
  std::vector<int> orders;          // supported polynomial orders
  int base_subdivisions = 4;
  /// Closed-form harmonic solution; empty when only a reference solve is available.
  AnalyticMap::Function exact;
  /// Smooth map whose trace is the Dirichlet data (the exact solution when known).
  AnalyticMap::Function boundary_map;
  /// > 0: errors are measured against a solve this many levels finer than the finest level.
  int reference_levels = 0;
  SolverConfig solver;

  bool has_exact() const { return static_cast<bool>(exact); }
};

/// P1..P4 (see `gfe list-problems`).
const std::vector<ProblemSpec>& problem_registry();
/// Throws ConfigError for unknown names.
const ProblemSpec& find_problem(const std::string& name);

struct RunConfig {
  std::string problem;
  int order = 1;
  int levels = 4;
  std::string output;               // CSV path; empty = no file
  int quadrature_degree = 0;        // error integrals; <= 0 selects 2(m+1)+2
  std::optional<std::uint64_t> seed;
  /// Radius of a random perturbation of the interior initial values (needs a seed).
  double perturbation = 0.0;
  std::optional<SolverConfig> solver;  // overrides the problem's defaults

  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

/// Reads a TOML-style file with [problem], [solver] and [output] tables.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(std::istream& in);

struct LevelResult {
  int level = 0;
  int subdivisions = 0;
  double h = 0.0;
  std::size_t nodes = 0;
  double d_L2 = 0.0;
  double D_12 = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  double stationarity = 0.0;
  double theta_1q = 0.0;
};

struct RunResult {
  std::vector<LevelResult> levels;
  ConvergenceReport report;
  bool all_converged = true;
  std::vector<GfeFunction> solutions;
  std::optional<GfeFunction> reference;
};

/// Exponent of the smoothness descriptor column of the interpolation study.
inline constexpr double kThetaExponent = 4.0;

/// Mesh of the given refinement level (k = base * 2^level subdivisions).
std::shared_ptr<const Mesh> level_mesh(const ProblemSpec& problem, int level);

/// Solves on every level and measures errors against the exact or reference solution.
RunResult run(const RunConfig& config);
/// Interpolation errors of the exact solution (or of the boundary map when
/// no closed-form solution exists); no solve.
RunResult interpolation_study(const RunConfig& config);

void write_run_csv(std::ostream& os, const RunResult& result);
void write_interpolation_csv(std::ostream& os, const RunResult& result);

/// 17-significant-digit formatting used in every CSV cell.
std::string format_number(double value);
std::string format_eoc(const std::optional<double>& value);

}  // namespace gfe
