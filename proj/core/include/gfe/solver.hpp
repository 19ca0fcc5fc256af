#pragma once

// First-order Riemannian minimization of the harmonic energy over the free
// nodal values of a geodesic finite element function.

#include <string>
#include <vector>

#include "gfe/energy.hpp"

namespace gfe {

enum class SolverMethod { GradientDescent, NonlinearCG };

struct SolverConfig {
  double grad_tol = 1e-9;
  int max_iters = 2000;
  double backtrack_factor = 0.5;
  double armijo_constant = 1e-4;
  double min_step = 1e-14;
  SolverMethod method = SolverMethod::NonlinearCG;
  /// Precondition the gradient with the inverse scalar stiffness matrix.
  bool precondition = true;
  /// Quadrature degree for energy assembly; <= 0 selects 2m + 2.
  int quadrature_degree = 0;

  /// Throws ConfigError on invalid settings.
  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> energy;  // initial value followed by every accepted step
  bool converged = false;
  int rejected_steps = 0;      // trial steps that left the well-posedness ball
  int restarts = 0;            // conjugate-gradient restarts
  /// Steps accepted on the integrated directional derivative because the
  /// energy difference was below round-off.
  int resolved_steps = 0;
};

struct SolveResult {
  GfeFunction solution;
  SolveReport report;
};

/// Minimizes the energy with the values at `fixed` nodes held at those of u0
/// (default: all boundary nodes). Throws LineSearchStall if no step of length
/// >= min_step decreases the energy.
SolveResult solve(const GfeFunction& u0, const SolverConfig& config = {});
SolveResult solve(const GfeFunction& u0, const std::vector<int>& fixed, const SolverConfig& config);

/// Largest |delta J(u)(V)| over the nodal tangent basis fields of the free nodes.
double check_stationarity(const GfeFunction& u, const QuadratureRule& quad);
double check_stationarity(const GfeFunction& u, const QuadratureRule& quad, const std::vector<int>& nodes);

std::string to_string(SolverMethod method);
SolverMethod solver_method_from_string(const std::string& name);

}  // namespace gfe
