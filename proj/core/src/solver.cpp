#include "gfe/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <memory>
#include <optional>

#include "gfe/errors.hpp"

namespace gfe {

void SolverConfig::validate() const {
  if (!(grad_tol > 0.0)) throw ConfigError("solver: grad_tol must be positive");
  if (max_iters < 0) throw ConfigError("solver: max_iters must be nonnegative");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("solver: backtracking factor must lie in (0, 1)");
  }
  if (!(armijo_constant > 0.0 && armijo_constant < 1.0)) {
    throw ConfigError("solver: sufficient-decrease constant must lie in (0, 1)");
  }
  if (!(min_step > 0.0)) throw ConfigError("solver: min_step must be positive");
  if (quadrature_degree > 10) throw ConfigError("solver: quadrature degree must be <= 10");
}

std::string to_string(SolverMethod method) {
  return method == SolverMethod::GradientDescent ? "gradient_descent" : "nonlinear_cg";
}

SolverMethod solver_method_from_string(const std::string& name) {
  if (name == "gradient_descent" || name == "gd") return SolverMethod::GradientDescent;
  if (name == "nonlinear_cg" || name == "cg") return SolverMethod::NonlinearCG;
  throw ConfigError("unknown solver method '" + name + "'");
}

namespace {

std::string format_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// Scalar stiffness matrix of the order-m Lagrange space restricted to the free nodes.
class StiffnessPreconditioner {
 public:
  StiffnessPreconditioner(const GfeFunction& u, const std::vector<int>& free) {
    const Mesh& mesh = u.mesh();
    const NodeTable& table = u.nodes();
    const ReferenceElement& ref = mesh.reference(u.order());
    const QuadratureRule quad = quadrature_for(mesh.dim(), 2 * (u.order() - 1));
    std::vector<int> position(table.size(), -1);
    for (std::size_t a = 0; a < free.size(); ++a) position[free[a]] = static_cast<int>(a);
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const ElementGeometry& g = mesh.geometry(e);
      const int* idx = table.element(e);
      for (std::size_t k = 0; k < quad.size(); ++k) {
        const ShapeValues s = ref.evaluate(quad.points[k]);
        const Eigen::MatrixXd grad = s.gradients * g.inverse;
        const Eigen::MatrixXd local = quad.weights[k] * g.determinant * (grad * grad.transpose());
        for (int i = 0; i < local.rows(); ++i) {
          if (position[idx[i]] < 0) continue;
          for (int j = 0; j < local.cols(); ++j) {
            if (position[idx[j]] < 0) continue;
            triplets.emplace_back(position[idx[i]], position[idx[j]], local(i, j));
          }
        }
      }
    }
    Eigen::SparseMatrix<double> k(free.size(), free.size());
    k.setFromTriplets(triplets.begin(), triplets.end());
    factor_.compute(k);
    if (factor_.info() != Eigen::Success) throw SingularSystem("solver: stiffness preconditioner is singular");
  }

  // Applies K^{-1} to every ambient component.
  std::vector<Vector> apply(const std::vector<Vector>& x) const {
    const int n = static_cast<int>(x.front().size());
    Eigen::MatrixXd rhs(x.size(), n);
    for (std::size_t a = 0; a < x.size(); ++a) rhs.row(a) = x[a].transpose();
    const Eigen::MatrixXd sol = factor_.solve(rhs);
    std::vector<Vector> out(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) out[a] = sol.row(a).transpose();
    return out;
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

// Relative round-off level of an assembled energy value.
constexpr double kEnergyNoise = 1e-13;

// Euclidean orthogonal projection onto T_pM (differs from the metric
// projection on the hyperboloid).
Vector euclidean_tangent_projection(const Manifold& m, const Point& p, const Vector& v) {
  if (m.kind() == ManifoldKind::Euclidean) return v;
  const Vector normal = m.lower(p);  // Euclidean normal of the constraint surface
  return v - (normal.dot(v) / normal.squaredNorm()) * normal;
}

struct State {
  GfeFunction u;
  double energy = 0.0;
  std::vector<Vector> gradient;    // metric gradient g_j at free nodes
  std::vector<Vector> euclidean;   // e_j, with dJ(V) = sum_j e_j . V_j
  double gradient_norm = 0.0;
};

State evaluate_state(GfeFunction u, const QuadratureRule& quad, const std::vector<int>& free) {
  EnergyAndGradient eg = energy_and_gradient(u, quad);
  State s{std::move(u), eg.energy.total, {}, {}, 0.0};
  const Manifold& m = s.u.manifold();
  long double sq = 0.0L;
  for (int j : free) {
    const Vector& g = eg.gradient[j];
    s.gradient.push_back(g);
    s.euclidean.push_back(euclidean_tangent_projection(m, s.u.value(j), m.lower(g)));
    sq += m.inner(g, g);
  }
  s.gradient_norm = std::sqrt(static_cast<double>(sq));
  return s;
}

double directional(const std::vector<Vector>& e, const std::vector<Vector>& d) {
  long double s = 0.0L;
  for (std::size_t a = 0; a < e.size(); ++a) s += e[a].dot(d[a]);
  return static_cast<double>(s);
}

}  // namespace

SolveResult solve(const GfeFunction& u0, const SolverConfig& config) {
  return solve(u0, u0.nodes().boundary_nodes, config);
}

SolveResult solve(const GfeFunction& u0, const std::vector<int>& fixed, const SolverConfig& config) {
  config.validate();
  const Manifold& m = u0.manifold();
  const int degree = config.quadrature_degree > 0 ? config.quadrature_degree : energy_quadrature_degree(u0.order());
  const QuadratureRule quad = quadrature_for(u0.mesh().dim(), degree);

  std::vector<char> is_fixed(u0.num_nodes(), 0);
  for (int j : fixed) is_fixed.at(j) = 1;
  std::vector<int> free;
  for (std::size_t j = 0; j < u0.num_nodes(); ++j) {
    if (!is_fixed[j]) free.push_back(static_cast<int>(j));
  }

  u0.check_ball();
  State state = evaluate_state(u0, quad, free);
  SolveReport report;
  report.energy.push_back(state.energy);
  report.gradient_norm = state.gradient_norm;
  if (free.empty() || state.gradient_norm <= config.grad_tol) {
    report.converged = true;
    return {std::move(state.u), std::move(report)};
  }

  std::unique_ptr<StiffnessPreconditioner> preconditioner;
  if (config.precondition) preconditioner = std::make_unique<StiffnessPreconditioner>(u0, free);

  auto precondition = [&](const State& s) {
    if (!preconditioner) return s.euclidean;
    std::vector<Vector> z = preconditioner->apply(s.euclidean);
    for (std::size_t a = 0; a < free.size(); ++a) z[a] = euclidean_tangent_projection(m, s.u.value(free[a]), z[a]);
    return z;
  };

  std::vector<Vector> search = precondition(state);
  std::vector<Vector> direction(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) direction[a] = -search[a];
  double previous_step = 1.0;

  while (report.iterations < config.max_iters) {
    double slope = directional(state.euclidean, direction);
    if (!(slope < 0.0)) {
      // not a descent direction: restart along the (preconditioned) gradient
      for (std::size_t a = 0; a < free.size(); ++a) direction[a] = -search[a];
      slope = directional(state.euclidean, direction);
      ++report.restarts;
    }

    // Armijo backtracking. Close to the minimizer the energy change drops below
    // the round-off level of the energy itself; there the decrease is measured
    // by the trapezoidal integral of the directional derivative instead.
    const double noise = kEnergyNoise * std::abs(state.energy);
    double t = preconditioner ? 1.0 : std::min(1.0, 2.0 * previous_step);
    std::optional<State> next;
    GfeFunction trial = state.u;
    while (t >= config.min_step) {
      for (std::size_t a = 0; a < free.size(); ++a) {
        trial.set_value(free[a], m.exp(state.u.value(free[a]), t * direction[a]));
      }
      double trial_energy = 0.0;
      bool valid = true;
      try {
        trial.check_ball();
        trial_energy = harmonic_energy(trial, quad).total;
      } catch (const BallViolation&) {
        valid = false;
      } catch (const NoConvergence&) {
        valid = false;
      } catch (const SingularSystem&) {
        valid = false;
      }
      const double bound = config.armijo_constant * t * slope;
      if (!valid) {
        ++report.rejected_steps;
      } else if (trial_energy - state.energy < bound) {
        next = evaluate_state(trial, quad, free);
        break;
      } else if (std::abs(trial_energy - state.energy) <= noise) {
        State candidate = evaluate_state(trial, quad, free);
        double end_slope = 0.0;
        for (std::size_t a = 0; a < free.size(); ++a) {
          end_slope += candidate.euclidean[a].dot(
              m.parallel_transport(state.u.value(free[a]), trial.value(free[a]), direction[a]));
        }
        if (0.5 * t * (slope + end_slope) < bound) {
          next = std::move(candidate);
          ++report.resolved_steps;
          break;
        }
      }
      t *= config.backtrack_factor;
    }
    if (!next) {
      throw LineSearchStall("solver: no energy decrease down to the minimal step (gradient norm " +
                            format_short(state.gradient_norm) + ")");
    }
    previous_step = t;
    ++report.iterations;

    report.energy.push_back(next->energy);
    report.gradient_norm = next->gradient_norm;
    std::vector<Vector> next_search = precondition(*next);

    if (config.method == SolverMethod::NonlinearCG) {
      // Polak-Ribiere+ with previous quantities transported to the new base points
      double numerator = 0.0;
      double denominator = directional(state.euclidean, search);
      std::vector<Vector> moved_direction(free.size());
      for (std::size_t a = 0; a < free.size(); ++a) {
        const Point& from = state.u.value(free[a]);
        const Point& to = next->u.value(free[a]);
        const Vector moved_search = m.parallel_transport(from, to, search[a]);
        moved_direction[a] = m.parallel_transport(from, to, direction[a]);
        numerator += next->euclidean[a].dot(next_search[a] - moved_search);
      }
      const double beta = denominator > 0.0 ? std::max(0.0, numerator / denominator) : 0.0;
      for (std::size_t a = 0; a < free.size(); ++a) {
        direction[a] = -next_search[a] + beta * moved_direction[a];
      }
    } else {
      for (std::size_t a = 0; a < free.size(); ++a) direction[a] = -next_search[a];
    }
    state = std::move(*next);
    search = std::move(next_search);
    if (state.gradient_norm <= config.grad_tol) {
      report.converged = true;
      break;
    }
  }
  return {std::move(state.u), std::move(report)};
}

double check_stationarity(const GfeFunction& u, const QuadratureRule& quad) {
  return check_stationarity(u, quad, free_nodes(u));
}

double check_stationarity(const GfeFunction& u, const QuadratureRule& quad, const std::vector<int>& nodes) {
  const EnergyAndGradient eg = energy_and_gradient(u, quad);
  const Manifold& m = u.manifold();
  double worst = 0.0;
  for (int j : nodes) {
    const TangentBasis basis = m.tangent_basis(u.value(j));
    for (int k = 0; k < basis.cols(); ++k) {
      worst = std::max(worst, std::abs(m.inner(eg.gradient[j], Vector(basis.col(k)))));
    }
  }
  return worst;
}

}  // namespace gfe
