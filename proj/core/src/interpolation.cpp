#include "gfe/interpolation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

#include "gfe/errors.hpp"

namespace gfe {

namespace {

using D = Dual<double>;

AmbientVector<D> lift(const Vector& value, const Vector& derivative) {
  AmbientVector<D> r(value.size());
  for (int k = 0; k < value.size(); ++k) r(k) = D(value(k), derivative(k));
  return r;
}

AmbientVector<D> lift(const Vector& value) {
  AmbientVector<D> r(value.size());
  for (int k = 0; k < value.size(); ++k) r(k) = D(value(k));
  return r;
}

Vector tangent_part(const AmbientVector<D>& x) {
  return x.unaryExpr([](const D& a) { return a.d; });
}

TangentMap tangent_part(const AmbientMatrix<D>& x) {
  return x.unaryExpr([](const D& a) { return a.d; });
}

void check_weights(const std::vector<Point>& values, const Eigen::VectorXd& weights) {
  if (values.empty()) throw Error("geodesic_interpolate: no values");
  if (static_cast<std::size_t>(weights.size()) != values.size()) {
    throw Error("geodesic_interpolate: weight count does not match value count");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-10) throw Error("geodesic_interpolate: weights must sum to one");
}

void check_ball(const Manifold& manifold, const std::vector<Point>& values) {
  const double rho = manifold.well_posedness_radius();
  if (!std::isfinite(rho)) return;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (manifold.dist(values[i], values[0]) > rho * (1.0 + 1e-12)) {
      throw BallViolation("geodesic_interpolate: nodal values leave the well-posedness ball");
    }
  }
}

// F(q) = sum lambda_i log_q v_i, max_i |log_q v_i| and optionally the Jacobian.
struct Residual {
  Vector value;
  double norm = 0.0;
  double max_dist = 0.0;
};

Residual residual(const Manifold& m, const std::vector<Point>& values, const Eigen::VectorXd& weights,
                  const Point& q, TangentMap* jacobian) {
  Residual r;
  r.value = Vector::Zero(m.ambient_dim());
  if (jacobian) *jacobian = m.normal_completion<double>(q);
  Vector log;
  TangentMap base;
  for (std::size_t i = 0; i < values.size(); ++i) {
    m.log_jet<double>(q, values[i], &log, nullptr, jacobian ? &base : nullptr);
    r.value += weights(i) * log;
    r.max_dist = std::max(r.max_dist, m.norm(log));
    if (jacobian) *jacobian += weights(i) * base;
  }
  r.value = m.project(q, r.value);
  r.norm = m.norm(r.value);
  return r;
}

Point solve_interpolant(const Manifold& m, const std::vector<Point>& values, const Eigen::VectorXd& weights,
                        const InterpolationOptions& options, InterpolationStats& stats) {
  check_weights(values, weights);
  if (options.check_ball) check_ball(m, values);

  Vector average = Vector::Zero(m.ambient_dim());
  for (std::size_t i = 0; i < values.size(); ++i) average += weights(i) * values[i];
  if (m.kind() == ManifoldKind::Euclidean) {
    stats.residual = 0.0;
    return average;
  }
  Point q = m.retract_to_manifold(average);
  if (!q.allFinite()) throw NoConvergence("geodesic_interpolate: weighted average is not projectable");

  TangentMap jacobian;
  Residual current = residual(m, values, weights, q, &jacobian);
  bool polished = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double tol = options.relative_tolerance * current.max_dist + options.absolute_tolerance;
    const bool converged = current.norm <= tol;
    if (converged && (polished || current.norm == 0.0)) {
      stats.residual = current.norm;
      return q;
    }
    ++stats.iterations;

    // Newton step
    const Vector step = m.project(q, -jacobian.partialPivLu().solve(current.value));
    TangentMap trial_jacobian;
    Point trial = m.exp(q, step);
    Residual next = residual(m, values, weights, trial, &trial_jacobian);
    if (converged) {
      // one extra step so that q depends smoothly on the data up to round-off
      polished = true;
      if (next.norm <= current.norm) {
        q = trial;
        current = next;
        jacobian = trial_jacobian;
      }
      continue;
    }
    if (step.allFinite() && next.norm < current.norm) {
      q = trial;
      current = next;
      jacobian = trial_jacobian;
      continue;
    }

    // fixed-point fallback q <- exp_q(tau F)
    bool accepted = false;
    for (double tau = 1.0; tau > 1e-12; tau *= 0.5) {
      trial = m.exp(q, tau * current.value);
      next = residual(m, values, weights, trial, &trial_jacobian);
      if (next.norm < current.norm) {
        q = trial;
        current = next;
        jacobian = trial_jacobian;
        accepted = true;
        ++stats.fallback_steps;
        break;
      }
    }
    if (!accepted) break;
  }
  throw NoConvergence("geodesic_interpolate: no convergence");
}

}  // namespace

Point geodesic_interpolate(const Manifold& manifold, const std::vector<Point>& values,
                           const Eigen::VectorXd& weights, const InterpolationOptions& options,
                           InterpolationStats* stats) {
  InterpolationStats local;
  Point q = solve_interpolant(manifold, values, weights, options, local);
  if (stats) *stats = local;
  return q;
}

double first_order_residual(const Manifold& manifold, const std::vector<Point>& values,
                            const Eigen::VectorXd& weights, const Point& q) {
  Vector f = Vector::Zero(manifold.ambient_dim());
  for (std::size_t i = 0; i < values.size(); ++i) f += weights(i) * manifold.log(q, values[i]);
  return manifold.norm(f);
}

PhysicalShape physical_shape(const ShapeValues& reference, const ElementGeometry& geometry) {
  PhysicalShape s;
  s.values = reference.values;
  s.gradients = reference.gradients * geometry.inverse;
  s.hessians.reserve(reference.hessians.size());
  for (const auto& h : reference.hessians) {
    s.hessians.push_back(geometry.inverse.transpose() * h * geometry.inverse);
  }
  return s;
}

// ---------------------------------------------------------------------------
// GfeFunction

GfeFunction::GfeFunction(std::shared_ptr<const Mesh> mesh, int order, Manifold manifold,
                         std::vector<Point> values)
    : mesh_(std::move(mesh)), order_(order), manifold_(manifold), values_(std::move(values)) {
  if (!mesh_) throw Error("GfeFunction: null mesh");
  if (values_.size() != mesh_->nodes(order_).size()) {
    throw Error("GfeFunction: one value per Lagrange node required");
  }
}

GfeFunction GfeFunction::interpolate(std::shared_ptr<const Mesh> mesh, int order,
                                     const Manifold& manifold,
                                     const std::function<Point(const Coord&)>& map) {
  const NodeTable& table = mesh->nodes(order);
  std::vector<Point> values;
  values.reserve(table.size());
  for (const auto& x : table.coords) values.push_back(map(x));
  return GfeFunction(std::move(mesh), order, manifold, std::move(values));
}

std::vector<Point> GfeFunction::element_values(std::size_t element) const {
  const NodeTable& table = nodes();
  const int* idx = table.element(element);
  std::vector<Point> v;
  v.reserve(table.nodes_per_element);
  for (int i = 0; i < table.nodes_per_element; ++i) v.push_back(values_[idx[i]]);
  return v;
}

double GfeFunction::max_element_spread() const {
  const NodeTable& table = nodes();
  double spread = 0.0;
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    const int* idx = table.element(e);
    for (int i = 1; i < table.nodes_per_element; ++i) {
      spread = std::max(spread, manifold_.dist(values_[idx[i]], values_[idx[0]]));
    }
  }
  return spread;
}

void GfeFunction::check_ball() const {
  if (max_element_spread() > manifold_.well_posedness_radius() * (1.0 + 1e-12)) {
    throw BallViolation("GfeFunction: element nodal values leave the well-posedness ball");
  }
}

Point GfeFunction::evaluate(std::size_t element, const Coord& xi) const {
  const ShapeValues s = mesh_->reference(order_).evaluate(xi);
  return geodesic_interpolate(manifold_, element_values(element), s.values);
}

std::vector<Vector> GfeFunction::evaluate_differential(std::size_t element, const Coord& xi) const {
  return LocalInterpolant::at(*this, element, xi).differential();
}

// ---------------------------------------------------------------------------
// GfeVectorField

GfeVectorField::GfeVectorField(GfeFunction base, std::vector<Vector> vectors)
    : base_(std::move(base)), vectors_(std::move(vectors)) {
  if (vectors_.size() != base_.num_nodes()) throw Error("GfeVectorField: one vector per node required");
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const double scale = 1.0 + base_.manifold().norm(vectors_[i]);
    if (!base_.manifold().is_tangent(base_.value(i), vectors_[i], 1e-10 * scale)) {
      throw Error("GfeVectorField: nodal vector is not tangent at its base point");
    }
  }
}

GfeVectorField GfeVectorField::zero(GfeFunction base) {
  std::vector<Vector> v(base.num_nodes(), Vector::Zero(base.manifold().ambient_dim()));
  return GfeVectorField(std::move(base), std::move(v));
}

std::vector<Vector> GfeVectorField::element_vectors(std::size_t element) const {
  const NodeTable& table = base_.nodes();
  const int* idx = table.element(element);
  std::vector<Vector> v;
  v.reserve(table.nodes_per_element);
  for (int i = 0; i < table.nodes_per_element; ++i) v.push_back(vectors_[idx[i]]);
  return v;
}

// ---------------------------------------------------------------------------
// LocalInterpolant

LocalInterpolant::LocalInterpolant(const Manifold& manifold, std::vector<Point> values,
                                   PhysicalShape shape, const InterpolationOptions& options)
    : manifold_(manifold), values_(std::move(values)), shape_(std::move(shape)) {
  q_ = solve_interpolant(manifold_, values_, shape_.values, options, stats_);

  const int l = num_nodes();
  const int n = manifold_.ambient_dim();
  logs_.resize(l);
  target_.resize(l);
  TangentMap a = manifold_.normal_completion<double>(q_);
  TangentMap base;
  for (int i = 0; i < l; ++i) {
    manifold_.log_jet<double>(q_, values_[i], &logs_[i], &target_[i], &base);
    a += shape_.values(i) * base;
  }
  a_inv_ = a.inverse();
  if (!a_inv_.allFinite() || a_inv_.norm() > 1e8) {
    throw SingularSystem("interpolation: first-order system is (nearly) singular");
  }

  du_.resize(dim());
  for (int alpha = 0; alpha < dim(); ++alpha) {
    Vector r = Vector::Zero(n);
    for (int i = 0; i < l; ++i) r += shape_.gradients(i, alpha) * logs_[i];
    du_[alpha] = manifold_.project(q_, -(a_inv_ * r));
  }
}

LocalInterpolant LocalInterpolant::at(const GfeFunction& u, std::size_t element, const Coord& xi) {
  const ShapeValues s = u.mesh().reference(u.order()).evaluate(xi);
  return LocalInterpolant(u.manifold(), u.element_values(element),
                          physical_shape(s, u.mesh().geometry(element)));
}

std::vector<std::vector<Vector>> LocalInterpolant::second_differential() const {
  const int l = num_nodes();
  const int d = dim();
  std::vector<std::vector<Vector>> result(d, std::vector<Vector>(d));
  std::vector<Vector> log_rate(l);
  for (int beta = 0; beta < d; ++beta) {
    const AmbientVector<D> q = lift(q_, du_[beta]);
    AmbientMatrix<D> a = manifold_.normal_completion(q);
    AmbientVector<D> log;
    AmbientMatrix<D> base;
    for (int i = 0; i < l; ++i) {
      manifold_.log_jet<D>(q, lift(values_[i]), &log, nullptr, &base);
      a += D(shape_.values(i), shape_.gradients(i, beta)) * base;
      log_rate[i] = tangent_part(log);
    }
    const TangentMap a_rate = tangent_part(a);
    for (int alpha = 0; alpha < d; ++alpha) {
      Vector r_rate = Vector::Zero(manifold_.ambient_dim());
      for (int i = 0; i < l; ++i) {
        r_rate += shape_.hessians[i](alpha, beta) * logs_[i] + shape_.gradients(i, alpha) * log_rate[i];
      }
      const Vector rate = a_inv_ * (-r_rate - a_rate * du_[alpha]);
      result[beta][alpha] = manifold_.project(q_, rate);
    }
  }
  return result;
}

Vector LocalInterpolant::interpolate_vectors(const std::vector<Vector>& nodal) const {
  Vector b = Vector::Zero(manifold_.ambient_dim());
  for (int i = 0; i < num_nodes(); ++i) b += shape_.values(i) * (target_[i] * nodal[i]);
  return manifold_.project(q_, -(a_inv_ * b));
}

std::vector<Vector> LocalInterpolant::vector_ambient_derivative(const std::vector<Vector>& nodal) const {
  const int l = num_nodes();
  const Vector v = interpolate_vectors(nodal);
  std::vector<Vector> result(dim());
  for (int alpha = 0; alpha < dim(); ++alpha) {
    const AmbientVector<D> q = lift(q_, du_[alpha]);
    AmbientMatrix<D> a = manifold_.normal_completion(q);
    AmbientVector<D> b = AmbientVector<D>::Zero(manifold_.ambient_dim());
    AmbientMatrix<D> target, base;
    for (int i = 0; i < l; ++i) {
      manifold_.log_jet<D>(q, lift(values_[i]), nullptr, &target, &base);
      const D lambda(shape_.values(i), shape_.gradients(i, alpha));
      a += lambda * base;
      b -= lambda * (target * nodal[i]);
    }
    result[alpha] = a_inv_ * (tangent_part(b) - tangent_part(a) * v);
  }
  return result;
}

std::vector<Vector> LocalInterpolant::vector_covariant_derivative(const std::vector<Vector>& nodal) const {
  std::vector<Vector> result = vector_ambient_derivative(nodal);
  for (auto& r : result) r = manifold_.project(q_, r);
  return result;
}

std::vector<Vector> LocalInterpolant::pull_back(const std::vector<Vector>& covectors) const {
  const int l = num_nodes();
  const int d = dim();
  const int n = manifold_.ambient_dim();

  std::vector<Vector> y(d);
  for (int alpha = 0; alpha < d; ++alpha) y[alpha] = a_inv_.transpose() * covectors[alpha];

  // Phi(q, v) = sum_alpha y_alpha . (sum_i d_alpha lambda_i log_q v_i + A(q, v) du_alpha)
  // differentiated along tangent directions of q and of each v_i.
  auto phi_rate = [&](const AmbientMatrix<D>& a, const std::vector<Vector>& log_rates) {
    const TangentMap a_rate = tangent_part(a);
    double r = 0.0;
    for (int alpha = 0; alpha < d; ++alpha) {
      Vector inner = a_rate * du_[alpha];
      for (int i = 0; i < static_cast<int>(log_rates.size()); ++i) {
        inner += shape_.gradients(i, alpha) * log_rates[i];
      }
      r += y[alpha].dot(inner);
    }
    return r;
  };

  std::vector<Vector> log_rates(l);
  AmbientVector<D> log;
  AmbientMatrix<D> base;

  const TangentBasis qb = manifold_.tangent_basis(q_);
  Vector z = Vector::Zero(n);
  for (int k = 0; k < qb.cols(); ++k) {
    const AmbientVector<D> q = lift(q_, qb.col(k));
    AmbientMatrix<D> a = manifold_.normal_completion(q);
    for (int i = 0; i < l; ++i) {
      manifold_.log_jet<D>(q, lift(values_[i]), &log, nullptr, &base);
      a += shape_.values(i) * base;
      log_rates[i] = tangent_part(log);
    }
    z += phi_rate(a, log_rates) * qb.col(k);
  }
  const Vector zeta = a_inv_.transpose() * manifold_.lower(z);

  std::vector<Vector> gradients(l);
  const AmbientVector<D> q = lift(q_);
  for (int i = 0; i < l; ++i) {
    const TangentBasis vb = manifold_.tangent_basis(values_[i]);
    Vector g = Vector::Zero(n);
    for (int k = 0; k < vb.cols(); ++k) {
      manifold_.log_jet<D>(q, lift(values_[i], vb.col(k)), &log, nullptr, &base);
      const TangentMap a_rate = tangent_part(base) * shape_.values(i);
      const Vector log_rate = tangent_part(log);
      double phi = 0.0;
      for (int alpha = 0; alpha < d; ++alpha) {
        phi += y[alpha].dot(a_rate * du_[alpha] + shape_.gradients(i, alpha) * log_rate);
      }
      const double coefficient = shape_.values(i) * zeta.dot(target_[i] * vb.col(k)) - phi;
      g += coefficient * vb.col(k);
    }
    gradients[i] = g;
  }
  return gradients;
}

}  // namespace gfe
