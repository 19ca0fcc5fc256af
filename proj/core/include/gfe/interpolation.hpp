#pragma once

// Geodesic interpolation: weighted Frechet means of nodal values, geodesic
// finite element functions, interpolated tangent vector fields, and their
// spatial derivatives obtained by differentiating the first-order condition
//     sum_i lambda_i(x) log_{q(x)} v_i = 0.

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <vector>

#include "gfe/manifold.hpp"
#include "gfe/mesh.hpp"

namespace gfe {

struct InterpolationOptions {
  int max_iterations = 100;
  /// Converged once |F(q)| <= relative_tolerance * max_i d(q, v_i) + absolute_tolerance.
  double relative_tolerance = 1e-12;
  double absolute_tolerance = 1e-14;
  /// Throw BallViolation if some d(v_i, v_1) exceeds the well-posedness radius.
  bool check_ball = true;
};

struct InterpolationStats {
  int iterations = 0;
  int fallback_steps = 0;
  double residual = 0.0;  // |sum_i lambda_i log_q v_i|_g at the returned point
};

/// Minimizer of sum_i lambda_i d^2(v_i, q). Weights must sum to one and may be
/// negative. Damped Newton on the first-order condition with a fixed-point
/// fallback q <- exp_q(tau F(q)).
Point geodesic_interpolate(const Manifold& manifold, const std::vector<Point>& values,
                           const Eigen::VectorXd& weights, const InterpolationOptions& options = {},
                           InterpolationStats* stats = nullptr);

/// |sum_i lambda_i log_q v_i|_g.
double first_order_residual(const Manifold& manifold, const std::vector<Point>& values,
                            const Eigen::VectorXd& weights, const Point& q);

/// Shape function data at one point of one element, in physical coordinates.
struct PhysicalShape {
  Eigen::VectorXd values;           // lambda_i
  Eigen::MatrixXd gradients;        // d_alpha lambda_i, l x d
  std::vector<Jacobian> hessians;   // d_alpha d_beta lambda_i
};

PhysicalShape physical_shape(const ShapeValues& reference, const ElementGeometry& geometry);

/// A geodesic finite element function: one manifold point per Lagrange node.
class GfeFunction {
 public:
  GfeFunction(std::shared_ptr<const Mesh> mesh, int order, Manifold manifold,
              std::vector<Point> values);

  /// Nodal interpolant of a map given on physical coordinates.
  static GfeFunction interpolate(std::shared_ptr<const Mesh> mesh, int order, const Manifold& manifold,
                                 const std::function<Point(const Coord&)>& map);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int order() const { return order_; }
  const Manifold& manifold() const { return manifold_; }
  const NodeTable& nodes() const { return mesh_->nodes(order_); }
  std::size_t num_nodes() const { return values_.size(); }

  const std::vector<Point>& values() const { return values_; }
  const Point& value(std::size_t node) const { return values_[node]; }
  void set_value(std::size_t node, const Point& p) { values_[node] = p; }

  std::vector<Point> element_values(std::size_t element) const;

  /// Largest d(v_i, v_1) over all elements, v_1 the first node of the element.
  double max_element_spread() const;
  /// Throws BallViolation if some element spread exceeds the well-posedness radius.
  void check_ball() const;

  Point evaluate(std::size_t element, const Coord& xi) const;
  /// d^alpha u in physical coordinates, alpha = 1..d.
  std::vector<Vector> evaluate_differential(std::size_t element, const Coord& xi) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  Manifold manifold_;
  std::vector<Point> values_;
};

/// Tangent vectors attached to the nodal values of a GfeFunction.
class GfeVectorField {
 public:
  GfeVectorField(GfeFunction base, std::vector<Vector> vectors);

  /// The zero field.
  static GfeVectorField zero(GfeFunction base);

  const GfeFunction& base() const { return base_; }
  const std::vector<Vector>& vectors() const { return vectors_; }
  const Vector& vector(std::size_t node) const { return vectors_[node]; }
  std::vector<Vector> element_vectors(std::size_t element) const;

 private:
  GfeFunction base_;
  std::vector<Vector> vectors_;
};

/// Geodesic interpolant on one element at one point, with its derivatives.
/// The linear system
///     A = sum_i lambda_i dlog_base(q, v_i) + (normal completion)
/// is factored once and reused for the differential, vector-field
/// interpolation, covariant derivatives and gradient pullbacks.
class LocalInterpolant {
 public:
  LocalInterpolant(const Manifold& manifold, std::vector<Point> values, PhysicalShape shape,
                   const InterpolationOptions& options = {});

  static LocalInterpolant at(const GfeFunction& u, std::size_t element, const Coord& xi);

  const Manifold& manifold() const { return manifold_; }
  int dim() const { return static_cast<int>(shape_.gradients.cols()); }
  int num_nodes() const { return static_cast<int>(values_.size()); }
  const std::vector<Point>& nodal_values() const { return values_; }
  const PhysicalShape& shape() const { return shape_; }
  const InterpolationStats& stats() const { return stats_; }

  const Point& value() const { return q_; }
  /// d^alpha u, physical coordinates.
  const std::vector<Vector>& differential() const { return du_; }
  /// Covariant second derivatives: result[beta][alpha] = nabla_beta d^alpha u.
  std::vector<std::vector<Vector>> second_differential() const;

  /// Interpolated vector field V_I at this point from nodal vectors V_i in T_{v_i}M.
  Vector interpolate_vectors(const std::vector<Vector>& nodal) const;
  /// Ambient x-derivatives d_alpha V_I (not projected).
  std::vector<Vector> vector_ambient_derivative(const std::vector<Vector>& nodal) const;
  /// Covariant derivatives nabla_alpha V_I.
  std::vector<Vector> vector_covariant_derivative(const std::vector<Vector>& nodal) const;

  /// Given covectors c_alpha, returns tangent vectors g_i in T_{v_i}M with
  ///     d/dt sum_alpha c_alpha . d^alpha u  =  sum_i <g_i, dv_i/dt>_g
  /// for every variation of the nodal values.
  std::vector<Vector> pull_back(const std::vector<Vector>& covectors) const;

  /// Inverse of the completed first-order system.
  const TangentMap& system_inverse() const { return a_inv_; }

 private:
  Manifold manifold_;
  std::vector<Point> values_;
  PhysicalShape shape_;
  InterpolationStats stats_;
  Point q_;
  std::vector<Vector> logs_;
  std::vector<TangentMap> target_;  // dlog_target(q, v_i)
  TangentMap a_inv_;
  std::vector<Vector> du_;
};

}  // namespace gfe
