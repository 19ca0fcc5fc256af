#pragma once

// Geometry kernel for the three constant-curvature model targets:
//   Euclidean(n)   R^n, flat
//   Sphere2        unit sphere in R^3, curvature +1
//   Hyperbolic2    upper sheet of the hyperboloid <x,x>_M = -1 in R^{2,1},
//                  curvature -1, with <x,y>_M = -x0 y0 + x1 y1 + x2 y2
//
// Points and tangent vectors are stored in embedded (ambient) coordinates.
// Linear maps between tangent spaces are ambient N x N matrices; they are
// only meaningful on the tangent space they are documented for.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "gfe/dual.hpp"

namespace gfe {

inline constexpr int kMaxAmbientDim = 4;

template <typename S>
using AmbientVector = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, kMaxAmbientDim, 1>;
template <typename S>
using AmbientMatrix =
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim, kMaxAmbientDim>;

using Vector = AmbientVector<double>;
using Point = Vector;
using TangentMap = AmbientMatrix<double>;
/// Columns span a tangent space (N x n).
using TangentBasis = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim, 3>;

/// A tangent vector together with its base point.
struct TangentVector {
  Point base;
  Vector vec;
};

enum class ManifoldKind { Euclidean, Sphere2, Hyperbolic2 };

namespace detail {

// theta / sin(theta) written as a function of y = 1 - cos(theta), analytically
// continued to y < 0 where it becomes theta / sinh(theta) with cosh(theta) = 1 - y.
// Power series coefficients c_k = 2^k (k!)^2 / (2k+1)!.
inline constexpr double kSeriesRadius = 0.1;
inline constexpr int kSeriesTerms = 16;

/// Derivative of order `order` (0, 1 or 2) of theta/sin(theta) w.r.t. y.
double theta_kernel(double y, int order);

inline double kernel_value(double y) { return theta_kernel(y, 0); }
inline double kernel_slope(double y) { return theta_kernel(y, 1); }

template <typename T>
Dual<T> kernel_value(const Dual<T>& y) {
  return {kernel_value(y.v), kernel_slope(y.v) * y.d};
}
template <typename T>
Dual<T> kernel_slope(const Dual<T>& y) {
  static_assert(std::is_same_v<T, double>, "second derivatives of the log kernel only");
  return {kernel_slope(y.v), theta_kernel(y.v, 2) * y.d};
}

}  // namespace detail

class Manifold {
 public:
  static Manifold euclidean(int n);
  static Manifold sphere();
  static Manifold hyperbolic();

  ManifoldKind kind() const { return kind_; }
  std::string name() const;
  int ambient_dim() const { return ambient_; }
  int intrinsic_dim() const { return kind_ == ManifoldKind::Euclidean ? ambient_ : 2; }
  /// Sectional curvature: +1, -1 or 0.
  int curvature_sign() const { return sign_; }
  /// Sup norm of the curvature tensor.
  double curvature_bound() const { return kind_ == ManifoldKind::Euclidean ? 0.0 : 1.0; }
  double injectivity_radius() const;
  /// Radius of the ball around the first nodal value that guarantees a unique,
  /// smooth geodesic interpolant: min(inj/2, 0.5/sqrt|Rm|).
  double well_posedness_radius() const;

  // ---- metric -----------------------------------------------------------
  template <typename S>
  S inner(const AmbientVector<S>& a, const AmbientVector<S>& b) const {
    S r = a.dot(b);
    if (kind_ == ManifoldKind::Hyperbolic2) r -= 2.0 * a(0) * b(0);
    return r;
  }
  double norm(const Vector& v) const { return std::sqrt(std::max(inner(v, v), 0.0)); }

  /// Metric applied to the ambient vector (lowers the index).
  template <typename S>
  AmbientVector<S> lower(const AmbientVector<S>& a) const {
    AmbientVector<S> r = a;
    if (kind_ == ManifoldKind::Hyperbolic2) r(0) = -r(0);
    return r;
  }

  /// Orthogonal projector onto T_pM.
  template <typename S>
  AmbientMatrix<S> projector(const AmbientVector<S>& p) const {
    AmbientMatrix<S> P = AmbientMatrix<S>::Identity(ambient_, ambient_);
    if (kind_ != ManifoldKind::Euclidean) P -= double(sign_) * p * lower(p).transpose();
    return P;
  }
  Vector project(const Point& p, const Vector& v) const;
  /// Radial rescaling back onto the constraint surface (removes round-off drift).
  Point retract_to_manifold(const Point& x) const;

  /// Orthonormal basis of T_pM as columns.
  TangentBasis tangent_basis(const Point& p) const;

  double constraint_residual(const Point& p) const;
  double tangency_residual(const Point& p, const Vector& v) const;
  bool is_point(const Point& p, double tol = 1e-12) const;
  bool is_tangent(const Point& p, const Vector& v, double tol = 1e-12) const;

  // ---- geodesics --------------------------------------------------------
  double dist(const Point& p, const Point& q) const;
  Point exp(const Point& p, const Vector& v) const;
  /// Inverse exponential map; throws AntipodalPair near the cut locus.
  Vector log(const Point& p, const Point& q) const;
  /// Parallel transport of v in T_pM along the minimizing geodesic to q.
  Vector parallel_transport(const Point& p, const Point& q, const Vector& v) const;
  /// R(X,Y)Z.
  Vector curvature_op(const Point& p, const Vector& x, const Vector& y, const Vector& z) const;

  /// Differential of q -> log_p q, a map T_qM -> T_pM.
  TangentMap dlog_target(const Point& p, const Point& q) const;
  /// Covariant differential of p -> log_p q, a map T_pM -> T_pM.
  TangentMap dlog_base(const Point& p, const Point& q) const;
  /// Horizontal-lift logarithm on TM: (log_p q, dlog_target(Vq) + dlog_base(Vp)).
  std::pair<Vector, Vector> hlog(const Point& p, const Vector& vp, const Point& q,
                                 const Vector& vq) const;

  // ---- scalar-generic closed forms (no cut-locus checks) -----------------
  /// 1 - cos d(p,q) in a cancellation-free form.
  template <typename S>
  S cos_defect(const AmbientVector<S>& p, const AmbientVector<S>& q) const {
    const AmbientVector<S> diff = q - p;
    return double(sign_) * inner(diff, diff) * 0.5;
  }

  template <typename S>
  AmbientVector<S> log_kernel(const AmbientVector<S>& p, const AmbientVector<S>& q) const {
    if (kind_ == ManifoldKind::Euclidean) return q - p;
    const S y = cos_defect(p, q);
    const AmbientVector<S> w = (q - p) + y * p;
    return detail::kernel_value(y) * w;
  }

  template <typename S>
  AmbientMatrix<S> dlog_target_kernel(const AmbientVector<S>& p,
                                      const AmbientVector<S>& q) const {
    if (kind_ == ManifoldKind::Euclidean) return AmbientMatrix<S>::Identity(ambient_, ambient_);
    const S y = cos_defect(p, q);
    const AmbientVector<S> w = (q - p) + y * p;
    const AmbientVector<S> gp = lower(p);
    const S f = detail::kernel_value(y);
    const S df = detail::kernel_slope(y);
    AmbientMatrix<S> m = (-double(sign_) * df) * (w * gp.transpose());
    m += f * (AmbientMatrix<S>::Identity(ambient_, ambient_) - double(sign_) * p * gp.transpose());
    return m;
  }

  template <typename S>
  AmbientMatrix<S> dlog_base_kernel(const AmbientVector<S>& p, const AmbientVector<S>& q) const {
    if (kind_ == ManifoldKind::Euclidean) return -AmbientMatrix<S>::Identity(ambient_, ambient_);
    const S y = cos_defect(p, q);
    const AmbientVector<S> w = (q - p) + y * p;
    const S f = detail::kernel_value(y);
    const S df = detail::kernel_slope(y);
    AmbientMatrix<S> m = (-double(sign_) * df) * (w * lower(q).transpose());
    m -= (f * (1.0 - y)) * AmbientMatrix<S>::Identity(ambient_, ambient_);
    return m * projector(p);
  }

  /// log_p q together with any of its two differentials, sharing the scalar work.
  template <typename S>
  void log_jet(const AmbientVector<S>& p, const AmbientVector<S>& q, AmbientVector<S>* log,
               AmbientMatrix<S>* target, AmbientMatrix<S>* base) const {
    if (kind_ == ManifoldKind::Euclidean) {
      if (log) *log = q - p;
      if (target) *target = AmbientMatrix<S>::Identity(ambient_, ambient_);
      if (base) *base = -AmbientMatrix<S>::Identity(ambient_, ambient_);
      return;
    }
    const double s = double(sign_);
    const S y = cos_defect(p, q);
    const AmbientVector<S> w = (q - p) + y * p;
    const S f = detail::kernel_value(y);
    if (log) *log = f * w;
    if (!target && !base) return;
    const S df = detail::kernel_slope(y);
    const AmbientVector<S> gp = lower(p);
    if (target) {
      *target = (-s * df) * (w * gp.transpose());
      *target += f * (AmbientMatrix<S>::Identity(ambient_, ambient_) - s * p * gp.transpose());
    }
    if (base) {
      AmbientMatrix<S> m = (-s * df) * (w * lower(q).transpose());
      m -= (f * (1.0 - y)) * AmbientMatrix<S>::Identity(ambient_, ambient_);
      *base = m * projector(p);
    }
  }

  /// Normal-direction completion n n^T G so that (A + completion) is invertible
  /// when A maps T_pM to itself and annihilates the normal.
  template <typename S>
  AmbientMatrix<S> normal_completion(const AmbientVector<S>& p) const {
    if (kind_ == ManifoldKind::Euclidean) return AmbientMatrix<S>::Zero(ambient_, ambient_);
    return p * lower(p).transpose();
  }

  // ---- sampling ---------------------------------------------------------
  Vector random_tangent(const Point& p, std::mt19937_64& rng, double max_norm) const;
  Point random_point_near(const Point& center, std::mt19937_64& rng, double radius) const;
  /// A canonical base point (origin, north pole, hyperboloid apex).
  Point origin() const;

  bool operator==(const Manifold& o) const { return kind_ == o.kind_ && ambient_ == o.ambient_; }

 private:
  Manifold(ManifoldKind kind, int ambient, int sign) : kind_(kind), ambient_(ambient), sign_(sign) {}

  ManifoldKind kind_;
  int ambient_;
  int sign_;
};

}  // namespace gfe
