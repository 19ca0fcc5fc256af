#include "gfe/manifold.hpp"

#include <algorithm>
#include <array>
#include <numbers>

#include "gfe/errors.hpp"

namespace gfe {

namespace detail {

namespace {

// c_k = 2^k (k!)^2 / (2k+1)!,  c_{k+1} = c_k (k+1) / (2k+3)
constexpr std::array<double, kSeriesTerms> series_coefficients() {
  std::array<double, kSeriesTerms> c{};
  c[0] = 1.0;
  for (int k = 0; k + 1 < kSeriesTerms; ++k) c[k + 1] = c[k] * (k + 1) / (2.0 * k + 3.0);
  return c;
}

constexpr auto kCoefficients = series_coefficients();

double series(double y, int order) {
  double result = 0.0;
  for (int k = kSeriesTerms - 1; k >= order; --k) {
    double factor = kCoefficients[k];
    for (int j = 0; j < order; ++j) factor *= (k - j);
    result = result * y + factor;
  }
  return result;
}

}  // namespace

double theta_kernel(double y, int order) {
  if (std::abs(y) < kSeriesRadius) return series(y, order);
  if (y > 0.0) {
    const double theta = 2.0 * std::asin(std::min(1.0, std::sqrt(0.5 * y)));
    const double s = std::sin(theta);
    const double c = 1.0 - y;
    switch (order) {
      case 0:
        return theta / s;
      case 1:
        return (s - theta * c) / (s * s * s);
      default:
        return (theta * s * s - 3.0 * c * (s - theta * c)) / std::pow(s, 5);
    }
  }
  const double theta = 2.0 * std::asinh(std::sqrt(-0.5 * y));
  const double s = std::sinh(theta);
  const double c = 1.0 - y;
  switch (order) {
    case 0:
      return theta / s;
    case 1:
      return (theta * c - s) / (s * s * s);
    default:
      return -(theta * s * s - 3.0 * c * (theta * c - s)) / std::pow(s, 5);
  }
}

}  // namespace detail

namespace {
constexpr double kAntipodalTolerance = 1e-8;
}

Manifold Manifold::euclidean(int n) {
  if (n < 1 || n > kMaxAmbientDim) throw Error("Euclidean target dimension must be in [1, 4]");
  return {ManifoldKind::Euclidean, n, 0};
}
Manifold Manifold::sphere() { return {ManifoldKind::Sphere2, 3, 1}; }
Manifold Manifold::hyperbolic() { return {ManifoldKind::Hyperbolic2, 3, -1}; }

std::string Manifold::name() const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return "R" + std::to_string(ambient_);
    case ManifoldKind::Sphere2:
      return "S2";
    case ManifoldKind::Hyperbolic2:
      return "H2";
  }
  return "?";
}

double Manifold::injectivity_radius() const {
  return kind_ == ManifoldKind::Sphere2 ? std::numbers::pi
                                        : std::numeric_limits<double>::infinity();
}

double Manifold::well_posedness_radius() const {
  const double rm = curvature_bound();
  const double by_curvature = rm > 0.0 ? 0.5 / std::sqrt(rm) : std::numeric_limits<double>::infinity();
  return std::min(0.5 * injectivity_radius(), by_curvature);
}

Vector Manifold::project(const Point& p, const Vector& v) const {
  if (kind_ == ManifoldKind::Euclidean) return v;
  return v - double(sign_) * inner(p, v) * p;
}

Point Manifold::retract_to_manifold(const Point& x) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return x;
    case ManifoldKind::Sphere2:
      return x / x.norm();
    case ManifoldKind::Hyperbolic2:
      return x / std::sqrt(-inner(x, x));
  }
  return x;
}

TangentBasis Manifold::tangent_basis(const Point& p) const {
  const int n = intrinsic_dim();
  TangentBasis basis(ambient_, n);
  if (kind_ == ManifoldKind::Euclidean) {
    basis.setIdentity();
    return basis;
  }
  // Gram-Schmidt on projected coordinate directions, starting with those least
  // aligned with the normal.
  std::array<int, 3> order{0, 1, 2};
  if (kind_ == ManifoldKind::Sphere2) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(p(a)) < std::abs(p(b)); });
  } else {
    order = {1, 2, 0};
  }
  int found = 0;
  for (int k = 0; k < 3 && found < n; ++k) {
    Vector e = Vector::Zero(ambient_);
    e(order[k]) = 1.0;
    e = project(p, e);
    for (int j = 0; j < found; ++j) e -= inner(Vector(basis.col(j)), e) * basis.col(j);
    const double len = norm(e);
    if (len < 1e-6) continue;
    basis.col(found++) = e / len;
  }
  return basis;
}

double Manifold::constraint_residual(const Point& p) const {
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return 0.0;
    case ManifoldKind::Sphere2:
      return std::abs(p.squaredNorm() - 1.0);
    case ManifoldKind::Hyperbolic2:
      return std::abs(inner(p, p) + 1.0);
  }
  return 0.0;
}

double Manifold::tangency_residual(const Point& p, const Vector& v) const {
  if (kind_ == ManifoldKind::Euclidean) return 0.0;
  return std::abs(inner(p, v));
}

bool Manifold::is_point(const Point& p, double tol) const {
  if (p.size() != ambient_) return false;
  if (kind_ == ManifoldKind::Hyperbolic2 && p(0) <= 0.0) return false;
  return constraint_residual(p) <= tol;
}

bool Manifold::is_tangent(const Point& p, const Vector& v, double tol) const {
  return v.size() == ambient_ && tangency_residual(p, v) <= tol;
}

double Manifold::dist(const Point& p, const Point& q) const {
  const Vector diff = q - p;
  switch (kind_) {
    case ManifoldKind::Euclidean:
      return diff.norm();
    case ManifoldKind::Sphere2:
      return 2.0 * std::asin(std::min(1.0, 0.5 * diff.norm()));
    case ManifoldKind::Hyperbolic2:
      return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, inner(diff, diff))));
  }
  return 0.0;
}

Point Manifold::exp(const Point& p, const Vector& v) const {
  if (kind_ == ManifoldKind::Euclidean) return p + v;
  const double len = norm(v);
  Point result;
  if (kind_ == ManifoldKind::Sphere2) {
    const double sinc = len < 1e-8 ? 1.0 - len * len / 6.0 : std::sin(len) / len;
    result = std::cos(len) * p + sinc * v;
  } else {
    const double sinhc = len < 1e-8 ? 1.0 + len * len / 6.0 : std::sinh(len) / len;
    result = std::cosh(len) * p + sinhc * v;
  }
  return retract_to_manifold(result);
}

Vector Manifold::log(const Point& p, const Point& q) const {
  if (kind_ == ManifoldKind::Sphere2 &&
      dist(p, q) >= injectivity_radius() - kAntipodalTolerance) {
    throw AntipodalPair("log: points are (nearly) antipodal");
  }
  return log_kernel<double>(p, q);
}

Vector Manifold::parallel_transport(const Point& p, const Point& q, const Vector& v) const {
  if (kind_ == ManifoldKind::Euclidean) return v;
  if (kind_ == ManifoldKind::Sphere2 &&
      dist(p, q) >= injectivity_radius() - kAntipodalTolerance) {
    throw AntipodalPair("parallel_transport: points are (nearly) antipodal");
  }
  const double y = cos_defect<double>(p, q);
  return v - (double(sign_) * inner(q, v) / (2.0 - y)) * (p + q);
}

Vector Manifold::curvature_op(const Point&, const Vector& x, const Vector& y,
                              const Vector& z) const {
  return double(sign_) * (inner(y, z) * x - inner(x, z) * y);
}

TangentMap Manifold::dlog_target(const Point& p, const Point& q) const {
  if (kind_ == ManifoldKind::Sphere2 &&
      dist(p, q) >= injectivity_radius() - kAntipodalTolerance) {
    throw AntipodalPair("dlog_target: points are (nearly) antipodal");
  }
  return dlog_target_kernel<double>(p, q);
}

TangentMap Manifold::dlog_base(const Point& p, const Point& q) const {
  if (kind_ == ManifoldKind::Sphere2 &&
      dist(p, q) >= injectivity_radius() - kAntipodalTolerance) {
    throw AntipodalPair("dlog_base: points are (nearly) antipodal");
  }
  return dlog_base_kernel<double>(p, q);
}

std::pair<Vector, Vector> Manifold::hlog(const Point& p, const Vector& vp, const Point& q,
                                         const Vector& vq) const {
  Vector first = log(p, q);
  Vector second = dlog_target_kernel<double>(p, q) * vq + dlog_base_kernel<double>(p, q) * vp;
  return {std::move(first), std::move(second)};
}

Vector Manifold::random_tangent(const Point& p, std::mt19937_64& rng, double max_norm) const {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const TangentBasis basis = tangent_basis(p);
  Eigen::VectorXd coeffs(basis.cols());
  for (int i = 0; i < coeffs.size(); ++i) coeffs(i) = normal(rng);
  coeffs *= max_norm * uniform(rng) / std::max(coeffs.norm(), 1e-300);
  return basis * coeffs;
}

Point Manifold::random_point_near(const Point& center, std::mt19937_64& rng, double radius) const {
  return exp(center, random_tangent(center, rng, radius));
}

Point Manifold::origin() const {
  Point o = Point::Zero(ambient_);
  if (kind_ == ManifoldKind::Sphere2) o(2) = 1.0;
  if (kind_ == ManifoldKind::Hyperbolic2) o(0) = 1.0;
  return o;
}

}  // namespace gfe
