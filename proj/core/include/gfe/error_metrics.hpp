#pragma once

// Intrinsic distances between maps Omega -> M evaluated by quadrature:
// L^p distance, the first-order half-metric D_{1,2}, smoothness descriptors,
// and experimental orders of convergence.

#include <functional>
#include <optional>
#include <vector>

#include "gfe/interpolation.hpp"

namespace gfe {

/// Value and covariant derivatives of a map at one point.
struct MapJet {
  Point value;
  std::vector<Vector> differential;           // d^alpha u
  std::vector<std::vector<Vector>> second;    // [beta][alpha] nabla_beta d^alpha u
};

/// Something that can be sampled at the quadrature points of an integration mesh.
class MapEvaluator {
 public:
  virtual ~MapEvaluator() = default;
  virtual const Manifold& manifold() const = 0;
  /// Jet at the point F_e(xi) of `mesh`, with derivatives up to `order` (0, 1 or 2).
  virtual MapJet jet(const Mesh& mesh, std::size_t element, const Coord& xi, int order) const = 0;
};

/// A map given in closed form on physical coordinates.
class AnalyticMap : public MapEvaluator {
 public:
  using Function = std::function<MapJet(const Coord& x, int order)>;
  AnalyticMap(Manifold manifold, Function f) : manifold_(manifold), f_(std::move(f)) {}

  const Manifold& manifold() const override { return manifold_; }
  MapJet jet(const Mesh& mesh, std::size_t element, const Coord& xi, int order) const override;
  MapJet at(const Coord& x, int order) const { return f_(x, order); }

 private:
  Manifold manifold_;
  Function f_;
};

/// A geodesic finite element function, sampled either on its own mesh or on a
/// nested refinement of it.
class GfeMap : public MapEvaluator {
 public:
  explicit GfeMap(GfeFunction u) : u_(std::move(u)) {}

  const Manifold& manifold() const override { return u_.manifold(); }
  MapJet jet(const Mesh& mesh, std::size_t element, const Coord& xi, int order) const override;
  const GfeFunction& function() const { return u_; }

 private:
  GfeFunction u_;
};

/// Closed-form jets of a map written generically in the scalar type: the functor
/// must accept std::array<S, 2> (only the first d entries are meaningful) and
/// return AmbientVector<S> for S in {double, Dual<double>, Dual<Dual<double>>}.
template <typename F>
MapJet analytic_jet(const Manifold& m, const F& f, const Coord& x, int order) {
  using D1 = Dual<double>;
  using D2 = Dual<D1>;
  const int d = static_cast<int>(x.size());
  MapJet jet;
  std::array<double, 2> xd{x(0), d > 1 ? x(1) : 0.0};
  jet.value = f(xd);
  if (order < 1) return jet;
  for (int a = 0; a < d; ++a) {
    std::array<D1, 2> xa{D1(xd[0], a == 0 ? 1.0 : 0.0), D1(xd[1], a == 1 ? 1.0 : 0.0)};
    const AmbientVector<D1> v = f(xa);
    jet.differential.push_back(v.unaryExpr([](const D1& s) { return s.d; }));
  }
  if (order < 2) return jet;
  const TangentMap projector = m.projector<double>(jet.value);
  jet.second.assign(d, std::vector<Vector>(d));
  for (int b = 0; b < d; ++b) {
    for (int a = 0; a < d; ++a) {
      std::array<D2, 2> xab;
      for (int c = 0; c < 2; ++c) {
        xab[c] = D2(D1(xd[c], a == c ? 1.0 : 0.0), D1(b == c ? 1.0 : 0.0, 0.0));
      }
      const AmbientVector<D2> v = f(xab);
      const Vector ambient = v.unaryExpr([](const D2& s) { return s.d.d; });
      jet.second[b][a] = projector * ambient;
    }
  }
  return jet;
}

/// Default quadrature degree for error integrals.
inline int error_quadrature_degree(int order) { return 2 * (order + 1) + 2; }

/// (int d^p(u, v))^{1/p}; p = infinity gives the maximum over quadrature points.
double lp_distance(const MapEvaluator& u, const MapEvaluator& v, const Mesh& mesh,
                   const QuadratureRule& quad, double p = 2.0);

/// D_{1,2}(u, v) = (sum_alpha int |dlog_target(u,v) d^alpha v + dlog_base(u,v) d^alpha u|^2)^{1/2}.
double d12_halfmetric(const MapEvaluator& u, const MapEvaluator& v, const Mesh& mesh,
                      const QuadratureRule& quad);

/// Homogeneous smoothness descriptor of order k in {0, 1, 2}. For k = 0 the
/// reference point defaults to the value of u at the domain barycenter.
double smoothness_descriptor(const MapEvaluator& u, const Mesh& mesh, const QuadratureRule& quad, int k,
                             double p, const std::optional<Point>& reference = std::nullopt);

/// Largest elementwise h_T * theta_{1,inf,T}(v) / theta_{0,inf,T;Q}(v), with Q
/// the nodal value of T farthest from the function, sampled at quadrature points.
double inverse_estimate_ratio(const GfeFunction& v, const QuadratureRule& samples);

struct ErrorSample {
  double h = 0.0;
  double d_L2 = 0.0;
  double D_12 = 0.0;
  double energy = 0.0;
};

/// Errors below this threshold count as exact reproduction.
inline constexpr double kExactThreshold = 1e-14;

struct ConvergenceReport {
  std::vector<ErrorSample> samples;
  /// Pairwise orders; std::nullopt marks an exact (underflowing) error.
  std::vector<std::optional<double>> eoc_L2;
  std::vector<std::optional<double>> eoc_D12;
};

/// log(e_i / e_{i+1}) / log(h_i / h_{i+1}) per error column.
ConvergenceReport compute_eoc(std::vector<ErrorSample> samples);
std::optional<double> eoc(double e_coarse, double e_fine, double h_coarse, double h_fine);

}  // namespace gfe
