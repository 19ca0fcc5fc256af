#include "gfe/error_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gfe/errors.hpp"
#include "gfe/parallel.hpp"

namespace gfe {

namespace {

double sum_in_order(const std::vector<double>& values) {
  long double s = 0.0L;
  for (double v : values) s += v;
  return static_cast<double>(s);
}

// Element-parallel quadrature of a pointwise density; `maximum` takes the
// largest sample instead of integrating.
template <typename Density>
double integrate(const Mesh& mesh, const QuadratureRule& quad, bool maximum, Density density) {
  if (quad.dim != mesh.dim()) throw Error("quadrature dimension does not match the mesh");
  std::vector<double> per_element(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    double acc = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const double value = density(e, quad.points[k]);
      acc = maximum ? std::max(acc, value) : acc + quad.weights[k] * value;
    }
    per_element[e] = maximum ? acc : acc * mesh.geometry(e).determinant;
  });
  if (maximum) return per_element.empty() ? 0.0 : *std::max_element(per_element.begin(), per_element.end());
  return sum_in_order(per_element);
}

void check_manifolds(const MapEvaluator& u, const MapEvaluator& v) {
  if (!(u.manifold() == v.manifold())) throw Error("error metric: maps have different targets");
}

}  // namespace

MapJet AnalyticMap::jet(const Mesh& mesh, std::size_t element, const Coord& xi, int order) const {
  return f_(mesh.geometry(element).map(xi), order);
}

MapJet GfeMap::jet(const Mesh& mesh, std::size_t element, const Coord& xi, int order) const {
  std::size_t e = element;
  Coord local = xi;
  if (&mesh != &u_.mesh()) {
    const auto hit = u_.mesh().locate(mesh.geometry(element).map(xi));
    if (!hit) throw OutsideElement("GfeMap: sample point outside the function's mesh");
    e = hit->first;
    local = hit->second;
  }
  MapJet jet;
  if (order == 0) {
    jet.value = u_.evaluate(e, local);
    return jet;
  }
  const LocalInterpolant interp = LocalInterpolant::at(u_, e, local);
  jet.value = interp.value();
  jet.differential = interp.differential();
  if (order >= 2) jet.second = interp.second_differential();
  return jet;
}

double lp_distance(const MapEvaluator& u, const MapEvaluator& v, const Mesh& mesh,
                   const QuadratureRule& quad, double p) {
  check_manifolds(u, v);
  if (!(p >= 1.0)) throw Error("lp_distance: p must be >= 1");
  const Manifold& m = u.manifold();
  const bool sup = std::isinf(p);
  const double value = integrate(mesh, quad, sup, [&](std::size_t e, const Coord& xi) {
    const Point a = u.jet(mesh, e, xi, 0).value;
    const Point b = v.jet(mesh, e, xi, 0).value;
    if (m.kind() == ManifoldKind::Sphere2 && m.dist(a, b) >= m.injectivity_radius() - 1e-8) {
      throw AntipodalPair("lp_distance: antipodal sample values");
    }
    const double dist = m.dist(a, b);
    return sup ? dist : std::pow(dist, p);
  });
  return sup ? value : std::pow(value, 1.0 / p);
}

double d12_halfmetric(const MapEvaluator& u, const MapEvaluator& v, const Mesh& mesh,
                      const QuadratureRule& quad) {
  check_manifolds(u, v);
  const Manifold& m = u.manifold();
  const double sq = integrate(mesh, quad, false, [&](std::size_t e, const Coord& xi) {
    const MapJet a = u.jet(mesh, e, xi, 1);
    const MapJet b = v.jet(mesh, e, xi, 1);
    const TangentMap target = m.dlog_target(a.value, b.value);
    const TangentMap base = m.dlog_base(a.value, b.value);
    double density = 0.0;
    for (std::size_t alpha = 0; alpha < a.differential.size(); ++alpha) {
      const Vector w = target * b.differential[alpha] + base * a.differential[alpha];
      density += m.inner(w, w);
    }
    return density;
  });
  return std::sqrt(sq);
}

double smoothness_descriptor(const MapEvaluator& u, const Mesh& mesh, const QuadratureRule& quad, int k,
                             double p, const std::optional<Point>& reference) {
  if (k < 0 || k > 2) throw UnsupportedDegree("smoothness_descriptor: k must be 0, 1 or 2");
  if (!(p >= 1.0)) throw Error("smoothness_descriptor: p must be >= 1");
  const Manifold& m = u.manifold();
  const bool sup = std::isinf(p);
  auto power = [&](double x) { return sup ? x : std::pow(x, p); };

  Point q;
  if (k == 0) {
    if (reference) {
      q = *reference;
    } else {
      Coord center = Coord::Zero(mesh.dim());
      for (const auto& v : mesh.vertices()) center += v;
      center /= static_cast<double>(mesh.num_vertices());
      const auto hit = mesh.locate(center);
      if (!hit) throw OutsideElement("smoothness_descriptor: barycenter outside the mesh");
      q = u.jet(mesh, hit->first, hit->second, 0).value;
    }
  }

  const double value = integrate(mesh, quad, sup, [&](std::size_t e, const Coord& xi) {
    const MapJet jet = u.jet(mesh, e, xi, k);
    if (k == 0) return power(m.dist(jet.value, q));
    std::vector<double> first;
    for (const auto& du : jet.differential) first.push_back(m.norm(du));
    if (k == 1) {
      double s = 0.0;
      for (double f : first) s = sup ? std::max(s, f) : s + power(f);
      return s;
    }
    // order two: all nabla_beta d^alpha u terms and all products |d^alpha u| |d^beta u|
    double s = 0.0;
    for (const auto& row : jet.second) {
      for (const auto& h : row) s = sup ? std::max(s, m.norm(h)) : s + power(m.norm(h));
    }
    for (double fa : first) {
      for (double fb : first) s = sup ? std::max(s, fa * fb) : s + power(fa * fb);
    }
    return s;
  });
  return sup ? value : std::pow(value, 1.0 / p);
}

double inverse_estimate_ratio(const GfeFunction& v, const QuadratureRule& samples) {
  const Mesh& mesh = v.mesh();
  const Manifold& m = v.manifold();
  std::vector<double> ratio(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const std::vector<Point> nodal = v.element_values(e);
    double first = 0.0;
    std::vector<double> farthest(nodal.size(), 0.0);
    for (const auto& xi : samples.points) {
      const LocalInterpolant local = LocalInterpolant::at(v, e, xi);
      for (const auto& du : local.differential()) first = std::max(first, m.norm(du));
      for (std::size_t i = 0; i < nodal.size(); ++i) {
        farthest[i] = std::max(farthest[i], m.dist(local.value(), nodal[i]));
      }
    }
    const double zeroth = *std::max_element(farthest.begin(), farthest.end());
    ratio[e] = zeroth > 0.0 ? mesh.geometry(e).diameter * first / zeroth : 0.0;
  });
  return *std::max_element(ratio.begin(), ratio.end());
}

std::optional<double> eoc(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (e_coarse < kExactThreshold || e_fine < kExactThreshold) return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

ConvergenceReport compute_eoc(std::vector<ErrorSample> samples) {
  if (samples.size() < 2) throw Error("compute_eoc: at least two samples required");
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    if (!(samples[i + 1].h < samples[i].h)) throw Error("compute_eoc: mesh widths must decrease strictly");
  }
  ConvergenceReport report;
  report.samples = std::move(samples);
  for (std::size_t i = 0; i + 1 < report.samples.size(); ++i) {
    const ErrorSample& a = report.samples[i];
    const ErrorSample& b = report.samples[i + 1];
    report.eoc_L2.push_back(eoc(a.d_L2, b.d_L2, a.h, b.h));
    report.eoc_D12.push_back(eoc(a.D_12, b.D_12, a.h, b.h));
  }
  return report;
}

}  // namespace gfe
