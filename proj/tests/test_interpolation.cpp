#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "classical_fem.hpp"
#include "frechet_oracle.hpp"
#include "gfe/errors.hpp"
#include "gfe/interpolation.hpp"
#include "test_support.hpp"

using namespace gfe;
using namespace gfe::testing;

namespace {

std::shared_ptr<const Mesh> square_mesh(int k) {
  return std::make_shared<const Mesh>(build_uniform_mesh(Box::rectangle(0, 1, 0, 1), k));
}

std::shared_ptr<const Mesh> interval_mesh(int k) {
  return std::make_shared<const Mesh>(build_uniform_mesh(Box::interval(0, 1), k));
}

Point unit(double x, double y, double z) {
  Point p(3);
  p << x, y, z;
  return p / p.norm();
}

Eigen::VectorXd weights(std::initializer_list<double> ws) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(ws.size()));
  int i = 0;
  for (double x : ws) w(i++) = x;
  return w;
}

// Random interior reference point of an element.
Coord interior_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.9);
  Coord x(dim);
  do {
    for (int a = 0; a < dim; ++a) x(a) = u(rng);
  } while (x.sum() > 0.9);
  return x;
}

// Random barycentric-type weights of the order-2 triangle at a random point.
Eigen::VectorXd lagrange_weights(int dim, int order, std::mt19937_64& rng) {
  return ReferenceElement(dim, order).evaluate(interior_point(dim, rng)).values;
}

// Derivative of x -> f(x) in the physical direction e_alpha, staying inside element e.
template <typename F>
auto physical_fd(const Mesh& mesh, std::size_t e, const Coord& xi, int alpha, F&& f) {
  const double t = 1e-5;
  const ElementGeometry& g = mesh.geometry(e);
  Coord x = g.map(xi);
  Coord xp = x, xm = x;
  xp(alpha) += t;
  xm(alpha) -= t;
  return std::make_pair(f(g.pullback(xp)), f(g.pullback(xm)));
}

}  // namespace

// ---- geodesic_interpolate ----------------------------------------------------------

TEST(GeodesicInterpolate, ConstantData) {
  auto rng = make_rng(1);
  for (const Manifold& m : all_manifolds()) {
    const Point p = random_point(m, rng);
    const std::vector<Point> values(6, p);
    const Eigen::VectorXd w = lagrange_weights(2, 2, rng);
    EXPECT_LE((geodesic_interpolate(m, values, w) - p).norm(), 1e-14) << m.name();
  }
}

TEST(GeodesicInterpolate, EuclideanIsWeightedSum) {
  auto rng = make_rng(2);
  const Manifold e = Manifold::euclidean(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<Point> values;
    for (int k = 0; k < 6; ++k) values.push_back(random_point(e, rng, 3.0));
    const Eigen::VectorXd w = lagrange_weights(2, 2, rng);
    Point expected = Point::Zero(3);
    for (int k = 0; k < 6; ++k) expected += w(k) * values[k];
    EXPECT_LE((geodesic_interpolate(e, values, w) - expected).norm(), 1e-14);
  }
}

TEST(GeodesicInterpolate, SphereMidpoint) {
  const Manifold s = Manifold::sphere();
  const Point q = geodesic_interpolate(s, {unit(1, 0, 0), unit(0, 1, 0)}, weights({0.5, 0.5}),
                                       {.check_ball = false});
  EXPECT_LE((q - unit(1, 1, 0)).norm(), 1e-15);
}

TEST(GeodesicInterpolate, MatchesGridSearch) {
  const Manifold s = Manifold::sphere();
  auto rng = make_rng(3);
  const Point v1 = random_point(s, rng);
  const std::vector<Point> values = {v1, s.random_point_near(v1, rng, 0.45), s.random_point_near(v1, rng, 0.45)};
  const Eigen::VectorXd w = weights({0.2, 0.3, 0.5});
  const Point q = geodesic_interpolate(s, values, w);
  EXPECT_LE(s.dist(q, frechet_grid_search(s, values, w)), 1e-3);
  EXPECT_LE(first_order_residual(s, values, w, q), 1e-12);
}

TEST(GeodesicInterpolate, NegativeWeightsMatchGridSearch) {
  const Manifold s = Manifold::sphere();
  auto rng = make_rng(4);
  for (int i = 0; i < 5; ++i) {
    const Point v1 = random_point(s, rng);
    std::vector<Point> values = {v1};
    for (int k = 1; k < 6; ++k) values.push_back(s.random_point_near(v1, rng, 0.45));
    const Eigen::VectorXd w = lagrange_weights(2, 2, rng);
    const Point q = geodesic_interpolate(s, values, w);
    EXPECT_LE(s.dist(q, frechet_grid_search(s, values, w)), 1e-3);
  }
}

TEST(GeodesicInterpolate, FirstOrderResidual) {
  auto rng = make_rng(5);
  for (const Manifold& m : all_manifolds()) {
    for (int i = 0; i < 200; ++i) {
      const Point v1 = random_point(m, rng);
      std::vector<Point> values = {v1};
      for (int k = 1; k < 6; ++k) values.push_back(m.random_point_near(v1, rng, 0.49));
      const Eigen::VectorXd w = lagrange_weights(2, 2, rng);
      InterpolationStats stats;
      const Point q = geodesic_interpolate(m, values, w, {}, &stats);
      EXPECT_LE(first_order_residual(m, values, w, q), 1e-12) << m.name();
      EXPECT_LE(stats.residual, 1e-12);
      EXPECT_LE(stats.iterations, 10);
      EXPECT_LE(m.constraint_residual(q), 1e-12);
      // containment ball around v_1
      EXPECT_LE(m.dist(q, v1), 6 * 6 * w.cwiseAbs().maxCoeff() * 0.5);
    }
  }
}

TEST(GeodesicInterpolate, BallViolation) {
  const Manifold s = Manifold::sphere();
  const std::vector<Point> values = {unit(1, 0, 0), unit(0, 1, 0)};
  EXPECT_THROW(geodesic_interpolate(s, values, weights({0.5, 0.5})), BallViolation);
}

TEST(GeodesicInterpolate, RejectsBadWeights) {
  const Manifold s = Manifold::sphere();
  const std::vector<Point> values = {unit(1, 0, 0), unit(1, 0.1, 0)};
  EXPECT_THROW(geodesic_interpolate(s, values, weights({0.5, 0.4})), Error);
  EXPECT_THROW(geodesic_interpolate(s, values, weights({1.0})), Error);
}

TEST(GeodesicInterpolate, RotationEquivariance) {
  const Manifold s = Manifold::sphere();
  auto rng = make_rng(6);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d r = random_rotation(rng);
    const Point v1 = random_point(s, rng);
    std::vector<Point> values = {v1}, rotated = {r * v1};
    for (int k = 1; k < 6; ++k) {
      values.push_back(s.random_point_near(v1, rng, 0.45));
      rotated.push_back(r * values.back());
    }
    const Eigen::VectorXd w = lagrange_weights(2, 2, rng);
    EXPECT_LE((geodesic_interpolate(s, rotated, w) - r * geodesic_interpolate(s, values, w)).norm(), 1e-10);
  }
}

TEST(GeodesicInterpolate, LorentzEquivariance) {
  const Manifold h = Manifold::hyperbolic();
  auto rng = make_rng(7);
  const Eigen::Matrix3d l = lorentz_transform(0.3, -0.8);
  for (int i = 0; i < 20; ++i) {
    const Point v1 = random_point(h, rng);
    std::vector<Point> values = {v1}, moved = {l * v1};
    for (int k = 1; k < 3; ++k) {
      values.push_back(h.random_point_near(v1, rng, 0.45));
      moved.push_back(l * values.back());
    }
    const Eigen::VectorXd w = lagrange_weights(2, 1, rng);
    EXPECT_LE((geodesic_interpolate(h, moved, w) - l * geodesic_interpolate(h, values, w)).norm(), 1e-10);
  }
}

// ---- geodesic finite element functions ----------------------------------------------

TEST(GfeFunction, ReproducesNodalValues) {
  auto rng = make_rng(10);
  for (const Manifold& m : all_manifolds()) {
    for (int order : {1, 2}) {
      const GfeFunction u = random_gfe_function(square_mesh(2), order, m, rng, 0.2);
      const NodeTable& t = u.nodes();
      const ReferenceElement& ref = u.mesh().reference(order);
      for (std::size_t e = 0; e < u.mesh().num_elements(); ++e) {
        for (int i = 0; i < ref.num_nodes(); ++i) {
          EXPECT_LE((u.evaluate(e, ref.nodes()[i]) - u.value(t.element(e)[i])).norm(), 1e-13);
        }
      }
    }
  }
}

TEST(GfeFunction, ConstantData) {
  for (const Manifold& m : all_manifolds()) {
    const Point p = m.origin();
    const GfeFunction u = GfeFunction::interpolate(square_mesh(2), 2, m, [&](const Coord&) { return p; });
    auto rng = make_rng(11);
    for (int i = 0; i < 10; ++i) {
      const Coord xi = interior_point(2, rng);
      EXPECT_LE((u.evaluate(3, xi) - p).norm(), 1e-15);
      for (const Vector& d : u.evaluate_differential(3, xi)) EXPECT_LE(d.norm(), 1e-15);
    }
  }
}

TEST(GfeFunction, ContinuousAcrossEdges) {
  auto rng = make_rng(12);
  const QuadratureRule edge_rule = quadrature_for(1, 6);
  for (const Manifold& m : all_manifolds()) {
    for (int order : {1, 2}) {
      const GfeFunction u = random_gfe_function(square_mesh(3), order, m, rng, 0.2);
      const Mesh& mesh = u.mesh();
      std::map<std::pair<int, int>, std::vector<std::size_t>> edges;
      for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.element(e);
        for (int a = 0; a < 3; ++a) {
          const int i = el[a], j = el[(a + 1) % 3];
          edges[{std::min(i, j), std::max(i, j)}].push_back(e);
        }
      }
      int shared = 0;
      for (const auto& [edge, elements] : edges) {
        if (elements.size() != 2) continue;
        ++shared;
        const Coord& a = mesh.vertices()[edge.first];
        const Coord& b = mesh.vertices()[edge.second];
        for (const Coord& s : edge_rule.points) {
          const Coord x = a + s(0) * (b - a);
          const Point p0 = u.evaluate(elements[0], mesh.geometry(elements[0]).pullback(x));
          const Point p1 = u.evaluate(elements[1], mesh.geometry(elements[1]).pullback(x));
          EXPECT_LE((p0 - p1).norm(), 1e-12) << m.name();
        }
      }
      EXPECT_EQ(shared, 21);
    }
  }
}

TEST(GfeFunction, EuclideanMatchesClassicalFem) {
  auto rng = make_rng(13);
  const Manifold e = Manifold::euclidean(3);
  for (auto mesh : {square_mesh(3), interval_mesh(4)}) {
    for (int order : {1, 2}) {
      const GfeFunction u = random_gfe_function(mesh, order, e, rng, 2.0);
      Eigen::MatrixXd coeffs(u.num_nodes(), 3);
      for (std::size_t i = 0; i < u.num_nodes(); ++i) coeffs.row(i) = u.value(i).transpose();
      for (std::size_t el = 0; el < mesh->num_elements(); ++el) {
        const Coord xi = interior_point(mesh->dim(), rng);
        EXPECT_LE((u.evaluate(el, xi) - classical_value(*mesh, order, coeffs, el, xi)).norm(), 1e-13);
        const std::vector<Vector> du = u.evaluate_differential(el, xi);
        const Eigen::MatrixXd grad = classical_gradient(*mesh, order, coeffs, el, xi);
        for (int a = 0; a < mesh->dim(); ++a) EXPECT_LE((du[a] - grad.col(a)).norm(), 1e-12);
      }
    }
  }
}

TEST(GfeFunction, SphereGeodesicHasConstantSpeed) {
  const Manifold s = Manifold::sphere();
  const double length = 0.4;
  auto mesh = interval_mesh(1);
  const GfeFunction u(mesh, 1, s, {unit(1, 0, 0), unit(std::cos(length), std::sin(length), 0)});
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.99}) {
    Coord xi(1);
    xi << x;
    const Vector du = u.evaluate_differential(0, xi)[0];
    EXPECT_NEAR(s.norm(du), length, 1e-12);
    const auto [plus, minus] = physical_fd(*mesh, 0, xi, 0, [&](const Coord& y) {
      Coord c = y;
      c(0) = std::clamp(c(0), 0.0, 1.0);
      return u.evaluate(0, c);
    });
    if (x > 0.0 && x < 0.99) EXPECT_LE(((plus - minus) / 2e-5 - du).norm(), 1e-6);
  }
}

TEST(GfeFunction, DifferentialMatchesFiniteDifferences) {
  auto rng = make_rng(14);
  for (const Manifold& m : all_manifolds()) {
    for (int order : {1, 2}) {
      const GfeFunction u = random_gfe_function(square_mesh(2), order, m, rng, 0.24);
      for (std::size_t e = 0; e < u.mesh().num_elements(); ++e) {
        const Coord xi = interior_point(2, rng);
        const std::vector<Vector> du = u.evaluate_differential(e, xi);
        for (int a = 0; a < 2; ++a) {
          const auto [plus, minus] = physical_fd(u.mesh(), e, xi, a, [&](const Coord& y) { return u.evaluate(e, y); });
          EXPECT_LE(((plus - minus) / 2e-5 - du[a]).norm(), 1e-6) << m.name();
          EXPECT_LE(m.tangency_residual(u.evaluate(e, xi), du[a]), 1e-12);
        }
      }
    }
  }
}

TEST(GfeFunction, SecondDifferentialMatchesFiniteDifferences) {
  auto rng = make_rng(15);
  for (const Manifold& m : all_manifolds()) {
    for (int order : {1, 2}) {
      const GfeFunction u = random_gfe_function(square_mesh(2), order, m, rng, 0.24);
      for (std::size_t e = 0; e < u.mesh().num_elements(); e += 3) {
        const Coord xi = interior_point(2, rng);
        const LocalInterpolant local = LocalInterpolant::at(u, e, xi);
        const auto second = local.second_differential();
        for (int b = 0; b < 2; ++b) {
          const auto [plus, minus] = physical_fd(u.mesh(), e, xi, b, [&](const Coord& y) {
            const LocalInterpolant l = LocalInterpolant::at(u, e, y);
            std::vector<Vector> moved;
            for (const Vector& d : l.differential()) moved.push_back(m.parallel_transport(l.value(), local.value(), d));
            return moved;
          });
          for (int a = 0; a < 2; ++a) {
            EXPECT_LE(((plus[a] - minus[a]) / 2e-5 - second[b][a]).norm(), 1e-5) << m.name();
          }
        }
        // covariant Hessian is symmetric
        EXPECT_LE((second[0][1] - second[1][0]).norm(), 1e-10) << m.name();
      }
    }
  }
}

TEST(GfeFunction, BallInvariant) {
  const Manifold s = Manifold::sphere();
  auto mesh = interval_mesh(1);
  const GfeFunction ok(mesh, 1, s, {unit(1, 0, 0), unit(1, 0.4, 0)});
  EXPECT_NO_THROW(ok.check_ball());
  EXPECT_NEAR(ok.max_element_spread(), std::atan(0.4), 1e-14);
  const GfeFunction bad(mesh, 1, s, {unit(1, 0, 0), unit(1, 1, 0)});
  EXPECT_THROW(bad.check_ball(), BallViolation);
  EXPECT_THROW(bad.evaluate(0, Coord::Constant(1, 0.5)), BallViolation);
}

// ---- vector field interpolation ------------------------------------------------------

TEST(VectorInterpolation, ConstantBaseIsPolynomialInterpolation) {
  auto rng = make_rng(20);
  for (const Manifold& m : all_manifolds()) {
    const Point p = random_point(m, rng);
    const std::vector<Point> values(6, p);
    std::vector<Vector> nodal;
    for (int i = 0; i < 6; ++i) nodal.push_back(m.random_tangent(p, rng, 1.0));
    const ShapeValues ref = ReferenceElement(2, 2).evaluate(interior_point(2, rng));
    const PhysicalShape shape = physical_shape(ref, square_mesh(1)->geometry(0));
    const LocalInterpolant local(m, values, shape);
    Vector expected = Vector::Zero(m.ambient_dim());
    for (int i = 0; i < 6; ++i) expected += shape.values(i) * nodal[i];
    EXPECT_LE((local.interpolate_vectors(nodal) - expected).norm(), 1e-14) << m.name();
    const std::vector<Vector> zeros(6, Vector::Zero(m.ambient_dim()));
    EXPECT_EQ(local.interpolate_vectors(zeros).norm(), 0.0);
  }
}

TEST(VectorInterpolation, SatisfiesLinearizedFirstOrderCondition) {
  auto rng = make_rng(21);
  for (const Manifold& m : all_manifolds()) {
    const GfeFunction u = random_gfe_function(square_mesh(2), 2, m, rng, 0.24);
    const GfeVectorField v = random_vector_field(u, rng, 1.0, false);
    for (std::size_t e = 0; e < u.mesh().num_elements(); ++e) {
      const LocalInterpolant local = LocalInterpolant::at(u, e, interior_point(2, rng));
      const std::vector<Vector> nodal = v.element_vectors(e);
      const Vector vi = local.interpolate_vectors(nodal);
      Vector residual = Vector::Zero(m.ambient_dim());
      for (int i = 0; i < local.num_nodes(); ++i) {
        const Point& vi_base = local.nodal_values()[i];
        residual += local.shape().values(i) * (m.dlog_base(local.value(), vi_base) * vi +
                                               m.dlog_target(local.value(), vi_base) * nodal[i]);
      }
      EXPECT_LE(residual.norm(), 1e-11) << m.name();
      EXPECT_LE(m.tangency_residual(local.value(), vi), 1e-12);
    }
  }
}

TEST(VectorInterpolation, IsVariationOfInterpolant) {
  const Manifold s = Manifold::sphere();
  auto rng = make_rng(22);
  for (int order : {1, 2}) {
    const GfeFunction u = random_gfe_function(square_mesh(2), order, s, rng, 0.24);
    const GfeVectorField v = random_vector_field(u, rng, 1.0, false);
    for (std::size_t e = 0; e < u.mesh().num_elements(); ++e) {
      const Coord xi = interior_point(2, rng);
      const Point q = u.evaluate(e, xi);
      auto quotient = [&](double t) {
        GfeFunction moved = u;
        for (std::size_t i = 0; i < u.num_nodes(); ++i) moved.set_value(i, s.exp(u.value(i), t * v.vector(i)));
        return Vector(s.log(q, moved.evaluate(e, xi)) / t);
      };
      const Vector extrapolated = 2 * quotient(5e-4) - quotient(1e-3);
      const Vector vi = LocalInterpolant::at(u, e, xi).interpolate_vectors(v.element_vectors(e));
      EXPECT_LE((extrapolated - vi).norm(), 1e-5);
    }
  }
}

TEST(VectorInterpolation, CovariantDerivativeMatchesFiniteDifferences) {
  auto rng = make_rng(23);
  for (const Manifold& m : all_manifolds()) {
    const GfeFunction u = random_gfe_function(square_mesh(2), 2, m, rng, 0.24);
    const GfeVectorField v = random_vector_field(u, rng, 1.0, false);
    for (std::size_t e = 0; e < u.mesh().num_elements(); e += 2) {
      const Coord xi = interior_point(2, rng);
      const LocalInterpolant local = LocalInterpolant::at(u, e, xi);
      const std::vector<Vector> nodal = v.element_vectors(e);
      const std::vector<Vector> cov = local.vector_covariant_derivative(nodal);
      const std::vector<Vector> amb = local.vector_ambient_derivative(nodal);
      for (int a = 0; a < 2; ++a) {
        const auto [plus, minus] = physical_fd(u.mesh(), e, xi, a, [&](const Coord& y) {
          const LocalInterpolant l = LocalInterpolant::at(u, e, y);
          return std::make_pair(l.interpolate_vectors(nodal),
                                m.parallel_transport(l.value(), local.value(), l.interpolate_vectors(nodal)));
        });
        EXPECT_LE(((plus.first - minus.first) / 2e-5 - amb[a]).norm(), 1e-6) << m.name();
        EXPECT_LE(((plus.second - minus.second) / 2e-5 - cov[a]).norm(), 1e-6) << m.name();
      }
    }
  }
}

TEST(VectorInterpolation, BoundedByNodalVectors) {
  auto rng = make_rng(24);
  double worst = 0.0;
  for (const Manifold& m : all_manifolds()) {
    const GfeFunction u = random_gfe_function(square_mesh(2), 2, m, rng, 0.25);
    const GfeVectorField v = random_vector_field(u, rng, 1.0, false);
    double max_nodal = 0.0;
    for (const Vector& x : v.vectors()) max_nodal = std::max(max_nodal, std::abs(std::sqrt(std::abs(m.inner(x, x)))));
    for (std::size_t e = 0; e < u.mesh().num_elements(); ++e) {
      const LocalInterpolant local = LocalInterpolant::at(u, e, interior_point(2, rng));
      worst = std::max(worst, m.norm(local.interpolate_vectors(v.element_vectors(e))) / max_nodal);
    }
  }
  // the constant is dominated by the largest Lagrange weight of order 2
  EXPECT_LE(worst, 3.0);
}

TEST(VectorInterpolation, RejectsNonTangentVectors) {
  const Manifold s = Manifold::sphere();
  const GfeFunction u = GfeFunction::interpolate(interval_mesh(1), 1, s, [](const Coord& x) {
    return unit(1, x(0) * 0.3, 0);
  });
  EXPECT_THROW(GfeVectorField(u, {unit(1, 0, 0), unit(0, 0, 1)}), Error);
}

// ---- gradient pullback ----------------------------------------------------------------

TEST(PullBack, MatchesNodalVariation) {
  auto rng = make_rng(30);
  for (const Manifold& m : all_manifolds()) {
    for (int order : {1, 2}) {
      const GfeFunction u = random_gfe_function(square_mesh(1), order, m, rng, 0.24);
      const Coord xi = interior_point(2, rng);
      const LocalInterpolant local = LocalInterpolant::at(u, 0, xi);
      std::vector<Vector> covectors;
      for (int a = 0; a < 2; ++a) covectors.push_back(Vector::Random(m.ambient_dim()));
      const std::vector<Vector> g = local.pull_back(covectors);
      const GfeVectorField v = random_vector_field(u, rng, 1.0, false);
      auto functional = [&](double t) {
        GfeFunction moved = u;
        for (std::size_t i = 0; i < u.num_nodes(); ++i) moved.set_value(i, m.exp(u.value(i), t * v.vector(i)));
        const std::vector<Vector> du = moved.evaluate_differential(0, xi);
        double s = 0.0;
        for (int a = 0; a < 2; ++a) s += covectors[a].dot(du[a]);
        return s;
      };
      const double fd = (functional(1e-5) - functional(-1e-5)) / 2e-5;
      double predicted = 0.0;
      const std::vector<Vector> nodal = v.element_vectors(0);
      for (int i = 0; i < local.num_nodes(); ++i) predicted += m.inner(g[i], nodal[i]);
      EXPECT_NEAR(fd, predicted, 1e-6 * (1 + std::abs(fd))) << m.name();
    }
  }
}
