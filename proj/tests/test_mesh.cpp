#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "gfe/errors.hpp"
#include "gfe/mesh.hpp"

using namespace gfe;

namespace {

Coord pt(double x) {
  Coord c(1);
  c << x;
  return c;
}

Coord pt(double x, double y) {
  Coord c(2);
  c << x, y;
  return c;
}

// Exact integral of x^a y^b over the reference simplex: a! b! / (a + b + d)!.
double monomial_integral(int dim, int a, int b) {
  if (dim == 1) return 1.0 / (a + 1);
  return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
}

std::vector<Coord> random_reference_points(int dim, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Coord> pts;
  while (static_cast<int>(pts.size()) < n) {
    Coord x(dim);
    for (int a = 0; a < dim; ++a) x(a) = u(rng);
    if (x.sum() <= 1.0) pts.push_back(x);
  }
  return pts;
}

}  // namespace

// ---- reference element ---------------------------------------------------------

TEST(ReferenceElement, Examples) {
  const ShapeValues s = ReferenceElement(1, 1).evaluate(pt(0.25));
  EXPECT_NEAR(s.values(0), 0.75, 1e-15);
  EXPECT_NEAR(s.values(1), 0.25, 1e-15);

  // m = 2 in 1d: local numbering 0, 1, 1/2
  const ShapeValues q = ReferenceElement(1, 2).evaluate(pt(0.5));
  EXPECT_NEAR(q.values(0), 0.0, 1e-15);
  EXPECT_NEAR(q.values(1), 0.0, 1e-15);
  EXPECT_NEAR(q.values(2), 1.0, 1e-15);

  std::mt19937_64 rng(1);
  const ReferenceElement tri(2, 1);
  for (const Coord& x : random_reference_points(2, 20, rng)) {
    EXPECT_LE((tri.evaluate(x).values - tri.barycentric(x)).norm(), 1e-15);
  }
}

TEST(ReferenceElement, KroneckerAtNodes) {
  for (int dim : {1, 2}) {
    for (int order : {1, 2}) {
      const ReferenceElement ref(dim, order);
      EXPECT_EQ(ref.num_nodes(), dim == 1 ? order + 1 : (order + 1) * (order + 2) / 2);
      for (int j = 0; j < ref.num_nodes(); ++j) {
        const Eigen::VectorXd v = ref.evaluate(ref.nodes()[j]).values;
        for (int i = 0; i < ref.num_nodes(); ++i) EXPECT_NEAR(v(i), i == j ? 1.0 : 0.0, 1e-14);
      }
    }
  }
}

TEST(ReferenceElement, PartitionOfUnity) {
  std::mt19937_64 rng(2);
  for (int dim : {1, 2}) {
    for (int order : {1, 2}) {
      const ReferenceElement ref(dim, order);
      for (const Coord& x : random_reference_points(dim, 50, rng)) {
        const ShapeValues s = ref.evaluate(x);
        EXPECT_NEAR(s.values.sum(), 1.0, 1e-14);
        EXPECT_LE(s.gradients.colwise().sum().norm(), 1e-13);
        Jacobian h = Jacobian::Zero(dim, dim);
        for (const auto& hi : s.hessians) h += hi;
        EXPECT_LE(h.norm(), 1e-12);
      }
    }
  }
}

TEST(ReferenceElement, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  const double t = 1e-6;
  for (int dim : {1, 2}) {
    for (int order : {1, 2}) {
      const ReferenceElement ref(dim, order);
      for (Coord x : random_reference_points(dim, 10, rng)) {
        x *= 0.9;
        x.array() += 0.02;
        const ShapeValues s = ref.evaluate(x);
        for (int a = 0; a < dim; ++a) {
          Coord e = Coord::Zero(dim);
          e(a) = t;
          const ShapeValues sp = ref.evaluate(x + e), sm = ref.evaluate(x - e);
          EXPECT_LE(((sp.values - sm.values) / (2 * t) - s.gradients.col(a)).norm(), 1e-8);
          for (int i = 0; i < ref.num_nodes(); ++i) {
            const Eigen::VectorXd fd = (sp.gradients.row(i) - sm.gradients.row(i)).transpose() / (2 * t);
            EXPECT_LE((fd - s.hessians[i].col(a)).norm(), 1e-7);
          }
        }
      }
    }
  }
}

TEST(ReferenceElement, RejectsPointsOutside) {
  EXPECT_THROW(ReferenceElement(1, 1).evaluate(pt(-1e-6)), OutsideElement);
  EXPECT_THROW(ReferenceElement(2, 2).evaluate(pt(0.7, 0.4)), OutsideElement);
  EXPECT_NO_THROW(ReferenceElement(2, 2).evaluate(pt(0.5, 0.5 + 1e-13)));
  EXPECT_THROW(ReferenceElement(3, 1), Error);
  EXPECT_THROW(ReferenceElement(2, 3), Error);
}

// ---- quadrature ------------------------------------------------------------------

TEST(Quadrature, Examples) {
  const QuadratureRule g = quadrature_for(1, 3);
  ASSERT_EQ(g.size(), 2u);
  const double off = 1.0 / (2.0 * std::sqrt(3.0));
  EXPECT_NEAR(std::min(g.points[0](0), g.points[1](0)), 0.5 - off, 1e-15);
  EXPECT_NEAR(std::max(g.points[0](0), g.points[1](0)), 0.5 + off, 1e-15);
  EXPECT_NEAR(g.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(g.weights[1], 0.5, 1e-15);

  const QuadratureRule c = quadrature_for(2, 1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c.weights[0], 0.5, 1e-15);
  EXPECT_LE((c.points[0] - pt(1.0 / 3, 1.0 / 3)).norm(), 1e-15);
}

TEST(Quadrature, ExactForMonomials) {
  for (int dim : {1, 2}) {
    for (int degree = 0; degree <= 10; ++degree) {
      const QuadratureRule rule = quadrature_for(dim, degree);
      EXPECT_EQ(rule.degree >= degree, true);
      double weights = 0.0;
      for (double w : rule.weights) {
        EXPECT_GT(w, 0.0);
        weights += w;
      }
      EXPECT_NEAR(weights, dim == 1 ? 1.0 : 0.5, 1e-14);
      for (int a = 0; a <= degree; ++a) {
        for (int b = 0; a + b <= degree; ++b) {
          if (dim == 1 && b > 0) continue;
          double sum = 0.0;
          for (std::size_t i = 0; i < rule.size(); ++i) {
            const Coord& x = rule.points[i];
            sum += rule.weights[i] * std::pow(x(0), a) * (dim == 2 ? std::pow(x(1), b) : 1.0);
          }
          EXPECT_NEAR(sum, monomial_integral(dim, a, b), 1e-14) << dim << " " << degree << " " << a << " " << b;
        }
      }
    }
  }
}

TEST(Quadrature, PointsInsideSimplex) {
  for (int dim : {1, 2}) {
    for (int degree = 0; degree <= 10; ++degree) {
      for (const Coord& x : quadrature_for(dim, degree).points) {
        EXPECT_GE(x.minCoeff(), 0.0);
        EXPECT_LE(x.sum(), 1.0);
      }
    }
  }
}

TEST(Quadrature, UnsupportedDegree) {
  EXPECT_THROW(quadrature_for(2, 11), UnsupportedDegree);
  EXPECT_THROW(quadrature_for(1, -1), UnsupportedDegree);
}

// ---- meshes ----------------------------------------------------------------------

TEST(Mesh, IntervalCounts) {
  const Mesh m = build_uniform_mesh(Box::interval(0, 1), 4);
  EXPECT_EQ(m.num_elements(), 4u);
  EXPECT_EQ(m.num_vertices(), 5u);
  EXPECT_NEAR(m.width(), 0.25, 1e-15);
  const Mesh r = refine(m);
  EXPECT_EQ(r.num_elements(), 8u);
  EXPECT_NEAR(r.width(), 0.125, 1e-15);
}

TEST(Mesh, SquareCounts) {
  const Mesh m = build_uniform_mesh(Box::rectangle(0, 1, 0, 1), 2);
  EXPECT_EQ(m.num_elements(), 8u);
  EXPECT_EQ(m.num_vertices(), 9u);
  EXPECT_NEAR(m.width(), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_EQ(refine(m).num_elements(), 32u);
  EXPECT_NEAR(m.volume(), 1.0, 1e-14);
}

TEST(Mesh, BoundaryNodesOfSquare) {
  const Mesh m = build_uniform_mesh(Box::rectangle(0, 1, 0, 1), 2);
  const NodeTable& t = m.nodes(1);
  EXPECT_EQ(t.boundary_nodes.size(), 8u);
  for (int i : t.boundary_nodes) {
    const Coord& x = t.coords[i];
    const bool perimeter = x(0) == 0 || x(0) == 1 || x(1) == 0 || x(1) == 1;
    EXPECT_TRUE(perimeter);
  }
  // the centre is the only interior vertex
  int interior = 0;
  for (std::size_t i = 0; i < t.size(); ++i) interior += t.on_boundary[i] ? 0 : 1;
  EXPECT_EQ(interior, 1);
  // m = 2 adds 16 perimeter edge midpoints to a 5x5 node grid
  EXPECT_EQ(m.nodes(2).size(), 25u);
  EXPECT_EQ(m.nodes(2).boundary_nodes.size(), 16u);
  const Mesh line = build_uniform_mesh(Box::interval(0, 1), 3);
  EXPECT_EQ(line.nodes(2).size(), 7u);
  EXPECT_EQ(line.nodes(2).boundary_nodes.size(), 2u);
}

TEST(Mesh, DegenerateDomains) {
  EXPECT_THROW(build_uniform_mesh(Box::interval(1, 1), 2), InvalidDomain);
  EXPECT_THROW(build_uniform_mesh(Box::rectangle(0, 1, 2, 1), 2), InvalidDomain);
  EXPECT_THROW(build_uniform_mesh(Box::interval(0, 1), 0), InvalidDomain);
}

TEST(Mesh, AffineMapsAndVolumes) {
  for (const Box& box : {Box::interval(-1, 2), Box::rectangle(-0.5, 0.5, -0.5, 0.5), Box::rectangle(0, 2, 1, 1.5)}) {
    Mesh m = build_uniform_mesh(box, 3);
    for (int level = 0; level < 3; ++level) {
      double total = 0.0;
      const ReferenceElement& ref = m.reference(1);
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const ElementGeometry& g = m.geometry(e);
        EXPECT_GT(g.determinant, 0.0);
        EXPECT_LE(g.diameter, m.width() * (1 + 1e-14));
        EXPECT_LE((g.jacobian * g.inverse - Jacobian::Identity(m.dim(), m.dim())).norm(), 1e-13);
        // the element map sends the reference vertices to the mesh vertices
        for (int i = 0; i <= m.dim(); ++i) {
          EXPECT_LE((g.map(ref.nodes()[i]) - m.vertices()[m.element(e)[i]]).norm(), 1e-14);
        }
        total += g.determinant * ref.volume();
      }
      EXPECT_NEAR(total, m.volume(), 1e-12);
      EXPECT_LE(m.shape_regularity(), 10.0);
      m = refine(m);
    }
  }
}

TEST(Mesh, RefinementHalvesWidthAndKeepsShape) {
  for (const Box& box : {Box::interval(0, 1), Box::rectangle(0, 1, 0, 1), Box::rectangle(-1, 3, 0, 1)}) {
    Mesh m = build_uniform_mesh(box, 2);
    for (int level = 0; level < 4; ++level) {
      const Mesh r = refine(m);
      EXPECT_NEAR(r.width() / m.width(), 0.5, 1e-14);
      EXPECT_NEAR(r.shape_regularity(), m.shape_regularity(), 1e-10);
      EXPECT_EQ(r.num_elements(), m.num_elements() * (m.dim() == 1 ? 2 : 4));
      EXPECT_NEAR(r.volume(), m.volume(), 1e-13);
      m = r;
    }
  }
}

TEST(Mesh, RefinedUniformMeshMatchesDirectConstruction) {
  const Mesh direct = build_uniform_mesh(Box::rectangle(0, 1, 0, 1), 8);
  const Mesh refined = refine(refine(build_uniform_mesh(Box::rectangle(0, 1, 0, 1), 2)));
  EXPECT_EQ(direct.num_vertices(), refined.num_vertices());
  EXPECT_EQ(direct.num_elements(), refined.num_elements());
  EXPECT_EQ(direct.nodes(2).size(), refined.nodes(2).size());
  EXPECT_EQ(direct.nodes(2).boundary_nodes.size(), refined.nodes(2).boundary_nodes.size());
}

TEST(Mesh, NodeTableConsistency) {
  for (const Box& box : {Box::interval(0, 1), Box::rectangle(0, 1, 0, 1)}) {
    const Mesh m = refine(build_uniform_mesh(box, 3));
    for (int order : {1, 2}) {
      const NodeTable& t = m.nodes(order);
      const ReferenceElement& ref = m.reference(order);
      EXPECT_EQ(t.nodes_per_element, ref.num_nodes());
      std::vector<int> seen(t.size(), 0);
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const int* nodes = t.element(e);
        for (int i = 0; i < t.nodes_per_element; ++i) {
          ++seen[nodes[i]];
          // every incidence reproduces the stored global coordinate
          EXPECT_LE((m.geometry(e).map(ref.nodes()[i]) - t.coords[nodes[i]]).norm(), 1e-14);
        }
      }
      for (int s : seen) EXPECT_GT(s, 0);
      // distinct indices have distinct coordinates
      std::map<std::pair<long long, long long>, int> keys;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto key = std::make_pair(std::llround(t.coords[i](0) * 1e9),
                                        m.dim() == 2 ? std::llround(t.coords[i](1) * 1e9) : 0LL);
        EXPECT_TRUE(keys.emplace(key, static_cast<int>(i)).second);
      }
      const std::size_t k = 6;
      if (m.dim() == 1) {
        EXPECT_EQ(t.size(), order * k + 1);
      } else {
        EXPECT_EQ(t.size(), (order * k + 1) * (order * k + 1));
      }
    }
  }
}

TEST(Mesh, Locate) {
  const Mesh m = refine(build_uniform_mesh(Box::rectangle(-0.5, 0.5, -0.5, 0.5), 3));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Coord x = pt(u(rng), u(rng));
    const auto hit = m.locate(x);
    ASSERT_TRUE(hit.has_value());
    EXPECT_LE((m.geometry(hit->first).map(hit->second) - x).norm(), 1e-14);
    EXPECT_GE(m.reference(1).barycentric(hit->second).minCoeff(), -1e-12);
  }
  EXPECT_FALSE(m.locate(pt(0.6, 0.0)).has_value());
  // vertices and edge points are found too
  for (const Coord& v : m.vertices()) EXPECT_TRUE(m.locate(v).has_value());

  const Mesh line = build_uniform_mesh(Box::interval(0, 1), 5);
  const auto hit = line.locate(pt(0.53));
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->first, 2u);
  EXPECT_NEAR(hit->second(0), 0.65, 1e-13);
}

TEST(Mesh, TextExport) {
  const Mesh m = build_uniform_mesh(Box::rectangle(0, 1, 0, 1), 2);
  std::ostringstream os;
  m.write(os);
  std::istringstream in(os.str());
  std::string tag;
  int vertices = 0, elements = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      double x, y;
      ASSERT_TRUE(static_cast<bool>(ls >> x >> y));
      EXPECT_NEAR(x, m.vertices()[vertices](0), 0.0);
      EXPECT_NEAR(y, m.vertices()[vertices](1), 0.0);
      ++vertices;
    } else {
      ASSERT_EQ(tag, "e");
      int a, b, c;
      ASSERT_TRUE(static_cast<bool>(ls >> a >> b >> c));
      EXPECT_EQ(a, m.element(elements)[0]);
      EXPECT_EQ(c, m.element(elements)[2]);
      ++elements;
    }
  }
  EXPECT_EQ(vertices, 9);
  EXPECT_EQ(elements, 8);
}
