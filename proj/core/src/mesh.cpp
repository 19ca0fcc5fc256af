#include "gfe/mesh.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "gfe/errors.hpp"

namespace gfe {

// ---------------------------------------------------------------------------
// ReferenceElement

namespace {

Coord make_coord(double x) {
  Coord c(1);
  c << x;
  return c;
}

Coord make_coord(double x, double y) {
  Coord c(2);
  c << x, y;
  return c;
}

// Edges of the reference triangle in local numbering order.
constexpr std::array<std::array<int, 2>, 3> kTriangleEdges{{{0, 1}, {1, 2}, {0, 2}}};

}  // namespace

ReferenceElement::ReferenceElement(int dim, int order) : dim_(dim), order_(order) {
  if (dim != 1 && dim != 2) throw Error("reference element: dimension must be 1 or 2");
  if (order != 1 && order != 2) throw Error("reference element: order must be 1 or 2");
  if (dim == 1) {
    nodes_ = {make_coord(0.0), make_coord(1.0)};
    if (order == 2) nodes_.push_back(make_coord(0.5));
  } else {
    nodes_ = {make_coord(0.0, 0.0), make_coord(1.0, 0.0), make_coord(0.0, 1.0)};
    if (order == 2) {
      for (const auto& [a, b] : kTriangleEdges) nodes_.push_back(0.5 * (nodes_[a] + nodes_[b]));
    }
  }
}

Eigen::VectorXd ReferenceElement::barycentric(const Coord& x) const {
  Eigen::VectorXd b(dim_ + 1);
  if (dim_ == 1) {
    b << 1.0 - x(0), x(0);
  } else {
    b << 1.0 - x(0) - x(1), x(0), x(1);
  }
  return b;
}

ShapeValues ReferenceElement::evaluate(const Coord& x) const {
  const Eigen::VectorXd b = barycentric(x);
  if (b.minCoeff() < -1e-12) throw OutsideElement("shape_values: point outside the reference simplex");

  // db_i / dxi
  Eigen::MatrixXd db(dim_ + 1, dim_);
  if (dim_ == 1) {
    db << -1.0, 1.0;
  } else {
    db << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
  }

  const int l = num_nodes();
  ShapeValues s;
  s.values.resize(l);
  s.gradients.resize(l, dim_);
  s.hessians.assign(l, Jacobian::Zero(dim_, dim_));

  if (order_ == 1) {
    s.values = b;
    s.gradients = db;
    return s;
  }

  const int nv = dim_ + 1;
  for (int i = 0; i < nv; ++i) {
    s.values(i) = b(i) * (2.0 * b(i) - 1.0);
    s.gradients.row(i) = (4.0 * b(i) - 1.0) * db.row(i);
    s.hessians[i] = 4.0 * db.row(i).transpose() * db.row(i);
  }
  if (dim_ == 1) {
    s.values(2) = 4.0 * b(0) * b(1);
    s.gradients.row(2) = 4.0 * (b(1) * db.row(0) + b(0) * db.row(1));
    s.hessians[2] = 4.0 * (db.row(0).transpose() * db.row(1) + db.row(1).transpose() * db.row(0));
  } else {
    for (int k = 0; k < 3; ++k) {
      const auto [a, c] = kTriangleEdges[k];
      s.values(nv + k) = 4.0 * b(a) * b(c);
      s.gradients.row(nv + k) = 4.0 * (b(c) * db.row(a) + b(a) * db.row(c));
      s.hessians[nv + k] =
          4.0 * (db.row(a).transpose() * db.row(c) + db.row(c).transpose() * db.row(a));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Quadrature

QuadratureRule gauss_legendre(int n) {
  // Golub-Welsch on [-1,1], mapped to [0,1].
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.dim = 1;
  rule.degree = 2 * n - 1;
  for (int k = 0; k < n; ++k) {
    const double v = eig.eigenvectors()(0, k);
    rule.points.push_back(make_coord(0.5 * (eig.eigenvalues()(k) + 1.0)));
    rule.weights.push_back(v * v);  // 2 v^2 on [-1,1], halved on [0,1]
  }
  return rule;
}

QuadratureRule quadrature_for(int dim, int degree) {
  if (degree < 0 || degree > 10) throw UnsupportedDegree("quadrature degree must be in [0, 10]");
  if (dim == 1) {
    QuadratureRule r = gauss_legendre(std::max(1, (degree + 2) / 2));
    r.degree = degree;
    return r;
  }
  if (dim != 2) throw UnsupportedDegree("quadrature: dimension must be 1 or 2");

  QuadratureRule rule;
  rule.dim = 2;
  rule.degree = degree;
  if (degree <= 1) {
    rule.points = {make_coord(1.0 / 3.0, 1.0 / 3.0)};
    rule.weights = {0.5};
    return rule;
  }
  if (degree == 2) {
    rule.points = {make_coord(1.0 / 6.0, 1.0 / 6.0), make_coord(2.0 / 3.0, 1.0 / 6.0),
                   make_coord(1.0 / 6.0, 2.0 / 3.0)};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  // Collapsed (Duffy) tensor rule: x = s, y = t (1 - s), dx dy = (1 - s) ds dt.
  const QuadratureRule gs = gauss_legendre((degree + 2 + 1) / 2);
  const QuadratureRule gt = gauss_legendre((degree + 1 + 1) / 2);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const double s = gs.points[i](0);
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double t = gt.points[j](0);
      rule.points.push_back(make_coord(s, t * (1.0 - s)));
      rule.weights.push_back(gs.weights[i] * gt.weights[j] * (1.0 - s));
    }
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Box

Box Box::interval(double a, double b) { return {make_coord(a), make_coord(b)}; }

Box Box::rectangle(double x0, double x1, double y0, double y1) {
  return {make_coord(x0, y0), make_coord(x1, y1)};
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(int dim, std::vector<Coord> vertices, std::vector<std::array<int, 3>> elements)
    : dim_(dim), vertices_(std::move(vertices)), elements_(std::move(elements)) {
  if (dim != 1 && dim != 2) throw InvalidDomain("mesh dimension must be 1 or 2");
  geometry_.reserve(elements_.size());
  for (const auto& el : elements_) {
    ElementGeometry g;
    g.origin = vertices_[el[0]];
    g.jacobian.resize(dim_, dim_);
    for (int c = 0; c < dim_; ++c) g.jacobian.col(c) = vertices_[el[c + 1]] - vertices_[el[0]];
    g.determinant = g.jacobian.determinant();
    if (!(g.determinant > 0.0)) throw InvalidDomain("mesh element with non-positive orientation");
    g.inverse = g.jacobian.inverse();
    if (dim_ == 1) {
      g.diameter = g.determinant;
      g.inradius = 0.5 * g.determinant;
    } else {
      const double a = (vertices_[el[1]] - vertices_[el[0]]).norm();
      const double b = (vertices_[el[2]] - vertices_[el[1]]).norm();
      const double c = (vertices_[el[2]] - vertices_[el[0]]).norm();
      g.diameter = std::max({a, b, c});
      g.inradius = g.determinant / (a + b + c);  // area / semiperimeter
    }
    width_ = std::max(width_, g.diameter);
    shape_regularity_ = std::max(shape_regularity_, g.diameter / g.inradius);
    geometry_.push_back(std::move(g));
  }
  references_[0] = std::make_shared<ReferenceElement>(dim_, 1);
  references_[1] = std::make_shared<ReferenceElement>(dim_, 2);
  build_node_tables();
  build_locator();
}

double Mesh::volume() const {
  const double ref = dim_ == 1 ? 1.0 : 0.5;
  double v = 0.0;
  for (const auto& g : geometry_) v += ref * g.determinant;
  return v;
}

const NodeTable& Mesh::nodes(int order) const {
  if (order != 1 && order != 2) throw Error("node table: order must be 1 or 2");
  return tables_[order - 1];
}

const ReferenceElement& Mesh::reference(int order) const {
  if (order != 1 && order != 2) throw Error("reference element: order must be 1 or 2");
  return *references_[order - 1];
}

void Mesh::build_node_tables() {
  const int nv = dim_ + 1;

  // facets (vertices in 1d, edges in 2d) with their element counts
  std::map<std::array<int, 2>, int> edge_index;
  std::vector<std::array<int, 2>> edges;
  std::vector<int> edge_count;
  std::vector<int> vertex_count(vertices_.size(), 0);
  std::vector<int> element_edges;
  for (const auto& el : elements_) {
    for (int i = 0; i < nv; ++i) ++vertex_count[el[i]];
    const int ne = dim_ == 1 ? 1 : 3;
    for (int k = 0; k < ne; ++k) {
      const int a = dim_ == 1 ? el[0] : el[kTriangleEdges[k][0]];
      const int b = dim_ == 1 ? el[1] : el[kTriangleEdges[k][1]];
      const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(edges.size()));
      if (inserted) {
        edges.push_back(key);
        edge_count.push_back(0);
      }
      ++edge_count[it->second];
      element_edges.push_back(it->second);
    }
  }

  std::vector<char> vertex_boundary(vertices_.size(), 0);
  std::vector<char> edge_boundary(edges.size(), 0);
  if (dim_ == 1) {
    for (std::size_t v = 0; v < vertices_.size(); ++v) vertex_boundary[v] = vertex_count[v] == 1;
  } else {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edge_count[e] == 1) {
        edge_boundary[e] = 1;
        vertex_boundary[edges[e][0]] = 1;
        vertex_boundary[edges[e][1]] = 1;
      }
    }
  }

  for (int order = 1; order <= 2; ++order) {
    NodeTable t;
    t.order = order;
    t.nodes_per_element = references_[order - 1]->num_nodes();
    t.coords = vertices_;
    t.on_boundary = vertex_boundary;
    if (order == 2) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        t.coords.push_back(0.5 * (vertices_[edges[e][0]] + vertices_[edges[e][1]]));
        t.on_boundary.push_back(edge_boundary[e]);
      }
    }
    const int ne = dim_ == 1 ? 1 : 3;
    for (std::size_t el = 0; el < elements_.size(); ++el) {
      for (int i = 0; i < nv; ++i) t.element_nodes.push_back(elements_[el][i]);
      if (order == 2) {
        for (int k = 0; k < ne; ++k) {
          t.element_nodes.push_back(static_cast<int>(vertices_.size()) + element_edges[el * ne + k]);
        }
      }
    }
    for (std::size_t n = 0; n < t.coords.size(); ++n) {
      if (t.on_boundary[n]) t.boundary_nodes.push_back(static_cast<int>(n));
    }
    tables_[order - 1] = std::move(t);
  }
}

void Mesh::build_locator() {
  box_lower_ = vertices_.front();
  box_upper_ = vertices_.front();
  for (const auto& v : vertices_) {
    box_lower_ = box_lower_.cwiseMin(v);
    box_upper_ = box_upper_.cwiseMax(v);
  }
  const double per_axis = std::pow(static_cast<double>(elements_.size()), 1.0 / dim_);
  for (int a = 0; a < dim_; ++a) buckets_[a] = std::max(1, static_cast<int>(std::ceil(per_axis)));
  if (dim_ == 1) buckets_[1] = 1;
  bucket_elements_.assign(static_cast<std::size_t>(buckets_[0]) * buckets_[1], {});

  auto bucket_of = [&](double x, int a) {
    const double extent = box_upper_(a) - box_lower_(a);
    const int b = static_cast<int>(std::floor((x - box_lower_(a)) / extent * buckets_[a]));
    return std::clamp(b, 0, buckets_[a] - 1);
  };
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    Coord lo = vertices_[elements_[e][0]];
    Coord hi = lo;
    for (int i = 1; i <= dim_; ++i) {
      lo = lo.cwiseMin(vertices_[elements_[e][i]]);
      hi = hi.cwiseMax(vertices_[elements_[e][i]]);
    }
    const int i0 = bucket_of(lo(0), 0), i1 = bucket_of(hi(0), 0);
    const int j0 = dim_ == 2 ? bucket_of(lo(1), 1) : 0;
    const int j1 = dim_ == 2 ? bucket_of(hi(1), 1) : 0;
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        bucket_elements_[static_cast<std::size_t>(j) * buckets_[0] + i].push_back(static_cast<int>(e));
      }
    }
  }
}

std::optional<std::pair<std::size_t, Coord>> Mesh::locate(const Coord& x) const {
  auto bucket_of = [&](double v, int a) {
    const double extent = box_upper_(a) - box_lower_(a);
    const int b = static_cast<int>(std::floor((v - box_lower_(a)) / extent * buckets_[a]));
    return std::clamp(b, 0, buckets_[a] - 1);
  };
  const int i = bucket_of(x(0), 0);
  const int j = dim_ == 2 ? bucket_of(x(1), 1) : 0;
  const auto& reference = *references_[0];
  std::optional<std::pair<std::size_t, Coord>> best;
  double best_violation = 1e-10;
  for (int e : bucket_elements_[static_cast<std::size_t>(j) * buckets_[0] + i]) {
    const Coord xi = geometry_[e].pullback(x);
    const double violation = -reference.barycentric(xi).minCoeff();
    if (violation <= best_violation) {
      best_violation = violation;
      best = std::make_pair(static_cast<std::size_t>(e), xi);
      if (violation <= 0.0) break;
    }
  }
  if (best) {
    // snap to the closed simplex
    Coord& xi = best->second;
    xi = xi.cwiseMax(0.0);
    const double s = xi.sum();
    if (s > 1.0) xi /= s;
  }
  return best;
}

void Mesh::write(std::ostream& os) const {
  os.precision(17);
  for (const auto& v : vertices_) {
    os << "v " << v(0);
    if (dim_ == 2) os << ' ' << v(1);
    os << '\n';
  }
  for (const auto& el : elements_) {
    os << "e " << el[0] << ' ' << el[1];
    if (dim_ == 2) os << ' ' << el[2];
    os << '\n';
  }
}

Mesh build_uniform_mesh(const Box& domain, int subdivisions) {
  if (subdivisions < 1) throw InvalidDomain("subdivisions must be >= 1");
  const int d = domain.dim();
  if (d != 1 && d != 2) throw InvalidDomain("domain must be an interval or a rectangle");
  for (int a = 0; a < d; ++a) {
    if (!(domain.upper(a) > domain.lower(a))) throw InvalidDomain("degenerate box");
  }
  const int k = subdivisions;
  std::vector<Coord> vertices;
  std::vector<std::array<int, 3>> elements;
  if (d == 1) {
    for (int i = 0; i <= k; ++i) {
      vertices.push_back(make_coord(domain.lower(0) + (domain.upper(0) - domain.lower(0)) * i / k));
    }
    for (int i = 0; i < k; ++i) elements.push_back({i, i + 1, -1});
    return Mesh(1, std::move(vertices), std::move(elements));
  }
  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i <= k; ++i) {
      vertices.push_back(make_coord(domain.lower(0) + (domain.upper(0) - domain.lower(0)) * i / k,
                                    domain.lower(1) + (domain.upper(1) - domain.lower(1)) * j / k));
    }
  }
  auto id = [k](int i, int j) { return j * (k + 1) + i; };
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(2, std::move(vertices), std::move(elements));
}

Mesh refine(const Mesh& mesh) {
  std::vector<Coord> vertices = mesh.vertices();
  std::map<std::array<int, 2>, int> midpoint;
  auto mid = [&](int a, int b) {
    const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto [it, inserted] = midpoint.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(0.5 * (mesh.vertices()[a] + mesh.vertices()[b]));
    return it->second;
  };
  std::vector<std::array<int, 3>> elements;
  elements.reserve(mesh.num_elements() * (mesh.dim() == 1 ? 2 : 4));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    if (mesh.dim() == 1) {
      const int m = mid(el[0], el[1]);
      elements.push_back({el[0], m, -1});
      elements.push_back({m, el[1], -1});
    } else {
      const int m01 = mid(el[0], el[1]);
      const int m12 = mid(el[1], el[2]);
      const int m02 = mid(el[0], el[2]);
      elements.push_back({el[0], m01, m02});
      elements.push_back({m01, el[1], m12});
      elements.push_back({m02, m12, el[2]});
      elements.push_back({m01, m12, m02});
    }
  }
  return Mesh(mesh.dim(), std::move(vertices), std::move(elements));
}

}  // namespace gfe
