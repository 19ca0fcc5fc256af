#pragma once

// Conforming simplicial grids on intervals and axis-aligned rectangles,
// Lagrange reference elements of order 1 and 2, and quadrature rules.

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace gfe {

/// Coordinates in the physical domain or on the reference simplex (size d).
using Coord = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

// ---------------------------------------------------------------------------
// Reference element

/// Shape function values (l), gradients (l x d) and Hessians (l entries of d x d).
struct ShapeValues {
  Eigen::VectorXd values;
  Eigen::MatrixXd gradients;
  std::vector<Jacobian> hessians;
};

/// Lagrange element of order m on the unit simplex
///   d = 1: [0,1],   d = 2: conv{(0,0), (1,0), (0,1)}.
/// Local numbering: vertices first, then (m = 2) edge midpoints
///   d = 1: 0, 1, 1/2       d = 2: edges (0,1), (1,2), (0,2).
class ReferenceElement {
 public:
  ReferenceElement(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Coord>& nodes() const { return nodes_; }
  double volume() const { return dim_ == 1 ? 1.0 : 0.5; }

  /// Barycentric coordinates of a reference point.
  Eigen::VectorXd barycentric(const Coord& x) const;
  /// Throws OutsideElement when some barycentric coordinate is below -1e-12.
  ShapeValues evaluate(const Coord& x) const;

 private:
  int dim_;
  int order_;
  std::vector<Coord> nodes_;
};

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  std::vector<Coord> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule with n points on [0,1].
QuadratureRule gauss_legendre(int n);
/// Rule on the reference simplex exact for polynomials of total degree <= degree.
/// Throws UnsupportedDegree for degree outside [0, 10].
QuadratureRule quadrature_for(int dim, int degree);

// ---------------------------------------------------------------------------
// Mesh

/// Interval [lower(0), upper(0)] for d = 1 or rectangle for d = 2.
struct Box {
  Coord lower;
  Coord upper;

  static Box interval(double a, double b);
  static Box rectangle(double x0, double x1, double y0, double y1);
  int dim() const { return static_cast<int>(lower.size()); }
};

struct ElementGeometry {
  Coord origin;       // F(0)
  Jacobian jacobian;  // DF
  Jacobian inverse;   // DF^{-1}
  double determinant = 0.0;
  double diameter = 0.0;
  double inradius = 0.0;

  Coord map(const Coord& xi) const { return origin + jacobian * xi; }
  Coord pullback(const Coord& x) const { return inverse * (x - origin); }
};

/// Global numbering of the Lagrange nodes of one polynomial order.
struct NodeTable {
  int order = 1;
  std::vector<Coord> coords;
  std::vector<int> element_nodes;  // nodes_per_element entries per element
  int nodes_per_element = 0;
  std::vector<char> on_boundary;
  std::vector<int> boundary_nodes;

  std::size_t size() const { return coords.size(); }
  const int* element(std::size_t e) const { return element_nodes.data() + e * nodes_per_element; }
};

class Mesh {
 public:
  Mesh(int dim, std::vector<Coord> vertices, std::vector<std::array<int, 3>> elements);

  int dim() const { return dim_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }
  const std::vector<Coord>& vertices() const { return vertices_; }
  const std::array<int, 3>& element(std::size_t e) const { return elements_[e]; }
  const ElementGeometry& geometry(std::size_t e) const { return geometry_[e]; }

  /// Maximal element diameter.
  double width() const { return width_; }
  /// Maximal diameter / inradius over all elements.
  double shape_regularity() const { return shape_regularity_; }
  double volume() const;

  /// Lagrange node table for order 1 or 2.
  const NodeTable& nodes(int order) const;
  const ReferenceElement& reference(int order) const;

  /// Element containing x and the reference coordinates of x in it.
  std::optional<std::pair<std::size_t, Coord>> locate(const Coord& x) const;

  /// Plain-text dump: "v x y" per vertex, "e i j k" per element.
  void write(std::ostream& os) const;

 private:
  void build_node_tables();
  void build_locator();

  int dim_;
  std::vector<Coord> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<ElementGeometry> geometry_;
  double width_ = 0.0;
  double shape_regularity_ = 0.0;
  std::array<NodeTable, 2> tables_;
  std::array<std::shared_ptr<const ReferenceElement>, 2> references_;

  // uniform bucket grid over the bounding box
  Coord box_lower_, box_upper_;
  std::array<int, 2> buckets_{1, 1};
  std::vector<std::vector<int>> bucket_elements_;
};

/// k elements on an interval, or the k x k square grid split into 2k^2
/// triangles along the lower-left to upper-right diagonal.
Mesh build_uniform_mesh(const Box& domain, int subdivisions);

/// Regular (red) refinement: every simplex is split into 2^d similar children.
Mesh refine(const Mesh& mesh);

}  // namespace gfe
