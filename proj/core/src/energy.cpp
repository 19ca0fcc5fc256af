#include "gfe/energy.hpp"

#include <cmath>

#include "gfe/errors.hpp"
#include "gfe/parallel.hpp"

namespace gfe {

namespace {

std::vector<ShapeValues> tabulate(const ReferenceElement& ref, const QuadratureRule& quad) {
  if (quad.dim != ref.dim()) throw Error("quadrature dimension does not match the mesh");
  std::vector<ShapeValues> table;
  table.reserve(quad.size());
  for (const auto& x : quad.points) table.push_back(ref.evaluate(x));
  return table;
}

double sum_in_order(const std::vector<double>& values) {
  long double s = 0.0L;
  for (double v : values) s += v;
  return static_cast<double>(s);
}

void check_same_base(const GfeVectorField& v, const GfeVectorField& w) {
  const GfeFunction& a = v.base();
  const GfeFunction& b = w.base();
  if (a.mesh_ptr() != b.mesh_ptr() || a.order() != b.order() || !(a.manifold() == b.manifold()) ||
      a.values() != b.values()) {
    throw Error("second_variation: vector fields must share their base function");
  }
}

}  // namespace

double NodalGradient::norm(const Manifold& manifold) const {
  long double s = 0.0L;
  for (const auto& v : vectors) s += manifold.inner(v, v);
  return std::sqrt(static_cast<double>(s));
}

std::vector<int> free_nodes(const GfeFunction& u) {
  const NodeTable& table = u.nodes();
  std::vector<int> nodes;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table.on_boundary[i]) nodes.push_back(static_cast<int>(i));
  }
  return nodes;
}

EnergyValue harmonic_energy(const GfeFunction& u, const QuadratureRule& quad) {
  const Mesh& mesh = u.mesh();
  const auto shapes = tabulate(mesh.reference(u.order()), quad);
  EnergyValue result;
  result.per_element.assign(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const ElementGeometry& g = mesh.geometry(e);
    const std::vector<Point> values = u.element_values(e);
    double sum = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const LocalInterpolant local(u.manifold(), values, physical_shape(shapes[k], g));
      double density = 0.0;
      for (const auto& du : local.differential()) density += u.manifold().inner(du, du);
      sum += quad.weights[k] * 0.5 * density;
    }
    result.per_element[e] = sum * g.determinant;
  });
  result.total = sum_in_order(result.per_element);
  return result;
}

EnergyAndGradient energy_and_gradient(const GfeFunction& u, const QuadratureRule& quad) {
  const Mesh& mesh = u.mesh();
  const Manifold& m = u.manifold();
  const NodeTable& table = u.nodes();
  const int l = table.nodes_per_element;
  const auto shapes = tabulate(mesh.reference(u.order()), quad);

  EnergyAndGradient result;
  result.energy.per_element.assign(mesh.num_elements(), 0.0);
  std::vector<std::vector<Vector>> local_gradients(mesh.num_elements());
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const ElementGeometry& g = mesh.geometry(e);
    const std::vector<Point> values = u.element_values(e);
    std::vector<Vector> grad(l, Vector::Zero(m.ambient_dim()));
    double sum = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const LocalInterpolant local(m, values, physical_shape(shapes[k], g));
      const double weight = quad.weights[k] * g.determinant;
      double density = 0.0;
      std::vector<Vector> covectors;
      for (const auto& du : local.differential()) {
        density += m.inner(du, du);
        covectors.push_back(weight * m.lower(du));
      }
      sum += quad.weights[k] * 0.5 * density;
      const std::vector<Vector> pulled = local.pull_back(covectors);
      for (int i = 0; i < l; ++i) grad[i] += pulled[i];
    }
    result.energy.per_element[e] = sum * g.determinant;
    local_gradients[e] = std::move(grad);
  });
  result.energy.total = sum_in_order(result.energy.per_element);

  result.gradient.assign(u.num_nodes(), Vector::Zero(m.ambient_dim()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const int* idx = table.element(e);
    for (int i = 0; i < l; ++i) result.gradient[idx[i]] += local_gradients[e][i];
  }
  for (std::size_t j = 0; j < u.num_nodes(); ++j) {
    result.gradient[j] = m.project(u.value(j), result.gradient[j]);
  }
  return result;
}

NodalGradient energy_gradient(const GfeFunction& u, const QuadratureRule& quad,
                              const std::vector<int>& nodes) {
  EnergyAndGradient full = energy_and_gradient(u, quad);
  NodalGradient g;
  g.nodes = nodes;
  g.vectors.reserve(nodes.size());
  for (int j : nodes) g.vectors.push_back(full.gradient[j]);
  return g;
}

double second_variation(const GfeVectorField& v, const GfeVectorField& w, const QuadratureRule& quad) {
  check_same_base(v, w);
  const GfeFunction& u = v.base();
  const Mesh& mesh = u.mesh();
  const Manifold& m = u.manifold();
  const auto shapes = tabulate(mesh.reference(u.order()), quad);
  std::vector<double> per_element(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const ElementGeometry& g = mesh.geometry(e);
    const std::vector<Point> values = u.element_values(e);
    const std::vector<Vector> vn = v.element_vectors(e);
    const std::vector<Vector> wn = w.element_vectors(e);
    double sum = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const LocalInterpolant local(m, values, physical_shape(shapes[k], g));
      const Vector vi = local.interpolate_vectors(vn);
      const Vector wi = local.interpolate_vectors(wn);
      const auto dv = local.vector_covariant_derivative(vn);
      const auto dw = local.vector_covariant_derivative(wn);
      double density = 0.0;
      for (int a = 0; a < local.dim(); ++a) {
        const Vector& du = local.differential()[a];
        density += m.inner(dw[a], dv[a]) - m.inner(du, m.curvature_op(local.value(), du, wi, vi));
      }
      sum += quad.weights[k] * density;
    }
    per_element[e] = sum * g.determinant;
  });
  return sum_in_order(per_element);
}

double vector_dirichlet_energy(const GfeVectorField& v, const QuadratureRule& quad) {
  const GfeFunction& u = v.base();
  const Mesh& mesh = u.mesh();
  const Manifold& m = u.manifold();
  const auto shapes = tabulate(mesh.reference(u.order()), quad);
  std::vector<double> per_element(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t e) {
    const ElementGeometry& g = mesh.geometry(e);
    const std::vector<Point> values = u.element_values(e);
    const std::vector<Vector> vn = v.element_vectors(e);
    double sum = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const LocalInterpolant local(m, values, physical_shape(shapes[k], g));
      for (const auto& dv : local.vector_covariant_derivative(vn)) sum += quad.weights[k] * m.inner(dv, dv);
    }
    per_element[e] = sum * g.determinant;
  });
  return sum_in_order(per_element);
}

}  // namespace gfe
