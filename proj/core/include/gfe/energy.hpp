#pragma once

// Harmonic energy  J(u) = 1/2 int |du|_g^2 dx  of geodesic finite element
// functions, its first variation with respect to the nodal values and its
// second variation along interpolated vector fields.

#include <vector>

#include "gfe/interpolation.hpp"

namespace gfe {

struct EnergyValue {
  double total = 0.0;
  std::vector<double> per_element;
};

/// Riemannian gradient entries, one tangent vector per listed node.
struct NodalGradient {
  std::vector<int> nodes;
  std::vector<Vector> vectors;

  double norm(const Manifold& manifold) const;
};

/// Default quadrature degree for energy assembly.
inline int energy_quadrature_degree(int order) { return 2 * order + 2; }

/// Nodes that are not on the domain boundary.
std::vector<int> free_nodes(const GfeFunction& u);

EnergyValue harmonic_energy(const GfeFunction& u, const QuadratureRule& quad);

/// Energy together with the gradient at every node (boundary nodes included).
struct EnergyAndGradient {
  EnergyValue energy;
  std::vector<Vector> gradient;
};
EnergyAndGradient energy_and_gradient(const GfeFunction& u, const QuadratureRule& quad);

NodalGradient energy_gradient(const GfeFunction& u, const QuadratureRule& quad,
                              const std::vector<int>& nodes);

/// delta^2 J(u)(V, W) = int <nabla W, nabla V> - <du, R(du, W) V>, u the common base.
double second_variation(const GfeVectorField& v, const GfeVectorField& w, const QuadratureRule& quad);

/// int |nabla V|^2.
double vector_dirichlet_energy(const GfeVectorField& v, const QuadratureRule& quad);

}  // namespace gfe
