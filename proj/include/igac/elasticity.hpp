#pragma once

// Volume and Neumann assembly: linear elasticity (plane strain in 2D) and
// a compressible Neo-Hookean law for finite strains.

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "igac/geometry.hpp"
#include "igac/spaces.hpp"

namespace igac {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Material {
  enum class Model { Linear, NeoHookean };

  Material() = default;
  Material(Model model, double E, double nu);

  Model model = Model::Linear;
  double E = 1.0;
  double nu = 0.3;

  double lame_lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double lame_mu() const { return E / (2.0 * (1.0 + nu)); }
};

struct AssembledOperator {
  SparseMatrix matrix;   // full displacement numbering, constraints not applied
  Eigen::VectorXd rhs;
};

/// Zero matrix holding every entry coupling two nodes whose basis
/// functions may share an element.
SparseMatrix stiffness_pattern(const PrimalSpace& space);

/// Stiffness of a(u,v) = int sigma(u):eps(v); rhs is zero (no body force).
/// Pass a pattern from stiffness_pattern to skip rebuilding it.
AssembledOperator assemble_linear(const PrimalSpace& space, const Material& mat,
                                  const QuadratureRule& quad, const SparseMatrix* pattern = nullptr);

/// Load vector of a uniform pressure P acting against the outward normal.
Eigen::VectorXd assemble_neumann_pressure(const PrimalSpace& space, const BoundaryFace& face, double P);

struct NeoHookeanSystem {
  Eigen::VectorXd residual;  // internal force, gradient of the stored energy
  SparseMatrix tangent;
};

/// Throws NonPhysicalState when det F <= 0 at any quadrature point.
NeoHookeanSystem assemble_neo_hookean(const PrimalSpace& space, const Material& mat,
                                      const QuadratureRule& quad, const Eigen::VectorXd& u,
                                      const SparseMatrix* pattern = nullptr, bool with_tangent = true);

/// Stored energy of the Neo-Hookean body.
double neo_hookean_energy(const PrimalSpace& space, const Material& mat, const QuadratureRule& quad,
                          const Eigen::VectorXd& u);

/// Cauchy stress at parametric points (for the linear model the small
/// strain stress). In 2D only the in-plane block is returned.
std::vector<Eigen::MatrixXd> eval_stress(const PrimalSpace& space, const Material& mat,
                                         const Eigen::VectorXd& u,
                                         const std::vector<std::array<double, 3>>& points);

}  // namespace igac
