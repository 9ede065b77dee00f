#pragma once

// Frictionless contact against a rigid plane with an augmented Lagrangian
// multiplier of degree p-2: gap, weighted-average projection onto the
// multiplier space, active set, residual, tangent and energy.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "igac/elasticity.hpp"
#include "igac/spaces.hpp"

namespace igac {

/// Plane {x : n.x = offset}; n points from the rigid body toward the
/// elastic body, so the signed gap n.x - offset is >= 0 when admissible.
struct RigidPlane {
  RigidPlane() = default;
  RigidPlane(Eigen::VectorXd n, double offset);

  Eigen::VectorXd normal;
  double offset = 0.0;

  double gap(const Eigen::VectorXd& x) const { return normal.dot(x) - offset; }
};

inline double neg_part(double z) { return z < 0.0 ? z : 0.0; }

struct AugmentedParams {
  double r0 = 100.0;
  double h = 1.0;  // largest contact-face element diameter
  double r() const { return r0 / h; }
};

/// r0 and the h of the contact face.
AugmentedParams make_params(double r0, const BoundaryFace& contact_face);

using ActiveSet = std::vector<char>;

/// How the multiplier equations are weighted. Lumped rows scale row K by
/// the measure of B_K, which keeps the saddle-point matrix symmetric;
/// consistent rows use the multiplier mass matrix instead. Both give the
/// same solution and the same Newton iterates, and they coincide for
/// piecewise-constant multipliers.
enum class MultiplierRows { Lumped, Consistent };

/// Precomputed face integrals shared by residual, tangent and energy:
/// measures m_K = int B_K, couplings b_K = int B_K N_A n, the multiplier
/// mass matrix and the projected initial gap.
class ContactSurface {
 public:
  ContactSurface(const PrimalSpace& space, const DualSpace& dual, RigidPlane plane, int points_per_dir = 0);

  const PrimalSpace& space() const { return *space_; }
  const DualSpace& dual() const { return *dual_; }
  const RigidPlane& plane() const { return plane_; }
  int size() const { return static_cast<int>(measure_.size()); }

  const Eigen::VectorXd& measures() const { return measure_; }
  /// Row K holds b_K over the full displacement numbering.
  const SparseMatrix& coupling() const { return coupling_; }
  const SparseMatrix& mass() const { return mass_; }

  /// (Pi g)_K for the gap g = n.(x + u) - offset.
  Eigen::VectorXd projected_gap(const Eigen::VectorXd& u) const;
  /// (Pi v)_K = int v B_K / int B_K for a field given at physical points.
  Eigen::VectorXd project(const std::function<double(const Eigen::VectorXd& x)>& v) const;
  /// K active when the geometric gap is <= tol somewhere on the support of B_K.
  ActiveSet initial_active_set(double tol = 1e-9) const;

 private:
  const PrimalSpace* space_;
  const DualSpace* dual_;
  RigidPlane plane_;
  Eigen::VectorXd measure_;
  SparseMatrix coupling_;
  SparseMatrix mass_;
  Eigen::VectorXd gap0_;  // projected geometric gap
  // quadrature data kept for projections
  std::vector<Eigen::VectorXd> qx_;
  std::vector<double> qw_;
  std::vector<DualEval> qdual_;
  std::vector<std::vector<int>> elem_funcs_;
  std::vector<double> elem_min_gap_;
};

/// (Pi v)_K with the dual space quadrature of n points per direction.
Eigen::VectorXd project(const DualSpace& dual,
                        const std::function<double(const Eigen::VectorXd& x)>& v, int points_per_dir);

/// K active iff lambda_K + r (Pi g)_K < 0; ties are inactive.
ActiveSet update_active_set(const Eigen::VectorXd& lambda, const Eigen::VectorXd& projected_gap, double r);

struct ContactResidual {
  Eigen::VectorXd u;       // full displacement numbering
  Eigen::VectorXd lambda;  // one entry per multiplier
};

ContactResidual contact_residual(const ContactSurface& s, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& lambda, double r, const ActiveSet& active,
                                 MultiplierRows rows = MultiplierRows::Lumped);

struct ContactTangent {
  SparseMatrix uu, ul, lu, ll;
};

ContactTangent contact_tangent(const ContactSurface& s, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& lambda, double r, const ActiveSet& active,
                               MultiplierRows rows = MultiplierRows::Lumped);

/// (1/2r) sum_K m_K ([lambda_K + r (Pi g)_K]_-^2 - lambda_K^2).
double contact_energy(const ContactSurface& s, const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                      double r);

}  // namespace igac
