#pragma once

// Discrete displacement space (vector NURBS of degree p with strongly
// imposed Dirichlet data) and the multiplier space (scalar B-splines of
// degree p-2 on the contact face).

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "igac/geometry.hpp"

namespace igac {

/// Constrains `components` of the displacement on a face to `value`.
/// A symmetry condition is a single normal component with value 0.
struct DirichletSpec {
  Face face;
  std::vector<int> components;
  double value = 0.0;
};

/// Displacement numbering. Control points that coincide physically (the
/// collapsed edges of polar parameterizations) share one node so the
/// displacement stays single-valued there.
struct DofMap {
  int dim = 0;
  int num_nodes = 0;
  std::vector<int> node_of_cp;
  /// -1 for constrained DOFs, else position among the free DOFs.
  std::vector<int> free_index;
  std::vector<int> free_dofs;
  std::vector<char> constrained;
  /// Prescribed values on constrained DOFs, 0 elsewhere.
  Eigen::VectorXd prescribed;

  int num_dofs() const { return num_nodes * dim; }
  int num_free() const { return static_cast<int>(free_dofs.size()); }
  int dof(int cp, int comp) const { return node_of_cp[cp] * dim + comp; }
};

class PrimalSpace {
 public:
  PrimalSpace(std::shared_ptr<const NurbsPatch> patch, std::vector<DirichletSpec> dirichlet);

  const NurbsPatch& patch() const { return *patch_; }
  std::shared_ptr<const NurbsPatch> patch_ptr() const { return patch_; }
  int dim() const { return patch_->dim(); }
  int degree() const { return patch_->degree(0); }
  const DofMap& dofs() const { return map_; }
  const std::vector<DirichletSpec>& dirichlet() const { return dirichlet_; }
  /// Non-fatal diagnostics, e.g. an empty Dirichlet boundary.
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Full coefficient vector with prescribed values scaled by `factor`
  /// and zeros on free DOFs.
  Eigen::VectorXd lifting(double factor = 1.0) const;
  /// u(x) at a parametric point from a full coefficient vector.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& u, std::span<const double> xi) const;

 private:
  std::shared_ptr<const NurbsPatch> patch_;
  std::vector<DirichletSpec> dirichlet_;
  DofMap map_;
  std::vector<std::string> warnings_;
};

PrimalSpace build_primal(std::shared_ptr<const NurbsPatch> patch, std::vector<DirichletSpec> dirichlet);

/// Values of the multiplier basis functions nonzero at a face point.
struct DualEval {
  std::vector<int> index;
  std::vector<double> value;
};

class DualSpace {
 public:
  /// `primal_degree` must be >= 2; the multiplier degree is primal_degree-2.
  DualSpace(BoundaryFace face, int primal_degree);

  const BoundaryFace& face() const { return face_; }
  const TensorBasis& basis() const { return basis_; }
  int degree() const { return basis_.dir(0).degree(); }
  int size() const { return basis_.size(); }
  /// Integral of B_K over the contact face in the physical measure.
  const Eigen::VectorXd& measures() const { return measure_; }
  /// Face elements where B_K is nonzero.
  const std::vector<int>& support(int K) const { return support_[K]; }
  /// Face parametric Greville point of B_K.
  std::array<double, 2> greville(int K) const;

  void eval(std::span<const double> xi_face, DualEval& out) const;
  DualEval eval(std::span<const double> xi_face) const;

 private:
  BoundaryFace face_;
  TensorBasis basis_;
  Eigen::VectorXd measure_;
  std::vector<std::vector<int>> support_;
};

DualSpace build_dual(const BoundaryFace& face, int primal_degree);

/// Evaluates v_n = v . n on a face for a fixed unit vector n.
class NormalTrace {
 public:
  NormalTrace(const PrimalSpace& space, BoundaryFace face, Eigen::VectorXd normal);

  const BoundaryFace& face() const { return face_; }
  double eval(const Eigen::VectorXd& v, std::span<const double> xi_face) const;
  /// Sparse row (dof, coefficient) with v_n = sum coefficient * v[dof].
  std::vector<std::pair<int, double>> row(std::span<const double> xi_face) const;

 private:
  const PrimalSpace* space_;
  BoundaryFace face_;
  Eigen::VectorXd n_;
};

NormalTrace trace_normal(const PrimalSpace& space, const BoundaryFace& face, const Eigen::VectorXd& n);

}  // namespace igac
