#pragma once

// NURBS geometry maps, boundary faces, Gauss-Legendre quadrature and the
// exact benchmark geometries.

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "igac/splines.hpp"

namespace igac {

/// Tensor-product NURBS map from ]0,1[^d onto a physical body, d in {2,3}.
/// Control points are stored one row per basis function (flat index).
class NurbsPatch {
 public:
  NurbsPatch() = default;
  NurbsPatch(TensorBasis basis, Eigen::MatrixXd control, Eigen::VectorXd weights);

  int dim() const { return basis_.dim(); }
  const TensorBasis& basis() const { return basis_; }
  const KnotVector& knots(int dir) const { return basis_.dir(dir); }
  int degree(int dir) const { return basis_.dir(dir).degree(); }
  const Eigen::MatrixXd& control_points() const { return control_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  int num_elements() const { return basis_.num_elements(); }

  /// Elevates every single-element direction to `degree`.
  NurbsPatch elevated(int degree) const;
  /// Inserts the knots of `fine` missing from direction `dir`.
  NurbsPatch refined_to(int dir, const KnotVector& fine) const;
  /// Bisects every span in every direction `levels` times.
  NurbsPatch refined_uniform(int levels) const;

 private:
  TensorBasis basis_;
  Eigen::MatrixXd control_;
  Eigen::VectorXd weights_;
};

/// Rational basis functions, their gradients and the map at one point.
struct PointShape {
  Eigen::VectorXd x;
  Eigen::MatrixXd jac;   // jac(i,j) = dx_i / dxi_j
  double det = 0.0;
  std::vector<int> index;  // flat control-point indices of the nonzero functions
  Eigen::VectorXd N;
  Eigen::MatrixXd dN_dxi;  // nloc x d
  Eigen::MatrixXd dN_dx;   // nloc x d, filled when physical gradients are requested
};

/// Reusable evaluator; holds scratch buffers so repeated calls do not allocate.
class ShapeEvaluator {
 public:
  explicit ShapeEvaluator(const NurbsPatch& patch);
  /// Throws DegenerateGeometry when physical gradients are requested at a
  /// point with det <= 0.
  const PointShape& eval(std::span<const double> xi, bool physical_grads = true);

 private:
  const NurbsPatch* patch_;
  PointShape s_;
  std::array<Eigen::MatrixXd, 3> ders_;
  std::array<int, 3> span_{};
};

struct MapEval {
  Eigen::VectorXd x;
  Eigen::MatrixXd jac;
  double det = 0.0;
};

/// x = sum C_i N_i(xi), Jacobian and determinant. Throws DegenerateGeometry
/// when det <= 0.
MapEval eval_map(const NurbsPatch& patch, std::span<const double> xi);

enum class Side { Start = 0, End = 1 };

/// Face of the parametric cube, xi_dir = 0 (Start) or 1 (End).
struct Face {
  int dir = 0;
  Side side = Side::Start;
  bool operator==(const Face&) const = default;
};

class BoundaryFace {
 public:
  BoundaryFace(std::shared_ptr<const NurbsPatch> patch, Face face);

  const NurbsPatch& patch() const { return *patch_; }
  std::shared_ptr<const NurbsPatch> patch_ptr() const { return patch_; }
  Face face() const { return face_; }
  /// Parametric directions spanning the face, increasing order.
  const std::vector<int>& face_dirs() const { return face_dirs_; }
  /// Induced (d-1)-dimensional basis, the restriction of the volume basis.
  const TensorBasis& basis() const { return basis_; }
  /// Volume control points of the face-adjacent layer, in face flat order.
  const std::vector<int>& layer() const { return layer_; }
  /// Full parametric point from a face point.
  std::array<double, 3> to_volume(std::span<const double> xi_face) const;
  /// +1 for the End side, -1 for the Start side.
  double orientation() const { return face_.side == Side::End ? 1.0 : -1.0; }

 private:
  std::shared_ptr<const NurbsPatch> patch_;
  Face face_;
  std::vector<int> face_dirs_;
  TensorBasis basis_;
  std::vector<int> layer_;
};

struct FrameEval {
  Eigen::VectorXd x;
  Eigen::VectorXd normal;  // unit outward normal of the body
  double measure = 0.0;    // dGamma / dxi_face
};

/// Outward normal from the cofactor column of the Jacobian (Nanson).
/// Throws DegenerateGeometry when the tangents collapse.
FrameEval boundary_frame(const BoundaryFace& face, std::span<const double> xi_face);
/// Same, reusing an already evaluated shape at the face point.
FrameEval boundary_frame(const BoundaryFace& face, const PointShape& shape);

/// Gauss-Legendre points and weights on [0,1].
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule1D gauss_legendre(int n);

struct QuadPoint {
  std::array<double, 3> xi{};
  double weight = 0.0;  // parametric weight (product of 1D weights x element size)
};

/// Tensor Gauss-Legendre rule, n points per direction in every element
/// delimited by the breakpoints.
class QuadratureRule {
 public:
  QuadratureRule(std::vector<std::vector<double>> breakpoints, int n);

  int dim() const { return static_cast<int>(breaks_.size()); }
  int points_per_dir() const { return rule_.points.size(); }
  int num_elements() const;
  /// Elements counted with direction 0 fastest.
  std::array<int, 3> element_multi(int elem) const;
  std::vector<QuadPoint> element_points(int elem) const;
  void element_points(int elem, std::vector<QuadPoint>& out) const;
  /// Total parametric measure of element elem.
  double element_measure(int elem) const;

 private:
  std::vector<std::vector<double>> breaks_;
  GaussRule1D rule_;
};

QuadratureRule gauss_rule(std::vector<std::vector<double>> breakpoints, int n);
/// Rule over the elements of a patch.
QuadratureRule gauss_rule(const NurbsPatch& patch, int n);
/// Rule over the elements of a face (face directions only).
QuadratureRule gauss_rule(const BoundaryFace& face, int n);

/// Breakpoints with round(fraction_elems*n_elems) uniform spans inside the
/// fraction_length band at refined_end and the rest uniform elsewhere.
std::vector<double> graded_knots(int n_elems, double fraction_elems, double fraction_length,
                                 Side refined_end);
std::vector<double> uniform_knots(int n_elems);

/// Exact quarter disc {x >= 0, y <= 0, |x| <= R}, degree 2, one element.
/// Direction 0 is radial (0 at the centre, 1 on the arc), direction 1 runs
/// along the arc from the pole (0,-R) to (R,0).
NurbsPatch make_quarter_disc(double R);

/// Exact octant {x,y >= 0, z <= 0, |x| <= R}, degree 2, one element.
/// Direction 0 radial, direction 1 colatitude from the pole (0,0,-R),
/// direction 2 longitude between the symmetry planes.
NurbsPatch make_octant_sphere(double R);

/// Axis-aligned box [0,L0]x[0,L1](x[0,L2]) of degree p, one element per
/// direction, unit weights.
NurbsPatch make_box(std::span<const double> lengths, int degree);

/// Elevates a one-element patch to `degree` and inserts the interior
/// breakpoints of each direction.
NurbsPatch build_mesh(const NurbsPatch& coarse, int degree,
                      const std::vector<std::vector<double>>& breakpoints);

/// Largest physical element diameter, sampled on a 3^d lattice per element.
double max_element_diameter(const NurbsPatch& patch);
double max_element_diameter(const BoundaryFace& face);

}  // namespace igac
