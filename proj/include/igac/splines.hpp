#pragma once

// Univariate and tensor-product B-spline machinery on the parametric
// domain [0,1]: open knot vectors, Cox-de Boor evaluation with derivatives,
// uniform h-refinement, knot insertion and Bezier degree elevation of
// coefficient arrays.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace igac {

inline constexpr int kMaxDegree = 4;

class KnotVector {
 public:
  KnotVector() = default;
  /// Validates: non-decreasing, values in [0,1], both ends repeated exactly
  /// degree+1 times, interior multiplicities <= max(degree,1).
  KnotVector(int degree, std::vector<double> knots);

  /// Open knot vector of the given degree over the breakpoints, every
  /// interior breakpoint with multiplicity one (maximal smoothness).
  static KnotVector from_breakpoints(int degree, std::span<const double> breaks);

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  double first() const { return knots_.front(); }
  double last() const { return knots_.back(); }
  /// Number of basis functions.
  int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  int num_elements() const { return static_cast<int>(breaks_.size()) - 1; }

  /// Distinct knot values.
  const std::vector<double>& breakpoints() const { return breaks_; }
  /// Multiplicity of each breakpoint.
  std::vector<int> multiplicities() const;
  /// True when every interior multiplicity is <= degree-1 (C^1 or better).
  bool is_smooth() const;

  /// Knot-span index of the nonempty span [knots[i], knots[i+1]) holding xi;
  /// the last knot maps to the last nonempty span.
  int find_span(double xi) const;
  /// Span index of element e (0-based over nonempty spans).
  int element_span(int e) const { return elem_span_[e]; }
  /// Element index owning xi, with the same closure rule as find_span.
  int find_element(double xi) const;

  /// Greville abscissae; for degree 0 the span midpoints.
  std::vector<double> greville() const;

  bool operator==(const KnotVector&) const = default;

 private:
  int degree_ = 0;
  std::vector<double> knots_;
  std::vector<double> breaks_;
  std::vector<int> elem_span_;
};

/// Values and derivatives of the degree+1 functions nonzero at a point.
struct BasisEval {
  int span = 0;
  /// Index of the first nonzero function (span - degree).
  int first = 0;
  /// ders(k, j): k-th derivative of function first+j.
  Eigen::MatrixXd ders;
};

int find_span(const KnotVector& kv, double xi);

/// Cox-de Boor values and derivatives up to deriv_order; rows beyond the
/// degree are zero. Throws DomainError outside the knot range.
BasisEval eval_basis(const KnotVector& kv, double xi, int deriv_order);

/// Allocation-free variant writing into ders (size (deriv_order+1) x (p+1)).
void eval_basis_into(const KnotVector& kv, double xi, int deriv_order, int& span,
                     Eigen::Ref<Eigen::MatrixXd> ders);

/// Bisects every nonempty span `levels` times.
KnotVector refine_uniform(const KnotVector& kv, int levels);

/// Knot vector of degree p-2 used by the multiplier space: the first and
/// last knot values are dropped twice (end multiplicity p+1 -> p-1).
KnotVector trim_for_dual(const KnotVector& kv);

/// Knot values that must be inserted into `coarse` to obtain `fine`.
/// Throws std::invalid_argument when `fine` does not contain `coarse`.
std::vector<double> knot_difference(const KnotVector& coarse, const KnotVector& fine);

/// Boehm knot insertion. coeffs has one row per basis function.
void insert_knots(KnotVector& kv, Eigen::MatrixXd& coeffs, std::span<const double> new_knots);

/// Degree elevation of a single-element (Bezier) knot vector by one.
void elevate_bezier(KnotVector& kv, Eigen::MatrixXd& coeffs);

/// Tensor-product index bookkeeping; direction 0 runs fastest.
class TensorBasis {
 public:
  TensorBasis() = default;
  explicit TensorBasis(std::vector<KnotVector> dirs);

  int dim() const { return static_cast<int>(dirs_.size()); }
  const KnotVector& dir(int d) const { return dirs_[d]; }
  const std::vector<KnotVector>& dirs() const { return dirs_; }
  int count(int d) const { return dirs_[d].size(); }
  int size() const { return total_; }
  int num_elements() const;

  int flat(const std::array<int, 3>& multi) const;
  std::array<int, 3> multi(int flat_index) const;
  std::array<int, 3> element_multi(int elem) const;

 private:
  std::vector<KnotVector> dirs_;
  int total_ = 0;
};

}  // namespace igac
