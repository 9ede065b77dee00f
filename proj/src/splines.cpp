#include "igac/splines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "igac/errors.hpp"

namespace igac {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  if (degree_ < 0 || degree_ > kMaxDegree) {
    throw UnsupportedDegree("knot vector degree " + std::to_string(degree_) +
                            " outside [0," + std::to_string(kMaxDegree) + "]");
  }
  const auto n = knots_.size();
  if (n < static_cast<std::size_t>(2 * (degree_ + 1))) {
    throw std::invalid_argument("knot vector too short for its degree");
  }
  if (!std::is_sorted(knots_.begin(), knots_.end())) {
    throw std::invalid_argument("knot vector is not non-decreasing");
  }
  if (knots_.front() < 0.0 || knots_.back() > 1.0 || knots_.front() >= knots_.back()) {
    throw std::invalid_argument("knot vector must span a subrange of [0,1]");
  }
  breaks_.push_back(knots_.front());
  for (double k : knots_) {
    if (k > breaks_.back()) breaks_.push_back(k);
  }
  const auto mult = multiplicities();
  if (mult.front() != degree_ + 1 || mult.back() != degree_ + 1) {
    throw std::invalid_argument("knot vector is not open: end multiplicity must be degree+1");
  }
  const int max_interior = std::max(degree_, 1);
  for (std::size_t j = 1; j + 1 < mult.size(); ++j) {
    if (mult[j] > max_interior) {
      throw std::invalid_argument("interior knot multiplicity exceeds degree");
    }
  }
  for (int i = 0; i + 1 < static_cast<int>(knots_.size()); ++i) {
    if (knots_[i] < knots_[i + 1]) elem_span_.push_back(i);
  }
}

KnotVector KnotVector::from_breakpoints(int degree, std::span<const double> breaks) {
  if (breaks.size() < 2) throw std::invalid_argument("need at least two breakpoints");
  std::vector<double> k;
  k.insert(k.end(), degree + 1, breaks.front());
  for (std::size_t i = 1; i + 1 < breaks.size(); ++i) k.push_back(breaks[i]);
  k.insert(k.end(), degree + 1, breaks.back());
  return KnotVector(degree, std::move(k));
}

std::vector<int> KnotVector::multiplicities() const {
  std::vector<int> m(breaks_.size(), 0);
  std::size_t j = 0;
  for (double k : knots_) {
    while (breaks_[j] < k) ++j;
    ++m[j];
  }
  return m;
}

bool KnotVector::is_smooth() const {
  const auto m = multiplicities();
  for (std::size_t j = 1; j + 1 < m.size(); ++j) {
    if (m[j] > degree_ - 1) return false;
  }
  return true;
}

int KnotVector::find_span(double xi) const {
  if (!(xi >= first() && xi <= last())) {
    std::ostringstream os;
    os << "parametric value " << xi << " outside knot range [" << first() << ", " << last() << "]";
    throw DomainError(os.str());
  }
  if (xi == last()) return elem_span_.back();
  auto it = std::upper_bound(knots_.begin(), knots_.end(), xi);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int KnotVector::find_element(double xi) const {
  const int span = find_span(xi);
  auto it = std::lower_bound(elem_span_.begin(), elem_span_.end(), span);
  return static_cast<int>(it - elem_span_.begin());
}

std::vector<double> KnotVector::greville() const {
  std::vector<double> g(size());
  for (int i = 0; i < size(); ++i) {
    if (degree_ == 0) {
      g[i] = 0.5 * (knots_[i] + knots_[i + 1]);
    } else {
      double s = 0.0;
      for (int j = 1; j <= degree_; ++j) s += knots_[i + j];
      g[i] = s / degree_;
    }
  }
  return g;
}

int find_span(const KnotVector& kv, double xi) { return kv.find_span(xi); }

void eval_basis_into(const KnotVector& kv, double xi, int deriv_order, int& span,
                     Eigen::Ref<Eigen::MatrixXd> ders) {
  const int p = kv.degree();
  const auto& U = kv.knots();
  span = kv.find_span(xi);
  ders.setZero();
  const int nd = std::min(deriv_order, p);

  // Triangular table of basis values (upper) and knot differences (lower).
  double ndu[kMaxDegree + 1][kMaxDegree + 1];
  double left[kMaxDegree + 1], right[kMaxDegree + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[span + 1 - j];
    right[j] = U[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu[j][p];

  double a[2][kMaxDegree + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
}

BasisEval eval_basis(const KnotVector& kv, double xi, int deriv_order) {
  if (deriv_order < 0) throw std::invalid_argument("negative derivative order");
  BasisEval out;
  out.ders = Eigen::MatrixXd::Zero(deriv_order + 1, kv.degree() + 1);
  eval_basis_into(kv, xi, deriv_order, out.span, out.ders);
  out.first = out.span - kv.degree();
  return out;
}

KnotVector refine_uniform(const KnotVector& kv, int levels) {
  if (levels < 0) throw std::invalid_argument("refinement levels must be non-negative");
  std::vector<double> knots = kv.knots();
  for (int l = 0; l < levels; ++l) {
    std::vector<double> next;
    next.reserve(2 * knots.size());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      next.push_back(knots[i]);
      if (knots[i] < knots[i + 1]) next.push_back(0.5 * (knots[i] + knots[i + 1]));
    }
    next.push_back(knots.back());
    knots = std::move(next);
  }
  return KnotVector(kv.degree(), std::move(knots));
}

KnotVector trim_for_dual(const KnotVector& kv) {
  if (kv.degree() < 2) {
    throw UnsupportedDegree("multiplier space needs primal degree >= 2, got " +
                            std::to_string(kv.degree()));
  }
  const auto& k = kv.knots();
  return KnotVector(kv.degree() - 2, std::vector<double>(k.begin() + 2, k.end() - 2));
}

std::vector<double> knot_difference(const KnotVector& coarse, const KnotVector& fine) {
  if (coarse.degree() != fine.degree()) {
    throw std::invalid_argument("knot vectors have different degrees");
  }
  std::vector<double> diff;
  std::size_t i = 0;
  for (double k : fine.knots()) {
    if (i < coarse.knots().size() && coarse.knots()[i] == k) {
      ++i;
    } else {
      diff.push_back(k);
    }
  }
  if (i != coarse.knots().size()) {
    throw std::invalid_argument("fine knot vector does not contain the coarse one");
  }
  return diff;
}

void insert_knots(KnotVector& kv, Eigen::MatrixXd& coeffs, std::span<const double> new_knots) {
  const int p = kv.degree();
  std::vector<double> U = kv.knots();
  Eigen::MatrixXd P = coeffs;
  for (double t : new_knots) {
    if (!(t > U.front() && t < U.back())) {
      throw std::invalid_argument("inserted knots must lie strictly inside the knot range");
    }
    const KnotVector cur(p, U);
    const int k = cur.find_span(t);
    const int n = static_cast<int>(P.rows());
    Eigen::MatrixXd Q(n + 1, P.cols());
    for (int i = 0; i <= k - p; ++i) Q.row(i) = P.row(i);
    for (int i = k - p + 1; i <= k; ++i) {
      const double alpha = (t - U[i]) / (U[i + p] - U[i]);
      Q.row(i) = alpha * P.row(i) + (1.0 - alpha) * P.row(i - 1);
    }
    for (int i = k + 1; i <= n; ++i) Q.row(i) = P.row(i - 1);
    U.insert(U.begin() + k + 1, t);
    P = std::move(Q);
  }
  kv = KnotVector(p, std::move(U));
  coeffs = std::move(P);
}

void elevate_bezier(KnotVector& kv, Eigen::MatrixXd& coeffs) {
  const int p = kv.degree();
  if (kv.num_elements() != 1) {
    throw std::invalid_argument("degree elevation is only implemented for single-element vectors");
  }
  if (p + 1 > kMaxDegree) throw UnsupportedDegree("degree elevation beyond maximum degree");
  Eigen::MatrixXd Q(p + 2, coeffs.cols());
  Q.row(0) = coeffs.row(0);
  Q.row(p + 1) = coeffs.row(p);
  for (int i = 1; i <= p; ++i) {
    const double a = static_cast<double>(i) / (p + 1);
    Q.row(i) = a * coeffs.row(i - 1) + (1.0 - a) * coeffs.row(i);
  }
  std::vector<double> U(p + 2, kv.first());
  U.insert(U.end(), p + 2, kv.last());
  kv = KnotVector(p + 1, std::move(U));
  coeffs = std::move(Q);
}

TensorBasis::TensorBasis(std::vector<KnotVector> dirs) : dirs_(std::move(dirs)) {
  if (dirs_.empty() || dirs_.size() > 3) {
    throw std::invalid_argument("tensor basis needs 1 to 3 directions");
  }
  total_ = 1;
  for (const auto& kv : dirs_) total_ *= kv.size();
}

int TensorBasis::num_elements() const {
  int n = 1;
  for (const auto& kv : dirs_) n *= kv.num_elements();
  return n;
}

int TensorBasis::flat(const std::array<int, 3>& m) const {
  int f = 0;
  for (int d = dim() - 1; d >= 0; --d) f = f * dirs_[d].size() + m[d];
  return f;
}

std::array<int, 3> TensorBasis::multi(int f) const {
  std::array<int, 3> m{0, 0, 0};
  for (int d = 0; d < dim(); ++d) {
    m[d] = f % dirs_[d].size();
    f /= dirs_[d].size();
  }
  return m;
}

std::array<int, 3> TensorBasis::element_multi(int e) const {
  std::array<int, 3> m{0, 0, 0};
  for (int d = 0; d < dim(); ++d) {
    const int ne = dirs_[d].num_elements();
    m[d] = e % ne;
    e /= ne;
  }
  return m;
}

}  // namespace igac
