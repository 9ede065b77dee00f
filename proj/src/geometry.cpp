#include "igac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "igac/errors.hpp"

namespace igac {

namespace {

// Applies a 1D coefficient operation along one direction of a tensor array.
// Coefficient columns are packed as [fiber0 | fiber1 | ...], each fiber
// holding `ncomp` components.
template <class Op>
void along_direction(TensorBasis& basis, Eigen::MatrixXd& coeffs, int dir, Op op) {
  const int dim = basis.dim();
  const int ncomp = static_cast<int>(coeffs.cols());
  const int n_dir = basis.count(dir);
  const int n_fib = basis.size() / n_dir;

  // Fiber f enumerates the other directions, lower directions fastest.
  auto fiber_multi = [&](int f, int i) {
    std::array<int, 3> m{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      if (d == dir) continue;
      m[d] = f % basis.count(d);
      f /= basis.count(d);
    }
    m[dir] = i;
    return m;
  };

  Eigen::MatrixXd packed(n_dir, n_fib * ncomp);
  for (int f = 0; f < n_fib; ++f) {
    for (int i = 0; i < n_dir; ++i) {
      packed.block(i, f * ncomp, 1, ncomp) = coeffs.row(basis.flat(fiber_multi(f, i)));
    }
  }
  KnotVector kv = basis.dir(dir);
  op(kv, packed);

  std::vector<KnotVector> dirs = basis.dirs();
  dirs[dir] = kv;
  TensorBasis out_basis(std::move(dirs));
  Eigen::MatrixXd out(out_basis.size(), ncomp);
  const int n_new = kv.size();
  // fiber_multi only reads counts of the other directions, unchanged.
  for (int f = 0; f < n_fib; ++f) {
    for (int i = 0; i < n_new; ++i) {
      out.row(out_basis.flat(fiber_multi(f, i))) = packed.block(i, f * ncomp, 1, ncomp);
    }
  }
  basis = std::move(out_basis);
  coeffs = std::move(out);
}

Eigen::MatrixXd homogeneous(const NurbsPatch& p) {
  const int d = p.dim();
  Eigen::MatrixXd h(p.control_points().rows(), d + 1);
  for (int i = 0; i < h.rows(); ++i) {
    const double w = p.weights()(i);
    h.block(i, 0, 1, d) = w * p.control_points().row(i);
    h(i, d) = w;
  }
  return h;
}

NurbsPatch from_homogeneous(TensorBasis basis, const Eigen::MatrixXd& h) {
  const int d = static_cast<int>(h.cols()) - 1;
  Eigen::MatrixXd c(h.rows(), d);
  Eigen::VectorXd w(h.rows());
  for (int i = 0; i < h.rows(); ++i) {
    w(i) = h(i, d);
    c.row(i) = h.block(i, 0, 1, d) / w(i);
  }
  return NurbsPatch(std::move(basis), std::move(c), std::move(w));
}

double det_of(const Eigen::MatrixXd& J) {
  if (J.rows() == 2) return J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  return J.determinant();
}

}  // namespace

NurbsPatch::NurbsPatch(TensorBasis basis, Eigen::MatrixXd control, Eigen::VectorXd weights)
    : basis_(std::move(basis)), control_(std::move(control)), weights_(std::move(weights)) {
  if (basis_.dim() < 2 || basis_.dim() > 3) {
    throw std::invalid_argument("NURBS patch dimension must be 2 or 3");
  }
  if (control_.rows() != basis_.size() || weights_.size() != basis_.size()) {
    throw std::invalid_argument("control net size does not match the basis");
  }
  if (control_.cols() != basis_.dim()) {
    throw std::invalid_argument("control points must have the patch dimension");
  }
  if ((weights_.array() <= 0.0).any()) {
    throw std::invalid_argument("NURBS weights must be strictly positive");
  }
}

NurbsPatch NurbsPatch::elevated(int degree) const {
  TensorBasis b = basis_;
  Eigen::MatrixXd h = homogeneous(*this);
  for (int dir = 0; dir < dim(); ++dir) {
    if (b.dir(dir).degree() > degree) {
      throw std::invalid_argument("cannot lower the degree of a patch");
    }
    while (b.dir(dir).degree() < degree) {
      along_direction(b, h, dir, [](KnotVector& kv, Eigen::MatrixXd& c) { elevate_bezier(kv, c); });
    }
  }
  return from_homogeneous(std::move(b), h);
}

NurbsPatch NurbsPatch::refined_to(int dir, const KnotVector& fine) const {
  const auto extra = knot_difference(basis_.dir(dir), fine);
  if (extra.empty()) return *this;
  TensorBasis b = basis_;
  Eigen::MatrixXd h = homogeneous(*this);
  along_direction(b, h, dir, [&](KnotVector& kv, Eigen::MatrixXd& c) { insert_knots(kv, c, extra); });
  return from_homogeneous(std::move(b), h);
}

NurbsPatch NurbsPatch::refined_uniform(int levels) const {
  NurbsPatch out = *this;
  for (int dir = 0; dir < dim(); ++dir) {
    out = out.refined_to(dir, refine_uniform(basis_.dir(dir), levels));
  }
  return out;
}

ShapeEvaluator::ShapeEvaluator(const NurbsPatch& patch) : patch_(&patch) {
  const int d = patch.dim();
  int nloc = 1;
  for (int dir = 0; dir < d; ++dir) {
    ders_[dir] = Eigen::MatrixXd::Zero(2, patch.degree(dir) + 1);
    nloc *= patch.degree(dir) + 1;
  }
  s_.x.resize(d);
  s_.jac.resize(d, d);
  s_.index.resize(nloc);
  s_.N.resize(nloc);
  s_.dN_dxi.resize(nloc, d);
  s_.dN_dx.resize(nloc, d);
}

const PointShape& ShapeEvaluator::eval(std::span<const double> xi, bool physical_grads) {
  const NurbsPatch& P = *patch_;
  const int d = P.dim();
  const auto& basis = P.basis();
  std::array<int, 3> p{0, 0, 0};
  for (int dir = 0; dir < d; ++dir) {
    p[dir] = P.degree(dir);
    eval_basis_into(P.knots(dir), xi[dir], 1, span_[dir], ders_[dir]);
  }
  const int n0 = p[0] + 1, n1 = p[1] + 1, n2 = d == 3 ? p[2] + 1 : 1;
  const auto& w = P.weights();

  double W = 0.0;
  double dW[3] = {0.0, 0.0, 0.0};
  int a = 0;
  for (int k = 0; k < n2; ++k) {
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i, ++a) {
        std::array<int, 3> m{span_[0] - p[0] + i, span_[1] - p[1] + j, 0};
        double v[3] = {ders_[0](0, i), ders_[1](0, j), 1.0};
        double g[3] = {ders_[0](1, i), ders_[1](1, j), 0.0};
        if (d == 3) {
          m[2] = span_[2] - p[2] + k;
          v[2] = ders_[2](0, k);
          g[2] = ders_[2](1, k);
        }
        const int idx = basis.flat(m);
        const double wi = w(idx);
        s_.index[a] = idx;
        const double B = v[0] * v[1] * v[2];
        s_.N(a) = wi * B;
        s_.dN_dxi(a, 0) = wi * g[0] * v[1] * v[2];
        s_.dN_dxi(a, 1) = wi * v[0] * g[1] * v[2];
        if (d == 3) s_.dN_dxi(a, 2) = wi * v[0] * v[1] * g[2];
        W += s_.N(a);
        for (int dir = 0; dir < d; ++dir) dW[dir] += s_.dN_dxi(a, dir);
      }
    }
  }
  const int nloc = a;
  const double invW = 1.0 / W;
  for (int b = 0; b < nloc; ++b) {
    const double Nb = s_.N(b) * invW;
    for (int dir = 0; dir < d; ++dir) {
      s_.dN_dxi(b, dir) = (s_.dN_dxi(b, dir) - Nb * dW[dir]) * invW;
    }
    s_.N(b) = Nb;
  }

  const auto& C = P.control_points();
  s_.x.setZero();
  s_.jac.setZero();
  for (int b = 0; b < nloc; ++b) {
    const auto c = C.row(s_.index[b]);
    for (int i = 0; i < d; ++i) {
      s_.x(i) += s_.N(b) * c(i);
      for (int j = 0; j < d; ++j) s_.jac(i, j) += c(i) * s_.dN_dxi(b, j);
    }
  }
  s_.det = det_of(s_.jac);
  if (physical_grads) {
    if (!(s_.det > 0.0)) {
      throw DegenerateGeometry("non-positive Jacobian determinant " + std::to_string(s_.det));
    }
    s_.dN_dx.noalias() = s_.dN_dxi * s_.jac.inverse();
  }
  return s_;
}

MapEval eval_map(const NurbsPatch& patch, std::span<const double> xi) {
  ShapeEvaluator ev(patch);
  const auto& s = ev.eval(xi, false);
  if (!(s.det > 0.0)) {
    throw DegenerateGeometry("non-positive Jacobian determinant " + std::to_string(s.det));
  }
  return MapEval{s.x, s.jac, s.det};
}

BoundaryFace::BoundaryFace(std::shared_ptr<const NurbsPatch> patch, Face face)
    : patch_(std::move(patch)), face_(face) {
  if (!patch_) throw std::invalid_argument("boundary face without a patch");
  const int d = patch_->dim();
  if (face_.dir < 0 || face_.dir >= d) {
    throw std::invalid_argument("face direction " + std::to_string(face_.dir) +
                                " does not exist on a " + std::to_string(d) + "D patch");
  }
  std::vector<KnotVector> kvs;
  for (int dir = 0; dir < d; ++dir) {
    if (dir == face_.dir) continue;
    face_dirs_.push_back(dir);
    kvs.push_back(patch_->knots(dir));
  }
  basis_ = TensorBasis(std::move(kvs));
  const auto& vb = patch_->basis();
  const int fixed = face_.side == Side::End ? vb.count(face_.dir) - 1 : 0;
  layer_.resize(basis_.size());
  for (int f = 0; f < basis_.size(); ++f) {
    const auto fm = basis_.multi(f);
    std::array<int, 3> m{0, 0, 0};
    for (std::size_t k = 0; k < face_dirs_.size(); ++k) m[face_dirs_[k]] = fm[k];
    m[face_.dir] = fixed;
    layer_[f] = vb.flat(m);
  }
}

std::array<double, 3> BoundaryFace::to_volume(std::span<const double> xi_face) const {
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < face_dirs_.size(); ++k) xi[face_dirs_[k]] = xi_face[k];
  xi[face_.dir] = face_.side == Side::End ? patch_->knots(face_.dir).last()
                                          : patch_->knots(face_.dir).first();
  return xi;
}

FrameEval boundary_frame(const BoundaryFace& face, const PointShape& s) {
  const int d = static_cast<int>(s.jac.rows());
  const int k = face.face().dir;
  const auto& J = s.jac;
  Eigen::VectorXd cof(d);
  double scale = 1.0;
  if (d == 2) {
    // Cofactor column k of a 2x2 matrix.
    if (k == 0) {
      cof << J(1, 1), -J(0, 1);
    } else {
      cof << -J(1, 0), J(0, 0);
    }
    scale = J.col(1 - k).norm();
  } else {
    const Eigen::Vector3d t1 = J.col((k + 1) % 3);
    const Eigen::Vector3d t2 = J.col((k + 2) % 3);
    cof = t1.cross(t2);
    scale = t1.norm() * t2.norm();
  }
  const double m = cof.norm();
  if (!(m > 1e-13 * scale) || m == 0.0) {
    throw DegenerateGeometry("boundary tangents collapse at the evaluation point");
  }
  FrameEval out;
  out.x = s.x;
  out.normal = (face.orientation() / m) * cof;
  out.measure = m;
  return out;
}

FrameEval boundary_frame(const BoundaryFace& face, std::span<const double> xi_face) {
  ShapeEvaluator ev(face.patch());
  const auto xi = face.to_volume(xi_face);
  const auto& s = ev.eval(std::span<const double>(xi.data(), face.patch().dim()), false);
  return boundary_frame(face, s);
}

GaussRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one point");
  // Legendre P_n and its derivative by the three-term recurrence.
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  GaussRule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    // Roots come in decreasing order; map [-1,1] onto [0,1].
    r.points[i] = 0.5 * (1.0 - x);
    r.points[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

QuadratureRule::QuadratureRule(std::vector<std::vector<double>> breakpoints, int n)
    : breaks_(std::move(breakpoints)), rule_(gauss_legendre(n)) {
  if (breaks_.empty() || breaks_.size() > 3) {
    throw std::invalid_argument("quadrature rule needs 1 to 3 directions");
  }
  for (const auto& b : breaks_) {
    if (b.size() < 2 || !std::is_sorted(b.begin(), b.end())) {
      throw std::invalid_argument("breakpoints must be increasing with at least two entries");
    }
  }
}

int QuadratureRule::num_elements() const {
  int n = 1;
  for (const auto& b : breaks_) n *= static_cast<int>(b.size()) - 1;
  return n;
}

std::array<int, 3> QuadratureRule::element_multi(int e) const {
  std::array<int, 3> m{0, 0, 0};
  for (int d = 0; d < dim(); ++d) {
    const int ne = static_cast<int>(breaks_[d].size()) - 1;
    m[d] = e % ne;
    e /= ne;
  }
  return m;
}

double QuadratureRule::element_measure(int e) const {
  const auto m = element_multi(e);
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= breaks_[d][m[d] + 1] - breaks_[d][m[d]];
  return v;
}

void QuadratureRule::element_points(int e, std::vector<QuadPoint>& out) const {
  const auto m = element_multi(e);
  const int n = points_per_dir();
  const int dm = dim();
  int total = 1;
  for (int d = 0; d < dm; ++d) total *= n;
  out.resize(total);
  double lo[3], len[3];
  for (int d = 0; d < dm; ++d) {
    lo[d] = breaks_[d][m[d]];
    len[d] = breaks_[d][m[d] + 1] - lo[d];
  }
  for (int q = 0; q < total; ++q) {
    int r = q;
    QuadPoint qp;
    qp.weight = 1.0;
    for (int d = 0; d < dm; ++d) {
      const int i = r % n;
      r /= n;
      qp.xi[d] = lo[d] + len[d] * rule_.points[i];
      qp.weight *= len[d] * rule_.weights[i];
    }
    out[q] = qp;
  }
}

std::vector<QuadPoint> QuadratureRule::element_points(int e) const {
  std::vector<QuadPoint> out;
  element_points(e, out);
  return out;
}

QuadratureRule gauss_rule(std::vector<std::vector<double>> breakpoints, int n) {
  return QuadratureRule(std::move(breakpoints), n);
}

QuadratureRule gauss_rule(const NurbsPatch& patch, int n) {
  std::vector<std::vector<double>> b;
  for (int d = 0; d < patch.dim(); ++d) b.push_back(patch.knots(d).breakpoints());
  return QuadratureRule(std::move(b), n);
}

QuadratureRule gauss_rule(const BoundaryFace& face, int n) {
  std::vector<std::vector<double>> b;
  for (int d : face.face_dirs()) b.push_back(face.patch().knots(d).breakpoints());
  return QuadratureRule(std::move(b), n);
}

std::vector<double> uniform_knots(int n_elems) {
  if (n_elems < 1) throw std::invalid_argument("need at least one element");
  std::vector<double> b(n_elems + 1);
  for (int i = 0; i <= n_elems; ++i) b[i] = static_cast<double>(i) / n_elems;
  return b;
}

std::vector<double> graded_knots(int n_elems, double fraction_elems, double fraction_length,
                                 Side refined_end) {
  if (n_elems < 2) throw std::invalid_argument("graded knots need at least 2 elements");
  if (!(fraction_length > 0.0 && fraction_length < 1.0)) {
    throw std::invalid_argument("fraction_length must lie in (0,1)");
  }
  const int k = static_cast<int>(std::lround(fraction_elems * n_elems));
  if (k < 1) throw std::invalid_argument("grading leaves no span inside the refined band");
  if (k >= n_elems) throw std::invalid_argument("grading leaves no span outside the refined band");
  const int outer = n_elems - k;
  // Built for refinement at the start, mirrored afterwards.
  std::vector<double> b;
  b.reserve(n_elems + 1);
  for (int i = 0; i <= k; ++i) b.push_back(fraction_length * i / k);
  for (int i = 1; i <= outer; ++i) {
    b.push_back(fraction_length + (1.0 - fraction_length) * i / outer);
  }
  b.back() = 1.0;
  if (refined_end == Side::End) {
    std::vector<double> m(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) m[i] = 1.0 - b[b.size() - 1 - i];
    m.front() = 0.0;
    return m;
  }
  return b;
}

NurbsPatch make_quarter_disc(double R) {
  if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
  const double s = std::sqrt(0.5);
  const double arc[3][2] = {{0.0, -R}, {R, -R}, {R, 0.0}};
  const double aw[3] = {1.0, s, 1.0};
  const double eta[3] = {0.0, 0.5, 1.0};
  const std::vector<double> bez = {0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  TensorBasis basis({KnotVector(2, bez), KnotVector(2, bez)});
  Eigen::MatrixXd C(9, 2);
  Eigen::VectorXd w(9);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      const int f = basis.flat({i, j, 0});
      C(f, 0) = eta[i] * arc[j][0];
      C(f, 1) = eta[i] * arc[j][1];
      w(f) = aw[j];
    }
  }
  return NurbsPatch(std::move(basis), std::move(C), std::move(w));
}

NurbsPatch make_octant_sphere(double R) {
  if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
  const double s = std::sqrt(0.5);
  // Meridian in the xz-plane from the pole to the equator.
  const double mer[3][2] = {{0.0, -R}, {R, -R}, {R, 0.0}};
  const double ww[3] = {1.0, s, 1.0};
  const double eta[3] = {0.0, 0.5, 1.0};
  const std::vector<double> bez = {0.0, 0.0, 0.0, 1.0, 1.0, 1.0};

  auto build = [&](bool flip) {
    // Longitude quarter circle in the xy-plane.
    double lon[3][2] = {{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    if (flip) std::swap(lon[0], lon[2]);
    TensorBasis basis({KnotVector(2, bez), KnotVector(2, bez), KnotVector(2, bez)});
    Eigen::MatrixXd C(27, 3);
    Eigen::VectorXd w(27);
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
          const int f = basis.flat({i, j, k});
          C(f, 0) = eta[i] * mer[j][0] * lon[k][0];
          C(f, 1) = eta[i] * mer[j][0] * lon[k][1];
          C(f, 2) = eta[i] * mer[j][1];
          w(f) = ww[j] * ww[k];
        }
      }
    }
    return NurbsPatch(std::move(basis), std::move(C), std::move(w));
  };
  NurbsPatch patch = build(false);
  const double mid[3] = {0.5, 0.5, 0.5};
  ShapeEvaluator ev(patch);
  if (ev.eval(mid, false).det < 0.0) patch = build(true);
  return patch;
}

NurbsPatch make_box(std::span<const double> lengths, int degree) {
  const int d = static_cast<int>(lengths.size());
  if (d < 2 || d > 3) throw std::invalid_argument("box dimension must be 2 or 3");
  if (degree < 1 || degree > kMaxDegree) throw UnsupportedDegree("box degree out of range");
  std::vector<double> k(degree + 1, 0.0);
  k.insert(k.end(), degree + 1, 1.0);
  std::vector<KnotVector> dirs(d, KnotVector(degree, k));
  TensorBasis basis(std::move(dirs));
  Eigen::MatrixXd C(basis.size(), d);
  for (int f = 0; f < basis.size(); ++f) {
    const auto m = basis.multi(f);
    for (int i = 0; i < d; ++i) C(f, i) = lengths[i] * m[i] / degree;
  }
  return NurbsPatch(std::move(basis), std::move(C), Eigen::VectorXd::Ones(basis.size()));
}

NurbsPatch build_mesh(const NurbsPatch& coarse, int degree,
                      const std::vector<std::vector<double>>& breakpoints) {
  if (static_cast<int>(breakpoints.size()) != coarse.dim()) {
    throw std::invalid_argument("one breakpoint list per direction is required");
  }
  NurbsPatch p = coarse.elevated(degree);
  for (int dir = 0; dir < p.dim(); ++dir) {
    p = p.refined_to(dir, KnotVector::from_breakpoints(degree, breakpoints[dir]));
  }
  return p;
}

namespace {

double lattice_diameter(ShapeEvaluator& ev, int dim, const std::array<double, 3>& lo,
                        const std::array<double, 3>& hi, const std::array<bool, 3>& active) {
  std::vector<Eigen::VectorXd> pts;
  const int nd = 3;
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= active[d] ? nd : 1;
  pts.reserve(total);
  for (int q = 0; q < total; ++q) {
    int r = q;
    double xi[3];
    for (int d = 0; d < dim; ++d) {
      if (!active[d]) {
        xi[d] = lo[d];
        continue;
      }
      const int i = r % nd;
      r /= nd;
      xi[d] = lo[d] + (hi[d] - lo[d]) * i / (nd - 1);
    }
    pts.push_back(ev.eval(std::span<const double>(xi, dim), false).x);
  }
  double dmax = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) dmax = std::max(dmax, (pts[a] - pts[b]).norm());
  }
  return dmax;
}

}  // namespace

double max_element_diameter(const NurbsPatch& patch) {
  ShapeEvaluator ev(patch);
  const int d = patch.dim();
  double h = 0.0;
  for (int e = 0; e < patch.num_elements(); ++e) {
    const auto m = patch.basis().element_multi(e);
    std::array<double, 3> lo{}, hi{};
    for (int dir = 0; dir < d; ++dir) {
      const auto& b = patch.knots(dir).breakpoints();
      lo[dir] = b[m[dir]];
      hi[dir] = b[m[dir] + 1];
    }
    h = std::max(h, lattice_diameter(ev, d, lo, hi, {true, true, true}));
  }
  return h;
}

double max_element_diameter(const BoundaryFace& face) {
  const NurbsPatch& patch = face.patch();
  ShapeEvaluator ev(patch);
  const int d = patch.dim();
  const auto& fb = face.basis();
  double h = 0.0;
  for (int e = 0; e < fb.num_elements(); ++e) {
    const auto fm = fb.element_multi(e);
    const auto fixed = face.to_volume(std::array<double, 2>{0.0, 0.0});
    std::array<double, 3> lo = fixed, hi = fixed;
    std::array<bool, 3> active{false, false, false};
    for (std::size_t k = 0; k < face.face_dirs().size(); ++k) {
      const int dir = face.face_dirs()[k];
      const auto& b = patch.knots(dir).breakpoints();
      lo[dir] = b[fm[k]];
      hi[dir] = b[fm[k] + 1];
      active[dir] = true;
    }
    h = std::max(h, lattice_diameter(ev, d, lo, hi, active));
  }
  return h;
}

}  // namespace igac
