#include <cmath>

#include <Eigen/SparseLU>

#include "doctest.h"
#include "igac/errors.hpp"
#include "igac/solver.hpp"

using namespace igac;

namespace {

std::shared_ptr<const NurbsPatch> share(NurbsPatch p) { return std::make_shared<const NurbsPatch>(std::move(p)); }

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

const Material kLinear(Material::Model::Linear, 1.0, 0.3);
const Material kNeo(Material::Model::NeoHookean, 1.0, 0.3);

// Half cylinder pressed on y = -1 by a top pressure, symmetric about x = 0.
struct Hertz {
  std::shared_ptr<const NurbsPatch> patch;
  PrimalSpace V;
  DualSpace D;
  ContactProblem prob;

  Hertz(int p, int n_arc, double P, std::vector<DirichletSpec> extra = {}, Material mat = kLinear)
      : patch(share(build_mesh(make_quarter_disc(1.0), p,
                               {uniform_knots(4), graded_knots(n_arc, 0.6, 0.15, Side::Start)}))),
        V(patch, with_symmetry(std::move(extra))),
        D(BoundaryFace(patch, {0, Side::End}), p) {
    prob.space = &V;
    prob.dual = &D;
    prob.material = mat;
    prob.load = assemble_neumann_pressure(V, BoundaryFace(patch, {1, Side::End}), P);
    prob.plane = RigidPlane(vec2(0.0, 1.0), -1.0);
    prob.params = make_params(100.0 * mat.E, BoundaryFace(patch, {0, Side::End}));
  }

  static std::vector<DirichletSpec> with_symmetry(std::vector<DirichletSpec> extra) {
    extra.insert(extra.begin(), DirichletSpec{{1, Side::Start}, {0}, 0.0});
    return extra;
  }
};

double rel_asym(const SparseMatrix& A) { return SparseMatrix(A - SparseMatrix(A.transpose())).norm() / A.norm(); }

}  // namespace

TEST_CASE("linear_solve small systems") {
  SparseMatrix I(3, 3);
  I.setIdentity();
  const Eigen::Vector3d b(1.0, -2.0, 0.5);
  CHECK((linear_solve(I, b) - b).norm() == 0.0);

  SparseMatrix A(2, 2);
  A.insert(0, 1) = 1.0;
  A.insert(1, 0) = 1.0;
  A.insert(1, 1) = -1.0;
  const Eigen::VectorXd x = linear_solve(A, vec2(1.0, 0.0));
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("linear_solve reports singular systems with the DOF class") {
  SparseMatrix A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 2.0;
  try {
    linear_solve(A, Eigen::Vector3d(1.0, 1.0, 1.0), 2);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("multiplier DOF 0") != std::string::npos);
  }
  SparseMatrix B(2, 2);
  B.insert(0, 0) = 1.0;
  B.insert(0, 1) = 1.0;
  B.insert(1, 0) = 1.0;
  B.insert(1, 1) = 1.0;
  CHECK_THROWS_AS(linear_solve(B, vec2(1.0, 0.0), 2), SolverError);
}

TEST_CASE("zero load gives the reference state") {
  const Hertz h(2, 8, 0.0);
  const auto res = solve_linear_contact(h.prob);
  CHECK(res.state.u.norm() == 0.0);
  CHECK(res.state.lambda.norm() == 0.0);
  CHECK(res.report.iterations.at(0) == 0);
  CHECK(res.report.converged);
}

TEST_CASE("plane far below: pure elasticity in one iteration") {
  const std::array<double, 2> L{1.0, 1.0};
  auto sq = share(build_mesh(make_box(L, 1), 2, {uniform_knots(3), uniform_knots(3)}));
  const PrimalSpace V(sq, {{{1, Side::End}, {0, 1}, 0.0}});
  const DualSpace D(BoundaryFace(sq, {1, Side::Start}), 2);
  ContactProblem prob;
  prob.space = &V;
  prob.dual = &D;
  prob.material = kLinear;
  prob.load = assemble_neumann_pressure(V, BoundaryFace(sq, {0, Side::End}), 0.01) +
              assemble_neumann_pressure(V, BoundaryFace(sq, {1, Side::Start}), -0.02);
  prob.plane = RigidPlane(vec2(0.0, 1.0), -10.0);
  prob.params = make_params(100.0, BoundaryFace(sq, {1, Side::Start}));
  const auto res = solve_linear_contact(prob);
  CHECK(res.report.iterations.at(0) == 1);
  CHECK(res.state.lambda.norm() == 0.0);
  CHECK(res.report.active_count == 0);

  const auto K = assemble_linear(V, kLinear, gauss_rule(*sq, 3)).matrix;
  const auto& m = V.dofs();
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < K.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) {
      if (m.free_index[it.row()] >= 0 && m.free_index[it.col()] >= 0) {
        t.emplace_back(m.free_index[it.row()], m.free_index[it.col()], it.value());
      }
    }
  }
  SparseMatrix Kf(m.num_free(), m.num_free());
  Kf.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd f(m.num_free());
  for (int i = 0; i < m.num_free(); ++i) f(i) = prob.load(m.free_dofs[i]);
  Eigen::SparseLU<SparseMatrix> lu(Kf);
  const Eigen::VectorXd uf = lu.solve(f);
  double worst = 0.0;
  for (int i = 0; i < m.num_free(); ++i) worst = std::max(worst, std::abs(uf(i) - res.state.u(m.free_dofs[i])));
  CHECK(worst < 1e-12 * uf.cwiseAbs().maxCoeff());
}

TEST_CASE("Hertz contact: complementarity, fixed point, symmetry and convergence tail") {
  for (int p : {2, 3}) {
    const Hertz h(p, 16, 0.003);
    const auto res = solve_linear_contact(h.prob);
    const auto& st = res.state;
    CHECK(res.report.converged);
    CHECK(res.report.active_count >= 2);
    const double lmax = st.lambda.cwiseAbs().maxCoeff();
    for (int K = 0; K < st.lambda.size(); ++K) {
      if (st.active[K]) {
        CHECK(st.lambda(K) <= 1e-10 * lmax);
      } else {
        CHECK(std::abs(st.lambda(K)) <= 1e-10 * lmax);
      }
    }
    const ContactSurface surf(h.V, h.D, h.prob.plane);
    const double r = h.prob.params.r();
    CHECK(update_active_set(st.lambda, surf.projected_gap(st.u), r) == st.active);
    // constrained DOFs hold their values
    for (int k = 0; k < st.u.size(); ++k) {
      if (h.V.dofs().constrained[k]) CHECK(st.u(k) == h.V.dofs().prescribed(k));
    }

    const auto& rh = res.report.residuals;
    REQUIRE(rh.size() >= 3);
    const std::size_t n = rh.size();
    CHECK(rh[n - 1] < rh[n - 2]);
    CHECK(rh[n - 2] < rh[n - 3]);
    CHECK(rh[n - 1] <= std::max(1e-10 * rh[0], 1e-12));

    const auto K = assemble_linear(h.V, kLinear, gauss_rule(*h.patch, p + 1)).matrix;
    const SaddleSystem sys = assemble_saddle(h.V, surf, K, K * st.u, h.prob.load, st, r, MultiplierRows::Lumped);
    CHECK(rel_asym(sys.matrix) < 1e-12);
    // apply-and-compare on the assembled system
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(sys.matrix.rows(), -1.0, 1.0);
    const Eigen::VectorXd x = linear_solve(sys.matrix, b, h.V.dofs().num_free());
    CHECK((sys.matrix * x - b).norm() < 1e-9 * b.norm());
  }
}

TEST_CASE("solution does not depend on the initial active set") {
  for (int p : {2, 3}) {
    const Hertz h(p, 16, 0.003);
    const auto geo = solve_linear_contact(h.prob);
    const ActiveSet full(h.D.size(), 1);
    const auto all = solve_linear_contact(h.prob, {}, &full);
    CHECK((geo.state.u - all.state.u).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((geo.state.lambda - all.state.lambda).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(geo.state.active == all.state.active);
  }
}

TEST_CASE("lumped and consistent multiplier rows give the same solution") {
  const Hertz h(3, 16, 0.01);
  NewtonConfig cons;
  cons.rows = MultiplierRows::Consistent;
  const auto a = solve_linear_contact(h.prob);
  const auto b = solve_linear_contact(h.prob, cons);
  CHECK((a.state.u - b.state.u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.state.lambda - b.state.lambda).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("finite strain: zero ramp is the identity state") {
  const Hertz h(2, 8, 0.0, {{{1, Side::End}, {1}, 0.0}}, kNeo);
  const auto res = solve_nonlinear_contact(h.prob);
  CHECK(res.state.u.norm() == 0.0);
  CHECK(res.state.lambda.norm() == 0.0);
  CHECK(res.report.iterations.size() == 10);
  for (int it : res.report.iterations) CHECK(it == 0);
}

TEST_CASE("finite strain: small ramps agree with the linear model to second order") {
  std::vector<double> diff, size;
  for (double d : {0.01, 0.005}) {
    const Hertz nl(2, 8, 0.0, {{{1, Side::End}, {1}, -d}}, kNeo);
    const Hertz li(2, 8, 0.0, {{{1, Side::End}, {1}, -d}}, kLinear);
    NewtonConfig cfg;
    cfg.load_steps = 1;
    const auto a = solve_nonlinear_contact(nl.prob, cfg);
    const auto b = solve_linear_contact(li.prob);
    diff.push_back((a.state.u - b.state.u).cwiseAbs().maxCoeff());
    size.push_back(b.state.u.cwiseAbs().maxCoeff());
    CHECK(a.report.active_count > 0);
  }
  CHECK(diff[0] < 0.1 * size[0]);
  // halving the ramp divides the difference by about four
  CHECK(diff[0] / diff[1] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("finite strain: large compression in ten steps") {
  const Hertz h(2, 12, 0.0, {{{1, Side::End}, {1}, -0.4}}, kNeo);
  const auto res = solve_nonlinear_contact(h.prob);
  CHECK(res.report.converged);
  CHECK(res.state.load == 1.0);
  CHECK(res.report.active_count > 0);
  const double lmax = res.state.lambda.cwiseAbs().maxCoeff();
  CHECK(res.state.lambda.maxCoeff() <= 1e-10 * lmax);
  for (int k = 0; k < res.state.u.size(); ++k) {
    if (h.V.dofs().constrained[k]) CHECK(res.state.u(k) == h.V.dofs().prescribed(k));
  }
}
