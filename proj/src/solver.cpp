#include "igac/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#ifdef IGAC_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "igac/errors.hpp"

namespace igac {

namespace {

std::string dof_class(int index, int num_displacement) {
  if (num_displacement < 0) return "unknown " + std::to_string(index);
  if (index < num_displacement) return "displacement DOF " + std::to_string(index);
  return "multiplier DOF " + std::to_string(index - num_displacement);
}

void check_structure(const SparseMatrix& A, int num_displacement) {
  const Eigen::Index n = A.rows();
  std::vector<char> row_nz(n, 0), col_nz(n, 0);
  for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      if (it.value() != 0.0) {
        row_nz[it.row()] = 1;
        col_nz[it.col()] = 1;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!row_nz[i]) throw SolverError("structurally singular system: empty row at " + dof_class(i, num_displacement));
    if (!col_nz[i]) {
      throw SolverError("structurally singular system: empty column at " + dof_class(i, num_displacement));
    }
  }
}

template <class Solver>
Eigen::VectorXd factor_and_solve(const SparseMatrix& A, const Eigen::VectorXd& b, int num_displacement) {
  Solver lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse factorization failed: numerically singular system with " +
                      std::to_string(num_displacement < 0 ? A.rows() : num_displacement) +
                      " displacement and " +
                      std::to_string(num_displacement < 0 ? 0 : A.rows() - num_displacement) +
                      " multiplier unknowns");
  }
  Eigen::VectorXd x = lu.solve(b);
  const double bn = b.norm();
  Eigen::VectorXd res = b - A * x;
  if (res.norm() > 1e-9 * bn) {
    // One step of iterative refinement before giving up.
    x += lu.solve(res);
    res = b - A * x;
  }
  if (!(res.norm() <= 1e-9 * bn) || !x.allFinite()) {
    std::ostringstream os;
    os << "linear solve inaccurate: relative residual " << res.norm() / bn;
    Eigen::Index worst = 0;
    res.cwiseAbs().maxCoeff(&worst);
    os << ", largest at " << dof_class(static_cast<int>(worst), num_displacement);
    throw SolverError(os.str());
  }
  return x;
}

bool is_symmetric(const SparseMatrix& A) {
  const SparseMatrix At = A.transpose();
  return (A - At).norm() <= 1e-14 * A.norm();
}

// Symmetric saddle systems with a definite displacement block are
// quasi-definite once the multipliers come last: LDL^T without pivoting
// then exists. The displacement block gets a fill-reducing ordering.
// Returns false when the factorization or the residual is not acceptable.
bool try_ldlt(const SparseMatrix& A, const Eigen::VectorXd& b, int num_displacement, Eigen::VectorXd& x) {
  const Eigen::Index n = A.rows();
  const int nu = num_displacement < 0 ? static_cast<int>(n) : num_displacement;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pu;
  const SparseMatrix Auu = A.topLeftCorner(nu, nu);
  Eigen::AMDOrdering<int>()(Auu.selfadjointView<Eigen::Lower>(), pu);
  Eigen::VectorXi order(n);
  for (int i = 0; i < nu; ++i) order(pu.indices()(i)) = i;
  for (Eigen::Index i = nu; i < n; ++i) order(i) = static_cast<int>(i);
  // order maps old -> new position
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P(order);
  SparseMatrix Ap(n, n);
  Ap.selfadjointView<Eigen::Lower>() = A.selfadjointView<Eigen::Lower>().twistedBy(P);
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt(Ap);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd pb = P * b;
  const Eigen::VectorXd y = ldlt.solve(pb);
  x = P.transpose() * y;
  const double bn = b.norm();
  Eigen::VectorXd res = b - A * x;
  if (res.norm() > 1e-9 * bn) {
    const Eigen::VectorXd pr = P * res;
    const Eigen::VectorXd dx = ldlt.solve(pr);
    x += (P.transpose() * dx).eval();
    res = b - A * x;
  }
  return res.norm() <= 1e-9 * bn && x.allFinite();
}

/// Residual and optionally the matrix of the elastic part at u.
struct ElasticEval {
  Eigen::VectorXd force;
  const SparseMatrix* tangent = nullptr;
  SparseMatrix owned;
};

class NewtonDriver {
 public:
  NewtonDriver(const ContactProblem& prob, const ContactSurface& surf, const NewtonConfig& cfg,
               std::function<void(const Eigen::VectorXd&, bool, ElasticEval&)> elastic)
      : prob_(prob), surf_(surf), cfg_(cfg), elastic_(std::move(elastic)) {}

  /// Returns the Newton iteration count; the state is updated in place.
  int run(SystemState& st, const Eigen::VectorXd& load, SolveReport& report) {
    const double r = prob_.params.r();
    const PrimalSpace& space = *prob_.space;
    const int nfree = space.dofs().num_free();
    ElasticEval el;
    elastic_(st.u, false, el);
    ActiveSet derived = update_active_set(st.lambda, surf_.projected_gap(st.u), r);
    SystemState probe = st;
    probe.active = derived;
    const double R0 = assemble_saddle(space, surf_, SparseMatrix(), el.force, load, probe, r, cfg_.rows, false)
                          .residual.norm();
    report.residuals.push_back(R0);
    if (R0 <= cfg_.atol) {
      st.active = derived;
      return 0;
    }
    const double tol = std::max(cfg_.rtol * R0, cfg_.atol);
    if (st.active.size() != static_cast<std::size_t>(surf_.size())) st.active = derived;
    elastic_(st.u, true, el);
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      const SaddleSystem sys = assemble_saddle(space, surf_, *el.tangent, el.force, load, st, r, cfg_.rows, true);
      const Eigen::VectorXd delta = linear_solve(sys.matrix, -sys.residual, nfree);
      const auto& free = space.dofs().free_dofs;
      for (int i = 0; i < nfree; ++i) st.u(free[i]) += delta(i);
      st.lambda += delta.tail(surf_.size());

      ActiveSet next = update_active_set(st.lambda, surf_.projected_gap(st.u), r);
      elastic_(st.u, true, el);
      SystemState chk = st;
      chk.active = next;
      const double Rn = assemble_saddle(space, surf_, SparseMatrix(), el.force, load, chk, r, cfg_.rows, false)
                            .residual.norm();
      report.residuals.push_back(Rn);
      const bool same = next == st.active;
      st.active = std::move(next);
      if (same && Rn <= tol) return it;
    }
    throw NonConvergence("Newton iteration limit (" + std::to_string(cfg_.max_iter) + ") reached", report);
  }

 private:
  const ContactProblem& prob_;
  const ContactSurface& surf_;
  const NewtonConfig& cfg_;
  std::function<void(const Eigen::VectorXd&, bool, ElasticEval&)> elastic_;
};

void check_problem(const ContactProblem& prob) {
  if (!prob.space || !prob.dual) throw std::invalid_argument("contact problem without spaces");
  if (prob.load.size() != prob.space->dofs().num_dofs()) {
    throw std::invalid_argument("load vector size does not match the displacement space");
  }
}

int count_active(const ActiveSet& a) { return static_cast<int>(std::count(a.begin(), a.end(), 1)); }

}  // namespace

Eigen::VectorXd linear_solve(const SparseMatrix& A, const Eigen::VectorXd& b, int num_displacement) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw std::invalid_argument("linear_solve needs a square system matching the right-hand side");
  }
  if (b.norm() == 0.0) return Eigen::VectorXd::Zero(b.size());
  check_structure(A, num_displacement);
  SparseMatrix Ac = A;
  Ac.makeCompressed();
  if (is_symmetric(Ac)) {
    Eigen::VectorXd x;
    if (try_ldlt(Ac, b, num_displacement, x)) return x;
  }
#ifdef IGAC_HAVE_UMFPACK
  return factor_and_solve<Eigen::UmfPackLU<SparseMatrix>>(Ac, b, num_displacement);
#else
  return factor_and_solve<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>(Ac, b, num_displacement);
#endif
}

SaddleSystem assemble_saddle(const PrimalSpace& space, const ContactSurface& surf,
                             const SparseMatrix& elastic_tangent, const Eigen::VectorXd& elastic_force,
                             const Eigen::VectorXd& load, const SystemState& state, double r,
                             MultiplierRows rows, bool with_matrix) {
  const auto& map = space.dofs();
  const int nfree = map.num_free();
  const int nK = surf.size();
  SaddleSystem out;
  const ContactResidual rc = contact_residual(surf, state.u, state.lambda, r, state.active, rows);
  out.residual.resize(nfree + nK);
  for (int i = 0; i < nfree; ++i) {
    const int k = map.free_dofs[i];
    out.residual(i) = elastic_force(k) - load(k) + rc.u(k);
  }
  out.residual.tail(nK) = rc.lambda;
  if (!with_matrix) return out;

  const ContactTangent ct = contact_tangent(surf, state.u, state.lambda, r, state.active, rows);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(elastic_tangent.nonZeros() + ct.uu.nonZeros() + ct.ul.nonZeros() + ct.lu.nonZeros() +
               ct.ll.nonZeros());
  const auto& fi = map.free_index;
  auto add_uu = [&](const SparseMatrix& M) {
    for (Eigen::Index c = 0; c < M.outerSize(); ++c) {
      const int jc = fi[c];
      if (jc < 0) continue;
      for (SparseMatrix::InnerIterator it(M, c); it; ++it) {
        const int ir = fi[it.row()];
        if (ir >= 0) trip.emplace_back(ir, jc, it.value());
      }
    }
  };
  add_uu(elastic_tangent);
  add_uu(ct.uu);
  for (Eigen::Index c = 0; c < ct.ul.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(ct.ul, c); it; ++it) {
      const int ir = fi[it.row()];
      if (ir >= 0) trip.emplace_back(ir, nfree + static_cast<int>(c), it.value());
    }
  }
  for (Eigen::Index c = 0; c < ct.lu.outerSize(); ++c) {
    const int jc = fi[c];
    if (jc < 0) continue;
    for (SparseMatrix::InnerIterator it(ct.lu, c); it; ++it) {
      trip.emplace_back(nfree + static_cast<int>(it.row()), jc, it.value());
    }
  }
  for (Eigen::Index c = 0; c < ct.ll.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(ct.ll, c); it; ++it) {
      trip.emplace_back(nfree + static_cast<int>(it.row()), nfree + static_cast<int>(c), it.value());
    }
  }
  out.matrix.resize(nfree + nK, nfree + nK);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  return out;
}

SolveResult solve_linear_contact(const ContactProblem& prob, const NewtonConfig& cfg,
                                 const ActiveSet* initial_active) {
  check_problem(prob);
  const auto t0 = std::chrono::steady_clock::now();
  const PrimalSpace& space = *prob.space;
  const auto quad = gauss_rule(space.patch(), space.degree() + 1);
  const AssembledOperator K = assemble_linear(space, prob.material, quad);
  const ContactSurface surf(space, *prob.dual, prob.plane);

  SolveResult res;
  SystemState& st = res.state;
  st.u = space.lifting(1.0);
  st.lambda = Eigen::VectorXd::Zero(surf.size());
  st.active = initial_active ? *initial_active : surf.initial_active_set();
  if (st.active.size() != static_cast<std::size_t>(surf.size())) {
    throw std::invalid_argument("initial active set has the wrong size");
  }
  NewtonDriver driver(prob, surf, cfg, [&](const Eigen::VectorXd& u, bool, ElasticEval& el) {
    el.force = K.matrix * u;
    el.tangent = &K.matrix;
  });
  res.report.iterations.push_back(driver.run(st, prob.load, res.report));
  res.report.converged = true;
  res.report.active_count = count_active(st.active);
  res.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

SolveResult solve_nonlinear_contact(const ContactProblem& prob, const NewtonConfig& cfg) {
  check_problem(prob);
  if (cfg.load_steps < 1) throw std::invalid_argument("load_steps must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const PrimalSpace& space = *prob.space;
  const auto quad = gauss_rule(space.patch(), space.degree() + 1);
  const SparseMatrix pattern = stiffness_pattern(space);
  const ContactSurface surf(space, *prob.dual, prob.plane);

  SolveResult res;
  SystemState st;
  st.u = space.lifting(0.0);
  st.lambda = Eigen::VectorXd::Zero(surf.size());
  st.active = surf.initial_active_set();
  st.load = 0.0;

  NewtonDriver driver(prob, surf, cfg, [&](const Eigen::VectorXd& u, bool with_tangent, ElasticEval& el) {
    NeoHookeanSystem sys = assemble_neo_hookean(space, prob.material, quad, u, &pattern, with_tangent);
    el.force = std::move(sys.residual);
    if (with_tangent) {
      el.owned = std::move(sys.tangent);
      el.tangent = &el.owned;
    }
  });

  const auto& map = space.dofs();
  const double r = prob.params.r();
  // Linearized step from the converged state with the Dirichlet increment
  // applied, so the prescribed layer does not move alone.
  auto predict = [&](const SystemState& from, SystemState& to, const Eigen::VectorXd& load) {
    const Eigen::VectorXd d = to.u - from.u;
    SystemState base = from;
    base.active = update_active_set(from.lambda, surf.projected_gap(from.u), r);
    NeoHookeanSystem sys = assemble_neo_hookean(space, prob.material, quad, from.u, &pattern, true);
    const SaddleSystem A = assemble_saddle(space, surf, sys.tangent, sys.residual, load, base, r, cfg.rows, true);
    const ContactTangent ct = contact_tangent(surf, from.u, from.lambda, r, base.active, cfg.rows);
    const Eigen::VectorXd fu = sys.tangent * d + ct.uu * d;
    const Eigen::VectorXd fl = ct.lu * d;
    const int nfree = map.num_free();
    Eigen::VectorXd rhs = -A.residual;
    for (int i = 0; i < nfree; ++i) rhs(i) -= fu(map.free_dofs[i]);
    rhs.tail(surf.size()) -= fl;
    if (rhs.norm() <= cfg.atol) return;
    const Eigen::VectorXd delta = linear_solve(A.matrix, rhs, nfree);
    for (int i = 0; i < nfree; ++i) to.u(map.free_dofs[i]) = from.u(map.free_dofs[i]) + delta(i);
    to.lambda = from.lambda + delta.tail(surf.size());
  };
  double t = 0.0;
  double dt = 1.0 / cfg.load_steps;
  int cuts = 0;
  while (t < 1.0 - 1e-12) {
    const double t_new = t + dt > 1.0 - 1e-12 ? 1.0 : t + dt;
    SystemState trial = st;
    for (int k = 0; k < map.num_dofs(); ++k) {
      if (map.constrained[k]) trial.u(k) = t_new * map.prescribed(k);
    }
    trial.load = t_new;
    const Eigen::VectorXd load = t_new * prob.load;
    try {
      predict(st, trial, load);
      res.report.iterations.push_back(driver.run(trial, load, res.report));
    } catch (const NonPhysicalState& e) {
      if (++cuts > cfg.max_cuts) {
        res.report.message = e.what();
        throw NonConvergence(std::string("load step cut limit reached: ") + e.what(), res.report);
      }
      dt *= 0.5;
      continue;
    } catch (const NonConvergence& e) {
      if (++cuts > cfg.max_cuts) {
        res.report.message = e.what();
        throw NonConvergence(std::string("load step cut limit reached: ") + e.what(), res.report);
      }
      dt *= 0.5;
      continue;
    }
    st = std::move(trial);
    t = t_new;
  }
  st.load = 1.0;
  res.state = std::move(st);
  res.report.converged = true;
  res.report.active_count = count_active(res.state.active);
  res.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace igac
