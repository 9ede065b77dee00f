// Acceptance run: prints PASS/FAIL per criterion and exits non-zero if any
// check fails. Takes several minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "igac/cli.hpp"
#include "igac/contact.hpp"

using namespace igac;

namespace {

int failures = 0;

void verdict(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%-28s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string f3(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", x);
  return b;
}

std::string g4(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.5g", x);
  return b;
}

bool in(double x, double lo, double hi) { return x >= lo && x <= hi; }

std::string band(const char* name, double x, double lo, double hi) {
  return std::string(name) + "=" + f3(x) + (in(x, lo, hi) ? "" : "!") + " [" + f3(lo) + "," + f3(hi) + "]";
}

// Rounded to five significant digits, x reads as `printed`.
bool five_digits(double x, double printed) {
  const int e = static_cast<int>(std::floor(std::log10(std::abs(printed))));
  const double scale = std::pow(10.0, 4 - e);
  return std::round(x * scale) == std::round(printed * scale);
}

struct Timed {
  BenchResult res;
  double seconds = 0.0;
};

Timed run(Scenario s, int p) {
  BenchConfig c;
  c.scenario = s;
  c.p = p;
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.res = run_benchmark(c);
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  [%s p=%d: %d levels, %.1f s%s%s]\n", scenario_name(s).c_str(), p, t.res.config.levels, t.seconds,
              t.res.complete ? "" : ", failed: ", t.res.message.c_str());
  for (const auto& r : t.res.table.rows) {
    std::printf("    h=%-8s l2=%-11s h1=%-11s mult_ana=%-11s mult_ref=%s\n", g4(r.h).c_str(), g4(r.l2_disp).c_str(),
                g4(r.h1_disp).c_str(), g4(r.l2_mult_analytical).c_str(), g4(r.l2_mult_refined).c_str());
  }
  std::fflush(stdout);
  return t;
}

double peak(const BenchResult& r) {
  double m = 0.0;
  for (const auto& p : r.profile) m = std::max(m, p.p_over_p0_numeric);
  return m;
}

// Last-level relative improvement of a column.
double improvement(const ConvergenceTable& t, double ErrorReport::*col) {
  const auto& r = t.rows;
  if (r.size() < 2) return std::nan("");
  return (r[r.size() - 2].*col - r.back().*col) / (r[r.size() - 2].*col);
}

bool fixed_points(const BenchResult& r) {
  if (!r.complete) return false;
  for (const auto& l : r.levels) {
    if (!l.active_set_fixed_point) return false;
  }
  return true;
}

// Error columns do not increase over the last two levels.
bool monotone(const ConvergenceTable& t) {
  const auto& r = t.rows;
  if (r.size() < 2) return false;
  const auto& a = r[r.size() - 2];
  const auto& b = r.back();
  auto ok = [](double x, double y) { return std::isnan(x) || y <= x; };
  return ok(a.l2_disp, b.l2_disp) && ok(a.h1_disp, b.h1_disp) && ok(a.l2_mult_analytical, b.l2_mult_analytical) &&
         ok(a.l2_mult_refined, b.l2_mult_refined);
}

// |lambda| < 0.05 p0 for r > 1.2 a on the finest level.
double tail(const BenchResult& r) {
  double m = 0.0;
  for (const auto& p : r.profile) {
    if (p.r_over_a > 1.2) m = std::max(m, std::abs(p.p_over_p0_numeric));
  }
  return m;
}

std::shared_ptr<const NurbsPatch> share(NurbsPatch p) { return std::make_shared<const NurbsPatch>(std::move(p)); }

Eigen::VectorXd random_vector(int n, double lo, double hi, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

Eigen::VectorXd free_random(const PrimalSpace& V, double scale, std::mt19937& rng) {
  Eigen::VectorXd v = random_vector(V.dofs().num_dofs(), -scale, scale, rng);
  for (int k = 0; k < v.size(); ++k) {
    if (V.dofs().constrained[k]) v(k) = 0.0;
  }
  return v;
}

// Quarter disc resting on y = -1 with a symmetry edge.
struct Disc {
  std::shared_ptr<const NurbsPatch> patch;
  PrimalSpace V;
  DualSpace D;
  ContactSurface S;
  double r;

  explicit Disc(int p)
      : patch(share(build_mesh(make_quarter_disc(1.0), p, {uniform_knots(3), graded_knots(8, 0.6, 0.25, Side::Start)}))),
        V(patch, {{{1, Side::Start}, {0}, 0.0}, {{1, Side::End}, {1}, 0.0}}),
        D(BoundaryFace(patch, {0, Side::End}), p),
        S(V, D, RigidPlane(Eigen::Vector2d(0.0, 1.0), -1.0)),
        r(make_params(100.0, BoundaryFace(patch, {0, Side::End})).r()) {}
};

int kernel_dim(const SparseMatrix& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(K)};
  const auto& ev = es.eigenvalues();
  int k = 0;
  for (int i = 0; i < ev.size(); ++i) k += std::abs(ev(i)) < 1e-10 * ev.maxCoeff();
  return k;
}

void property_suites(const std::vector<const BenchResult*>& runs) {
  std::mt19937 rng(99);
  bool ok = true;
  std::ostringstream d;

  {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    long bad = 0;
    for (int i = 0; i < 1000000; ++i) {
      const double a = u(g), b = u(g);
      const double q = neg_part(a) - neg_part(b);
      bad += !(q * q <= q * (a - b)) || !(std::abs(q) <= std::abs(a - b));
    }
    d << "neg-part violations=" << bad;
    ok = ok && bad == 0;
  }
  {
    double worst = 0.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int p = 0; p <= kMaxDegree; ++p) {
      for (int t = 0; t < 200; ++t) {
        std::vector<double> inner;
        for (int i = 0; i < 5; ++i) inner.push_back(u(rng));
        std::sort(inner.begin(), inner.end());
        std::vector<double> k(p + 1, 0.0);
        k.insert(k.end(), inner.begin(), inner.end());
        k.insert(k.end(), p + 1, 1.0);
        const auto b = eval_basis(KnotVector(p, k), u(rng), 0);
        worst = std::max(worst, std::abs(b.ders.row(0).sum() - 1.0));
      }
    }
    d << ", unity=" << g4(worst);
    ok = ok && worst <= 1e-13;
  }
  for (int p : {2, 3}) {
    const Disc s(p);
    const Eigen::VectorXd c = s.S.project([](const Eigen::VectorXd&) { return 2.5; });
    const double e = (c.array() - 2.5).abs().maxCoeff();
    d << ", proj p" << p << "=" << g4(e);
    ok = ok && e <= 1e-13;

    // contact tangent against central differences
    const int nd = s.V.dofs().num_dofs(), nK = s.S.size();
    const Eigen::VectorXd u = free_random(s.V, 1e-3, rng);
    const Eigen::VectorXd lam = random_vector(nK, -0.01, 0.0, rng);
    ActiveSet a(nK);
    for (int K = 0; K < nK; ++K) a[K] = K % 2;
    const auto t = contact_tangent(s.S, u, lam, s.r, a);
    const Eigen::VectorXd du = random_vector(nd, -1.0, 1.0, rng), dl = random_vector(nK, -1.0, 1.0, rng);
    const double h = 1e-6;
    const auto rp = contact_residual(s.S, u + h * du, lam + h * dl, s.r, a);
    const auto rm = contact_residual(s.S, u - h * du, lam - h * dl, s.r, a);
    const Eigen::VectorXd au = t.uu * du + t.ul * dl, al = t.lu * du + t.ll * dl;
    const double ct = std::max(((rp.u - rm.u) / (2 * h) - au).norm() / au.norm(),
                               ((rp.lambda - rm.lambda) / (2 * h) - al).norm() / al.norm());
    d << ", contact-fd p" << p << "=" << g4(ct);
    ok = ok && ct <= 1e-6;

    // Neo-Hookean tangent against central differences
    const Material neo(Material::Model::NeoHookean, 1.0, 0.3);
    const auto quad = gauss_rule(*s.patch, p + 1);
    const Eigen::VectorXd w = free_random(s.V, 2e-3, rng);  // keeps det F > 0 on the small pole elements
    const Eigen::VectorXd dw = random_vector(nd, -1.0, 1.0, rng);
    const auto nh = assemble_neo_hookean(s.V, neo, quad, w);
    const Eigen::VectorXd fd = (assemble_neo_hookean(s.V, neo, quad, w + h * dw, nullptr, false).residual -
                                assemble_neo_hookean(s.V, neo, quad, w - h * dw, nullptr, false).residual) /
                               (2 * h);
    const double nt = (fd - nh.tangent * dw).norm() / (nh.tangent * dw).norm();
    d << ", nh-fd p" << p << "=" << g4(nt);
    ok = ok && nt <= 1e-5;

    // saddle symmetry and monotonicity at the benchmark scale
    const Material lin(Material::Model::Linear, 1.0, 0.3);
    const SparseMatrix K = assemble_linear(s.V, lin, quad).matrix;
    SystemState st;
    st.u = free_random(s.V, 1e-3, rng);
    st.lambda = random_vector(nK, -0.01, 0.0, rng);
    st.active = update_active_set(st.lambda, s.S.projected_gap(st.u), s.r);
    const Eigen::VectorXd load = Eigen::VectorXd::Zero(nd);
    const auto sys = assemble_saddle(s.V, s.S, K, K * st.u, load, st, s.r, MultiplierRows::Lumped);
    const double asym = SparseMatrix(sys.matrix - SparseMatrix(sys.matrix.transpose())).norm() / sys.matrix.norm();
    d << ", asym p" << p << "=" << g4(asym);
    ok = ok && asym <= 1e-12;

    int bad = 0;
    auto op = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& l) {
      return contact_residual(s.S, x, l, s.r, update_active_set(l, s.S.projected_gap(x), s.r));
    };
    for (int i = 0; i < 100; ++i) {
      const double sc = std::pow(10.0, -3.0 + 2.0 * (i % 10) / 9.0);
      const Eigen::VectorXd u1 = free_random(s.V, sc, rng), u2 = free_random(s.V, sc, rng);
      const Eigen::VectorXd l1 = random_vector(nK, -sc, 0.2 * sc, rng), l2 = random_vector(nK, -sc, 0.2 * sc, rng);
      const auto r1 = op(u1, l1), r2 = op(u2, l2);
      const Eigen::VectorXd xu = u1 - u2, xl = l1 - l2;
      bad += xu.dot(K * xu) + xu.dot(r1.u - r2.u) + xl.dot(r1.lambda - r2.lambda) < 0.0;
    }
    d << ", monotone-bad p" << p << "=" << bad;
    ok = ok && bad == 0;
  }
  {
    const Material lin(Material::Model::Linear, 1.0, 0.3);
    const double L2[2] = {1.0, 2.0};
    const PrimalSpace V2(share(build_mesh(make_box(L2, 1), 2, {uniform_knots(2), uniform_knots(2)})), {});
    const double L3[3] = {1.0, 1.5, 0.8};
    const PrimalSpace V3(
        share(build_mesh(make_box(L3, 1), 2, {uniform_knots(2), uniform_knots(1), uniform_knots(1)})), {});
    const int k2 = kernel_dim(assemble_linear(V2, lin, gauss_rule(V2.patch(), 3)).matrix);
    const int k3 = kernel_dim(assemble_linear(V3, lin, gauss_rule(V3.patch(), 3)).matrix);
    d << ", kernel=" << k2 << "/" << k3;
    ok = ok && k2 == 3 && k3 == 6;
  }
  bool fp = true;
  for (const auto* r : runs) fp = fp && fixed_points(*r);
  d << ", fixed-point=" << (fp ? "all" : "no");
  verdict("8 property suites", ok && fp, d.str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  {
    const auto a = hertz_solution(2, 1.0, 1.0, 0.3, 0.003);
    const auto b = hertz_solution(2, 1.0, 1.0, 0.3, 0.01);
    const auto c = hertz_solution(3, 1.0, 1.0, 0.3, 5e-4);
    const bool ok = five_digits(a.a, 0.083378) && five_digits(a.p0, 0.045812) && five_digits(b.a, 0.15223) &&
                    five_digits(b.p0, 0.083641) && five_digits(c.a, 0.10235) && five_digits(c.p0, 0.071600);
    verdict("1 Hertz constants", ok,
            "a,p0 = " + g4(a.a) + "," + g4(a.p0) + " / " + g4(b.a) + "," + g4(b.p0) + " / 3D " + g4(c.a) + "," +
                g4(c.p0));
  }

  const Timed n2 = run(Scenario::Hertz2dP003, 2);
  {
    const auto r = n2.res.table.rates();
    const bool ok = n2.res.complete && in(r.h1_disp, 1.33, 1.83) && in(r.l2_disp, 1.68, 2.18) &&
                    in(r.l2_mult_refined, 0.5, 1.1) && in(r.l2_mult_analytical, 0.3, 0.9) && n2.seconds < 600.0;
    verdict("2 P=0.003 N2/S0 rates", ok,
            band("H1", r.h1_disp, 1.33, 1.83) + " " + band("L2", r.l2_disp, 1.68, 2.18) + " " +
                band("LR", r.l2_mult_refined, 0.5, 1.1) + " " + band("LA", r.l2_mult_analytical, 0.3, 0.9) +
                " t=" + f3(n2.seconds) + "s");
  }

  const Timed n3 = run(Scenario::Hertz2dP003, 3);
  {
    const auto r = n3.res.table.rates();
    const double imp = improvement(n3.res.table, &ErrorReport::l2_mult_analytical);
    const bool ok = n3.res.complete && in(r.h1_disp, 1.2, 1.7) && in(r.l2_mult_refined, 0.7, 1.3) && imp < 0.2;
    verdict("3 P=0.003 N3/S1 rates", ok,
            band("H1", r.h1_disp, 1.2, 1.7) + " " + band("LR", r.l2_mult_refined, 0.7, 1.3) +
                " LA last-level gain=" + f3(imp) + (imp < 0.2 ? "" : "!") + " (<0.2)");
  }

  const Timed p01 = run(Scenario::Hertz2dP01, 2);
  {
    const auto r = p01.res.table.rates();
    const double imp = improvement(p01.res.table, &ErrorReport::l2_mult_analytical);
    const bool ok = p01.res.complete && in(r.h1_disp, 1.2, 1.75) && in(r.l2_mult_refined, 0.6, 1.2) && imp < 0.2;
    verdict("4 P=0.01 N2/S0 rates", ok,
            band("H1", r.h1_disp, 1.2, 1.75) + " " + band("LR", r.l2_mult_refined, 0.6, 1.2) +
                " LA last-level gain=" + f3(imp) + (imp < 0.2 ? "" : "!") + " (<0.2)");
  }

  {
    const double a = peak(n2.res), b = peak(n3.res);
    verdict("5 peak pressure P=0.003", n2.res.complete && n3.res.complete && in(a, 0.9, 1.1) && in(b, 0.9, 1.1),
            "max(-lambda)/p0 N2=" + f3(a) + " N3=" + f3(b) + " [0.9,1.1]");
  }

  const Timed l2 = run(Scenario::Hertz2dLargeUy04, 2);
  const Timed l3 = run(Scenario::Hertz2dLargeUy04, 3);
  {
    const auto r = l2.res.table.rates();
    const auto q = l3.res.table.rates();
    const double t = l2.seconds + l3.seconds;
    const bool ok = l2.res.complete && l3.res.complete && in(r.h1_disp, 1.2, 1.75) &&
                    in(r.l2_mult_refined, 0.6, 1.2) && in(q.h1_disp, 1.6, 2.3) && t < 1200.0;
    verdict("6 large deformation", ok,
            band("N2 H1", r.h1_disp, 1.2, 1.75) + " " + band("N2 mult", r.l2_mult_refined, 0.6, 1.2) + " " +
                band("N3 H1", q.h1_disp, 1.6, 2.3) + " t=" + f3(t) + "s");
  }

  {
    BenchConfig c;
    c.scenario = Scenario::Hertz3dP5e4;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream d;
    std::shared_ptr<LevelSolution> prev;
    const auto hz = hertz_solution(3, 1.0, 1.0, 0.3, 5e-4);
    for (int lv = 0; lv < resolved(c).levels; ++lv) {
      auto s = build_level(c, lv);
      try {
        solve_level(*s, c.newton, prev.get());
      } catch (const std::exception& e) {
        d << "level " << lv << ": " << e.what();
        ok = false;
        break;
      }
      double worst = 0.0;
      int n = 0;
      for (const auto& [rr, p] : pressure_at_control_points(*s)) {
        if (rr < 0.8 * hz.a) {
          worst = std::max(worst, std::abs(p - hz.pressure(rr)) / hz.pressure(rr));
          ++n;
        }
      }
      ok = ok && s->result.report.converged && n > 0 && worst <= 0.2;
      d << "h=" << f3(s->h) << ": " << n << " points, worst " << f3(worst) << "; ";
      prev = s;
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d << "t=" << f3(t) << "s";
    verdict("7 3D control-point pressure", ok, d.str());
  }

  try {
    property_suites({&n2.res, &n3.res, &p01.res, &l2.res, &l3.res});
  } catch (const std::exception& e) {
    verdict("8 property suites", false, e.what());
  }

  {
    const auto dir = std::filesystem::temp_directory_path() / "igac_acceptance";
    std::filesystem::remove_all(dir);
    bool same = true;
    for (int threads : {1, 2}) {
      std::string first;
      for (int k = 0; k < 2; ++k) {
        RunConfig c = parse_config_text("scenario = hertz2d_p003\nlevels = 3\nbase_elements = 6\n");
        c.bench.threads = threads;
        c.out = dir / (std::to_string(threads) + "_" + std::to_string(k));
        emit_outputs(run_benchmark(c.bench), c);
        const std::string csv = slurp(c.out / "convergence.csv");
        if (k == 0) first = csv;
        same = same && !csv.empty() && csv == first;
      }
    }
    verdict("9 deterministic CSV", same, "two runs each at 1 and 2 threads");
  }

  {
    const double a = peak(p01.res);
    verdict("peak pressure P=0.01", p01.res.complete && in(a, 0.9, 1.1), "max(-lambda)/p0=" + f3(a) + " [0.9,1.1]");
    const double t2 = tail(n2.res), t3 = tail(n3.res), t1 = tail(p01.res);
    verdict("no pressure beyond 1.2a", std::max({t2, t3, t1}) < 0.05,
            "max |lambda|/p0 N2=" + f3(t2) + " N3=" + f3(t3) + " P=0.01=" + f3(t1) + " (<0.05)");
    const bool mono = monotone(n2.res.table) && monotone(n3.res.table) && monotone(p01.res.table) &&
                      monotone(l2.res.table) && monotone(l3.res.table);
    verdict("errors non-increasing", mono, "last two levels, every column, all 2D runs");
  }

  std::printf("%s: %d check(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
