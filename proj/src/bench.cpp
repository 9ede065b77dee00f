#include "igac/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "igac/errors.hpp"

namespace igac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ScenarioData {
  Scenario id;
  const char* name;
  int dim;
  bool finite_strain;
  double P;           // top pressure
  double uy;          // prescribed top displacement
  int base_elements;  // per graded direction on level 0
  double grade_elements, grade_length;
  int levels, reference_offset;
};

// Base meshes: the graded directions hold base_elements spans on level 0.
// The finite-strain contact zone is too wide for a band refinement at the
// pole, so that scenario refines uniformly (grade_elements = 0).
const ScenarioData kScenarios[] = {
    {Scenario::Hertz2dP003, "hertz2d_p003", 2, false, 0.003, 0.0, 10, 0.8, 0.1, 3, 2},
    {Scenario::Hertz2dP01, "hertz2d_p01", 2, false, 0.01, 0.0, 10, 0.8, 0.1, 3, 2},
    {Scenario::Hertz3dP5e4, "hertz3d_p5e-4", 3, false, 5e-4, 0.0, 10, 0.4, 0.1, 2, 0},
    {Scenario::Hertz2dLargeUy04, "hertz2d_large_uy04", 2, true, 0.0, -0.4, 2, 0.0, 0.0, 4, 2},
};

const ScenarioData& data(Scenario s) {
  for (const auto& d : kScenarios) {
    if (d.id == s) return d;
  }
  throw std::invalid_argument("unknown scenario");
}

constexpr double kR = 1.0;
constexpr double kE = 1.0;
constexpr double kNu = 0.3;

bool nested(const std::vector<double>& coarse, const std::vector<double>& fine) {
  std::size_t j = 0;
  for (double c : coarse) {
    while (j < fine.size() && fine[j] < c - 1e-12) ++j;
    if (j == fine.size() || std::abs(fine[j] - c) > 1e-12) return false;
  }
  return true;
}

// Faces whose control points all lie in a coordinate plane x_c = 0.
std::vector<DirichletSpec> symmetry_conditions(const std::shared_ptr<const NurbsPatch>& patch,
                                               const std::vector<Face>& candidates) {
  std::vector<DirichletSpec> out;
  const auto& C = patch->control_points();
  for (const Face& f : candidates) {
    const BoundaryFace face(patch, f);
    for (int c = 0; c < patch->dim(); ++c) {
      bool in_plane = true;
      for (int cp : face.layer()) in_plane = in_plane && std::abs(C(cp, c)) < 1e-12;
      if (in_plane) out.push_back({f, {c}, 0.0});
    }
  }
  return out;
}

// Level meshes bisect the level-0 breakpoints so that levels stay nested.
std::vector<double> bisected(std::vector<double> b, int times) {
  for (int t = 0; t < times; ++t) {
    std::vector<double> f{b.front()};
    for (std::size_t i = 1; i < b.size(); ++i) {
      f.push_back(0.5 * (b[i - 1] + b[i]));
      f.push_back(b[i]);
    }
    b = std::move(f);
  }
  return b;
}

double radial_distance(const Eigen::VectorXd& x) {
  return x.size() == 2 ? std::abs(x(0)) : std::hypot(x(0), x(1));
}

}  // namespace

double HertzAnalytic::pressure(double r) const {
  const double s = 1.0 - (r * r) / (a * a);
  return s > 0.0 ? p0 * std::sqrt(s) : 0.0;
}

HertzAnalytic hertz_solution(int dim, double R, double E, double nu, double P) {
  if (!(R > 0.0 && E > 0.0 && P > 0.0) || !(nu >= 0.0 && nu < 0.5)) {
    throw std::invalid_argument("Hertz parameters out of range");
  }
  constexpr double pi = std::numbers::pi;
  HertzAnalytic h;
  h.dim = dim;
  h.R = R;
  h.E = E;
  h.nu = nu;
  h.P = P;
  if (dim == 2) {
    h.a = std::sqrt(8.0 * R * R * P * (1.0 - nu * nu) / (pi * E));
    h.p0 = 4.0 * R * P / (pi * h.a);
  } else if (dim == 3) {
    const double F = pi * R * R * P;
    h.a = std::cbrt(3.0 * F * R * (1.0 - nu * nu) / (4.0 * E));
    h.p0 = 3.0 * R * R * P / (2.0 * h.a * h.a);
    h.a_pressure_formula = std::cbrt(3.0 * R * R * R * P * (1.0 - nu * nu) / (4.0 * E));
  } else {
    throw std::invalid_argument("Hertz solution needs dimension 2 or 3");
  }
  return h;
}

ErrorReport error_norms(const FieldView& coarse, const FieldView& reference,
                        const std::function<double(const Eigen::VectorXd& x)>& lambda_exact, int extra_points) {
  if (!coarse.space || !coarse.u || !reference.space || !reference.u) {
    throw std::invalid_argument("error_norms needs displacement fields");
  }
  const NurbsPatch& pc = coarse.space->patch();
  const NurbsPatch& pr = reference.space->patch();
  const int d = pc.dim();
  if (pr.dim() != d) throw std::invalid_argument("error_norms: patches of different dimension");
  for (int k = 0; k < d; ++k) {
    if (!nested(pc.knots(k).breakpoints(), pr.knots(k).breakpoints())) {
      throw std::invalid_argument("error_norms: reference mesh is not a refinement of the coarse mesh");
    }
  }
  {
    // same parameterization
    const double probe[3] = {0.37, 0.61, 0.29};
    const double gap = (eval_map(pc, std::span<const double>(probe, d)).x -
                        eval_map(pr, std::span<const double>(probe, d)).x).norm();
    if (gap > 1e-10) throw std::invalid_argument("error_norms: patches map to different bodies");
  }

  ErrorReport rep;
  rep.h = max_element_diameter(pc);
  const int n = std::max(pc.degree(0), pr.degree(0)) + extra_points;
  const auto rule = gauss_rule(pr, n);
  ShapeEvaluator ec(pc), er(pr);
  std::vector<QuadPoint> pts;
  const auto& mc = coarse.space->dofs();
  const auto& mr = reference.space->dofs();
  double l2 = 0.0, h1 = 0.0;
  Eigen::VectorXd du(d);
  Eigen::MatrixXd dg(d, d);
  for (int e = 0; e < rule.num_elements(); ++e) {
    rule.element_points(e, pts);
    for (const auto& q : pts) {
      const std::span<const double> xi(q.xi.data(), d);
      const PointShape& sr = er.eval(xi, true);
      const double w = q.weight * sr.det;
      du.setZero();
      dg.setZero();
      for (std::size_t a = 0; a < sr.index.size(); ++a) {
        for (int c = 0; c < d; ++c) {
          const double v = (*reference.u)(mr.dof(sr.index[a], c));
          du(c) -= sr.N(a) * v;
          dg.row(c) -= v * sr.dN_dx.row(a);
        }
      }
      const PointShape& sc = ec.eval(xi, true);
      for (std::size_t a = 0; a < sc.index.size(); ++a) {
        for (int c = 0; c < d; ++c) {
          const double v = (*coarse.u)(mc.dof(sc.index[a], c));
          du(c) += sc.N(a) * v;
          dg.row(c) += v * sc.dN_dx.row(a);
        }
      }
      l2 += w * du.squaredNorm();
      h1 += w * dg.squaredNorm();
    }
  }
  rep.l2_disp = std::sqrt(l2);
  rep.h1_disp = std::sqrt(h1);
  rep.l2_mult_analytical = kNaN;
  rep.l2_mult_refined = kNaN;

  if (coarse.dual && coarse.lambda) {
    const BoundaryFace& fc = coarse.dual->face();
    const BoundaryFace face(reference.space->patch_ptr(), fc.face());
    const int fd = d - 1;
    const auto frule = gauss_rule(face, n);
    const bool with_ref = reference.dual && reference.lambda;
    if (with_ref && !(reference.dual->face().face() == fc.face())) {
      throw std::invalid_argument("error_norms: multipliers live on different faces");
    }
    double ea = 0.0, er2 = 0.0;
    DualEval dc, dr;
    for (int e = 0; e < frule.num_elements(); ++e) {
      frule.element_points(e, pts);
      for (const auto& q : pts) {
        const std::span<const double> xf(q.xi.data(), fd);
        const FrameEval fr = boundary_frame(face, xf);
        const double w = q.weight * fr.measure;
        coarse.dual->eval(xf, dc);
        double lc = 0.0;
        for (std::size_t k = 0; k < dc.index.size(); ++k) lc += (*coarse.lambda)(dc.index[k]) * dc.value[k];
        if (lambda_exact) ea += w * std::pow(lc - lambda_exact(fr.x), 2);
        if (with_ref) {
          reference.dual->eval(xf, dr);
          double lr = 0.0;
          for (std::size_t k = 0; k < dr.index.size(); ++k) lr += (*reference.lambda)(dr.index[k]) * dr.value[k];
          er2 += w * (lc - lr) * (lc - lr);
        }
      }
    }
    if (lambda_exact) rep.l2_mult_analytical = std::sqrt(ea);
    if (with_ref) rep.l2_mult_refined = std::sqrt(er2);
  }
  return rep;
}

double fit_rate(const std::vector<std::pair<double, double>>& h_e) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [h, e] : h_e) {
    if (h > 0.0 && e > 0.0 && std::isfinite(e)) pts.emplace_back(std::log(h), std::log(e));
  }
  if (pts.size() < 2) throw std::invalid_argument("fit_rate needs at least two positive errors");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate needs distinct mesh sizes");
  return sxy / sxx;
}

ConvergenceRates ConvergenceTable::rates() const {
  auto rate = [&](double ErrorReport::*col) {
    std::vector<std::pair<double, double>> v;
    for (const auto& r : rows) v.emplace_back(r.h, r.*col);
    try {
      return fit_rate(v);
    } catch (const std::invalid_argument&) {
      return kNaN;
    }
  };
  return {rate(&ErrorReport::l2_disp), rate(&ErrorReport::h1_disp), rate(&ErrorReport::l2_mult_analytical),
          rate(&ErrorReport::l2_mult_refined)};
}

std::optional<Scenario> scenario_from_name(const std::string& name) {
  for (const auto& d : kScenarios) {
    if (name == d.name) return d.id;
  }
  return std::nullopt;
}

std::string scenario_name(Scenario s) { return data(s).name; }

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& d : kScenarios) out.emplace_back(d.name);
  return out;
}

BenchConfig resolved(BenchConfig cfg) {
  const ScenarioData& sd = data(cfg.scenario);
  if (cfg.base_elements <= 0) cfg.base_elements = sd.base_elements;
  if (cfg.grade_elements < 0.0) cfg.grade_elements = sd.grade_elements;
  if (cfg.grade_length < 0.0) cfg.grade_length = sd.grade_length;
  if (cfg.levels <= 0) cfg.levels = sd.levels;
  if (cfg.reference_offset < 0) cfg.reference_offset = sd.reference_offset;
  if (cfg.p != 2 && cfg.p != 3) throw std::invalid_argument("degree must be 2 or 3");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be at least 1");
  return cfg;
}

std::shared_ptr<LevelSolution> build_level(const BenchConfig& cfg_in, int level) {
  const BenchConfig cfg = resolved(cfg_in);
  const ScenarioData& sd = data(cfg.scenario);
  const int n = cfg.base_elements;
  auto graded = [&](Side s) {
    if (cfg.grade_elements == 0.0) return bisected(uniform_knots(n), level);
    return bisected(graded_knots(n, cfg.grade_elements, cfg.grade_length, s), level);
  };
  auto sol = std::make_shared<LevelSolution>();
  sol->level = level;
  const Material mat(sd.finite_strain ? Material::Model::NeoHookean : Material::Model::Linear, kE, kNu);
  std::vector<DirichletSpec> bcs;
  Face top;
  if (sd.dim == 2) {
    sol->patch = std::make_shared<const NurbsPatch>(
        build_mesh(make_quarter_disc(kR), cfg.p,
                   {graded(Side::End), graded(Side::Start)}));
    bcs = symmetry_conditions(sol->patch, {{1, Side::Start}});
    top = {1, Side::End};
  } else {
    // Longitude stays uniform: the contact zone spans every longitude.
    sol->patch = std::make_shared<const NurbsPatch>(
        build_mesh(make_octant_sphere(kR), cfg.p,
                   {graded(Side::End), graded(Side::Start), bisected(uniform_knots(std::max(2, n / 2)), level)}));
    bcs = symmetry_conditions(sol->patch, {{2, Side::Start}, {2, Side::End}});
    top = {1, Side::End};
  }
  if (sd.finite_strain) bcs.push_back({top, {sd.dim - 1}, sd.uy});
  sol->space = std::make_unique<PrimalSpace>(sol->patch, bcs);
  const BoundaryFace contact(sol->patch, {0, Side::End});
  sol->dual = std::make_unique<DualSpace>(contact, cfg.p);
  sol->h = max_element_diameter(*sol->patch);

  ContactProblem& prob = sol->problem;
  prob.space = sol->space.get();
  prob.dual = sol->dual.get();
  prob.material = mat;
  prob.load = sd.P > 0.0 ? assemble_neumann_pressure(*sol->space, BoundaryFace(sol->patch, top), sd.P)
                         : Eigen::VectorXd::Zero(sol->space->dofs().num_dofs());
  Eigen::VectorXd normal = Eigen::VectorXd::Zero(sd.dim);
  normal(sd.dim - 1) = 1.0;
  prob.plane = RigidPlane(normal, -kR);
  prob.params = make_params(cfg.r0 * kE, contact);
  return sol;
}

ActiveSet predicted_active_set(const LevelSolution& fine, const LevelSolution& coarse) {
  const DualSpace& D = *fine.dual;
  ActiveSet out(D.size(), 0);
  for (int K = 0; K < D.size(); ++K) {
    const auto g = D.greville(K);
    const int fd = D.face().patch().dim() - 1;
    const DualEval e = coarse.dual->eval(std::span<const double>(g.data(), fd));
    double lam = 0.0;
    for (std::size_t k = 0; k < e.index.size(); ++k) lam += coarse.result.state.lambda(e.index[k]) * e.value[k];
    out[K] = lam < 0.0;
  }
  return out;
}

void solve_level(LevelSolution& sol, const NewtonConfig& newton, const LevelSolution* coarse) {
  if (sol.problem.material.model == Material::Model::NeoHookean) {
    sol.result = solve_nonlinear_contact(sol.problem, newton);
    return;
  }
  if (coarse) {
    ActiveSet guess = predicted_active_set(sol, *coarse);
    if (std::count(guess.begin(), guess.end(), 1) > 0) {
      sol.result = solve_linear_contact(sol.problem, newton, &guess);
      return;
    }
  }
  sol.result = solve_linear_contact(sol.problem, newton);
}

std::vector<std::pair<double, double>> pressure_at_control_points(const LevelSolution& sol) {
  const DualSpace& D = *sol.dual;
  const BoundaryFace& face = D.face();
  const int fd = face.patch().dim() - 1;
  std::vector<std::pair<double, double>> out;
  for (int K = 0; K < D.size(); ++K) {
    const auto g = D.greville(K);
    const auto xi = face.to_volume(std::span<const double>(g.data(), fd));
    const Eigen::VectorXd x = eval_map(face.patch(), std::span<const double>(xi.data(), face.patch().dim())).x;
    out.emplace_back(radial_distance(x), -sol.result.state.lambda(K));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

BenchResult run_benchmark(const BenchConfig& cfg_in) {
  BenchResult res;
  res.config = resolved(cfg_in);
  const BenchConfig& cfg = res.config;
  const ScenarioData& sd = data(cfg.scenario);
  if (!sd.finite_strain) res.hertz = hertz_solution(sd.dim, kR, kE, kNu, sd.P);

  const int L = cfg.levels;
  const bool with_ref = cfg.reference_offset > 0;
  const int N = L + (with_ref ? 1 : 0);  // solves, the reference last
  std::vector<std::shared_ptr<LevelSolution>> sols(N);
  std::vector<std::string> errors(N);
  std::vector<char> nonconv(N, 0);
  for (int i = 0; i < L; ++i) sols[i] = build_level(cfg, i);
  if (with_ref) sols[L] = build_level(cfg, L - 1 + cfg.reference_offset);

  // Level 0 first. Its multiplier predicts the initial active set of the
  // finer levels: one thread chains the prediction level by level, several
  // threads solve the rest in parallel from level 0. The converged result
  // does not depend on the prediction.
  auto solve = [&](int i, const LevelSolution* coarse) {
    try {
      solve_level(*sols[i], cfg.newton, coarse);
    } catch (const NonConvergence& e) {
      errors[i] = e.what();
      nonconv[i] = 1;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  solve(0, nullptr);
  const LevelSolution* seed = errors[0].empty() ? sols[0].get() : nullptr;
  const int nthreads = std::max(1, std::min<int>(cfg.threads, N - 1));
  if (nthreads == 1) {
    for (int i = 1; i < N; ++i) {
      solve(i, seed);
      if (errors[i].empty()) seed = sols[i].get();
    }
  } else {
    std::vector<int> order;
    for (int i = N - 1; i >= 1; --i) order.push_back(i);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < order.size(); k = next++) solve(order[k], seed);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int i = 0; i < N; ++i) {
    const LevelSolution& s = *sols[i];
    LevelInfo info;
    info.level = s.level;
    info.h = s.h;
    info.num_dofs = s.space->dofs().num_free();
    info.num_multipliers = s.dual->size();
    if (errors[i].empty()) {
      for (int it : s.result.report.iterations) info.newton_iterations += it;
      info.active_count = s.result.report.active_count;
      info.wall_time = s.result.report.wall_time;
      const ContactSurface surf(*s.space, *s.dual, s.problem.plane);
      info.active_set_fixed_point =
          update_active_set(s.result.state.lambda, surf.projected_gap(s.result.state.u), s.problem.params.r()) ==
          s.result.state.active;
    }
    res.levels.push_back(info);
  }
  for (int i = 0; i < N; ++i) {
    if (!errors[i].empty()) {
      res.message = "level " + std::to_string(sols[i]->level) + ": " + errors[i];
      res.nonconvergence = nonconv[i] != 0;
      return res;
    }
  }

  // Without a reference only the analytical multiplier error is reported.
  const LevelSolution& ref = *sols[N - 1];
  const FieldView rv{ref.space.get(), &ref.result.state.u, ref.dual.get(), &ref.result.state.lambda};
  std::function<double(const Eigen::VectorXd&)> exact;
  if (res.hertz) {
    const HertzAnalytic hz = *res.hertz;
    exact = [hz](const Eigen::VectorXd& x) { return -hz.pressure(radial_distance(x)); };
  }
  for (int i = 0; i < L; ++i) {
    const LevelSolution& s = *sols[i];
    const FieldView cv{s.space.get(), &s.result.state.u, s.dual.get(), &s.result.state.lambda};
    if (with_ref) {
      res.table.rows.push_back(error_norms(cv, rv, exact));
    } else {
      ErrorReport e = error_norms(cv, cv, exact);
      e.l2_disp = e.h1_disp = e.l2_mult_refined = kNaN;
      res.table.rows.push_back(e);
    }
  }

  if (res.hertz) {
    res.profile_a = res.hertz->a;
    res.profile_p0 = res.hertz->p0;
  } else {
    for (const auto& [r, p] : pressure_at_control_points(ref)) {
      if (p > 0.0) res.profile_a = std::max(res.profile_a, r);
      res.profile_p0 = std::max(res.profile_p0, p);
    }
  }
  res.finest = sols[L - 1];
  for (const auto& [r, p] : pressure_at_control_points(*res.finest)) {
    PressurePoint pt;
    pt.r_over_a = res.profile_a > 0.0 ? r / res.profile_a : kNaN;
    pt.p_over_p0_numeric = res.profile_p0 > 0.0 ? p / res.profile_p0 : kNaN;
    pt.p_over_p0_analytic = res.hertz ? res.hertz->pressure(r) / res.hertz->p0 : kNaN;
    res.profile.push_back(pt);
  }
  res.complete = true;
  return res;
}

}  // namespace igac
