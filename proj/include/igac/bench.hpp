#pragma once

// Hertz reference solutions, error norms against analytical and refined
// solutions, rate fitting and the benchmark scenarios.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "igac/solver.hpp"

namespace igac {

struct HertzAnalytic {
  int dim = 2;
  double R = 1.0, E = 1.0, nu = 0.3, P = 0.0;
  double a = 0.0;   // half-width (2D) or contact radius (3D)
  double p0 = 0.0;  // peak pressure
  /// 3D only: radius from (3 R^3 P (1-nu^2) / 4E)^(1/3), i.e. with the
  /// pressure in place of the total force. Kept for the record.
  double a_pressure_formula = 0.0;

  double pressure(double r) const;
};

/// 2D: a = sqrt(8 R^2 P (1-nu^2) / (pi E)), p0 = 4 R P / (pi a).
/// 3D: total force F = pi R^2 P, a^3 = 3 F R (1-nu^2) / (4E), p0 = 3 R^2 P / (2 a^2).
HertzAnalytic hertz_solution(int dim, double R, double E, double nu, double P);

struct ErrorReport {
  double h = 0.0;
  double l2_disp = 0.0;
  double h1_disp = 0.0;
  double l2_mult_analytical = 0.0;  // NaN when there is no analytical solution
  double l2_mult_refined = 0.0;
};

/// A discrete displacement (and optionally multiplier) field.
struct FieldView {
  const PrimalSpace* space = nullptr;
  const Eigen::VectorXd* u = nullptr;
  const DualSpace* dual = nullptr;
  const Eigen::VectorXd* lambda = nullptr;
};

/// Error of `coarse` against `reference`, integrated over the elements of
/// the reference mesh, which must be a nested refinement of the coarse one.
/// `lambda_exact` gives the analytical multiplier at physical face points.
ErrorReport error_norms(const FieldView& coarse, const FieldView& reference,
                        const std::function<double(const Eigen::VectorXd& x)>& lambda_exact = {},
                        int extra_points = 3);

/// Least-squares slope of log e against log h; pairs with e <= 0 are skipped.
double fit_rate(const std::vector<std::pair<double, double>>& h_e);

struct ConvergenceRates {
  double l2_disp = 0.0, h1_disp = 0.0, l2_mult_analytical = 0.0, l2_mult_refined = 0.0;
};

struct ConvergenceTable {
  std::vector<ErrorReport> rows;
  ConvergenceRates rates() const;
};

enum class Scenario { Hertz2dP003, Hertz2dP01, Hertz3dP5e4, Hertz2dLargeUy04 };

std::optional<Scenario> scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);
std::vector<std::string> scenario_names();

struct BenchConfig {
  Scenario scenario = Scenario::Hertz2dP003;
  int p = 2;
  int levels = 0;  // reported levels; 0 picks the scenario default
  double r0 = 100.0;  // scaled by E
  /// Elements per graded direction on the coarsest level; 0 picks the
  /// scenario default.
  int base_elements = 0;
  /// Grading: this fraction of the spans lies within `grade_length` of the
  /// knot vector, next to the contact zone. Negative picks the default,
  /// grade_elements = 0 gives uniform knots.
  double grade_elements = -1.0;
  double grade_length = -1.0;
  /// Reference is this many nested levels finer than the finest level;
  /// 0 means no reference (displacement errors are NaN), negative picks the
  /// scenario default.
  int reference_offset = -1;
  NewtonConfig newton;
  int threads = 1;

  bool operator==(const BenchConfig&) const = default;
};

/// Fills scenario defaults into unset fields.
BenchConfig resolved(BenchConfig cfg);

/// A solved level kept alive for output.
struct LevelSolution {
  std::shared_ptr<const NurbsPatch> patch;
  std::unique_ptr<PrimalSpace> space;
  std::unique_ptr<DualSpace> dual;
  ContactProblem problem;
  SolveResult result;
  double h = 0.0;
  int level = 0;
};

struct LevelInfo {
  int level = 0;
  double h = 0.0;
  int num_dofs = 0;
  int num_multipliers = 0;
  int newton_iterations = 0;
  int active_count = 0;
  double wall_time = 0.0;
  bool active_set_fixed_point = false;
};

struct PressurePoint {
  double r_over_a = 0.0;
  double p_over_p0_numeric = 0.0;
  double p_over_p0_analytic = 0.0;  // NaN without an analytical solution
};

struct BenchResult {
  BenchConfig config;
  std::optional<HertzAnalytic> hertz;
  ConvergenceTable table;
  std::vector<LevelInfo> levels;  // reported levels, then the reference
  /// Pressure at the multiplier control points of the finest level.
  std::vector<PressurePoint> profile;
  /// Normalization of the profile: the Hertz a, p0, or for the finite-strain
  /// case the reference contact half-width and peak pressure.
  double profile_a = 0.0, profile_p0 = 0.0;
  std::shared_ptr<LevelSolution> finest;
  bool complete = false;
  bool nonconvergence = false;
  std::string message;
};

/// Builds level `level` of the scenario mesh and its spaces (unsolved).
std::shared_ptr<LevelSolution> build_level(const BenchConfig& cfg, int level);

/// Initial active set for `fine` from the multiplier of a solved nested
/// coarser level, evaluated at the fine Greville points.
ActiveSet predicted_active_set(const LevelSolution& fine, const LevelSolution& coarse);

/// Solves one level in place. A solved coarser level, when given, seeds the
/// active set of linear problems.
void solve_level(LevelSolution& sol, const NewtonConfig& newton, const LevelSolution* coarse = nullptr);

/// Runs the convergence study. Solver failures stop the run; everything
/// computed before the failure is kept and `message` says what failed.
BenchResult run_benchmark(const BenchConfig& cfg);

/// Pressure -lambda_K at the Greville point of every multiplier, with r the
/// distance of that point from the contact axis in the reference
/// configuration. Sorted by r.
std::vector<std::pair<double, double>> pressure_at_control_points(const LevelSolution& sol);

}  // namespace igac
