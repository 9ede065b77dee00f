#pragma once

// Semismooth Newton with per-iteration active-set update, load stepping for
// the finite-strain path, and the sparse direct solve of the saddle-point
// system.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igac/contact.hpp"
#include "igac/elasticity.hpp"

namespace igac {

struct SystemState {
  Eigen::VectorXd u;       // full displacement coefficients, prescribed values included
  Eigen::VectorXd lambda;  // multiplier coefficients
  ActiveSet active;
  double load = 1.0;
};

struct NewtonConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  int max_iter = 50;
  int load_steps = 10;
  int max_cuts = 5;
  MultiplierRows rows = MultiplierRows::Lumped;

  bool operator==(const NewtonConfig&) const = default;
};

struct SolveReport {
  std::vector<int> iterations;   // Newton iterations per load step
  std::vector<double> residuals; // residual norm history, all steps
  int active_count = 0;
  double wall_time = 0.0;        // seconds
  bool converged = false;
  std::string message;
};

/// Newton iteration limit reached or load stepping exhausted.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// Sparse direct solve with structural checks and a residual check
/// ||Ax-b|| / ||b|| < 1e-9. Symmetric systems try LDL^T with the multipliers
/// ordered last and fall back to LU. Rows/columns below `num_displacement`
/// are reported as displacement DOFs, the others as multipliers.
Eigen::VectorXd linear_solve(const SparseMatrix& A, const Eigen::VectorXd& b, int num_displacement = -1);

struct ContactProblem {
  const PrimalSpace* space = nullptr;
  const DualSpace* dual = nullptr;
  Material material;
  Eigen::VectorXd load;  // external force on the full displacement numbering
  RigidPlane plane;
  AugmentedParams params;
};

struct SolveResult {
  SystemState state;
  SolveReport report;
};

/// Small deformation problem. `initial_active` overrides the geometric
/// seeding of the active set.
SolveResult solve_linear_contact(const ContactProblem& prob, const NewtonConfig& cfg = {},
                                 const ActiveSet* initial_active = nullptr);

/// Finite-strain problem loaded by the space's prescribed displacements,
/// ramped over cfg.load_steps steps.
SolveResult solve_nonlinear_contact(const ContactProblem& prob, const NewtonConfig& cfg = {});

/// Saddle-point matrix and residual over free displacement DOFs followed by
/// the multipliers. For the linear model `elastic_tangent` is the stiffness
/// and `elastic_force` is K u; for Neo-Hookean the internal force.
struct SaddleSystem {
  SparseMatrix matrix;
  Eigen::VectorXd residual;
};
SaddleSystem assemble_saddle(const PrimalSpace& space, const ContactSurface& surf,
                             const SparseMatrix& elastic_tangent, const Eigen::VectorXd& elastic_force,
                             const Eigen::VectorXd& load, const SystemState& state, double r,
                             MultiplierRows rows, bool with_matrix = true);

}  // namespace igac
