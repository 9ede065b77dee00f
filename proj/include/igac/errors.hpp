#pragma once

#include <stdexcept>
#include <string>

namespace igac {

/// Parametric argument outside the knot range, or similar domain violation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedDegree : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Jacobian determinant or face tangents collapsed at an evaluation point.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// det F <= 0 at a quadrature point of a finite-strain evaluation.
class NonPhysicalState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular or inaccurate linear solve.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace igac
