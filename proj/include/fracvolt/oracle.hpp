#pragma once

#include <memory>

#include "fracvolt/spatial.hpp"
#include "fracvolt/types.hpp"
#include "fracvolt/volterra.hpp"

namespace fracvolt::oracle {

/// E_alpha(-lambda t^alpha), computed without any fracops code: a
/// double-double series for small arguments, a parabolic-contour inverse
/// Laplace transform otherwise. Throws DomainError for lambda <= 0 or alpha
/// outside (0, 1], RangeError when lambda t^alpha > 50.
Scalar separable_exact(Scalar alpha, Scalar lambda, Scalar t);

/// E_{1/2}(-x) = exp(x^2) erfc(x).
Scalar ml_half_erfc(Scalar x);

/// Constant coefficients of a manufactured case.
struct ManufacturedConstants {
  Scalar kappa0 = 1.0;
  Scalar F0 = 0.0;
  Scalar G0 = 0.0;
  Scalar a0 = 0.0;
  Scalar b0 = 0.0;
};

/// u(x, t) = t^beta sqrt(2) sin(k pi x) with its closed-form forcing g.
struct ManufacturedCase {
  Scalar alpha = 0.5;
  Scalar beta = 1.0;
  int k = 1;
  ManufacturedConstants constants;
  Expression u;
  Expression g;

  /// u(., t) in the sine basis of dimension m (zero outside mode k).
  Vector exact_coefficients(Index m, Scalar t) const;
  /// Problem on [0, horizon] in the sine basis of dimension m.
  Problem problem(Index m, Scalar horizon) const;
  /// Largest relative defect of the integrated equation at 20 random
  /// times in (0, horizon], using tanh-sinh quadrature in time.
  Scalar integrated_defect(Scalar horizon, unsigned seed = 7) const;
};

/// Builds the case. Throws DomainError for beta < 1 or k < 1 and
/// ValidationError when any coefficient is not constant.
ManufacturedCase manufactured(Scalar alpha, Scalar beta, int k,
                              const ManufacturedConstants& constants);
ManufacturedCase manufactured(Scalar alpha, Scalar beta, int k, const CoefficientSet& coeffs);

/// Solve on the mesh refined 4x (same grading) and keep every fourth node.
/// Throws DomainError when N > 512.
SolutionTrace refined_reference(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                                const SolverOptions& options = {});

/// Tanh-sinh integral of f over [a, b] with the given number of levels.
Scalar tanh_sinh(const std::function<Scalar(Scalar)>& f, Scalar a, Scalar b, int levels = 7);

}  // namespace fracvolt::oracle
