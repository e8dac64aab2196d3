#pragma once

#include <functional>

#include "fracvolt/types.hpp"

namespace fracvolt::quad {

/// Nodes and weights of a rule on the unit interval [0, 1].
struct Rule {
  Vector nodes;
  Vector weights;
  Index size() const { return nodes.size(); }
};

/// q-point Gauss-Legendre rule on [0, 1].
const Rule& gauss_legendre(int q);

/// q-point Gauss-Jacobi rule on [0, 1] for the weight (1 - y)^a * y^b,
/// a, b > -1. Computed by Golub-Welsch and cached.
const Rule& gauss_jacobi(int q, Scalar a, Scalar b);

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// Bisects the piece with the largest Kronrod-Gauss difference until the
/// summed estimate meets max(abs_tol, rel_tol * |value|) or max_intervals
/// pieces exist.
Scalar adaptive_gk15(const std::function<Scalar(Scalar)>& f, Scalar lo,
                     Scalar hi, Scalar rel_tol, Scalar abs_tol,
                     int max_intervals = 500);

}  // namespace fracvolt::quad
