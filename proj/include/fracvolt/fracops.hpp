#pragma once

#include <memory>
#include <vector>

#include "fracvolt/types.hpp"

namespace fracvolt {

/// Order of a fractional integral or derivative. The solver order alpha
/// lives in (0, 1]; kernel and integral routines accept any order >= 0.
class FracOrder {
 public:
  explicit FracOrder(Scalar value);
  Scalar value() const { return value_; }
  operator Scalar() const { return value_; }

  /// Throws DomainError unless 0 < value <= 1.
  FracOrder& require_solver_range();

 private:
  Scalar value_;
};

/// Partition t_n = T (n/N)^gamma of [0, T]. gamma = 1 is the uniform mesh.
class TimeMesh {
 public:
  TimeMesh(Scalar horizon, Index intervals, Scalar grading = 1.0);

  static TimeMesh uniform(Scalar horizon, Index intervals) {
    return TimeMesh(horizon, intervals, 1.0);
  }

  Scalar horizon() const { return horizon_; }
  Index intervals() const { return intervals_; }
  Index node_count() const { return intervals_ + 1; }
  Scalar grading() const { return grading_; }

  Scalar operator[](Index n) const { return nodes_[static_cast<std::size_t>(n)]; }
  Scalar step(Index n) const { return (*this)[n] - (*this)[n - 1]; }
  const std::vector<Scalar>& nodes() const { return nodes_; }

  /// Index k >= 1 of the cell [t_{k-1}, t_k] containing s (clamped).
  Index cell_of(Scalar s) const;

  /// Composite trapezoid weights for integrating a nodal function over [0, t_n].
  Vector trapezoid_weights(Index n) const;

  friend bool operator==(const TimeMesh& a, const TimeMesh& b) {
    return a.nodes_ == b.nodes_;
  }

 private:
  Scalar horizon_;
  Index intervals_;
  Scalar grading_;
  std::vector<Scalar> nodes_;
};

/// Grading exponent 2/alpha clamped to [1, 8].
Scalar default_grading(Scalar alpha);

/// Vector-valued nodal samples on a TimeMesh, read as the piecewise-linear
/// interpolant in time. Column n holds the m-vector at t_n.
class GridFunction {
 public:
  GridFunction(std::shared_ptr<const TimeMesh> mesh, Matrix values);
  GridFunction(std::shared_ptr<const TimeMesh> mesh, Index dim);

  const TimeMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TimeMesh>& mesh_ptr() const { return mesh_; }
  Index dim() const { return values_.rows(); }
  Index node_count() const { return values_.cols(); }

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }
  auto at(Index n) const { return values_.col(n); }
  auto at(Index n) { return values_.col(n); }

  /// Piecewise-linear value at an arbitrary time in [0, T].
  Vector evaluate(Scalar t) const;

  /// Pointwise multiplication by t (the operator M).
  GridFunction times_t() const;

  bool all_finite() const { return values_.allFinite(); }

 private:
  std::shared_ptr<const TimeMesh> mesh_;
  Matrix values_;
};

/// Build a GridFunction by sampling f(t) -> m-vector at every node.
template <class F>
GridFunction sample(std::shared_ptr<const TimeMesh> mesh, Index dim, F&& f) {
  GridFunction g(mesh, dim);
  for (Index n = 0; n < g.node_count(); ++n) {
    g.at(n) = f((*mesh)[n]);
  }
  return g;
}

/// Kernel omega_mu(t) = t^{mu-1} / Gamma(mu).
Scalar omega(Scalar mu, Scalar t);

/// Product-integration weights at node n: sum_j w_j phi(t_j) equals the
/// exact integral of omega_mu(t_n - s) against the piecewise-linear
/// interpolant of phi on [0, t_n]. Size n + 1.
Vector conv_weights(Scalar mu, const TimeMesh& mesh, Index n);

/// Same weights for an arbitrary evaluation time s in [0, T]. The
/// returned vector covers nodes 0..k where k = mesh.cell_of(s); node k only
/// contributes through the partial cell [t_{k-1}, s].
Vector conv_weights_at(Scalar mu, const TimeMesh& mesh, Scalar s);

/// Product-integration fractional integral I^mu phi at every node
/// (identity for mu = 0).
GridFunction frac_integral(Scalar mu, const GridFunction& phi);

/// (I^mu phi)(s) of the piecewise-linear interpolant, for any s.
Vector frac_integral_at(Scalar mu, const GridFunction& phi, Scalar s);

/// Riemann-Liouville derivative of order 1 - alpha, d/dt I^alpha phi, by
/// finite differences. Diagnostic accuracy only.
GridFunction rl_derivative(Scalar alpha, const GridFunction& phi);

/// Nodal time derivative of a GridFunction (three-point on the graded mesh).
GridFunction time_derivative(const GridFunction& phi);

/// Mittag-Leffler function E_alpha(z) for 0 < alpha <= 1 and real |z| <= 50.
Scalar mittag_leffler(Scalar alpha, Scalar z);

/// Supported |z| for mittag_leffler.
inline constexpr Scalar kMittagLefflerMaxAbsArg = 50.0;

}  // namespace fracvolt
