#pragma once

#include <string>
#include <vector>

#include "fracvolt/expr.hpp"
#include "fracvolt/fracops.hpp"
#include "fracvolt/types.hpp"

namespace fracvolt {

enum class BasisKind { Sine, P1 };

/// Galerkin basis on (0, 1) with homogeneous Dirichlet conditions.
/// Sine: phi_k(x) = sqrt(2) sin(k pi x), k = 1..m.
/// P1: hat functions at the interior nodes x_i = i / (m + 1).
struct BasisSpec {
  BasisKind kind = BasisKind::Sine;
  Index dim = 1;

  /// Value of basis function i (0-based) at x.
  Scalar value(Index i, Scalar x) const;
  /// Derivative of basis function i at x.
  Scalar derivative(Index i, Scalar x) const;
};

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// Coefficients of the operator. kappa depends on x only; F, G, a, b may
/// depend on x and t. The time derivatives of F and a are formed
/// symbolically at construction.
struct CoefficientSet {
  Expression kappa = Expression::constant(1.0);
  Expression F;
  Expression G;
  Expression a;
  Expression b;
  Expression F_prime;
  Expression a_prime;

  CoefficientSet() = default;
  CoefficientSet(Expression kappa, Expression F, Expression G, Expression a,
                 Expression b);

  /// Both F and a are polynomials in t.
  bool polynomial_in_t() const;
  /// Largest |central difference - derivative| over sampled (x, t),
  /// using step h. Expected to be O(h^2).
  Scalar derivative_defect(Scalar horizon, Scalar h) const;
};

struct SourceSpec {
  Expression u0;
  Expression g;
  Scalar eta = 1.0;
  Scalar M_bound = 0.0;
};

/// Complete problem data for one solve.
struct Problem {
  Scalar alpha = 0.5;
  Scalar horizon = 1.0;
  BasisSpec basis;
  CoefficientSet coeffs;
  SourceSpec source;
};

/// Precomputed spatial quadrature and basis tables for a given problem.
/// Assembly is pure and thread-safe once constructed.
class KernelAssembly {
 public:
  /// points_per_cell = 0 selects the default (12 for Sine, 8 for P1).
  KernelAssembly(BasisSpec basis, CoefficientSet coeffs, int points_per_cell = 0);

  const BasisSpec& basis() const { return basis_; }
  const CoefficientSet& coeffs() const { return coeffs_; }
  Index dim() const { return basis_.dim; }
  int points_per_cell() const { return q_; }

  const Matrix& mass() const { return mass_; }
  /// Gram matrix of basis gradients, <phi_j', phi_i'>.
  const Matrix& grad_gram() const { return grad_gram_; }

  Matrix K1(Scalar t) const;
  Matrix K1_prime(Scalar t) const;
  Matrix K2(Scalar t) const;
  /// sum_k weights[k] * K1'(times[k]) with a single assembly.
  Matrix K1_prime_combination(const std::vector<Scalar>& times,
                              const std::vector<Scalar>& weights) const;

  bool K1_time_independent() const { return k1_const_; }
  bool K1_prime_vanishes() const { return k1p_zero_; }
  bool K2_vanishes() const { return k2_zero_; }
  bool K2_time_independent() const { return k2_const_; }

  /// Load vector <f(., t), phi_i>.
  Vector load(const Expression& f, Scalar t) const;
  /// L2 projection coefficients M^{-1} <f(., t), phi>.
  Vector project(const Expression& f, Scalar t) const;
  /// M^{-1} rhs.
  Vector solve_mass(const Vector& rhs) const;
  /// ||f(., t)||_{L2(0,1)} by the same quadrature.
  Scalar l2_norm(const Expression& f, Scalar t) const;

  /// Quadrature points on (0, 1).
  const Eigen::ArrayXd& points() const { return x_; }

 private:
  Matrix form(const Eigen::ArrayXd* c_dd, const Eigen::ArrayXd* c_vd,
              const Eigen::ArrayXd* c_vv) const;

  BasisSpec basis_;
  CoefficientSet coeffs_;
  int q_;
  Eigen::ArrayXd x_;
  Eigen::ArrayXd w_;
  Matrix phi_;   // P x m
  Matrix dphi_;  // P x m
  Matrix mass_;
  Matrix grad_gram_;
  Matrix stiffness_;
  Eigen::LLT<Matrix> mass_llt_;
  bool k1_const_ = false;
  bool k1p_zero_ = false;
  bool k2_zero_ = false;
  bool k2_const_ = false;
  Matrix k1_cached_;
  Matrix k2_cached_;
};

Matrix assemble_K1(const KernelAssembly& ka, Scalar t);
Matrix assemble_K1prime(const KernelAssembly& ka, Scalar t);
Matrix assemble_K2(const KernelAssembly& ka, Scalar t);

/// f_X(t_n) = P_X u0 + int_0^{t_n} P_X g(s) ds at every node. The first
/// cell uses s = t_1 sigma^{1/eta}. Violations of ||g(t)|| <= M t^{eta-1}
/// on interior nodes are appended to warnings when given.
GridFunction project_data(const KernelAssembly& ka, const SourceSpec& source,
                          std::shared_ptr<const TimeMesh> mesh,
                          std::vector<std::string>* warnings = nullptr);

/// Nodes n with ||g(t_n)|| > M t_n^{eta-1} (interior nodes only).
std::vector<Index> g_bound_violations(const KernelAssembly& ka, const SourceSpec& source,
                                      const TimeMesh& mesh);

struct RescaledProblem {
  Problem problem;
  /// tau = factor * t; 1 when no rescale was needed.
  Scalar factor = 1.0;
};

/// Rescale time so that inf kappa >= 1. Throws ValidationError when the
/// sampled infimum is not positive or kappa depends on t.
RescaledProblem rescale_time(const Problem& problem);

/// Infimum of kappa over a fine sample of [0, 1].
Scalar sampled_kappa_min(const Expression& kappa);

}  // namespace fracvolt
