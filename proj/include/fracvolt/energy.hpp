#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fracvolt/fracops.hpp"
#include "fracvolt/types.hpp"

namespace fracvolt {

struct SolutionTrace;

// Quadratic functionals of the piecewise-linear interpolant of phi on
// [0, t_n]. Inner products use the Gram matrix when given (identity
// otherwise). Singular factors are integrated with Gauss-Jacobi rules, so
// the values are exact up to rounding for piecewise-linear phi.

/// Q^0(phi, t_n) = int_0^{t_n} ||phi||^2 ds.
Scalar q0(const GridFunction& phi, Index n, const Matrix* gram = nullptr);

/// Q^mu_1(phi, t_n) = int_0^{t_n} <phi, I^mu phi> ds.
Scalar q1(Scalar mu, const GridFunction& phi, Index n, const Matrix* gram = nullptr);

/// Q^mu_2(phi, t_n) = int_0^{t_n} ||I^mu phi||^2 ds.
Scalar q2(Scalar mu, const GridFunction& phi, Index n, const Matrix* gram = nullptr);

/// Values at every node (index 0 holds 0).
Vector q0_cumulative(const GridFunction& phi, const Matrix* gram = nullptr);
Vector q1_cumulative(Scalar mu, const GridFunction& phi, const Matrix* gram = nullptr);
Vector q2_cumulative(Scalar mu, const GridFunction& phi, const Matrix* gram = nullptr);

/// int_0^{t_n} <phi, I^mu psi> ds.
Scalar cross_term(Scalar mu, const GridFunction& phi, const GridFunction& psi, Index n,
                  const Matrix* gram = nullptr);

/// 2 int_0^{t_n} omega_alpha(t_n - s) Q^alpha_1(phi, s) ds, evaluated as
/// 2 (I^{1+alpha} <phi, I^alpha phi>)(t_n).
Scalar lemma_d_rhs(Scalar alpha, const GridFunction& phi, Index n,
                   const Matrix* gram = nullptr);

/// Q^mu_1 of a piecewise-constant function with value slopes.col(k-1) on
/// cell k, up to t_n.
Scalar q1_piecewise_constant(Scalar mu, const Matrix& slopes, const TimeMesh& mesh, Index n,
                             const Matrix* gram = nullptr);

/// (B^mu_psi phi)(t) = psi(t) I^mu phi(t) - int_0^t psi'(s) I^mu phi(s) ds,
/// outer integral by composite trapezoid on the nodes.
GridFunction b_op_apply(Scalar mu, const std::function<Scalar(Scalar)>& psi,
                        const std::function<Scalar(Scalar)>& psi_prime,
                        const GridFunction& phi);

struct InequalityRecord {
  std::string name;
  Scalar lhs = 0.0;
  Scalar rhs = 0.0;
  Scalar margin = 0.0;
  bool pass = false;
  std::map<std::string, Scalar> params;
};

/// A measured ratio; applicable is false for 0/0.
struct Ratio {
  Scalar value = 0.0;
  bool applicable = false;
};

struct HolderEntry {
  Scalar t1 = 0.0;
  Scalar t2 = 0.0;
  Scalar modulus = 0.0;
};

struct AprioriDiagnostics {
  /// sup_n Q^alpha_1(u, t_n) / (t_n^alpha Q^0(f, t_n)).
  Ratio q1_ratio;
  /// sup_n Q^0(u, t_n) / Q^0(f, t_n).
  Ratio q0_ratio;
  /// sup_n (||u||^2 + t^alpha ||grad u||^2) / (||u0||^2 + M^2 t^{2 eta}).
  Ratio pointwise_ratio;
  /// max_n ||u_n|| - ||u_0||.
  Scalar decay_excess = 0.0;
  Scalar holder_delta = 0.0;
  std::vector<HolderEntry> holder;
};

struct EnergyReport {
  std::vector<InequalityRecord> records;
  std::vector<Scalar> gronwall;
  AprioriDiagnostics diagnostics;
  bool has_diagnostics = false;

  bool all_pass() const;
};

inline constexpr Scalar kInequalityTolAbs = 1e-12;
inline constexpr Scalar kInequalityTolRel = 1e-10;
inline const std::vector<Scalar> kEpsilonGrid = {0.1, 0.5, 1.0, 2.0};
inline const std::vector<Scalar> kOrderGrid = {0.0, 0.25, 0.5, 0.75, 1.0};

/// Record with margin = rhs - lhs and the suite pass rule.
InequalityRecord make_record(std::string name, Scalar lhs, Scalar rhs,
                             std::map<std::string, Scalar> params = {});

/// All explicit-constant inequalities at node n: (A) and (AC) for every
/// epsilon, (B), (C), Lemma D, Lemma E for every mu < nu in the order grid,
/// and the pointwise bound applied to t * phi. (A), (AC), (B) need alpha < 1
/// and are skipped at alpha = 1.
EnergyReport check_inequalities(const GridFunction& phi, const GridFunction& psi, Scalar alpha,
                                Index n, const Matrix* gram = nullptr);

/// Pointwise-bound record for a phi with phi(0) = 0:
/// ||phi(t_n)||^2 <= 2 omega_{2-alpha}(t_n) Q^alpha_1(phi', t_n).
InequalityRecord pointwise_bound_record(Scalar alpha, const GridFunction& phi, Index n,
                                        const Matrix* gram = nullptr);

/// a(t) E_beta(b(t) t^beta) at each node. Throws ValidationError when a or b
/// is negative or decreases by more than 1e-12.
GridFunction gronwall_envelope(const std::function<Scalar(Scalar)>& a_fn,
                               const std::function<Scalar(Scalar)>& b_fn, Scalar beta,
                               std::shared_ptr<const TimeMesh> mesh);

/// Ratios for the a priori bounds and a Hoelder modulus table
/// ||u(t2) - u(t1)|| / sqrt(t2 - t1) with t1 >= T/8.
AprioriDiagnostics diagnose_apriori(const SolutionTrace& trace, const GridFunction& f_X);

struct PlancherelResult {
  Scalar lhs = 0.0;
  Scalar rhs = 0.0;
  Scalar reldiff = 0.0;
};

/// Q^mu_1(phi, T) against (cos(pi mu / 2) / pi) int_0^{Ymax} y^{-mu} ||phi_hat(iy)||^2 dy,
/// Ymax = 1e3 N / T, with phi extended by zero past T.
PlancherelResult plancherel_crosscheck(const GridFunction& phi, Scalar mu,
                                       const Matrix* gram = nullptr);

inline constexpr Scalar kPlancherelTol = 1e-2;

}  // namespace fracvolt
