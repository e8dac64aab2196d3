#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracvolt/fracops.hpp"
#include "fracvolt/spatial.hpp"
#include "fracvolt/types.hpp"

namespace fracvolt {

/// Step matrix too ill-conditioned to factor reliably.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(Index node, Scalar condition);
  Index node() const { return node_; }
  Scalar condition() const { return condition_; }

 private:
  Index node_;
  Scalar condition_;
};

/// State norm exceeded the divergence guard.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(Index node, Scalar norm, Scalar threshold);
  Index node() const { return node_; }

 private:
  Index node_;
};

enum class Scheme { BForm, KernelForm, Picard };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// General: iterate the discrete B-form operator. Semigroup: requires
/// time-constant K1 with K1' = 0 and K2 = 0 and uses
/// term_k = (-M^{-1} K1)^k I^{k alpha} f.
enum class PicardMode { General, Semigroup };

struct SolverOptions {
  Scheme scheme = Scheme::BForm;
  int picard_depth = 8;
  PicardMode picard_mode = PicardMode::General;
  /// Absolute bound on the per-node linear-system residual.
  Scalar tolerance = 1e-9;
  /// Gauss-Jacobi order for the inner kernel integral.
  int inner_order = 8;
  /// Spatial quadrature points per cell (0 = basis default).
  int points_per_cell = 0;

  void validate() const;
};

/// Composite kernel K(t, s) = omega_alpha(t - s) G(t, s) + H(s) with
/// G(t, s) = K1(t) - (t - s) int_0^1 y^{alpha-1} K1'(s + (t - s) y) dy and
/// H(s) = K2(s).
struct KernelEval {
  std::shared_ptr<const KernelAssembly> assembly;
  Scalar alpha = 0.5;
  int inner_order = 8;

  Matrix G(Scalar t, Scalar s) const;
  Matrix H(Scalar s) const { return assembly->K2(s); }
};

/// K(t, s) for 0 <= s < t. Throws DomainError when s >= t.
Matrix kernel_eval(const KernelEval& kernel, Scalar t, Scalar s);

struct SolutionTrace {
  SolutionTrace(GridFunction u_, GridFunction I_alpha_u_, GridFunction f_)
      : u(std::move(u_)), I_alpha_u(std::move(I_alpha_u_)), f(std::move(f_)) {}

  /// Coefficients in the basis, one column per node.
  GridFunction u;
  /// Product-integration I^alpha u.
  GridFunction I_alpha_u;
  /// Projected data f_X.
  GridFunction f;
  Vector residual;
  Scheme scheme = Scheme::BForm;
  Scalar alpha = 0.5;
  int inner_order = 8;

  std::shared_ptr<const KernelAssembly> assembly;
  Scalar u0_norm = 0.0;
  Scalar M_bound = 0.0;
  Scalar eta = 1.0;

  double wall_seconds = 0.0;
  double flops = 0.0;
  std::vector<std::string> warnings;

  /// Picard only: sup-norm of each series term, and of the last one.
  std::vector<Scalar> picard_term_norms;
  Scalar picard_last_term_norm = 0.0;

  /// t * u(t) (the operator M of multiplication by t).
  GridFunction Mu() const { return u.times_t(); }
  const TimeMesh& mesh() const { return u.mesh(); }
  const Matrix& mass() const { return assembly->mass(); }
  const Matrix& grad_gram() const { return assembly->grad_gram(); }
  /// L2(0, 1) norm of the state at node n.
  Scalar l2_norm(Index n) const;
  Scalar h1_seminorm(Index n) const;
};

/// Direct product-integration stepping (B_FORM or KERNEL_FORM). Rejects
/// scheme PICARD.
SolutionTrace solve_direct(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                           const SolverOptions& options = {});

/// Truncated resolvent series sum_{k=0}^{depth} (-K)^k f.
SolutionTrace solve_picard(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                           const SolverOptions& options);

/// Dispatch on options.scheme.
SolutionTrace solve(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                    const SolverOptions& options = {});

/// Per-node defect ||M u_n + (K u)_n - M f_n|| of the discrete equation
/// matching the trace's scheme (B-form for PICARD traces).
Vector residual(const SolutionTrace& trace);

/// The discrete history operator (K u)_n of the B-form, before M^{-1}:
/// K1(t_n) Y_n - trap int K1' Y + trap int K2 u with Y = I^alpha_h u.
Matrix apply_b_operator(const KernelAssembly& ka, Scalar alpha, const GridFunction& u);

/// Same for the kernel form: sum_j w_nj G(t_n, t_j) u_j + trap int K2 u.
Matrix apply_kernel_operator(const KernelEval& kernel, const GridFunction& u);

/// Map a trace solved in rescaled time tau = factor * t back to t on a mesh
/// with the given original horizon.
SolutionTrace unscale_trace(const SolutionTrace& trace, Scalar factor, Scalar horizon);

}  // namespace fracvolt
