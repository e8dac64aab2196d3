#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fracvolt/config.hpp"
#include "fracvolt/report.hpp"
#include "fracvolt/volterra.hpp"

namespace fracvolt {

/// FRACVOLT_THREADS when set to a positive integer, else the hardware count.
unsigned thread_count();

/// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn);

/// Independent per-case seed derived from a run seed and two case indices.
std::uint64_t case_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Standard normal nodal values on the mesh.
GridFunction random_piecewise_linear(std::mt19937_64& rng, std::shared_ptr<const TimeMesh> mesh,
                                     Index dim);

/// B B^T + 0.1 I with standard normal B.
Matrix random_spd(std::mt19937_64& rng, Index dim);

/// Problem with smooth random coefficients given as grammar strings:
/// kappa = s (k0 + k1 x), F = s (f0 + f1 t x), G = s g0 x, a = s (a0 + a1 t),
/// b = s b0 x t, u0 = x (1 - x), g = g0 sin(pi x) (1 + t), where s = scale.
Problem random_problem(std::mt19937_64& rng, Scalar alpha, Scalar horizon, BasisKind basis,
                       Index dim, Scalar scale = 1.0);

/// Single-mode subdiffusion in the sine basis: u = c0 E_alpha(-lambda t^alpha) in mode k.
struct SeparableMode {
  Index k = 1;
  Scalar c0 = 1.0;
  Scalar lambda = 0.0;
};

/// Recognises a problem whose exact semi-discrete solution is separable.
std::optional<SeparableMode> detect_separable(const Problem& problem);

struct ScaledSolve {
  SolutionTrace trace;
  Scalar factor = 1.0;
};

/// Solve on T (n/N)^gamma, rescaling time first when inf kappa < 1.
ScaledSolve solve_rescaled(const Problem& problem, Index N, Scalar grading,
                           const SolverOptions& options);

struct CheckResult {
  std::string name;
  bool pass = false;
  Scalar value = 0.0;
  Scalar tolerance = 0.0;
  Json details = Json::object();
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<Scalar> alphas;
  std::vector<CheckResult> checks;

  bool pass() const;
  /// Deterministic except for the "generated_at" field.
  Json json() const;
};

inline const std::vector<Scalar> kDefaultSuiteAlphas = {0.25, 0.5, 0.75};

/// Inequality suite on random piecewise-linear inputs, `draws` per alpha.
SuiteReport verify_lemmas(std::uint64_t seed, const std::vector<Scalar>& alphas, int draws = 100,
                          Index N = 64, unsigned threads = 1);
/// Zero data, mode decoupling, scheme equivalence, resolvent consistency.
SuiteReport verify_solver(std::uint64_t seed, const std::vector<Scalar>& alphas,
                          unsigned threads = 1);
/// Dual-path Mittag-Leffler, manufactured-case invariants and recovery.
SuiteReport verify_oracle(std::uint64_t seed, const std::vector<Scalar>& alphas,
                          unsigned threads = 1);

struct ConvergenceRow {
  Index N = 0;
  Scalar error = 0.0;
  /// log2 ratio against the previous row; NaN on the first row.
  Scalar order = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  /// "separable" or "refined".
  std::string reference;
  bool graded = false;
  bool monotone = false;
  Scalar min_order = 0.0;
  bool pass = false;
};

inline constexpr Scalar kOrderThreshold = 0.9;

/// Sup-error of the config's solve over the grid against the separable
/// oracle when it applies, else against a 4x refined solve. Throws
/// ValidationError for fewer than 3 or non-increasing entries, and
/// DomainError when a refined reference would need N > 512.
ConvergenceResult convergence_study(const RunConfig& config, const std::vector<Index>& grid);

void write_convergence_csv(std::ostream& os, const ConvergenceResult& result);

}  // namespace fracvolt
