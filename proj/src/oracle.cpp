#include "fracvolt/oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

namespace fracvolt::oracle {

namespace {

constexpr Scalar kPi = std::numbers::pi;

// Paired-limb accumulator: hi + lo carries about 32 digits.
struct DoubleDouble {
  Scalar hi = 0.0;
  Scalar lo = 0.0;

  void add(Scalar v) {
    const Scalar s = hi + v;
    const Scalar bp = s - hi;
    const Scalar err = (hi - (s - bp)) + (v - bp);
    const Scalar lo2 = lo + err;
    hi = s + lo2;
    lo = lo2 - (hi - s);
  }
  Scalar value() const { return hi + lo; }
};

Scalar ml_series(Scalar alpha, Scalar x) {
  DoubleDouble sum;
  for (int n = 0; n < 400; ++n) {
    const Scalar arg = 1.0 + n * alpha;
    if (arg > 170.0) break;
    const Scalar mag = std::pow(x, n) / std::tgamma(arg);
    sum.add(n % 2 == 0 ? mag : -mag);
    if (n > 4 && mag < 1e-34 * std::abs(sum.hi)) break;
  }
  return sum.value();
}

// Inverse Laplace transform of s^{alpha-1} / (s^alpha + x) at t = 1 on the
// parabola z(u) = mu (1 + iu)^2.
Scalar ml_contour(Scalar alpha, Scalar x) {
  using C = std::complex<Scalar>;
  constexpr int N = 32;
  const Scalar h = 3.0 / N;
  const Scalar mu = kPi * N / 12.0;
  Scalar acc = 0.0;
  for (int k = 0; k <= N; ++k) {
    const Scalar u = k * h;
    const C w(1.0, u);
    const C z = mu * w * w;
    const C F = std::pow(z, alpha - 1.0) / (std::pow(z, alpha) + x);
    const C term = std::exp(z) * F * (2.0 * mu) * w;
    acc += (k == 0 ? 1.0 : 2.0) * term.real();
  }
  return acc * h / (2.0 * kPi);
}

Scalar sine_mode(int k, Scalar x) { return std::sqrt(2.0) * std::sin(k * kPi * x); }
Scalar sine_mode_dx(int k, Scalar x) {
  return std::sqrt(2.0) * k * kPi * std::cos(k * kPi * x);
}

}  // namespace

Scalar separable_exact(Scalar alpha, Scalar lambda, Scalar t) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("separable_exact: alpha must be in (0, 1]");
  if (!(lambda > 0.0)) throw DomainError("separable_exact: lambda must be positive");
  if (!(t >= 0.0)) throw DomainError("separable_exact: t must be non-negative");
  const Scalar x = lambda * std::pow(t, alpha);
  if (x > 50.0) {
    throw RangeError("separable_exact: lambda t^alpha = " + std::to_string(x) +
                     " exceeds the supported range 50");
  }
  if (x == 0.0) return 1.0;
  if (alpha == 1.0) return std::exp(-x);
  if (std::pow(x, 1.0 / alpha) <= 2.5) return ml_series(alpha, x);
  return ml_contour(alpha, x);
}

Scalar ml_half_erfc(Scalar x) { return std::exp(x * x) * std::erfc(x); }

Scalar tanh_sinh(const std::function<Scalar(Scalar)>& f, Scalar a, Scalar b, int levels) {
  const Scalar h = std::ldexp(1.0, -levels);
  const Scalar d = 0.5 * (b - a);
  const Scalar half_pi = 0.5 * kPi;
  Scalar acc = 0.0;
  const int n = static_cast<int>(std::ceil(6.5 / h));
  for (int i = -n; i <= n; ++i) {
    const Scalar u = i * h;
    const Scalar v = half_pi * std::sinh(u);
    const Scalar ch = std::cosh(v);
    const Scalar w = half_pi * std::cosh(u) / (ch * ch);
    if (!(w > 0.0)) continue;
    // Offsets from the nearer endpoint, free of cancellation.
    Scalar s;
    if (i <= 0) {
      s = a + d * 2.0 / (1.0 + std::exp(-2.0 * v));
      if (s <= a) continue;
    } else {
      s = b - d * 2.0 / (1.0 + std::exp(2.0 * v));
      if (s >= b) continue;
    }
    acc += w * f(s);
  }
  return acc * d * h;
}

Vector ManufacturedCase::exact_coefficients(Index m, Scalar t) const {
  Vector c = Vector::Zero(m);
  if (k <= m) c(k - 1) = std::pow(t, beta);
  return c;
}

Problem ManufacturedCase::problem(Index m, Scalar horizon) const {
  Problem p;
  p.alpha = alpha;
  p.horizon = horizon;
  p.basis = BasisSpec{BasisKind::Sine, m};
  const auto c = [](Scalar v) { return Expression::constant(v); };
  p.coeffs = CoefficientSet(c(constants.kappa0), c(constants.F0), c(constants.G0),
                            c(constants.a0), c(constants.b0));
  p.source.u0 = c(0.0);
  p.source.g = g;
  p.source.eta = beta;
  const Scalar kp = k * kPi;
  const Scalar cD = std::tgamma(1.0 + beta) / std::tgamma(beta + alpha);
  const Scalar Ta = std::pow(horizon, alpha);
  p.source.M_bound = beta +
                     (std::abs(constants.kappa0) * kp * kp + std::abs(constants.a0)) * cD * Ta +
                     std::abs(constants.b0) * horizon +
                     kp * (std::abs(constants.F0) * cD * Ta + std::abs(constants.G0) * horizon);
  return p;
}

Scalar ManufacturedCase::integrated_defect(Scalar horizon, unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> time(0.0, horizon);
  const Scalar xs[] = {0.13, 0.37, 0.71};
  const Scalar kp2 = (k * kPi) * (k * kPi);
  Scalar worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Scalar t = time(rng);
    if (t <= 0.0) t = horizon;
    // I^alpha s^beta at t, integrated in r = t - s.
    const Scalar Ia = tanh_sinh(
        [&](Scalar r) { return std::pow(r, alpha - 1.0) * std::pow(t - r, beta); }, 0.0, t) /
                      std::tgamma(alpha);
    const Scalar Ib = std::pow(t, beta + 1.0) / (beta + 1.0);
    for (Scalar x : xs) {
      const Scalar phi = sine_mode(k, x);
      const Scalar dphi = sine_mode_dx(k, x);
      const Scalar lhs = std::pow(t, beta) * phi +
                         ((constants.kappa0 * kp2 + constants.a0) * Ia + constants.b0 * Ib) * phi +
                         (constants.F0 * Ia + constants.G0 * Ib) * dphi;
      const Scalar rhs = tanh_sinh([&](Scalar s) { return g(x, s); }, 0.0, t);
      const Scalar scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  }
  return worst;
}

ManufacturedCase manufactured(Scalar alpha, Scalar beta, int k,
                              const ManufacturedConstants& constants) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("manufactured: alpha must be in (0, 1]");
  if (!(beta >= 1.0)) throw DomainError("manufactured: beta must be >= 1");
  if (k < 1) throw DomainError("manufactured: mode index must be >= 1");

  ManufacturedCase mc;
  mc.alpha = alpha;
  mc.beta = beta;
  mc.k = k;
  mc.constants = constants;

  const auto c = [](Scalar v) { return Expression::constant(v); };
  const Expression X = Expression::variable_x();
  const Expression T = Expression::variable_t();
  const Scalar kp = k * kPi;
  const Expression phi = c(std::sqrt(2.0)) * sin(c(kp) * X);
  const Expression dphi = c(std::sqrt(2.0) * kp) * cos(c(kp) * X);
  const Scalar cD = std::tgamma(1.0 + beta) / std::tgamma(beta + alpha);
  const Expression D = c(cD) * pow(T, c(beta + alpha - 1.0));
  const Expression Tb = pow(T, c(beta));

  mc.u = Tb * phi;
  const Expression value_part = c(beta) * pow(T, c(beta - 1.0)) +
                                c(constants.kappa0 * kp * kp + constants.a0) * D +
                                c(constants.b0) * Tb;
  const Expression flux_part = c(constants.F0) * D + c(constants.G0) * Tb;
  mc.g = value_part * phi + flux_part * dphi;
  return mc;
}

ManufacturedCase manufactured(Scalar alpha, Scalar beta, int k, const CoefficientSet& coeffs) {
  const auto constant_of = [](const Expression& e, const char* name) {
    if (!e.is_constant()) {
      throw ValidationError(std::string("manufactured: coefficient ") + name +
                            " must be constant");
    }
    return e(0.0, 0.0);
  };
  ManufacturedConstants cs;
  cs.kappa0 = constant_of(coeffs.kappa, "kappa");
  cs.F0 = constant_of(coeffs.F, "F");
  cs.G0 = constant_of(coeffs.G, "G");
  cs.a0 = constant_of(coeffs.a, "a");
  cs.b0 = constant_of(coeffs.b, "b");
  return manufactured(alpha, beta, k, cs);
}

SolutionTrace refined_reference(const Problem& problem, std::shared_ptr<const TimeMesh> mesh,
                                const SolverOptions& options) {
  const Index N = mesh->intervals();
  if (N > 512) throw DomainError("refined_reference: N must be <= 512");
  auto fine = std::make_shared<const TimeMesh>(mesh->horizon(), 4 * N, mesh->grading());
  SolverOptions opts = options;
  if (opts.scheme == Scheme::Picard) opts.scheme = Scheme::BForm;
  const SolutionTrace ref = solve_direct(problem, fine, opts);

  const auto restrict = [&](const GridFunction& g) {
    Matrix v(g.dim(), N + 1);
    for (Index n = 0; n <= N; ++n) v.col(n) = g.at(4 * n);
    return GridFunction(mesh, std::move(v));
  };
  SolutionTrace out(restrict(ref.u), restrict(ref.I_alpha_u), restrict(ref.f));
  if (ref.residual.size() == fine->node_count()) {
    out.residual.resize(N + 1);
    for (Index n = 0; n <= N; ++n) out.residual(n) = ref.residual(4 * n);
  }
  out.scheme = ref.scheme;
  out.alpha = ref.alpha;
  out.inner_order = ref.inner_order;
  out.assembly = ref.assembly;
  out.u0_norm = ref.u0_norm;
  out.M_bound = ref.M_bound;
  out.eta = ref.eta;
  out.wall_seconds = ref.wall_seconds;
  out.flops = ref.flops;
  out.warnings = ref.warnings;
  return out;
}

}  // namespace fracvolt::oracle
