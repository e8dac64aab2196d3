#include "fracvolt/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracvolt/quadrature.hpp"
#include "fracvolt/special.hpp"

namespace fracvolt {

FracOrder::FracOrder(Scalar value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError("FracOrder: order must be finite and non-negative");
  }
}

FracOrder& FracOrder::require_solver_range() {
  if (!(value_ > 0.0 && value_ <= 1.0)) {
    std::ostringstream os;
    os << "fractional order alpha = " << value_ << " outside (0, 1]";
    throw DomainError(os.str());
  }
  return *this;
}

TimeMesh::TimeMesh(Scalar horizon, Index intervals, Scalar grading)
    : horizon_(horizon), intervals_(intervals), grading_(grading) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("TimeMesh: horizon must be positive");
  }
  if (intervals < 1) {
    throw DomainError("TimeMesh: need at least one interval");
  }
  if (!(grading >= 1.0) || !std::isfinite(grading)) {
    throw DomainError("TimeMesh: grading must be >= 1");
  }
  nodes_.resize(static_cast<std::size_t>(intervals + 1));
  const auto N = static_cast<Scalar>(intervals);
  for (Index n = 0; n <= intervals; ++n) {
    const Scalar r = static_cast<Scalar>(n) / N;
    nodes_[static_cast<std::size_t>(n)] =
        (grading == 1.0) ? horizon * r : horizon * std::pow(r, grading);
  }
  nodes_.front() = 0.0;
  nodes_.back() = horizon;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) {
      throw DomainError("TimeMesh: nodes not strictly increasing (grading too strong)");
    }
  }
}

Index TimeMesh::cell_of(Scalar s) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s);
  auto k = static_cast<Index>(it - nodes_.begin());
  return std::clamp<Index>(k, 1, intervals_);
}

Vector TimeMesh::trapezoid_weights(Index n) const {
  Vector w = Vector::Zero(n + 1);
  for (Index j = 1; j <= n; ++j) {
    const Scalar h = step(j);
    w(j - 1) += 0.5 * h;
    w(j) += 0.5 * h;
  }
  return w;
}

Scalar default_grading(Scalar alpha) {
  return std::clamp(2.0 / alpha, 1.0, 8.0);
}

GridFunction::GridFunction(std::shared_ptr<const TimeMesh> mesh, Matrix values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) {
    throw ValidationError("GridFunction: null mesh");
  }
  if (values_.cols() != mesh_->node_count()) {
    throw ValidationError("GridFunction: value count must equal node count");
  }
}

GridFunction::GridFunction(std::shared_ptr<const TimeMesh> mesh, Index dim)
    : GridFunction(mesh, Matrix::Zero(dim, mesh ? mesh->node_count() : 0)) {}

Vector GridFunction::evaluate(Scalar t) const {
  const Index k = mesh_->cell_of(t);
  const Scalar tl = (*mesh_)[k - 1];
  const Scalar h = mesh_->step(k);
  const Scalar theta = std::clamp((t - tl) / h, 0.0, 1.0);
  return (1.0 - theta) * values_.col(k - 1) + theta * values_.col(k);
}

GridFunction GridFunction::times_t() const {
  GridFunction out(mesh_, values_);
  for (Index n = 0; n < node_count(); ++n) {
    out.at(n) *= (*mesh_)[n];
  }
  return out;
}

Scalar omega(Scalar mu, Scalar t) {
  if (!(mu > 0.0)) {
    throw DomainError("omega: order must be positive");
  }
  if (!(t >= 0.0)) {
    throw DomainError("omega: time must be non-negative");
  }
  if (t == 0.0) {
    if (mu < 1.0) {
      throw DomainError("omega: singular at t = 0 for order below 1");
    }
    return mu == 1.0 ? 1.0 : 0.0;
  }
  if (mu == 1.0) {
    return 1.0;
  }
  return std::pow(t, mu - 1.0) / gamma_fn(mu);
}

namespace {

struct CellWeights {
  Scalar left;
  Scalar right;
};

// Weights of phi(t_{j-1}), phi(t_j) in the integral of omega_mu(s - sigma)
// against the linear interpolant over a full cell [t_{j-1}, t_j] with
// a = s - t_{j-1}, b = s - t_j >= 0. pa1 = a^mu, pb1 = b^mu, pa2 = a^{mu+1},
// pb2 = b^{mu+1}.
CellWeights full_cell(Scalar mu, Scalar a, Scalar h, Scalar pa1, Scalar pb1,
                      Scalar pa2, Scalar pb2, Scalar g1, Scalar g2) {
  const Scalar c = h / a;
  if (c <= 0.25) {
    // Far cell: the closed form cancels; expand (1 - c)^{mu+1} instead.
    // B_L = sum_{k>=2} C(mu+1,k)(-c)^k, B_R = sum_{k>=2} (k-1) C(mu+1,k)(-c)^k.
    const Scalar pref = pa2 / (h * g2);
    Scalar coeff = 0.5 * (mu + 1.0) * mu;
    Scalar power = c * c;
    Scalar sum_l = 0.0;
    Scalar sum_r = 0.0;
    for (int k = 2; k < 400; ++k) {
      const Scalar term = coeff * power;
      sum_l += term;
      sum_r += (k - 1) * term;
      if (std::abs(term) * k <= 1e-18 * std::abs(sum_l)) break;
      coeff *= (mu + 1.0 - k) / (k + 1.0);
      power *= -c;
      if (coeff == 0.0) break;
    }
    return {pref * sum_l, pref * sum_r};
  }
  const Scalar d2 = (pa2 - pb2) / (g2 * h);
  return {pa1 / g1 - d2, d2 - pb1 / g1};
}

// Accumulate weights for evaluation time s over full cells 1..kfull.
void add_full_cells(Scalar mu, const TimeMesh& mesh, Scalar s, Index kfull,
                    Scalar g1, Scalar g2, Vector& w) {
  if (kfull < 1) return;
  std::vector<Scalar> p1(static_cast<std::size_t>(kfull + 1));
  std::vector<Scalar> p2(static_cast<std::size_t>(kfull + 1));
  for (Index j = 0; j <= kfull; ++j) {
    const Scalar d = std::max(s - mesh[j], 0.0);
    p1[static_cast<std::size_t>(j)] = std::pow(d, mu);
    p2[static_cast<std::size_t>(j)] = std::pow(d, mu + 1.0);
  }
  for (Index j = 1; j <= kfull; ++j) {
    const auto jl = static_cast<std::size_t>(j - 1);
    const auto jr = static_cast<std::size_t>(j);
    const Scalar a = s - mesh[j - 1];
    const auto cw = full_cell(mu, a, mesh.step(j), p1[jl], p1[jr], p2[jl],
                              p2[jr], g1, g2);
    w(j - 1) += cw.left;
    w(j) += cw.right;
  }
}

}  // namespace

Vector conv_weights(Scalar mu, const TimeMesh& mesh, Index n) {
  if (!(mu > 0.0)) {
    throw DomainError("conv_weights: order must be positive");
  }
  if (n < 1 || n > mesh.intervals()) {
    throw DomainError("conv_weights: node index out of range");
  }
  Vector w = Vector::Zero(n + 1);
  add_full_cells(mu, mesh, mesh[n], n, gamma_fn(mu + 1.0), gamma_fn(mu + 2.0), w);
  return w;
}

Vector conv_weights_at(Scalar mu, const TimeMesh& mesh, Scalar s) {
  if (!(mu > 0.0)) {
    throw DomainError("conv_weights_at: order must be positive");
  }
  const Index k = mesh.cell_of(s);
  Vector w = Vector::Zero(k + 1);
  const Scalar g1 = gamma_fn(mu + 1.0);
  const Scalar g2 = gamma_fn(mu + 2.0);
  add_full_cells(mu, mesh, s, k - 1, g1, g2, w);
  // Partial cell [t_{k-1}, s] of the interpolant on [t_{k-1}, t_k].
  const Scalar a = std::max(s - mesh[k - 1], 0.0);
  const Scalar h = mesh.step(k);
  const Scalar c = s - mesh[k];
  const Scalar w1 = std::pow(a, mu) / g1;
  const Scalar w2 = std::pow(a, mu + 1.0) / g2;
  w(k - 1) += (mu * w2 - c * w1) / h;
  w(k) += w2 / h;
  return w;
}

GridFunction frac_integral(Scalar mu, const GridFunction& phi) {
  if (!(mu >= 0.0)) {
    throw DomainError("frac_integral: order must be non-negative");
  }
  if (mu == 0.0) {
    return phi;
  }
  GridFunction out(phi.mesh_ptr(), phi.dim());
  const Index N = phi.mesh().intervals();
  for (Index n = 1; n <= N; ++n) {
    const Vector w = conv_weights(mu, phi.mesh(), n);
    out.at(n).noalias() = phi.values().leftCols(n + 1) * w;
  }
  return out;
}

Vector frac_integral_at(Scalar mu, const GridFunction& phi, Scalar s) {
  if (mu == 0.0) {
    return phi.evaluate(s);
  }
  const Vector w = conv_weights_at(mu, phi.mesh(), s);
  return phi.values().leftCols(w.size()) * w;
}

GridFunction time_derivative(const GridFunction& phi) {
  const TimeMesh& mesh = phi.mesh();
  const Index N = mesh.intervals();
  GridFunction out(phi.mesh_ptr(), phi.dim());
  const Matrix& y = phi.values();
  out.at(0) = (y.col(1) - y.col(0)) / mesh.step(1);
  if (N == 1) {
    out.at(1) = out.at(0);
    return out;
  }
  for (Index n = 1; n < N; ++n) {
    const Scalar h1 = mesh.step(n);
    const Scalar h2 = mesh.step(n + 1);
    out.at(n) = -h2 / (h1 * (h1 + h2)) * y.col(n - 1) +
                (h2 - h1) / (h1 * h2) * y.col(n) +
                h1 / (h2 * (h1 + h2)) * y.col(n + 1);
  }
  const Scalar h1 = mesh.step(N - 1);
  const Scalar h2 = mesh.step(N);
  out.at(N) = h2 / (h1 * (h1 + h2)) * y.col(N - 2) -
              (h1 + h2) / (h1 * h2) * y.col(N - 1) +
              (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * y.col(N);
  return out;
}

GridFunction rl_derivative(Scalar alpha, const GridFunction& phi) {
  if (phi.mesh().intervals() < 2) {
    throw DomainError("rl_derivative: need at least two intervals");
  }
  return time_derivative(frac_integral(alpha, phi));
}

namespace {

Scalar ml_series(Scalar alpha, Scalar z) {
  CompensatedSum sum;
  sum.add(1.0);
  const Scalar log_abs = std::log(std::abs(z));
  Scalar prev = 1.0;
  for (int n = 1; n < 200000; ++n) {
    const Scalar log_term = n * log_abs - log_gamma(1.0 + n * alpha);
    if (log_term > 700.0) {
      throw RangeError("mittag_leffler: result overflows double precision");
    }
    Scalar term = std::exp(log_term);
    if (z < 0.0 && (n % 2 == 1)) term = -term;
    sum.add(term);
    const Scalar mag = std::abs(term);
    if (mag < prev && mag <= 1e-17 * std::abs(sum.value())) break;
    prev = mag;
  }
  return sum.value();
}

// E_alpha(-x) for 0 < alpha < 1 from the spectral representation
// E_alpha(-x) = sin(pi a)/(a pi) int_0^inf exp(-(x v)^{1/a}) / (v^2 + 2 v cos(pi a) + 1) dv,
// whose integrand is positive (no cancellation).
Scalar ml_negative_integral(Scalar alpha, Scalar x) {
  const Scalar s = std::sin(std::numbers::pi * alpha);
  const Scalar c = std::cos(std::numbers::pi * alpha);
  const Scalar inv_alpha = 1.0 / alpha;
  auto f = [=](Scalar v) {
    return std::exp(-std::pow(x * v, inv_alpha)) / (v * v + 2.0 * v * c + 1.0);
  };
  const Scalar vmax = std::pow(46.0, alpha) / x;
  std::vector<Scalar> cuts = {0.0};
  if (-c > 0.0 && -c < vmax) {
    // Lorentzian peak of width sin(pi alpha) at v = -cos(pi alpha).
    const Scalar peak = -c;
    const Scalar width = s;
    if (peak - 4.0 * width > 0.0) cuts.push_back(peak - 4.0 * width);
    cuts.push_back(peak);
    if (peak + 4.0 * width < vmax) cuts.push_back(peak + 4.0 * width);
  }
  cuts.push_back(vmax);
  Scalar total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    total += quad::adaptive_gk15(f, cuts[i - 1], cuts[i], 1e-15, 1e-300);
  }
  return s / (alpha * std::numbers::pi) * total;
}

}  // namespace

Scalar mittag_leffler(Scalar alpha, Scalar z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("mittag_leffler: alpha must lie in (0, 1]");
  }
  if (!std::isfinite(z) || std::abs(z) > kMittagLefflerMaxAbsArg) {
    std::ostringstream os;
    os << "mittag_leffler: argument z = " << z
       << " outside supported interval [-50, 50]";
    throw RangeError(os.str());
  }
  if (z == 0.0) {
    return 1.0;
  }
  if (alpha == 1.0) {
    return std::exp(z);
  }
  if (z > 0.0) {
    return ml_series(alpha, z);
  }
  const Scalar x = -z;
  // Cancellation in the alternating series grows like exp(2 x^{1/alpha}).
  if (std::pow(x, 1.0 / alpha) <= 3.0) {
    return ml_series(alpha, z);
  }
  return ml_negative_integral(alpha, x);
}

}  // namespace fracvolt
