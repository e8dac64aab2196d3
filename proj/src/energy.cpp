#include "fracvolt/energy.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "fracvolt/quadrature.hpp"
#include "fracvolt/special.hpp"
#include "fracvolt/volterra.hpp"

namespace fracvolt {

namespace {

constexpr int kCellOrder = 10;

using Array = Eigen::ArrayXd;
using BatchFn = std::function<Array(const Array&)>;

// Column-wise <a_q, b_q>.
Array ip_cols(const Matrix* gram, const Matrix& a, const Matrix& b) {
  if (gram) return (a.cwiseProduct(*gram * b)).colwise().sum().transpose().array();
  return (a.cwiseProduct(b)).colwise().sum().transpose().array();
}

Scalar ip(const Matrix* gram, const Eigen::Ref<const Vector>& a,
          const Eigen::Ref<const Vector>& b) {
  return gram ? a.dot(*gram * b) : a.dot(b);
}

// u^p R(s) with u = s - t_{k-1}.
struct Part {
  Scalar p;
  BatchFn R;
};

// Optional kernel scale * (t - s)^e; right_singular when the cell ends at t.
struct Kernel {
  bool active = false;
  Scalar e = 0.0;
  Scalar t = 0.0;
  Scalar scale = 1.0;
  bool right_singular = false;
};

// Integral over cell k of K(s) [S(s) + sum_i u^{p_i} R_i(s)]. For k >= 2 the
// cell is split geometrically away from t_{k-2} so that each piece is no
// longer than its distance to that point.
Scalar integrate_cell(const TimeMesh& mesh, Index k, const Kernel& K, const BatchFn* S,
                      const std::vector<Part>& parts) {
  const Scalar lo = mesh[k - 1];
  const Scalar hi = mesh[k];
  std::vector<Scalar> cuts{lo};
  if (k >= 2) {
    const Scalar ref = mesh[k - 2];
    Scalar b = lo;
    while (b < hi) {
      b = std::min(hi, b + (b - ref));
      cuts.push_back(b);
    }
  } else {
    cuts.push_back(hi);
  }

  CompensatedSum total;
  const std::size_t pieces = cuts.size() - 1;
  for (std::size_t j = 0; j < pieces; ++j) {
    const Scalar a = cuts[j];
    const Scalar L = cuts[j + 1] - a;
    const bool rs = K.active && K.right_singular && j + 1 == pieces;
    const Scalar ar = rs ? K.e : 0.0;
    const Scalar factor = L * (rs ? std::pow(L, K.e) : 1.0);
    auto kernel_at = [&](const Array& s) -> Array {
      if (!K.active) return Array::Ones(s.size());
      if (rs) return Array::Constant(s.size(), K.scale);
      return K.scale * (K.t - s).pow(K.e);
    };
    const auto& smooth = quad::gauss_jacobi(kCellOrder, ar, 0.0);
    const Array s = a + L * smooth.nodes.array();
    Array v = S ? (*S)(s) : Array::Zero(s.size());
    if (j > 0) {
      for (const auto& part : parts) v += (s - lo).pow(part.p) * part.R(s);
    }
    total.add(factor * (smooth.weights.array() * kernel_at(s) * v).sum());
    if (j == 0) {
      for (const auto& part : parts) {
        const auto& rule = quad::gauss_jacobi(kCellOrder, ar, part.p);
        const Array sp = a + L * rule.nodes.array();
        const Scalar acc = (rule.weights.array() * kernel_at(sp) * part.R(sp)).sum();
        total.add(acc * std::pow(L, part.p) * factor);
      }
    }
  }
  return total.value();
}

// phi(s) = phi_0 + sum_j jumps_j (s - t_j)_+ with jumps_0 the first slope.
struct Decomp {
  const GridFunction* g;
  Matrix slopes;  // column k-1: slope on cell k
  Matrix jumps;   // column j: slope change at t_j

  explicit Decomp(const GridFunction& phi) : g(&phi) {
    const TimeMesh& mesh = phi.mesh();
    const Index N = mesh.intervals();
    slopes.resize(phi.dim(), N);
    for (Index k = 1; k <= N; ++k) slopes.col(k - 1) = (phi.at(k) - phi.at(k - 1)) / mesh.step(k);
    jumps.resize(phi.dim(), N);
    jumps.col(0) = slopes.col(0);
    for (Index j = 1; j < N; ++j) jumps.col(j) = slopes.col(j) - slopes.col(j - 1);
  }

  // phi at points s of cell k (m x Q).
  Matrix linear(Index k, const Array& s) const {
    const Scalar lo = g->mesh()[k - 1];
    return g->at(k - 1).replicate(1, s.size()) +
           slopes.col(k - 1) * (s - lo).matrix().transpose();
  }

  // I^mu phi at points s of cell k >= 2 without the jump at t_{k-1}.
  Matrix regular(Scalar mu, Index k, const Array& s) const {
    const TimeMesh& mesh = g->mesh();
    const Index Q = s.size();
    const Index J = k - 1;  // jumps 0..k-2
    Eigen::ArrayXXd X(J, Q);
    for (Index j = 0; j < J; ++j) X.row(j) = (s - mesh[j]).transpose();
    const Eigen::ArrayXXd W = ((mu + 1.0) * X.log()).exp() / gamma_fn(mu + 2.0);
    const Array w0 = (mu * s.log()).exp() / gamma_fn(mu + 1.0);
    return g->at(0) * w0.matrix().transpose() + jumps.leftCols(J) * W.matrix();
  }
};

// int over cell k of K(s) <phi(s), I^mu psi(s)>.
Scalar cross_cell(Scalar mu, const Decomp& phi, const Decomp& psi, Index k, const Matrix* gram,
                  const Kernel& K) {
  const TimeMesh& mesh = phi.g->mesh();
  if (k == 1) {
    const Scalar g1 = gamma_fn(mu + 1.0);
    const Scalar g2 = gamma_fn(mu + 2.0);
    const Vector c0 = psi.g->at(0) / g1;
    const Vector c1 = psi.slopes.col(0) / g2;
    std::vector<Part> parts{{mu, [&](const Array& s) {
                               const Matrix y = c0.replicate(1, s.size()) +
                                                c1 * s.matrix().transpose();
                               return ip_cols(gram, phi.linear(1, s), y);
                             }}};
    return integrate_cell(mesh, k, K, nullptr, parts);
  }
  const Vector delta = psi.jumps.col(k - 1) / gamma_fn(mu + 2.0);
  const BatchFn S = [&](const Array& s) {
    return ip_cols(gram, phi.linear(k, s), psi.regular(mu, k, s));
  };
  std::vector<Part> parts{{mu + 1.0, [&](const Array& s) {
                             return ip_cols(gram, phi.linear(k, s),
                                            delta.replicate(1, s.size()));
                           }}};
  return integrate_cell(mesh, k, K, &S, parts);
}

// int over cell k of ||I^mu phi(s)||^2.
Scalar square_cell(Scalar mu, const Decomp& phi, Index k, const Matrix* gram) {
  const TimeMesh& mesh = phi.g->mesh();
  const Kernel none;
  if (k == 1) {
    const Vector c0 = phi.g->at(0) / gamma_fn(mu + 1.0);
    const Vector c1 = phi.slopes.col(0) / gamma_fn(mu + 2.0);
    std::vector<Part> parts{{2.0 * mu, [&](const Array& s) {
                               const Matrix y = c0.replicate(1, s.size()) +
                                                c1 * s.matrix().transpose();
                               return ip_cols(gram, y, y);
                             }}};
    return integrate_cell(mesh, k, none, nullptr, parts);
  }
  const Vector delta = phi.jumps.col(k - 1) / gamma_fn(mu + 2.0);
  const BatchFn S = [&](const Array& s) {
    const Matrix A = phi.regular(mu, k, s);
    return ip_cols(gram, A, A);
  };
  const Scalar dd = ip(gram, delta, delta);
  std::vector<Part> parts{
      {mu + 1.0, [&](const Array& s) {
         return Array(2.0 * ip_cols(gram, phi.regular(mu, k, s), delta.replicate(1, s.size())));
       }},
      {2.0 * mu + 2.0, [&](const Array& s) { return Array::Constant(s.size(), dd); }}};
  return integrate_cell(mesh, k, none, &S, parts);
}

Scalar q0_cell(const GridFunction& phi, Index k, const Matrix* gram) {
  const Scalar h = phi.mesh().step(k);
  const auto a = phi.at(k - 1);
  const auto b = phi.at(k);
  return h / 3.0 * (ip(gram, a, a) + ip(gram, a, b) + ip(gram, b, b));
}

void check_node(const GridFunction& phi, Index n) {
  if (n < 0 || n > phi.mesh().intervals()) throw DomainError("node index out of range");
}

}  // namespace

Scalar q0(const GridFunction& phi, Index n, const Matrix* gram) {
  check_node(phi, n);
  CompensatedSum acc;
  for (Index k = 1; k <= n; ++k) acc.add(q0_cell(phi, k, gram));
  return acc.value();
}

Scalar q1(Scalar mu, const GridFunction& phi, Index n, const Matrix* gram) {
  return cross_term(mu, phi, phi, n, gram);
}

Scalar q2(Scalar mu, const GridFunction& phi, Index n, const Matrix* gram) {
  if (mu < 0.0) throw DomainError("q2: order must be non-negative");
  if (mu == 0.0) return q0(phi, n, gram);
  check_node(phi, n);
  CompensatedSum acc;
  const Decomp dp(phi);
  for (Index k = 1; k <= n; ++k) acc.add(square_cell(mu, dp, k, gram));
  return acc.value();
}

Scalar cross_term(Scalar mu, const GridFunction& phi, const GridFunction& psi, Index n,
                  const Matrix* gram) {
  if (mu < 0.0) throw DomainError("q1: order must be non-negative");
  if (&phi == &psi && mu == 0.0) return q0(phi, n, gram);
  check_node(phi, n);
  CompensatedSum acc;
  if (mu == 0.0) {
    for (Index k = 1; k <= n; ++k) {
      const Scalar h = phi.mesh().step(k);
      const auto a = phi.at(k - 1);
      const auto b = phi.at(k);
      const auto c = psi.at(k - 1);
      const auto d = psi.at(k);
      acc.add(h / 6.0 *
              (2.0 * ip(gram, a, c) + ip(gram, a, d) + ip(gram, b, c) + 2.0 * ip(gram, b, d)));
    }
    return acc.value();
  }
  const Kernel none;
  const Decomp dp(phi);
  const Decomp dq(psi);
  for (Index k = 1; k <= n; ++k) acc.add(cross_cell(mu, dp, dq, k, gram, none));
  return acc.value();
}

Vector q0_cumulative(const GridFunction& phi, const Matrix* gram) {
  const Index N = phi.mesh().intervals();
  Vector out = Vector::Zero(N + 1);
  for (Index k = 1; k <= N; ++k) out(k) = out(k - 1) + q0_cell(phi, k, gram);
  return out;
}

Vector q1_cumulative(Scalar mu, const GridFunction& phi, const Matrix* gram) {
  if (mu == 0.0) return q0_cumulative(phi, gram);
  const Index N = phi.mesh().intervals();
  const Kernel none;
  Vector out = Vector::Zero(N + 1);
  const Decomp dp(phi);
  for (Index k = 1; k <= N; ++k) out(k) = out(k - 1) + cross_cell(mu, dp, dp, k, gram, none);
  return out;
}

Vector q2_cumulative(Scalar mu, const GridFunction& phi, const Matrix* gram) {
  if (mu == 0.0) return q0_cumulative(phi, gram);
  const Index N = phi.mesh().intervals();
  Vector out = Vector::Zero(N + 1);
  const Decomp dp(phi);
  for (Index k = 1; k <= N; ++k) out(k) = out(k - 1) + square_cell(mu, dp, k, gram);
  return out;
}

Scalar lemma_d_rhs(Scalar alpha, const GridFunction& phi, Index n, const Matrix* gram) {
  check_node(phi, n);
  if (n == 0) return 0.0;
  Kernel K;
  K.active = true;
  K.e = alpha;
  K.t = phi.mesh()[n];
  K.scale = 1.0 / gamma_fn(1.0 + alpha);
  CompensatedSum acc;
  const Decomp dp(phi);
  for (Index k = 1; k <= n; ++k) {
    K.right_singular = (k == n);
    acc.add(cross_cell(alpha, dp, dp, k, gram, K));
  }
  return 2.0 * acc.value();
}

Scalar q1_piecewise_constant(Scalar mu, const Matrix& slopes, const TimeMesh& mesh, Index n,
                             const Matrix* gram) {
  if (!(mu > 0.0)) throw DomainError("q1_piecewise_constant: order must be positive");
  const auto& rule = quad::gauss_legendre(8);
  const Index q = rule.size();
  Array P(q * q), Q(q * q), W(q * q);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < q; ++j) {
      P(i * q + j) = rule.nodes(i);
      Q(i * q + j) = rule.nodes(j);
      W(i * q + j) = rule.weights(i) * rule.weights(j);
    }
  }
  const Scalar inv_gamma = 1.0 / gamma_fn(mu);
  // D_jk = int_{cell j} int_{cell k} omega_mu(s - r)_+ dr ds for k <= j.
  auto pair_weight = [&](Index j, Index k) {
    const Scalar a = mesh.step(j);
    if (j == k) return omega(mu + 2.0, a);
    const Scalar b = mesh.step(k);
    const Scalar x = mesh[j - 1] - mesh[k];
    if (x >= std::max(a, b)) {
      const Array z = x + a * P + b * Q;
      return (W * ((mu - 1.0) * z.log()).exp()).sum() * a * b * inv_gamma;
    }
    auto w = [&](Scalar z) { return z > 0.0 ? omega(mu + 2.0, z) : 0.0; };
    return w(x + a + b) - w(x + a) - w(x + b) + w(x);
  };
  CompensatedSum acc;
  for (Index j = 1; j <= n; ++j) {
    for (Index k = 1; k <= j; ++k) {
      acc.add(ip(gram, slopes.col(j - 1), slopes.col(k - 1)) * pair_weight(j, k));
    }
  }
  return acc.value();
}

GridFunction b_op_apply(Scalar mu, const std::function<Scalar(Scalar)>& psi,
                        const std::function<Scalar(Scalar)>& psi_prime,
                        const GridFunction& phi) {
  const GridFunction Y = frac_integral(mu, phi);
  const TimeMesh& mesh = phi.mesh();
  GridFunction out(phi.mesh_ptr(), phi.dim());
  out.at(0).setZero();
  Vector trap = Vector::Zero(phi.dim());
  Vector prev = psi_prime(mesh[0]) * Y.at(0);
  for (Index n = 1; n < phi.node_count(); ++n) {
    const Vector cur = psi_prime(mesh[n]) * Y.at(n);
    trap += 0.5 * mesh.step(n) * (prev + cur);
    prev = cur;
    out.at(n) = psi(mesh[n]) * Y.at(n) - trap;
  }
  return out;
}

bool EnergyReport::all_pass() const {
  for (const auto& r : records) {
    if (!r.pass) return false;
  }
  return true;
}

InequalityRecord make_record(std::string name, Scalar lhs, Scalar rhs,
                             std::map<std::string, Scalar> params) {
  InequalityRecord r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = std::isfinite(r.margin) &&
           r.margin >= -kInequalityTolAbs - kInequalityTolRel * std::abs(rhs);
  r.params = std::move(params);
  return r;
}

InequalityRecord pointwise_bound_record(Scalar alpha, const GridFunction& phi, Index n,
                                        const Matrix* gram) {
  check_node(phi, n);
  if (phi.at(0).norm() != 0.0) throw ValidationError("pointwise bound needs phi(0) = 0");
  const TimeMesh& mesh = phi.mesh();
  const Index N = mesh.intervals();
  Matrix slopes(phi.dim(), N);
  for (Index k = 1; k <= N; ++k) slopes.col(k - 1) = (phi.at(k) - phi.at(k - 1)) / mesh.step(k);
  const Scalar t = mesh[n];
  const Scalar lhs = ip(gram, phi.at(n), phi.at(n));
  const Scalar rhs = n == 0 ? 0.0
                            : 2.0 * omega(2.0 - alpha, t) *
                                  q1_piecewise_constant(alpha, slopes, mesh, n, gram);
  return make_record("pointwise_bound", lhs, rhs, {{"alpha", alpha}, {"t", t}});
}

EnergyReport check_inequalities(const GridFunction& phi, const GridFunction& psi, Scalar alpha,
                                Index n, const Matrix* gram) {
  FracOrder(alpha).require_solver_range();
  check_node(phi, n);
  EnergyReport report;
  const Scalar t = phi.mesh()[n];
  const Scalar ta = std::pow(t, alpha);
  const Scalar Q0 = q0(phi, n, gram);
  const Scalar Q1phi = q1(alpha, phi, n, gram);
  const Scalar Q1psi = q1(alpha, psi, n, gram);
  const Scalar Q2phi = q2(alpha, phi, n, gram);
  const Scalar X = std::abs(cross_term(alpha, phi, psi, n, gram));

  if (alpha < 1.0) {
    const Scalar c = (1.0 - alpha) * (1.0 - alpha);
    for (Scalar eps : kEpsilonGrid) {
      report.records.push_back(make_record("A", X, Q1phi / (4.0 * eps * c) + eps * Q1psi,
                                           {{"alpha", alpha}, {"epsilon", eps}, {"t", t}}));
      report.records.push_back(make_record("AC", X, ta * Q0 / (2.0 * eps * c) + eps * Q1psi,
                                           {{"alpha", alpha}, {"epsilon", eps}, {"t", t}}));
    }
    report.records.push_back(make_record("B", Q2phi, 2.0 * ta / (1.0 - alpha) * Q1phi,
                                         {{"alpha", alpha}, {"t", t}}));
  }
  report.records.push_back(make_record("C", Q1phi, 2.0 * ta * Q0, {{"alpha", alpha}, {"t", t}}));
  report.records.push_back(make_record("D", Q2phi, lemma_d_rhs(alpha, phi, n, gram),
                                       {{"alpha", alpha}, {"t", t}}));
  std::vector<Scalar> q2s;
  for (Scalar mu : kOrderGrid) q2s.push_back(q2(mu, phi, n, gram));
  for (std::size_t i = 0; i < kOrderGrid.size(); ++i) {
    for (std::size_t j = i + 1; j < kOrderGrid.size(); ++j) {
      const Scalar mu = kOrderGrid[i];
      const Scalar nu = kOrderGrid[j];
      report.records.push_back(make_record("E", q2s[j], 2.0 * std::pow(t, 2.0 * (nu - mu)) * q2s[i],
                                           {{"mu", mu}, {"nu", nu}, {"t", t}}));
    }
  }
  report.records.push_back(pointwise_bound_record(alpha, phi.times_t(), n, gram));
  return report;
}

GridFunction gronwall_envelope(const std::function<Scalar(Scalar)>& a_fn,
                               const std::function<Scalar(Scalar)>& b_fn, Scalar beta,
                               std::shared_ptr<const TimeMesh> mesh) {
  if (!(beta > 0.0)) throw DomainError("gronwall_envelope: beta must be positive");
  constexpr Scalar kSlack = 1e-12;
  GridFunction out(mesh, 1);
  Scalar a_prev = -INFINITY;
  Scalar b_prev = -INFINITY;
  for (Index n = 0; n < out.node_count(); ++n) {
    const Scalar t = (*mesh)[n];
    const Scalar a = a_fn(t);
    const Scalar b = b_fn(t);
    if (a < -kSlack || b < -kSlack) {
      std::ostringstream os;
      os << "gronwall_envelope: a and b must be non-negative (t = " << t << ")";
      throw ValidationError(os.str());
    }
    if (a < a_prev - kSlack || b < b_prev - kSlack) {
      std::ostringstream os;
      os << "gronwall_envelope: a and b must be non-decreasing (t = " << t << ")";
      throw ValidationError(os.str());
    }
    a_prev = a;
    b_prev = b;
    out.at(n)(0) = a * mittag_leffler(beta, b * std::pow(t, beta));
  }
  return out;
}

AprioriDiagnostics diagnose_apriori(const SolutionTrace& trace, const GridFunction& f_X) {
  AprioriDiagnostics d;
  const Matrix& M = trace.mass();
  const TimeMesh& mesh = trace.mesh();
  const Index N = mesh.intervals();
  const Scalar alpha = trace.alpha;

  const Vector q1u = q1_cumulative(alpha, trace.u, &M);
  const Vector q0u = q0_cumulative(trace.u, &M);
  const Vector q0f = q0_cumulative(f_X, &M);

  auto update = [](Ratio& r, Scalar num, Scalar den) {
    if (num == 0.0 && den == 0.0) return;
    const Scalar v = den == 0.0 ? INFINITY : num / den;
    if (!r.applicable || v > r.value) r.value = v;
    r.applicable = true;
  };
  const Scalar u0sq = trace.u0_norm * trace.u0_norm;
  const Scalar Msq = trace.M_bound * trace.M_bound;
  const Scalar base = trace.l2_norm(0);
  for (Index n = 1; n <= N; ++n) {
    const Scalar t = mesh[n];
    const Scalar ta = std::pow(t, alpha);
    update(d.q1_ratio, q1u(n), ta * q0f(n));
    update(d.q0_ratio, q0u(n), q0f(n));
    const Scalar l2 = trace.l2_norm(n);
    const Scalar h1 = trace.h1_seminorm(n);
    update(d.pointwise_ratio, l2 * l2 + ta * h1 * h1, u0sq + Msq * std::pow(t, 2.0 * trace.eta));
    d.decay_excess = std::max(d.decay_excess, l2 - base);
  }
  if (N == 0) d.decay_excess = 0.0;

  const Scalar T = mesh.horizon();
  d.holder_delta = T / 8.0;
  for (int k = 0; k < 6; ++k) {
    const Scalar h = (T - d.holder_delta) / std::pow(2.0, k);
    std::vector<std::pair<Scalar, Scalar>> pairs{{d.holder_delta, d.holder_delta + h}};
    if (k > 0) pairs.emplace_back(T - h, T);
    for (const auto& [t1, t2] : pairs) {
      const Vector diff = trace.u.evaluate(t2) - trace.u.evaluate(t1);
      d.holder.push_back({t1, t2, std::sqrt(std::max(0.0, diff.dot(M * diff))) / std::sqrt(t2 - t1)});
    }
  }
  return d;
}

namespace {

using Complex = std::complex<Scalar>;

// (e^w - 1) / w and (e^w (w - 1) + 1) / w^2 with series near 0.
Complex e1(Complex w) {
  if (std::abs(w) < 0.5) {
    Complex term = 1.0;
    Complex sum = 0.0;
    for (int k = 0; k < 24; ++k) {
      sum += term / static_cast<Scalar>(k + 1);
      term *= w / static_cast<Scalar>(k + 1);
    }
    return sum;
  }
  return (std::exp(w) - 1.0) / w;
}

Complex e2(Complex w) {
  if (std::abs(w) < 0.5) {
    Complex term = 1.0;
    Complex sum = 0.0;
    for (int k = 0; k < 24; ++k) {
      sum += term / static_cast<Scalar>(k + 2);
      term *= w / static_cast<Scalar>(k + 1);
    }
    return sum;
  }
  return (std::exp(w) * (w - 1.0) + 1.0) / (w * w);
}

// ||phi_hat(iy)||^2 for the piecewise-linear phi extended by zero.
Scalar spectrum_sq(const GridFunction& phi, Scalar y, const Matrix* gram) {
  const TimeMesh& mesh = phi.mesh();
  const Index m = phi.dim();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(m);
  for (Index k = 1; k <= mesh.intervals(); ++k) {
    const Scalar a = mesh[k - 1];
    const Scalar h = mesh.step(k);
    const Complex w(0.0, -y * h);
    const Complex phase = std::exp(Complex(0.0, -y * a));
    const Vector slope = (phi.at(k) - phi.at(k - 1)) / h;
    acc += phase * (h * e1(w) * phi.at(k - 1).cast<Complex>() +
                    h * h * e2(w) * slope.cast<Complex>());
  }
  if (gram) return (acc.adjoint() * gram->cast<Complex>() * acc)(0, 0).real();
  return acc.squaredNorm();
}

}  // namespace

PlancherelResult plancherel_crosscheck(const GridFunction& phi, Scalar mu, const Matrix* gram) {
  if (!(mu >= 0.0 && mu < 1.0)) throw DomainError("plancherel_crosscheck: mu must lie in [0, 1)");
  const TimeMesh& mesh = phi.mesh();
  const Index N = mesh.intervals();
  const Scalar T = mesh.horizon();
  PlancherelResult r;
  r.lhs = q1(mu, phi, N, gram);

  const Scalar y_max = 1e3 * static_cast<Scalar>(N) / T;
  const Scalar y0 = 1e-3 / T;
  const Scalar y_lin = 2.0 * std::numbers::pi / T;
  const Scalar y_cut = std::min(y_max, 400.0 * y_lin);
  const auto& rule = quad::gauss_legendre(8);
  CompensatedSum acc;
  auto f = [&](Scalar y) { return std::pow(y, -mu) * spectrum_sq(phi, y, gram); };

  // (0, y0]: spectrum is flat there.
  acc.add(spectrum_sq(phi, 0.0, gram) * std::pow(y0, 1.0 - mu) / (1.0 - mu));
  // [y0, y_lin]: logarithmic panels.
  const int log_panels = 48;
  const Scalar l0 = std::log(y0);
  const Scalar dl = (std::log(std::min(y_lin, y_max)) - l0) / log_panels;
  for (int p = 0; p < log_panels; ++p) {
    for (Index q = 0; q < rule.size(); ++q) {
      const Scalar y = std::exp(l0 + dl * (p + rule.nodes(q)));
      acc.add(rule.weights(q) * dl * y * f(y));
    }
  }
  // [y_lin, y_cut]: panels a quarter period wide.
  if (y_cut > y_lin) {
    const Scalar width = 0.25 * y_lin;
    const int panels = static_cast<int>(std::ceil((y_cut - y_lin) / width));
    const Scalar dy = (y_cut - y_lin) / panels;
    for (int p = 0; p < panels; ++p) {
      for (Index q = 0; q < rule.size(); ++q) {
        acc.add(rule.weights(q) * dy * f(y_lin + dy * (p + rule.nodes(q))));
      }
    }
  }
  // [y_cut, y_max]: averaged asymptotic tail (||phi(0)||^2 + ||phi(T)||^2) / y^2.
  if (y_max > y_cut) {
    const Scalar ends = ip(gram, phi.at(0), phi.at(0)) + ip(gram, phi.at(N), phi.at(N));
    acc.add(ends * (std::pow(y_cut, -1.0 - mu) - std::pow(y_max, -1.0 - mu)) / (1.0 + mu));
  }
  r.rhs = std::cos(std::numbers::pi * mu / 2.0) / std::numbers::pi * acc.value();
  const Scalar scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
  r.reldiff = scale == 0.0 ? 0.0 : std::abs(r.lhs - r.rhs) / scale;
  return r;
}

}  // namespace fracvolt
