#include "fracvolt/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <tuple>

#include "fracvolt/special.hpp"

namespace fracvolt::quad {
namespace {

Rule make_gauss_legendre(int q) {
  Rule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    // Newton iteration on P_q from the Chebyshev-like initial guess.
    Scalar x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    Scalar dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1.0;
      Scalar p1 = x;
      for (int k = 2; k <= q; ++k) {
        const Scalar p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const Scalar pq = (q == 1) ? x : p1;
      const Scalar pqm1 = (q == 1) ? 1.0 : p0;
      dp = q * (x * pq - pqm1) / (x * x - 1.0);
      const Scalar dx = pq / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    Scalar p0 = 1.0;
    Scalar p1 = x;
    for (int k = 2; k <= q; ++k) {
      const Scalar p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const Scalar pq = (q == 1) ? x : p1;
    const Scalar pqm1 = (q == 1) ? 1.0 : p0;
    dp = q * (x * pq - pqm1) / (x * x - 1.0);
    const Scalar w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] to [0, 1], ascending order.
    r.nodes(q - 1 - i) = 0.5 * (x + 1.0);
    r.weights(q - 1 - i) = 0.5 * w;
  }
  return r;
}

Rule make_gauss_jacobi(int q, Scalar a, Scalar b) {
  // Jacobi matrix for weight (1-x)^a (1+x)^b on [-1, 1].
  Matrix J = Matrix::Zero(q, q);
  for (int n = 0; n < q; ++n) {
    const Scalar s = 2.0 * n + a + b;
    if (n == 0) {
      J(0, 0) = (b - a) / (a + b + 2.0);
    } else {
      J(n, n) = (b * b - a * a) / (s * (s + 2.0));
    }
    if (n + 1 < q) {
      const Scalar k = n + 1.0;
      const Scalar sk = 2.0 * k + a + b;
      Scalar ratio = 0.0;
      if (n == 0) {
        // (k + a + b) cancels against (sk - 1) at k = 1.
        ratio = 4.0 * (1.0 + a) * (1.0 + b) / (sk * sk * (sk + 1.0));
      } else {
        ratio = 4.0 * k * (k + a) * (k + b) * (k + a + b) /
                (sk * sk * (sk + 1.0) * (sk - 1.0));
      }
      const Scalar off = std::sqrt(ratio);
      J(n, n + 1) = off;
      J(n + 1, n) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(J);
  const Scalar mu0 = std::exp((a + b + 1.0) * std::log(2.0) + log_gamma(a + 1.0) +
                              log_gamma(b + 1.0) - log_gamma(a + b + 2.0));
  Rule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  // Map x in [-1, 1] to y = (x + 1)/2: (1-x)^a (1+x)^b dx = 2^{a+b+1} (1-y)^a y^b dy.
  const Scalar scale = std::exp(-(a + b + 1.0) * std::log(2.0));
  for (int i = 0; i < q; ++i) {
    const Scalar v0 = eig.eigenvectors()(0, i);
    r.nodes(i) = 0.5 * (eig.eigenvalues()(i) + 1.0);
    r.weights(i) = mu0 * v0 * v0 * scale;
  }
  return r;
}

// GK15 abscissae and weights on [-1, 1] (non-negative half).
constexpr Scalar kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.000000000000000000000000000000000};
constexpr Scalar kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr Scalar kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

struct Gk15Result {
  Scalar kronrod;
  Scalar error;
};

Gk15Result gk15(const std::function<Scalar(Scalar)>& f, Scalar lo, Scalar hi) {
  const Scalar c = 0.5 * (lo + hi);
  const Scalar h = 0.5 * (hi - lo);
  const Scalar fc = f(c);
  Scalar rk = fc * kWgk[7];
  Scalar rg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const Scalar dx = h * kXgk[j];
    const Scalar fsum = f(c - dx) + f(c + dx);
    rk += kWgk[j] * fsum;
    if (j % 2 == 1) {
      rg += kWg[j / 2] * fsum;
    }
  }
  return {rk * h, std::abs((rk - rg) * h)};
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const Rule& gauss_legendre(int q) {
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(cache_mutex());
  auto& slot = cache[q];
  if (!slot) {
    slot = std::make_unique<Rule>(make_gauss_legendre(q));
  }
  return *slot;
}

const Rule& gauss_jacobi(int q, Scalar a, Scalar b) {
  if (!(a > -1.0) || !(b > -1.0) || q < 1) {
    throw DomainError("gauss_jacobi: exponents must exceed -1");
  }
  static std::map<std::tuple<int, Scalar, Scalar>, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(cache_mutex());
  auto& slot = cache[{q, a, b}];
  if (!slot) {
    slot = std::make_unique<Rule>(make_gauss_jacobi(q, a, b));
  }
  return *slot;
}

Scalar adaptive_gk15(const std::function<Scalar(Scalar)>& f, Scalar lo,
                     Scalar hi, Scalar rel_tol, Scalar abs_tol, int max_intervals) {
  struct Piece {
    Scalar lo, hi, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  std::priority_queue<Piece> heap;
  const auto whole = gk15(f, lo, hi);
  heap.push({lo, hi, whole.kronrod, whole.error});
  Scalar value = whole.kronrod;
  Scalar error = whole.error;
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) &&
         count < max_intervals) {
    const Piece worst = heap.top();
    const Scalar mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;
    heap.pop();
    const auto left = gk15(f, worst.lo, mid);
    const auto right = gk15(f, mid, worst.hi);
    heap.push({worst.lo, mid, left.kronrod, left.error});
    heap.push({mid, worst.hi, right.kronrod, right.error});
    value += left.kronrod + right.kronrod - worst.value;
    error += left.error + right.error - worst.error;
    ++count;
  }
  // Re-sum the pieces to drop the drift of the running updates.
  CompensatedSum total;
  while (!heap.empty()) {
    total.add(heap.top().value);
    heap.pop();
  }
  return total.value();
}

}  // namespace fracvolt::quad
