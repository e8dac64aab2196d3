#include "fracvolt/spatial.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracvolt/quadrature.hpp"

namespace fracvolt {

namespace {
constexpr Scalar kPi = std::numbers::pi;
constexpr Scalar kSqrt2 = std::numbers::sqrt2;
constexpr int kTimePoints = 16;
}  // namespace

Scalar BasisSpec::value(Index i, Scalar x) const {
  if (kind == BasisKind::Sine) {
    return kSqrt2 * std::sin(static_cast<Scalar>(i + 1) * kPi * x);
  }
  const Scalar h = 1.0 / static_cast<Scalar>(dim + 1);
  const Scalar xi = static_cast<Scalar>(i + 1) * h;
  return std::max(0.0, 1.0 - std::abs(x - xi) / h);
}

Scalar BasisSpec::derivative(Index i, Scalar x) const {
  if (kind == BasisKind::Sine) {
    const Scalar k = static_cast<Scalar>(i + 1) * kPi;
    return kSqrt2 * k * std::cos(k * x);
  }
  const Scalar h = 1.0 / static_cast<Scalar>(dim + 1);
  const Scalar xi = static_cast<Scalar>(i + 1) * h;
  if (x > xi - h && x < xi) return 1.0 / h;
  if (x > xi && x < xi + h) return -1.0 / h;
  return 0.0;
}

std::string to_string(BasisKind kind) { return kind == BasisKind::Sine ? "sine" : "p1"; }

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "sine" || name == "SINE") return BasisKind::Sine;
  if (name == "p1" || name == "P1") return BasisKind::P1;
  throw ValidationError("unknown basis kind '" + name + "' (expected sine or p1)");
}

CoefficientSet::CoefficientSet(Expression kappa_, Expression F_, Expression G_,
                               Expression a_, Expression b_)
    : kappa(std::move(kappa_)),
      F(std::move(F_)),
      G(std::move(G_)),
      a(std::move(a_)),
      b(std::move(b_)),
      F_prime(F.d_dt()),
      a_prime(a.d_dt()) {}

bool CoefficientSet::polynomial_in_t() const {
  return F.is_polynomial_in_t() && a.is_polynomial_in_t();
}

Scalar CoefficientSet::derivative_defect(Scalar horizon, Scalar h) const {
  Scalar worst = 0.0;
  for (int ix = 1; ix <= 9; ++ix) {
    const Scalar x = 0.1 * ix;
    for (int it = 0; it <= 8; ++it) {
      const Scalar t = h + (horizon - 2.0 * h) * it / 8.0;
      const Scalar dF = (F(x, t + h) - F(x, t - h)) / (2.0 * h);
      const Scalar da = (a(x, t + h) - a(x, t - h)) / (2.0 * h);
      worst = std::max(worst, std::abs(dF - F_prime(x, t)));
      worst = std::max(worst, std::abs(da - a_prime(x, t)));
    }
  }
  return worst;
}

KernelAssembly::KernelAssembly(BasisSpec basis, CoefficientSet coeffs, int points_per_cell)
    : basis_(basis), coeffs_(std::move(coeffs)) {
  if (basis_.dim < 1) throw ValidationError("basis dimension must be >= 1");
  if (coeffs_.kappa.depends_on_t()) throw ValidationError("kappa must not depend on t");
  q_ = points_per_cell > 0 ? points_per_cell : (basis_.kind == BasisKind::Sine ? 12 : 8);

  const Index m = basis_.dim;
  const Index cells = m + 1;
  const auto& rule = quad::gauss_legendre(q_);
  const Index P = cells * q_;
  x_.resize(P);
  w_.resize(P);
  const Scalar h = 1.0 / static_cast<Scalar>(cells);
  for (Index c = 0; c < cells; ++c) {
    for (int p = 0; p < q_; ++p) {
      x_(c * q_ + p) = (static_cast<Scalar>(c) + rule.nodes(p)) * h;
      w_(c * q_ + p) = rule.weights(p) * h;
    }
  }
  phi_.resize(P, m);
  dphi_.resize(P, m);
  for (Index p = 0; p < P; ++p) {
    for (Index i = 0; i < m; ++i) {
      phi_(p, i) = basis_.value(i, x_(p));
      dphi_(p, i) = basis_.derivative(i, x_(p));
    }
  }

  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(P);
  mass_ = form(nullptr, nullptr, &ones);
  grad_gram_ = form(&ones, nullptr, nullptr);
  const Eigen::ArrayXd kappa = coeffs_.kappa.evaluate(x_, 0.0);
  stiffness_ = form(&kappa, nullptr, nullptr);
  mass_llt_.compute(mass_);

  k1_const_ = !coeffs_.F.depends_on_t() && !coeffs_.a.depends_on_t();
  k1p_zero_ = coeffs_.F_prime.is_zero() && coeffs_.a_prime.is_zero();
  k2_zero_ = coeffs_.b.is_zero() && coeffs_.G.is_zero();
  k2_const_ = !coeffs_.b.depends_on_t() && !coeffs_.G.depends_on_t();
  if (k1_const_) {
    Matrix k1 = K1(0.0);
    k1_cached_ = std::move(k1);
  }
  if (k2_const_ && !k2_zero_) {
    Matrix k2 = K2(0.0);
    k2_cached_ = std::move(k2);
  }
}

// sum_p w_p [c_dd phi_j' phi_i' + c_vd phi_j phi_i' + c_vv phi_j phi_i], entry (i, j).
Matrix KernelAssembly::form(const Eigen::ArrayXd* c_dd, const Eigen::ArrayXd* c_vd,
                            const Eigen::ArrayXd* c_vv) const {
  const Index m = basis_.dim;
  Matrix out = Matrix::Zero(m, m);
  if (basis_.kind == BasisKind::Sine) {
    if (c_dd) out.noalias() += dphi_.transpose() * ((w_ * *c_dd).matrix().asDiagonal() * dphi_);
    if (c_vd) out.noalias() += dphi_.transpose() * ((w_ * *c_vd).matrix().asDiagonal() * phi_);
    if (c_vv) out.noalias() += phi_.transpose() * ((w_ * *c_vv).matrix().asDiagonal() * phi_);
    return out;
  }
  // P1: on cell c only hats c-1 and c (0-based) are non-zero.
  for (Index c = 0; c <= m; ++c) {
    const Index lo = std::max<Index>(c - 1, 0);
    const Index hi = std::min<Index>(c, m - 1);
    for (int q = 0; q < q_; ++q) {
      const Index p = c * q_ + q;
      const Scalar w = w_(p);
      for (Index i = lo; i <= hi; ++i) {
        for (Index j = lo; j <= hi; ++j) {
          Scalar v = 0.0;
          if (c_dd) v += (*c_dd)(p)*dphi_(p, j) * dphi_(p, i);
          if (c_vd) v += (*c_vd)(p)*phi_(p, j) * dphi_(p, i);
          if (c_vv) v += (*c_vv)(p)*phi_(p, j) * phi_(p, i);
          out(i, j) += w * v;
        }
      }
    }
  }
  return out;
}

Matrix KernelAssembly::K1(Scalar t) const {
  if (k1_const_ && k1_cached_.size() > 0) return k1_cached_;
  Matrix out = stiffness_;
  if (!coeffs_.F.is_zero()) {
    const Eigen::ArrayXd negF = -coeffs_.F.evaluate(x_, t);
    out += form(nullptr, &negF, nullptr);
  }
  if (!coeffs_.a.is_zero()) {
    const Eigen::ArrayXd a = coeffs_.a.evaluate(x_, t);
    out += form(nullptr, nullptr, &a);
  }
  return out;
}

Matrix KernelAssembly::K1_prime(Scalar t) const {
  const Index m = basis_.dim;
  if (k1p_zero_) return Matrix::Zero(m, m);
  Eigen::ArrayXd negFp;
  Eigen::ArrayXd ap;
  if (!coeffs_.F_prime.is_zero()) negFp = -coeffs_.F_prime.evaluate(x_, t);
  if (!coeffs_.a_prime.is_zero()) ap = coeffs_.a_prime.evaluate(x_, t);
  return form(nullptr, negFp.size() ? &negFp : nullptr, ap.size() ? &ap : nullptr);
}

Matrix KernelAssembly::K1_prime_combination(const std::vector<Scalar>& times,
                                            const std::vector<Scalar>& weights) const {
  const Index m = basis_.dim;
  if (k1p_zero_) return Matrix::Zero(m, m);
  const Index P = x_.size();
  const bool has_F = !coeffs_.F_prime.is_zero();
  const bool has_a = !coeffs_.a_prime.is_zero();
  Eigen::ArrayXd negFp = Eigen::ArrayXd::Zero(P);
  Eigen::ArrayXd ap = Eigen::ArrayXd::Zero(P);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (has_F) negFp -= weights[k] * coeffs_.F_prime.evaluate(x_, times[k]);
    if (has_a) ap += weights[k] * coeffs_.a_prime.evaluate(x_, times[k]);
  }
  return form(nullptr, has_F ? &negFp : nullptr, has_a ? &ap : nullptr);
}

Matrix KernelAssembly::K2(Scalar t) const {
  const Index m = basis_.dim;
  if (k2_zero_) return Matrix::Zero(m, m);
  if (k2_const_ && k2_cached_.size() > 0) return k2_cached_;
  Eigen::ArrayXd negG;
  Eigen::ArrayXd b;
  if (!coeffs_.G.is_zero()) negG = -coeffs_.G.evaluate(x_, t);
  if (!coeffs_.b.is_zero()) b = coeffs_.b.evaluate(x_, t);
  return form(nullptr, negG.size() ? &negG : nullptr, b.size() ? &b : nullptr);
}

Vector KernelAssembly::load(const Expression& f, Scalar t) const {
  if (f.is_zero()) return Vector::Zero(basis_.dim);
  const Eigen::ArrayXd v = f.evaluate(x_, t) * w_;
  return phi_.transpose() * v.matrix();
}

Vector KernelAssembly::project(const Expression& f, Scalar t) const {
  if (f.is_zero()) return Vector::Zero(basis_.dim);
  return mass_llt_.solve(load(f, t));
}

Vector KernelAssembly::solve_mass(const Vector& rhs) const { return mass_llt_.solve(rhs); }

Scalar KernelAssembly::l2_norm(const Expression& f, Scalar t) const {
  if (f.is_zero()) return 0.0;
  const Eigen::ArrayXd v = f.evaluate(x_, t);
  return std::sqrt((w_ * v * v).sum());
}

Matrix assemble_K1(const KernelAssembly& ka, Scalar t) { return ka.K1(t); }
Matrix assemble_K1prime(const KernelAssembly& ka, Scalar t) { return ka.K1_prime(t); }
Matrix assemble_K2(const KernelAssembly& ka, Scalar t) { return ka.K2(t); }

std::vector<Index> g_bound_violations(const KernelAssembly& ka, const SourceSpec& source,
                                      const TimeMesh& mesh) {
  std::vector<Index> bad;
  if (source.g.is_zero()) return bad;
  for (Index n = 1; n < mesh.intervals(); ++n) {
    const Scalar t = mesh[n];
    const Scalar bound = source.M_bound * std::pow(t, source.eta - 1.0);
    const Scalar norm = ka.l2_norm(source.g, t);
    if (!(norm <= bound * (1.0 + 1e-9) + 1e-14)) bad.push_back(n);
  }
  return bad;
}

GridFunction project_data(const KernelAssembly& ka, const SourceSpec& source,
                          std::shared_ptr<const TimeMesh> mesh,
                          std::vector<std::string>* warnings) {
  if (!(source.eta > 0.0)) throw ValidationError("eta must be positive");
  const Index m = ka.dim();
  GridFunction f(mesh, m);
  const Vector c0 = ka.project(source.u0, 0.0);
  f.at(0) = c0;
  if (source.g.is_zero()) {
    for (Index n = 1; n < f.node_count(); ++n) f.at(n) = c0;
    return f;
  }
  const auto& rule = quad::gauss_legendre(kTimePoints);
  const Scalar inv_eta = 1.0 / source.eta;
  Vector acc = Vector::Zero(m);
  for (Index n = 1; n < f.node_count(); ++n) {
    const Scalar t0 = (*mesh)[n - 1];
    const Scalar h = mesh->step(n);
    Vector cell = Vector::Zero(m);
    for (Index p = 0; p < rule.size(); ++p) {
      Scalar s;
      Scalar w;
      if (n == 1) {
        // s = h sigma^{1/eta} absorbs the s^{eta-1} endpoint behaviour.
        const Scalar sigma = rule.nodes(p);
        s = h * std::pow(sigma, inv_eta);
        w = rule.weights(p) * h * inv_eta * std::pow(sigma, inv_eta - 1.0);
      } else {
        s = t0 + h * rule.nodes(p);
        w = rule.weights(p) * h;
      }
      cell += w * ka.load(source.g, s);
    }
    acc += cell;
    f.at(n) = c0 + ka.solve_mass(acc);
  }
  if (warnings) {
    const auto bad = g_bound_violations(ka, source, *mesh);
    if (!bad.empty()) {
      std::ostringstream os;
      os << "g exceeds M t^(eta-1) at " << bad.size() << " interior node(s), first at t = "
         << (*mesh)[bad.front()];
      warnings->push_back(os.str());
    }
  }
  return f;
}

Scalar sampled_kappa_min(const Expression& kappa) {
  if (kappa.depends_on_t()) throw ValidationError("kappa must not depend on t");
  constexpr int kSamples = 4000;
  Eigen::ArrayXd xs = Eigen::ArrayXd::LinSpaced(kSamples + 1, 0.0, 1.0);
  return kappa.evaluate(xs, 0.0).minCoeff();
}

RescaledProblem rescale_time(const Problem& problem) {
  const Scalar kmin = sampled_kappa_min(problem.coeffs.kappa);
  if (!(kmin > 0.0)) {
    std::ostringstream os;
    os << "kappa must be positive on [0, 1]; sampled infimum is " << kmin;
    throw ValidationError(os.str());
  }
  RescaledProblem out{problem, 1.0};
  if (kmin >= 1.0) return out;

  const Scalar alpha = problem.alpha;
  const Scalar c = std::pow(kmin, 1.0 / alpha);
  const Scalar ca = std::pow(c, -alpha);
  const Scalar inv_c = 1.0 / c;
  const auto& in = problem.coeffs;
  out.factor = c;
  out.problem.horizon = problem.horizon * c;
  out.problem.coeffs = CoefficientSet(in.kappa.rescaled(ca, 1.0), in.F.rescaled(ca, inv_c),
                                      in.G.rescaled(inv_c, inv_c), in.a.rescaled(ca, inv_c),
                                      in.b.rescaled(inv_c, inv_c));
  out.problem.source.g = problem.source.g.rescaled(inv_c, inv_c);
  out.problem.source.M_bound = problem.source.M_bound * std::pow(c, -problem.source.eta);
  return out;
}

}  // namespace fracvolt
