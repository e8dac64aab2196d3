#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracvolt/energy.hpp"
#include "fracvolt/suites.hpp"
#include "fracvolt/volterra.hpp"

using namespace fracvolt;

namespace {

std::shared_ptr<const TimeMesh> mesh_of(Index N, Scalar grading = 1.0, Scalar T = 1.0) {
  return std::make_shared<const TimeMesh>(T, N, grading);
}

template <class F>
GridFunction scalar(std::shared_ptr<const TimeMesh> mesh, F f) {
  return sample(mesh, 1, [&](Scalar t) { return Vector::Constant(1, f(t)); });
}

const InequalityRecord* find(const EnergyReport& r, const std::string& name,
                             const std::map<std::string, Scalar>& params) {
  for (const auto& rec : r.records) {
    if (rec.name != name) continue;
    bool ok = true;
    for (const auto& [k, v] : params) {
      auto it = rec.params.find(k);
      ok = ok && it != rec.params.end() && it->second == v;
    }
    if (ok) return &rec;
  }
  return nullptr;
}

}  // namespace

TEST(Quadratic, ConstantInputValues) {
  auto mesh = mesh_of(16, 2.0);
  const GridFunction one = scalar(mesh, [](Scalar) { return 1.0; });
  EXPECT_NEAR(q1(0.0, one, 16), 1.0, 1e-15);
  EXPECT_NEAR(q0(one, 16), 1.0, 1e-15);
  EXPECT_NEAR(q1(0.5, one, 16), 0.7522527781, 1e-10);
  EXPECT_NEAR(q2(0.5, one, 16), 2.0 / M_PI, 1e-10);
}

TEST(Quadratic, ZeroInput) {
  auto mesh = mesh_of(8);
  GridFunction z(mesh, 3);
  EXPECT_EQ(q1(0.5, z, 8), 0.0);
  EXPECT_EQ(q2(0.5, z, 8), 0.0);
}

TEST(Quadratic, OrderZeroSharesPath) {
  std::mt19937_64 rng(1);
  auto mesh = mesh_of(32, 2.0);
  const GridFunction phi = random_piecewise_linear(rng, mesh, 3);
  EXPECT_EQ(q2(0.0, phi, 32), q1(0.0, phi, 32));
}

TEST(Quadratic, CumulativeMatchesPointwise) {
  std::mt19937_64 rng(2);
  auto mesh = mesh_of(20, 1.5);
  const GridFunction phi = random_piecewise_linear(rng, mesh, 2);
  const Vector c1 = q1_cumulative(0.3, phi);
  const Vector c2 = q2_cumulative(0.3, phi);
  for (Index n : {1, 7, 20}) {
    EXPECT_NEAR(c1(n), q1(0.3, phi, n), 1e-13);
    EXPECT_NEAR(c2(n), q2(0.3, phi, n), 1e-13);
  }
}

TEST(Quadratic, PiecewiseConstantMatchesDerivative) {
  // Q1 of t -> 1 on [0, 1] through the slope path.
  auto mesh = mesh_of(10, 2.0);
  const Matrix slopes = Matrix::Ones(1, 10);
  EXPECT_NEAR(q1_piecewise_constant(0.5, slopes, *mesh, 10), 0.7522527781, 1e-10);
}

TEST(BOperator, ConstantPsi) {
  std::mt19937_64 rng(4);
  auto mesh = mesh_of(24, 2.0);
  const GridFunction phi = random_piecewise_linear(rng, mesh, 2);
  const GridFunction b = b_op_apply(0.4, [](Scalar) { return 3.0; }, [](Scalar) { return 0.0; }, phi);
  const GridFunction ref = frac_integral(0.4, phi);
  EXPECT_LE((b.values() - 3.0 * ref.values()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(b.at(0).norm(), 0.0);
}

TEST(BOperator, LinearPsiOrderOne) {
  auto mesh = mesh_of(10);
  const GridFunction one = scalar(mesh, [](Scalar) { return 1.0; });
  const GridFunction b = b_op_apply(1.0, [](Scalar t) { return t; }, [](Scalar) { return 1.0; }, one);
  for (Index n = 0; n <= 10; ++n) EXPECT_NEAR(b.at(n)(0), 0.5 * std::pow((*mesh)[n], 2), 1e-15);
}

TEST(BOperator, Linearity) {
  std::mt19937_64 rng(6);
  auto mesh = mesh_of(30, 2.0);
  const GridFunction p1 = random_piecewise_linear(rng, mesh, 2);
  const GridFunction p2 = random_piecewise_linear(rng, mesh, 2);
  const auto psi = [](Scalar t) { return 1.0 + t * t; };
  const auto dpsi = [](Scalar t) { return 2.0 * t; };
  const GridFunction mix(mesh, 2.0 * p1.values() - 0.5 * p2.values());
  const Matrix lhs = b_op_apply(0.6, psi, dpsi, mix).values();
  const Matrix rhs = 2.0 * b_op_apply(0.6, psi, dpsi, p1).values() -
                     0.5 * b_op_apply(0.6, psi, dpsi, p2).values();
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BOperator, CommutatorIdentity) {
  const Scalar mu = 0.5;
  auto mesh = mesh_of(1024, 2.0);
  const GridFunction phi = scalar(mesh, [](Scalar t) { return std::cos(3.0 * t) + t; });
  const auto psi = [](Scalar t) { return 1.0 + t * t; };
  const auto dpsi = [](Scalar t) { return 2.0 * t; };
  const GridFunction lhs = b_op_apply(mu, psi, dpsi, phi).times_t();
  const GridFunction Imphi = frac_integral(mu, phi);
  const GridFunction inner = frac_integral(mu, phi.times_t());
  const GridFunction extra = frac_integral(mu + 1.0, phi);
  GridFunction dI(mesh, 1);
  for (Index n = 0; n <= 1024; ++n) dI.at(n) = dpsi((*mesh)[n]) * Imphi.at(n);
  const GridFunction tail = frac_integral(1.0, dI).times_t();
  Scalar err = 0.0;
  for (Index n = 0; n <= 1024; ++n) {
    const Scalar t = (*mesh)[n];
    const Scalar rhs = psi(t) * (inner.at(n)(0) + mu * extra.at(n)(0)) - tail.at(n)(0);
    err = std::max(err, std::abs(lhs.at(n)(0) - rhs));
  }
  EXPECT_LE(err, 1e-5);
}

TEST(Inequalities, EqualInputsSatisfyA) {
  std::mt19937_64 rng(9);
  auto mesh = mesh_of(64, 2.0);
  const GridFunction phi = random_piecewise_linear(rng, mesh, 2);
  const EnergyReport r = check_inequalities(phi, phi, 0.5, 64);
  const InequalityRecord* a = find(r, "A", {{"epsilon", 1.0}});
  ASSERT_NE(a, nullptr);
  EXPECT_NEAR(a->lhs, q1(0.5, phi, 64), 1e-12);
  EXPECT_TRUE(a->pass);
  EXPECT_TRUE(r.all_pass());
}

TEST(Inequalities, LemmaEOnConstant) {
  auto mesh = mesh_of(32, 2.0);
  const GridFunction one = scalar(mesh, [](Scalar) { return 1.0; });
  const EnergyReport r = check_inequalities(one, one, 0.5, 32);
  const InequalityRecord* e = find(r, "E", {{"mu", 0.0}, {"nu", 0.5}});
  ASSERT_NE(e, nullptr);
  EXPECT_NEAR(e->lhs, 2.0 / M_PI, 1e-10);
  EXPECT_NEAR(e->rhs, 2.0, 1e-12);
  EXPECT_NEAR(e->margin, 2.0 - 2.0 / M_PI, 1e-10);
  EXPECT_TRUE(e->pass);
}

TEST(Inequalities, PointwiseBoundEqualityAtOrderOne) {
  auto mesh = mesh_of(16, 1.5);
  const GridFunction phi = scalar(mesh, [](Scalar t) { return t; });
  for (Index n : {4, 16}) {
    const InequalityRecord r = pointwise_bound_record(1.0, phi, n);
    const Scalar t = (*mesh)[n];
    EXPECT_NEAR(r.lhs, t * t, 1e-14);
    EXPECT_NEAR(r.rhs - r.lhs, 0.0, 1e-12);
  }
}

TEST(Inequalities, OrderOneSkipsEpsilonRecords) {
  auto mesh = mesh_of(16);
  const GridFunction one = scalar(mesh, [](Scalar) { return 1.0; });
  const EnergyReport r = check_inequalities(one, one, 1.0, 16);
  EXPECT_EQ(find(r, "A", {}), nullptr);
  EXPECT_EQ(find(r, "B", {}), nullptr);
  EXPECT_NE(find(r, "C", {}), nullptr);
}

TEST(Inequalities, RecordPassRule) {
  EXPECT_TRUE(make_record("x", 1.0, 1.0).pass);
  EXPECT_TRUE(make_record("x", 1.0 + 5e-11, 1.0).pass);
  EXPECT_FALSE(make_record("x", 1.0 + 1e-9, 1.0).pass);
}

TEST(Gronwall, Cases) {
  auto mesh = mesh_of(10);
  const GridFunction flat = gronwall_envelope([](Scalar t) { return 1.0 + t; }, [](Scalar) { return 0.0; }, 0.5, mesh);
  for (Index n = 0; n <= 10; ++n) EXPECT_DOUBLE_EQ(flat.at(n)(0), 1.0 + (*mesh)[n]);
  const GridFunction e = gronwall_envelope([](Scalar) { return 1.0; }, [](Scalar) { return 1.0; }, 1.0, mesh);
  for (Index n = 0; n <= 10; ++n) EXPECT_NEAR(e.at(n)(0), std::exp((*mesh)[n]), 1e-13);
  const GridFunction h = gronwall_envelope([](Scalar) { return 1.0; }, [](Scalar) { return 1.0; }, 0.5, mesh);
  EXPECT_NEAR(h.at(10)(0), 5.00898008076, 1e-10);
  for (Index n = 1; n <= 10; ++n) EXPECT_GE(h.at(n)(0), h.at(n - 1)(0));
}

TEST(Gronwall, RejectsDecreasingData) {
  auto mesh = mesh_of(10);
  EXPECT_THROW(gronwall_envelope([](Scalar t) { return 1.0 - t; }, [](Scalar) { return 1.0; }, 0.5, mesh),
               ValidationError);
  EXPECT_THROW(gronwall_envelope([](Scalar) { return -1.0; }, [](Scalar) { return 1.0; }, 0.5, mesh),
               ValidationError);
}

TEST(Diagnostics, ZeroDataNotApplicable) {
  Problem p;
  p.basis = {BasisKind::Sine, 2};
  const SolutionTrace tr = solve_direct(p, mesh_of(32, 2.0));
  const AprioriDiagnostics d = diagnose_apriori(tr, tr.f);
  EXPECT_FALSE(d.q1_ratio.applicable);
  EXPECT_FALSE(d.q0_ratio.applicable);
  EXPECT_FALSE(d.pointwise_ratio.applicable);
}

TEST(Diagnostics, SubdiffusionDecay) {
  Problem p;
  p.alpha = 0.5;
  p.source.u0 = parse_coeff_expr("1.4142135623730951 * sin(3.141592653589793 * x)");
  const SolutionTrace tr = solve_direct(p, mesh_of(128, 4.0));
  const AprioriDiagnostics d = diagnose_apriori(tr, tr.f);
  EXPECT_LE(d.decay_excess, 1e-10);
  ASSERT_TRUE(d.pointwise_ratio.applicable);
  EXPECT_LE(d.pointwise_ratio.value, 1.0 + 1e-10);
  EXPECT_DOUBLE_EQ(d.holder_delta, 1.0 / 8.0);
  EXPECT_FALSE(d.holder.empty());
  for (const auto& h : d.holder) EXPECT_GE(h.t1, d.holder_delta);
}

TEST(Plancherel, ZeroInput) {
  GridFunction z(mesh_of(8), 1);
  const PlancherelResult r = plancherel_crosscheck(z, 0.5);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
}

TEST(Plancherel, ConstantInput) {
  auto mesh = mesh_of(32);
  const GridFunction one = scalar(mesh, [](Scalar) { return 1.0; });
  const PlancherelResult r = plancherel_crosscheck(one, 0.5);
  EXPECT_NEAR(r.lhs, 0.7522527781, 1e-10);
  EXPECT_LE(r.reldiff, kPlancherelTol);
}

TEST(Plancherel, SmallOrderApproachesClassical) {
  std::mt19937_64 rng(12);
  auto mesh = mesh_of(32);
  const GridFunction phi = random_piecewise_linear(rng, mesh, 2);
  const PlancherelResult r = plancherel_crosscheck(phi, 1e-3);
  EXPECT_NEAR(r.rhs / q0(phi, 32), 1.0, 1e-2);
  EXPECT_LE(r.reldiff, kPlancherelTol);
}
