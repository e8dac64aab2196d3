#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracvolt/oracle.hpp"
#include "fracvolt/special.hpp"
#include "fracvolt/suites.hpp"

using namespace fracvolt;

namespace {

std::shared_ptr<const TimeMesh> mesh_of(Index N, Scalar grading, Scalar T = 1.0) {
  return std::make_shared<const TimeMesh>(T, N, grading);
}

Problem single_mode(Scalar alpha) {
  Problem p;
  p.alpha = alpha;
  p.source.u0 = parse_coeff_expr("1.4142135623730951 * sin(3.141592653589793 * x)");
  return p;
}

Scalar sup_error_vs_separable(const SolutionTrace& tr, Scalar alpha) {
  Scalar e = 0.0;
  for (Index n = 0; n < tr.u.node_count(); ++n) {
    e = std::max(e, std::abs(tr.u.at(n)(0) -
                             oracle::separable_exact(alpha, M_PI * M_PI, tr.mesh()[n])));
  }
  return e;
}

}  // namespace

TEST(Separable, KnownValues) {
  EXPECT_EQ(oracle::separable_exact(0.5, 3.0, 0.0), 1.0);
  EXPECT_NEAR(oracle::separable_exact(1.0, M_PI * M_PI, 0.1), 0.3727078389, 1e-10);
  const Scalar x = M_PI * M_PI;
  EXPECT_NEAR(oracle::separable_exact(0.5, x, 1.0) / oracle::ml_half_erfc(x), 1.0, 1e-9);
}

TEST(Separable, DualPathOnInterval) {
  for (Scalar x = 0.0; x <= 20.0; x += 0.137) {
    const Scalar a = oracle::separable_exact(0.5, std::max(x, 1e-300), 1.0);
    const Scalar b = oracle::ml_half_erfc(x);
    EXPECT_NEAR(a / b, 1.0, 1e-9) << "x = " << x;
  }
}

TEST(Separable, AgreesWithLibraryEvaluation) {
  for (Scalar alpha : {0.2, 0.45, 0.8, 1.0}) {
    for (Scalar z : {0.01, 0.9, 3.0, 7.5, 15.0, 40.0}) {
      const Scalar a = oracle::separable_exact(alpha, z, 1.0);
      EXPECT_NEAR(a / mittag_leffler(alpha, -z), 1.0, 1e-8) << alpha << " " << z;
    }
  }
}

TEST(Separable, Errors) {
  EXPECT_THROW(oracle::separable_exact(0.5, 0.0, 1.0), DomainError);
  EXPECT_THROW(oracle::separable_exact(1.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(oracle::separable_exact(0.5, 51.0, 1.0), RangeError);
}

TEST(Manufactured, BetaOneForcing) {
  const Scalar alpha = 0.4;
  const auto c = oracle::manufactured(alpha, 1.0, 1, oracle::ManufacturedConstants{});
  for (Scalar t : {0.1, 0.5, 1.0}) {
    for (Scalar x : {0.2, 0.5}) {
      const Scalar ref = (1.0 + M_PI * M_PI * std::pow(t, alpha) / std::tgamma(1.0 + alpha)) *
                         std::sqrt(2.0) * std::sin(M_PI * x);
      EXPECT_NEAR(c.g(x, t), ref, 1e-12);
      EXPECT_NEAR(c.u(x, t), t * std::sqrt(2.0) * std::sin(M_PI * x), 1e-15);
    }
  }
}

TEST(Manufactured, BetaTwoVanishesAtZero) {
  oracle::ManufacturedConstants k;
  k.a0 = 0.5;
  k.b0 = 0.3;
  k.F0 = 0.2;
  const auto c = oracle::manufactured(0.6, 2.0, 2, k);
  for (Scalar x : {0.1, 0.4, 0.9}) {
    EXPECT_EQ(c.g(x, 0.0), 0.0);
    EXPECT_NEAR(c.g(x, 1e-8), 0.0, 1e-6);
  }
}

TEST(Manufactured, StoredCaseSatisfiesIntegratedEquation) {
  oracle::ManufacturedConstants k;
  k.F0 = 0.7;
  EXPECT_LE(oracle::manufactured(0.5, 1.0, 1, k).integrated_defect(1.0), 1e-10);
  k = {};
  k.kappa0 = 1.3;
  k.G0 = 0.4;
  k.a0 = 0.2;
  k.b0 = 0.6;
  for (Scalar alpha : {0.3, 0.7}) {
    EXPECT_LE(oracle::manufactured(alpha, 1.5, 2, k).integrated_defect(1.0), 1e-10);
  }
}

TEST(Manufactured, Errors) {
  EXPECT_THROW(oracle::manufactured(0.5, 0.5, 1, oracle::ManufacturedConstants{}), DomainError);
  EXPECT_THROW(oracle::manufactured(0.5, 1.0, 0, oracle::ManufacturedConstants{}), DomainError);
  const CoefficientSet varying(parse_coeff_expr("1 + x"), {}, {}, {}, {});
  EXPECT_THROW(oracle::manufactured(0.5, 1.0, 1, varying), ValidationError);
}

TEST(Manufactured, SolverRecoversCase) {
  oracle::ManufacturedConstants k;
  k.a0 = 0.5;
  k.F0 = 0.3;
  const auto c = oracle::manufactured(0.5, 1.0, 1, k);
  auto mesh = mesh_of(256, 4.0);
  const SolutionTrace tr = solve_direct(c.problem(3, 1.0), mesh);
  Scalar err = 0.0;
  for (Index n = 0; n <= 256; ++n) {
    err = std::max(err, (tr.u.at(n) - c.exact_coefficients(3, (*mesh)[n])).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(err, 1e-4);
}

TEST(Refined, ZeroDataIsZero) {
  Problem p;
  p.basis = {BasisKind::P1, 3};
  const SolutionTrace r = oracle::refined_reference(p, mesh_of(32, 2.0));
  EXPECT_EQ(r.u.node_count(), 33);
  EXPECT_EQ(r.u.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Refined, BetterThanBase) {
  for (Scalar alpha : {0.5, 0.8}) {
    auto mesh = mesh_of(64, default_grading(alpha));
    const Problem p = single_mode(alpha);
    const Scalar base = sup_error_vs_separable(solve_direct(p, mesh), alpha);
    const Scalar ref = sup_error_vs_separable(oracle::refined_reference(p, mesh), alpha);
    EXPECT_GE(base / ref, 2.0) << "alpha = " << alpha;
  }
}

TEST(Refined, DifferenceShrinksUnderRefinement) {
  std::mt19937_64 rng(17);
  const Problem p = random_problem(rng, 0.5, 1.0, BasisKind::Sine, 4);
  Scalar prev = INFINITY;
  for (Index N : {64, 128, 256}) {
    auto mesh = mesh_of(N, 4.0);
    const Scalar d = (solve_direct(p, mesh).u.values() -
                      oracle::refined_reference(p, mesh).u.values())
                         .cwiseAbs()
                         .maxCoeff();
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Refined, RejectsLargeMesh) {
  EXPECT_THROW(oracle::refined_reference(single_mode(0.5), mesh_of(513, 1.0)), DomainError);
}

TEST(TanhSinh, SingularIntegrand) {
  EXPECT_NEAR(oracle::tanh_sinh([](Scalar s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0), 2.0,
              1e-12);
  EXPECT_NEAR(oracle::tanh_sinh([](Scalar s) { return std::pow(s, -0.7); }, 0.0, 1.0), 1.0 / 0.3,
              1e-10);
}
