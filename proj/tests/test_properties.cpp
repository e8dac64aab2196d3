// Randomized invariants. Every generator is a seeded mt19937_64, so a
// failure reproduces from the seed printed in the assertion message.
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracvolt/energy.hpp"
#include "fracvolt/spatial.hpp"
#include "fracvolt/suites.hpp"
#include "fracvolt/volterra.hpp"

using namespace fracvolt;

namespace {

constexpr std::uint64_t kSeed = 20240611;

Scalar uniform(std::mt19937_64& rng, Scalar lo, Scalar hi) {
  return std::uniform_real_distribution<Scalar>(lo, hi)(rng);
}

/// Random continuous piecewise-linear scalar function on [0, 1] with 8 knots.
struct RandomPl {
  std::vector<Scalar> knots;
  explicit RandomPl(std::mt19937_64& rng, bool zero_start = false) {
    std::normal_distribution<Scalar> n01;
    for (int i = 0; i <= 8; ++i) knots.push_back(n01(rng));
    if (zero_start) knots[0] = 0.0;
  }
  Scalar operator()(Scalar t) const {
    const Scalar s = std::clamp(t, 0.0, 1.0) * 8.0;
    const int k = std::min(7, static_cast<int>(s));
    return knots[k] + (s - k) * (knots[k + 1] - knots[k]);
  }
};

GridFunction on_mesh(const RandomPl& f, std::shared_ptr<const TimeMesh> mesh) {
  return sample(mesh, 1, [&](Scalar t) { return Vector::Constant(1, f(t)); });
}

Scalar sup(const GridFunction& g) { return g.values().cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Property, SemigroupErrorShrinksWithRefinement) {
  std::mt19937_64 rng(kSeed);
  for (int draw = 0; draw < 20; ++draw) {
    const Scalar mu = uniform(rng, 0.05, 1.0);
    const Scalar nu = uniform(rng, 0.05, 1.0);
    // phi(0) = 0 removes the t^nu term that no piecewise-linear mesh resolves
    const RandomPl f(rng, true);
    std::vector<Scalar> errs;
    for (Index N : {64, 256}) {
      // uniform meshes that contain the knots keep the input exactly piecewise linear
      auto mesh = std::make_shared<const TimeMesh>(1.0, N);
      const GridFunction phi = on_mesh(f, mesh);
      const GridFunction lhs = frac_integral(mu, frac_integral(nu, phi));
      const GridFunction rhs = frac_integral(mu + nu, phi);
      errs.push_back((lhs.values() - rhs.values()).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(errs[1], errs[0] / 2.0 + 1e-14) << "draw " << draw << " mu " << mu << " nu " << nu;
  }
}

TEST(Property, CommutatorExactForConstants) {
  std::mt19937_64 rng(kSeed + 1);
  for (int draw = 0; draw < 20; ++draw) {
    const Scalar mu = uniform(rng, 0.05, 1.0);
    const Scalar c = uniform(rng, -3.0, 3.0);
    auto mesh = std::make_shared<const TimeMesh>(uniform(rng, 0.5, 2.0), 40, uniform(rng, 1.0, 4.0));
    const GridFunction phi = sample(mesh, 1, [&](Scalar) { return Vector::Constant(1, c); });
    const Matrix comm =
        frac_integral(mu, phi).times_t().values() - frac_integral(mu, phi.times_t()).values();
    const Matrix ref = mu * frac_integral(mu + 1.0, phi).values();
    EXPECT_LE((comm - ref).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, ref.cwiseAbs().maxCoeff()))
        << "draw " << draw;
  }
}

TEST(Property, CommutatorWithinQuadratureTolerance) {
  std::mt19937_64 rng(kSeed + 2);
  for (int draw = 0; draw < 10; ++draw) {
    const Scalar mu = uniform(rng, 0.1, 1.0);
    const RandomPl f(rng);
    auto mesh = std::make_shared<const TimeMesh>(1.0, 512);
    const GridFunction phi = on_mesh(f, mesh);
    const Matrix comm =
        frac_integral(mu, phi).times_t().values() - frac_integral(mu, phi.times_t()).values();
    const Matrix ref = mu * frac_integral(mu + 1.0, phi).values();
    EXPECT_LE((comm - ref).cwiseAbs().maxCoeff(), 1e-5) << "draw " << draw;
  }
}

TEST(Property, FracIntegralLinearAndPositive) {
  std::mt19937_64 rng(kSeed + 3);
  for (int draw = 0; draw < 30; ++draw) {
    const Scalar mu = uniform(rng, 0.01, 2.0);
    auto mesh = std::make_shared<const TimeMesh>(uniform(rng, 0.1, 5.0), 30, uniform(rng, 1.0, 6.0));
    const GridFunction p = random_piecewise_linear(rng, mesh, 2);
    const GridFunction q = random_piecewise_linear(rng, mesh, 2);
    const Scalar a = uniform(rng, -2, 2), b = uniform(rng, -2, 2);
    const Matrix lhs = frac_integral(mu, GridFunction(mesh, a * p.values() + b * q.values())).values();
    const Matrix rhs = a * frac_integral(mu, p).values() + b * frac_integral(mu, q).values();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));

    const GridFunction pos(mesh, p.values().cwiseAbs());
    EXPECT_GE(frac_integral(mu, pos).values().minCoeff(), 0.0) << "draw " << draw;
    for (Index n = 1; n <= 30; ++n) {
      EXPECT_GE(conv_weights(mu, *mesh, n).minCoeff(), 0.0);
    }
  }
}

TEST(Property, MittagLefflerStrictlyDecreasing) {
  std::mt19937_64 rng(kSeed + 4);
  for (int draw = 0; draw < 20; ++draw) {
    const Scalar alpha = uniform(rng, 0.05, 1.0);
    Scalar prev = mittag_leffler(alpha, 0.0);
    for (Scalar x = 0.05; x <= 50.0; x += 0.05) {
      const Scalar v = mittag_leffler(alpha, -x);
      EXPECT_LT(v, prev) << "alpha " << alpha << " x " << x;
      prev = v;
    }
  }
}

TEST(Property, Q1NonNegative) {
  std::mt19937_64 rng(kSeed + 5);
  for (int draw = 0; draw < 200; ++draw) {
    const Scalar mu = uniform(rng, 0.01, 0.99);
    const Index dim = 1 + static_cast<Index>(rng() % 3);
    auto mesh = std::make_shared<const TimeMesh>(uniform(rng, 0.2, 3.0), 32, uniform(rng, 1.0, 3.0));
    const GridFunction phi = random_piecewise_linear(rng, mesh, dim);
    const Matrix gram = random_spd(rng, dim);
    const Vector q = q1_cumulative(mu, phi, &gram);
    EXPECT_GE(q.minCoeff(), -1e-10) << "draw " << draw;
  }
}

TEST(Property, InequalitiesHoldOnRandomInputs) {
  std::mt19937_64 rng(kSeed + 6);
  for (int draw = 0; draw < 30; ++draw) {
    const Scalar alpha = uniform(rng, 0.05, 0.95);
    auto mesh = std::make_shared<const TimeMesh>(uniform(rng, 0.5, 2.0), 32, uniform(rng, 1.0, 2.0));
    const GridFunction phi = random_piecewise_linear(rng, mesh, 2);
    const GridFunction psi = random_piecewise_linear(rng, mesh, 2);
    const EnergyReport r = check_inequalities(phi, psi, alpha, 32);
    for (const auto& rec : r.records) {
      EXPECT_TRUE(rec.pass) << rec.name << " draw " << draw << " margin " << rec.margin;
    }
  }
}

TEST(Property, GronwallEnvelopeMonotone) {
  std::mt19937_64 rng(kSeed + 7);
  for (int draw = 0; draw < 20; ++draw) {
    const Scalar a0 = uniform(rng, 0, 2), a1 = uniform(rng, 0, 2);
    const Scalar b0 = uniform(rng, 0, 1), b1 = uniform(rng, 0, 1);
    const Scalar beta = uniform(rng, 0.3, 1.0);
    auto mesh = std::make_shared<const TimeMesh>(1.0, 50, 2.0);
    const GridFunction e = gronwall_envelope([&](Scalar t) { return a0 + a1 * t; },
                                             [&](Scalar t) { return b0 + b1 * t * t; }, beta, mesh);
    for (Index n = 1; n <= 50; ++n) EXPECT_GE(e.at(n)(0), e.at(n - 1)(0));
  }
}

TEST(Property, MassMatricesSpd) {
  std::mt19937_64 rng(kSeed + 8);
  for (int draw = 0; draw < 10; ++draw) {
    const Index m = 1 + static_cast<Index>(rng() % 40);
    for (BasisKind kind : {BasisKind::Sine, BasisKind::P1}) {
      const KernelAssembly ka({kind, m}, CoefficientSet{});
      EXPECT_EQ(Eigen::LLT<Matrix>(ka.mass()).info(), Eigen::Success);
      EXPECT_EQ(Eigen::LLT<Matrix>(ka.grad_gram()).info(), Eigen::Success);
    }
  }
}

TEST(Property, RandomProblemsSolveWithSmallResidual) {
  std::mt19937_64 rng(kSeed + 9);
  for (int draw = 0; draw < 6; ++draw) {
    const BasisKind kind = draw % 2 ? BasisKind::P1 : BasisKind::Sine;
    const Scalar alpha = uniform(rng, 0.2, 1.0);
    const Problem p = random_problem(rng, alpha, 1.0, kind, 3);
    const SolutionTrace tr =
        solve_direct(p, std::make_shared<const TimeMesh>(1.0, 48, default_grading(alpha)));
    EXPECT_TRUE(tr.u.all_finite());
    EXPECT_LE(tr.residual.maxCoeff(), 1e-9) << "draw " << draw;
    EXPECT_EQ(tr.u.at(0), tr.f.at(0));
  }
}

TEST(Property, RefinementChangeConsistentWithFirstOrder) {
  std::mt19937_64 rng(kSeed + 10);
  const Problem p = random_problem(rng, 0.5, 1.0, BasisKind::Sine, 3);
  std::vector<Scalar> diffs;
  for (Index N : {32, 64, 128, 256}) {
    const auto coarse = std::make_shared<const TimeMesh>(1.0, N, 4.0);
    const auto fine = std::make_shared<const TimeMesh>(1.0, 2 * N, 4.0);
    const SolutionTrace a = solve_direct(p, coarse);
    const SolutionTrace b = solve_direct(p, fine);
    Scalar d = 0.0;
    for (Index n = 0; n <= N; ++n) d = std::max(d, (a.u.at(n) - b.u.at(2 * n)).cwiseAbs().maxCoeff());
    diffs.push_back(d);
  }
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    EXPECT_GE(std::log2(diffs[i - 1] / diffs[i]), 0.9);
  }
}

TEST(Property, DeterministicSuites) {
  const SuiteReport a = verify_lemmas(kSeed, {0.5}, 5, 32, 1);
  const SuiteReport b = verify_lemmas(kSeed, {0.5}, 5, 32, 2);
  Json ja = a.json(), jb = b.json();
  ja.erase("generated_at");
  jb.erase("generated_at");
  EXPECT_EQ(ja.dump(), jb.dump());
}
