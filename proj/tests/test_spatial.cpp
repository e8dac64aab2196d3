#include <gtest/gtest.h>

#include <cmath>

#include "fracvolt/spatial.hpp"

using namespace fracvolt;

namespace {

CoefficientSet coeffs(const char* kappa, const char* F, const char* G, const char* a,
                      const char* b) {
  return CoefficientSet(parse_coeff_expr(kappa), parse_coeff_expr(F), parse_coeff_expr(G),
                        parse_coeff_expr(a), parse_coeff_expr(b));
}

Scalar max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Basis, DirichletAtEndpoints) {
  for (BasisKind kind : {BasisKind::Sine, BasisKind::P1}) {
    const BasisSpec b{kind, 7};
    for (Index i = 0; i < 7; ++i) {
      EXPECT_LE(std::abs(b.value(i, 0.0)), 1e-12);
      EXPECT_LE(std::abs(b.value(i, 1.0)), 1e-12);
    }
  }
}

TEST(Basis, KindNames) {
  EXPECT_EQ(basis_kind_from_string(to_string(BasisKind::P1)), BasisKind::P1);
  EXPECT_EQ(basis_kind_from_string(to_string(BasisKind::Sine)), BasisKind::Sine);
}

TEST(Assembly, SineMassIsIdentity) {
  const KernelAssembly ka({BasisKind::Sine, 12}, CoefficientSet{});
  EXPECT_LE(max_abs(ka.mass() - Matrix::Identity(12, 12)), 1e-12);
}

TEST(Assembly, P1MassIsSpd) {
  const KernelAssembly ka({BasisKind::P1, 9}, CoefficientSet{});
  EXPECT_LE(max_abs(ka.mass() - ka.mass().transpose()), 1e-15);
  EXPECT_EQ(Eigen::LLT<Matrix>(ka.mass()).info(), Eigen::Success);
}

TEST(Assembly, SineLaplacianEigenvalues) {
  const KernelAssembly ka({BasisKind::Sine, 5}, coeffs("1", "0", "0", "2.5", "0"));
  const Matrix K = assemble_K1(ka, 0.3);
  for (Index i = 0; i < 5; ++i) {
    for (Index j = 0; j < 5; ++j) {
      const Scalar k = (i + 1) * M_PI;
      EXPECT_NEAR(K(i, j), i == j ? k * k + 2.5 : 0.0, 1e-10);
    }
  }
}

TEST(Assembly, P1StiffnessTwoNodes) {
  const KernelAssembly ka({BasisKind::P1, 2}, CoefficientSet{});
  Matrix ref(2, 2);
  ref << 6, -3, -3, 6;
  EXPECT_LE(max_abs(assemble_K1(ka, 0.0) - ref), 1e-12);
}

TEST(Assembly, SymmetricPositiveWithoutAdvection) {
  const KernelAssembly ka({BasisKind::P1, 10}, coeffs("1 + x * x", "0", "0", "0", "0"));
  const Matrix K = assemble_K1(ka, 0.5);
  EXPECT_LE(max_abs(K - K.transpose()), 1e-12);
  EXPECT_EQ(Eigen::LLT<Matrix>(K).info(), Eigen::Success);
}

TEST(Assembly, K1PrimeVanishesForTimeConstantData) {
  const KernelAssembly ka({BasisKind::Sine, 4}, coeffs("1", "x", "0", "2", "0"));
  EXPECT_TRUE(ka.K1_prime_vanishes());
  EXPECT_EQ(max_abs(assemble_K1prime(ka, 0.7)), 0.0);
}

TEST(Assembly, K1PrimeIdentityForLinearReaction) {
  const KernelAssembly ka({BasisKind::Sine, 4}, coeffs("1", "0", "0", "t", "0"));
  EXPECT_LE(max_abs(assemble_K1prime(ka, 0.2) - Matrix::Identity(4, 4)), 1e-12);
}

TEST(Assembly, K1PrimeMatchesFiniteDifference) {
  const KernelAssembly ka({BasisKind::Sine, 2}, coeffs("1", "t", "0", "0", "0"));
  const Scalar t = 0.4, h = 1e-4;
  const Matrix fd = (assemble_K1(ka, t + h) - assemble_K1(ka, t - h)) / (2 * h);
  EXPECT_LE(max_abs(assemble_K1prime(ka, t) - fd), 1e-8);
  // -<phi_j, phi_i'> for the unit field
  const Matrix A = assemble_K1prime(ka, t);
  EXPECT_NEAR(A(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(A(0, 1), -A(1, 0), 1e-12);
  EXPECT_GT(std::abs(A(0, 1)), 0.1);
}

TEST(Assembly, K2Cases) {
  EXPECT_EQ(max_abs(assemble_K2(KernelAssembly({BasisKind::Sine, 3}, CoefficientSet{}), 0.5)),
            0.0);
  const KernelAssembly kb({BasisKind::Sine, 3}, coeffs("1", "0", "0", "0", "1"));
  EXPECT_LE(max_abs(assemble_K2(kb, 0.5) - Matrix::Identity(3, 3)), 1e-12);

  const KernelAssembly kg({BasisKind::Sine, 2}, coeffs("1", "0", "1", "0", "0"));
  const Matrix K2 = assemble_K2(kg, 0.1);
  EXPECT_NEAR(K2(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(K2(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(K2(0, 1), -K2(1, 0), 1e-12);
  // -<phi_j, phi_i'> with i = 0, j = 1: -2 pi int_0^1 sin(2 pi x) cos(pi x) dx = -8/3
  EXPECT_NEAR(K2(0, 1), -8.0 / 3.0, 1e-10);
}

TEST(Assembly, DecompositionOverTime) {
  const KernelAssembly ka({BasisKind::Sine, 3},
                          coeffs("1 + x", "x * t * t", "0", "1 + t + t * x", "0"));
  const Scalar t = 0.8;
  Matrix integral = Matrix::Zero(3, 3);
  const int n = 200;
  for (int k = 0; k < n; ++k) {
    // midpoint rule is exact for the quadratic time dependence up to h^2 terms
    const Scalar s0 = t * k / n, s1 = t * (k + 1) / n;
    integral += (s1 - s0) / 6.0 *
                (assemble_K1prime(ka, s0) + 4.0 * assemble_K1prime(ka, 0.5 * (s0 + s1)) +
                 assemble_K1prime(ka, s1));
  }
  EXPECT_LE(max_abs(assemble_K1(ka, t) - assemble_K1(ka, 0.0) - integral), 1e-8);
}

TEST(Assembly, QuadratureConverged) {
  const auto c = coeffs("1 + 0.5 * sin(x)", "exp(x) * t", "cos(x)", "x * t", "exp(-x)");
  for (BasisKind kind : {BasisKind::Sine, BasisKind::P1}) {
    const KernelAssembly lo({kind, 6}, c);
    const KernelAssembly hi({kind, 6}, c, 2 * lo.points_per_cell());
    for (Scalar t : {0.0, 0.7}) {
      EXPECT_LE(max_abs(lo.K1(t) - hi.K1(t)), 1e-10);
      EXPECT_LE(max_abs(lo.K1_prime(t) - hi.K1_prime(t)), 1e-10);
      EXPECT_LE(max_abs(lo.K2(t) - hi.K2(t)), 1e-10);
    }
  }
}

TEST(Coefficients, DerivativeDefectIsSecondOrder) {
  const CoefficientSet c = coeffs("1", "x * t * t * t", "0", "t * t * x", "0");
  const Scalar d1 = c.derivative_defect(1.0, 1e-2);
  const Scalar d2 = c.derivative_defect(1.0, 5e-3);
  EXPECT_GT(d1, 0.0);
  EXPECT_NEAR(d1 / d2, 4.0, 0.1);
}

TEST(ProjectData, ConstantTraceWithoutSource) {
  auto mesh = std::make_shared<const TimeMesh>(1.0, 10, 2.0);
  const KernelAssembly ka({BasisKind::Sine, 3}, CoefficientSet{});
  SourceSpec src;
  src.u0 = parse_coeff_expr("1.4142135623730951 * sin(3.141592653589793 * x)");
  const GridFunction f = project_data(ka, src, mesh);
  for (Index n = 0; n <= 10; ++n) {
    EXPECT_NEAR(f.at(n)(0), 1.0, 1e-12);
    EXPECT_NEAR(f.at(n)(1), 0.0, 1e-12);
    EXPECT_NEAR(f.at(n)(2), 0.0, 1e-12);
  }
}

TEST(ProjectData, IntegratesSource) {
  auto mesh = std::make_shared<const TimeMesh>(1.0, 16, 1.5);
  const KernelAssembly ka({BasisKind::Sine, 2}, CoefficientSet{});
  SourceSpec src;
  src.g = parse_coeff_expr("1.4142135623730951 * sin(3.141592653589793 * x)");
  src.M_bound = 1.0;
  const GridFunction f = project_data(ka, src, mesh);
  for (Index n = 0; n <= 16; ++n) {
    EXPECT_NEAR(f.at(n)(0), (*mesh)[n], 1e-12);
    EXPECT_NEAR(f.at(n)(1), 0.0, 1e-12);
  }
}

TEST(ProjectData, SingularSourceWithEta) {
  // g = t^{-1/2} phi_1, int_0^t = 2 sqrt(t)
  auto mesh = std::make_shared<const TimeMesh>(1.0, 8, 2.0);
  const KernelAssembly ka({BasisKind::Sine, 1}, CoefficientSet{});
  SourceSpec src;
  src.g = parse_coeff_expr("pow(t, -0.5) * 1.4142135623730951 * sin(3.141592653589793 * x)");
  src.eta = 0.5;
  src.M_bound = 1.0;
  const GridFunction f = project_data(ka, src, mesh);
  for (Index n = 1; n <= 8; ++n) EXPECT_NEAR(f.at(n)(0), 2.0 * std::sqrt((*mesh)[n]), 1e-8);
}

TEST(ProjectData, BoundViolationWarns) {
  auto mesh = std::make_shared<const TimeMesh>(1.0, 8);
  const KernelAssembly ka({BasisKind::Sine, 1}, CoefficientSet{});
  SourceSpec src;
  src.g = parse_coeff_expr("5 * sin(3.141592653589793 * x)");
  src.M_bound = 1.0;
  std::vector<std::string> warnings;
  project_data(ka, src, mesh, &warnings);
  EXPECT_FALSE(warnings.empty());
  EXPECT_FALSE(g_bound_violations(ka, src, *mesh).empty());
}

TEST(Rescale, Factors) {
  Problem p;
  p.horizon = 2.0;
  EXPECT_DOUBLE_EQ(rescale_time(p).factor, 1.0);
  p.coeffs = coeffs("4", "0", "0", "0", "0");
  EXPECT_DOUBLE_EQ(rescale_time(p).factor, 1.0);
  p.alpha = 1.0;
  p.coeffs = coeffs("0.25", "0", "0", "0", "0");
  const RescaledProblem r = rescale_time(p);
  EXPECT_NEAR(r.factor, 0.25, 1e-15);
  EXPECT_NEAR(r.problem.horizon, 0.5, 1e-15);
  EXPECT_GE(sampled_kappa_min(r.problem.coeffs.kappa), 1.0 - 1e-12);
}

TEST(Rescale, RejectsNonPositiveKappa) {
  Problem p;
  p.coeffs = coeffs("x - 0.5", "0", "0", "0", "0");
  EXPECT_THROW(rescale_time(p), ValidationError);
}
