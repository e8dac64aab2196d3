#include "fracvolt/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace fracvolt {
namespace {

constexpr Scalar kLanczosG = 7.0;
constexpr std::array<Scalar, 9> kLanczosCoeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Lanczos partial-fraction series A_g(x) for Gamma(x + 1).
Scalar lanczos_series(Scalar x) {
  Scalar a = kLanczosCoeff[0];
  for (std::size_t i = 1; i < kLanczosCoeff.size(); ++i) {
    a += kLanczosCoeff[i] / (x + static_cast<Scalar>(i));
  }
  return a;
}

}  // namespace

Scalar gamma_fn(Scalar x) {
  if (x < 0.5) {
    const Scalar s = std::sin(std::numbers::pi * x);
    if (s == 0.0) {
      throw DomainError("gamma_fn: pole at non-positive integer");
    }
    return std::numbers::pi / (s * gamma_fn(1.0 - x));
  }
  const Scalar xm = x - 1.0;
  const Scalar t = xm + kLanczosG + 0.5;
  // Split the power so that t^(xm+0.5) does not overflow before e^-t.
  const Scalar half = std::pow(t, 0.5 * (xm + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) *
         lanczos_series(xm);
}

Scalar log_gamma(Scalar x) {
  if (!(x > 0.0)) {
    throw DomainError("log_gamma: argument must be positive");
  }
  if (x < 0.5) {
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           log_gamma(1.0 - x);
  }
  const Scalar xm = x - 1.0;
  const Scalar t = xm + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) -
         t + std::log(lanczos_series(xm));
}

}  // namespace fracvolt
