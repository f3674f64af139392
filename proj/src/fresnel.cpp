#include "elkde/fresnel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace elkde {

/*
 * Small arguments use the alternating power series
 *
 *   C(x) = sum_k (-1)^k (pi/2)^(2k)   x^(4k+1) / ((2k)!   (4k+1))
 *   S(x) = sum_k (-1)^k (pi/2)^(2k+1) x^(4k+3) / ((2k+1)! (4k+3))
 *
 * which at the 1.6 switch point loses at most a couple of digits to
 * cancellation. Beyond that,
 *
 *   C(x) + i S(x) = (1+i)/2 * erf(z),   z = sqrt(pi)/2 (1-i) x,
 *
 * with erf(z) = 1 - exp(-z^2) f(z) / sqrt(pi) and f evaluated by the
 * continued fraction
 *
 *   f(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + 2/(z + ...)))))
 *
 * via the modified Lentz algorithm. Note exp(-z^2) = exp(i pi x^2 / 2) has
 * unit modulus, so nothing overflows.
 */

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxSeriesTerms = 64;
constexpr int kMaxLentzIterations = 500;

FresnelResult fresnel_series(double x) {
  const double w = 0.5 * kPi * x * x;  // pi/2 x^2
  double c_term = x;            // (pi/2)^0 x^1 / (0! * 1)
  double c_sum = c_term;
  double s_term = w * x / 3.0;  // (pi/2)^1 x^3 / (1! * 3)
  double s_sum = s_term;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const double kk = static_cast<double>(k);
    c_term *= -w * w * (4.0 * kk + 1.0) /
              ((2.0 * kk + 1.0) * (2.0 * kk + 2.0) * (4.0 * kk + 5.0));
    c_sum += c_term;
    s_term *= -w * w * (4.0 * kk + 3.0) /
              ((2.0 * kk + 2.0) * (2.0 * kk + 3.0) * (4.0 * kk + 7.0));
    s_sum += s_term;
    if (std::abs(c_term) < 1e-17 * std::abs(c_sum) &&
        std::abs(s_term) < 1e-17 * std::abs(s_sum)) {
      break;
    }
  }
  return {s_sum, c_sum};
}

FresnelResult fresnel_continued_fraction(double x) {
  using Complex = std::complex<double>;
  const Complex z = 0.5 * std::sqrt(kPi) * x * Complex(1.0, -1.0);

  // Modified Lentz for f(z); partial numerators a_1 = 1, a_j = (j-1)/2.
  const double tiny = 1e-300;
  Complex f = tiny;
  Complex c = f;
  Complex d = 0.0;
  for (int j = 1; j <= kMaxLentzIterations; ++j) {
    const double a = (j == 1) ? 1.0 : 0.5 * (j - 1);
    d = z + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = z + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const Complex delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-15) {
      const double theta = 0.5 * kPi * x * x;
      const Complex exp_mz2(std::cos(theta), std::sin(theta));  // exp(-z^2)
      const Complex erf = 1.0 - exp_mz2 * f / std::sqrt(kPi);
      const Complex result = 0.5 * Complex(1.0, 1.0) * erf;
      return {result.imag(), result.real()};
    }
  }
  throw std::runtime_error("fresnel: continued fraction did not converge");
}

}  // namespace

FresnelResult fresnel(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("fresnel: argument must be finite");
  }
  const double ax = std::abs(x);
  FresnelResult r = (ax <= 1.6) ? fresnel_series(ax) : fresnel_continued_fraction(ax);
  if (x < 0.0) {
    r.s = -r.s;
    r.c = -r.c;
  }
  return r;
}

}  // namespace elkde
