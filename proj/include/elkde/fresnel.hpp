#pragma once

namespace elkde {

struct FresnelResult {
  double s;  // S(x) = integral_0^x sin(pi t^2 / 2) dt
  double c;  // C(x) = integral_0^x cos(pi t^2 / 2) dt
};

/// Fresnel integrals in the pi/2 convention, |error| < 1e-12 over the real
/// line. Power series for |x| <= 1.6, continued fraction for the complex
/// complementary error function beyond.
FresnelResult fresnel(double x);

}  // namespace elkde
