#pragma once

#include <cmath>

#include "sintheta/generators.hpp"
#include "sintheta/linalg.hpp"

namespace sintheta::testing {

// Reference instance used across the suites: A = diag(2, 0.5) perturbed to
// [[2, 0.1], [0, 0.5]] at split rank 1. Expected values frozen from the
// closed-form eigensolve of At At^T (quadratic formula), which
// two_by_two_oracle reproduces at runtime.
inline constexpr double kRefSigma1Tilde = 2.00266441923832577;
inline constexpr double kRefSigma2Tilde = 0.49933478140103494;
inline constexpr double kRefSinTheta = 0.01329434668874598;
inline constexpr double kRefSinSq = 1.7673965388057119e-4;
inline constexpr double kRefSMinusI = 8.8373731898530433e-5;
inline constexpr double kRefFu21 = 0.26591043327225862;
inline constexpr double kRefWedinDelta = 1.50266441923832577;

struct TwoByTwoOracle {
  double sigma1, sigma2;   // singular values
  double sin_theta;        // angle between e1 and the leading left vector
};

/// Independent oracle: eigensolve of M M^T for a 2x2 M via the quadratic
/// formula; the leading-vector angle from the second row of (M M^T - l1 I).
inline TwoByTwoOracle two_by_two_oracle(double a, double b, double c,
                                        double d) {
  const double g11 = a * a + b * b;
  const double g12 = a * c + b * d;
  const double g22 = c * c + d * d;
  const double tr = g11 + g22;
  const double det = g11 * g22 - g12 * g12;
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  const double l1 = 0.5 * (tr + disc);
  const double l2 = 0.5 * (tr - disc);
  TwoByTwoOracle out;
  out.sigma1 = std::sqrt(l1);
  out.sigma2 = std::sqrt(l2 > 0.0 ? l2 : 0.0);
  const double t = g12 / (l1 - g22);  // tan of the rotation angle
  out.sin_theta = t / std::sqrt(1.0 + t * t);
  return out;
}

inline Matrix ref_clean() {
  Matrix a(2, 2);
  a << 2.0, 0.0, 0.0, 0.5;
  return a;
}

inline Matrix ref_perturbed() {
  Matrix a(2, 2);
  a << 2.0, 0.1, 0.0, 0.5;
  return a;
}

inline Matrix ref_noise() { return ref_perturbed() - ref_clean(); }

/// Hand-built factorization (orthogonal blocks supplied by the caller).
inline ConformalSvd make_svd(Index r, Matrix u, Matrix v, Vector sigma) {
  ConformalSvd out;
  out.r = r;
  out.u1 = u.leftCols(r);
  out.u2 = u.rightCols(u.cols() - r);
  out.v1 = v.leftCols(r);
  out.v2 = v.rightCols(v.cols() - r);
  const Index minnm = std::min(u.rows(), v.rows());
  out.sigma1 = sigma.head(r);
  out.sigma2 = sigma.segment(r, minnm - r);
  return out;
}

/// Random planted instance plus Gaussian noise with ||dA|| scaled to
/// noise_fraction * (planted gap).
struct TestInstance {
  PlantedMatrix planted;
  Matrix da;
  Matrix atilde;
};

TestInstance random_instance(Index n, Index m, Index r, TailMode tail,
                             double noise_fraction, std::uint64_t seed);

}  // namespace sintheta::testing
