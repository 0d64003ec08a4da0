#pragma once

#include <cstddef>

namespace sefusion::specfun {

struct KummerEvalPolicy {
  std::size_t series_term_cap = 1000;
  double series_tolerance = 1e-16;
  /// |z| above which the large-argument expansion is tried first.
  double asymptotic_switch_threshold = 30.0;
  /// Upper bound on terms taken from the (divergent) asymptotic series.
  std::size_t asymptotic_term_cap = 40;
};

void validate(const KummerEvalPolicy& p);

/// Gamma function for x > 0. Throws DomainError otherwise.
double gamma_fn(double x);
/// log Gamma for x > 0.
double log_gamma(double x);

/// Kummer's confluent hypergeometric function M(a, 1; z) for z <= 0.
///
/// Evaluated through the Kummer transformation M(a,1;z) = e^z M(1-a,1;-z),
/// whose ascending series has positive terms once n > a - 1. For |z| past
/// the switch threshold the large-argument expansion is used when its
/// truncation error meets the tolerance; otherwise the series is summed.
/// Throws NumericError when neither route converges.
double kummer_m(double a, double z, const KummerEvalPolicy& policy = {});

/// Modified Bessel functions of the first kind, orders 0 and 1, x >= 0.
double bessel_i0(double x);
double bessel_i1(double x);

}  // namespace sefusion::specfun
