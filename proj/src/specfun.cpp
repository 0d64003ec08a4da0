#include "sefusion/specfun.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "sefusion/common.hpp"

namespace sefusion::specfun {

void validate(const KummerEvalPolicy& p) {
  if (!(p.series_tolerance > 0.0 && p.series_tolerance <= 1e-8)) {
    throw ConfigError("kummer policy: series_tolerance must lie in (0, 1e-8]");
  }
  if (p.series_term_cap < 200) throw ConfigError("kummer policy: series_term_cap must be >= 200");
  if (!(p.asymptotic_switch_threshold > 0.0)) {
    throw ConfigError("kummer policy: asymptotic_switch_threshold must be positive");
  }
}

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_fn: argument must be positive and finite, got " + std::to_string(x));
  }
  return std::tgamma(x);
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  return std::lgamma(x);
}

namespace {

bool is_nonpositive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

// Ascending series of M(b, 1; x) for x >= 0.
double ascending_series(double b, double x, const KummerEvalPolicy& policy) {
  double sum = 1.0;
  double term = 1.0;
  for (std::size_t n = 0; n < policy.series_term_cap; ++n) {
    const double dn = static_cast<double>(n);
    const double factor = (b + dn) * x / ((dn + 1.0) * (dn + 1.0));
    term *= factor;
    if (term == 0.0) return sum;  // terminating (b a non-positive integer) or x == 0
    sum += term;
    if (!std::isfinite(sum)) break;
    // Past the sign changes the tail is geometric with ratio below `next`.
    const double m = dn + 1.0;
    const double next = std::abs((b + m) * x / ((m + 1.0) * (m + 1.0)));
    if (b + m > 0.0 && next < 1.0 &&
        std::abs(term) * next / (1.0 - next) <= policy.series_tolerance * std::abs(sum)) {
      return sum;
    }
  }
  throw NumericError("kummer_m: ascending series did not converge (b=" + std::to_string(b) +
                     ", x=" + std::to_string(x) + ")");
}

// Large-argument expansion of M(a, 1; -x):
//   x^-a / Gamma(1-a) * sum_s ((a)_s)^2 / (s! x^s)
// plus a term of order e^-x x^(a-1) / Gamma(a), which is only bounded here.
// Returns nullopt when the truncation or the neglected term exceeds tolerance.
std::optional<double> asymptotic(double a, double x, const KummerEvalPolicy& policy) {
  double sum = 1.0;
  double term = 1.0;
  bool converged = false;
  for (std::size_t s = 0; s < policy.asymptotic_term_cap; ++s) {
    const double ds = static_cast<double>(s);
    const double next = term * (a + ds) * (a + ds) / ((ds + 1.0) * x);
    if (next == 0.0) {
      converged = true;
      break;
    }
    if (std::abs(next) > std::abs(term)) break;  // divergence sets in
    sum += next;
    term = next;
    if (std::abs(term) <= policy.series_tolerance * std::abs(sum)) {
      converged = true;
      break;
    }
  }
  if (!converged) return std::nullopt;

  const double g = std::tgamma(1.0 - a);
  const double log_dominant = -a * std::log(x) - std::lgamma(1.0 - a) + std::log(std::abs(sum));
  if (!is_nonpositive_integer(a)) {
    const double log_sub = -x + (a - 1.0) * std::log(x) - std::lgamma(a);
    if (log_sub - log_dominant > std::log(policy.series_tolerance)) return std::nullopt;
  }
  const double value = std::exp(log_dominant);
  if (!std::isfinite(value)) return std::nullopt;
  return (std::signbit(g) != std::signbit(sum)) ? -value : value;
}

}  // namespace

double kummer_m(double a, double z, const KummerEvalPolicy& policy) {
  if (!std::isfinite(a) || !std::isfinite(z)) throw DomainError("kummer_m: non-finite argument");
  if (z > 0.0) throw DomainError("kummer_m: requires z <= 0, got " + std::to_string(z));
  if (a == 0.0 || z == 0.0) return 1.0;

  const double x = -z;
  const double b = 1.0 - a;
  // For positive integer a the transformed series is a polynomial.
  if (!is_nonpositive_integer(b) && x > policy.asymptotic_switch_threshold) {
    if (auto v = asymptotic(a, x, policy)) return *v;
  }
  const double s = ascending_series(b, x, policy);
  const double v = std::exp(-x) * s;
  if (!std::isfinite(v)) {
    throw NumericError("kummer_m: overflow at a=" + std::to_string(a) + ", z=" + std::to_string(z));
  }
  return v;
}

namespace {

double bessel_i_series(int order, double x) {
  const double q = 0.25 * x * x;
  double term = order == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
    sum += term;
    if (term <= 1e-17 * sum) break;
  }
  return sum;
}

double bessel_i_asymptotic(int order, double x) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) * sum;
}

double bessel_i(int order, double x) {
  if (!(x >= 0.0)) throw DomainError("bessel_i: requires x >= 0");
  return x <= 30.0 ? bessel_i_series(order, x) : bessel_i_asymptotic(order, x);
}

}  // namespace

double bessel_i0(double x) { return bessel_i(0, x); }
double bessel_i1(double x) { return bessel_i(1, x); }

}  // namespace sefusion::specfun
