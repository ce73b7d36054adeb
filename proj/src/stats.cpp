#include "mtperf/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mtperf/error.hpp"

namespace mtperf {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(errc::sample_too_small, "mean of empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

namespace {

double centered_moment_sum(const std::vector<double>& xs, double mu, int k) {
  double sum = 0.0;
  for (double x : xs) sum += std::pow(x - mu, k);
  return sum;
}

}  // namespace

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) {
    throw Error(errc::sample_too_small,
                "variance needs at least 2 values, got " +
                    std::to_string(xs.size()));
  }
  double mu = mean(xs);
  return centered_moment_sum(xs, mu, 2) / static_cast<double>(xs.size() - 1);
}

double population_variance(const std::vector<double>& xs) {
  if (xs.empty()) {
    throw Error(errc::sample_too_small, "variance of empty sample");
  }
  double mu = mean(xs);
  return centered_moment_sum(xs, mu, 2) / static_cast<double>(xs.size());
}

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series for the regularized lower incomplete gamma P(a, x).
double gamma_lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for the regularized upper incomplete gamma
// Q(a, x), valid for x >= a + 1.
double gamma_upper_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the regularized incomplete beta.
double beta_cf(double a, double b, double x) {
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_gamma_upper(double a, double x) {
  if (a <= 0.0 || x < 0.0) {
    throw Error(errc::out_of_range,
                "regularized_gamma_upper needs a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_lower_series(a, x);
  return gamma_upper_cf(a, x);
}

double regularized_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0) {
    throw Error(errc::out_of_range,
                "regularized_beta needs a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi2_sf(double x, double df) {
  if (df <= 0.0) throw Error(errc::out_of_range, "chi2_sf needs df > 0");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_upper(0.5 * df, 0.5 * x);
}

double t_sf(double t, double df) {
  if (df <= 0.0) throw Error(errc::out_of_range, "t_sf needs df > 0");
  if (t < 0.0) return 1.0 - t_sf(-t, df);
  if (t == 0.0) return 0.5;
  double x = df / (df + t * t);
  return 0.5 * regularized_beta(0.5 * df, 0.5, x);
}

PearsonResult pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw Error(errc::out_of_range, "pearson arguments differ in length");
  }
  std::size_t n = x.size();
  if (n < 3) {
    throw Error(errc::sample_too_small,
                "pearson needs at least 3 pairs, got " + std::to_string(n));
  }
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(errc::correlation_undefined,
                "pearson is undefined for a constant sequence");
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::max(-1.0, std::min(1.0, r));
  double p;
  if (std::fabs(r) >= 1.0) {
    p = 0.0;
  } else {
    double df = static_cast<double>(n - 2);
    double t = r * std::sqrt(df / (1.0 - r * r));
    p = 2.0 * t_sf(std::fabs(t), df);
    p = std::min(1.0, p);
  }
  return PearsonResult{r, p, n};
}

}  // namespace mtperf
