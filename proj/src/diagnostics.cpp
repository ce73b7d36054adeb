#include "mtperf/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mtperf/error.hpp"
#include "mtperf/rng.hpp"
#include "mtperf/stats.hpp"

namespace mtperf {

ResidualSeries residuals(const Partition& part, Scheme scheme,
                         const PredictorSpec& spec,
                         const Featurizer& featurizer, std::uint64_t seed) {
  const std::vector<FeatureVector> features = featurizer.all(part.records);
  const std::uint64_t fit_seed = stream_seed(
      seed, "slfit|" + std::string(to_string(scheme)) + "|" + part.key +
                "|full");
  FittedModel model = fit_model(features, spec, fit_seed, part.key);
  ResidualSeries series;
  series.partition_key = part.key;
  series.fitted = predict(model, features);
  series.residuals.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    series.residuals.push_back(features[i].response - series.fitted[i]);
  }
  return series;
}

NormalityTest dagostino_pearson(const std::vector<double>& sample) {
  const std::size_t count = sample.size();
  if (count < 8) {
    throw Error(errc::sample_too_small,
                "normality test needs at least 8 values, got " +
                    std::to_string(count));
  }
  const double n = static_cast<double>(count);
  const double mu = mean(sample);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : sample) {
    double d = x - mu;
    double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) {
    throw Error(errc::degenerate_sample,
                "normality test is undefined for a zero-variance sample");
  }

  // Skewness: normalizing transform of g1 = m3 / m2^(3/2).
  const double g1 = m3 / std::pow(m2, 1.5);
  const double y = g1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) *
                       (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double ya = y / alpha;
  const double z1 = delta * std::log(ya + std::sqrt(ya * ya + 1.0));

  // Kurtosis: normalizing transform of b2 = m4 / m2^2.
  const double b2 = m4 / (m2 * m2);
  const double eb2 = 3.0 * (n - 1.0) / (n + 1.0);
  const double vb2 = 24.0 * n * (n - 2.0) * (n - 3.0) /
                     ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (b2 - eb2) / std::sqrt(vb2);
  const double sqrt_beta1 =
      6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
      std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a =
      6.0 + 8.0 / sqrt_beta1 *
                (2.0 / sqrt_beta1 +
                 std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  if (denom == 0.0) {
    throw Error(errc::degenerate_sample,
                "kurtosis transform is undefined for this sample");
  }
  const double term =
      std::copysign(std::cbrt((1.0 - 2.0 / a) / std::fabs(denom)), denom);
  const double z2 =
      ((1.0 - 2.0 / (9.0 * a)) - term) / std::sqrt(2.0 / (9.0 * a));

  NormalityTest result;
  result.z_skew = z1;
  result.z_kurt = z2;
  result.k2 = z1 * z1 + z2 * z2;
  result.p = chi2_sf(result.k2, 2.0);
  result.n = count;
  result.small_sample = count < 20;
  return result;
}

HeteroscedasticityTest breusch_pagan(const std::vector<double>& resid,
                                     const std::vector<double>& fitted) {
  if (resid.size() != fitted.size()) {
    throw Error(errc::out_of_range,
                "residuals and fitted values disagree in length");
  }
  const std::size_t n = resid.size();
  if (n < 5) {
    throw Error(errc::sample_too_small,
                "heteroscedasticity test needs at least 5 values, got " +
                    std::to_string(n));
  }
  const double f0 = fitted[0];
  bool constant = true;
  for (double f : fitted) {
    if (f != f0) {
      constant = false;
      break;
    }
  }
  if (constant) {
    throw Error(errc::test_undefined,
                "heteroscedasticity is not assessable against constant "
                "fitted values");
  }

  // Auxiliary regression of squared residuals on the fitted values.
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd e2(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = fitted[i];
    e2(static_cast<Eigen::Index>(i)) = resid[i] * resid[i];
  }
  OlsFit aux = fit_ols(X, e2);
  Eigen::Map<const Eigen::Vector2d> beta(aux.beta.data());
  const Eigen::VectorXd pred = X * beta;
  const double mean_e2 = e2.mean();
  double sse = 0.0, sst = 0.0;
  for (Eigen::Index i = 0; i < e2.size(); ++i) {
    sse += (e2(i) - pred(i)) * (e2(i) - pred(i));
    sst += (e2(i) - mean_e2) * (e2(i) - mean_e2);
  }
  HeteroscedasticityTest result;
  if (sst <= 0.0) {
    // Squared residuals are all equal: no variance trend to detect.
    result.lm = 0.0;
    result.p = 1.0;
    return result;
  }
  double r2 = 1.0 - sse / sst;
  r2 = std::max(0.0, std::min(1.0, r2));
  result.lm = static_cast<double>(n) * r2;
  result.p = chi2_sf(result.lm, 1.0);
  return result;
}

DiagnosticsResult diagnose(const ResidualSeries& series) {
  DiagnosticsResult result;
  result.partition_key = series.partition_key;
  result.n = series.residuals.size();
  try {
    NormalityTest norm = dagostino_pearson(series.residuals);
    result.normality_stat = norm.k2;
    result.normality_p = norm.p;
    if (norm.small_sample) {
      result.notes.push_back("normality computed on fewer than 20 values");
    }
  } catch (const Error& e) {
    result.notes.push_back(std::string("normality not assessable: ") +
                           e.what());
  }
  try {
    HeteroscedasticityTest het =
        breusch_pagan(series.residuals, series.fitted);
    result.hetero_stat = het.lm;
    result.hetero_p = het.p;
    result.homoscedastic = het.p >= 0.05;
  } catch (const Error& e) {
    result.notes.push_back(
        std::string("homoscedasticity not assessable: ") + e.what());
  }
  return result;
}

namespace {

// Quantile by linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = q * static_cast<double>(n - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo >= n - 1) return sorted[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BoxplotStats residual_summary_one(const ResidualSeries& series) {
  if (series.residuals.empty()) {
    throw Error(errc::empty_analysis,
                "no residuals for partition '" + series.partition_key + "'");
  }
  std::vector<double> sorted = series.residuals;
  std::sort(sorted.begin(), sorted.end());

  BoxplotStats box;
  box.key = series.partition_key;
  box.n = sorted.size();
  box.mean = mean(sorted);
  box.variance = sorted.size() > 1 ? sample_variance(sorted) : 0.0;
  box.median = quantile_sorted(sorted, 0.5);
  box.q1 = quantile_sorted(sorted, 0.25);
  box.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = box.q3 - box.q1;
  const double lo_fence = box.q1 - 1.5 * iqr;
  const double hi_fence = box.q3 + 1.5 * iqr;
  box.whisker_lo = box.q1;
  box.whisker_hi = box.q3;
  for (double v : sorted) {
    if (v >= lo_fence) {
      box.whisker_lo = v;
      break;
    }
  }
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    if (*it <= hi_fence) {
      box.whisker_hi = *it;
      break;
    }
  }
  for (double v : sorted) {
    if (v < lo_fence || v > hi_fence) box.outliers.push_back(v);
  }
  return box;
}

std::vector<BoxplotStats> residual_summary(
    const std::vector<ResidualSeries>& series) {
  std::vector<BoxplotStats> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(residual_summary_one(s));
  return out;
}

}  // namespace mtperf
