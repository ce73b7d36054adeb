#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtperf/featurize.hpp"
#include "mtperf/records.hpp"
#include "mtperf/regress.hpp"

namespace mtperf {

// Residuals of a model fitted on the full partition (no held-out folds:
// one assessment per partition).
struct ResidualSeries {
  std::string partition_key;
  std::vector<double> residuals;  // observed - predicted
  std::vector<double> fitted;
};

ResidualSeries residuals(const Partition& part, Scheme scheme,
                         const PredictorSpec& spec,
                         const Featurizer& featurizer, std::uint64_t seed);

// Omnibus normality statistic combining the skewness and kurtosis normal
// approximations; K^2 is chi-squared with 2 df under normality. Requires
// n >= 8; n < 20 sets the small-sample flag. A zero-variance sample is
// rejected as degenerate.
struct NormalityTest {
  double k2 = 0.0;
  double p = 1.0;
  double z_skew = 0.0;
  double z_kurt = 0.0;
  std::size_t n = 0;
  bool small_sample = false;
};
NormalityTest dagostino_pearson(const std::vector<double>& sample);

// Lagrange-multiplier heteroscedasticity test: squared residuals regressed
// on fitted values, LM = n R^2, p from chi-squared with 1 df. Requires
// n >= 5; constant fitted values make the test undefined.
struct HeteroscedasticityTest {
  double lm = 0.0;
  double p = 1.0;
};
HeteroscedasticityTest breusch_pagan(const std::vector<double>& residuals,
                                     const std::vector<double>& fitted);

// One partition's assessment. Tests that cannot run (sample too small,
// constant fitted values) leave their fields empty and explain why in notes.
struct DiagnosticsResult {
  std::string partition_key;
  std::size_t n = 0;
  std::optional<double> normality_stat;
  std::optional<double> normality_p;
  std::optional<double> hetero_stat;
  std::optional<double> hetero_p;
  std::optional<bool> homoscedastic;  // hetero_p >= 0.05
  std::vector<std::string> notes;
};
DiagnosticsResult diagnose(const ResidualSeries& series);

// Five-number summary with 1.5 IQR whiskers (quantiles by linear
// interpolation of order statistics) plus mean and variance.
struct BoxplotStats {
  std::string key;
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // n-1 denominator; 0 for a single value
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;
};
BoxplotStats residual_summary_one(const ResidualSeries& series);
std::vector<BoxplotStats> residual_summary(
    const std::vector<ResidualSeries>& series);

}  // namespace mtperf
