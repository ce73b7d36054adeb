#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtperf/featurize.hpp"
#include "mtperf/records.hpp"

namespace mtperf {

// The five predictor families. The first four are linear in their
// coefficients; size_law is beta0 * (1/s_tilde + beta1)^beta2 and applies to
// the size feature alone.
enum class Family { linear, poly2, poly3, logarithmic, scaling_law };
Family family_from(std::string_view text);
std::string_view to_string(Family family);
inline constexpr std::array<Family, 5> kAllFamilies = {
    Family::linear, Family::poly2, Family::poly3, Family::logarithmic,
    Family::scaling_law};

// A family paired with the features it consumes. scaling_law requires the
// feature set {size} exactly; polynomial families expand each feature
// independently (powers only, no cross terms).
struct PredictorSpec {
  Family family = Family::linear;
  FeatureSet features{};
};
void validate_spec(const PredictorSpec& spec);

// Coefficients of a fitted predictor. For linear-in-parameter families the
// layout is [intercept, then per feature in canonical order: x (, x^2
// (, x^3))] or [intercept, log x per feature]; for scaling_law it is
// [beta0, beta1, beta2].
struct FittedModel {
  PredictorSpec spec;
  std::vector<double> coefficients;
  std::string partition_key;
  bool rank_deficient = false;
  std::vector<std::string> notes;
};

// Design matrix for the linear-in-parameter families: an intercept column
// plus the family's per-feature expansion. Logarithmic inputs at or below 0
// are floored at 1e-6 and the flooring is noted.
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;
  std::vector<std::string> notes;
};
DesignMatrix design_matrix(const std::vector<FeatureVector>& features,
                           const PredictorSpec& spec);

// Least squares by complete orthogonal decomposition: numerically stable,
// and rank-deficient systems get the minimum-norm solution with a flag.
// Fewer rows than columns is refused.
struct OlsFit {
  std::vector<double> beta;
  bool rank_deficient = false;
};
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Nonlinear least squares for beta0 * (1/s + beta1)^beta2 by multi-start
// Levenberg-Marquardt: a log-spaced grid of starts over beta0 in [0.1, 100],
// beta1 in [1e-3, 10], beta2 in [-3, -0.01], plus 20 seeded random starts;
// the best converged optimum by SSE wins. Iterates violating beta0 > 0 or
// min(1/s) + beta1 > 0 are rejected. Sizes at or below 0 are floored at 1e-6
// before inversion. Needs >= 4 points with >= 2 distinct sizes.
struct ScalingLawFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double sse = 0.0;
  bool converged = false;
};
ScalingLawFit fit_scaling_law(const std::vector<double>& s_tilde,
                              const std::vector<double>& response,
                              std::uint64_t seed);

// Fits any family on the given feature vectors. `seed` feeds the size-law
// random starts and is ignored by the closed-form families.
FittedModel fit_model(const std::vector<FeatureVector>& features,
                      const PredictorSpec& spec, std::uint64_t seed,
                      std::string partition_key);

// Pointwise family evaluation; raw outputs, never clamped to [0, 100].
// A size-law evaluated where 1/s + beta1 <= 0 yields NaN.
std::vector<double> predict(const FittedModel& model,
                            const std::vector<FeatureVector>& features);
double predict_one(const FittedModel& model, const FeatureVector& fv);

// Cross-validation settings; the default seed is the library-wide
// reproducibility constant.
inline constexpr std::uint64_t kDefaultSeed = 20240;
struct CvConfig {
  int k = 10;
  std::uint64_t seed = kDefaultSeed;
  bool shuffle = true;
};

// Seeded shuffled k-fold RMSEs for one partition. The shuffle stream is
// derived from (seed, scheme, partition key), so every partition owns an
// independent, schedule-free stream. Throws fold_infeasible when the
// partition is smaller than k.
std::vector<double> kfold_rmse(const Partition& part, Scheme scheme,
                               const PredictorSpec& spec, const CvConfig& cv,
                               const Featurizer& featurizer);

// Per-partition CV outcome. Partitions whose folds cannot be fitted are
// reported as not assessable rather than dropped.
struct PartitionCv {
  std::string key;
  std::size_t n = 0;
  int k_used = 0;
  std::vector<double> fold_rmse;
  double avg_rmse = 0.0;
  bool assessable = true;
  std::vector<std::string> notes;
};

struct CvReport {
  Scheme scheme = Scheme::none;
  PredictorSpec spec;
  std::vector<PartitionCv> partitions;
  double overall_rmse = 0.0;           // unweighted mean of partition averages
  double weighted_overall_rmse = 0.0;  // record-count-weighted alternative
  std::vector<std::string> notes;
};

// Full protocol: partition, drop (and report) partitions under min_size,
// clamp k down to the partition size where needed (noted), run seeded
// k-fold CV per partition, then average per partition and across partitions.
CvReport evaluate_scheme(const std::vector<ExperimentRecord>& records,
                         Scheme scheme, const PredictorSpec& spec,
                         const CvConfig& cv, const Featurizer& featurizer,
                         int min_partition_size = 10);

}  // namespace mtperf
