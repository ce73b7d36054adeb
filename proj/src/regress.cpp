#include "mtperf/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtperf/error.hpp"
#include "mtperf/rng.hpp"
#include "mtperf/stats.hpp"

namespace mtperf {

Family family_from(std::string_view text) {
  if (text == "linear") return Family::linear;
  if (text == "poly2") return Family::poly2;
  if (text == "poly3") return Family::poly3;
  if (text == "logarithmic") return Family::logarithmic;
  if (text == "scaling_law") return Family::scaling_law;
  throw Error(errc::usage,
              "unknown predictor family '" + std::string(text) + "'");
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::linear: return "linear";
    case Family::poly2: return "poly2";
    case Family::poly3: return "poly3";
    case Family::logarithmic: return "logarithmic";
    case Family::scaling_law: return "scaling_law";
  }
  return "?";
}

void validate_spec(const PredictorSpec& spec) {
  if (spec.features.count() == 0) {
    throw Error(errc::usage, "predictor needs a non-empty feature set");
  }
  if (spec.family == Family::scaling_law &&
      !(spec.features.size && !spec.features.jsd && !spec.features.lang)) {
    throw Error(errc::usage,
                "scaling_law applies to the size feature alone");
  }
}

namespace {

constexpr double kLogFloor = 1e-6;

int powers_per_feature(Family family) {
  switch (family) {
    case Family::linear: return 1;
    case Family::poly2: return 2;
    case Family::poly3: return 3;
    case Family::logarithmic: return 1;
    case Family::scaling_law: return 0;
  }
  return 0;
}

}  // namespace

DesignMatrix design_matrix(const std::vector<FeatureVector>& features,
                           const PredictorSpec& spec) {
  validate_spec(spec);
  if (spec.family == Family::scaling_law) {
    throw Error(errc::usage,
                "scaling_law is not linear in its parameters; fit it with "
                "fit_scaling_law");
  }
  if (features.empty()) {
    throw Error(errc::empty_analysis, "no feature vectors to fit");
  }

  const std::vector<std::string> names = feature_names(spec.features);
  const int per = powers_per_feature(spec.family);
  const std::size_t n = features.size();
  const std::size_t cols = 1 + names.size() * static_cast<std::size_t>(per);

  DesignMatrix out;
  out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  out.y.resize(static_cast<Eigen::Index>(n));
  out.columns.push_back("intercept");
  if (spec.family == Family::logarithmic) {
    for (const auto& name : names) out.columns.push_back("log(" + name + ")");
  } else {
    for (const auto& name : names) {
      for (int p = 1; p <= per; ++p) {
        out.columns.push_back(p == 1 ? name
                                     : name + "^" + std::to_string(p));
      }
    }
  }

  std::size_t floored = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> vals = features[i].values(spec.features);
    Eigen::Index c = 0;
    out.X(static_cast<Eigen::Index>(i), c++) = 1.0;
    for (double v : vals) {
      if (spec.family == Family::logarithmic) {
        double x = v;
        if (x < kLogFloor) {
          x = kLogFloor;
          ++floored;
        }
        out.X(static_cast<Eigen::Index>(i), c++) = std::log(x);
      } else {
        double pow_v = 1.0;
        for (int p = 1; p <= per; ++p) {
          pow_v *= v;
          out.X(static_cast<Eigen::Index>(i), c++) = pow_v;
        }
      }
    }
    out.y(static_cast<Eigen::Index>(i)) = features[i].response;
  }
  if (floored > 0) {
    out.notes.push_back(std::to_string(floored) +
                        " value(s) at or below 0 floored to 1e-6 before log");
  }
  return out;
}

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) {
    throw Error(errc::out_of_range, "design matrix and response disagree");
  }
  if (X.rows() < X.cols()) {
    throw Error(errc::underdetermined_fit,
                std::to_string(X.rows()) + " rows cannot determine " +
                    std::to_string(X.cols()) + " coefficients");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  Eigen::VectorXd beta = cod.solve(y);
  OlsFit fit;
  fit.rank_deficient = cod.rank() < X.cols();
  fit.beta.assign(beta.data(), beta.data() + beta.size());
  return fit;
}

namespace {

// ---- size-law fitting ------------------------------------------------------

struct LmProblem {
  std::vector<double> inv_s;  // 1 / max(s, 1e-6)
  std::vector<double> y;
  double min_inv = 0.0;
};

bool feasible(const LmProblem& prob, const Eigen::Vector3d& b) {
  return b[0] > 0.0 && prob.min_inv + b[1] > 0.0;
}

double sse_at(const LmProblem& prob, const Eigen::Vector3d& b,
              std::vector<double>* residuals) {
  double sse = 0.0;
  for (std::size_t i = 0; i < prob.inv_s.size(); ++i) {
    double v = prob.inv_s[i] + b[1];
    double f = b[0] * std::exp(b[2] * std::log(v));
    double r = f - prob.y[i];
    if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    if (residuals) (*residuals)[i] = r;
    sse += r * r;
  }
  return sse;
}

struct LmOutcome {
  Eigen::Vector3d beta = Eigen::Vector3d::Zero();
  double sse = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Levenberg-Marquardt with the analytic Jacobian
//   df/dbeta0 = v^beta2, df/dbeta1 = beta0 beta2 v^(beta2-1),
//   df/dbeta2 = f ln v,   where v = 1/s + beta1.
LmOutcome levenberg_marquardt(const LmProblem& prob, Eigen::Vector3d beta) {
  LmOutcome out;
  if (!feasible(prob, beta)) return out;
  const std::size_t n = prob.inv_s.size();
  std::vector<double> resid(n);
  double sse = sse_at(prob, beta, &resid);
  if (!std::isfinite(sse)) return out;

  double lambda = 1e-3;
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), 3);
  for (int iter = 0; iter < 300; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = prob.inv_s[i] + beta[1];
      double lv = std::log(v);
      double pw = std::exp(beta[2] * lv);  // v^beta2
      double f = beta[0] * pw;
      J(static_cast<Eigen::Index>(i), 0) = pw;
      J(static_cast<Eigen::Index>(i), 1) = beta[0] * beta[2] * pw / v;
      J(static_cast<Eigen::Index>(i), 2) = f * lv;
    }
    Eigen::Map<const Eigen::VectorXd> r(resid.data(),
                                        static_cast<Eigen::Index>(n));
    Eigen::Matrix3d A = J.transpose() * J;
    Eigen::Vector3d g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + std::sqrt(sse))) {
      out.converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::Matrix3d M = A;
      for (int d = 0; d < 3; ++d) {
        M(d, d) += lambda * std::max(A(d, d), 1e-12);
      }
      Eigen::Vector3d delta = M.ldlt().solve(-g);
      Eigen::Vector3d trial = beta + delta;
      if (feasible(prob, trial)) {
        double trial_sse = sse_at(prob, trial, nullptr);
        if (std::isfinite(trial_sse) && trial_sse < sse) {
          double improvement = sse - trial_sse;
          beta = trial;
          sse = sse_at(prob, beta, &resid);
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          // Relative-improvement stop: on asymptotically flat ridges (the
          // model is scale-degenerate for weakly curved data) the gradient
          // test is unreachable, but successive gains decay geometrically.
          if (improvement < 1e-10 * (1.0 + sse)) out.converged = true;
          break;
        }
      }
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
    if (!stepped || out.converged) {
      // No acceptable step at any damping: a (possibly rough) local optimum.
      if (!stepped) out.converged = true;
      break;
    }
  }
  out.beta = beta;
  out.sse = sse;
  return out;
}

}  // namespace

ScalingLawFit fit_scaling_law(const std::vector<double>& s_tilde,
                              const std::vector<double>& response,
                              std::uint64_t seed) {
  if (s_tilde.size() != response.size()) {
    throw Error(errc::out_of_range, "sizes and responses disagree in length");
  }
  if (s_tilde.size() < 4) {
    throw Error(errc::underdetermined_fit,
                "size-law fit needs at least 4 points, got " +
                    std::to_string(s_tilde.size()));
  }
  LmProblem prob;
  prob.inv_s.reserve(s_tilde.size());
  double distinct_lo = s_tilde[0], distinct_hi = s_tilde[0];
  for (double s : s_tilde) {
    distinct_lo = std::min(distinct_lo, s);
    distinct_hi = std::max(distinct_hi, s);
    prob.inv_s.push_back(1.0 / std::max(s, kLogFloor));
  }
  if (distinct_lo == distinct_hi) {
    throw Error(errc::degenerate_sample,
                "size-law fit needs at least 2 distinct sizes");
  }
  prob.y = response;
  prob.min_inv = *std::min_element(prob.inv_s.begin(), prob.inv_s.end());

  static constexpr double kB0[] = {0.1, 1.0, 10.0, 100.0};
  static constexpr double kB1[] = {1e-3, 1e-2, 0.1, 1.0, 10.0};
  static constexpr double kB2[] = {-3.0, -1.0, -0.3, -0.1, -0.03, -0.01};
  std::vector<Eigen::Vector3d> starts;
  for (double b0 : kB0) {
    for (double b1 : kB1) {
      for (double b2 : kB2) starts.emplace_back(b0, b1, b2);
    }
  }
  SplitMix64 rng(seed);
  for (int i = 0; i < 20; ++i) {
    double b0 = std::pow(10.0, rng.uniform01() * 3.0 - 1.0);
    double b1 = std::pow(10.0, rng.uniform01() * 4.0 - 3.0);
    double b2 = -std::pow(10.0, rng.uniform01() * 2.5 - 2.0);
    starts.emplace_back(b0, b1, b2);
  }

  LmOutcome best;
  bool any_converged = false;
  for (const auto& start : starts) {
    LmOutcome run = levenberg_marquardt(prob, start);
    any_converged = any_converged || run.converged;
    if (run.sse < best.sse) best = run;
  }
  if (!std::isfinite(best.sse)) {
    throw Error(errc::fit_failure, "no feasible size-law start");
  }
  if (!any_converged) {
    throw Error(errc::fit_failure,
                "size-law optimization did not converge from any start; "
                "best incumbent (" +
                    std::to_string(best.beta[0]) + ", " +
                    std::to_string(best.beta[1]) + ", " +
                    std::to_string(best.beta[2]) +
                    ") with SSE " + std::to_string(best.sse));
  }
  return ScalingLawFit{best.beta[0], best.beta[1], best.beta[2], best.sse,
                       any_converged};
}

FittedModel fit_model(const std::vector<FeatureVector>& features,
                      const PredictorSpec& spec, std::uint64_t seed,
                      std::string partition_key) {
  validate_spec(spec);
  FittedModel model;
  model.spec = spec;
  model.partition_key = std::move(partition_key);
  if (spec.family == Family::scaling_law) {
    std::vector<double> s, y;
    s.reserve(features.size());
    y.reserve(features.size());
    for (const auto& fv : features) {
      s.push_back(fv.s_tilde);
      y.push_back(fv.response);
    }
    ScalingLawFit fit = fit_scaling_law(s, y, seed);
    model.coefficients = {fit.beta0, fit.beta1, fit.beta2};
    return model;
  }
  DesignMatrix dm = design_matrix(features, spec);
  OlsFit fit = fit_ols(dm.X, dm.y);
  model.coefficients = std::move(fit.beta);
  model.rank_deficient = fit.rank_deficient;
  model.notes = std::move(dm.notes);
  if (fit.rank_deficient) {
    model.notes.push_back(
        "rank-deficient design; minimum-norm coefficients returned");
  }
  return model;
}

double predict_one(const FittedModel& model, const FeatureVector& fv) {
  if (model.spec.family == Family::scaling_law) {
    double v = 1.0 / std::max(fv.s_tilde, kLogFloor) + model.coefficients[1];
    if (v <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return model.coefficients[0] * std::exp(model.coefficients[2] *
                                            std::log(v));
  }
  const std::vector<double> vals = fv.values(model.spec.features);
  const int per = powers_per_feature(model.spec.family);
  double out = model.coefficients[0];
  std::size_t c = 1;
  for (double v : vals) {
    if (model.spec.family == Family::logarithmic) {
      out += model.coefficients[c++] * std::log(std::max(v, kLogFloor));
    } else {
      double pow_v = 1.0;
      for (int p = 1; p <= per; ++p) {
        pow_v *= v;
        out += model.coefficients[c++] * pow_v;
      }
    }
  }
  return out;
}

std::vector<double> predict(const FittedModel& model,
                            const std::vector<FeatureVector>& features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& fv : features) out.push_back(predict_one(model, fv));
  return out;
}

namespace {

double rmse(const std::vector<double>& pred, const std::vector<double>& obs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - obs[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

}  // namespace

std::vector<double> kfold_rmse(const Partition& part, Scheme scheme,
                               const PredictorSpec& spec, const CvConfig& cv,
                               const Featurizer& featurizer) {
  validate_spec(spec);
  const std::size_t n = part.records.size();
  if (cv.k < 2) {
    throw Error(errc::fold_infeasible,
                "k must be at least 2, got " + std::to_string(cv.k));
  }
  if (n < static_cast<std::size_t>(cv.k)) {
    throw Error(errc::fold_infeasible,
                "partition '" + part.key + "' has " + std::to_string(n) +
                    " records, fewer than k = " + std::to_string(cv.k));
  }

  const std::vector<FeatureVector> all = featurizer.all(part.records);
  const std::string label =
      std::string(to_string(scheme)) + "|" + part.key;
  SplitMix64 shuffle_rng(stream_seed(cv.seed, label));
  const auto folds = make_folds(n, static_cast<std::size_t>(cv.k),
                                shuffle_rng, cv.shuffle);

  std::vector<double> fold_rmses;
  fold_rmses.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<char> held(n, 0);
    for (std::size_t idx : folds[f]) held[idx] = 1;
    std::vector<FeatureVector> train, test;
    train.reserve(n - folds[f].size());
    test.reserve(folds[f].size());
    for (std::size_t i = 0; i < n; ++i) {
      (held[i] ? test : train).push_back(all[i]);
    }
    const std::uint64_t fit_seed = stream_seed(
        cv.seed, "slfit|" + label + "|" + std::to_string(f));
    FittedModel model = fit_model(train, spec, fit_seed, part.key);
    std::vector<double> pred = predict(model, test);
    std::vector<double> obs;
    obs.reserve(test.size());
    for (const auto& fv : test) obs.push_back(fv.response);
    fold_rmses.push_back(rmse(pred, obs));
  }
  return fold_rmses;
}

CvReport evaluate_scheme(const std::vector<ExperimentRecord>& records,
                         Scheme scheme, const PredictorSpec& spec,
                         const CvConfig& cv, const Featurizer& featurizer,
                         int min_partition_size) {
  validate_spec(spec);
  if (records.empty()) {
    throw Error(errc::empty_analysis, "no records to evaluate");
  }
  CvReport report;
  report.scheme = scheme;
  report.spec = spec;

  FilteredPartitions filtered =
      filter_small_partitions(partition(records, scheme), min_partition_size);
  for (const auto& [key, size] : filtered.removed) {
    report.notes.push_back("partition '" + key + "' (n=" +
                           std::to_string(size) + ") below minimum size " +
                           std::to_string(min_partition_size) + ", removed");
  }

  double sum_avg = 0.0, weighted_sum = 0.0;
  std::size_t assessable = 0, weight_total = 0;
  for (const auto& part : filtered.kept) {
    PartitionCv pcv;
    pcv.key = part.key;
    pcv.n = part.records.size();
    CvConfig local = cv;
    if (pcv.n < static_cast<std::size_t>(local.k)) {
      local.k = static_cast<int>(pcv.n);
      pcv.notes.push_back("k reduced to partition size " +
                          std::to_string(local.k));
    }
    pcv.k_used = local.k;
    if (local.k < 2) {
      pcv.assessable = false;
      pcv.notes.push_back("partition too small to cross-validate");
      report.partitions.push_back(std::move(pcv));
      continue;
    }
    try {
      pcv.fold_rmse = kfold_rmse(part, scheme, spec, local, featurizer);
      pcv.avg_rmse = mean(pcv.fold_rmse);
      sum_avg += pcv.avg_rmse;
      weighted_sum += pcv.avg_rmse * static_cast<double>(pcv.n);
      weight_total += pcv.n;
      ++assessable;
    } catch (const Error& e) {
      pcv.assessable = false;
      pcv.notes.push_back(std::string("not assessable: ") + e.what());
    }
    report.partitions.push_back(std::move(pcv));
  }

  if (assessable == 0) {
    throw Error(errc::empty_analysis,
                "no partition could be cross-validated under scheme " +
                    std::string(to_string(scheme)));
  }
  report.overall_rmse = sum_avg / static_cast<double>(assessable);
  report.weighted_overall_rmse =
      weighted_sum / static_cast<double>(weight_total);
  return report;
}

}  // namespace mtperf
