#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "mtperf/error.hpp"
#include "mtperf/featurize.hpp"
#include "mtperf/records.hpp"
#include "mtperf/regress.hpp"
#include "mtperf/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mtperf;

namespace {

std::vector<ExperimentRecord> bundled_records() {
  return load_records_file(std::string(MTPERF_DATA_DIR) + "/experiments.csv");
}

Featurizer bundled_featurizer() {
  return make_featurizer(bundled_records(), FeatureSet{true, false, false}, {},
                         SizeScaling::max);
}

std::vector<FeatureVector> size_only(const std::vector<double>& s,
                                     const std::vector<double>& y) {
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    FeatureVector fv;
    fv.s_tilde = s[i];
    fv.response = y[i];
    out.push_back(fv);
  }
  return out;
}

}  // namespace

TEST_CASE("family names round-trip and specs are validated") {
  for (Family f : kAllFamilies) CHECK(family_from(to_string(f)) == f);
  CHECK_THROWS_AS(family_from("cubic"), Error);

  CHECK_NOTHROW(validate_spec({Family::scaling_law, FeatureSet{true, false, false}}));
  CHECK_THROWS_AS(validate_spec({Family::scaling_law, FeatureSet{true, true, false}}),
                  Error);
  CHECK_THROWS_AS(validate_spec({Family::linear, FeatureSet{false, false, false}}),
                  Error);
}

TEST_CASE("design matrices have the documented shape and columns") {
  auto rows = testutil::planted_eight_feature(1, 12);
  auto d3 = design_matrix(rows, {Family::poly3, FeatureSet{true, true, true}});
  CHECK(d3.X.rows() == 12);
  CHECK(d3.X.cols() == 25);  // intercept + 8 features x 3 powers
  CHECK(d3.columns[0] == "intercept");
  CHECK(d3.columns[1] == "s_tilde");
  CHECK(d3.columns[2] == "s_tilde^2");
  CHECK(d3.columns[3] == "s_tilde^3");
  CHECK(d3.columns[4] == "jsd");

  auto d1 = design_matrix(rows, {Family::linear, FeatureSet{true, false, false}});
  CHECK(d1.X.cols() == 2);

  auto d2 = design_matrix(rows, {Family::poly2, FeatureSet{true, true, false}});
  CHECK(d2.X.cols() == 5);
  // Powers expand per feature; there are no cross terms anywhere.
  CHECK(d2.columns ==
        std::vector<std::string>{"intercept", "s_tilde", "s_tilde^2", "jsd",
                                 "jsd^2"});

  auto dl = design_matrix(rows, {Family::logarithmic, FeatureSet{true, false, false}});
  CHECK(dl.columns[1] == "log(s_tilde)");
  CHECK(dl.notes.empty());

  CHECK_THROWS_AS(design_matrix(rows, {Family::scaling_law,
                                       FeatureSet{true, false, false}}),
                  Error);
}

TEST_CASE("logarithmic inputs at or below zero are floored and noted") {
  auto rows = size_only({0.0, 0.5, 1.0, 2.0}, {1.0, 2.0, 3.0, 4.0});
  auto d = design_matrix(rows, {Family::logarithmic, FeatureSet{true, false, false}});
  REQUIRE(d.notes.size() == 1);
  CHECK(d.notes[0].find("floored") != std::string::npos);
  CHECK(d.X(0, 1) == doctest::Approx(std::log(1e-6)).epsilon(1e-12));
}

TEST_CASE("least squares recovers an exact line") {
  auto rows = size_only({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  auto model = fit_model(rows, {Family::linear, FeatureSet{true, false, false}},
                         kDefaultSeed, "all");
  REQUIRE(model.coefficients.size() == 2);
  CHECK(model.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(model.rank_deficient);
  auto pred = predict(model, rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(pred[i] == doctest::Approx(rows[i].response).epsilon(1e-12));
  }
}

TEST_CASE("least squares matches the normal equations on random systems") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd X(20, 3);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = rng.uniform01();
      X(i, 2) = rng.uniform01();
      y(i) = rng.normal();
    }
    auto fit = fit_ols(X, y);
    Eigen::VectorXd ref = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    REQUIRE(fit.beta.size() == 3);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(fit.beta[static_cast<std::size_t>(c)] - ref(c)) < 1e-8);
    }
  }
}

TEST_CASE("underdetermined and rank-deficient systems are not guessed at") {
  auto rows = size_only({0.2, 0.4}, {1.0, 2.0});
  CHECK_THROWS_AS(fit_model(rows, {Family::poly3, FeatureSet{true, false, false}},
                            kDefaultSeed, "all"),
                  Error);

  // A constant feature column duplicates the intercept: minimum-norm
  // solution plus an explicit flag, not silence.
  Eigen::MatrixXd X(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = 1.0;
    y(i) = 2.0 * i;
  }
  auto fit = fit_ols(X, y);
  CHECK(fit.rank_deficient);
  // Minimum-norm splits the intercept evenly across the two columns.
  CHECK(fit.beta[0] == doctest::Approx(fit.beta[1]).epsilon(1e-10));
}

TEST_CASE("size-law fit recovers planted coefficients from clean data") {
  std::vector<double> s = {0.02, 0.1, 0.2, 0.5, 1.0};
  std::vector<double> y;
  testutil::size_law_points(40.0, 0.1, -0.5, s, y);
  auto fit = fit_scaling_law(s, y, kDefaultSeed);
  CHECK(fit.converged);
  CHECK(fit.sse < 1e-8);
  CHECK(fit.beta0 == doctest::Approx(40.0).epsilon(1e-3));
  CHECK(fit.beta1 == doctest::Approx(0.1).epsilon(2e-2));
  CHECK(fit.beta2 == doctest::Approx(-0.5).epsilon(1e-3));
}

TEST_CASE("size-law point predictions follow the formula") {
  FittedModel model;
  model.spec = {Family::scaling_law, FeatureSet{true, false, false}};
  model.coefficients = {40.0, 0.1, -0.5};
  FeatureVector fv;
  fv.s_tilde = 1.0;
  CHECK(predict_one(model, fv) ==
        doctest::Approx(oracle::kSizeLawPrediction).epsilon(1e-12));
  // Infeasible evaluation points yield NaN rather than a fabricated value.
  FittedModel bad = model;
  bad.coefficients = {40.0, -2.0, -0.5};
  CHECK(std::isnan(predict_one(bad, fv)));
}

TEST_CASE("size-law fit flattens gracefully on constant responses") {
  std::vector<double> s = {0.1, 0.2, 0.5, 1.0};
  std::vector<double> y = {42.0, 42.0, 42.0, 42.0};
  auto fit = fit_scaling_law(s, y, kDefaultSeed);
  FittedModel model;
  model.spec = {Family::scaling_law, FeatureSet{true, false, false}};
  model.coefficients = {fit.beta0, fit.beta1, fit.beta2};
  for (double v : s) {
    FeatureVector fv;
    fv.s_tilde = v;
    CHECK(predict_one(model, fv) == doctest::Approx(42.0).epsilon(1e-6));
  }
}

TEST_CASE("size-law fit rejects samples it cannot identify") {
  std::vector<double> s3 = {0.1, 0.5, 1.0};
  std::vector<double> y3 = {10.0, 8.0, 7.0};
  CHECK_THROWS_AS(fit_scaling_law(s3, y3, kDefaultSeed), Error);  // < 4 points

  std::vector<double> same = {0.5, 0.5, 0.5, 0.5};
  std::vector<double> ys = {1.0, 2.0, 3.0, 4.0};
  try {
    fit_scaling_law(same, ys, kDefaultSeed);
    FAIL_CHECK("expected degenerate_sample");
  } catch (const Error& e) {
    CHECK(e.kind() == errc::degenerate_sample);
  }
}

TEST_CASE("size-law beats the straight line on curved in-domain data") {
  // The gov-gov partition shows classic saturating growth; the curve family
  // built for that shape must fit it at least as well as a line.
  auto records = bundled_records();
  auto fz = bundled_featurizer();
  auto parts = partition(records, Scheme::by_finetune_test);
  const Partition* gov_gov = nullptr;
  for (const auto& p : parts) {
    if (p.key == "gov-gov") gov_gov = &p;
  }
  REQUIRE(gov_gov != nullptr);
  auto features = fz.all(gov_gov->records);

  std::vector<double> s, y;
  for (const auto& fv : features) {
    s.push_back(fv.s_tilde);
    y.push_back(fv.response);
  }
  auto law = fit_scaling_law(s, y, kDefaultSeed);
  auto line = fit_model(features, {Family::linear, FeatureSet{true, false, false}},
                        kDefaultSeed, "gov-gov");
  double line_sse = 0.0;
  auto line_pred = predict(line, features);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double d = line_pred[i] - y[i];
    line_sse += d * d;
  }
  CHECK(law.sse <= line_sse + 1e-9);
}

TEST_CASE("fold assignment is deterministic, balanced, and disjoint") {
  SplitMix64 rng_a(stream_seed(kDefaultSeed, "none|all"));
  SplitMix64 rng_b(stream_seed(kDefaultSeed, "none|all"));
  auto folds_a = make_folds(23, 10, rng_a, true);
  auto folds_b = make_folds(23, 10, rng_b, true);
  CHECK(folds_a == folds_b);

  std::vector<int> seen(23, 0);
  for (std::size_t f = 0; f < folds_a.size(); ++f) {
    // 23 = 10 folds of base size 2 with 3 folds taking one extra element.
    CHECK(folds_a[f].size() == (f < 3 ? 3u : 2u));
    for (std::size_t idx : folds_a[f]) ++seen[idx];
  }
  for (int count : seen) CHECK(count == 1);

  // Different partitions draw from different streams.
  SplitMix64 rng_c(stream_seed(kDefaultSeed, "by_finetune|gov"));
  auto folds_c = make_folds(23, 10, rng_c, true);
  CHECK(folds_a != folds_c);
}

TEST_CASE("cross-validation is reproducible call to call") {
  auto records = bundled_records();
  auto fz = bundled_featurizer();
  PredictorSpec spec{Family::linear, FeatureSet{true, false, false}};
  auto r1 = evaluate_scheme(records, Scheme::by_test, spec, CvConfig{}, fz);
  auto r2 = evaluate_scheme(records, Scheme::by_test, spec, CvConfig{}, fz);
  CHECK(r1.overall_rmse == r2.overall_rmse);
  REQUIRE(r1.partitions.size() == r2.partitions.size());
  for (std::size_t i = 0; i < r1.partitions.size(); ++i) {
    CHECK(r1.partitions[i].fold_rmse == r2.partitions[i].fold_rmse);
  }
}

TEST_CASE("a constant-response partition cross-validates to zero error") {
  std::vector<ExperimentRecord> records;
  for (int i = 0; i < 12; ++i) {
    records.push_back(testutil::record(Corpus::gov, 1000 + i * 100,
                                       Corpus::gov,
                                       static_cast<Lang>(i % 5), 25.0));
  }
  auto fz = make_featurizer(records, FeatureSet{true, false, false}, {},
                            SizeScaling::max);
  auto report = evaluate_scheme(records, Scheme::none,
                                {Family::linear, FeatureSet{true, false, false}},
                                CvConfig{}, fz);
  CHECK(report.overall_rmse == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("k is clamped to the partition size with a note") {
  std::vector<ExperimentRecord> records;
  for (int i = 0; i < 7; ++i) {
    records.push_back(testutil::record(Corpus::gov, 1000 + i * 100,
                                       Corpus::gov, static_cast<Lang>(i % 5),
                                       20.0 + i));
  }
  auto fz = make_featurizer(records, FeatureSet{true, false, false}, {},
                            SizeScaling::max);
  auto report = evaluate_scheme(records, Scheme::none,
                                {Family::linear, FeatureSet{true, false, false}},
                                CvConfig{}, fz, 5);
  REQUIRE(report.partitions.size() == 1);
  CHECK(report.partitions[0].k_used == 7);
  CHECK(report.partitions[0].fold_rmse.size() == 7);
  bool noted = false;
  for (const auto& n : report.partitions[0].notes) {
    if (n.find("k reduced") != std::string::npos) noted = true;
  }
  CHECK(noted);

  // Direct fold computation refuses instead of clamping silently.
  Partition part{"all", records};
  CvConfig cv;  // k = 10 > 7 records
  CHECK_THROWS_AS(kfold_rmse(part, Scheme::none,
                             {Family::linear, FeatureSet{true, false, false}},
                             cv, fz),
                  Error);
}

TEST_CASE("cross-validated error matches the frozen reference grid") {
  auto records = bundled_records();
  auto fz = bundled_featurizer();
  for (const auto& cell : oracle::kBundledCvCells) {
    const Family family = family_from(cell.family);
    const Scheme scheme = scheme_from(cell.scheme);
    auto report = evaluate_scheme(records, scheme,
                                  {family, FeatureSet{true, false, false}},
                                  CvConfig{}, fz);
    // The size-law cells pass through an iterative optimizer; allow it a
    // hair more room than the closed-form families.
    const double tol = family == Family::scaling_law ? 5e-4 : 1e-4;
    CHECK_MESSAGE(std::abs(report.overall_rmse - cell.overall_rmse) < tol,
                  cell.family << " x " << cell.scheme << " gave "
                              << report.overall_rmse << ", expected "
                              << cell.overall_rmse);
  }
}

TEST_CASE("per-partition averages roll up into the overall mean") {
  auto records = bundled_records();
  auto fz = bundled_featurizer();
  auto report = evaluate_scheme(records, Scheme::by_finetune_test,
                                {Family::linear, FeatureSet{true, false, false}},
                                CvConfig{}, fz);
  REQUIRE(report.partitions.size() == 6);
  double sum = 0.0;
  double weighted = 0.0;
  std::size_t total = 0;
  for (const auto& p : report.partitions) {
    CHECK(p.assessable);
    CHECK(p.k_used == 10);
    double fold_mean = 0.0;
    for (double r : p.fold_rmse) fold_mean += r;
    fold_mean /= static_cast<double>(p.fold_rmse.size());
    CHECK(p.avg_rmse == doctest::Approx(fold_mean).epsilon(1e-12));
    sum += p.avg_rmse;
    weighted += p.avg_rmse * static_cast<double>(p.n);
    total += p.n;
  }
  CHECK(report.overall_rmse ==
        doctest::Approx(sum / 6.0).epsilon(1e-12));
  CHECK(report.weighted_overall_rmse ==
        doctest::Approx(weighted / static_cast<double>(total)).epsilon(1e-12));
}

TEST_CASE("evaluation reports missing features as an analysis error") {
  auto records = bundled_records();  // no divergence column
  auto fz = make_featurizer(records, FeatureSet{true, true, false}, {},
                            SizeScaling::max);
  CHECK_THROWS_AS(evaluate_scheme(records, Scheme::none,
                                  {Family::linear, FeatureSet{true, true, false}},
                                  CvConfig{}, fz),
                  Error);
}
