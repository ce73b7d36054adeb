#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtperf/featurize.hpp"
#include "mtperf/regress.hpp"

namespace mtperf {

// Column-oriented numeric view of assembled features, used by the ranking
// analyses and the forest.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::vector<std::string> names;         // canonical feature order
  std::vector<std::vector<double>> cols;  // one column per name
  std::vector<double> response;
};
FeatureMatrix feature_matrix(const std::vector<FeatureVector>& features,
                             const FeatureSet& set);

// Features ordered by |r| against the response, descending; exact ties are
// broken lexicographically by name and flagged.
struct CorrelationEntry {
  std::string name;
  double r = 0.0;
  double p = 1.0;
  int rank = 0;
  bool tied = false;
};
std::vector<CorrelationEntry> rank_by_correlation(const FeatureMatrix& m);

// Weights of the all-feature linear fit on min-max-normalized columns
// (normalization makes magnitudes comparable across features), ranked by
// |weight|. Constant columns normalize to zero and flag rank deficiency.
struct WeightEntry {
  std::string name;
  double weight = 0.0;
  int rank = 0;
  bool tied = false;
};
struct WeightAnalysis {
  std::vector<WeightEntry> entries;
  double intercept = 0.0;
  bool rank_deficient = false;
  std::vector<std::string> notes;
};
WeightAnalysis multifactor_weights(const FeatureMatrix& m);

// Binary regression tree grown by greedy variance reduction: every feature
// is considered at every split, the threshold is the midpoint between
// consecutive distinct sorted values, leaves predict the mean. Growth stops
// at max_depth, below min_samples_split, at min_samples_leaf, or on a
// zero-variance node.
struct RfHyperparams {
  int n_estimators = 100;
  int max_depth = 9;
  int min_samples_split = 2;
  int min_samples_leaf = 2;
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;     // mean response of the node's training rows
  double impurity = 0.0;  // population variance of those rows
  std::size_t n = 0;
  int left = -1;
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict_row(const std::vector<double>& row) const;
};

RegressionTree fit_tree(const FeatureMatrix& m, const RfHyperparams& hp,
                        const std::vector<std::size_t>& rows);

// Forest of such trees. With bootstrap, tree t draws rows with replacement
// from its own stream seeded seed + t; without, every tree sees all rows
// (and, the builder being deterministic, all trees coincide).
struct RandomForest {
  std::vector<RegressionTree> trees;
  RfHyperparams hp;
  std::uint64_t seed = 0;
  std::size_t n_features = 0;

  double predict_row(const std::vector<double>& row) const;
};
RandomForest train_random_forest(const FeatureMatrix& m,
                                 const RfHyperparams& hp, std::uint64_t seed,
                                 const std::vector<std::size_t>* rows = nullptr);

// Mean decrease in impurity: per feature, the sum over all split nodes of
// (node sample fraction) x (variance reduction), accumulated across trees
// and normalized to percentages. A forest of pure leaves has nothing to
// attribute and is flagged instead.
struct MdiResult {
  std::vector<double> percent;
  bool all_zero = false;
};
MdiResult mdi_importance(const RandomForest& forest);

// Hyperparameter search space enumerated in a fixed order; the canonical
// grid is n_estimators 50..400 step 25, max_depth 3..15 step 2,
// min_samples_split 2..5, min_samples_leaf 1..3, bootstrap {true, false}
// (2520 cells).
std::vector<RfHyperparams> default_rf_grid();

// Exhaustive CV over the grid (optionally strided for quicker runs): mean
// fold RMSE per cell, argmin returned. Folds are shared across cells; ties
// resolve toward smaller n_estimators, then smaller max_depth, via the
// enumeration order.
struct GridCell {
  std::size_t index = 0;
  RfHyperparams hp;
  double cv_rmse = 0.0;
};
struct GridSearchResult {
  RfHyperparams best;
  double best_rmse = 0.0;
  std::vector<GridCell> cells;
};
GridSearchResult grid_search_rf(const FeatureMatrix& m,
                                const std::vector<RfHyperparams>& grid,
                                const CvConfig& cv,
                                std::size_t stride = 1);

// The three rankings side by side, one row per feature in canonical order.
// Analyses that cannot run for a feature (constant column) leave the fields
// empty and explain themselves in notes.
struct ImportanceEntry {
  std::string name;
  std::optional<double> pearson_r;
  std::optional<double> pearson_p;
  int pearson_rank = 0;
  bool pearson_tied = false;
  std::optional<double> weight;
  int weight_rank = 0;
  bool weight_tied = false;
  std::optional<double> rf_percent;
  int rf_rank = 0;
  bool rf_tied = false;
};
struct ImportanceReport {
  std::vector<ImportanceEntry> entries;
  bool partial = false;  // some requested feature was unavailable
  bool rf_all_zero = false;
  RfHyperparams rf_params;
  std::vector<std::string> notes;
};
ImportanceReport importance_report(const FeatureMatrix& m,
                                   const RfHyperparams& hp,
                                   std::uint64_t seed);

}  // namespace mtperf
