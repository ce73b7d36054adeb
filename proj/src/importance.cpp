#include "mtperf/importance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mtperf/error.hpp"
#include "mtperf/rng.hpp"
#include "mtperf/stats.hpp"

namespace mtperf {

FeatureMatrix feature_matrix(const std::vector<FeatureVector>& features,
                             const FeatureSet& set) {
  if (features.empty()) {
    throw Error(errc::empty_analysis, "no feature vectors");
  }
  FeatureMatrix m;
  m.rows = features.size();
  m.names = feature_names(set);
  m.cols.assign(m.names.size(), {});
  for (auto& col : m.cols) col.reserve(m.rows);
  m.response.reserve(m.rows);
  for (const auto& fv : features) {
    const std::vector<double> vals = fv.values(set);
    for (std::size_t c = 0; c < vals.size(); ++c) m.cols[c].push_back(vals[c]);
    m.response.push_back(fv.response);
  }
  return m;
}

namespace {

// Assigns 1-based ranks by |score| descending; exact ties broken by name and
// flagged on every member of the tie group.
template <typename Entry>
void assign_ranks(std::vector<Entry>& entries,
                  double (*score)(const Entry&)) {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double sa = score(entries[a]), sb = score(entries[b]);
    if (sa != sb) return sa > sb;
    return entries[a].name < entries[b].name;
  });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    entries[order[pos]].rank = static_cast<int>(pos + 1);
  }
  for (std::size_t pos = 1; pos < order.size(); ++pos) {
    if (score(entries[order[pos]]) == score(entries[order[pos - 1]])) {
      entries[order[pos]].tied = true;
      entries[order[pos - 1]].tied = true;
    }
  }
}

}  // namespace

std::vector<CorrelationEntry> rank_by_correlation(const FeatureMatrix& m) {
  std::vector<CorrelationEntry> entries;
  entries.reserve(m.names.size());
  for (std::size_t c = 0; c < m.names.size(); ++c) {
    PearsonResult pr = pearson(m.cols[c], m.response);
    entries.push_back(CorrelationEntry{m.names[c], pr.r, pr.p, 0, false});
  }
  assign_ranks(entries,
               +[](const CorrelationEntry& e) { return std::fabs(e.r); });
  return entries;
}

WeightAnalysis multifactor_weights(const FeatureMatrix& m) {
  const std::size_t n = m.rows;
  const std::size_t k = m.names.size();
  if (n <= k + 1) {
    throw Error(errc::underdetermined_fit,
                "weight analysis needs more rows than coefficients (" +
                    std::to_string(n) + " rows for " + std::to_string(k) +
                    " features)");
  }

  WeightAnalysis analysis;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(k + 1));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    y(static_cast<Eigen::Index>(i)) = m.response[i];
  }
  for (std::size_t c = 0; c < k; ++c) {
    const auto [lo_it, hi_it] =
        std::minmax_element(m.cols[c].begin(), m.cols[c].end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    if (range == 0.0) {
      analysis.notes.push_back("feature " + m.names[c] +
                               " is constant; normalized to 0");
    }
    for (std::size_t i = 0; i < n; ++i) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c + 1)) =
          range == 0.0 ? 0.0 : (m.cols[c][i] - lo) / range;
    }
  }

  OlsFit fit = fit_ols(X, y);
  analysis.rank_deficient = fit.rank_deficient;
  if (fit.rank_deficient) {
    analysis.notes.push_back(
        "collinear features; minimum-norm weights reported");
  }
  analysis.intercept = fit.beta[0];
  analysis.entries.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    analysis.entries.push_back(
        WeightEntry{m.names[c], fit.beta[c + 1], 0, false});
  }
  assign_ranks(analysis.entries,
               +[](const WeightEntry& e) { return std::fabs(e.weight); });
  return analysis;
}

// ---- regression trees ------------------------------------------------------

namespace {

struct NodeStats {
  double sum = 0.0;
  double sumsq = 0.0;
  std::size_t n = 0;

  double mean() const { return sum / static_cast<double>(n); }
  double impurity() const {
    double mu = mean();
    double v = sumsq / static_cast<double>(n) - mu * mu;
    return v > 0.0 ? v : 0.0;
  }
  double sse() const { return impurity() * static_cast<double>(n); }
};

NodeStats stats_of(const std::vector<double>& y,
                   const std::vector<std::size_t>& rows) {
  NodeStats s;
  for (std::size_t r : rows) {
    s.sum += y[r];
    s.sumsq += y[r] * y[r];
    ++s.n;
  }
  return s;
}

struct BestSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double child_sse = 0.0;
  std::vector<std::size_t> left, right;
};

BestSplit find_best_split(const FeatureMatrix& m,
                          const std::vector<std::size_t>& rows,
                          const RfHyperparams& hp) {
  const std::size_t n = rows.size();
  const std::size_t msl = static_cast<std::size_t>(hp.min_samples_leaf);
  BestSplit best;
  best.child_sse = std::numeric_limits<double>::infinity();

  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t f = 0; f < m.cols.size(); ++f) {
    const std::vector<double>& col = m.cols[f];
    for (std::size_t i = 0; i < n; ++i) {
      order[i] = {col[rows[i]], rows[i]};
    }
    // Sorting by (value, row) keeps the scan deterministic across runs.
    std::sort(order.begin(), order.end());

    double suml = 0.0, sumsql = 0.0;
    double sumr = 0.0, sumsqr = 0.0;
    for (const auto& [v, r] : order) {
      sumr += m.response[r];
      sumsqr += m.response[r] * m.response[r];
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double yv = m.response[order[i - 1].second];
      suml += yv;
      sumsql += yv * yv;
      sumr -= yv;
      sumsqr -= yv * yv;
      if (order[i].first == order[i - 1].first) continue;  // no boundary here
      const std::size_t nl = i, nr = n - i;
      if (nl < msl || nr < msl) continue;
      const double ssel = sumsql - suml * suml / static_cast<double>(nl);
      const double sser = sumsqr - sumr * sumr / static_cast<double>(nr);
      const double sse = std::max(ssel, 0.0) + std::max(sser, 0.0);
      if (sse < best.child_sse) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (order[i - 1].first + order[i].first);
        best.child_sse = sse;
      }
    }
  }
  if (best.found) {
    best.left.reserve(n);
    best.right.reserve(n);
    const std::vector<double>& col = m.cols[best.feature];
    for (std::size_t r : rows) {
      (col[r] <= best.threshold ? best.left : best.right).push_back(r);
    }
  }
  return best;
}

}  // namespace

double RegressionTree::predict_row(const std::vector<double>& row) const {
  int idx = 0;
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
    idx = row[static_cast<std::size_t>(node.feature)] <= node.threshold
              ? node.left
              : node.right;
  }
  return nodes[static_cast<std::size_t>(idx)].value;
}

RegressionTree fit_tree(const FeatureMatrix& m, const RfHyperparams& hp,
                        const std::vector<std::size_t>& rows) {
  if (rows.empty()) {
    throw Error(errc::empty_analysis, "cannot grow a tree from no rows");
  }
  RegressionTree tree;

  struct Pending {
    std::vector<std::size_t> rows;
    int depth;
    int node_index;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back(Pending{rows, 0, 0});

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    NodeStats stats = stats_of(m.response, cur.rows);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(cur.node_index)];
    node.n = stats.n;
    node.value = stats.mean();
    node.impurity = stats.impurity();

    const bool depth_capped = hp.max_depth >= 0 && cur.depth >= hp.max_depth;
    const bool too_small =
        stats.n < static_cast<std::size_t>(hp.min_samples_split);
    const bool pure =
        node.impurity <= 1e-12 * std::max(1.0, node.value * node.value);
    if (depth_capped || too_small || pure) continue;  // stays a leaf

    BestSplit split = find_best_split(m, cur.rows, hp);
    if (!split.found) continue;

    const int left_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[static_cast<std::size_t>(cur.node_index)];
    parent.feature = static_cast<int>(split.feature);
    parent.threshold = split.threshold;
    parent.left = left_index;
    parent.right = right_index;
    stack.push_back(Pending{std::move(split.right), cur.depth + 1,
                            right_index});
    stack.push_back(Pending{std::move(split.left), cur.depth + 1,
                            left_index});
  }
  return tree;
}

double RandomForest::predict_row(const std::vector<double>& row) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict_row(row);
  return sum / static_cast<double>(trees.size());
}

RandomForest train_random_forest(const FeatureMatrix& m,
                                 const RfHyperparams& hp, std::uint64_t seed,
                                 const std::vector<std::size_t>* rows) {
  std::vector<std::size_t> all_rows;
  if (rows == nullptr) {
    all_rows.resize(m.rows);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    rows = &all_rows;
  }
  if (rows->empty()) {
    throw Error(errc::empty_analysis, "cannot train a forest on no rows");
  }

  RandomForest forest;
  forest.hp = hp;
  forest.seed = seed;
  forest.n_features = m.cols.size();
  forest.trees.reserve(static_cast<std::size_t>(hp.n_estimators));
  const std::size_t n = rows->size();
  for (int t = 0; t < hp.n_estimators; ++t) {
    if (hp.bootstrap) {
      SplitMix64 rng(seed + static_cast<std::uint64_t>(t));
      std::vector<std::size_t> sampled(n);
      for (std::size_t i = 0; i < n; ++i) {
        sampled[i] = (*rows)[static_cast<std::size_t>(rng.below(n))];
      }
      forest.trees.push_back(fit_tree(m, hp, sampled));
    } else {
      forest.trees.push_back(fit_tree(m, hp, *rows));
    }
  }
  return forest;
}

MdiResult mdi_importance(const RandomForest& forest) {
  MdiResult result;
  result.percent.assign(forest.n_features, 0.0);
  std::vector<double> raw(forest.n_features, 0.0);
  for (const auto& tree : forest.trees) {
    const double n_root = static_cast<double>(tree.nodes[0].n);
    for (const auto& node : tree.nodes) {
      if (node.feature < 0) continue;
      const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
      const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
      const double nn = static_cast<double>(node.n);
      const double child_impurity =
          (static_cast<double>(l.n) * l.impurity +
           static_cast<double>(r.n) * r.impurity) /
          nn;
      const double reduction = node.impurity - child_impurity;
      if (reduction > 0.0) {
        raw[static_cast<std::size_t>(node.feature)] +=
            (nn / n_root) * reduction;
      }
    }
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (total <= 0.0) {
    result.all_zero = true;
    return result;
  }
  for (std::size_t f = 0; f < raw.size(); ++f) {
    result.percent[f] = 100.0 * raw[f] / total;
  }
  return result;
}

std::vector<RfHyperparams> default_rf_grid() {
  std::vector<RfHyperparams> grid;
  grid.reserve(2520);
  for (int ne = 50; ne <= 400; ne += 25) {
    for (int depth = 3; depth <= 15; depth += 2) {
      for (int mss = 2; mss <= 5; ++mss) {
        for (int msl = 1; msl <= 3; ++msl) {
          for (bool bootstrap : {true, false}) {
            grid.push_back(RfHyperparams{ne, depth, mss, msl, bootstrap});
          }
        }
      }
    }
  }
  return grid;
}

GridSearchResult grid_search_rf(const FeatureMatrix& m,
                                const std::vector<RfHyperparams>& grid,
                                const CvConfig& cv, std::size_t stride) {
  if (grid.empty()) throw Error(errc::usage, "empty hyperparameter grid");
  if (stride == 0) stride = 1;
  const std::size_t n = m.rows;
  if (cv.k < 2 || n < static_cast<std::size_t>(cv.k)) {
    throw Error(errc::fold_infeasible,
                std::to_string(n) + " rows cannot form " +
                    std::to_string(cv.k) + " folds");
  }

  // One fold assignment shared by every cell, so cells differ only in
  // hyperparameters.
  SplitMix64 fold_rng(stream_seed(cv.seed, "rfgrid"));
  const auto folds =
      make_folds(n, static_cast<std::size_t>(cv.k), fold_rng, cv.shuffle);
  std::vector<std::vector<std::size_t>> train_rows(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<char> held(n, 0);
    for (std::size_t idx : folds[f]) held[idx] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!held[i]) train_rows[f].push_back(i);
    }
  }

  GridSearchResult result;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::vector<double> row(m.cols.size());
  for (std::size_t ci = 0; ci < grid.size(); ci += stride) {
    const RfHyperparams& hp = grid[ci];
    double fold_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const std::uint64_t forest_seed = stream_seed(
          cv.seed, "rfcell|" + std::to_string(ci) + "|fold|" +
                       std::to_string(f));
      RandomForest forest =
          train_random_forest(m, hp, forest_seed, &train_rows[f]);
      double sse = 0.0;
      for (std::size_t idx : folds[f]) {
        for (std::size_t c = 0; c < m.cols.size(); ++c) {
          row[c] = m.cols[c][idx];
        }
        const double d = forest.predict_row(row) - m.response[idx];
        sse += d * d;
      }
      fold_sum += std::sqrt(sse / static_cast<double>(folds[f].size()));
    }
    const double cell_rmse = fold_sum / static_cast<double>(folds.size());
    result.cells.push_back(GridCell{ci, hp, cell_rmse});
    // Strict improvement wins; the enumeration order (n_estimators-major,
    // then depth) makes first-wins the required tie-break.
    if (cell_rmse < best_rmse) {
      best_rmse = cell_rmse;
      result.best = hp;
    }
  }
  result.best_rmse = best_rmse;
  return result;
}

ImportanceReport importance_report(const FeatureMatrix& m,
                                   const RfHyperparams& hp,
                                   std::uint64_t seed) {
  ImportanceReport report;
  report.rf_params = hp;
  report.entries.reserve(m.names.size());
  for (const auto& name : m.names) {
    ImportanceEntry e;
    e.name = name;
    report.entries.push_back(std::move(e));
  }

  // Correlation ranking; constant columns are reported, not fatal.
  try {
    const auto corr = rank_by_correlation(m);
    for (std::size_t c = 0; c < corr.size(); ++c) {
      report.entries[c].pearson_r = corr[c].r;
      report.entries[c].pearson_p = corr[c].p;
      report.entries[c].pearson_rank = corr[c].rank;
      report.entries[c].pearson_tied = corr[c].tied;
    }
  } catch (const Error& e) {
    report.notes.push_back(std::string("correlation ranking skipped: ") +
                           e.what());
  }

  try {
    const WeightAnalysis weights = multifactor_weights(m);
    for (std::size_t c = 0; c < weights.entries.size(); ++c) {
      report.entries[c].weight = weights.entries[c].weight;
      report.entries[c].weight_rank = weights.entries[c].rank;
      report.entries[c].weight_tied = weights.entries[c].tied;
    }
    for (const auto& note : weights.notes) report.notes.push_back(note);
  } catch (const Error& e) {
    report.notes.push_back(std::string("weight ranking skipped: ") + e.what());
  }

  RandomForest forest = train_random_forest(m, hp, seed);
  MdiResult mdi = mdi_importance(forest);
  report.rf_all_zero = mdi.all_zero;
  if (mdi.all_zero) {
    report.notes.push_back(
        "forest grew no splits (constant response); importances all zero");
  }
  std::vector<WeightEntry> rf_entries;
  rf_entries.reserve(m.names.size());
  for (std::size_t c = 0; c < m.names.size(); ++c) {
    report.entries[c].rf_percent = mdi.percent[c];
    rf_entries.push_back(WeightEntry{m.names[c], mdi.percent[c], 0, false});
  }
  assign_ranks(rf_entries,
               +[](const WeightEntry& e) { return std::fabs(e.weight); });
  for (std::size_t c = 0; c < rf_entries.size(); ++c) {
    report.entries[c].rf_rank = rf_entries[c].rank;
    report.entries[c].rf_tied = rf_entries[c].tied;
  }
  return report;
}

}  // namespace mtperf
