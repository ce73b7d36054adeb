#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mtperf/featurize.hpp"
#include "mtperf/records.hpp"
#include "mtperf/regress.hpp"

namespace mtperf {

enum class OutputFormat { csv, json, md };
OutputFormat output_format_from(std::string_view text);
std::string_view to_string(OutputFormat format);

// Everything a run needs, resolved before any computation starts. Empty
// scheme/family lists mean "all five"; commands that take a single scheme or
// family use the front of the list.
struct RunConfig {
  std::string records_path = "data/experiments.csv";
  std::string profiles_path;
  std::string stopwords_path;
  FeatureSet features{true, false, false};
  std::vector<Scheme> schemes;
  std::vector<Family> families;
  CvConfig cv;
  SizeScaling scaling = SizeScaling::max;
  int min_partition_size = 10;
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::csv;
  bool run_grid_search = false;
  std::size_t grid_stride = 1;
};

// One cell of the family-by-scheme CV grid. The flags mark the best (lowest
// overall RMSE) family within the cell's scheme column and the best scheme
// within the cell's family row; ties keep the first cell in enumeration
// order.
struct EvalCell {
  Family family = Family::linear;
  Scheme scheme = Scheme::none;
  CvReport report;
  bool best_family_in_scheme = false;
  bool best_scheme_in_family = false;
};

struct EvalGrid {
  FeatureSet features;
  std::vector<Family> families;
  std::vector<Scheme> schemes;
  std::vector<EvalCell> cells;  // family-major order

  const EvalCell& at(std::size_t family_index, std::size_t scheme_index) const;
};

EvalGrid compute_eval_grid(const std::vector<ExperimentRecord>& records,
                           const Featurizer& featurizer, const RunConfig& cfg);

// Command bodies. Each computes first, then writes its files into
// cfg.out_dir in a fixed order, logging a short human summary to `log`.
// The returned names are relative to cfg.out_dir. Failures throw Error.
std::vector<std::string> run_evaluate(const RunConfig& cfg, std::ostream& log);
std::vector<std::string> run_diagnose(const RunConfig& cfg, std::ostream& log);
std::vector<std::string> run_rank(const RunConfig& cfg, std::ostream& log);

// Full bundle: RMSE grid, diagnostics, importance, plot data (scatter
// points, fitted curves at 100 abscissae per partition, boxplot summaries),
// static SVG renderings, and a manifest recording the configuration, the
// seed, and FNV-1a checksums of every input and output. No timestamps:
// reruns are byte-identical.
std::vector<std::string> run_report(const RunConfig& cfg, std::ostream& log);

// Corpus divergence between two text files (optionally stopword-filtered).
double jsd_between_files(const std::string& path_a, const std::string& path_b,
                         const std::string& stopwords_path);

// Batch form: `manifest_path` names a CSV whose first two columns are text
// file paths; the same rows are echoed to `out` with a `jsd` column
// appended, ready to splice into a records file.
void jsd_batch(const std::string& manifest_path,
               const std::string& stopwords_path, std::ostream& out);

}  // namespace mtperf
