#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtperf/csv.hpp"
#include "mtperf/error.hpp"
#include "mtperf/report.hpp"

namespace {

struct CliOptions {
  mtperf::RunConfig cfg;
  std::string features_text = "size";
  std::vector<std::string> scheme_texts;
  std::vector<std::string> family_texts;
  std::string scaling_text = "max";
  std::string format_text = "csv";
};

void add_common(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--records", opt.cfg.records_path,
                  "experiment records CSV")
      ->envname("MTPERF_RECORDS")
      ->capture_default_str();
  sub->add_option("--profiles", opt.cfg.profiles_path,
                  "language distance profiles CSV")
      ->envname("MTPERF_PROFILES");
  sub->add_option("--features", opt.features_text,
                  "comma-joined subset of {size,jsd,lang}")
      ->envname("MTPERF_FEATURES")
      ->capture_default_str();
  sub->add_option("--scheme", opt.scheme_texts,
                  "partition scheme(s) out of none, by_finetune, by_test, "
                  "by_lang, by_finetune_test; default: all five")
      ->envname("MTPERF_SCHEME")
      ->delimiter(',');
  sub->add_option("--family", opt.family_texts,
                  "predictor family(ies) out of linear, poly2, poly3, "
                  "logarithmic, scaling_law; default: all five")
      ->envname("MTPERF_FAMILY")
      ->delimiter(',');
  sub->add_option("--k", opt.cfg.cv.k, "cross-validation folds")
      ->envname("MTPERF_K")
      ->capture_default_str();
  sub->add_option("--seed", opt.cfg.cv.seed, "master RNG seed")
      ->envname("MTPERF_SEED")
      ->capture_default_str();
  sub->add_option("--size-scaling", opt.scaling_text, "max or minmax")
      ->envname("MTPERF_SIZE_SCALING")
      ->capture_default_str();
  sub->add_option("--min-partition", opt.cfg.min_partition_size,
                  "smallest partition kept for analysis")
      ->envname("MTPERF_MIN_PARTITION")
      ->capture_default_str();
  sub->add_option("--out", opt.cfg.out_dir, "output directory")
      ->envname("MTPERF_OUT")
      ->capture_default_str();
  sub->add_option("--format", opt.format_text, "csv, json, or md")
      ->envname("MTPERF_FORMAT")
      ->capture_default_str();
  sub->add_option("--stopwords", opt.cfg.stopwords_path,
                  "stopword list, one token per line")
      ->envname("MTPERF_STOPWORDS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Fine-tuning experiment analysis: cross-validated predictor "
      "evaluation, residual diagnostics, feature importance ranking, and "
      "corpus divergence."};
  app.require_subcommand(1);

  CliOptions opt;

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "cross-validated RMSE for every family x scheme cell");
  add_common(evaluate, opt);

  CLI::App* diagnose = app.add_subcommand(
      "diagnose",
      "normality and homoscedasticity checks on full-fit residuals");
  add_common(diagnose, opt);

  CLI::App* rank = app.add_subcommand(
      "rank",
      "feature importance by correlation, fit weights, and random forest");
  add_common(rank, opt);
  rank->add_flag("--grid-search", opt.cfg.run_grid_search,
                 "run the forest hyperparameter grid search");
  rank->add_option("--grid-stride", opt.cfg.grid_stride,
                   "evaluate every Nth grid cell (1 = exhaustive)")
      ->capture_default_str();

  CLI::App* report = app.add_subcommand(
      "report", "full bundle: tables, plot data, SVG figures, manifest");
  add_common(report, opt);

  CLI::App* jsd = app.add_subcommand(
      "jsd", "Jensen-Shannon divergence between two corpus files");
  std::string corpus_a, corpus_b, batch_path;
  jsd->add_option("corpus_a", corpus_a, "first text file");
  jsd->add_option("corpus_b", corpus_b, "second text file");
  jsd->add_option("--batch", batch_path,
                  "CSV manifest whose first two columns are file paths; "
                  "writes the rows back with a jsd column appended");
  jsd->add_option("--stopwords", opt.cfg.stopwords_path,
                  "stopword list, one token per line")
      ->envname("MTPERF_STOPWORDS");

  CLI11_PARSE(app, argc, argv);

  try {
    opt.cfg.features = mtperf::parse_feature_set(opt.features_text);
    opt.cfg.scaling = mtperf::size_scaling_from(opt.scaling_text);
    opt.cfg.format = mtperf::output_format_from(opt.format_text);
    for (const auto& s : opt.scheme_texts) {
      opt.cfg.schemes.push_back(mtperf::scheme_from(s));
    }
    for (const auto& f : opt.family_texts) {
      opt.cfg.families.push_back(mtperf::family_from(f));
    }

    if (evaluate->parsed()) {
      mtperf::run_evaluate(opt.cfg, std::cout);
    } else if (diagnose->parsed()) {
      mtperf::run_diagnose(opt.cfg, std::cout);
    } else if (rank->parsed()) {
      mtperf::run_rank(opt.cfg, std::cout);
    } else if (report->parsed()) {
      mtperf::run_report(opt.cfg, std::cout);
    } else if (jsd->parsed()) {
      if (!batch_path.empty()) {
        mtperf::jsd_batch(batch_path, opt.cfg.stopwords_path, std::cout);
      } else {
        if (corpus_a.empty() || corpus_b.empty()) {
          throw mtperf::Error(mtperf::errc::usage,
                              "jsd needs two corpus files or --batch");
        }
        std::cout << mtperf::format_fixed(
                         mtperf::jsd_between_files(corpus_a, corpus_b,
                                                   opt.cfg.stopwords_path),
                         6)
                  << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
