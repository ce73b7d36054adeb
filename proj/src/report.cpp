#include "mtperf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <set>
#include <utility>

#include <json.hpp>

#include "mtperf/csv.hpp"
#include "mtperf/diagnostics.hpp"
#include "mtperf/error.hpp"
#include "mtperf/importance.hpp"
#include "mtperf/rng.hpp"

namespace mtperf {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kTableDecimals = 4;
constexpr int kPlotDecimals = 6;

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

std::string opt_fixed(const std::optional<double>& v, int decimals) {
  return v ? format_fixed(*v, decimals) : "NA";
}

std::string rank_text(int rank) {
  return rank > 0 ? std::to_string(rank) : "NA";
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// RFC 4180 quoting: cells containing a comma, quote, or newline are wrapped
// in double quotes with embedded quotes doubled.
std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_cell(cells[i]);
  }
  out += '\n';
  return out;
}

// All three output formats render from this one intermediate, so a JSON run
// and a CSV run can never disagree field-for-field.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::string out = csv_line(header);
    for (const auto& row : rows) out += csv_line(row);
    return out;
  }

  std::string to_md(std::string_view title,
                    const std::vector<std::string>& notes) const {
    std::string out = "# ";
    out += title;
    out += "\n\n| ";
    out += join(header, " | ");
    out += " |\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
    out += '\n';
    for (const auto& row : rows) {
      out += "| ";
      out += join(row, " | ");
      out += " |\n";
    }
    if (!notes.empty()) {
      out += '\n';
      for (const auto& note : notes) {
        out += "- ";
        out += note;
        out += '\n';
      }
    }
    return out;
  }

  ordered_json rows_json() const {
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

std::string render_document(std::string_view title, const TextTable& table,
                            const std::vector<std::string>& notes,
                            OutputFormat format,
                            const ordered_json* extra = nullptr) {
  switch (format) {
    case OutputFormat::csv:
      return table.to_csv();
    case OutputFormat::md:
      return table.to_md(title, notes);
    case OutputFormat::json: {
      ordered_json doc;
      doc["title"] = std::string(title);
      doc["table"] = table.rows_json();
      doc["notes"] = notes;
      if (extra) {
        for (auto it = extra->begin(); it != extra->end(); ++it) {
          doc[it.key()] = it.value();
        }
      }
      return doc.dump(2) + "\n";
    }
  }
  throw Error(errc::usage, "unknown output format");
}

std::string file_extension(OutputFormat format) {
  switch (format) {
    case OutputFormat::csv:
      return ".csv";
    case OutputFormat::json:
      return ".json";
    case OutputFormat::md:
      return ".md";
  }
  return ".csv";
}

void write_into(const RunConfig& cfg, const std::string& name,
                const std::string& content,
                std::vector<std::string>& written) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    throw Error(errc::io_failure, "cannot create output directory '" +
                                      cfg.out_dir + "': " + ec.message());
  }
  write_file((fs::path(cfg.out_dir) / name).string(), content);
  written.push_back(name);
}

struct Loaded {
  std::vector<ExperimentRecord> records;
  ProfileTable profiles;
};

Loaded load_inputs(const RunConfig& cfg) {
  Loaded in;
  in.records = load_records_file(cfg.records_path);
  if (cfg.features.lang && cfg.profiles_path.empty()) {
    throw Error(errc::usage,
                "language distance features need a profiles file");
  }
  if (!cfg.profiles_path.empty()) {
    in.profiles = load_language_profiles_file(cfg.profiles_path);
  }
  return in;
}

std::vector<Family> families_of(const RunConfig& cfg) {
  if (!cfg.families.empty()) return cfg.families;
  return std::vector<Family>(kAllFamilies.begin(), kAllFamilies.end());
}

std::vector<Scheme> schemes_of(const RunConfig& cfg) {
  if (!cfg.schemes.empty()) return cfg.schemes;
  return {Scheme::none, Scheme::by_finetune, Scheme::by_test, Scheme::by_lang,
          Scheme::by_finetune_test};
}

bool all_have_jsd(const std::vector<ExperimentRecord>& records) {
  return std::all_of(
      records.begin(), records.end(),
      [](const ExperimentRecord& r) { return r.jsd.has_value(); });
}

std::set<std::string> stopwords_of(const std::string& path) {
  if (path.empty()) return {};
  return load_stopwords_file(path);
}

// ---------------------------------------------------------------------------
// diagnose internals (shared by run_diagnose and run_report)

struct DiagnoseData {
  Scheme scheme = Scheme::by_finetune_test;
  PredictorSpec spec;
  std::vector<ResidualSeries> series;
  std::vector<DiagnosticsResult> results;
  std::vector<BoxplotStats> boxes;
  std::vector<std::string> notes;
};

DiagnoseData compute_diagnose(const RunConfig& cfg, const Loaded& in) {
  DiagnoseData d;
  d.scheme =
      cfg.schemes.empty() ? Scheme::by_finetune_test : cfg.schemes.front();
  const Family family =
      cfg.families.empty() ? Family::scaling_law : cfg.families.front();
  d.spec = PredictorSpec{family, cfg.features};
  validate_spec(d.spec);
  const Featurizer fz =
      make_featurizer(in.records, cfg.features, in.profiles, cfg.scaling);
  FilteredPartitions filtered = filter_small_partitions(
      partition(in.records, d.scheme), cfg.min_partition_size);
  for (const auto& [key, size] : filtered.removed) {
    d.notes.push_back("dropped partition " + key + " (" +
                      std::to_string(size) + " records, floor " +
                      std::to_string(cfg.min_partition_size) + ")");
  }
  for (const Partition& part : filtered.kept) {
    try {
      ResidualSeries s = residuals(part, d.scheme, d.spec, fz, cfg.cv.seed);
      d.results.push_back(diagnose(s));
      d.series.push_back(std::move(s));
    } catch (const Error& e) {
      DiagnosticsResult r;
      r.partition_key = part.key;
      r.n = part.records.size();
      r.notes.push_back(std::string("not assessable: ") + e.what());
      d.results.push_back(std::move(r));
    }
  }
  if (!d.series.empty()) d.boxes = residual_summary(d.series);
  return d;
}

std::string residuals_fitted_csv(const DiagnoseData& d) {
  TextTable t;
  t.header = {"partition", "fitted", "residual"};
  for (const ResidualSeries& s : d.series) {
    for (std::size_t i = 0; i < s.fitted.size(); ++i) {
      t.rows.push_back({s.partition_key,
                        format_fixed(s.fitted[i], kPlotDecimals),
                        format_fixed(s.residuals[i], kPlotDecimals)});
    }
  }
  return t.to_csv();
}

std::string boxplot_csv(const std::vector<BoxplotStats>& boxes) {
  TextTable t;
  t.header = {"partition", "n",  "mean",       "variance",   "median",
              "q1",        "q3", "whisker_lo", "whisker_hi", "outliers"};
  for (const BoxplotStats& b : boxes) {
    std::vector<std::string> outs;
    outs.reserve(b.outliers.size());
    for (double o : b.outliers) outs.push_back(format_fixed(o, kPlotDecimals));
    t.rows.push_back({b.key, std::to_string(b.n),
                      format_fixed(b.mean, kPlotDecimals),
                      format_fixed(b.variance, kPlotDecimals),
                      format_fixed(b.median, kPlotDecimals),
                      format_fixed(b.q1, kPlotDecimals),
                      format_fixed(b.q3, kPlotDecimals),
                      format_fixed(b.whisker_lo, kPlotDecimals),
                      format_fixed(b.whisker_hi, kPlotDecimals),
                      join(outs, ";")});
  }
  return t.to_csv();
}

// ---------------------------------------------------------------------------
// plot internals

constexpr std::array<std::string_view, 8> kPalette = {
    "#4878d0", "#ee854a", "#6acc64", "#d65f5f",
    "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

struct PlotData {
  Scheme scheme = Scheme::by_finetune_test;
  Family family = Family::scaling_law;
  struct Point {
    std::string key;
    double s = 0.0;
    double y = 0.0;
    bool in_domain = false;
  };
  struct CurvePoint {
    std::string key;
    double s = 0.0;
    double y = 0.0;
  };
  std::vector<Point> points;
  std::vector<CurvePoint> curve;
  std::vector<std::string> keys;  // partition order, for colors and legend
  std::vector<std::string> notes;
};

PlotData compute_plots(const RunConfig& cfg, const Loaded& in) {
  PlotData pd;
  pd.scheme =
      cfg.schemes.empty() ? Scheme::by_finetune_test : cfg.schemes.front();
  pd.family =
      cfg.families.empty() ? Family::scaling_law : cfg.families.front();
  // The figures show the size response, so the curves are fitted on the size
  // feature alone whatever the evaluation feature set is.
  const FeatureSet size_only{true, false, false};
  const PredictorSpec spec{pd.family, size_only};
  const Featurizer fz =
      make_featurizer(in.records, size_only, {}, cfg.scaling);
  FilteredPartitions filtered = filter_small_partitions(
      partition(in.records, pd.scheme), cfg.min_partition_size);
  for (const Partition& part : filtered.kept) {
    pd.keys.push_back(part.key);
    const std::vector<FeatureVector> fv = fz.all(part.records);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fv.size(); ++i) {
      pd.points.push_back(
          {part.key, fv[i].s_tilde, fv[i].response,
           domain_category(part.records[i]) == DomainCategory::in_domain});
      lo = std::min(lo, fv[i].s_tilde);
      hi = std::max(hi, fv[i].s_tilde);
    }
    try {
      const std::uint64_t fit_seed = stream_seed(
          cfg.cv.seed, "slfit|" + std::string(to_string(pd.scheme)) + "|" +
                           part.key + "|full");
      const FittedModel model = fit_model(fv, spec, fit_seed, part.key);
      for (int i = 0; i < 100; ++i) {
        FeatureVector probe;
        probe.s_tilde = lo + (hi - lo) * (static_cast<double>(i) / 99.0);
        pd.curve.push_back(
            {part.key, probe.s_tilde, predict_one(model, probe)});
      }
    } catch (const Error& e) {
      pd.notes.push_back("no fitted curve for " + part.key + ": " + e.what());
    }
  }
  return pd;
}

std::string scatter_csv(const PlotData& pd) {
  TextTable t;
  t.header = {"partition", "s_tilde", "spbleu", "domain"};
  for (const auto& p : pd.points) {
    t.rows.push_back({p.key, format_fixed(p.s, kPlotDecimals),
                      format_fixed(p.y, kPlotDecimals),
                      p.in_domain ? "in" : "out"});
  }
  return t.to_csv();
}

std::string curves_csv(const PlotData& pd) {
  TextTable t;
  t.header = {"partition", "s_tilde", "fitted"};
  for (const auto& c : pd.curve) {
    t.rows.push_back({c.key, format_fixed(c.s, kPlotDecimals),
                      format_fixed(c.y, kPlotDecimals)});
  }
  return t.to_csv();
}

// Maps a data interval onto a pixel interval; a degenerate data interval
// lands everything on the midpoint.
struct LinearMap {
  double d0 = 0.0, d1 = 1.0, p0 = 0.0, p1 = 1.0;
  double operator()(double v) const {
    if (d1 == d0) return (p0 + p1) / 2.0;
    return p0 + (v - d0) * (p1 - p0) / (d1 - d0);
  }
};

std::string fixed2(double v) { return format_fixed(v, 2); }

void svg_line(std::string& s, double x1, double y1, double x2, double y2,
              std::string_view stroke, std::string_view extra = "") {
  s += "<line x1=\"" + fixed2(x1) + "\" y1=\"" + fixed2(y1) + "\" x2=\"" +
       fixed2(x2) + "\" y2=\"" + fixed2(y2) + "\" stroke=\"" +
       std::string(stroke) + "\"" + std::string(extra) + "/>\n";
}

void svg_text(std::string& s, double x, double y, std::string_view anchor,
              std::string_view text, std::string_view extra = "") {
  s += "<text x=\"" + fixed2(x) + "\" y=\"" + fixed2(y) +
       "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" +
       std::string(anchor) + "\"" + std::string(extra) + ">" +
       std::string(text) + "</text>\n";
}

std::string_view color_of(std::size_t index) {
  return kPalette[index % kPalette.size()];
}

std::string scatter_svg(const PlotData& pd) {
  constexpr double kLeft = 60, kRight = 620, kTop = 20, kBottom = 400;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& p : pd.points) {
    xlo = std::min(xlo, p.s);
    xhi = std::max(xhi, p.s);
    ylo = std::min(ylo, p.y);
    yhi = std::max(yhi, p.y);
  }
  for (const auto& c : pd.curve) {
    if (!std::isfinite(c.y)) continue;
    ylo = std::min(ylo, c.y);
    yhi = std::max(yhi, c.y);
  }
  if (pd.points.empty()) {
    xlo = 0;
    xhi = 1;
    ylo = 0;
    yhi = 1;
  }
  const double xpad = (xhi - xlo) * 0.05 + 1e-9;
  const double ypad = (yhi - ylo) * 0.05 + 1e-9;
  const LinearMap X{xlo - xpad, xhi + xpad, kLeft, kRight};
  const LinearMap Y{ylo - ypad, yhi + ypad, kBottom, kTop};

  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"460\""
      " viewBox=\"0 0 640 460\">\n"
      "<rect width=\"640\" height=\"460\" fill=\"white\"/>\n";
  svg_line(s, kLeft, kBottom, kRight, kBottom, "#333333");
  svg_line(s, kLeft, kTop, kLeft, kBottom, "#333333");
  for (int i = 0; i <= 4; ++i) {
    const double xv = (xlo - xpad) + (xhi - xlo + 2 * xpad) * i / 4.0;
    const double px = X(xv);
    svg_line(s, px, kBottom, px, kBottom + 5, "#333333");
    svg_text(s, px, kBottom + 18, "middle", fixed2(xv));
    const double yv = (ylo - ypad) + (yhi - ylo + 2 * ypad) * i / 4.0;
    const double py = Y(yv);
    svg_line(s, kLeft - 5, py, kLeft, py, "#333333");
    svg_text(s, kLeft - 8, py + 4, "end", fixed2(yv));
  }
  svg_text(s, (kLeft + kRight) / 2, 440, "middle",
           "normalized fine-tuning size");
  svg_text(s, 15, (kTop + kBottom) / 2, "middle", "spBLEU",
           " transform=\"rotate(-90 15 210)\"");

  for (std::size_t ki = 0; ki < pd.keys.size(); ++ki) {
    std::string pts;
    for (const auto& c : pd.curve) {
      if (c.key != pd.keys[ki] || !std::isfinite(c.y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fixed2(X(c.s)) + "," + fixed2(Y(c.y));
    }
    if (!pts.empty()) {
      s += "<polyline fill=\"none\" stroke=\"" +
           std::string(color_of(ki)) + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    }
  }
  for (const auto& p : pd.points) {
    const auto it = std::find(pd.keys.begin(), pd.keys.end(), p.key);
    const std::size_t ki = static_cast<std::size_t>(it - pd.keys.begin());
    const std::string color(color_of(ki));
    if (p.in_domain) {
      s += "<circle cx=\"" + fixed2(X(p.s)) + "\" cy=\"" + fixed2(Y(p.y)) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
    } else {
      s += "<circle cx=\"" + fixed2(X(p.s)) + "\" cy=\"" + fixed2(Y(p.y)) +
           "\" r=\"3\" fill=\"none\" stroke=\"" + color + "\"/>\n";
    }
  }
  for (std::size_t ki = 0; ki < pd.keys.size(); ++ki) {
    const double ly = kTop + 8 + 16.0 * static_cast<double>(ki);
    s += "<rect x=\"" + fixed2(kLeft + 10) + "\" y=\"" + fixed2(ly) +
         "\" width=\"10\" height=\"10\" fill=\"" +
         std::string(color_of(ki)) + "\"/>\n";
    svg_text(s, kLeft + 25, ly + 9, "start", pd.keys[ki]);
  }
  s += "</svg>\n";
  return s;
}

std::string boxplot_svg(const std::vector<BoxplotStats>& boxes) {
  constexpr double kSlot = 90, kLeft = 60, kTop = 20, kBottom = 370;
  const double width = kLeft + kSlot * static_cast<double>(boxes.size()) + 20;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  fixed2(width) + "\" height=\"420\" viewBox=\"0 0 " +
                  fixed2(width) + " 420\">\n<rect width=\"" + fixed2(width) +
                  "\" height=\"420\" fill=\"white\"/>\n";
  if (boxes.empty()) {
    svg_text(s, width / 2, 210, "middle", "no partitions to draw");
    s += "</svg>\n";
    return s;
  }
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const BoxplotStats& b : boxes) {
    ylo = std::min({ylo, b.whisker_lo, b.q1});
    yhi = std::max({yhi, b.whisker_hi, b.q3});
    for (double o : b.outliers) {
      ylo = std::min(ylo, o);
      yhi = std::max(yhi, o);
    }
  }
  const double pad = (yhi - ylo) * 0.05 + 1e-9;
  const LinearMap Y{ylo - pad, yhi + pad, kBottom, kTop};

  svg_line(s, kLeft, kTop, kLeft, kBottom, "#333333");
  for (int i = 0; i <= 4; ++i) {
    const double yv = (ylo - pad) + (yhi - ylo + 2 * pad) * i / 4.0;
    const double py = Y(yv);
    svg_line(s, kLeft - 5, py, kLeft, py, "#333333");
    svg_text(s, kLeft - 8, py + 4, "end", fixed2(yv));
  }
  if (ylo < 0.0 && yhi > 0.0) {
    svg_line(s, kLeft, Y(0.0), width - 20, Y(0.0), "#999999",
             " stroke-dasharray=\"4 3\"");
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BoxplotStats& b = boxes[i];
    const double cx = kLeft + kSlot * static_cast<double>(i) + kSlot / 2;
    svg_line(s, cx, Y(b.q1), cx, Y(b.whisker_lo), "#333333");
    svg_line(s, cx - 15, Y(b.whisker_lo), cx + 15, Y(b.whisker_lo),
             "#333333");
    svg_line(s, cx, Y(b.q3), cx, Y(b.whisker_hi), "#333333");
    svg_line(s, cx - 15, Y(b.whisker_hi), cx + 15, Y(b.whisker_hi),
             "#333333");
    s += "<rect x=\"" + fixed2(cx - 25) + "\" y=\"" + fixed2(Y(b.q3)) +
         "\" width=\"50\" height=\"" + fixed2(Y(b.q1) - Y(b.q3)) +
         "\" fill=\"#dbe9f6\" stroke=\"#333333\"/>\n";
    svg_line(s, cx - 25, Y(b.median), cx + 25, Y(b.median), "#d65f5f",
             " stroke-width=\"2\"");
    for (double o : b.outliers) {
      s += "<circle cx=\"" + fixed2(cx) + "\" cy=\"" + fixed2(Y(o)) +
           "\" r=\"2.5\" fill=\"none\" stroke=\"#333333\"/>\n";
    }
    svg_text(s, cx, kBottom + 18, "middle", b.key);
  }
  svg_text(s, 15, (kTop + kBottom) / 2, "middle", "residual",
           " transform=\"rotate(-90 15 195)\"");
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// rank internals

std::string hp_text(const RfHyperparams& hp) {
  return "n_estimators=" + std::to_string(hp.n_estimators) +
         " max_depth=" + std::to_string(hp.max_depth) +
         " min_samples_split=" + std::to_string(hp.min_samples_split) +
         " min_samples_leaf=" + std::to_string(hp.min_samples_leaf) +
         " bootstrap=" + bool_text(hp.bootstrap);
}

ordered_json hp_json(const RfHyperparams& hp) {
  ordered_json j;
  j["n_estimators"] = hp.n_estimators;
  j["max_depth"] = hp.max_depth;
  j["min_samples_split"] = hp.min_samples_split;
  j["min_samples_leaf"] = hp.min_samples_leaf;
  j["bootstrap"] = hp.bootstrap;
  return j;
}

bool same_hp(const RfHyperparams& a, const RfHyperparams& b) {
  return a.n_estimators == b.n_estimators && a.max_depth == b.max_depth &&
         a.min_samples_split == b.min_samples_split &&
         a.min_samples_leaf == b.min_samples_leaf &&
         a.bootstrap == b.bootstrap;
}

std::string grid_cells_csv(const GridSearchResult& gs) {
  TextTable t;
  t.header = {"cell",    "n_estimators", "max_depth", "min_samples_split",
              "min_samples_leaf", "bootstrap", "cv_rmse", "best"};
  for (const GridCell& c : gs.cells) {
    t.rows.push_back({std::to_string(c.index),
                      std::to_string(c.hp.n_estimators),
                      std::to_string(c.hp.max_depth),
                      std::to_string(c.hp.min_samples_split),
                      std::to_string(c.hp.min_samples_leaf),
                      bool_text(c.hp.bootstrap),
                      format_fixed(c.cv_rmse, kTableDecimals),
                      bool_text(same_hp(c.hp, gs.best))});
  }
  return t.to_csv();
}

// ---------------------------------------------------------------------------
// manifest

std::string file_checksum(const std::string& path) {
  return hex64(fnv1a64(read_file(path)));
}

std::string scheme_list_text(const RunConfig& cfg) {
  std::vector<std::string> names;
  for (Scheme s : schemes_of(cfg)) names.emplace_back(to_string(s));
  return join(names, ",");
}

std::string family_list_text(const RunConfig& cfg) {
  std::vector<std::string> names;
  for (Family f : families_of(cfg)) names.emplace_back(to_string(f));
  return join(names, ",");
}

std::string manifest_text(const RunConfig& cfg,
                          const std::vector<std::string>& written) {
  namespace fs = std::filesystem;
  std::string m;
  m += "command=report\n";
  m += "records=" + cfg.records_path + "\n";
  m += "records_fnv1a64=" + file_checksum(cfg.records_path) + "\n";
  if (!cfg.profiles_path.empty()) {
    m += "profiles=" + cfg.profiles_path + "\n";
    m += "profiles_fnv1a64=" + file_checksum(cfg.profiles_path) + "\n";
  }
  if (!cfg.stopwords_path.empty()) {
    m += "stopwords=" + cfg.stopwords_path + "\n";
    m += "stopwords_fnv1a64=" + file_checksum(cfg.stopwords_path) + "\n";
  }
  m += "features=" + to_string(cfg.features) + "\n";
  m += "schemes=" + scheme_list_text(cfg) + "\n";
  m += "families=" + family_list_text(cfg) + "\n";
  m += "k=" + std::to_string(cfg.cv.k) + "\n";
  m += "seed=" + std::to_string(cfg.cv.seed) + "\n";
  m += "shuffle=" + bool_text(cfg.cv.shuffle) + "\n";
  m += "size_scaling=" + std::string(to_string(cfg.scaling)) + "\n";
  m += "min_partition=" + std::to_string(cfg.min_partition_size) + "\n";
  m += "format=" + std::string(to_string(cfg.format)) + "\n";
  for (const std::string& name : written) {
    m += "output " + name + " fnv1a64=" +
         file_checksum((fs::path(cfg.out_dir) / name).string()) + "\n";
  }
  return m;
}

}  // namespace

OutputFormat output_format_from(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  if (text == "md") return OutputFormat::md;
  throw Error(errc::usage, "unknown format '" + std::string(text) +
                               "' (expected csv, json, or md)");
}

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::csv:
      return "csv";
    case OutputFormat::json:
      return "json";
    case OutputFormat::md:
      return "md";
  }
  return "?";
}

const EvalCell& EvalGrid::at(std::size_t family_index,
                             std::size_t scheme_index) const {
  return cells.at(family_index * schemes.size() + scheme_index);
}

EvalGrid compute_eval_grid(const std::vector<ExperimentRecord>& records,
                           const Featurizer& featurizer,
                           const RunConfig& cfg) {
  EvalGrid grid;
  grid.features = cfg.features;
  grid.families = families_of(cfg);
  grid.schemes = schemes_of(cfg);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Family family : grid.families) {
    for (Scheme scheme : grid.schemes) {
      EvalCell cell;
      cell.family = family;
      cell.scheme = scheme;
      const PredictorSpec spec{family, cfg.features};
      try {
        validate_spec(spec);
        cell.report = evaluate_scheme(records, scheme, spec, cfg.cv,
                                      featurizer, cfg.min_partition_size);
      } catch (const Error& e) {
        cell.report.scheme = scheme;
        cell.report.spec = spec;
        cell.report.overall_rmse = nan;
        cell.report.weighted_overall_rmse = nan;
        cell.report.notes.push_back(std::string("not assessable: ") +
                                    e.what());
      }
      grid.cells.push_back(std::move(cell));
    }
  }

  const std::size_t nf = grid.families.size();
  const std::size_t ns = grid.schemes.size();
  auto cell_at = [&grid, ns](std::size_t fi, std::size_t si) -> EvalCell& {
    return grid.cells[fi * ns + si];
  };
  for (std::size_t si = 0; si < ns; ++si) {
    std::size_t best = nf;
    for (std::size_t fi = 0; fi < nf; ++fi) {
      const double v = cell_at(fi, si).report.overall_rmse;
      if (!std::isfinite(v)) continue;
      if (best == nf || v < cell_at(best, si).report.overall_rmse) best = fi;
    }
    if (best < nf) cell_at(best, si).best_family_in_scheme = true;
  }
  for (std::size_t fi = 0; fi < nf; ++fi) {
    std::size_t best = ns;
    for (std::size_t si = 0; si < ns; ++si) {
      const double v = cell_at(fi, si).report.overall_rmse;
      if (!std::isfinite(v)) continue;
      if (best == ns || v < cell_at(fi, best).report.overall_rmse) best = si;
    }
    if (best < ns) cell_at(fi, best).best_scheme_in_family = true;
  }
  return grid;
}

std::vector<std::string> run_evaluate(const RunConfig& cfg,
                                      std::ostream& log) {
  const Loaded in = load_inputs(cfg);
  const Featurizer fz =
      make_featurizer(in.records, cfg.features, in.profiles, cfg.scaling);
  const EvalGrid grid = compute_eval_grid(in.records, fz, cfg);

  TextTable table;
  table.header = {"family",        "scheme",
                  "features",      "k",
                  "seed",          "overall_rmse",
                  "weighted_rmse", "best_family_in_scheme",
                  "best_scheme_in_family", "notes"};
  for (const EvalCell& cell : grid.cells) {
    table.rows.push_back(
        {std::string(to_string(cell.family)),
         std::string(to_string(cell.scheme)), to_string(cfg.features),
         std::to_string(cfg.cv.k), std::to_string(cfg.cv.seed),
         format_fixed(cell.report.overall_rmse, kTableDecimals),
         format_fixed(cell.report.weighted_overall_rmse, kTableDecimals),
         bool_text(cell.best_family_in_scheme),
         bool_text(cell.best_scheme_in_family),
         join(cell.report.notes, "; ")});
  }

  // Fold-level detail rides along in the JSON form only.
  ordered_json extra;
  ordered_json detail = ordered_json::array();
  for (const EvalCell& cell : grid.cells) {
    ordered_json c;
    c["family"] = std::string(to_string(cell.family));
    c["scheme"] = std::string(to_string(cell.scheme));
    ordered_json parts = ordered_json::array();
    for (const PartitionCv& p : cell.report.partitions) {
      ordered_json pj;
      pj["key"] = p.key;
      pj["n"] = p.n;
      pj["k_used"] = p.k_used;
      pj["assessable"] = p.assessable;
      pj["avg_rmse"] = format_fixed(p.avg_rmse, kPlotDecimals);
      ordered_json folds = ordered_json::array();
      for (double f : p.fold_rmse) {
        folds.push_back(format_fixed(f, kPlotDecimals));
      }
      pj["fold_rmse"] = std::move(folds);
      pj["notes"] = p.notes;
      parts.push_back(std::move(pj));
    }
    c["partitions"] = std::move(parts);
    detail.push_back(std::move(c));
  }
  extra["detail"] = std::move(detail);

  std::vector<std::string> notes;
  for (const EvalCell& cell : grid.cells) {
    for (const auto& n : cell.report.notes) {
      notes.push_back(std::string(to_string(cell.family)) + " x " +
                      std::string(to_string(cell.scheme)) + ": " + n);
    }
  }

  std::vector<std::string> written;
  write_into(cfg, "rmse_grid" + file_extension(cfg.format),
             render_document("cross-validated RMSE by family and scheme",
                             table, notes, cfg.format, &extra),
             written);

  const EvalCell* best = nullptr;
  for (const EvalCell& cell : grid.cells) {
    if (!std::isfinite(cell.report.overall_rmse)) continue;
    if (!best || cell.report.overall_rmse < best->report.overall_rmse) {
      best = &cell;
    }
  }
  log << "evaluated " << grid.cells.size() << " cells";
  if (best) {
    log << "; lowest overall RMSE "
        << format_fixed(best->report.overall_rmse, kTableDecimals) << " at "
        << to_string(best->family) << " x " << to_string(best->scheme);
  }
  log << "\n";
  return written;
}

std::vector<std::string> run_diagnose(const RunConfig& cfg,
                                      std::ostream& log) {
  const Loaded in = load_inputs(cfg);
  const DiagnoseData d = compute_diagnose(cfg, in);

  TextTable table;
  table.header = {"partition",   "n",        "normality_stat",
                  "normality_p", "hetero_stat", "hetero_p",
                  "homoscedastic", "notes"};
  for (const DiagnosticsResult& r : d.results) {
    table.rows.push_back(
        {r.partition_key, std::to_string(r.n),
         opt_fixed(r.normality_stat, kTableDecimals),
         opt_fixed(r.normality_p, kTableDecimals),
         opt_fixed(r.hetero_stat, kTableDecimals),
         opt_fixed(r.hetero_p, kTableDecimals),
         r.homoscedastic ? bool_text(*r.homoscedastic) : "NA",
         join(r.notes, "; ")});
  }

  std::vector<std::string> written;
  const std::string title = "residual diagnostics, " +
                            std::string(to_string(d.spec.family)) + " x " +
                            std::string(to_string(d.scheme));
  write_into(cfg, "diagnostics" + file_extension(cfg.format),
             render_document(title, table, d.notes, cfg.format), written);
  write_into(cfg, "residuals_fitted.csv", residuals_fitted_csv(d), written);
  write_into(cfg, "residual_boxplot.csv", boxplot_csv(d.boxes), written);

  for (const DiagnosticsResult& r : d.results) {
    log << r.partition_key << ": n=" << r.n << " normality_p="
        << opt_fixed(r.normality_p, kTableDecimals) << " hetero_p="
        << opt_fixed(r.hetero_p, kTableDecimals) << " homoscedastic="
        << (r.homoscedastic ? bool_text(*r.homoscedastic) : "NA") << "\n";
  }
  return written;
}

std::vector<std::string> run_rank(const RunConfig& cfg, std::ostream& log) {
  const Loaded in = load_inputs(cfg);

  FeatureSet set = cfg.features;
  std::vector<std::string> doc_notes;
  if (set.jsd && !all_have_jsd(in.records)) {
    set.jsd = false;
    doc_notes.push_back(
        "jsd unavailable: records carry no divergence values; ranking covers "
        "the remaining features");
  }
  if (set.count() == 0) {
    throw Error(errc::empty_analysis, "no features available to rank");
  }

  const Featurizer fz =
      make_featurizer(in.records, set, in.profiles, cfg.scaling);
  const FeatureMatrix m = feature_matrix(fz.all(in.records), set);
  ImportanceReport report = importance_report(m, RfHyperparams{}, cfg.cv.seed);
  report.partial = report.partial || !(set == cfg.features);
  for (const auto& n : report.notes) doc_notes.push_back(n);

  TextTable table;
  table.header = {"feature",     "pearson_r",   "pearson_p", "pearson_rank",
                  "pearson_tied", "weight",     "weight_rank", "weight_tied",
                  "rf_percent",  "rf_rank",     "rf_tied"};
  for (const ImportanceEntry& e : report.entries) {
    table.rows.push_back(
        {e.name, opt_fixed(e.pearson_r, kTableDecimals),
         opt_fixed(e.pearson_p, kTableDecimals), rank_text(e.pearson_rank),
         bool_text(e.pearson_tied), opt_fixed(e.weight, kTableDecimals),
         rank_text(e.weight_rank), bool_text(e.weight_tied),
         opt_fixed(e.rf_percent, kTableDecimals), rank_text(e.rf_rank),
         bool_text(e.rf_tied)});
  }

  ordered_json extra;
  extra["partial"] = report.partial;
  extra["rf_params"] = hp_json(report.rf_params);

  GridSearchResult gs;
  if (cfg.run_grid_search) {
    gs = grid_search_rf(m, default_rf_grid(), cfg.cv, cfg.grid_stride);
    doc_notes.push_back("grid search best: " + hp_text(gs.best) +
                        ", cv_rmse " +
                        format_fixed(gs.best_rmse, kTableDecimals));
    ordered_json gj;
    gj["best"] = hp_json(gs.best);
    gj["best_rmse"] = format_fixed(gs.best_rmse, kTableDecimals);
    gj["cells"] = gs.cells.size();
    extra["grid_search"] = std::move(gj);
  }

  std::vector<std::string> written;
  write_into(cfg, "importance" + file_extension(cfg.format),
             render_document("feature importance rankings", table, doc_notes,
                             cfg.format, &extra),
             written);
  if (cfg.run_grid_search) {
    write_into(cfg, "grid_search.csv", grid_cells_csv(gs), written);
  }

  if (report.partial) {
    log << "note: partial ranking; " << join(doc_notes, "; ") << "\n";
  }
  log << "ranked " << report.entries.size() << " features\n";
  if (cfg.run_grid_search) {
    log << "grid search best: " << hp_text(gs.best) << ", cv_rmse "
        << format_fixed(gs.best_rmse, kTableDecimals) << "\n";
  }
  return written;
}

std::vector<std::string> run_report(const RunConfig& cfg, std::ostream& log) {
  std::vector<std::string> written;
  for (auto& n : run_evaluate(cfg, log)) written.push_back(std::move(n));
  for (auto& n : run_diagnose(cfg, log)) written.push_back(std::move(n));

  // The bundle ranks over everything the inputs can support, degrading with
  // a note where a feature is missing rather than failing.
  RunConfig rank_cfg = cfg;
  rank_cfg.features = FeatureSet{true, true, !cfg.profiles_path.empty()};
  for (auto& n : run_rank(rank_cfg, log)) written.push_back(std::move(n));

  const Loaded in = load_inputs(cfg);
  const PlotData pd = compute_plots(cfg, in);
  write_into(cfg, "scatter_points.csv", scatter_csv(pd), written);
  write_into(cfg, "fitted_curves.csv", curves_csv(pd), written);
  write_into(cfg, "scatter.svg", scatter_svg(pd), written);
  const DiagnoseData dd = compute_diagnose(cfg, in);
  write_into(cfg, "residual_boxplot.svg", boxplot_svg(dd.boxes), written);

  // The manifest goes last so it can checksum every other artifact.
  write_into(cfg, "manifest.txt", manifest_text(cfg, written), written);
  log << "report bundle: " << written.size() << " files in " << cfg.out_dir
      << "\n";
  return written;
}

double jsd_between_files(const std::string& path_a, const std::string& path_b,
                         const std::string& stopwords_path) {
  const std::set<std::string> stopwords = stopwords_of(stopwords_path);
  return corpus_jsd(read_file(path_a), read_file(path_b), stopwords);
}

void jsd_batch(const std::string& manifest_path,
               const std::string& stopwords_path, std::ostream& out) {
  const CsvTable pairs = read_csv_file(manifest_path);
  if (pairs.header.size() < 2) {
    throw Error(errc::usage,
                "pair manifest needs two path columns, got " +
                    std::to_string(pairs.header.size()));
  }
  const std::set<std::string> stopwords = stopwords_of(stopwords_path);
  out << pairs.header[0] << ',' << pairs.header[1] << ",jsd\n";
  for (const auto& row : pairs.rows) {
    out << row[0] << ',' << row[1] << ','
        << format_fixed(corpus_jsd(read_file(row[0]), read_file(row[1]),
                                   stopwords),
                        kPlotDecimals)
        << '\n';
  }
}

}  // namespace mtperf
