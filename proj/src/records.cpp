#include "mtperf/records.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <tuple>

#include "mtperf/csv.hpp"
#include "mtperf/error.hpp"

namespace mtperf {

std::string_view to_string(Corpus c) {
  switch (c) {
    case Corpus::bible: return "bible";
    case Corpus::flores: return "flores";
    case Corpus::gov: return "gov";
  }
  return "?";
}

std::string_view to_string(Lang l) {
  switch (l) {
    case Lang::gu: return "gu";
    case Lang::hi: return "hi";
    case Lang::ka: return "ka";
    case Lang::si: return "si";
    case Lang::ta: return "ta";
  }
  return "?";
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::none: return "none";
    case Scheme::by_finetune: return "by_finetune";
    case Scheme::by_test: return "by_test";
    case Scheme::by_lang: return "by_lang";
    case Scheme::by_finetune_test: return "by_finetune_test";
  }
  return "?";
}

Corpus corpus_from(std::string_view text, const std::string& context) {
  if (text == "bible") return Corpus::bible;
  if (text == "flores") return Corpus::flores;
  if (text == "gov") return Corpus::gov;
  throw Error(errc::malformed_row,
              context + ": unknown corpus '" + std::string(text) + "'");
}

Lang lang_from(std::string_view text, const std::string& context) {
  if (text == "gu") return Lang::gu;
  if (text == "hi") return Lang::hi;
  if (text == "ka") return Lang::ka;
  if (text == "si") return Lang::si;
  if (text == "ta") return Lang::ta;
  throw Error(errc::malformed_row,
              context + ": unknown language '" + std::string(text) + "'");
}

Scheme scheme_from(std::string_view text) {
  if (text == "none") return Scheme::none;
  if (text == "by_finetune") return Scheme::by_finetune;
  if (text == "by_test") return Scheme::by_test;
  if (text == "by_lang") return Scheme::by_lang;
  if (text == "by_finetune_test") return Scheme::by_finetune_test;
  throw Error(errc::usage,
              "unknown partitioning scheme '" + std::string(text) + "'");
}

namespace {

double parse_double(const std::string& text, const std::string& context) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw Error(errc::malformed_row,
                context + ": not a number: '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& text, const std::string& context) {
  const char* begin = text.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw Error(errc::malformed_row,
                context + ": not an integer: '" + text + "'");
  }
  return v;
}

std::string row_context(const std::string& origin, std::size_t row_index) {
  // Header occupies line 1, so data row i lives on line i + 2.
  return origin + " line " + std::to_string(row_index + 2);
}

}  // namespace

std::vector<ExperimentRecord> load_records(std::istream& in,
                                           const std::string& origin) {
  CsvTable table = read_csv(in, origin);
  const int c_ft = table.column("finetune_corpus");
  const int c_size = table.column("finetune_size");
  const int c_test = table.column("test_corpus");
  const int c_lang = table.column("target_lang");
  const int c_spbleu = table.column("spbleu");
  const int c_jsd = table.column("jsd");
  const int c_src = table.column("finetune_source");
  if (c_ft < 0 || c_size < 0 || c_test < 0 || c_lang < 0 || c_spbleu < 0) {
    throw Error(errc::malformed_row,
                origin + ": header must name finetune_corpus, finetune_size, "
                         "test_corpus, target_lang, spbleu");
  }

  std::vector<ExperimentRecord> records;
  std::set<std::tuple<Corpus, long, Corpus, Lang>> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string ctx = row_context(origin, i);
    ExperimentRecord rec;
    rec.finetune_corpus = corpus_from(row[c_ft], ctx);
    if (rec.finetune_corpus == Corpus::flores) {
      throw Error(errc::malformed_row,
                  ctx + ": flores is not a fine-tuning corpus");
    }
    rec.finetune_size = parse_long(row[c_size], ctx);
    if (rec.finetune_size <= 0) {
      throw Error(errc::out_of_range,
                  ctx + ": finetune_size must be positive, got " +
                      std::to_string(rec.finetune_size));
    }
    rec.test_corpus = corpus_from(row[c_test], ctx);
    rec.target_lang = lang_from(row[c_lang], ctx);
    rec.spbleu = parse_double(row[c_spbleu], ctx);
    if (rec.spbleu < 0.0 || rec.spbleu > 100.0) {
      throw Error(errc::out_of_range, ctx + ": spbleu outside [0, 100]: " +
                                          row[c_spbleu]);
    }
    if (c_jsd >= 0 && !row[c_jsd].empty()) {
      double j = parse_double(row[c_jsd], ctx);
      if (j < 0.0 || j > 1.0) {
        throw Error(errc::out_of_range,
                    ctx + ": jsd outside [0, 1]: " + row[c_jsd]);
      }
      rec.jsd = j;
    }
    if (c_src >= 0) rec.finetune_source = row[c_src];

    auto key = std::make_tuple(rec.finetune_corpus, rec.finetune_size,
                               rec.test_corpus, rec.target_lang);
    if (!seen.insert(key).second) {
      throw Error(errc::duplicate_key,
                  ctx + ": duplicate configuration " +
                      std::string(to_string(rec.finetune_corpus)) + "/" +
                      std::to_string(rec.finetune_size) + "/" +
                      std::string(to_string(rec.test_corpus)) + "/" +
                      std::string(to_string(rec.target_lang)));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ExperimentRecord> load_records_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_failure, "cannot open " + path);
  return load_records(in, path);
}

ProfileTable load_language_profiles(std::istream& in,
                                    const std::string& origin) {
  CsvTable table = read_csv(in, origin);
  const int c_lang = table.column("lang");
  if (c_lang < 0) {
    throw Error(errc::malformed_row, origin + ": header must name lang");
  }
  std::array<int, 6> cols{};
  for (std::size_t d = 0; d < kDistanceNames.size(); ++d) {
    cols[d] = table.column(std::string(kDistanceNames[d]));
    if (cols[d] < 0) {
      throw Error(errc::malformed_row,
                  origin + ": missing column " +
                      std::string(kDistanceNames[d]));
    }
  }

  ProfileTable profiles;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string ctx = row_context(origin, i);
    LanguageProfile p;
    p.lang = lang_from(row[c_lang], ctx);
    for (std::size_t d = 0; d < cols.size(); ++d) {
      double v = parse_double(row[cols[d]], ctx);
      if (v < 0.0 || v > 1.0) {
        throw Error(errc::out_of_range,
                    ctx + ": " + std::string(kDistanceNames[d]) +
                        " outside [0, 1]: " + row[cols[d]]);
      }
      p.dists[d] = v;
    }
    if (!profiles.emplace(p.lang, p).second) {
      throw Error(errc::duplicate_key,
                  ctx + ": duplicate profile for " +
                      std::string(to_string(p.lang)));
    }
  }
  return profiles;
}

ProfileTable load_language_profiles_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_failure, "cannot open " + path);
  return load_language_profiles(in, path);
}

std::string partition_key(const ExperimentRecord& record, Scheme scheme) {
  switch (scheme) {
    case Scheme::none:
      return "all";
    case Scheme::by_finetune:
      return std::string(to_string(record.finetune_corpus));
    case Scheme::by_test:
      return std::string(to_string(record.test_corpus));
    case Scheme::by_lang:
      return std::string(to_string(record.target_lang));
    case Scheme::by_finetune_test:
      return std::string(to_string(record.finetune_corpus)) + "-" +
             std::string(to_string(record.test_corpus));
  }
  return "?";
}

std::vector<Partition> partition(const std::vector<ExperimentRecord>& records,
                                 Scheme scheme) {
  // std::map keeps keys lexicographically ordered; input order is preserved
  // within each partition.
  std::map<std::string, std::vector<ExperimentRecord>> groups;
  for (const auto& rec : records) {
    groups[partition_key(rec, scheme)].push_back(rec);
  }
  std::vector<Partition> out;
  out.reserve(groups.size());
  for (auto& [key, recs] : groups) {
    out.push_back(Partition{key, std::move(recs)});
  }
  return out;
}

FilteredPartitions filter_small_partitions(std::vector<Partition> partitions,
                                           int min_size) {
  if (min_size < 1) {
    throw Error(errc::usage, "min_size must be at least 1, got " +
                                 std::to_string(min_size));
  }
  FilteredPartitions result;
  for (auto& p : partitions) {
    if (p.records.size() < static_cast<std::size_t>(min_size)) {
      result.removed.emplace_back(p.key, p.records.size());
    } else {
      result.kept.push_back(std::move(p));
    }
  }
  if (result.kept.empty()) {
    throw Error(errc::empty_analysis,
                "every partition falls below the minimum size of " +
                    std::to_string(min_size));
  }
  return result;
}

DomainCategory domain_category(const ExperimentRecord& record) {
  return record.finetune_corpus == record.test_corpus
             ? DomainCategory::in_domain
             : DomainCategory::out_domain;
}

}  // namespace mtperf
