#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtperf {

enum class Corpus { bible, flores, gov };
enum class Lang { gu, hi, ka, si, ta };
enum class Scheme { none, by_finetune, by_test, by_lang, by_finetune_test };
enum class DomainCategory { in_domain, out_domain };

std::string_view to_string(Corpus c);
std::string_view to_string(Lang l);
std::string_view to_string(Scheme s);

// Parse helpers throw on unknown values, reporting `context` in the message.
Corpus corpus_from(std::string_view text, const std::string& context);
Lang lang_from(std::string_view text, const std::string& context);
Scheme scheme_from(std::string_view text);

// One fine-tune/test run: configuration plus its measured translation score.
struct ExperimentRecord {
  Corpus finetune_corpus;  // gov or bible (never flores)
  long finetune_size;      // sentence-pair count, > 0
  Corpus test_corpus;
  Lang target_lang;
  double spbleu;              // in [0, 100]
  std::optional<double> jsd;  // in [0, 1] when present
  std::string finetune_source;  // provenance note; never used in analysis
};

// Six typological distances from English, each in [0, 1].
struct LanguageProfile {
  Lang lang;
  std::array<double, 6> dists;  // order matches kDistanceNames
};

inline constexpr std::array<std::string_view, 6> kDistanceNames = {
    "d_geo", "d_gen", "d_syn", "d_pho", "d_inv", "d_fea"};

using ProfileTable = std::map<Lang, LanguageProfile>;

// Group of records sharing the configuration values named by a scheme.
struct Partition {
  std::string key;
  std::vector<ExperimentRecord> records;
};

// Loads records from CSV with columns finetune_corpus, finetune_size,
// test_corpus, target_lang, spbleu, optional jsd, optional finetune_source.
// Rejects malformed rows (with line numbers), out-of-range values, and
// duplicate (finetune_corpus, finetune_size, test_corpus, target_lang) keys.
std::vector<ExperimentRecord> load_records(std::istream& in,
                                           const std::string& origin);
std::vector<ExperimentRecord> load_records_file(const std::string& path);

// Loads one profile per language from CSV with columns lang, d_geo, d_gen,
// d_syn, d_pho, d_inv, d_fea. Distances outside [0, 1] are rejected.
ProfileTable load_language_profiles(std::istream& in,
                                    const std::string& origin);
ProfileTable load_language_profiles_file(const std::string& path);

// Key a record contributes under a scheme ("all" for the trivial scheme,
// "gov-flores" style pairs for by_finetune_test).
std::string partition_key(const ExperimentRecord& record, Scheme scheme);

// Disjoint cover of the records, ordered lexicographically by key. Pure:
// identical inputs produce identical partitions, with records kept in input
// order within each partition.
std::vector<Partition> partition(const std::vector<ExperimentRecord>& records,
                                 Scheme scheme);

// Partitions below the size floor are dropped but reported, never silent.
struct FilteredPartitions {
  std::vector<Partition> kept;
  std::vector<std::pair<std::string, std::size_t>> removed;  // key, size
};
FilteredPartitions filter_small_partitions(std::vector<Partition> partitions,
                                           int min_size);

// in_domain iff the fine-tuning and testing corpora coincide; a flores test
// can never be in-domain because flores is not a fine-tuning corpus.
DomainCategory domain_category(const ExperimentRecord& record);

}  // namespace mtperf
