#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtperf/records.hpp"

namespace mtperf {

// Which predictor inputs to assemble: normalized size, corpus divergence,
// and/or the six language distances.
struct FeatureSet {
  bool size = true;
  bool jsd = false;
  bool lang = false;

  int count() const { return (size ? 1 : 0) + (jsd ? 1 : 0) + (lang ? 6 : 0); }
  bool operator==(const FeatureSet&) const = default;
};

// Parses comma-separated names out of {size, jsd, lang}; rejects anything
// else and the empty set.
FeatureSet parse_feature_set(std::string_view text);
std::string to_string(const FeatureSet& set);

// Column labels in canonical order: size, jsd, then the six distances.
std::vector<std::string> feature_names(const FeatureSet& set);

// Regression inputs for one record.
struct FeatureVector {
  double s_tilde = 0.0;                             // normalized size
  std::optional<double> j;                          // corpus divergence
  std::optional<std::array<double, 6>> lang_dists;  // order: kDistanceNames
  double response = 0.0;                            // measured spBLEU

  // Present features in canonical order; throws feature_unavailable if the
  // set requests something this vector does not carry.
  std::vector<double> values(const FeatureSet& set) const;
};

enum class SizeScaling { max, minmax };
SizeScaling size_scaling_from(std::string_view text);
std::string_view to_string(SizeScaling mode);

// Maps raw sentence-pair counts into [0, 1]. `max` divides by the largest
// size (range (0, 1], keeping 1/s_tilde finite for the size-law predictor);
// `minmax` maps the extremes onto 0 and 1 exactly.
class SizeScaler {
 public:
  static SizeScaler fit(const std::vector<long>& sizes, SizeScaling mode);
  double scale(long size) const;
  SizeScaling mode() const { return mode_; }

 private:
  SizeScaling mode_ = SizeScaling::max;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

// Convenience form of SizeScaler for a whole list at once.
std::vector<double> scale_size(const std::vector<long>& sizes,
                               SizeScaling mode);

// Unigram distribution over tokens; probabilities sum to 1 and are all
// positive. Map storage keeps iteration (and thus summation) order fixed.
struct TokenDistribution {
  std::size_t total = 0;
  std::map<std::string, double> probs;
};

// Deterministic Unicode-aware tokenizer:
//   - splits on whitespace and punctuation (ASCII punctuation, NBSP, danda,
//     curly quotes, en/em dash, ellipsis, guillemets); punctuation dropped;
//   - times (digit groups joined by ':', optional am/pm suffix, or bare
//     digits+am/pm like "3pm") become <TIME>;
//   - numerals (optional sign, digits, optional ,ddd grouping, optional
//     decimal part) become <NUMBER>;
//   - ASCII letters are lowercased, non-ASCII codepoints pass through
//     unchanged, so non-Latin scripts keep their case and form;
//   - literal <TIME> / <NUMBER> tokens are recognized verbatim, making the
//     normalization idempotent;
//   - stopwords are removed after placeholder replacement (supply lowercase
//     forms to match normalized tokens).
std::vector<std::string> tokenize_and_normalize(
    std::string_view text, const std::set<std::string>& stopwords);

// One token per line; blank lines ignored.
std::set<std::string> load_stopwords_file(const std::string& path);

// Maximum-likelihood unigram distribution; empty input is an error.
TokenDistribution frequency_distribution(
    const std::vector<std::string>& tokens);

// Base-2 Kullback-Leibler divergence sum_w P(w) log2(P(w)/Q(w)). Requires
// support(P) within support(Q); violations raise divergence_undefined.
double kl_divergence(const TokenDistribution& p, const TokenDistribution& q);

// Jensen-Shannon divergence with the equal mixture M = (P + Q) / 2 and
// base-2 logs, so the value lies in [0, 1]: 0 iff P = Q, 1 iff the supports
// are disjoint.
double jsd(const TokenDistribution& p, const TokenDistribution& q);

// tokenize -> distribution -> jsd for two raw corpus texts.
double corpus_jsd(std::string_view finetune_text, std::string_view test_text,
                  const std::set<std::string>& stopwords);

// Builds the requested features for one record; missing jsd or language
// profile raises feature_unavailable naming the record.
FeatureVector assemble_features(const ExperimentRecord& record,
                                const FeatureSet& set,
                                const ProfileTable& profiles,
                                const SizeScaler& scaler);

// Bundles everything needed to featurize records consistently across
// partitions (the scaler is fitted once, on the full record set).
struct Featurizer {
  FeatureSet set;
  ProfileTable profiles;  // may be empty when lang features are unused
  SizeScaler scaler;

  FeatureVector operator()(const ExperimentRecord& record) const;
  std::vector<FeatureVector> all(
      const std::vector<ExperimentRecord>& records) const;
};

Featurizer make_featurizer(const std::vector<ExperimentRecord>& records,
                           const FeatureSet& set, ProfileTable profiles,
                           SizeScaling mode);

}  // namespace mtperf
