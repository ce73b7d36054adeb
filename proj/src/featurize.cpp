#include "mtperf/featurize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mtperf/error.hpp"

namespace mtperf {

FeatureSet parse_feature_set(std::string_view text) {
  FeatureSet set{false, false, false};
  std::string token;
  std::istringstream in{std::string(text)};
  while (std::getline(in, token, ',')) {
    if (token == "size") {
      set.size = true;
    } else if (token == "jsd") {
      set.jsd = true;
    } else if (token == "lang") {
      set.lang = true;
    } else if (!token.empty()) {
      throw Error(errc::usage, "unknown feature '" + token +
                                   "' (expected size, jsd, lang)");
    }
  }
  if (set.count() == 0) {
    throw Error(errc::usage, "feature set must not be empty");
  }
  return set;
}

std::string to_string(const FeatureSet& set) {
  std::string out;
  auto add = [&out](std::string_view name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (set.size) add("size");
  if (set.jsd) add("jsd");
  if (set.lang) add("lang");
  return out;
}

std::vector<std::string> feature_names(const FeatureSet& set) {
  std::vector<std::string> names;
  if (set.size) names.emplace_back("s_tilde");
  if (set.jsd) names.emplace_back("jsd");
  if (set.lang) {
    for (auto name : kDistanceNames) names.emplace_back(name);
  }
  return names;
}

std::vector<double> FeatureVector::values(const FeatureSet& set) const {
  std::vector<double> out;
  if (set.size) out.push_back(s_tilde);
  if (set.jsd) {
    if (!j) throw Error(errc::feature_unavailable, "jsd not present");
    out.push_back(*j);
  }
  if (set.lang) {
    if (!lang_dists) {
      throw Error(errc::feature_unavailable, "language distances not present");
    }
    out.insert(out.end(), lang_dists->begin(), lang_dists->end());
  }
  return out;
}

SizeScaling size_scaling_from(std::string_view text) {
  if (text == "max") return SizeScaling::max;
  if (text == "minmax") return SizeScaling::minmax;
  throw Error(errc::usage,
              "unknown size scaling '" + std::string(text) + "'");
}

std::string_view to_string(SizeScaling mode) {
  return mode == SizeScaling::max ? "max" : "minmax";
}

SizeScaler SizeScaler::fit(const std::vector<long>& sizes, SizeScaling mode) {
  if (sizes.empty()) {
    throw Error(errc::degenerate_scaling, "no sizes to scale");
  }
  long lo = sizes[0], hi = sizes[0];
  for (long s : sizes) {
    if (s <= 0) {
      throw Error(errc::out_of_range,
                  "sizes must be positive, got " + std::to_string(s));
    }
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (mode == SizeScaling::minmax && lo == hi) {
    throw Error(errc::degenerate_scaling,
                "minmax scaling needs at least two distinct sizes (all are " +
                    std::to_string(lo) + ")");
  }
  SizeScaler scaler;
  scaler.mode_ = mode;
  scaler.lo_ = static_cast<double>(lo);
  scaler.hi_ = static_cast<double>(hi);
  return scaler;
}

double SizeScaler::scale(long size) const {
  double s = static_cast<double>(size);
  if (mode_ == SizeScaling::max) return s / hi_;
  return (s - lo_) / (hi_ - lo_);
}

std::vector<double> scale_size(const std::vector<long>& sizes,
                               SizeScaling mode) {
  SizeScaler scaler = SizeScaler::fit(sizes, mode);
  std::vector<double> out;
  out.reserve(sizes.size());
  for (long s : sizes) out.push_back(scaler.scale(s));
  return out;
}

namespace {

// --- tokenizer ------------------------------------------------------------

struct Codepoint {
  char32_t value;
  std::size_t length;  // bytes consumed
};

Codepoint decode_utf8(std::string_view text, std::size_t pos) {
  unsigned char b0 = static_cast<unsigned char>(text[pos]);
  auto cont = [&](std::size_t off) {
    return pos + off < text.size() &&
           (static_cast<unsigned char>(text[pos + off]) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = (b0 & 0x1F) << 6 |
                  (static_cast<unsigned char>(text[pos + 1]) & 0x3F);
    return {cp, 2};
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = (b0 & 0x0F) << 12 |
                  (static_cast<unsigned char>(text[pos + 1]) & 0x3F) << 6 |
                  (static_cast<unsigned char>(text[pos + 2]) & 0x3F);
    return {cp, 3};
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = (b0 & 0x07) << 18 |
                  (static_cast<unsigned char>(text[pos + 1]) & 0x3F) << 12 |
                  (static_cast<unsigned char>(text[pos + 2]) & 0x3F) << 6 |
                  (static_cast<unsigned char>(text[pos + 3]) & 0x3F);
    return {cp, 4};
  }
  // Malformed byte: pass through as an opaque word byte.
  return {b0, 1};
}

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }
bool is_ascii_alpha(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

bool is_separator(char32_t cp) {
  if (cp < 0x80) {
    return !is_ascii_digit(cp) && !is_ascii_alpha(cp);
  }
  switch (cp) {
    case 0x00A0:            // no-break space
    case 0x0964:            // danda
    case 0x0965:            // double danda
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
    case 0x2013: case 0x2014:                            // en/em dash
    case 0x2026:            // ellipsis
    case 0x00AB: case 0x00BB:                            // guillemets
      return true;
    default:
      return false;  // every other non-ASCII codepoint is a word character
  }
}

bool is_word_char(char32_t cp) { return !is_separator(cp); }

bool word_boundary_at(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return true;
  return !is_word_char(decode_utf8(text, pos).value);
}

std::size_t scan_digits(std::string_view text, std::size_t pos) {
  std::size_t end = pos;
  while (end < text.size() &&
         is_ascii_digit(static_cast<unsigned char>(text[end]))) {
    ++end;
  }
  return end;
}

// Matches am/pm case-insensitively; returns bytes consumed (0 or 2).
std::size_t scan_meridiem(std::string_view text, std::size_t pos) {
  if (pos + 2 > text.size()) return 0;
  char a = static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos])));
  char m = static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos + 1])));
  return ((a == 'a' || a == 'p') && m == 'm') ? 2 : 0;
}

// Time shapes: digits(:digits)+ with optional am/pm, or digits + am/pm.
// Returns the end position, or pos when no time starts here.
std::size_t match_time(std::string_view text, std::size_t pos) {
  std::size_t end = scan_digits(text, pos);
  if (end == pos) return pos;
  std::size_t groups = 0;
  while (end < text.size() && text[end] == ':') {
    std::size_t next = scan_digits(text, end + 1);
    if (next == end + 1) break;
    end = next;
    ++groups;
  }
  std::size_t suffix = scan_meridiem(text, end);
  if (groups == 0 && suffix == 0) return pos;  // bare digits are not a time
  end += suffix;
  return word_boundary_at(text, end) ? end : pos;
}

// Numeral shapes: optional sign, digits, optional ,ddd groups, optional
// .digits decimal part. Returns the end position, or pos on no match.
std::size_t match_number(std::string_view text, std::size_t pos) {
  std::size_t p = pos;
  if (p < text.size() && (text[p] == '+' || text[p] == '-')) ++p;
  std::size_t end = scan_digits(text, p);
  if (end == p) return pos;
  while (end + 3 < text.size() && text[end] == ',') {
    std::size_t g = scan_digits(text, end + 1);
    if (g != end + 4) break;  // a grouping comma takes exactly three digits
    end = g;
  }
  if (end + 1 < text.size() && text[end] == '.') {
    std::size_t d = scan_digits(text, end + 1);
    if (d > end + 1) end = d;
  }
  return word_boundary_at(text, end) ? end : pos;
}

constexpr std::string_view kTimeToken = "<TIME>";
constexpr std::string_view kNumberToken = "<NUMBER>";

std::size_t match_placeholder(std::string_view text, std::size_t pos,
                              std::string_view* which) {
  for (std::string_view tok : {kTimeToken, kNumberToken}) {
    if (text.substr(pos, tok.size()) == tok &&
        word_boundary_at(text, pos + tok.size())) {
      *which = tok;
      return pos + tok.size();
    }
  }
  return pos;
}

}  // namespace

std::vector<std::string> tokenize_and_normalize(
    std::string_view text, const std::set<std::string>& stopwords) {
  std::vector<std::string> tokens;
  auto emit = [&](std::string token) {
    if (!stopwords.contains(token)) tokens.push_back(std::move(token));
  };

  std::size_t i = 0;
  while (i < text.size()) {
    std::string_view placeholder;
    if (std::size_t end = match_placeholder(text, i, &placeholder); end > i) {
      emit(std::string(placeholder));
      i = end;
      continue;
    }
    Codepoint cp = decode_utf8(text, i);
    if (is_separator(cp.value)) {
      bool sign_start = (cp.value == U'+' || cp.value == U'-');
      if (sign_start) {
        if (std::size_t end = match_number(text, i); end > i) {
          emit(std::string(kNumberToken));
          i = end;
          continue;
        }
      }
      i += cp.length;
      continue;
    }
    if (is_ascii_digit(cp.value)) {
      if (std::size_t end = match_time(text, i); end > i) {
        emit(std::string(kTimeToken));
        i = end;
        continue;
      }
      if (std::size_t end = match_number(text, i); end > i) {
        emit(std::string(kNumberToken));
        i = end;
        continue;
      }
    }
    // Maximal run of word characters; ASCII letters lowercased in place.
    std::string token;
    while (i < text.size()) {
      Codepoint wc = decode_utf8(text, i);
      if (!is_word_char(wc.value)) break;
      if (wc.value < 0x80) {
        char c = static_cast<char>(wc.value);
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        token.push_back(c);
      } else {
        token.append(text.substr(i, wc.length));
      }
      i += wc.length;
    }
    emit(std::move(token));
  }
  return tokens;
}

std::set<std::string> load_stopwords_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_failure, "cannot open " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

TokenDistribution frequency_distribution(
    const std::vector<std::string>& tokens) {
  if (tokens.empty()) {
    throw Error(errc::empty_corpus, "no tokens left after preprocessing");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  TokenDistribution dist;
  dist.total = tokens.size();
  double n = static_cast<double>(tokens.size());
  for (const auto& [tok, c] : counts) {
    dist.probs.emplace(tok, static_cast<double>(c) / n);
  }
  return dist;
}

double kl_divergence(const TokenDistribution& p, const TokenDistribution& q) {
  double sum = 0.0;
  for (const auto& [tok, pw] : p.probs) {
    auto it = q.probs.find(tok);
    if (it == q.probs.end() || it->second <= 0.0) {
      throw Error(errc::divergence_undefined,
                  "token '" + tok + "' has probability 0 under the reference");
    }
    sum += pw * std::log2(pw / it->second);
  }
  return sum;
}

double jsd(const TokenDistribution& p, const TokenDistribution& q) {
  auto half_kl_to_mixture = [](const TokenDistribution& a,
                               const TokenDistribution& b) {
    double sum = 0.0;
    for (const auto& [tok, pw] : a.probs) {
      auto it = b.probs.find(tok);
      double qw = it == b.probs.end() ? 0.0 : it->second;
      double m = 0.5 * (pw + qw);
      sum += pw * std::log2(pw / m);
    }
    return 0.5 * sum;
  };
  double v = half_kl_to_mixture(p, q) + half_kl_to_mixture(q, p);
  // The value is mathematically confined to [0, 1]; shave off float dust.
  if (v < 0.0 && v > -1e-9) v = 0.0;
  if (v > 1.0 && v < 1.0 + 1e-9) v = 1.0;
  return v;
}

double corpus_jsd(std::string_view finetune_text, std::string_view test_text,
                  const std::set<std::string>& stopwords) {
  TokenDistribution p =
      frequency_distribution(tokenize_and_normalize(finetune_text, stopwords));
  TokenDistribution q =
      frequency_distribution(tokenize_and_normalize(test_text, stopwords));
  return jsd(p, q);
}

namespace {

std::string record_name(const ExperimentRecord& r) {
  return std::string(to_string(r.finetune_corpus)) + "/" +
         std::to_string(r.finetune_size) + "/" +
         std::string(to_string(r.test_corpus)) + "/" +
         std::string(to_string(r.target_lang));
}

}  // namespace

FeatureVector assemble_features(const ExperimentRecord& record,
                                const FeatureSet& set,
                                const ProfileTable& profiles,
                                const SizeScaler& scaler) {
  FeatureVector fv;
  fv.s_tilde = scaler.scale(record.finetune_size);
  fv.response = record.spbleu;
  if (set.jsd) {
    if (!record.jsd) {
      throw Error(errc::feature_unavailable,
                  "record " + record_name(record) + " carries no jsd value");
    }
    fv.j = *record.jsd;
  }
  if (set.lang) {
    auto it = profiles.find(record.target_lang);
    if (it == profiles.end()) {
      throw Error(errc::feature_unavailable,
                  "no language profile for record " + record_name(record));
    }
    fv.lang_dists = it->second.dists;
  }
  return fv;
}

FeatureVector Featurizer::operator()(const ExperimentRecord& record) const {
  return assemble_features(record, set, profiles, scaler);
}

std::vector<FeatureVector> Featurizer::all(
    const std::vector<ExperimentRecord>& records) const {
  std::vector<FeatureVector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back((*this)(r));
  return out;
}

Featurizer make_featurizer(const std::vector<ExperimentRecord>& records,
                           const FeatureSet& set, ProfileTable profiles,
                           SizeScaling mode) {
  std::vector<long> sizes;
  sizes.reserve(records.size());
  for (const auto& r : records) sizes.push_back(r.finetune_size);
  Featurizer f;
  f.set = set;
  f.profiles = std::move(profiles);
  f.scaler = SizeScaler::fit(sizes, mode);
  return f;
}

}  // namespace mtperf
