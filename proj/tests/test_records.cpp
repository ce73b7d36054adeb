#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mtperf/error.hpp"
#include "mtperf/records.hpp"
#include "testutil.hpp"

using namespace mtperf;

namespace {

const std::string kHeader =
    "finetune_corpus,finetune_size,test_corpus,target_lang,spbleu,jsd\n";

std::vector<ExperimentRecord> parse(const std::string& rows) {
  std::istringstream in(kHeader + rows);
  return load_records(in, "mem");
}

std::vector<ExperimentRecord> bundled() {
  return load_records_file(std::string(MTPERF_DATA_DIR) + "/experiments.csv");
}

}  // namespace

TEST_CASE("bundled experiment table loads completely") {
  auto records = bundled();
  CHECK(records.size() == 99);

  std::map<Corpus, int> finetune_counts;
  std::map<Lang, int> lang_counts;
  for (const auto& r : records) {
    ++finetune_counts[r.finetune_corpus];
    ++lang_counts[r.target_lang];
    CHECK_FALSE(r.jsd.has_value());  // the bundled table carries no jsd
    CHECK(r.finetune_size > 0);
  }
  CHECK(finetune_counts[Corpus::gov] == 54);
  CHECK(finetune_counts[Corpus::bible] == 45);
  CHECK(lang_counts[Lang::ka] == 18);
  CHECK(lang_counts[Lang::gu] == 18);
  CHECK(lang_counts[Lang::hi] == 21);
  CHECK(lang_counts[Lang::si] == 21);
  CHECK(lang_counts[Lang::ta] == 21);
}

TEST_CASE("bundled scores match documented ranges per domain") {
  auto records = bundled();
  double in_lo = 1e9, in_hi = -1e9, out_lo = 1e9, out_hi = -1e9;
  for (const auto& r : records) {
    if (domain_category(r) == DomainCategory::in_domain) {
      in_lo = std::min(in_lo, r.spbleu);
      in_hi = std::max(in_hi, r.spbleu);
    } else {
      out_lo = std::min(out_lo, r.spbleu);
      out_hi = std::max(out_hi, r.spbleu);
    }
  }
  // Out-of-domain scores attain both documented endpoints.
  CHECK(out_lo == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(out_hi == doctest::Approx(19.9).epsilon(1e-12));
  // In-domain scores stay within the documented envelope and attain the top.
  CHECK(in_lo >= 6.5);
  CHECK(in_lo == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(in_hi == doctest::Approx(49.5).epsilon(1e-12));
}

TEST_CASE("domain category depends on corpus agreement") {
  auto in = testutil::record(Corpus::gov, 1000, Corpus::gov, Lang::ka, 10.0);
  auto cross = testutil::record(Corpus::gov, 1000, Corpus::bible, Lang::ka, 10.0);
  auto flores = testutil::record(Corpus::gov, 1000, Corpus::flores, Lang::ka, 10.0);
  CHECK(domain_category(in) == DomainCategory::in_domain);
  CHECK(domain_category(cross) == DomainCategory::out_domain);
  CHECK(domain_category(flores) == DomainCategory::out_domain);
}

TEST_CASE("partition keys follow the scheme") {
  auto r = testutil::record(Corpus::gov, 1000, Corpus::flores, Lang::si, 24.0);
  CHECK(partition_key(r, Scheme::none) == "all");
  CHECK(partition_key(r, Scheme::by_finetune) == "gov");
  CHECK(partition_key(r, Scheme::by_test) == "flores");
  CHECK(partition_key(r, Scheme::by_lang) == "si");
  CHECK(partition_key(r, Scheme::by_finetune_test) == "gov-flores");
}

TEST_CASE("partitions cover the records disjointly in key order") {
  auto records = bundled();
  for (Scheme scheme : {Scheme::none, Scheme::by_finetune, Scheme::by_test,
                        Scheme::by_lang, Scheme::by_finetune_test}) {
    auto parts = partition(records, scheme);
    std::size_t total = 0;
    std::vector<std::string> keys;
    for (const auto& p : parts) {
      total += p.records.size();
      keys.push_back(p.key);
    }
    CHECK(total == records.size());
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    CHECK(std::set<std::string>(keys.begin(), keys.end()).size() ==
          keys.size());
  }
}

TEST_CASE("bundled pairwise partitions have the expected keys and sizes") {
  auto parts = partition(bundled(), Scheme::by_finetune_test);
  REQUIRE(parts.size() == 6);
  std::vector<std::string> keys;
  for (const auto& p : parts) keys.push_back(p.key);
  CHECK(keys == std::vector<std::string>{"bible-bible", "bible-flores",
                                         "bible-gov", "gov-bible",
                                         "gov-flores", "gov-gov"});
  for (const auto& p : parts) {
    // gov was fine-tuned at one more size than bible, hence 18 versus 15.
    const std::size_t expected = p.key.rfind("gov-", 0) == 0 ? 18 : 15;
    CHECK(p.records.size() == expected);
  }
}

TEST_CASE("records keep their input order inside a partition") {
  auto records = bundled();
  auto parts = partition(records, Scheme::by_lang);
  for (const auto& p : parts) {
    for (std::size_t i = 1; i < p.records.size(); ++i) {
      // Input file is ordered by size within language blocks, so order
      // preservation is observable through the sizes.
      const auto& a = p.records[i - 1];
      const auto& b = p.records[i];
      const bool same_pair = a.finetune_corpus == b.finetune_corpus &&
                             a.test_corpus == b.test_corpus;
      if (same_pair) CHECK(a.finetune_size <= b.finetune_size);
    }
  }
}

TEST_CASE("small partitions are dropped with a report, never silently") {
  auto parts = partition(bundled(), Scheme::by_finetune_test);
  auto filtered = filter_small_partitions(parts, 16);
  CHECK(filtered.kept.size() == 3);  // the three gov-* groups of 18
  CHECK(filtered.removed.size() == 3);
  for (const auto& [key, size] : filtered.removed) {
    CHECK(key.rfind("bible-", 0) == 0);
    CHECK(size == 15);
  }

  CHECK_THROWS_AS(filter_small_partitions(parts, 100), Error);
  try {
    filter_small_partitions(parts, 100);
  } catch (const Error& e) {
    CHECK(e.kind() == errc::empty_analysis);
  }
  CHECK_THROWS_AS(filter_small_partitions(parts, 0), Error);
}

TEST_CASE("scheme names round-trip and unknown names are refused") {
  for (Scheme s : {Scheme::none, Scheme::by_finetune, Scheme::by_test,
                   Scheme::by_lang, Scheme::by_finetune_test}) {
    CHECK(scheme_from(to_string(s)) == s);
  }
  CHECK_THROWS_AS(scheme_from("by_magic"), Error);
}

TEST_CASE("record parser accepts a minimal well-formed table") {
  auto records = parse("gov,1000,flores,ka,2.2,\nbible,500,bible,ta,31.5,0.25\n");
  REQUIRE(records.size() == 2);
  CHECK(records[0].finetune_corpus == Corpus::gov);
  CHECK_FALSE(records[0].jsd.has_value());
  CHECK(records[1].jsd == doctest::Approx(0.25));
}

TEST_CASE("record parser rejects defects with their line number") {
  auto expect_kind = [](const std::string& rows, errc kind,
                        const std::string& fragment) {
    try {
      parse(rows);
      FAIL_CHECK("expected a parse error for: " << rows);
    } catch (const Error& e) {
      CHECK(e.kind() == kind);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };

  // First data row is line 2 (the header is line 1).
  expect_kind("moon,1000,flores,ka,2.2,\n", errc::malformed_row, "line 2");
  expect_kind("flores,1000,gov,ka,2.2,\n", errc::malformed_row, "flores");
  expect_kind("gov,1000,flores,xx,2.2,\n", errc::malformed_row, "xx");
  expect_kind("gov,0,flores,ka,2.2,\n", errc::out_of_range, "positive");
  expect_kind("gov,1000,flores,ka,101,\n", errc::out_of_range, "spbleu");
  expect_kind("gov,1000,flores,ka,abc,\n", errc::malformed_row, "abc");
  expect_kind("gov,1000,flores,ka,2.2,1.5\n", errc::out_of_range, "jsd");
  expect_kind("gov,1000,flores,ka,2.2\n", errc::malformed_row, "line 2");
  expect_kind(
      "gov,1000,flores,ka,2.2,\ngov,1000,flores,ka,3.3,\n",
      errc::duplicate_key, "line 3");
}

TEST_CASE("record parser requires the documented header") {
  std::istringstream in("a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(load_records(in, "mem"), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_records(empty, "mem"), Error);
}

TEST_CASE("language profiles load with all six distances") {
  auto profiles = load_language_profiles_file(std::string(MTPERF_DATA_DIR) +
                                              "/lang_profiles.csv");
  REQUIRE(profiles.size() == 5);
  const auto& ta = profiles.at(Lang::ta);
  CHECK(ta.dists == std::array<double, 6>{0.40, 1.00, 0.71, 0.57, 0.50, 0.60});
  const auto& gu = profiles.at(Lang::gu);
  CHECK(gu.dists[0] == doctest::Approx(0.30));
}

TEST_CASE("profile parser rejects duplicates and out-of-range distances") {
  const std::string header = "lang,d_geo,d_gen,d_syn,d_pho,d_inv,d_fea\n";
  {
    std::istringstream in(header +
                          "ka,0.4,1.0,0.6,0.3,0.4,0.5\n"
                          "ka,0.4,1.0,0.6,0.3,0.4,0.5\n");
    CHECK_THROWS_AS(load_language_profiles(in, "mem"), Error);
  }
  {
    std::istringstream in(header + "ka,0.4,1.2,0.6,0.3,0.4,0.5\n");
    try {
      load_language_profiles(in, "mem");
      FAIL_CHECK("expected out_of_range");
    } catch (const Error& e) {
      CHECK(e.kind() == errc::out_of_range);
    }
  }
  {
    std::istringstream in("lang,d_geo\nka,0.4\n");
    CHECK_THROWS_AS(load_language_profiles(in, "mem"), Error);
  }
}
