#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "rankem/data.hpp"

using namespace rankem;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("default spec produces the exact record counts") {
  SyntheticCorpusSpec spec;  // L=6, V_b=50, S=2, 5 topics, 4 groups per topic
  const Corpus corpus = generate(spec, 123);
  const std::size_t groups = spec.total_groups();
  CHECK(groups == 40);
  REQUIRE(corpus.monolingual.size() == 6);
  for (const auto& per_lang : corpus.monolingual) {
    CHECK(per_lang.size() == groups * spec.sentences_per_group);
  }
  CHECK(corpus.parallel.size() == spec.resolved_head_pairs().size() * groups * spec.sentences_per_group);
  CHECK(corpus.heldout.size() == groups * spec.num_languages);
  CHECK(spec.resolved_head_pairs() ==
        std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {0, 2}});
}

TEST_CASE("single-group corpus makes every cross-language pair rank 1") {
  SyntheticCorpusSpec spec;
  spec.num_languages = 2;
  spec.supertopics = 1;
  spec.topics_per_supertopic = 1;
  spec.groups_per_topic = 1;
  spec.head_language_pairs = {{0, 1}};
  const Corpus corpus = generate(spec, 9);
  for (const auto& [a, b] : corpus.parallel) {
    CHECK(ground_truth_rank(a, b) == 1);
  }
  for (const auto& a : corpus.heldout) {
    for (const auto& b : corpus.heldout) {
      CHECK(ground_truth_rank(a, b) == 1);
    }
  }
}

TEST_CASE("token ids stay inside each language's band") {
  SyntheticCorpusSpec spec;
  spec.noise = 0.3;
  const Corpus corpus = generate(spec, 5);
  auto check_record = [&](const CorpusRecord& rec) {
    const std::uint32_t lo = rec.sentence.language * spec.base_vocab;
    for (std::uint32_t t : rec.sentence.tokens) {
      CHECK(t >= lo);
      CHECK(t < lo + spec.base_vocab);
    }
    CHECK(rec.sentence.tokens.size() >= spec.min_sentence_len);
    CHECK(rec.sentence.tokens.size() <= spec.max_sentence_len);
  };
  for (const auto& per_lang : corpus.monolingual) {
    for (const auto& rec : per_lang) check_record(rec);
  }
  for (const auto& rec : corpus.heldout) check_record(rec);
}

TEST_CASE("long-tail languages own zero parallel records") {
  SyntheticCorpusSpec spec;
  const Corpus corpus = generate(spec, 17);
  std::set<std::uint32_t> parallel_langs;
  for (const auto& [a, b] : corpus.parallel) {
    parallel_langs.insert(a.sentence.language);
    parallel_langs.insert(b.sentence.language);
  }
  CHECK(parallel_langs == std::set<std::uint32_t>{0, 1, 2});
}

TEST_CASE("ground truth rank follows the hierarchy") {
  CorpusRecord a;
  a.group_id = 3;
  a.topic_id = 0;
  a.supertopic_id = 0;
  CHECK(ground_truth_rank(a, a) == 1);

  CorpusRecord b = a;
  b.group_id = 2;
  CHECK(ground_truth_rank(a, b) == 2);

  CorpusRecord c = a;
  c.group_id = 9;
  c.topic_id = 2;
  CHECK(ground_truth_rank(a, c) == 3);

  CorpusRecord d = a;
  d.group_id = 30;
  d.topic_id = 7;
  d.supertopic_id = 1;
  CHECK(ground_truth_rank(a, d) == 4);

  // Symmetry over every combination above.
  for (const auto* x : {&a, &b, &c, &d}) {
    for (const auto* y : {&a, &b, &c, &d}) {
      CHECK(ground_truth_rank(*x, *y) == ground_truth_rank(*y, *x));
    }
  }

  CorpusRecord missing;
  CHECK_THROWS_AS(ground_truth_rank(a, missing), std::invalid_argument);
}

TEST_CASE("same group and language means one shared token distribution") {
  SyntheticCorpusSpec spec;
  spec.noise = 0.0;
  spec.sentences_per_group = 400;  // large sample for the distribution test
  spec.num_languages = 2;
  spec.supertopics = 1;
  spec.topics_per_supertopic = 2;
  spec.groups_per_topic = 2;
  const Corpus corpus = generate(spec, 31);

  // Split group 0's sentences in half and compare token histograms with a
  // two-sample chi-square statistic.
  std::map<std::uint32_t, std::pair<double, double>> counts;
  double total1 = 0.0, total2 = 0.0;
  std::size_t index = 0;
  for (const auto& rec : corpus.monolingual[0]) {
    if (rec.group_id != 0) continue;
    const bool first_half = index++ < 200;
    for (std::uint32_t t : rec.sentence.tokens) {
      if (first_half) {
        counts[t].first += 1.0;
        total1 += 1.0;
      } else {
        counts[t].second += 1.0;
        total2 += 1.0;
      }
    }
  }
  double chi2 = 0.0;
  std::size_t cells = 0;
  for (const auto& [token, pair] : counts) {
    const double pooled = (pair.first + pair.second) / (total1 + total2);
    const double e1 = total1 * pooled;
    const double e2 = total2 * pooled;
    if (e1 < 5.0 || e2 < 5.0) continue;  // standard small-cell rule
    chi2 += (pair.first - e1) * (pair.first - e1) / e1;
    chi2 += (pair.second - e2) * (pair.second - e2) / e2;
    ++cells;
  }
  REQUIRE(cells >= 3);
  const double df = static_cast<double>(cells - 1);
  CHECK(chi2 < df + 5.0 * std::sqrt(2.0 * df));  // far beyond any sane quantile
}

TEST_CASE("generation is deterministic per seed") {
  SyntheticCorpusSpec spec;
  const Corpus a = generate(spec, 99);
  const Corpus b = generate(spec, 99);
  const Corpus c = generate(spec, 100);
  REQUIRE(a.heldout.size() == b.heldout.size());
  bool all_equal = true;
  for (std::size_t i = 0; i < a.heldout.size(); ++i) {
    all_equal = all_equal && a.heldout[i].sentence.tokens == b.heldout[i].sentence.tokens;
  }
  CHECK(all_equal);
  bool differs = false;
  for (std::size_t i = 0; i < a.heldout.size(); ++i) {
    differs = differs || a.heldout[i].sentence.tokens != c.heldout[i].sentence.tokens;
  }
  CHECK(differs);
}

TEST_CASE("jsonl round trip is lossless") {
  SyntheticCorpusSpec spec;
  spec.num_languages = 3;
  spec.sentences_per_group = 2;
  const Corpus corpus = generate(spec, 3);
  const auto path = temp_file("rankem_test_roundtrip.jsonl");
  save_jsonl(path.string(), corpus.heldout);
  const auto loaded = load_jsonl(path.string());
  REQUIRE(loaded.size() == corpus.heldout.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].sentence.tokens == corpus.heldout[i].sentence.tokens);
    CHECK(loaded[i].sentence.language == corpus.heldout[i].sentence.language);
    CHECK(loaded[i].group_id == corpus.heldout[i].group_id);
    CHECK(loaded[i].topic_id == corpus.heldout[i].topic_id);
    CHECK(loaded[i].supertopic_id == corpus.heldout[i].supertopic_id);
  }
  std::filesystem::remove(path);
}

TEST_CASE("jsonl load reports the malformed line and returns nothing") {
  const auto path = temp_file("rankem_test_badline.jsonl");
  {
    std::ofstream out(path);
    out << R"({"lang":0,"tokens":[1,2]})" << '\n';
    out << "{not json}" << '\n';
    out << R"({"lang":1,"tokens":[3]})" << '\n';
  }
  CHECK_THROWS_WITH_AS(load_jsonl(path.string()),
                       doctest::Contains("line 2"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("jsonl records without hierarchy ids stay optional") {
  const auto path = temp_file("rankem_test_optional.jsonl");
  {
    std::ofstream out(path);
    out << R"({"lang":2,"tokens":[7,8,9]})" << '\n';
  }
  const auto loaded = load_jsonl(path.string());
  REQUIRE(loaded.size() == 1);
  CHECK_FALSE(loaded[0].has_ids());
  CHECK(loaded[0].sentence.language == 2);
  std::filesystem::remove(path);
}

TEST_CASE("spec json round trip and validation") {
  SyntheticCorpusSpec spec;
  spec.head_language_pairs = {{0, 3}};
  const SyntheticCorpusSpec back = SyntheticCorpusSpec::from_json(spec.to_json());
  CHECK(back.num_languages == spec.num_languages);
  CHECK(back.head_language_pairs == spec.head_language_pairs);

  SyntheticCorpusSpec bad;
  bad.num_languages = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SyntheticCorpusSpec bad_pair;
  bad_pair.head_language_pairs = {{0, 9}};
  CHECK_THROWS_AS(bad_pair.validate(), std::invalid_argument);
}

TEST_SUITE_END();
