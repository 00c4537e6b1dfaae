#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rankem/encoder.hpp"
#include "rankem/rng.hpp"

namespace rankem {

/// Shape of the synthetic corpus. Every language renders the same base
/// vocabulary [0, base_vocab) into its own disjoint id band
/// [lang*base_vocab, (lang+1)*base_vocab), so cross-lingual alignment carries
/// no surface overlap. Groups nest in topics, topics in supertopics.
struct SyntheticCorpusSpec {
  std::uint32_t num_languages = 6;
  std::uint32_t base_vocab = 50;
  std::uint32_t min_sentence_len = 6;
  std::uint32_t max_sentence_len = 12;
  std::uint32_t supertopics = 2;
  std::uint32_t topics_per_supertopic = 5;
  std::uint32_t groups_per_topic = 4;
  std::uint32_t sentences_per_group = 6;  // per language, monolingual pool
  double noise = 0.05;                    // chance of an off-distribution token
  /// Language pairs that receive parallel data. Empty selects the default:
  /// every pair (0, l) with l in the first half of the language list.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> head_language_pairs;

  void validate() const;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> resolved_head_pairs() const;
  std::uint32_t total_topics() const { return supertopics * topics_per_supertopic; }
  std::uint32_t total_groups() const { return total_topics() * groups_per_topic; }

  std::string to_json() const;
  static SyntheticCorpusSpec from_json(const std::string& text);
};

struct CorpusRecord {
  Sentence sentence;
  std::int64_t group_id = -1;
  std::int64_t topic_id = -1;
  std::int64_t supertopic_id = -1;

  bool has_ids() const { return group_id >= 0 && topic_id >= 0 && supertopic_id >= 0; }
};

struct Corpus {
  std::vector<std::vector<CorpusRecord>> monolingual;               // indexed by language
  std::vector<std::pair<CorpusRecord, CorpusRecord>> parallel;      // head pairs only
  std::vector<CorpusRecord> heldout;                                // one per (group, language)
};

Corpus generate(const SyntheticCorpusSpec& spec, std::uint64_t seed);

/// Depth of the deepest shared hierarchy level: same group -> 1, same topic ->
/// 2, same supertopic -> 3, unrelated -> n_ranks. Both records need ids.
std::size_t ground_truth_rank(const CorpusRecord& a, const CorpusRecord& b, std::size_t n_ranks = 4);

/// JSONL round trip; one {"lang":..,"tokens":[..]} object per line with the
/// hierarchy ids present only when known. A malformed line fails the whole
/// load, naming the line.
std::vector<CorpusRecord> load_jsonl(const std::string& path);
void save_jsonl(const std::string& path, const std::vector<CorpusRecord>& records);

}  // namespace rankem
