#include "rankem/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace rankem {

using nlohmann::json;

void SyntheticCorpusSpec::validate() const {
  if (num_languages < 2) throw std::invalid_argument("corpus spec: need at least two languages");
  if (supertopics < 1 || topics_per_supertopic < 1 || groups_per_topic < 1) {
    throw std::invalid_argument("corpus spec: hierarchy sizes must be at least 1");
  }
  if (base_vocab < 2 * supertopics) {
    throw std::invalid_argument("corpus spec: base_vocab too small for the supertopic bands");
  }
  if (min_sentence_len == 0 || min_sentence_len > max_sentence_len) {
    throw std::invalid_argument("corpus spec: bad sentence length range");
  }
  if (noise < 0.0 || noise > 1.0) throw std::invalid_argument("corpus spec: noise outside [0,1]");
  if (sentences_per_group == 0) throw std::invalid_argument("corpus spec: sentences_per_group must be positive");
  for (const auto& [a, b] : head_language_pairs) {
    if (a >= num_languages || b >= num_languages || a == b) {
      throw std::invalid_argument("corpus spec: invalid head language pair");
    }
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> SyntheticCorpusSpec::resolved_head_pairs() const {
  if (!head_language_pairs.empty()) return head_language_pairs;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  const std::uint32_t first_half = num_languages / 2;
  for (std::uint32_t l = 1; l < first_half; ++l) pairs.emplace_back(0, l);
  return pairs;
}

std::string SyntheticCorpusSpec::to_json() const {
  json j{{"num_languages", num_languages},
         {"base_vocab", base_vocab},
         {"min_sentence_len", min_sentence_len},
         {"max_sentence_len", max_sentence_len},
         {"supertopics", supertopics},
         {"topics_per_supertopic", topics_per_supertopic},
         {"groups_per_topic", groups_per_topic},
         {"sentences_per_group", sentences_per_group},
         {"noise", noise},
         {"head_language_pairs", json::array()}};
  for (const auto& [a, b] : head_language_pairs) j["head_language_pairs"].push_back({a, b});
  return j.dump(2);
}

SyntheticCorpusSpec SyntheticCorpusSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("corpus spec: ") + e.what());
  }
  SyntheticCorpusSpec spec;
  spec.num_languages = j.value("num_languages", spec.num_languages);
  spec.base_vocab = j.value("base_vocab", spec.base_vocab);
  spec.min_sentence_len = j.value("min_sentence_len", spec.min_sentence_len);
  spec.max_sentence_len = j.value("max_sentence_len", spec.max_sentence_len);
  spec.supertopics = j.value("supertopics", spec.supertopics);
  spec.topics_per_supertopic = j.value("topics_per_supertopic", spec.topics_per_supertopic);
  spec.groups_per_topic = j.value("groups_per_topic", spec.groups_per_topic);
  spec.sentences_per_group = j.value("sentences_per_group", spec.sentences_per_group);
  spec.noise = j.value("noise", spec.noise);
  if (j.contains("head_language_pairs")) {
    for (const auto& p : j["head_language_pairs"]) {
      spec.head_language_pairs.emplace_back(p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>());
    }
  }
  spec.validate();
  return spec;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t acc = mix64(seed);
  for (std::uint64_t p : parts) acc = mix64(acc ^ p);
  return acc;
}

std::vector<std::uint32_t> sample_distinct(SeededRng& rng, std::uint32_t lo, std::uint32_t hi,
                                           std::uint32_t count) {
  std::vector<std::uint32_t> pool(hi - lo);
  std::iota(pool.begin(), pool.end(), lo);
  count = std::min<std::uint32_t>(count, static_cast<std::uint32_t>(pool.size()));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

/// Token-bag weights for one paraphrase group over the base vocabulary.
/// Mass is graded coarse-to-fine: the supertopic core carries most of it,
/// topics and groups progressively less, and every sibling tier gets its own
/// emphasis. The cluster constellation is therefore hierarchical with no
/// exchange symmetry, and each language renders an isometric copy of it.
Vec build_group_bag(const SyntheticCorpusSpec& spec, std::uint64_t seed, std::uint32_t group) {
  const std::uint32_t topic = group / spec.groups_per_topic;
  const std::uint32_t super = topic / spec.topics_per_supertopic;
  const std::uint32_t band_start = super * spec.base_vocab / spec.supertopics;
  const std::uint32_t band_end = (super + 1) * spec.base_vocab / spec.supertopics;
  const std::uint32_t band_size = band_end - band_start;
  const std::uint32_t core_size = std::max<std::uint32_t>(1, band_size / 3);
  const std::uint32_t pool_start = band_start + core_size;
  const std::uint32_t pool_size = band_end - pool_start;

  Vec weights(spec.base_vocab, 0.0);
  for (std::uint32_t v = band_start; v < band_start + core_size; ++v) {
    weights[v] += 3.0 + 1.0 * super;
  }

  const std::uint32_t topic_in_super = topic % spec.topics_per_supertopic;
  const std::uint32_t group_in_topic = group % spec.groups_per_topic;
  if (pool_size > 0) {
    const std::uint32_t topic_tokens = std::max<std::uint32_t>(1, pool_size / (spec.topics_per_supertopic + 1));
    SeededRng topic_rng(mix_seed(seed, {0x70u, super, topic_in_super}));
    for (std::uint32_t v : sample_distinct(topic_rng, pool_start, band_end, topic_tokens)) {
      weights[v] += 2.5 + 0.6 * topic_in_super;
    }
    SeededRng group_rng(mix_seed(seed, {0x6au, super, topic_in_super, group_in_topic}));
    for (std::uint32_t v : sample_distinct(group_rng, pool_start, band_end, 2)) {
      weights[v] += 2.0 + 0.9 * group_in_topic;
    }
  }
  return weights;
}

std::vector<std::uint32_t> draw_base_tokens(const SyntheticCorpusSpec& spec, const Vec& bag,
                                            SeededRng& rng) {
  const std::uint32_t len =
      spec.min_sentence_len +
      static_cast<std::uint32_t>(rng.uniform_index(spec.max_sentence_len - spec.min_sentence_len + 1));
  std::vector<std::uint32_t> base(len);
  for (auto& t : base) {
    if (rng.uniform() < spec.noise) {
      t = static_cast<std::uint32_t>(rng.uniform_index(spec.base_vocab));
    } else {
      t = static_cast<std::uint32_t>(rng.categorical(bag));
    }
  }
  return base;
}

CorpusRecord render(const SyntheticCorpusSpec& spec, const std::vector<std::uint32_t>& base,
                    std::uint32_t lang, std::uint32_t group) {
  CorpusRecord rec;
  rec.sentence.language = lang;
  rec.sentence.tokens.reserve(base.size());
  for (std::uint32_t v : base) rec.sentence.tokens.push_back(lang * spec.base_vocab + v);
  rec.group_id = group;
  rec.topic_id = group / spec.groups_per_topic;
  rec.supertopic_id = rec.topic_id / spec.topics_per_supertopic;
  return rec;
}

}  // namespace

Corpus generate(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::uint32_t groups = spec.total_groups();
  std::vector<Vec> bags(groups);
  for (std::uint32_t g = 0; g < groups; ++g) bags[g] = build_group_bag(spec, seed, g);

  SeededRng rng(mix_seed(seed, {0xC0u}));
  Corpus corpus;
  corpus.monolingual.resize(spec.num_languages);
  for (std::uint32_t lang = 0; lang < spec.num_languages; ++lang) {
    for (std::uint32_t g = 0; g < groups; ++g) {
      for (std::uint32_t i = 0; i < spec.sentences_per_group; ++i) {
        corpus.monolingual[lang].push_back(render(spec, draw_base_tokens(spec, bags[g], rng), lang, g));
      }
    }
  }
  for (const auto& [la, lb] : spec.resolved_head_pairs()) {
    for (std::uint32_t g = 0; g < groups; ++g) {
      for (std::uint32_t i = 0; i < spec.sentences_per_group; ++i) {
        const auto base = draw_base_tokens(spec, bags[g], rng);
        corpus.parallel.emplace_back(render(spec, base, la, g), render(spec, base, lb, g));
      }
    }
  }
  for (std::uint32_t g = 0; g < groups; ++g) {
    const auto base = draw_base_tokens(spec, bags[g], rng);
    for (std::uint32_t lang = 0; lang < spec.num_languages; ++lang) {
      corpus.heldout.push_back(render(spec, base, lang, g));
    }
  }
  return corpus;
}

std::size_t ground_truth_rank(const CorpusRecord& a, const CorpusRecord& b, std::size_t n_ranks) {
  if (!a.has_ids() || !b.has_ids()) throw std::invalid_argument("ground_truth_rank: missing hierarchy ids");
  if (n_ranks < 2) throw std::invalid_argument("ground_truth_rank: need at least two ranks");
  std::size_t tier = 4;
  if (a.group_id == b.group_id) {
    tier = 1;
  } else if (a.topic_id == b.topic_id) {
    tier = 2;
  } else if (a.supertopic_id == b.supertopic_id) {
    tier = 3;
  }
  return tier == 4 ? n_ranks : std::min(tier, n_ranks);
}

std::vector<CorpusRecord> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_jsonl: cannot open " + path);
  std::vector<CorpusRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      CorpusRecord rec;
      rec.sentence.language = j.at("lang").get<std::uint32_t>();
      rec.sentence.tokens = j.at("tokens").get<std::vector<std::uint32_t>>();
      rec.group_id = j.value("group", std::int64_t{-1});
      rec.topic_id = j.value("topic", std::int64_t{-1});
      rec.supertopic_id = j.value("supertopic", std::int64_t{-1});
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw std::runtime_error("load_jsonl: " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void save_jsonl(const std::string& path, const std::vector<CorpusRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_jsonl: cannot open " + path);
  for (const auto& rec : records) {
    json j{{"lang", rec.sentence.language}, {"tokens", rec.sentence.tokens}};
    if (rec.has_ids()) {
      j["group"] = rec.group_id;
      j["topic"] = rec.topic_id;
      j["supertopic"] = rec.supertopic_id;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("save_jsonl: write failed for " + path);
}

}  // namespace rankem
