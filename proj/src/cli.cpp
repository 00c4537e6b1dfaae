#include "rankem/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankem/eval.hpp"
#include "rankem/gradsuite.hpp"

namespace rankem {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<std::uint32_t> parse_token_list(const std::string& text) {
  std::vector<std::uint32_t> tokens;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) tokens.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
  }
  if (tokens.empty()) throw std::runtime_error("empty token list");
  return tokens;
}

}  // namespace

void write_corpus_dir(const std::string& dir, const SyntheticCorpusSpec& spec, const Corpus& corpus) {
  fs::create_directories(dir);
  write_file((fs::path(dir) / "spec.json").string(), spec.to_json());
  std::vector<CorpusRecord> mono;
  for (const auto& per_lang : corpus.monolingual) {
    mono.insert(mono.end(), per_lang.begin(), per_lang.end());
  }
  save_jsonl((fs::path(dir) / "mono.jsonl").string(), mono);
  std::vector<CorpusRecord> src, tgt;
  for (const auto& [a, b] : corpus.parallel) {
    src.push_back(a);
    tgt.push_back(b);
  }
  save_jsonl((fs::path(dir) / "parallel_src.jsonl").string(), src);
  save_jsonl((fs::path(dir) / "parallel_tgt.jsonl").string(), tgt);
  save_jsonl((fs::path(dir) / "heldout.jsonl").string(), corpus.heldout);
}

CorpusOnDisk load_corpus_dir(const std::string& dir) {
  CorpusOnDisk loaded;
  loaded.spec = SyntheticCorpusSpec::from_json(read_file((fs::path(dir) / "spec.json").string()));
  const auto mono = load_jsonl((fs::path(dir) / "mono.jsonl").string());
  loaded.corpus.monolingual.resize(loaded.spec.num_languages);
  for (const auto& rec : mono) {
    if (rec.sentence.language >= loaded.spec.num_languages) {
      throw std::runtime_error("corpus: record language out of range");
    }
    loaded.corpus.monolingual[rec.sentence.language].push_back(rec);
  }
  const auto src = load_jsonl((fs::path(dir) / "parallel_src.jsonl").string());
  const auto tgt = load_jsonl((fs::path(dir) / "parallel_tgt.jsonl").string());
  if (src.size() != tgt.size()) throw std::runtime_error("corpus: parallel files are not aligned");
  for (std::size_t i = 0; i < src.size(); ++i) {
    loaded.corpus.parallel.emplace_back(src[i], tgt[i]);
  }
  loaded.corpus.heldout = load_jsonl((fs::path(dir) / "heldout.jsonl").string());
  return loaded;
}

std::size_t infer_vocab_size(const Corpus& corpus) {
  std::uint32_t max_id = 0;
  auto scan = [&](const CorpusRecord& rec) {
    for (std::uint32_t t : rec.sentence.tokens) max_id = std::max(max_id, t);
  };
  for (const auto& per_lang : corpus.monolingual) {
    for (const auto& rec : per_lang) scan(rec);
  }
  for (const auto& [a, b] : corpus.parallel) {
    scan(a);
    scan(b);
  }
  for (const auto& rec : corpus.heldout) scan(rec);
  return static_cast<std::size_t>(max_id) + 1;
}

std::vector<Sentence> phase2_pool(const Corpus& corpus) {
  std::vector<Sentence> pool;
  for (const auto& per_lang : corpus.monolingual) {
    for (const auto& rec : per_lang) pool.push_back(rec.sentence);
  }
  return pool;
}

std::vector<std::pair<Sentence, Sentence>> phase1_pairs(const Corpus& corpus) {
  std::vector<std::pair<Sentence, Sentence>> pairs;
  pairs.reserve(corpus.parallel.size());
  for (const auto& [a, b] : corpus.parallel) {
    pairs.emplace_back(a.sentence, b.sentence);
  }
  return pairs;
}

std::vector<EmbeddingDumpRow> embed_heldout(const EncoderParams& encoder,
                                            const std::vector<CorpusRecord>& heldout) {
  std::vector<EmbeddingDumpRow> rows(heldout.size());
  parallel_for(heldout.size(), [&](std::size_t i) {
    rows[i].lang = heldout[i].sentence.language;
    rows[i].item = heldout[i].group_id >= 0 ? static_cast<std::uint32_t>(heldout[i].group_id)
                                            : static_cast<std::uint32_t>(i);
    rows[i].values = encode(encoder, heldout[i].sentence);
  });
  return rows;
}

std::string RetrievalReport::to_json() const {
  ordered_json j;
  ordered_json per_lang;
  for (const auto& [lang, acc] : per_language) per_lang[std::to_string(lang)] = acc;
  j["per_language"] = std::move(per_lang);
  j["head_average"] = head_average;
  j["longtail_average"] = longtail_average;
  j["overall"] = overall;
  return j.dump(2);
}

RetrievalReport retrieval_report(const EncoderParams& encoder, const SyntheticCorpusSpec& spec,
                                 const std::vector<CorpusRecord>& heldout) {
  const auto rows = embed_heldout(encoder, heldout);
  const std::uint32_t groups = spec.total_groups();
  std::vector<Vec> pool(groups);
  std::vector<bool> have(groups, false);
  std::map<std::uint32_t, std::vector<RetrievalQuery>> queries;
  for (const auto& row : rows) {
    if (row.item >= groups) throw std::runtime_error("retrieval: group id out of range");
    if (row.lang == 0) {
      pool[row.item] = row.values;
      have[row.item] = true;
    } else {
      queries[row.lang].push_back({row.values, row.item});
    }
  }
  if (!std::all_of(have.begin(), have.end(), [](bool b) { return b; })) {
    throw std::runtime_error("retrieval: pivot language misses held-out groups");
  }

  std::set<std::uint32_t> head_langs;
  for (const auto& [a, b] : spec.resolved_head_pairs()) {
    head_langs.insert(a);
    head_langs.insert(b);
  }

  RetrievalReport report;
  double head_sum = 0.0, long_sum = 0.0, all_sum = 0.0;
  std::size_t head_n = 0, long_n = 0;
  for (const auto& [lang, qs] : queries) {
    const double acc = retrieval_accuracy(qs, pool);
    report.per_language[lang] = acc;
    all_sum += acc;
    if (head_langs.count(lang) != 0) {
      head_sum += acc;
      ++head_n;
    } else {
      long_sum += acc;
      ++long_n;
    }
  }
  report.head_average = head_n != 0 ? head_sum / static_cast<double>(head_n) : 0.0;
  report.longtail_average = long_n != 0 ? long_sum / static_cast<double>(long_n) : 0.0;
  report.overall = queries.empty() ? 0.0 : all_sum / static_cast<double>(queries.size());
  return report;
}

GeometryReport geometry_report(const std::vector<EmbeddingDumpRow>& rows,
                               const GeometrySettings& settings) {
  if (rows.empty()) throw std::runtime_error("geometry: no embeddings");
  std::map<std::uint32_t, std::vector<Vec>> by_lang;
  std::map<std::uint32_t, std::vector<Vec>> by_item;
  std::vector<Vec> all;
  for (const auto& row : rows) {
    by_lang[row.lang].push_back(row.values);
    by_item[row.item].push_back(row.values);
    all.push_back(row.values);
  }
  std::vector<std::vector<Vec>> language_sets;
  for (auto& [lang, set] : by_lang) language_sets.push_back(std::move(set));
  std::vector<std::vector<Vec>> clusters;
  for (auto& [item, cluster] : by_item) clusters.push_back(std::move(cluster));

  GeometryReport report;
  report.invariance = invariance_score(language_sets, settings.ridge, settings.diagonal);
  report.canonical = canonical_score(clusters);
  report.isotropy = isotropy_score(all);
  return report;
}

namespace {

TrainerState build_state(const std::string& config_path, const std::string& resume_path,
                         const Corpus& corpus) {
  if (!resume_path.empty()) {
    // The checkpoint's config wins on resume; it is the one the run started
    // with and continuation must be bit-identical.
    return load_checkpoint(resume_path);
  }
  TrainConfig config = TrainConfig::from_json(read_file(config_path));
  const std::size_t inferred = infer_vocab_size(corpus);
  if (config.vocab_size == 0) {
    config.vocab_size = inferred;
  } else if (config.vocab_size < inferred) {
    throw std::runtime_error("config: vocab_size smaller than the corpus vocabulary");
  }
  return init_trainer(config);
}

int run_training(const std::string& config_path, const std::string& data_dir,
                 const std::string& resume_path, const std::string& out_path,
                 const std::string& metrics_path, bool stop_after_phase1) {
  const CorpusOnDisk data = load_corpus_dir(data_dir);
  TrainerState state = build_state(config_path, resume_path, data.corpus);
  std::ofstream metrics_file;
  std::ostream* metrics = nullptr;
  if (!metrics_path.empty()) {
    metrics_file.open(metrics_path);
    if (!metrics_file) throw std::runtime_error("cannot open " + metrics_path);
    metrics = &metrics_file;
  }
  const auto pairs = phase1_pairs(data.corpus);
  const auto pool = phase2_pool(data.corpus);
  train(state, pairs, pool, metrics, out_path + ".diag.json", stop_after_phase1);
  save_checkpoint(state, out_path);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"EM-trained rank classifier + contrastive sentence encoder workbench"};
  app.require_subcommand(1);

  std::string spec_path, config_path, data_dir, out_path, metrics_path, resume_path;
  std::string ckpt_path, report_path, embeddings_path, tokens_a, tokens_b;
  std::uint64_t seed = 1;
  std::uint32_t lang_a = 0, lang_b = 0;
  GeometrySettings geo;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multilingual corpus");
  gen->add_option("--spec", spec_path, "Corpus spec JSON (defaults apply when omitted)");
  gen->add_option("--seed", seed, "Generation seed")->required();
  gen->add_option("--out", out_path, "Output directory")->required();

  auto* warmup = app.add_subcommand("warmup", "Phase-1 warm-up on parallel data");
  warmup->add_option("--config", config_path, "Train config JSON")->required();
  warmup->add_option("--data", data_dir, "Corpus directory")->required();
  warmup->add_option("--out", out_path, "Checkpoint path")->required();
  warmup->add_option("--metrics", metrics_path, "Metrics JSONL path");

  auto* train_cmd = app.add_subcommand("train", "Full run: warm-up plus EM phase");
  train_cmd->add_option("--config", config_path, "Train config JSON");
  train_cmd->add_option("--data", data_dir, "Corpus directory")->required();
  train_cmd->add_option("--resume", resume_path, "Checkpoint to resume from");
  train_cmd->add_option("--out", out_path, "Checkpoint path")->required();
  train_cmd->add_option("--metrics", metrics_path, "Metrics JSONL path");

  auto* eval_ret = app.add_subcommand("eval-retrieval", "Held-out retrieval into the pivot language");
  eval_ret->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  eval_ret->add_option("--data", data_dir, "Corpus directory")->required();
  eval_ret->add_option("--report", report_path, "Report JSON path")->required();

  auto* eval_geo = app.add_subcommand("eval-geometry", "Invariance / canonical form / isotropy");
  eval_geo->add_option("--embeddings", embeddings_path, "Embedding dump TSV");
  eval_geo->add_option("--ckpt", ckpt_path, "Checkpoint (embeds held-out data first)");
  eval_geo->add_option("--data", data_dir, "Corpus directory (with --ckpt)");
  eval_geo->add_option("--report", report_path, "Report JSON path")->required();
  eval_geo->add_option("--ridge", geo.ridge, "Covariance ridge");
  eval_geo->add_flag("--diagonal", geo.diagonal, "Diagonal covariance fit");

  auto* classify = app.add_subcommand("classify-pair", "Rank one sentence pair with both modules");
  classify->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  classify->add_option("--a", tokens_a, "Comma-separated token ids")->required();
  classify->add_option("--b", tokens_b, "Comma-separated token ids")->required();
  classify->add_option("--lang-a", lang_a, "Language id of sentence a");
  classify->add_option("--lang-b", lang_b, "Language id of sentence b");

  auto* export_cmd = app.add_subcommand("export-embeddings", "Dump held-out embeddings as TSV");
  export_cmd->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  export_cmd->add_option("--data", data_dir, "Corpus directory")->required();
  export_cmd->add_option("--out", out_path, "TSV path")->required();

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference audit of every loss");
  gradcheck_cmd->add_option("--config", config_path, "Train config JSON (seed source)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      SyntheticCorpusSpec spec;
      if (!spec_path.empty()) spec = SyntheticCorpusSpec::from_json(read_file(spec_path));
      spec.validate();
      write_corpus_dir(out_path, spec, generate(spec, seed));
      return 0;
    }
    if (warmup->parsed()) {
      return run_training(config_path, data_dir, "", out_path, metrics_path, true);
    }
    if (train_cmd->parsed()) {
      if (config_path.empty() && resume_path.empty()) {
        std::cerr << "train: need --config or --resume\n";
        return 1;
      }
      return run_training(config_path, data_dir, resume_path, out_path, metrics_path, false);
    }
    if (eval_ret->parsed()) {
      const TrainerState state = load_checkpoint(ckpt_path);
      const CorpusOnDisk data = load_corpus_dir(data_dir);
      write_file(report_path, retrieval_report(state.encoder, data.spec, data.corpus.heldout).to_json());
      return 0;
    }
    if (eval_geo->parsed()) {
      std::vector<EmbeddingDumpRow> rows;
      if (!embeddings_path.empty()) {
        rows = read_embedding_tsv(embeddings_path);
      } else if (!ckpt_path.empty() && !data_dir.empty()) {
        const TrainerState state = load_checkpoint(ckpt_path);
        rows = embed_heldout(state.encoder, load_corpus_dir(data_dir).corpus.heldout);
      } else {
        std::cerr << "eval-geometry: need --embeddings or --ckpt with --data\n";
        return 1;
      }
      const GeometryReport report = geometry_report(rows, geo);
      ordered_json j{{"invariance", report.invariance},
                     {"canonical", report.canonical},
                     {"isotropy", report.isotropy}};
      write_file(report_path, j.dump(2));
      return 0;
    }
    if (classify->parsed()) {
      const TrainerState state = load_checkpoint(ckpt_path);
      Sentence a{parse_token_list(tokens_a), lang_a};
      Sentence b{parse_token_list(tokens_b), lang_b};
      const Vec ea = encode(state.encoder, a);
      const Vec eb = encode(state.encoder, b);
      const double sim = cosine(ea, eb);
      ordered_json j{{"c_gmm", predict_rank(state.gmm, ea, eb)},
                     {"c_encoder", predict_rank_encoder(state.anchors, sim)},
                     {"sim", sim}};
      std::cout << j.dump() << '\n';
      return 0;
    }
    if (export_cmd->parsed()) {
      const TrainerState state = load_checkpoint(ckpt_path);
      const CorpusOnDisk data = load_corpus_dir(data_dir);
      const auto rows = embed_heldout(state.encoder, data.corpus.heldout);
      write_embedding_tsv(out_path, rows, state.config.dim);
      return 0;
    }
    if (gradcheck_cmd->parsed()) {
      std::uint64_t base_seed = 1;
      if (!config_path.empty()) base_seed = TrainConfig::from_json(read_file(config_path)).seed;
      bool all_ok = true;
      for (std::uint64_t s = 0; s < 5; ++s) {
        for (const auto& entry : run_gradient_suite(base_seed + s, 1e-5, 1e-4)) {
          std::cout << (entry.passed ? "[pass] " : "[FAIL] ") << entry.name << " seed " << base_seed + s
                    << " max rel err " << entry.max_rel_error << " over " << entry.coordinates
                    << " coordinates\n";
          all_ok = all_ok && entry.passed;
        }
      }
      return all_ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace rankem
