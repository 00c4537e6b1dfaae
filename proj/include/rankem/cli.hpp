#pragma once

#include <map>
#include <string>
#include <vector>

#include "rankem/data.hpp"
#include "rankem/geometry.hpp"
#include "rankem/trainer.hpp"

namespace rankem {

/// Entry point behind the binary. Returns 0 on success, 1 on usage errors,
/// 2 on data or validation errors.
int run_cli(const std::vector<std::string>& args);

// Shared plumbing between the subcommands, the tests and the acceptance suite.

struct CorpusOnDisk {
  SyntheticCorpusSpec spec;
  Corpus corpus;
};

/// Directory layout written by gen-data: spec.json, mono.jsonl,
/// parallel_src.jsonl / parallel_tgt.jsonl (line-aligned), heldout.jsonl.
void write_corpus_dir(const std::string& dir, const SyntheticCorpusSpec& spec, const Corpus& corpus);
CorpusOnDisk load_corpus_dir(const std::string& dir);

/// Highest token id + 1 across every stream.
std::size_t infer_vocab_size(const Corpus& corpus);

/// Monolingual records flattened to bare sentences (phase-2 interface:
/// no pairing or hierarchy metadata survives).
std::vector<Sentence> phase2_pool(const Corpus& corpus);
std::vector<std::pair<Sentence, Sentence>> phase1_pairs(const Corpus& corpus);

/// Held-out embeddings, one row per (group, language); item = group id.
std::vector<EmbeddingDumpRow> embed_heldout(const EncoderParams& encoder,
                                            const std::vector<CorpusRecord>& heldout);

struct RetrievalReport {
  std::map<std::uint32_t, double> per_language;  // query language -> accuracy into the pivot
  double head_average = 0.0;
  double longtail_average = 0.0;
  double overall = 0.0;

  std::string to_json() const;
};

/// Held-out retrieval into the pivot language (language 0): every non-pivot
/// language queries the pivot pool; gold is the shared group.
RetrievalReport retrieval_report(const EncoderParams& encoder, const SyntheticCorpusSpec& spec,
                                 const std::vector<CorpusRecord>& heldout);

struct GeometrySettings {
  double ridge = 1e-4;
  bool diagonal = false;
};

GeometryReport geometry_report(const std::vector<EmbeddingDumpRow>& rows,
                               const GeometrySettings& settings);

}  // namespace rankem
