#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rankem/cli.hpp"

using namespace rankem;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& child) const { return (path / child).string(); }
};

void write_small_config(const std::string& path, std::uint64_t seed) {
  TrainConfig config;
  config.dim = 8;
  config.hidden = 12;
  config.batch_size = 4;
  config.queue_capacity = 8;
  config.phase1_steps = 4;
  config.phase2_steps = 4;
  config.seed = seed;
  std::ofstream out(path);
  out << config.to_json();
}

void write_small_spec(const std::string& path) {
  SyntheticCorpusSpec spec;
  spec.num_languages = 3;
  spec.base_vocab = 20;
  spec.supertopics = 1;
  spec.topics_per_supertopic = 2;
  spec.groups_per_topic = 2;
  spec.sentences_per_group = 3;
  spec.min_sentence_len = 4;
  spec.max_sentence_len = 7;
  spec.head_language_pairs = {{0, 1}};
  std::ofstream out(path);
  out << spec.to_json();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("gen-data then warmup then train is byte-reproducible") {
  TempDir dir("rankem_cli_repro");
  write_small_spec(dir.str("spec.json"));
  write_small_config(dir.str("cfg.json"), 5);

  auto pipeline = [&](const std::string& tag) {
    const std::string data = dir.str("data_" + tag);
    CHECK(run_cli({"gen-data", "--spec", dir.str("spec.json"), "--seed", "3", "--out", data}) == 0);
    CHECK(run_cli({"warmup", "--config", dir.str("cfg.json"), "--data", data, "--out",
                   dir.str(tag + "_warm.json"), "--metrics", dir.str(tag + "_warm.jsonl")}) == 0);
    CHECK(run_cli({"train", "--config", dir.str("cfg.json"), "--data", data, "--resume",
                   dir.str(tag + "_warm.json"), "--out", dir.str(tag + "_full.json"), "--metrics",
                   dir.str(tag + "_full.jsonl")}) == 0);
    return slurp(dir.path / (tag + "_warm.jsonl")) + slurp(dir.path / (tag + "_full.jsonl"));
  };
  const std::string a = pipeline("a");
  const std::string b = pipeline("b");
  CHECK(a == b);
  CHECK_FALSE(a.empty());

  // The warmup checkpoint holds only phase-1 progress; the full one finishes.
  const auto warm = nlohmann::json::parse(slurp(dir.path / "a_warm.json"));
  CHECK(warm.at("progress").at("phase1_done") == 4);
  CHECK(warm.at("progress").at("phase2_done") == 0);
  const auto full = nlohmann::json::parse(slurp(dir.path / "a_full.json"));
  CHECK(full.at("progress").at("phase2_done") == 4);
}

TEST_CASE("eval-geometry reports zero invariance for identical language rows") {
  TempDir dir("rankem_cli_geo");
  {
    std::ofstream tsv(dir.str("dump.tsv"));
    tsv << "d=3\n";
    for (int lang = 0; lang < 3; ++lang) {
      tsv << lang << "\t0\t" << "1,0,0\n";
      tsv << lang << "\t1\t" << "0,1,0\n";
      tsv << lang << "\t2\t" << "0,0.6,0.8\n";
    }
  }
  CHECK(run_cli({"eval-geometry", "--embeddings", dir.str("dump.tsv"), "--report",
                 dir.str("geo.json")}) == 0);
  const auto report = nlohmann::json::parse(slurp(dir.path / "geo.json"));
  CHECK(std::abs(report.at("invariance").get<double>()) <= 1e-9);
  CHECK(report.at("isotropy").get<double>() > 0.0);
  CHECK(report.at("isotropy").get<double>() <= 1.0);
}

TEST_CASE("classify-pair of a sentence against itself") {
  TempDir dir("rankem_cli_classify");
  write_small_spec(dir.str("spec.json"));
  write_small_config(dir.str("cfg.json"), 6);
  CHECK(run_cli({"gen-data", "--spec", dir.str("spec.json"), "--seed", "4", "--out", dir.str("data")}) == 0);
  CHECK(run_cli({"warmup", "--config", dir.str("cfg.json"), "--data", dir.str("data"), "--out",
                 dir.str("ckpt.json")}) == 0);

  std::ostringstream captured;
  auto* old_buf = std::cout.rdbuf(captured.rdbuf());
  const int code = run_cli({"classify-pair", "--ckpt", dir.str("ckpt.json"), "--a", "1,2,3", "--b", "1,2,3"});
  std::cout.rdbuf(old_buf);
  CHECK(code == 0);
  const auto out = nlohmann::json::parse(captured.str());
  CHECK(out.at("sim").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out.at("c_encoder").get<int>() == 1);
  CHECK(out.at("c_gmm").get<int>() >= 1);
}

TEST_CASE("export-embeddings then eval-geometry from the dump") {
  TempDir dir("rankem_cli_export");
  write_small_spec(dir.str("spec.json"));
  write_small_config(dir.str("cfg.json"), 7);
  CHECK(run_cli({"gen-data", "--spec", dir.str("spec.json"), "--seed", "5", "--out", dir.str("data")}) == 0);
  CHECK(run_cli({"warmup", "--config", dir.str("cfg.json"), "--data", dir.str("data"), "--out",
                 dir.str("ckpt.json")}) == 0);
  CHECK(run_cli({"export-embeddings", "--ckpt", dir.str("ckpt.json"), "--data", dir.str("data"),
                 "--out", dir.str("dump.tsv")}) == 0);
  const auto rows = read_embedding_tsv(dir.str("dump.tsv"));
  CHECK(rows.size() == 4 * 3);  // groups x languages
  CHECK(run_cli({"eval-geometry", "--embeddings", dir.str("dump.tsv"), "--report",
                 dir.str("geo.json")}) == 0);
  CHECK(run_cli({"eval-retrieval", "--ckpt", dir.str("ckpt.json"), "--data", dir.str("data"),
                 "--report", dir.str("ret.json")}) == 0);
  const auto report = nlohmann::json::parse(slurp(dir.path / "ret.json"));
  CHECK(report.contains("per_language"));
  CHECK(report.contains("head_average"));
  CHECK(report.contains("longtail_average"));
}

TEST_CASE("usage and data errors map to exit codes 1 and 2") {
  CHECK(run_cli({"no-such-command"}) == 1);
  CHECK(run_cli({"gen-data", "--bogus-flag", "x", "--seed", "1", "--out", "/tmp/x"}) == 1);
  CHECK(run_cli({"eval-retrieval", "--ckpt", "/nonexistent.json", "--data", "/nonexistent",
                 "--report", "/tmp/r.json"}) == 2);
}

TEST_SUITE_END();
