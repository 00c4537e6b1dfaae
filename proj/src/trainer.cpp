#include "rankem/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rankem {

using nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (n_ranks < 2) throw std::invalid_argument("config: n_ranks must be at least 2");
  if (dim == 0 || hidden == 0 || layers == 0) throw std::invalid_argument("config: zero encoder size");
  if (queue_capacity < batch_size) throw std::invalid_argument("config: queue capacity below batch size");
  if (batch_size == 0) throw std::invalid_argument("config: batch size must be positive");
  if (!(tau_base > 0.0) || !(tau_growth > 1.0)) throw std::invalid_argument("config: bad temperature schedule");
  if (!(gmm_lr > 0.0) || !(gmm_warmup_lr > 0.0) || !(encoder_lr_peak > 0.0)) {
    throw std::invalid_argument("config: rates must be positive");
  }
  if (moco_momentum < 0.0 || moco_momentum > 1.0) throw std::invalid_argument("config: moco momentum outside [0,1]");
  if (anchor_momentum < 0.0 || anchor_momentum > 1.0) throw std::invalid_argument("config: anchor momentum outside [0,1]");
  if (optimizer != "adam" && optimizer != "sgd") throw std::invalid_argument("config: unknown optimizer");
}

TemperatureSchedule TrainConfig::temperatures() const {
  return TemperatureSchedule::geometric(n_ranks, tau_base, tau_growth);
}

std::string TrainConfig::to_json() const {
  ordered_json j{{"n_ranks", n_ranks},
                 {"dim", dim},
                 {"hidden", hidden},
                 {"layers", layers},
                 {"max_len", max_len},
                 {"vocab_size", vocab_size},
                 {"tau_base", tau_base},
                 {"tau_growth", tau_growth},
                 {"queue_capacity", queue_capacity},
                 {"moco_momentum", moco_momentum},
                 {"anchor_momentum", anchor_momentum},
                 {"gmm_lr", gmm_lr},
                 {"gmm_warmup_lr", gmm_warmup_lr},
                 {"encoder_lr_peak", encoder_lr_peak},
                 {"batch_size", batch_size},
                 {"virtuals_per_pair", virtuals_per_pair},
                 {"phase1_steps", phase1_steps},
                 {"phase2_steps", phase2_steps},
                 {"seed", seed},
                 {"optimizer", optimizer}};
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  TrainConfig c;
  c.n_ranks = j.value("n_ranks", c.n_ranks);
  c.dim = j.value("dim", c.dim);
  c.hidden = j.value("hidden", c.hidden);
  c.layers = j.value("layers", c.layers);
  c.max_len = j.value("max_len", c.max_len);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.tau_base = j.value("tau_base", c.tau_base);
  c.tau_growth = j.value("tau_growth", c.tau_growth);
  c.queue_capacity = j.value("queue_capacity", c.queue_capacity);
  c.moco_momentum = j.value("moco_momentum", c.moco_momentum);
  c.anchor_momentum = j.value("anchor_momentum", c.anchor_momentum);
  c.gmm_lr = j.value("gmm_lr", c.gmm_lr);
  c.gmm_warmup_lr = j.value("gmm_warmup_lr", c.gmm_warmup_lr);
  c.encoder_lr_peak = j.value("encoder_lr_peak", c.encoder_lr_peak);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.virtuals_per_pair = j.value("virtuals_per_pair", c.virtuals_per_pair);
  c.phase1_steps = j.value("phase1_steps", c.phase1_steps);
  c.phase2_steps = j.value("phase2_steps", c.phase2_steps);
  c.seed = j.value("seed", c.seed);
  c.optimizer = j.value("optimizer", c.optimizer);
  c.validate();
  return c;
}

void apply_update(Vec& params, const Vec& grad, OptimizerState& state, double lr,
                  const std::string& optimizer) {
  if (grad.size() != params.size()) throw std::invalid_argument("apply_update: shape mismatch");
  if (optimizer == "sgd") {
    ++state.step;
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    return;
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("apply_update: optimizer shape mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + eps);
  }
}

void EmQueue::push(Vec embedding, std::uint32_t language) {
  entries.emplace_back(std::move(embedding), language);
  while (entries.size() > capacity) entries.pop_front();
}

TrainerState init_trainer(const TrainConfig& config) {
  config.validate();
  if (config.vocab_size == 0) throw std::invalid_argument("init_trainer: vocab_size unresolved");
  TrainerState state;
  state.config = config;
  state.rng = SeededRng(config.seed);
  EncoderConfig ec{config.vocab_size, config.hidden, config.dim, config.layers, config.max_len};
  state.encoder = init_encoder(ec, state.rng);
  state.momentum_encoder = state.encoder;
  state.gmm = init_gmm(config.n_ranks, config.dim, state.rng);
  state.anchors = default_anchors(config.n_ranks, config.anchor_momentum);
  state.queue.capacity = config.queue_capacity;
  return state;
}

std::string StepMetrics::to_json_line() const {
  ordered_json j{{"step", step},         {"phase", phase},   {"ctl_loss", ctl_loss},
                 {"mle_loss", mle_loss}, {"anchors", anchors}, {"label_hist", label_hist}};
  return j.dump();
}

namespace {

double cosine_decayed_lr(const TrainerState& state) {
  const std::size_t total = state.config.phase1_steps + state.config.phase2_steps;
  if (total == 0) return state.config.encoder_lr_peak;
  const double progress = static_cast<double>(std::min(state.global_step(), total)) /
                          static_cast<double>(total);
  return state.config.encoder_lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<Vec> encode_batch(const EncoderParams& params, std::span<const Sentence> sentences) {
  std::vector<Vec> out(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) { out[i] = encode(params, sentences[i]); });
  return out;
}

}  // namespace

StepMetrics phase1_step(TrainerState& state, std::span<const std::pair<Sentence, Sentence>> batch) {
  if (batch.size() < 2) throw std::invalid_argument("phase1_step: need at least two pairs for in-batch negatives");
  const auto& config = state.config;
  const std::size_t b = batch.size();

  std::vector<Sentence> sentences;
  sentences.reserve(2 * b);
  for (const auto& [x, y] : batch) sentences.push_back(x);
  for (const auto& [x, y] : batch) sentences.push_back(y);
  const std::vector<Vec> embeddings = encode_batch(state.encoder, sentences);
  const auto emb_x = std::span<const Vec>(embeddings).subspan(0, b);
  const auto emb_y = std::span<const Vec>(embeddings).subspan(b, b);

  // Contrastive warm-up: anchors against their bitext positives, the other
  // pairs' targets as negatives.
  std::vector<Vec> upstream(2 * b, Vec(config.dim, 0.0));
  const double inv_b = 1.0 / static_cast<double>(b);
  double ctl_loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<Vec> negatives;
    std::vector<std::size_t> neg_ids;
    negatives.reserve(b - 1);
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      negatives.push_back(emb_y[j]);
      neg_ids.push_back(j);
    }
    const InfoNceResult res = infonce(emb_x[i], emb_y[i], negatives, config.tau_base);
    ctl_loss += res.loss * inv_b;
    for (std::size_t d = 0; d < config.dim; ++d) {
      upstream[i][d] += res.d_anchor[d] * inv_b;
      upstream[b + i][d] += res.d_positive[d] * inv_b;
    }
    for (std::size_t n = 0; n < neg_ids.size(); ++n) {
      for (std::size_t d = 0; d < config.dim; ++d) {
        upstream[b + neg_ids[n]][d] += res.d_negatives[n][d] * inv_b;
      }
    }
  }
  Vec enc_grad(state.encoder.flat.size(), 0.0);
  encode_backward(state.encoder, sentences, upstream, enc_grad);

  // Classifier warm-up on the same (pre-update) embeddings: endpoints plus
  // interpolated virtual examples with their soft ranks.
  std::vector<GmmBatchItem> gmm_batch;
  std::vector<std::size_t> label_hist(config.n_ranks, 0);
  auto push_item = [&](Vec diff, std::size_t label) {
    label_hist[label - 1]++;
    gmm_batch.push_back({std::move(diff), label});
  };
  auto diff_of = [&](const Vec& a, const Vec& bb) {
    Vec d(config.dim);
    for (std::size_t j = 0; j < config.dim; ++j) d[j] = a[j] - bb[j];
    return d;
  };
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t j = state.rng.uniform_index(b - 1);
    if (j >= i) ++j;  // uniform over the other pairs
    push_item(diff_of(emb_x[i], emb_y[i]), 1);
    push_item(diff_of(emb_x[i], emb_y[j]), config.n_ranks);
    for (std::size_t v = 0; v < config.virtuals_per_pair; ++v) {
      const double lambda = state.rng.uniform();
      auto [virt, rank] = interpolate_virtual(emb_y[i], emb_y[j], lambda, config.n_ranks);
      push_item(diff_of(emb_x[i], virt), rank);
    }
  }
  Vec gmm_grad(state.gmm.flat.size(), 0.0);
  const double mle = mle_loss(state.gmm, gmm_batch, gmm_grad);

  apply_update(state.encoder.flat, enc_grad, state.opt_encoder, cosine_decayed_lr(state), config.optimizer);
  // The mixture fit is only meaningful once the encoder geometry settles, so
  // the warm-up rate ramps up linearly across phase 1.
  const double ramp = config.phase1_steps == 0
                          ? 1.0
                          : static_cast<double>(state.phase1_done + 1) / static_cast<double>(config.phase1_steps);
  apply_update(state.gmm.flat, gmm_grad, state.opt_gmm, config.gmm_warmup_lr * ramp, config.optimizer);
  state.gmm.clamp_scales();

  ++state.phase1_done;
  StepMetrics metrics;
  metrics.step = state.global_step();
  metrics.phase = 1;
  metrics.ctl_loss = ctl_loss;
  metrics.mle_loss = mle;
  metrics.anchors = state.anchors.s;
  metrics.label_hist = std::move(label_hist);
  return metrics;
}

EstepLabels estep_labels(const TrainerState& state, std::span<const Sentence> anchor_batch) {
  if (state.queue.size() == 0) throw std::invalid_argument("empty queue");
  const std::vector<Vec> anchors_emb = encode_batch(state.encoder, anchor_batch);
  const std::size_t k = state.queue.size();

  EstepLabels labels;
  labels.gmm_rank.assign(anchor_batch.size(), std::vector<std::size_t>(k, 0));
  labels.encoder_rank.assign(anchor_batch.size(), std::vector<std::size_t>(k, 0));
  labels.sims.assign(anchor_batch.size(), std::vector<double>(k, 0.0));
  parallel_for(anchor_batch.size(), [&](std::size_t i) {
    for (std::size_t q = 0; q < k; ++q) {
      const Vec& key = state.queue.entries[q].first;
      const double sim = cosine(anchors_emb[i], key);
      labels.sims[i][q] = sim;
      labels.encoder_rank[i][q] = predict_rank_encoder(state.anchors, sim);
      labels.gmm_rank[i][q] = predict_rank(state.gmm, anchors_emb[i], key);
    }
  });
  return labels;
}

StepMetrics mstep_update(TrainerState& state, std::span<const Sentence> anchor_batch,
                         const EstepLabels& labels) {
  const auto& config = state.config;
  const std::size_t k = state.queue.size();
  if (labels.gmm_rank.size() != anchor_batch.size()) throw std::invalid_argument("mstep_update: label shape mismatch");
  for (const auto& row : labels.gmm_rank) {
    if (row.size() != k) throw std::invalid_argument("mstep_update: label shape mismatch");
  }
  const std::vector<Vec> anchors_emb = encode_batch(state.encoder, anchor_batch);
  const TemperatureSchedule temps = config.temperatures();

  // (a) classifier expectation: mean NLL of the encoder-assigned ranks.
  std::vector<GmmBatchItem> gmm_batch;
  gmm_batch.reserve(anchor_batch.size() * k);
  for (std::size_t i = 0; i < anchor_batch.size(); ++i) {
    for (std::size_t q = 0; q < k; ++q) {
      Vec diff(config.dim);
      const Vec& key = state.queue.entries[q].first;
      for (std::size_t j = 0; j < config.dim; ++j) diff[j] = anchors_emb[i][j] - key[j];
      gmm_batch.push_back({std::move(diff), labels.encoder_rank[i][q]});
    }
  }
  Vec gmm_grad(state.gmm.flat.size(), 0.0);
  const double mle = mle_loss(state.gmm, gmm_batch, gmm_grad);

  // (b) encoder expectation: ranking InfoNCE against the queue grouped by the
  // classifier's ranks. Queue embeddings come from the momentum encoder and
  // stay detached; only the anchor side backpropagates.
  std::vector<std::size_t> label_hist(config.n_ranks, 0);
  std::vector<Vec> upstream(anchor_batch.size(), Vec(config.dim, 0.0));
  const double inv_b = 1.0 / static_cast<double>(anchor_batch.size());
  double ctl_loss = 0.0;
  for (std::size_t i = 0; i < anchor_batch.size(); ++i) {
    RankedBatch ranked;
    ranked.anchor = anchors_emb[i];
    ranked.groups.resize(config.n_ranks);
    for (std::size_t q = 0; q < k; ++q) {
      const std::size_t r = labels.gmm_rank[i][q];
      label_hist[r - 1]++;
      ranked.groups[r - 1].push_back(state.queue.entries[q].first);
    }
    const RankingResult res = ranking_infonce(ranked, temps);
    ctl_loss += res.loss * inv_b;
    for (std::size_t j = 0; j < config.dim; ++j) upstream[i][j] += res.d_anchor[j] * inv_b;
  }
  Vec enc_grad(state.encoder.flat.size(), 0.0);
  encode_backward(state.encoder, anchor_batch, upstream, enc_grad);

  apply_update(state.gmm.flat, gmm_grad, state.opt_gmm, config.gmm_lr, config.optimizer);
  state.gmm.clamp_scales();
  if (const char* sgd_lr = std::getenv("EXP_ENC_SGD")) {
    double gn = 0.0;
    for (double g : enc_grad) gn += g * g;
    gn = std::sqrt(gn);
    if (gn > 1.0) { for (double& g : enc_grad) g /= gn; }
    apply_update(state.encoder.flat, enc_grad, state.opt_encoder, std::stod(sgd_lr), "sgd");
  } else {
    apply_update(state.encoder.flat, enc_grad, state.opt_encoder, cosine_decayed_lr(state), config.optimizer);
  }

  // (c) anchor moving averages, keyed by the classifier's label, fixed order.
  for (std::size_t i = 0; i < anchor_batch.size(); ++i) {
    for (std::size_t q = 0; q < k; ++q) {
      state.anchors = update_anchor(state.anchors, labels.gmm_rank[i][q], labels.sims[i][q]);
    }
  }

  ++state.phase2_done;
  StepMetrics metrics;
  metrics.step = state.global_step();
  metrics.phase = 2;
  metrics.ctl_loss = ctl_loss;
  metrics.mle_loss = mle;
  metrics.anchors = state.anchors.s;
  metrics.label_hist = std::move(label_hist);
  return metrics;
}

namespace {

void emit(std::ostream* metrics, const StepMetrics& m) {
  if (metrics != nullptr) *metrics << m.to_json_line() << '\n';
}

/// Abort-and-dump policy: a step that produces a non-finite loss (or blows up
/// outright, e.g. an overflowed density) saves the current state for
/// post-mortem and stops the run.
StepMetrics guarded_step(TrainerState& state, const std::string& diagnostic_path,
                         const std::function<StepMetrics()>& step) {
  try {
    const StepMetrics m = step();
    if (!std::isfinite(m.ctl_loss) || !std::isfinite(m.mle_loss)) {
      throw std::runtime_error("non-finite loss");
    }
    return m;
  } catch (const std::exception& e) {
    std::string message = "train: aborted at step " + std::to_string(state.global_step() + 1) + ": " + e.what();
    if (!diagnostic_path.empty()) {
      save_checkpoint(state, diagnostic_path);
      message += ", state dumped to " + diagnostic_path;
    }
    throw std::runtime_error(message);
  }
}

}  // namespace

void train(TrainerState& state, std::span<const std::pair<Sentence, Sentence>> parallel,
           std::span<const Sentence> monolingual_pool, std::ostream* metrics,
           const std::string& diagnostic_path, bool stop_after_phase1, std::size_t max_new_steps) {
  const auto& config = state.config;
  std::size_t budget = max_new_steps;
  if (state.phase1_done < config.phase1_steps && parallel.empty()) {
    throw std::invalid_argument("train: phase 1 requires a parallel corpus");
  }
  while (state.phase1_done < config.phase1_steps && budget > 0) {
    std::vector<std::pair<Sentence, Sentence>> batch;
    batch.reserve(config.batch_size);
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      batch.push_back(parallel[state.rng.uniform_index(parallel.size())]);
    }
    const StepMetrics m =
        guarded_step(state, diagnostic_path, [&] { return phase1_step(state, batch); });
    --budget;
    emit(metrics, m);
  }
  if (state.phase1_done < config.phase1_steps) return;  // budget exhausted

  if (stop_after_phase1 || state.phase2_done >= config.phase2_steps || budget == 0) return;
  if (monolingual_pool.empty()) throw std::invalid_argument("train: phase 2 requires monolingual corpora");

  auto sample_batch = [&] {
    std::vector<Sentence> batch;
    batch.reserve(config.batch_size);
    for (std::size_t i = 0; i < config.batch_size; ++i) {
      batch.push_back(monolingual_pool[state.rng.uniform_index(monolingual_pool.size())]);
    }
    return batch;
  };

  if (state.queue.size() == 0 && state.phase2_done == 0) {
    // The momentum machinery only exists in the EM phase, and the EM
    // objectives are new: start the momentum copy from the warmed-up weights
    // and both optimizers from scratch.
    state.momentum_encoder = state.encoder;
    state.opt_encoder = OptimizerState{};
    state.opt_gmm = OptimizerState{};
  }

  while (state.phase2_done < config.phase2_steps && budget > 0) {
    const std::vector<Sentence> batch = sample_batch();
    const StepMetrics m = guarded_step(state, diagnostic_path, [&] {
      // Queue the batch through the momentum encoder first (MoCo style), so
      // every anchor faces its own key as a guaranteed near-paraphrase.
      ema_update(state.momentum_encoder, state.encoder, config.moco_momentum);
      const std::vector<Vec> keys = encode_batch(state.momentum_encoder, batch);
      for (std::size_t i = 0; i < batch.size(); ++i) state.queue.push(keys[i], batch[i].language);
      const EstepLabels labels = estep_labels(state, batch);
      return mstep_update(state, batch, labels);
    });
    --budget;
    emit(metrics, m);
  }
}

namespace {

ordered_json encoder_shape_json(const TrainConfig& config) {
  return ordered_json{{"vocab_size", config.vocab_size}, {"hidden", config.hidden},
                      {"dim", config.dim},               {"layers", config.layers},
                      {"max_len", config.max_len},       {"n_ranks", config.n_ranks}};
}

ordered_json optimizer_json(const OptimizerState& opt) {
  return ordered_json{{"step", opt.step}, {"m", opt.m}, {"v", opt.v}};
}

OptimizerState optimizer_from_json(const ordered_json& j) {
  OptimizerState opt;
  opt.step = j.at("step").get<std::size_t>();
  opt.m = j.at("m").get<Vec>();
  opt.v = j.at("v").get<Vec>();
  return opt;
}

}  // namespace

std::string checkpoint_to_json(const TrainerState& state) {
  ordered_json j;
  j["format_version"] = 1;
  j["shape"] = encoder_shape_json(state.config);
  j["flat_params"] = state.encoder.flat;
  j["momentum_flat_params"] = state.momentum_encoder.flat;
  j["gmm"] = ordered_json{{"n_ranks", state.gmm.n_ranks}, {"dim", state.gmm.dim}, {"flat", state.gmm.flat}};
  j["anchors"] = ordered_json{{"s", state.anchors.s}, {"momentum", state.anchors.momentum}};
  ordered_json queue = ordered_json::array();
  for (const auto& [emb, lang] : state.queue.entries) {
    queue.push_back(ordered_json{{"lang", lang}, {"v", emb}});
  }
  j["queue"] = ordered_json{{"capacity", state.queue.capacity}, {"entries", std::move(queue)}};
  j["opt_encoder"] = optimizer_json(state.opt_encoder);
  j["opt_gmm"] = optimizer_json(state.opt_gmm);
  j["rng"] = state.rng.serialize();
  j["progress"] = ordered_json{{"phase1_done", state.phase1_done}, {"phase2_done", state.phase2_done}};
  j["config"] = ordered_json::parse(state.config.to_json());
  return j.dump();
}

TrainerState checkpoint_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: parse failure: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != 1) {
      throw std::runtime_error("checkpoint: unsupported format_version " + std::to_string(version));
    }
    TrainerState state;
    state.config = TrainConfig::from_json(j.at("config").dump());

    const auto& shape = j.at("shape");
    EncoderConfig ec{shape.at("vocab_size").get<std::size_t>(), shape.at("hidden").get<std::size_t>(),
                     shape.at("dim").get<std::size_t>(), shape.at("layers").get<std::size_t>(),
                     shape.at("max_len").get<std::size_t>()};
    ec.validate();
    state.encoder.cfg = ec;
    state.encoder.flat = j.at("flat_params").get<Vec>();
    if (state.encoder.flat.size() != encoder_param_count(ec)) {
      throw std::runtime_error("checkpoint: flat_params size does not match shape");
    }
    state.momentum_encoder.cfg = ec;
    state.momentum_encoder.flat = j.at("momentum_flat_params").get<Vec>();
    if (state.momentum_encoder.flat.size() != encoder_param_count(ec)) {
      throw std::runtime_error("checkpoint: momentum_flat_params size does not match shape");
    }

    const auto& gmm = j.at("gmm");
    state.gmm.n_ranks = gmm.at("n_ranks").get<std::size_t>();
    state.gmm.dim = gmm.at("dim").get<std::size_t>();
    state.gmm.flat = gmm.at("flat").get<Vec>();
    if (state.gmm.flat.size() != state.gmm.n_ranks + 2 * state.gmm.n_ranks * state.gmm.dim) {
      throw std::runtime_error("checkpoint: gmm.flat size does not match gmm shape");
    }

    state.anchors.s = j.at("anchors").at("s").get<Vec>();
    state.anchors.momentum = j.at("anchors").at("momentum").get<double>();
    if (state.anchors.s.size() != state.config.n_ranks) {
      throw std::runtime_error("checkpoint: anchors.s has the wrong rank count");
    }

    state.queue.capacity = j.at("queue").at("capacity").get<std::size_t>();
    for (const auto& entry : j.at("queue").at("entries")) {
      state.queue.entries.emplace_back(entry.at("v").get<Vec>(), entry.at("lang").get<std::uint32_t>());
    }
    state.opt_encoder = optimizer_from_json(j.at("opt_encoder"));
    state.opt_gmm = optimizer_from_json(j.at("opt_gmm"));
    state.rng = SeededRng::deserialize(j.at("rng").get<std::string>());
    state.phase1_done = j.at("progress").at("phase1_done").get<std::size_t>();
    state.phase2_done = j.at("progress").at("phase2_done").get<std::size_t>();
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainerState& state, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp);
    out << checkpoint_to_json(state) << '\n';
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

TrainerState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace rankem
