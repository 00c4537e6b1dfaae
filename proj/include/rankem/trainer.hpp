#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankem/contrast.hpp"
#include "rankem/encoder.hpp"
#include "rankem/gmm.hpp"
#include "rankem/rng.hpp"

namespace rankem {

struct TrainConfig {
  std::size_t n_ranks = 4;
  std::size_t dim = 16;
  std::size_t hidden = 32;
  std::size_t layers = 2;
  std::size_t max_len = 64;
  std::size_t vocab_size = 0;  // 0: inferred from the corpus by the caller
  double tau_base = 0.04;
  double tau_growth = 1.5;
  std::size_t queue_capacity = 256;
  double moco_momentum = 0.999;
  double anchor_momentum = 0.999;
  double gmm_lr = 3e-5;         // M-step classifier rate; the EM phase wants a
                                // slowly-moving quantizer
  double gmm_warmup_lr = 3e-3;  // phase-1 rate; the mixture trains from scratch
  double encoder_lr_peak = 5e-4;  // cosine-decayed over the configured budget
  std::size_t batch_size = 32;
  std::size_t virtuals_per_pair = 2;
  std::size_t phase1_steps = 500;
  std::size_t phase2_steps = 1000;
  std::uint64_t seed = 1;
  std::string optimizer = "adam";  // or "sgd"

  void validate() const;
  TemperatureSchedule temperatures() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

/// Adam moments (beta1 = 0.9, beta2 = 0.999) or a bare step counter for sgd.
struct OptimizerState {
  std::size_t step = 0;
  Vec m;
  Vec v;
};

/// One gradient step. lr <= 0 leaves the parameters untouched but still
/// advances the moments, so schedules stay aligned.
void apply_update(Vec& params, const Vec& grad, OptimizerState& state, double lr,
                  const std::string& optimizer);

/// FIFO of momentum-encoder embeddings tagged with their language.
struct EmQueue {
  std::size_t capacity = 0;
  std::deque<std::pair<Vec, std::uint32_t>> entries;

  void push(Vec embedding, std::uint32_t language);
  std::size_t size() const { return entries.size(); }
};

struct TrainerState {
  TrainConfig config;
  EncoderParams encoder;
  EncoderParams momentum_encoder;
  GmmParams gmm;
  AnchorSet anchors;
  EmQueue queue;
  OptimizerState opt_encoder;
  OptimizerState opt_gmm;
  SeededRng rng{0};
  std::size_t phase1_done = 0;
  std::size_t phase2_done = 0;

  std::size_t global_step() const { return phase1_done + phase2_done; }
};

/// Fresh state: encoder sampled from the seed, momentum copy identical, GMM
/// staged along a random direction, anchors at (N-r+1)/N.
TrainerState init_trainer(const TrainConfig& config);

struct StepMetrics {
  std::size_t step = 0;
  int phase = 0;
  double ctl_loss = 0.0;
  double mle_loss = 0.0;
  Vec anchors;
  std::vector<std::size_t> label_hist;

  std::string to_json_line() const;
};

/// Warm-up step on parallel bitext: InfoNCE with in-batch negatives for the
/// encoder, interpolation-labeled MLE for the classifier, Adam for both,
/// momentum copy refreshed. Needs at least two pairs.
StepMetrics phase1_step(TrainerState& state, std::span<const std::pair<Sentence, Sentence>> batch);

struct EstepLabels {
  std::vector<std::vector<std::size_t>> gmm_rank;      // [anchor][queue slot]
  std::vector<std::vector<std::size_t>> encoder_rank;  // [anchor][queue slot]
  std::vector<std::vector<double>> sims;               // [anchor][queue slot]
};

/// Labels every (anchor, queue) pair with both modules' rank predictions.
/// Pure: no parameter moves. Errors on an empty queue.
EstepLabels estep_labels(const TrainerState& state, std::span<const Sentence> anchor_batch);

/// M-step: classifier step on the encoder's labels, encoder step on the
/// classifier's labels (queue side detached), anchor moving averages in (i,k)
/// order, then momentum EMA + enqueue of the batch.
StepMetrics mstep_update(TrainerState& state, std::span<const Sentence> anchor_batch,
                         const EstepLabels& labels);

/// Runs the remaining phase-1 and phase-2 budgets. One metrics line per step
/// is appended to metrics when given. Phase 2 sees only the bare sentence
/// stream, never pairing metadata. On a non-finite loss the state is dumped to
/// diagnostic_path (when non-empty) and a runtime_error is thrown.
/// stop_after_phase1 finishes the warm-up and returns with the phase-2 budget
/// untouched (the warmup subcommand and ablation baselines use this).
/// max_new_steps caps how many steps this call may run; checkpointing mid-run
/// and resuming later replays the interrupted run exactly.
void train(TrainerState& state, std::span<const std::pair<Sentence, Sentence>> parallel,
           std::span<const Sentence> monolingual_pool, std::ostream* metrics,
           const std::string& diagnostic_path = "", bool stop_after_phase1 = false,
           std::size_t max_new_steps = SIZE_MAX);

std::string checkpoint_to_json(const TrainerState& state);
TrainerState checkpoint_from_json(const std::string& text);
void save_checkpoint(const TrainerState& state, const std::string& path);
TrainerState load_checkpoint(const std::string& path);

}  // namespace rankem
