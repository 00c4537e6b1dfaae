#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rankem/numerics.hpp"
#include "rankem/rng.hpp"

namespace rankem {

struct Sentence {
  std::vector<std::uint32_t> tokens;
  std::uint32_t language = 0;
};

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden = 32;   // token-row width and intermediate layer width
  std::size_t dim = 16;      // embedding dimension
  std::size_t layers = 2;    // affine layers; tanh between them, none after the last
  std::size_t max_len = 64;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Trainable state: token table followed by the projection stack, kept flat in
/// declaration order so optimizers and checkpoints can treat it as one vector.
/// Layout: token_table (vocab x hidden), then per layer W (out x in, row-major)
/// and bias (out). Layer p maps hidden -> hidden except the last, hidden -> dim.
struct EncoderParams {
  EncoderConfig cfg;
  Vec flat;

  std::size_t layer_input(std::size_t p) const { return cfg.hidden; (void)p; }
  std::size_t layer_output(std::size_t p) const { return p + 1 == cfg.layers ? cfg.dim : cfg.hidden; }
  std::size_t table_offset() const { return 0; }
  std::size_t layer_weight_offset(std::size_t p) const;
  std::size_t layer_bias_offset(std::size_t p) const;

  std::span<const double> token_row(std::uint32_t id) const;
};

std::size_t encoder_param_count(const EncoderConfig& cfg);

/// Fresh parameters, every entry uniform(-1/sqrt(hidden), 1/sqrt(hidden)).
EncoderParams init_encoder(const EncoderConfig& cfg, SeededRng& rng);

/// Mean-pool token rows, run the projection stack, L2-normalize. The result
/// has unit norm; a pre-normalization norm below 1e-12 is an error rather than
/// a clamp.
Vec encode(const EncoderParams& params, const Sentence& sentence);

/// Exact gradient of sum_i <upstream[i], encode(params, sentences[i])> with
/// respect to every parameter, accumulated into grad (size of params.flat).
/// The normalization Jacobian (I - gg^T)/|z| is included.
void encode_backward(const EncoderParams& params, std::span<const Sentence> sentences,
                     std::span<const Vec> upstream, Vec& grad);

/// slow <- m * slow + (1 - m) * fast, elementwise over the flat vectors.
void ema_update(EncoderParams& slow, const EncoderParams& fast, double m);

}  // namespace rankem
