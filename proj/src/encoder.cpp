#include "rankem/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rankem {

void EncoderConfig::validate() const {
  if (vocab_size == 0) throw std::invalid_argument("encoder config: vocab_size must be positive");
  if (hidden == 0 || dim == 0) throw std::invalid_argument("encoder config: zero width");
  if (layers == 0) throw std::invalid_argument("encoder config: need at least one layer");
  if (max_len == 0) throw std::invalid_argument("encoder config: max_len must be positive");
}

std::size_t EncoderParams::layer_weight_offset(std::size_t p) const {
  std::size_t off = cfg.vocab_size * cfg.hidden;
  for (std::size_t q = 0; q < p; ++q) off += layer_output(q) * (layer_input(q) + 1);
  return off;
}

std::size_t EncoderParams::layer_bias_offset(std::size_t p) const {
  return layer_weight_offset(p) + layer_output(p) * layer_input(p);
}

std::span<const double> EncoderParams::token_row(std::uint32_t id) const {
  if (id >= cfg.vocab_size) {
    throw std::invalid_argument("token id " + std::to_string(id) + " out of range");
  }
  return {flat.data() + static_cast<std::size_t>(id) * cfg.hidden, cfg.hidden};
}

std::size_t encoder_param_count(const EncoderConfig& cfg) {
  std::size_t count = cfg.vocab_size * cfg.hidden;
  for (std::size_t p = 0; p < cfg.layers; ++p) {
    const std::size_t out = p + 1 == cfg.layers ? cfg.dim : cfg.hidden;
    count += out * (cfg.hidden + 1);
  }
  return count;
}

EncoderParams init_encoder(const EncoderConfig& cfg, SeededRng& rng) {
  cfg.validate();
  EncoderParams params{cfg, Vec(encoder_param_count(cfg))};
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (double& p : params.flat) p = rng.uniform(-bound, bound);
  return params;
}

namespace {

struct ForwardTrace {
  Vec pooled;                       // mean of token rows
  std::vector<Vec> activations;     // input to each layer (activations[0] = pooled)
  Vec pre_norm;                     // output of the last layer
  double pre_norm_len = 0.0;
  Vec embedding;
};

ForwardTrace run_forward(const EncoderParams& params, const Sentence& sentence) {
  const auto& cfg = params.cfg;
  if (sentence.tokens.empty()) throw std::invalid_argument("encode: empty sentence");
  if (sentence.tokens.size() > cfg.max_len) throw std::invalid_argument("encode: sentence too long");

  ForwardTrace trace;
  trace.pooled.assign(cfg.hidden, 0.0);
  for (std::uint32_t id : sentence.tokens) {
    const auto row = params.token_row(id);
    for (std::size_t j = 0; j < cfg.hidden; ++j) trace.pooled[j] += row[j];
  }
  const double inv_count = 1.0 / static_cast<double>(sentence.tokens.size());
  for (double& x : trace.pooled) x *= inv_count;

  trace.activations.push_back(trace.pooled);
  Vec current = trace.pooled;
  for (std::size_t p = 0; p < cfg.layers; ++p) {
    const std::size_t in = params.layer_input(p);
    const std::size_t out = params.layer_output(p);
    const double* w = params.flat.data() + params.layer_weight_offset(p);
    const double* b = params.flat.data() + params.layer_bias_offset(p);
    Vec next(out);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b[r];
      const double* wrow = w + r * in;
      for (std::size_t c = 0; c < in; ++c) acc += wrow[c] * current[c];
      next[r] = acc;
    }
    if (p + 1 < cfg.layers) {
      for (double& x : next) x = std::tanh(x);
      trace.activations.push_back(next);
    }
    current = std::move(next);
  }
  trace.pre_norm = current;
  trace.pre_norm_len = norm(trace.pre_norm);
  if (trace.pre_norm_len < 1e-12) throw std::runtime_error("degenerate embedding");
  trace.embedding = trace.pre_norm;
  for (double& x : trace.embedding) x /= trace.pre_norm_len;
  return trace;
}

}  // namespace

Vec encode(const EncoderParams& params, const Sentence& sentence) {
  return run_forward(params, sentence).embedding;
}

void encode_backward(const EncoderParams& params, std::span<const Sentence> sentences,
                     std::span<const Vec> upstream, Vec& grad) {
  const auto& cfg = params.cfg;
  if (sentences.size() != upstream.size()) {
    throw std::invalid_argument("encode_backward: upstream/sentence count mismatch");
  }
  if (grad.size() != params.flat.size()) {
    throw std::invalid_argument("encode_backward: gradient shape mismatch");
  }

  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (upstream[s].size() != cfg.dim) {
      throw std::invalid_argument("encode_backward: upstream dimension mismatch");
    }
    const ForwardTrace trace = run_forward(params, sentences[s]);

    // Through normalization: d/dz <u, z/|z|> = (u - g <g,u>) / |z|.
    const double gu = dot(trace.embedding, upstream[s]);
    Vec delta(cfg.dim);
    for (std::size_t j = 0; j < cfg.dim; ++j) {
      delta[j] = (upstream[s][j] - trace.embedding[j] * gu) / trace.pre_norm_len;
    }

    for (std::size_t p = cfg.layers; p-- > 0;) {
      const std::size_t in = params.layer_input(p);
      const std::size_t out = params.layer_output(p);
      const double* w = params.flat.data() + params.layer_weight_offset(p);
      double* gw = grad.data() + params.layer_weight_offset(p);
      double* gb = grad.data() + params.layer_bias_offset(p);
      const Vec& input = trace.activations[p];

      Vec delta_in(in, 0.0);
      for (std::size_t r = 0; r < out; ++r) {
        const double d = delta[r];
        gb[r] += d;
        const double* wrow = w + r * in;
        double* gwrow = gw + r * in;
        for (std::size_t c = 0; c < in; ++c) {
          gwrow[c] += d * input[c];
          delta_in[c] += d * wrow[c];
        }
      }
      if (p > 0) {
        // input was produced by tanh; fold in 1 - tanh^2
        for (std::size_t c = 0; c < in; ++c) delta_in[c] *= 1.0 - input[c] * input[c];
      }
      delta = std::move(delta_in);
    }

    const double inv_count = 1.0 / static_cast<double>(sentences[s].tokens.size());
    for (std::uint32_t id : sentences[s].tokens) {
      double* row = grad.data() + static_cast<std::size_t>(id) * cfg.hidden;
      for (std::size_t j = 0; j < cfg.hidden; ++j) row[j] += delta[j] * inv_count;
    }
  }
}

void ema_update(EncoderParams& slow, const EncoderParams& fast, double m) {
  if (m < 0.0 || m > 1.0) throw std::invalid_argument("ema_update: momentum outside [0,1]");
  if (slow.flat.size() != fast.flat.size() || !(slow.cfg == fast.cfg)) {
    throw std::invalid_argument("ema_update: shape mismatch");
  }
  for (std::size_t i = 0; i < slow.flat.size(); ++i) {
    slow.flat[i] = m * slow.flat[i] + (1.0 - m) * fast.flat[i];
  }
}

}  // namespace rankem
