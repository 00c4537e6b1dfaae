#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rankem/encoder.hpp"
#include "rankem/numerics.hpp"
#include "rankem/rng.hpp"

using namespace rankem;

namespace {

EncoderParams identity_encoder(std::size_t vocab, std::size_t dim) {
  EncoderConfig cfg{vocab, dim, dim, 1, 16};
  EncoderParams params{cfg, Vec(encoder_param_count(cfg), 0.0)};
  for (std::size_t r = 0; r < dim; ++r) {
    params.flat[params.layer_weight_offset(0) + r * dim + r] = 1.0;
  }
  return params;
}

/// Straight-line re-evaluation that shares no code with encode().
Vec reference_encode(const EncoderParams& params, const Sentence& sentence) {
  const auto& cfg = params.cfg;
  Vec pooled(cfg.hidden, 0.0);
  for (std::uint32_t id : sentence.tokens) {
    for (std::size_t j = 0; j < cfg.hidden; ++j) {
      pooled[j] += params.flat[id * cfg.hidden + j] / static_cast<double>(sentence.tokens.size());
    }
  }
  Vec current = pooled;
  for (std::size_t p = 0; p < cfg.layers; ++p) {
    const std::size_t out = p + 1 == cfg.layers ? cfg.dim : cfg.hidden;
    Vec next(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      next[r] = params.flat[params.layer_bias_offset(p) + r];
      for (std::size_t c = 0; c < cfg.hidden; ++c) {
        next[r] += params.flat[params.layer_weight_offset(p) + r * cfg.hidden + c] * current[c];
      }
      if (p + 1 < cfg.layers) next[r] = std::tanh(next[r]);
    }
    current = next;
  }
  double len = 0.0;
  for (double v : current) len += v * v;
  len = std::sqrt(len);
  for (double& v : current) v /= len;
  return current;
}

}  // namespace

TEST_SUITE_BEGIN("encoder");

TEST_CASE("encode normalizes a single token row") {
  EncoderParams params = identity_encoder(2, 2);
  params.flat[0] = 3.0;
  params.flat[1] = 4.0;
  const Vec emb = encode(params, Sentence{{0}, 0});
  CHECK(emb[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(emb[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("encode rejects cancelled pooling as degenerate") {
  EncoderParams params = identity_encoder(2, 2);
  params.flat[0] = 1.0;
  params.flat[1] = -0.5;
  params.flat[2] = -1.0;
  params.flat[3] = 0.5;
  CHECK_THROWS_WITH_AS(encode(params, Sentence{{0, 1}, 0}), "degenerate embedding", std::runtime_error);
}

TEST_CASE("encode matches an independent straight-line evaluation") {
  SeededRng rng(21);
  EncoderConfig cfg{30, 8, 5, 3, 16};
  const EncoderParams params = init_encoder(cfg, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Sentence s;
    const std::size_t len = 1 + rng.uniform_index(9);
    for (std::size_t i = 0; i < len; ++i) {
      s.tokens.push_back(static_cast<std::uint32_t>(rng.uniform_index(cfg.vocab_size)));
    }
    const Vec got = encode(params, s);
    const Vec want = reference_encode(params, s);
    for (std::size_t j = 0; j < cfg.dim; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
    CHECK(norm(got) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("encode is invariant to token order") {
  SeededRng rng(5);
  const EncoderParams params = init_encoder(EncoderConfig{20, 6, 4, 2, 16}, rng);
  Sentence s{{3, 7, 7, 1, 15}, 0};
  const Vec base = encode(params, s);
  std::reverse(s.tokens.begin(), s.tokens.end());
  const Vec reversed = encode(params, s);
  for (std::size_t j = 0; j < base.size(); ++j) {
    CHECK(reversed[j] == doctest::Approx(base[j]).epsilon(1e-12));
  }
}

TEST_CASE("encode validates tokens") {
  SeededRng rng(5);
  const EncoderParams params = init_encoder(EncoderConfig{10, 4, 3, 1, 8}, rng);
  CHECK_THROWS_AS(encode(params, Sentence{{10}, 0}), std::invalid_argument);
  CHECK_THROWS_AS(encode(params, Sentence{{}, 0}), std::invalid_argument);
}

TEST_CASE("encode_backward zero and radial upstreams") {
  SeededRng rng(9);
  const EncoderParams params = init_encoder(EncoderConfig{12, 5, 4, 2, 8}, rng);
  const Sentence s{{1, 4, 9}, 0};
  Vec grad(params.flat.size(), 0.0);

  std::vector<Sentence> sentences{s};
  std::vector<Vec> upstream{Vec(4, 0.0)};
  encode_backward(params, sentences, upstream, grad);
  for (double g : grad) CHECK(g == 0.0);

  // Radial upstream: the tangent projection annihilates it.
  upstream[0] = encode(params, s);
  encode_backward(params, sentences, upstream, grad);
  for (double g : grad) CHECK(std::abs(g) <= 1e-15);
}

TEST_CASE("encode_backward passes finite differences") {
  SeededRng rng(31);
  const EncoderConfig cfg{16, 6, 4, 2, 8};
  const EncoderParams params = init_encoder(cfg, rng);
  std::vector<Sentence> sentences;
  std::vector<Vec> upstream;
  for (int i = 0; i < 3; ++i) {
    Sentence s;
    const std::size_t len = 1 + rng.uniform_index(5);
    for (std::size_t t = 0; t < len; ++t) {
      s.tokens.push_back(static_cast<std::uint32_t>(rng.uniform_index(cfg.vocab_size)));
    }
    sentences.push_back(s);
    Vec u(cfg.dim);
    for (double& x : u) x = rng.uniform(-1.0, 1.0);
    upstream.push_back(u);
  }
  Vec analytic(params.flat.size(), 0.0);
  encode_backward(params, sentences, upstream, analytic);

  auto loss = [&](const Vec& flat) {
    EncoderParams p = params;
    p.flat = flat;
    double acc = 0.0;
    for (std::size_t i = 0; i < sentences.size(); ++i) acc += dot(upstream[i], encode(p, sentences[i]));
    return acc;
  };
  const GradCheckReport report = grad_check(loss, params.flat, analytic, 1e-5, 1e-4);
  CHECK(report.passed());
}

TEST_CASE("encode_backward validates shapes") {
  SeededRng rng(2);
  const EncoderParams params = init_encoder(EncoderConfig{8, 4, 3, 1, 8}, rng);
  Vec grad(params.flat.size(), 0.0);
  std::vector<Sentence> sentences{Sentence{{1}, 0}};
  std::vector<Vec> upstream{Vec(2, 0.0)};  // wrong dim
  CHECK_THROWS_AS(encode_backward(params, sentences, upstream, grad), std::invalid_argument);
}

TEST_CASE("ema_update endpoints and midpoint") {
  SeededRng rng(14);
  const EncoderConfig cfg{8, 4, 3, 1, 8};
  EncoderParams fast = init_encoder(cfg, rng);
  EncoderParams slow = init_encoder(cfg, rng);
  const Vec slow_before = slow.flat;

  EncoderParams frozen = slow;
  ema_update(frozen, fast, 1.0);
  CHECK(frozen.flat == slow_before);

  EncoderParams copied = slow;
  ema_update(copied, fast, 0.0);
  CHECK(copied.flat == fast.flat);

  EncoderParams mid{cfg, Vec(slow.flat.size(), 0.0)};
  EncoderParams twos{cfg, Vec(slow.flat.size(), 2.0)};
  ema_update(mid, twos, 0.5);
  for (double v : mid.flat) CHECK(v == doctest::Approx(1.0));

  EncoderParams other = init_encoder(EncoderConfig{9, 4, 3, 1, 8}, rng);
  CHECK_THROWS_AS(ema_update(slow, other, 0.5), std::invalid_argument);
}

TEST_SUITE_END();
