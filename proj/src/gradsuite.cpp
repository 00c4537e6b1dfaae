#include "rankem/gradsuite.hpp"

#include <utility>

#include "rankem/contrast.hpp"
#include "rankem/encoder.hpp"
#include "rankem/gmm.hpp"
#include "rankem/numerics.hpp"
#include "rankem/rng.hpp"

namespace rankem {

namespace {

constexpr std::size_t kVocab = 24;
constexpr std::size_t kHidden = 8;
constexpr std::size_t kDim = 6;
constexpr std::size_t kLayers = 2;

Sentence random_sentence(SeededRng& rng) {
  Sentence s;
  const std::size_t len = 2 + rng.uniform_index(5);
  for (std::size_t i = 0; i < len; ++i) {
    s.tokens.push_back(static_cast<std::uint32_t>(rng.uniform_index(kVocab)));
  }
  return s;
}

EncoderParams make_encoder(SeededRng& rng) {
  EncoderConfig cfg{kVocab, kHidden, kDim, kLayers, 16};
  return init_encoder(cfg, rng);
}

GradSuiteEntry check(const std::string& name, const std::function<double(const Vec&)>& loss,
                     const Vec& params, const Vec& analytic, double step, double tol) {
  const GradCheckReport report = grad_check(loss, params, analytic, step, tol);
  return {name, report.max_rel_error, report.entries.size(), report.passed()};
}

GradSuiteEntry infonce_case(SeededRng& rng, double step, double tol) {
  EncoderParams params = make_encoder(rng);
  const Sentence anchor = random_sentence(rng);
  const Sentence positive = random_sentence(rng);
  std::vector<Sentence> negatives;
  for (int i = 0; i < 3; ++i) negatives.push_back(random_sentence(rng));

  auto loss_of = [&](const Vec& flat) {
    EncoderParams p = params;
    p.flat = flat;
    std::vector<Vec> neg_emb;
    for (const auto& n : negatives) neg_emb.push_back(encode(p, n));
    return infonce(encode(p, anchor), encode(p, positive), neg_emb, 0.07).loss;
  };

  std::vector<Vec> neg_emb;
  for (const auto& n : negatives) neg_emb.push_back(encode(params, n));
  const InfoNceResult res = infonce(encode(params, anchor), encode(params, positive), neg_emb, 0.07);
  std::vector<Sentence> sentences{anchor, positive};
  std::vector<Vec> upstream{res.d_anchor, res.d_positive};
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    sentences.push_back(negatives[i]);
    upstream.push_back(res.d_negatives[i]);
  }
  Vec grad(params.flat.size(), 0.0);
  encode_backward(params, sentences, upstream, grad);
  return check("infonce through encoder", loss_of, params.flat, grad, step, tol);
}

GradSuiteEntry mle_case(SeededRng& rng, double step, double tol) {
  EncoderParams enc = make_encoder(rng);
  GmmParams gmm = init_gmm(4, kDim, rng);
  // Checked vector = [encoder | gmm], so the chain rule through the diff and
  // the classifier's own parameters are exercised together.
  std::vector<std::pair<Sentence, Sentence>> pairs;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 3; ++i) {
    pairs.emplace_back(random_sentence(rng), random_sentence(rng));
    labels.push_back(1 + rng.uniform_index(4));
  }

  auto split = [&](const Vec& joint) {
    EncoderParams p = enc;
    p.flat.assign(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(enc.flat.size()));
    GmmParams g = gmm;
    g.flat.assign(joint.begin() + static_cast<std::ptrdiff_t>(enc.flat.size()), joint.end());
    return std::make_pair(std::move(p), std::move(g));
  };
  auto batch_of = [&](const EncoderParams& p) {
    std::vector<GmmBatchItem> batch;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Vec ex = encode(p, pairs[i].first);
      const Vec ey = encode(p, pairs[i].second);
      Vec diff(kDim);
      for (std::size_t j = 0; j < kDim; ++j) diff[j] = ex[j] - ey[j];
      batch.push_back({std::move(diff), labels[i]});
    }
    return batch;
  };
  auto loss_of = [&](const Vec& joint) {
    auto [p, g] = split(joint);
    Vec scratch(g.flat.size(), 0.0);
    return mle_loss(g, batch_of(p), scratch);
  };

  Vec joint(enc.flat);
  joint.insert(joint.end(), gmm.flat.begin(), gmm.flat.end());

  Vec gmm_grad(gmm.flat.size(), 0.0);
  std::vector<Vec> d_diffs;
  mle_loss(gmm, batch_of(enc), gmm_grad, &d_diffs);
  std::vector<Sentence> sentences;
  std::vector<Vec> upstream;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sentences.push_back(pairs[i].first);
    upstream.push_back(d_diffs[i]);
    Vec negated(kDim);
    for (std::size_t j = 0; j < kDim; ++j) negated[j] = -d_diffs[i][j];
    sentences.push_back(pairs[i].second);
    upstream.push_back(std::move(negated));
  }
  Vec enc_grad(enc.flat.size(), 0.0);
  encode_backward(enc, sentences, upstream, enc_grad);

  Vec analytic(enc_grad);
  analytic.insert(analytic.end(), gmm_grad.begin(), gmm_grad.end());
  return check("gmm mle through encoder", loss_of, joint, analytic, step, tol);
}

GradSuiteEntry ranking_case(SeededRng& rng, double step, double tol) {
  EncoderParams params = make_encoder(rng);
  const Sentence anchor = random_sentence(rng);
  std::vector<std::vector<Sentence>> groups(4);
  for (std::size_t r = 0; r < groups.size(); ++r) {
    const std::size_t count = rng.uniform_index(3);  // empty groups stay legal
    for (std::size_t i = 0; i < count; ++i) groups[r].push_back(random_sentence(rng));
  }
  groups[0].push_back(random_sentence(rng));  // at least one positive term
  const TemperatureSchedule temps = TemperatureSchedule::geometric(4, 0.04, 1.5);

  auto batch_of = [&](const EncoderParams& p) {
    RankedBatch batch;
    batch.anchor = encode(p, anchor);
    batch.groups.resize(groups.size());
    for (std::size_t r = 0; r < groups.size(); ++r) {
      for (const auto& s : groups[r]) batch.groups[r].push_back(encode(p, s));
    }
    return batch;
  };
  auto loss_of = [&](const Vec& flat) {
    EncoderParams p = params;
    p.flat = flat;
    return ranking_infonce(batch_of(p), temps).loss;
  };

  const RankingResult res = ranking_infonce(batch_of(params), temps);
  std::vector<Sentence> sentences{anchor};
  std::vector<Vec> upstream{res.d_anchor};
  for (std::size_t r = 0; r < groups.size(); ++r) {
    for (std::size_t i = 0; i < groups[r].size(); ++i) {
      sentences.push_back(groups[r][i]);
      upstream.push_back(res.d_groups[r][i]);
    }
  }
  Vec grad(params.flat.size(), 0.0);
  encode_backward(params, sentences, upstream, grad);
  return check("ranking infonce through encoder", loss_of, params.flat, grad, step, tol);
}

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(std::uint64_t seed, double step, double tol) {
  SeededRng rng(seed);
  std::vector<GradSuiteEntry> entries;
  entries.push_back(infonce_case(rng, step, tol));
  entries.push_back(mle_case(rng, step, tol));
  entries.push_back(ranking_case(rng, step, tol));
  return entries;
}

}  // namespace rankem
