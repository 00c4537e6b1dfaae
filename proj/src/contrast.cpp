#include "rankem/contrast.hpp"

#include <cmath>
#include <stdexcept>

namespace rankem {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  return dot(a, b);
}

InfoNceResult infonce(std::span<const double> anchor, std::span<const double> positive,
                      std::span<const Vec> negatives, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("infonce: temperature must be positive");
  if (negatives.empty()) throw std::invalid_argument("infonce: need at least one negative");
  const std::size_t d = anchor.size();

  Vec scaled(1 + negatives.size());
  scaled[0] = cosine(anchor, positive) / tau;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    scaled[1 + i] = cosine(anchor, negatives[i]) / tau;
  }
  const double lse = logsumexp(scaled);

  InfoNceResult result;
  result.loss = lse - scaled[0];
  result.d_anchor.assign(d, 0.0);
  result.d_positive.assign(d, 0.0);
  result.d_negatives.assign(negatives.size(), Vec(d, 0.0));

  const double w_pos = std::exp(scaled[0] - lse);
  for (std::size_t j = 0; j < d; ++j) {
    result.d_anchor[j] += (w_pos - 1.0) * positive[j] / tau;
    result.d_positive[j] = (w_pos - 1.0) * anchor[j] / tau;
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const double w = std::exp(scaled[1 + i] - lse);
    for (std::size_t j = 0; j < d; ++j) {
      result.d_anchor[j] += w * negatives[i][j] / tau;
      result.d_negatives[i][j] = w * anchor[j] / tau;
    }
  }
  return result;
}

std::pair<Vec, std::size_t> interpolate_virtual(std::span<const double> emb_y,
                                                std::span<const double> emb_neg, double lambda,
                                                std::size_t n_ranks) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("interpolate_virtual: lambda outside [0,1]");
  if (emb_y.size() != emb_neg.size()) throw std::invalid_argument("interpolate_virtual: dimension mismatch");
  Vec virt(emb_y.size());
  for (std::size_t j = 0; j < virt.size(); ++j) {
    virt[j] = (1.0 - lambda) * emb_y[j] + lambda * emb_neg[j];
  }
  const double soft = (1.0 - lambda) * 1.0 + lambda * static_cast<double>(n_ranks);
  auto rank = static_cast<std::size_t>(std::ceil(soft));
  rank = std::max<std::size_t>(1, std::min(rank, n_ranks));
  return {std::move(virt), rank};
}

TemperatureSchedule TemperatureSchedule::geometric(std::size_t n_ranks, double base, double growth) {
  TemperatureSchedule temps;
  temps.taus.resize(n_ranks);
  double tau = base;
  for (std::size_t r = 0; r < n_ranks; ++r, tau *= growth) temps.taus[r] = tau;
  temps.validate();
  return temps;
}

void TemperatureSchedule::validate() const {
  if (taus.empty()) throw std::invalid_argument("temperature schedule: empty");
  double prev = 0.0;
  for (double t : taus) {
    if (!(t > prev)) throw std::invalid_argument("temperature schedule: must be positive and strictly increasing");
    prev = t;
  }
}

RankingResult ranking_infonce(const RankedBatch& batch, const TemperatureSchedule& temps) {
  const std::size_t n_ranks = batch.groups.size();
  if (temps.taus.size() != n_ranks) throw std::invalid_argument("ranking_infonce: schedule size mismatch");
  temps.validate();
  const std::size_t d = batch.anchor.size();
  for (const auto& group : batch.groups) {
    for (const auto& y : group) {
      if (y.size() != d) throw std::invalid_argument("ranking_infonce: dimension mismatch");
    }
  }

  RankingResult result;
  result.d_anchor.assign(d, 0.0);
  result.d_groups.resize(n_ranks);
  for (std::size_t r = 0; r < n_ranks; ++r) {
    result.d_groups[r].assign(batch.groups[r].size(), Vec(d, 0.0));
  }

  // Term r uses group r as positives against groups r..N; both the numerator
  // and denominator share tau_r. An empty positive group skips the term.
  for (std::size_t r = 0; r + 1 < n_ranks; ++r) {
    const double tau = temps.taus[r];
    if (batch.groups[r].empty()) continue;

    Vec pos_scores;
    Vec all_scores;
    for (const auto& y : batch.groups[r]) pos_scores.push_back(cosine(batch.anchor, y) / tau);
    for (std::size_t q = r; q < n_ranks; ++q) {
      for (const auto& y : batch.groups[q]) all_scores.push_back(cosine(batch.anchor, y) / tau);
    }
    const double lse_pos = logsumexp(pos_scores);
    const double lse_all = logsumexp(all_scores);
    result.loss += lse_all - lse_pos;

    // d term / d s(a,y) = (softmax_all(y) - [y in group r] softmax_pos(y)) / tau
    std::size_t flat = 0;
    for (std::size_t q = r; q < n_ranks; ++q) {
      for (std::size_t k = 0; k < batch.groups[q].size(); ++k, ++flat) {
        double coeff = std::exp(all_scores[flat] - lse_all);
        if (q == r) coeff -= std::exp(pos_scores[k] - lse_pos);
        coeff /= tau;
        const auto& y = batch.groups[q][k];
        for (std::size_t j = 0; j < d; ++j) {
          result.d_anchor[j] += coeff * y[j];
          result.d_groups[q][k][j] += coeff * batch.anchor[j];
        }
      }
    }
  }
  return result;
}

AnchorSet default_anchors(std::size_t n_ranks, double momentum) {
  if (n_ranks == 0) throw std::invalid_argument("default_anchors: need at least one rank");
  if (momentum < 0.0 || momentum > 1.0) throw std::invalid_argument("default_anchors: momentum outside [0,1]");
  AnchorSet anchors;
  anchors.momentum = momentum;
  anchors.s.resize(n_ranks);
  for (std::size_t r = 0; r < n_ranks; ++r) {
    anchors.s[r] = static_cast<double>(n_ranks - r) / static_cast<double>(n_ranks);
  }
  return anchors;
}

std::size_t predict_rank_encoder(const AnchorSet& anchors, double sim) {
  if (anchors.s.empty()) throw std::invalid_argument("predict_rank_encoder: empty anchor set");
  std::size_t best = 0;
  double best_gap = std::abs(sim - anchors.s[0]);
  for (std::size_t r = 1; r < anchors.s.size(); ++r) {
    const double gap = std::abs(sim - anchors.s[r]);
    if (gap < best_gap) {
      best = r;
      best_gap = gap;
    }
  }
  return best + 1;
}

AnchorSet update_anchor(const AnchorSet& anchors, std::size_t rank, double sim) {
  if (rank < 1 || rank > anchors.s.size()) throw std::invalid_argument("update_anchor: rank out of range");
  if (!std::isfinite(sim)) throw std::invalid_argument("update_anchor: non-finite similarity");
  AnchorSet next = anchors;
  next.s[rank - 1] = anchors.momentum * anchors.s[rank - 1] + (1.0 - anchors.momentum) * sim;
  return next;
}

}  // namespace rankem
