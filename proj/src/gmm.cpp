#include "rankem/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rankem {

namespace {
constexpr double kMinLogScale = -9.21034037197618273607;  // log(1e-4)

void check_rank(const GmmParams& params, std::size_t rank) {
  if (rank < 1 || rank > params.n_ranks) throw std::invalid_argument("rank out of range");
}
}  // namespace

std::span<const double> GmmParams::mean(std::size_t rank) const {
  return {flat.data() + means_offset() + (rank - 1) * dim, dim};
}

std::span<const double> GmmParams::log_scale(std::size_t rank) const {
  return {flat.data() + log_scales_offset() + (rank - 1) * dim, dim};
}

Vec GmmParams::priors() const {
  const auto logits = prior_logits();
  const double lse = logsumexp(logits);
  Vec p(n_ranks);
  for (std::size_t r = 0; r < n_ranks; ++r) p[r] = std::exp(logits[r] - lse);
  return p;
}

void GmmParams::clamp_scales() {
  for (std::size_t i = log_scales_offset(); i < flat.size(); ++i) {
    flat[i] = std::max(flat[i], kMinLogScale);
  }
}

GmmParams init_gmm(std::size_t n_ranks, std::size_t dim, SeededRng& rng) {
  if (n_ranks < 2) throw std::invalid_argument("init_gmm: need at least two ranks");
  if (dim == 0) throw std::invalid_argument("init_gmm: zero dimension");
  GmmParams params{n_ranks, dim, Vec(n_ranks + 2 * n_ranks * dim, 0.0)};
  Vec direction(dim);
  for (double& x : direction) x = rng.normal();
  const double len = norm(direction);
  for (double& x : direction) x /= len;
  for (std::size_t r = 0; r < n_ranks; ++r) {
    const double spacing = static_cast<double>(r) / static_cast<double>(n_ranks - 1);
    for (std::size_t j = 0; j < dim; ++j) {
      params.flat[params.means_offset() + r * dim + j] = direction[j] * spacing;
    }
  }
  return params;  // prior logits and log scales stay 0: uniform priors, unit scales
}

double gaussian_log_density(const GmmParams& params, std::size_t rank, std::span<const double> diff) {
  check_rank(params, rank);
  if (diff.size() != params.dim) throw std::invalid_argument("gaussian_log_density: dimension mismatch");
  const auto mu = params.mean(rank);
  const auto ls = params.log_scale(rank);
  double acc = -0.5 * static_cast<double>(params.dim) * std::log(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < params.dim; ++j) {
    const double z = (diff[j] - mu[j]) * std::exp(-ls[j]);
    acc -= ls[j];
    acc -= 0.5 * z * z;
  }
  return acc;
}

namespace {

/// log(pi_r) + log N_r(diff) for every rank.
Vec joint_log_scores(const GmmParams& params, std::span<const double> diff) {
  const auto logits = params.prior_logits();
  const double logit_lse = logsumexp(logits);
  Vec scores(params.n_ranks);
  for (std::size_t r = 0; r < params.n_ranks; ++r) {
    scores[r] = logits[r] - logit_lse + gaussian_log_density(params, r + 1, diff);
  }
  return scores;
}

}  // namespace

Vec posterior(const GmmParams& params, std::span<const double> diff) {
  Vec scores = joint_log_scores(params, diff);
  const double lse = logsumexp(scores);
  for (double& s : scores) s = std::exp(s - lse);
  return scores;
}

std::size_t predict_rank(const GmmParams& params, std::span<const double> emb_x,
                         std::span<const double> emb_y) {
  if (emb_x.size() != emb_y.size()) throw std::invalid_argument("predict_rank: dimension mismatch");
  Vec diff(emb_x.size());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = emb_x[j] - emb_y[j];
  const Vec scores = joint_log_scores(params, diff);
  std::size_t best = 0;
  for (std::size_t r = 1; r < scores.size(); ++r) {
    if (scores[r] > scores[best]) best = r;
  }
  return best + 1;
}

double mle_loss(const GmmParams& params, std::span<const GmmBatchItem> batch, Vec& grad,
                std::vector<Vec>* d_diffs) {
  if (batch.empty()) throw std::invalid_argument("mle_loss: empty batch");
  if (grad.size() != params.flat.size()) throw std::invalid_argument("mle_loss: gradient shape mismatch");
  if (d_diffs != nullptr) d_diffs->assign(batch.size(), Vec(params.dim, 0.0));

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& item = batch[b];
    check_rank(params, item.label);
    const Vec scores = joint_log_scores(params, item.diff);
    const double lse = logsumexp(scores);
    total += (lse - scores[item.label - 1]) * inv_batch;

    for (std::size_t r = 0; r < params.n_ranks; ++r) {
      const double resp = std::exp(scores[r] - lse);
      const double coeff = (resp - (r + 1 == item.label ? 1.0 : 0.0)) * inv_batch;
      // d loss / d prior_logit_j = (posterior_j - [j == label]) / batch;
      // the softmax terms of log(pi) cancel because both distributions sum to 1.
      grad[r] += coeff;
      if (coeff == 0.0) continue;
      const auto mu = params.mean(r + 1);
      const auto ls = params.log_scale(r + 1);
      double* gmu = grad.data() + params.means_offset() + r * params.dim;
      double* gls = grad.data() + params.log_scales_offset() + r * params.dim;
      for (std::size_t j = 0; j < params.dim; ++j) {
        const double inv_sigma = std::exp(-ls[j]);
        const double z = (item.diff[j] - mu[j]) * inv_sigma;
        const double dmu = coeff * z * inv_sigma;  // d logN / d mu = (x - mu) / sigma^2
        gmu[j] += dmu;
        gls[j] += coeff * (z * z - 1.0);           // d logN / d log sigma = z^2 - 1
        if (d_diffs != nullptr) (*d_diffs)[b][j] -= dmu;  // d logN / d diff = -(d logN / d mu)
      }
    }
  }
  return total;
}

}  // namespace rankem
