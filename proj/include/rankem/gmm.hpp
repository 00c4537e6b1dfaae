#pragma once

#include <span>
#include <vector>

#include "rankem/numerics.hpp"
#include "rankem/rng.hpp"

namespace rankem {

/// Mixture of diagonal Gaussians over embedding-difference vectors, one
/// component per semantic rank (rank 1 = paraphrase ... rank N = irrelevant).
/// Priors live as free logits (softmax keeps them a simplex) and scales as
/// free logs (exp keeps them positive), so every parameter is unconstrained.
/// Layout of flat: prior_logits (N), means (N x dim), log_scales (N x dim).
struct GmmParams {
  std::size_t n_ranks = 0;
  std::size_t dim = 0;
  Vec flat;

  std::size_t means_offset() const { return n_ranks; }
  std::size_t log_scales_offset() const { return n_ranks + n_ranks * dim; }
  std::span<const double> prior_logits() const { return {flat.data(), n_ranks}; }
  std::span<const double> mean(std::size_t rank) const;        // rank is 1-based
  std::span<const double> log_scale(std::size_t rank) const;   // rank is 1-based

  /// Prior probabilities, softmax of the logits.
  Vec priors() const;

  /// Enforces the sigma >= 1e-4 floor by clamping log_scales in place.
  void clamp_scales();
};

/// Component means staged along one shared random direction at spacing
/// (r-1)/(N-1), unit scales, uniform priors. Rank order is identifiable from
/// the start.
GmmParams init_gmm(std::size_t n_ranks, std::size_t dim, SeededRng& rng);

/// log N_r(diff | mu_r, sigma_r) for the pure diagonal Gaussian; the prior is
/// applied once, in the posterior, never here.
double gaussian_log_density(const GmmParams& params, std::size_t rank, std::span<const double> diff);

/// P(c = r | diff) for every rank, computed in log space. Sums to 1.
Vec posterior(const GmmParams& params, std::span<const double> diff);

/// argmax_r posterior(emb_x - emb_y), ties toward the smaller rank. 1-based.
std::size_t predict_rank(const GmmParams& params, std::span<const double> emb_x,
                         std::span<const double> emb_y);

struct GmmBatchItem {
  Vec diff;
  std::size_t label = 0;  // 1-based rank
};

/// Mean negative log posterior of the labels over the batch. Exact gradients
/// with respect to every flat parameter are accumulated into grad. When
/// d_diffs is given it receives the gradient with respect to each item's diff
/// (used to chain the loss through the encoder).
double mle_loss(const GmmParams& params, std::span<const GmmBatchItem> batch, Vec& grad,
                std::vector<Vec>* d_diffs = nullptr);

}  // namespace rankem
