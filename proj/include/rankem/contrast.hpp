#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rankem/numerics.hpp"

namespace rankem {

/// a^T b. Inputs are expected unit-norm, so this is the cosine similarity.
double cosine(std::span<const double> a, std::span<const double> b);

struct InfoNceResult {
  double loss = 0.0;
  Vec d_anchor;
  Vec d_positive;
  std::vector<Vec> d_negatives;
};

/// -log( exp(s(a,p)/tau) / (exp(s(a,p)/tau) + sum_i exp(s(a,n_i)/tau)) ),
/// evaluated in log space, with gradients for every input embedding.
InfoNceResult infonce(std::span<const double> anchor, std::span<const double> positive,
                      std::span<const Vec> negatives, double tau);

/// Convex interpolation (1-lambda)*emb_y + lambda*emb_neg (not re-normalized;
/// virtual points feed the GMM only) and the soft rank
/// ceil((1-lambda)*1 + lambda*N) clamped to [1, N].
std::pair<Vec, std::size_t> interpolate_virtual(std::span<const double> emb_y,
                                                std::span<const double> emb_neg, double lambda,
                                                std::size_t n_ranks);

/// Per-rank temperatures, strictly increasing: tau_1 < ... < tau_N.
struct TemperatureSchedule {
  Vec taus;
  static TemperatureSchedule geometric(std::size_t n_ranks, double base, double growth);
  void validate() const;
};

/// One anchor and its comparison set grouped by predicted rank; groups[r-1]
/// holds the embeddings labeled rank r and may be empty.
struct RankedBatch {
  Vec anchor;
  std::vector<std::vector<Vec>> groups;
};

struct RankingResult {
  double loss = 0.0;
  Vec d_anchor;
  std::vector<std::vector<Vec>> d_groups;
};

/// Ranking InfoNCE: sum over r < N of -log( sum_{y in group r} e^{s(a,y)/tau_r}
/// / sum_{y in groups r..N} e^{s(a,y)/tau_r} ). Terms whose positive group is
/// empty are skipped, so any batch is well defined; the loss is >= 0.
RankingResult ranking_infonce(const RankedBatch& batch, const TemperatureSchedule& temps);

/// Per-rank similarity anchors s_r with their moving-average momentum.
struct AnchorSet {
  Vec s;
  double momentum = 0.999;
};

/// s_r = (N - r + 1) / N, decreasing with rank: 1.0, 0.75, 0.5, 0.25 for N=4.
AnchorSet default_anchors(std::size_t n_ranks, double momentum);

/// argmin_r |sim - s_r|, ties toward the smaller rank. 1-based.
std::size_t predict_rank_encoder(const AnchorSet& anchors, double sim);

/// Returns a copy with s_r <- eps * s_r + (1 - eps) * sim; other ranks untouched.
AnchorSet update_anchor(const AnchorSet& anchors, std::size_t rank, double sim);

}  // namespace rankem
