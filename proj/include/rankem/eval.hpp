#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rankem/numerics.hpp"

namespace rankem {

struct RetrievalQuery {
  Vec embedding;
  std::size_t gold = 0;  // index into the pool
};

/// Fraction of queries whose nearest pool member by cosine equals the gold
/// index. Ties resolve to the lowest pool index.
double retrieval_accuracy(std::span<const RetrievalQuery> queries, std::span<const Vec> pool);

struct LabeledPair {
  Vec a;
  Vec b;
  std::size_t gold = 0;  // 1-based rank
};

struct RankAccuracyResult {
  std::vector<std::vector<std::size_t>> confusion;  // [gold-1][predicted-1]
  double accuracy = 0.0;
};

/// Confusion matrix of a rank predictor against gold ranks.
RankAccuracyResult rank_accuracy(std::span<const LabeledPair> pairs,
                                 const std::function<std::size_t(const Vec&, const Vec&)>& predictor,
                                 std::size_t n_ranks);

struct OrderingReport {
  Vec mean_cosine;    // per rank, index r-1
  Vec mean_distance;  // per rank
  bool cosine_strictly_decreasing = false;
  bool distance_strictly_increasing = false;
  /// Largest per-pair gap |s(x,y) - (1 - |x-y|^2 / 2)| over the input.
  double max_identity_gap = 0.0;
  bool identity_ok = false;  // max gap within 1e-9
};

/// Per-rank similarity means plus the monotone-ordering flags; also verifies
/// the unit-sphere identity s = 1 - |x-y|^2/2 pair by pair. Every rank in
/// 1..n_ranks must be represented.
OrderingReport ordering_report(std::span<const LabeledPair> pairs, std::size_t n_ranks);

}  // namespace rankem
