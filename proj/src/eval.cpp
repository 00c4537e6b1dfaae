#include "rankem/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "rankem/contrast.hpp"

namespace rankem {

double retrieval_accuracy(std::span<const RetrievalQuery> queries, std::span<const Vec> pool) {
  if (queries.empty()) throw std::invalid_argument("retrieval_accuracy: no queries");
  if (pool.empty()) throw std::invalid_argument("retrieval_accuracy: empty pool");
  for (const auto& q : queries) {
    if (q.gold >= pool.size()) throw std::invalid_argument("retrieval_accuracy: gold index out of range");
  }
  std::vector<int> hits(queries.size(), 0);
  parallel_for(queries.size(), [&](std::size_t q) {
    std::size_t best = 0;
    double best_sim = cosine(queries[q].embedding, pool[0]);
    for (std::size_t i = 1; i < pool.size(); ++i) {
      const double sim = cosine(queries[q].embedding, pool[i]);
      if (sim > best_sim) {  // strict: ties stay at the lowest index
        best = i;
        best_sim = sim;
      }
    }
    hits[q] = best == queries[q].gold ? 1 : 0;
  });
  std::size_t correct = 0;
  for (int h : hits) correct += static_cast<std::size_t>(h);
  return static_cast<double>(correct) / static_cast<double>(queries.size());
}

RankAccuracyResult rank_accuracy(std::span<const LabeledPair> pairs,
                                 const std::function<std::size_t(const Vec&, const Vec&)>& predictor,
                                 std::size_t n_ranks) {
  if (pairs.empty()) throw std::invalid_argument("rank_accuracy: no pairs");
  RankAccuracyResult result;
  result.confusion.assign(n_ranks, std::vector<std::size_t>(n_ranks, 0));
  std::size_t correct = 0;
  for (const auto& pair : pairs) {
    if (pair.gold < 1 || pair.gold > n_ranks) throw std::invalid_argument("rank_accuracy: invalid gold rank");
    const std::size_t predicted = predictor(pair.a, pair.b);
    if (predicted < 1 || predicted > n_ranks) throw std::invalid_argument("rank_accuracy: predictor returned invalid rank");
    result.confusion[pair.gold - 1][predicted - 1]++;
    if (predicted == pair.gold) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
  return result;
}

OrderingReport ordering_report(std::span<const LabeledPair> pairs, std::size_t n_ranks) {
  OrderingReport report;
  report.mean_cosine.assign(n_ranks, 0.0);
  report.mean_distance.assign(n_ranks, 0.0);
  std::vector<std::size_t> counts(n_ranks, 0);

  for (const auto& pair : pairs) {
    if (pair.gold < 1 || pair.gold > n_ranks) throw std::invalid_argument("ordering_report: invalid gold rank");
    const double sim = cosine(pair.a, pair.b);
    const double sq = squared_distance(pair.a, pair.b);
    report.mean_cosine[pair.gold - 1] += sim;
    report.mean_distance[pair.gold - 1] += std::sqrt(sq);
    counts[pair.gold - 1]++;
    const double gap = std::abs(sim - (1.0 - sq / 2.0));
    report.max_identity_gap = std::max(report.max_identity_gap, gap);
  }
  for (std::size_t r = 0; r < n_ranks; ++r) {
    if (counts[r] == 0) throw std::invalid_argument("ordering_report: missing rank " + std::to_string(r + 1));
    report.mean_cosine[r] /= static_cast<double>(counts[r]);
    report.mean_distance[r] /= static_cast<double>(counts[r]);
  }
  report.identity_ok = report.max_identity_gap <= 1e-9;
  report.cosine_strictly_decreasing = true;
  report.distance_strictly_increasing = true;
  for (std::size_t r = 1; r < n_ranks; ++r) {
    if (!(report.mean_cosine[r] < report.mean_cosine[r - 1])) report.cosine_strictly_decreasing = false;
    if (!(report.mean_distance[r] > report.mean_distance[r - 1])) report.distance_strictly_increasing = false;
  }
  return report;
}

}  // namespace rankem
