#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rankem/contrast.hpp"
#include "rankem/eval.hpp"
#include "rankem/rng.hpp"

using namespace rankem;

namespace {

Vec random_unit(std::size_t d, SeededRng& rng) {
  Vec v(d);
  for (double& x : v) x = rng.normal();
  const double len = norm(v);
  for (double& x : v) x /= len;
  return v;
}

Vec planar(double angle) { return Vec{std::cos(angle), std::sin(angle)}; }

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("retrieval against itself is perfect, against mismatches zero") {
  SeededRng rng(70);
  std::vector<Vec> pool;
  for (int i = 0; i < 8; ++i) pool.push_back(random_unit(6, rng));
  std::vector<RetrievalQuery> self;
  for (std::size_t i = 0; i < pool.size(); ++i) self.push_back({pool[i], i});
  CHECK(retrieval_accuracy(self, pool) == doctest::Approx(1.0));

  const std::vector<Vec> ortho{Vec{1.0, 0.0, 0.0}, Vec{0.0, 1.0, 0.0}, Vec{0.0, 0.0, 1.0}};
  std::vector<RetrievalQuery> wrong{{ortho[0], 1}, {ortho[1], 2}, {ortho[2], 0}};
  CHECK(retrieval_accuracy(wrong, ortho) == doctest::Approx(0.0));

  CHECK_THROWS_AS(retrieval_accuracy(std::vector<RetrievalQuery>{}, pool), std::invalid_argument);
  std::vector<RetrievalQuery> bad{{pool[0], 99}};
  CHECK_THROWS_AS(retrieval_accuracy(bad, pool), std::invalid_argument);
}

TEST_CASE("retrieval matches an exhaustive scan oracle") {
  SeededRng rng(71);
  std::vector<Vec> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(random_unit(5, rng));
  std::vector<RetrievalQuery> queries;
  for (int i = 0; i < 60; ++i) queries.push_back({random_unit(5, rng), rng.uniform_index(40)});

  std::size_t correct = 0;
  for (const auto& q : queries) {
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double sim = dot(q.embedding, pool[i]);
      if (sim > best_sim) {
        best_sim = sim;
        best = i;
      }
    }
    if (best == q.gold) ++correct;
  }
  const double expected = static_cast<double>(correct) / queries.size();
  CHECK(retrieval_accuracy(queries, pool) == doctest::Approx(expected));
}

TEST_CASE("retrieval is invariant under a common rotation") {
  SeededRng rng(72);
  SymMatrix m = SymMatrix::zero(4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      const double v = rng.normal();
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  const auto rot = sym_eig(m).eigenvectors;
  auto rotate = [&](const Vec& x) {
    Vec out(4, 0.0);
    for (std::size_t r = 0; r < 4; ++r) out[r] = dot(rot[r], x);
    return out;
  };
  std::vector<Vec> pool;
  std::vector<RetrievalQuery> queries;
  for (int i = 0; i < 20; ++i) pool.push_back(random_unit(4, rng));
  for (int i = 0; i < 30; ++i) queries.push_back({random_unit(4, rng), rng.uniform_index(20)});
  const double base = retrieval_accuracy(queries, pool);

  std::vector<Vec> rpool;
  std::vector<RetrievalQuery> rqueries;
  for (const auto& p : pool) rpool.push_back(rotate(p));
  for (const auto& q : queries) rqueries.push_back({rotate(q.embedding), q.gold});
  CHECK(retrieval_accuracy(rqueries, rpool) == doctest::Approx(base));
}

TEST_CASE("rank_accuracy confusion counting") {
  SeededRng rng(73);
  std::vector<LabeledPair> pairs;
  for (std::size_t r = 1; r <= 4; ++r) {
    for (int i = 0; i < 5; ++i) {
      pairs.push_back({random_unit(3, rng), random_unit(3, rng), r});
    }
  }
  std::size_t cursor = 0;
  auto gold_predictor = [&](const Vec&, const Vec&) { return pairs[cursor++].gold; };
  const RankAccuracyResult perfect = rank_accuracy(pairs, gold_predictor, 4);
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(perfect.confusion[r][r] == 5);
    for (std::size_t c = 0; c < 4; ++c) {
      if (c != r) CHECK(perfect.confusion[r][c] == 0);
    }
  }

  auto constant = [](const Vec&, const Vec&) -> std::size_t { return 2; };
  CHECK(rank_accuracy(pairs, constant, 4).accuracy == doctest::Approx(0.25));

  std::vector<LabeledPair> bad{{random_unit(3, rng), random_unit(3, rng), 9}};
  CHECK_THROWS_AS(rank_accuracy(bad, constant, 4), std::invalid_argument);
}

TEST_CASE("ordering_report flags constructed monotone geometry") {
  // Angles grow with rank, so cosine falls and distance rises.
  std::vector<LabeledPair> pairs;
  const Vec anchor = planar(0.0);
  const Vec angles{0.1, 0.6, 1.2, 2.2};
  for (std::size_t r = 1; r <= 4; ++r) {
    pairs.push_back({anchor, planar(angles[r - 1]), r});
    pairs.push_back({anchor, planar(angles[r - 1] + 0.05), r});
  }
  const OrderingReport report = ordering_report(pairs, 4);
  CHECK(report.cosine_strictly_decreasing);
  CHECK(report.distance_strictly_increasing);
  CHECK(report.identity_ok);
  CHECK(report.max_identity_gap <= 1e-9);

  // Shuffled labels break the ordering.
  std::vector<LabeledPair> shuffled = pairs;
  shuffled[0].gold = 4;
  shuffled[6].gold = 1;
  const OrderingReport broken = ordering_report(shuffled, 4);
  CHECK_FALSE(broken.cosine_strictly_decreasing);
  CHECK_FALSE(broken.distance_strictly_increasing);
  CHECK(broken.identity_ok);  // the algebraic identity is unconditional

  std::vector<LabeledPair> missing(pairs.begin(), pairs.begin() + 4);
  CHECK_THROWS_AS(ordering_report(missing, 4), std::invalid_argument);
}

TEST_CASE("cosine ordering and distance ordering always agree") {
  SeededRng rng(74);
  std::vector<LabeledPair> pairs;
  for (std::size_t r = 1; r <= 4; ++r) {
    for (int i = 0; i < 6; ++i) {
      pairs.push_back({random_unit(5, rng), random_unit(5, rng), r});
    }
  }
  const OrderingReport report = ordering_report(pairs, 4);
  // On the unit sphere each ordering implies the other.
  CHECK(report.cosine_strictly_decreasing == report.distance_strictly_increasing);
  CHECK(report.identity_ok);
}

TEST_SUITE_END();
