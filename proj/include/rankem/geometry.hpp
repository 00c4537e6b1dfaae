#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rankem/numerics.hpp"

namespace rankem {

struct LanguageGaussian {
  Vec mean;
  SymMatrix covariance;
};

/// Sample mean and sample covariance (divide by M-1) plus ridge * I. With
/// diagonal = true the off-diagonal entries are dropped. Needs >= 2 points.
LanguageGaussian fit_language_gaussian(std::span<const Vec> embeddings, double ridge,
                                       bool diagonal = false);

/// Closed-form KL(a || b) between Gaussians:
/// 0.5 [ tr(Sb^-1 Sa) + (mb-ma)^T Sb^-1 (mb-ma) - d + ln det Sb - ln det Sa ].
/// Errors if either covariance is not positive definite.
double gaussian_kl(const LanguageGaussian& a, const LanguageGaussian& b);

/// Mean over language pairs of the symmetrised KL divergence between fitted
/// per-language Gaussians. Zero when every language shares one distribution.
double invariance_score(const std::vector<std::vector<Vec>>& per_language, double ridge,
                        bool diagonal = false);

/// Between-cluster over within-cluster scatter, m * sum_k |c_k - c|^2 /
/// sum_k sum_{s in k} |s - c_k|^2, for equal-size clusters of size m. No
/// (n-K)/(K-1) factor.
double canonical_score(const std::vector<std::vector<Vec>>& clusters);

/// Principal ratio: eigenvectors V of E^T E (sign-canonical, null-space axes
/// dropped), Z(v) = sum_rows exp(v.e); returns min_V Z / max_V Z, in (0, 1].
double isotropy_score(std::span<const Vec> embeddings);

struct GeometryReport {
  double invariance = 0.0;
  double canonical = 0.0;
  double isotropy = 0.0;
};

struct EmbeddingDumpRow {
  std::uint32_t lang = 0;
  std::uint32_t item = 0;
  Vec values;
};

/// TSV exchange format: header "d=<int>", then "lang<TAB>item<TAB>v1,v2,...".
void write_embedding_tsv(const std::string& path, std::span<const EmbeddingDumpRow> rows,
                         std::size_t dim);
std::vector<EmbeddingDumpRow> read_embedding_tsv(const std::string& path);

}  // namespace rankem
