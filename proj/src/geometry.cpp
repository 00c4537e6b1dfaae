#include "rankem/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rankem {

LanguageGaussian fit_language_gaussian(std::span<const Vec> embeddings, double ridge, bool diagonal) {
  if (embeddings.size() < 2) throw std::invalid_argument("fit_language_gaussian: need at least two points");
  if (ridge <= 0.0) throw std::invalid_argument("fit_language_gaussian: ridge must be positive");
  const std::size_t d = embeddings[0].size();
  Vec mean(d, 0.0);
  for (const auto& e : embeddings) {
    if (e.size() != d) throw std::invalid_argument("fit_language_gaussian: dimension mismatch");
    for (std::size_t j = 0; j < d; ++j) mean[j] += e[j];
  }
  for (double& m : mean) m /= static_cast<double>(embeddings.size());

  SymMatrix cov = SymMatrix::zero(d);
  const double inv = 1.0 / static_cast<double>(embeddings.size() - 1);
  for (const auto& e : embeddings) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = e[i] - mean[i];
      if (diagonal) {
        cov.at(i, i) += di * di * inv;
        continue;
      }
      for (std::size_t j = i; j < d; ++j) {
        cov.at(i, j) += di * (e[j] - mean[j]) * inv;
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    cov.at(i, i) += ridge;
    for (std::size_t j = i + 1; j < d; ++j) cov.at(j, i) = cov(i, j);
  }
  return {std::move(mean), std::move(cov)};
}

namespace {

struct SpectralInverse {
  EigResult eig;
  double log_det = 0.0;

  explicit SpectralInverse(const SymMatrix& m) : eig(sym_eig(m)) {
    for (double lambda : eig.eigenvalues) {
      if (lambda <= 0.0) throw std::invalid_argument("non-PD covariance");
      log_det += std::log(lambda);
    }
  }

  /// (M^-1 x) via V diag(1/lambda) V^T x.
  Vec solve(std::span<const double> x) const {
    const std::size_t d = x.size();
    Vec out(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      const double coeff = dot(eig.eigenvectors[k], x) / eig.eigenvalues[k];
      for (std::size_t j = 0; j < d; ++j) out[j] += coeff * eig.eigenvectors[k][j];
    }
    return out;
  }
};

}  // namespace

double gaussian_kl(const LanguageGaussian& a, const LanguageGaussian& b) {
  const std::size_t d = a.mean.size();
  if (b.mean.size() != d || a.covariance.dim() != d || b.covariance.dim() != d) {
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  }
  const SpectralInverse inv_b(b.covariance);
  const SpectralInverse inv_a(a.covariance);  // only for the PD check and log det

  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    Vec col(d);
    for (std::size_t i = 0; i < d; ++i) col[i] = a.covariance(i, j);
    trace += inv_b.solve(col)[j];
  }
  Vec delta(d);
  for (std::size_t j = 0; j < d; ++j) delta[j] = b.mean[j] - a.mean[j];
  const double maha = dot(delta, inv_b.solve(delta));
  return 0.5 * (trace + maha - static_cast<double>(d) + inv_b.log_det - inv_a.log_det);
}

double invariance_score(const std::vector<std::vector<Vec>>& per_language, double ridge,
                        bool diagonal) {
  if (per_language.size() < 2) throw std::invalid_argument("invariance_score: need at least two languages");
  std::vector<LanguageGaussian> fits;
  fits.reserve(per_language.size());
  for (const auto& set : per_language) {
    fits.push_back(fit_language_gaussian(set, ridge, diagonal));
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    for (std::size_t j = i + 1; j < fits.size(); ++j) {
      total += 0.5 * (gaussian_kl(fits[i], fits[j]) + gaussian_kl(fits[j], fits[i]));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double canonical_score(const std::vector<std::vector<Vec>>& clusters) {
  if (clusters.size() < 2) throw std::invalid_argument("canonical_score: need at least two clusters");
  const std::size_t m = clusters[0].size();
  if (m == 0) throw std::invalid_argument("canonical_score: empty cluster");
  const std::size_t d = clusters[0][0].size();

  Vec global(d, 0.0);
  std::vector<Vec> centroids;
  centroids.reserve(clusters.size());
  for (const auto& cluster : clusters) {
    if (cluster.size() != m) throw std::invalid_argument("canonical_score: clusters must share one size");
    Vec centroid(d, 0.0);
    for (const auto& s : cluster) {
      if (s.size() != d) throw std::invalid_argument("canonical_score: dimension mismatch");
      for (std::size_t j = 0; j < d; ++j) centroid[j] += s[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      centroid[j] /= static_cast<double>(m);
      global[j] += centroid[j];
    }
    centroids.push_back(std::move(centroid));
  }
  for (double& g : global) g /= static_cast<double>(clusters.size());

  double between = 0.0;
  double within = 0.0;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    between += squared_distance(centroids[k], global);
    for (const auto& s : clusters[k]) within += squared_distance(s, centroids[k]);
  }
  between *= static_cast<double>(m);
  if (within <= 0.0) throw std::invalid_argument("degenerate within-cluster variance");
  return between / within;
}

double isotropy_score(std::span<const Vec> embeddings) {
  if (embeddings.empty()) throw std::invalid_argument("isotropy_score: empty collection");
  const std::size_t d = embeddings[0].size();
  SymMatrix gram = SymMatrix::zero(d);
  double mass = 0.0;
  for (const auto& e : embeddings) {
    if (e.size() != d) throw std::invalid_argument("isotropy_score: dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) gram.at(i, j) += e[i] * e[j];
      mass += e[i] * e[i];
    }
  }
  if (mass <= 0.0) throw std::invalid_argument("isotropy_score: all-zero matrix");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) gram.at(j, i) = gram(i, j);
  }

  const EigResult eig = sym_eig(gram);
  const double cutoff = 1e-10 * eig.eigenvalues.front();
  double z_min = 0.0;
  double z_max = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < d; ++k) {
    if (eig.eigenvalues[k] <= cutoff) continue;  // null-space axes are arbitrary
    double z = 0.0;
    for (const auto& e : embeddings) z += std::exp(dot(eig.eigenvectors[k], e));
    if (first || z < z_min) z_min = z;
    if (first || z > z_max) z_max = z;
    first = false;
  }
  return z_min / z_max;
}

void write_embedding_tsv(const std::string& path, std::span<const EmbeddingDumpRow> rows,
                         std::size_t dim) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_embedding_tsv: cannot open " + path);
  out << "d=" << dim << '\n';
  char buf[40];
  for (const auto& row : rows) {
    if (row.values.size() != dim) throw std::invalid_argument("write_embedding_tsv: dimension mismatch");
    out << row.lang << '\t' << row.item << '\t';
    for (std::size_t j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row.values[j]);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_embedding_tsv: write failed for " + path);
}

std::vector<EmbeddingDumpRow> read_embedding_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_embedding_tsv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("d=", 0) != 0) {
    throw std::runtime_error("read_embedding_tsv: missing d= header in " + path);
  }
  const std::size_t dim = std::stoul(line.substr(2));
  std::vector<EmbeddingDumpRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    EmbeddingDumpRow row;
    std::string values;
    if (!(fields >> row.lang >> row.item >> values)) {
      throw std::runtime_error("read_embedding_tsv: bad row at line " + std::to_string(line_no));
    }
    std::istringstream vs(values);
    std::string tok;
    while (std::getline(vs, tok, ',')) row.values.push_back(std::stod(tok));
    if (row.values.size() != dim) {
      throw std::runtime_error("read_embedding_tsv: wrong dimension at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rankem
