#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rankem {

using Vec = std::vector<double>;

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Shift-stable log(sum(exp(values))). Errors on empty input.
double logsumexp(std::span<const double> values);

/// Dense symmetric matrix, row-major. Symmetry is validated on construction
/// (1e-12 relative tolerance).
class SymMatrix {
 public:
  SymMatrix(std::size_t dim, Vec entries);
  static SymMatrix zero(std::size_t dim);
  static SymMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  double& at(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }
  const Vec& entries() const { return entries_; }
  double frobenius_norm() const;

 private:
  SymMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {}
  std::size_t dim_;
  Vec entries_;
};

struct EigResult {
  Vec eigenvalues;                  // descending
  std::vector<Vec> eigenvectors;    // eigenvectors[i] pairs with eigenvalues[i], unit norm
};

/// Cyclic Jacobi eigendecomposition. Eigenvalues sorted descending; each
/// eigenvector's first component with magnitude > 1e-12 is made positive so
/// results are deterministic.
EigResult sym_eig(const SymMatrix& matrix);

struct GradCheckEntry {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool ok = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  std::size_t num_flagged = 0;
  bool passed() const { return num_flagged == 0; }
};

/// Central-difference check of an analytic gradient. Relative error uses a
/// unit floor: |a-n| / max(1, |a|, |n|). Coordinates above tol are flagged.
/// Throws if the loss evaluates to a non-finite value, naming the coordinate.
GradCheckReport grad_check(const std::function<double(const Vec&)>& loss, const Vec& params,
                           const Vec& analytic_grad, double step, double tol);

/// Worker-thread cap from RANKEM_THREADS (default 1). Cached after first read.
std::size_t max_threads();

/// Runs fn(i) for i in [0, count). Each index owns its output slot, so results
/// are identical for any thread count. Sequential when max_threads() == 1.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace rankem
