#include "rankem/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rankem {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("squared_distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double logsumexp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty reduction");
  require_finite(values, "logsumexp");
  const double shift = *std::max_element(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - shift);
  return shift + std::log(acc);
}

SymMatrix::SymMatrix(std::size_t dim, Vec entries) : dim_(dim), entries_(std::move(entries)) {
  if (dim_ == 0 || entries_.size() != dim_ * dim_) {
    throw std::invalid_argument("SymMatrix: bad shape");
  }
  require_finite(entries_, "SymMatrix");
  double scale = 1.0;
  for (double v : entries_) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j < dim_; ++j) {
      if (std::abs((*this)(i, j) - (*this)(j, i)) > 1e-12 * scale) {
        throw std::invalid_argument("not symmetric");
      }
    }
  }
}

SymMatrix SymMatrix::zero(std::size_t dim) { return SymMatrix(dim); }

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

double SymMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (double v : entries_) acc += v * v;
  return std::sqrt(acc);
}

EigResult sym_eig(const SymMatrix& matrix) {
  const std::size_t n = matrix.dim();
  Vec a = matrix.entries();  // working copy, row-major
  Vec v(n * n, 0.0);         // accumulated rotations, columns are eigenvectors
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_norm = [&]() {
    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) acc += a[p * n + q] * a[p * n + q];
    return std::sqrt(2.0 * acc);
  };

  const double scale = std::max(1e-300, matrix.frobenius_norm());
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-14 * scale; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

  EigResult result;
  result.eigenvalues.reserve(n);
  result.eigenvectors.reserve(n);
  for (std::size_t idx : order) {
    result.eigenvalues.push_back(a[idx * n + idx]);
    Vec col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k * n + idx];
    const double len = norm(col);
    for (double& x : col) x /= len;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(col[k]) > 1e-12) {
        if (col[k] < 0.0)
          for (double& x : col) x = -x;
        break;
      }
    }
    result.eigenvectors.push_back(std::move(col));
  }
  return result;
}

GradCheckReport grad_check(const std::function<double(const Vec&)>& loss, const Vec& params,
                           const Vec& analytic_grad, double step, double tol) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
  if (analytic_grad.size() != params.size()) {
    throw std::invalid_argument("grad_check: gradient size mismatch");
  }
  GradCheckReport report;
  report.entries.resize(params.size());
  Vec probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double plus = loss(probe);
    probe[i] = params[i] - step;
    const double minus = loss(probe);
    probe[i] = params[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw std::runtime_error("grad_check: non-finite loss at coordinate " + std::to_string(i));
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double analytic = analytic_grad[i];
    const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
    const double rel = std::abs(numeric - analytic) / denom;
    report.entries[i] = {i, analytic, numeric, rel, rel <= tol};
    report.max_rel_error = std::max(report.max_rel_error, rel);
    if (rel > tol) ++report.num_flagged;
  }
  return report;
}

std::size_t max_threads() {
  static const std::size_t cached = [] {
    const char* env = std::getenv("RANKEM_THREADS");
    if (env == nullptr) return std::size_t{1};
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed <= 1) return std::size_t{1};
    return static_cast<std::size_t>(parsed);
  }();
  return cached;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(max_threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace rankem
