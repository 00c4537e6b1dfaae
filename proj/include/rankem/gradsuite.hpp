#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rankem {

struct GradSuiteEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  bool passed = false;
};

/// Central-difference checks of each training loss chained through the
/// encoder: InfoNCE, classifier MLE (encoder and mixture parameters jointly),
/// and ranking InfoNCE. Small random instances per seed.
std::vector<GradSuiteEntry> run_gradient_suite(std::uint64_t seed, double step, double tol);

}  // namespace rankem
