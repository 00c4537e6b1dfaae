#include "rankem/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rankem {

std::size_t SeededRng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t span = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw = engine_();
  while (draw >= span) draw = engine_();  // rejection keeps the draw unbiased
  return static_cast<std::size_t>(draw % n);
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::size_t SeededRng::categorical(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("categorical: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("categorical: negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("categorical: zero total weight");
  const double target = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  return weights.size() - 1;
}

std::string SeededRng::serialize() const {
  std::ostringstream out;
  std::uint64_t spare_bits = 0;
  std::memcpy(&spare_bits, &spare_, sizeof spare_bits);
  // Bit pattern keeps the cached normal draw exact through the round trip.
  out << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << spare_bits;
  return out.str();
}

SeededRng SeededRng::deserialize(const std::string& text) {
  SeededRng rng(0);
  std::istringstream in(text);
  int spare_flag = 0;
  std::uint64_t spare_bits = 0;
  in >> rng.engine_ >> spare_flag >> spare_bits;
  if (!in) throw std::runtime_error("SeededRng: corrupt serialized state");
  rng.has_spare_ = spare_flag != 0;
  std::memcpy(&rng.spare_, &spare_bits, sizeof rng.spare_);
  return rng;
}

}  // namespace rankem
