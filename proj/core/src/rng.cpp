#include "gridlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridlab {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t Rng::categorical(std::span<const double> cumulative) {
  return pick_from_cumulative(cumulative, uniform());
}

std::vector<double> cumulative_weights(std::span<const double> weights) {
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cumulative[i] = total;
  }
  return cumulative;
}

std::size_t pick_from_cumulative(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
  if (idx >= cumulative.size()) idx = cumulative.size() - 1;
  return idx;
}

}  // namespace gridlab
