#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gridlab {

// SplitMix64 finalizer; used to derive independent stream seeds and as a
// counter-based generator for lazily indexed words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Per-stream generator. Streams are addressed by (master seed, stream id), so
// results never depend on which thread ran which stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t master, std::uint64_t stream = 0)
      : engine_(derive_seed(master, stream)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform() { return unit_interval(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; implementation-independent.
  double normal();

  // Index drawn from a cumulative weight table (last entry == total).
  std::size_t categorical(std::span<const double> cumulative);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::vector<double> cumulative_weights(std::span<const double> weights);

// Maps u in [0,1) onto a cumulative table.
std::size_t pick_from_cumulative(std::span<const double> cumulative, double u);

}  // namespace gridlab
