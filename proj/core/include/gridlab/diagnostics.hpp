#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridlab/group.hpp"
#include "gridlab/lattice.hpp"
#include "gridlab/rng.hpp"
#include "gridlab/walk.hpp"

namespace gridlab {

inline constexpr double kDefaultDt = 0.05;
inline constexpr double kMaxDt = 0.1;
inline constexpr double kDefaultSignificance = 3.0;
inline constexpr double kDefaultBatchTime = 10.0;
inline constexpr std::size_t kDefaultWalkBatch = 20;

struct HistogramSpec {
  double lo = -0.5;
  double hi = 64.5;
  int bins = 65;

  bool operator==(const HistogramSpec&) const = default;
};

// Bounded observables on X. Siegel counts are unbounded near the cusp but
// bounded on the complement of any systole sublevel set.
struct TestFunction {
  enum class Kind { Siegel, AffineSiegel, CuspIndicator, SmoothBump };

  Kind kind = Kind::Siegel;
  double radius = 1.0;     // Siegel kinds
  double threshold = 0.1;  // cusp indicator
  double center = 1.0;     // smooth bump
  double width = 0.5;

  static TestFunction siegel(double radius);
  static TestFunction affine_siegel(double radius);
  static TestFunction cusp_indicator(double threshold);
  static TestFunction smooth_bump(double center, double width);

  std::string label() const;
  HistogramSpec default_histogram() const;
};

struct Observation {
  double value = 0.0;
  bool capped = false;
};

// Evaluates f at x. Siegel kinds report capped = true when the enumeration
// budget runs out; the value is then a lower bound.
Observation evaluate(const TestFunction& f, const AffinePoint& x,
                     std::uint64_t node_budget = kDefaultNodeBudget);

// Number of nonzero lattice vectors of norm <= R.
double siegel_transform(double radius, const LatticeBasis& basis,
                        std::uint64_t node_budget = kDefaultNodeBudget);
// Number of grid points of norm <= R (the origin included if it is one).
double affine_siegel_transform(double radius, const AffinePoint& point,
                               std::uint64_t node_budget = kDefaultNodeBudget);

// Running mean/variance with a fixed-bin histogram and batch-means standard
// error. Capped observations are counted but excluded from the statistics.
class StatAccumulator {
 public:
  explicit StatAccumulator(std::string observable = "", HistogramSpec spec = {},
                           std::size_t batch_size = 1);

  void add(double value);
  void add(const Observation& obs);
  // Combines two accumulators of the same observable. Only completed batches
  // of either side enter the merged batch-means estimate.
  void merge(const StatAccumulator& other);

  const std::string& observable() const { return observable_; }
  const HistogramSpec& histogram_spec() const { return spec_; }
  std::size_t batch_size() const { return batch_size_; }

  std::uint64_t count() const { return count_; }
  std::uint64_t capped() const { return capped_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  double variance() const;
  double standard_error() const;
  std::uint64_t batches() const { return batch_count_; }

  // Bins 0 and bins+1 are underflow and overflow.
  const std::vector<std::uint64_t>& histogram() const { return hist_; }

 private:
  std::string observable_;
  HistogramSpec spec_;
  std::size_t batch_size_;

  std::uint64_t count_ = 0;
  std::uint64_t capped_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::vector<std::uint64_t> hist_;

  std::uint64_t batch_count_ = 0;
  double batch_mean_ = 0.0;
  double batch_m2_ = 0.0;
  double partial_sum_ = 0.0;
  std::size_t partial_n_ = 0;
};

StatAccumulator merge(StatAccumulator a, const StatAccumulator& b);

struct MeasureComparison {
  std::string observable;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double stderr_a = 0.0;
  double stderr_b = 0.0;
  double z = 0.0;
  double total_variation = 0.0;
  bool pass = true;
};

MeasureComparison compare_measures(const StatAccumulator& a,
                                   const StatAccumulator& b,
                                   double significance = kDefaultSignificance);

struct FlowAverageOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
  double batch_time = kDefaultBatchTime;
};

// Riemann average of f over a_t x0 sampled at t = dt, 2 dt, ..., N dt with
// N = floor(T/dt); the point is advanced by a_dt and canonicalized each step.
StatAccumulator birkhoff_average(const AffinePoint& x0, const FlowParams& params,
                                 double T, double dt, const TestFunction& f,
                                 const FlowAverageOptions& options = {});

struct WalkAverageOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
  std::size_t batch_size = kDefaultWalkBatch;
};

// Average of f over b_p ... b_1 x0 for p = 1..N along one sampled word.
StatAccumulator walk_average(const WalkConfig& cfg, const AffinePoint& x0,
                             std::size_t N, const TestFunction& f, Rng& rng,
                             const WalkAverageOptions& options = {});
StatAccumulator walk_average(const WalkConfig& cfg, const AffinePoint& x0,
                             const CodingWord& word, const TestFunction& f,
                             const WalkAverageOptions& options = {});

// Haar-random unimodular lattice in dimension 2 (exact: rejection sampling on
// the fundamental domain with density y^-2 dx dy, then a uniform rotation).
LatticeBasis sample_haar_lattice(int dim, Rng& rng);
// Haar-random grid: Haar lattice plus a uniform shift in its fundamental cell.
AffinePoint sample_haar_point(int dim, Rng& rng);

}  // namespace gridlab
