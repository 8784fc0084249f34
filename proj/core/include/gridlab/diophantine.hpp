#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "gridlab/diagnostics.hpp"
#include "gridlab/group.hpp"
#include "gridlab/ifs.hpp"
#include "gridlab/types.hpp"

namespace gridlab {

inline constexpr std::uint64_t kDefaultScanBudget = 1'000'000'000ULL;

// The affine form q -> A q + b, A an m x n matrix.
struct AffineForm {
  Matrix a;
  Vector b;

  AffineForm() = default;
  AffineForm(Matrix a_, Vector b_);

  int m() const { return static_cast<int>(a.rows()); }
  int n() const { return static_cast<int>(a.cols()); }
  FlowParams params() const { return FlowParams(m(), n()); }
};

struct BadScanResult {
  double c_estimate = 0.0;
  IntVector argmin_q;
  std::int64_t q_max = 0;
};

// min over 0 != q in Z^n, |q|_inf <= Qmax of |q|_inf^{n/m} * dist(Aq + b, Z^m),
// dist in the sup norm.
BadScanResult bad_scan(const AffineForm& form, std::int64_t q_max,
                       std::uint64_t budget = kDefaultScanBudget);

// The same statistic at every bound of an ascending list, from one pass.
std::vector<BadScanResult> bad_scan_profile(const AffineForm& form,
                                            const std::vector<std::int64_t>& q_list,
                                            std::uint64_t budget = kDefaultScanBudget);

struct DirichletScanResult {
  double lambda = 0.0;
  std::vector<std::int64_t> q_list;
  std::vector<bool> solvable;
  // min over 0 != q, |q|_inf <= Q of dist(Aq + b, Z^m), per Q.
  std::vector<double> min_dist;
  // Smallest scanned Q from which every later flag holds; empty when the last
  // flag fails.
  std::optional<std::int64_t> q0;
};

DirichletScanResult dirichlet_scan(const AffineForm& form, double lambda,
                                   const std::vector<std::int64_t>& q_list,
                                   std::uint64_t budget = kDefaultScanBudget);

// inf over t in {0, dt, ..., floor(T/dt) dt} of the systole of
// a_t [u(A), (b, 0)]: the affine systole when the shift is off the lattice,
// the lattice systole when b is integral.
double dani_bad_indicator(const AffineForm& form, double T, double dt = kDefaultDt,
                          std::uint64_t node_budget = kDefaultNodeBudget);

// Running infimum of the same quantity at each horizon of an ascending list.
std::vector<double> dani_bad_profile(const AffineForm& form,
                                     const std::vector<double>& horizons,
                                     double dt = kDefaultDt,
                                     std::uint64_t node_budget = kDefaultNodeBudget);

enum class Scanner { Bad, Dirichlet, Dani };

// One coordinate of (A, b) is fixed, the other is drawn from a fractal
// measure: a vector IFS for b, a matrix IFS or an analytic curve for A.
struct SurveyTarget {
  using Measure = std::variant<VectorIFS, MatrixIFS, AnalyticCurve>;

  Matrix fixed_a;  // used when the measure varies b
  Vector fixed_b;  // used when the measure varies A
  Measure measure;

  static SurveyTarget vary_b(Matrix a, VectorIFS ifs);
  static SurveyTarget vary_a(Vector b, MatrixIFS ifs);
  static SurveyTarget vary_a(Vector b, AnalyticCurve curve);

  bool varies_b() const { return std::holds_alternative<VectorIFS>(measure); }
  AffineForm draw(Rng& rng, double tol) const;
};

struct SurveySpec {
  Scanner scanner = Scanner::Dani;
  std::size_t n_samples = 100;
  std::vector<double> thresholds;
  // Qmax values for Bad/Dirichlet, T values for Dani; ascending.
  std::vector<double> horizons;
  double dt = kDefaultDt;
  double sample_tol = 1e-12;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::uint64_t budget = kDefaultScanBudget;
};

struct SurveySample {
  std::size_t id = 0;
  AffineForm form;
  std::vector<double> statistic;  // one per horizon
};

struct SurveyCell {
  double threshold = 0.0;
  double horizon = 0.0;
  std::size_t members = 0;
  std::size_t total = 0;
  double fraction = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct SurveyReport {
  std::vector<SurveySample> samples;
  std::vector<SurveyCell> cells;  // horizon-major
};

// Statistic per scanner: Bad -> bad_scan c estimate; Dani -> indicator;
// Dirichlet -> max over a geometric grid of Q in [sqrt(H), H] of
// Q^{n/m} * min_dist(Q). Membership is statistic > eps for Bad and Dani and
// statistic <= eps for Dirichlet.
double dirichlet_statistic(const AffineForm& form, std::int64_t horizon,
                           std::uint64_t budget = kDefaultScanBudget);
bool survey_member(Scanner scanner, double statistic, double threshold);

SurveyReport fractal_survey(const SurveyTarget& target, const SurveySpec& spec);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials,
                               double z = 1.96);

}  // namespace gridlab
