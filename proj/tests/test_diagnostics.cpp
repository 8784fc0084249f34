#include "doctest.h"

#include <cmath>
#include <numbers>

#include <gridlab/diagnostics.hpp>
#include <gridlab/error.hpp>

#include "support.hpp"

using namespace gridlab;

namespace {

const FlowParams kP11(1, 1);

AffinePoint z2() { return make_point(Matrix::Zero(1, 1), Vector::Zero(1)); }

Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

VectorIFS coin() {
  return VectorIFS({VectorSimilarity::scalar(0.5, 0.0), VectorSimilarity::scalar(1.0 / 3, 0.0)},
                   {0.5, 0.5});
}

StatAccumulator iid_run(const TestFunction& f, std::size_t n, Rng& rng) {
  StatAccumulator acc(f.label(), f.default_histogram(), 1);
  for (std::size_t i = 0; i < n; ++i) {
    acc.add(evaluate(f, AffinePoint{sample_haar_lattice(2, rng), Vector::Zero(2)}));
  }
  return acc;
}

}  // namespace

TEST_CASE("siegel_transform: examples") {
  const auto id = LatticeBasis::identity(2);
  CHECK(siegel_transform(1.0, id) == 4.0);
  CHECK(siegel_transform(0.5, id) == 0.0);
  CHECK(affine_siegel_transform(0.8, {id, Vector{{0.5, 0.5}}}) == 4.0);
  CHECK_THROWS_AS(siegel_transform(50.0, LatticeBasis::identity(4), 10), EnumerationBudgetExceeded);
}

TEST_CASE("property: siegel_transform invariance and brute-force agreement") {
  Rng rng(40, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 3;
    const Matrix b = testsupport::random_basis(d, rng);
    const double r = rng.uniform(0.5, 2.0);
    const double s = siegel_transform(r, LatticeBasis::from_columns(b));
    const auto want = testsupport::brute_count(b, Vector::Zero(d), r, true);
    if (want) CHECK(s == static_cast<double>(*want));
    const Matrix g = b * testsupport::random_unimodular(d, rng).cast<double>();
    CHECK(siegel_transform(r, LatticeBasis::from_columns(g)) == s);
    if (d == 2) {
      const Matrix rotated = rotation(rng.uniform(0, 6.3)) * b;
      CHECK(siegel_transform(r, LatticeBasis::from_columns(rotated)) == s);
    }
  }
}

TEST_CASE("test functions validate and label") {
  CHECK_THROWS_AS(TestFunction::siegel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(TestFunction::cusp_indicator(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(TestFunction::smooth_bump(1.0, 0.0), std::invalid_argument);
  CHECK(TestFunction::siegel(1.0).label() == "siegel(R=1)");
  CHECK(TestFunction::cusp_indicator(0.1).label() == "cusp-indicator(eps=0.1)");

  const auto bump = TestFunction::smooth_bump(1.0, 0.5);
  CHECK(evaluate(bump, z2()).value == doctest::Approx(1.0));
  CHECK(evaluate(bump, {LatticeBasis::from_columns(Matrix(Eigen::Vector2d(2, 0.5).asDiagonal())),
                        Vector::Zero(2)}).value == 0.0);
}

TEST_CASE("birkhoff_average: divergent orbit of Z^2") {
  const double eps = 0.1, T = 50.0, dt = 0.05;
  const auto acc = birkhoff_average(z2(), kP11, T, dt, TestFunction::cusp_indicator(eps));
  // delta(a_t Z^2) = e^{-t} exceeds eps exactly for t < log(1/eps).
  const auto n = static_cast<std::uint64_t>(std::floor(T / dt + 1e-9));
  std::uint64_t above = 0;
  for (std::uint64_t i = 1; i <= n; ++i) above += std::exp(-(i * dt)) > eps;
  CHECK(acc.count() == n);
  CHECK(acc.mean() == doctest::Approx(static_cast<double>(above) / n));
  CHECK(acc.mean() < 0.05);
}

TEST_CASE("birkhoff_average: single sample and validation") {
  Rng rng(41, 0);
  const auto x = make_point(Matrix::Constant(1, 1, rng.uniform()), Vector::Zero(1));
  const auto f = TestFunction::siegel(1.5);
  const auto acc = birkhoff_average(x, kP11, 0.05, 0.05, f);
  CHECK(acc.count() == 1);
  CHECK(acc.mean() == evaluate(f, canonicalize(flow_raw(kP11, 0.05, x))).value);
  CHECK_THROWS_AS(birkhoff_average(x, kP11, 1.0, 0.2, f), std::invalid_argument);
  CHECK_THROWS_AS(birkhoff_average(x, kP11, 0.01, 0.05, f), std::invalid_argument);
}

TEST_CASE("birkhoff_average: step-size robustness for smooth bumps") {
  Rng rng(42, 0);
  const auto f = TestFunction::smooth_bump(0.8, 0.4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = make_point(Matrix::Constant(1, 1, rng.uniform()), Vector{{rng.uniform()}});
    // Horizon short enough that both grids follow the same orbit to ~1e-8.
    const double coarse = birkhoff_average(x, kP11, 10.0, 0.05, f).mean();
    const double fine = birkhoff_average(x, kP11, 10.0, 0.025, f).mean();
    CHECK(std::abs(coarse - fine) < 0.01);
  }
}

TEST_CASE("accumulator: merge is associative and commutative") {
  Rng rng(43, 0);
  for (int trial = 0; trial < 50; ++trial) {
    StatAccumulator a("x", {}, 7), b("x", {}, 7), c("x", {}, 7), all("x", {}, 7);
    for (auto* acc : {&a, &b, &c}) {
      const int n = static_cast<int>(rng() % 200);
      for (int i = 0; i < n; ++i) {
        const double v = std::floor(rng.uniform(0, 10));
        acc->add(v);
        all.add(v);
      }
    }
    const auto left = merge(merge(a, b), c);
    const auto right = merge(a, merge(b, c));
    const auto swapped = merge(merge(c, b), a);
    CHECK(left.count() == right.count());
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(right.mean()).epsilon(1e-12));
    CHECK(left.m2() == doctest::Approx(right.m2()).epsilon(1e-12));
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(left.m2() == doctest::Approx(all.m2()).epsilon(1e-12));
    CHECK(left.histogram() == all.histogram());
    CHECK(left.batches() == right.batches());
    CHECK(swapped.mean() == doctest::Approx(left.mean()).epsilon(1e-12));
    CHECK(left.standard_error() == doctest::Approx(right.standard_error()).epsilon(1e-9));
  }
}

TEST_CASE("accumulator: capped observations and incompatible merges") {
  StatAccumulator a("siegel(R=1)");
  a.add(Observation{3.0, false});
  a.add(Observation{100.0, true});
  CHECK(a.count() == 1);
  CHECK(a.capped() == 1);
  CHECK(a.mean() == 3.0);

  StatAccumulator b("siegel(R=2)");
  CHECK_THROWS_AS(a.merge(b), IncompatibleAccumulators);
  CHECK_THROWS_AS(compare_measures(a, b), IncompatibleAccumulators);
  StatAccumulator c("siegel(R=1)", HistogramSpec{0, 1, 3});
  CHECK_THROWS_AS(a.merge(c), IncompatibleAccumulators);
}

TEST_CASE("compare_measures: self comparison") {
  Rng rng(44, 0);
  const auto a = iid_run(TestFunction::siegel(1.0), 500, rng);
  const auto r = compare_measures(a, a);
  CHECK(r.z == 0.0);
  CHECK(r.total_variation == 0.0);
  CHECK(r.pass);
}

TEST_CASE("Haar sampler reproduces the Siegel mean value") {
  Rng rng(45, 0);
  const auto a = iid_run(TestFunction::siegel(1.0), 20000, rng);
  CHECK(std::abs(a.mean() - std::numbers::pi) < 3 * a.standard_error());
  const auto cusp = iid_run(TestFunction::cusp_indicator(0.1), 20000, rng);
  // For eps < 1 at most one pair +-v of primitive vectors is that short, so
  // P(systole <= eps) = (pi eps^2 / 2) / zeta(2).
  const double p_small = (std::numbers::pi * 0.01 / 2) / (std::numbers::pi * std::numbers::pi / 6);
  CHECK(std::abs((1.0 - cusp.mean()) - p_small) < 4 * cusp.standard_error() + 1e-3);
}

TEST_CASE("compare_measures: calibration over independent Haar runs") {
  Rng rng(46, 0);
  int pass = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = iid_run(TestFunction::siegel(1.0), 400, rng);
    const auto b = iid_run(TestFunction::siegel(1.0), 400, rng);
    pass += std::abs(compare_measures(a, b).z) < 3.0;
  }
  CHECK(pass >= 99);
}

TEST_CASE("compare_measures: Haar run against a divergent orbit fails") {
  Rng rng(47, 0);
  const auto f = TestFunction::cusp_indicator(0.1);
  const auto haar = iid_run(f, 2000, rng);
  const auto div = birkhoff_average(z2(), kP11, 50.0, 0.05, f);
  const auto r = compare_measures(haar, div);
  CHECK_FALSE(r.pass);
  CHECK(std::abs(r.z) > 10);
}

TEST_CASE("walk_average: examples") {
  const auto cfg = WalkConfig::from_ifs(coin(), kP11);
  Rng rng(48, 0);
  const auto x0 = make_point(Matrix::Constant(1, 1, 0.3819660112501051), Vector::Zero(1));
  const auto f = TestFunction::siegel(1.2);

  const CodingWord one{{1}};
  const auto acc = walk_average(cfg, x0, one, f);
  CHECK(acc.count() == 1);
  CHECK(acc.mean() == evaluate(f, canonicalize(run_walk(cfg, x0, one).points.back())).value);

  // From Z^2 every letter is diagonal: the walk stays on the divergent orbit.
  const auto cusp = walk_average(cfg, z2(), 100, TestFunction::cusp_indicator(0.1), rng);
  CHECK(cusp.mean() < 0.05);
}

TEST_CASE("sample_haar_point: shift in the fundamental cell") {
  Rng rng(49, 0);
  for (int i = 0; i < 100; ++i) {
    const auto x = sample_haar_point(2, rng);
    CHECK(std::abs(std::abs(x.basis.det()) - 1.0) < 1e-9);
    CHECK(testsupport::in_fundamental_cell(x.basis.cols(), x.shift));
  }
  CHECK_THROWS_AS(sample_haar_lattice(3, rng), DimensionMismatch);
}
