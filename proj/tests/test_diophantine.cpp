#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gridlab/diophantine.hpp>
#include <gridlab/error.hpp>

#include "support.hpp"

using namespace gridlab;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

AffineForm form11(double a, double b) {
  return AffineForm(Matrix::Constant(1, 1, a), Vector::Constant(1, b));
}

// Brute-force oracle: plain loops over the q-box, distances with std::remainder.
double brute_bad(const AffineForm& f, std::int64_t qmax) {
  const int n = f.n(), m = f.m();
  std::vector<std::int64_t> lo(n, -qmax), hi(n, qmax);
  double best = std::numeric_limits<double>::infinity();
  testsupport::for_each_in_box(lo, hi, [&](const std::vector<std::int64_t>& q) {
    std::int64_t norm = 0;
    for (auto c : q) norm = std::max<std::int64_t>(norm, std::llabs(c));
    if (norm == 0) return;
    double dist = 0.0;
    for (int i = 0; i < m; ++i) {
      long double v = f.b(i);
      for (int j = 0; j < n; ++j) v += static_cast<long double>(f.a(i, j)) * q[j];
      dist = std::max(dist, static_cast<double>(std::abs(v - std::round(v))));
    }
    best = std::min(best, std::pow(static_cast<double>(norm), static_cast<double>(n) / m) * dist);
  });
  return best;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_CASE("bad_scan: examples") {
  const auto zero = bad_scan(form11(0, 0), 50);
  CHECK(zero.c_estimate == 0.0);
  CHECK(std::llabs(zero.argmin_q(0)) == 1);

  // Box minimum for the golden ratio is attained at q = 1: 2 - phi.
  const auto golden = bad_scan(form11(kPhi, 0), 100000);
  CHECK(golden.c_estimate == doctest::Approx(2.0 - kPhi).epsilon(1e-12));
  CHECK(golden.argmin_q(0) == 1);
  CHECK(golden.q_max == 100000);
}

TEST_CASE("bad_scan: golden ratio tail approaches 1/sqrt 5") {
  // Minimum of q * ||q phi|| over q in [F_k, 10^5] is attained at Fibonacci q.
  double tail = std::numeric_limits<double>::infinity();
  for (std::int64_t q = 1000; q <= 100000; ++q) {
    const double x = q * kPhi;
    tail = std::min(tail, q * std::abs(x - std::round(x)));
  }
  CHECK(tail == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-4));
}

TEST_CASE("property: bad_scan matches brute force") {
  Rng rng(50, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 2, n = 1 + (trial / 2) % 2;
    const AffineForm f(testsupport::gaussian_matrix(m, n, rng), testsupport::random_vector(m, rng, -3, 3));
    const std::int64_t qmax = n == 1 ? 300 : 40;
    CHECK(std::abs(bad_scan(f, qmax).c_estimate - brute_bad(f, qmax)) < 1e-10);
  }
}

TEST_CASE("property: bad_scan monotone in Qmax and consistent with the profile") {
  Rng rng(51, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const AffineForm f = form11(rng.uniform(), rng.uniform());
    const std::vector<std::int64_t> qs = {1, 3, 10, 30, 100, 300, 1000};
    const auto profile = bad_scan_profile(f, qs);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      CHECK(profile[i].c_estimate == bad_scan(f, qs[i]).c_estimate);
      if (i > 0) CHECK(profile[i].c_estimate <= profile[i - 1].c_estimate);
    }
  }
}

TEST_CASE("bad_scan: random pairs, fraction below 0.01 against the Poisson heuristic") {
  Rng rng(52, 0);
  const double c = 0.01;
  const std::vector<std::int64_t> qs = {20000, 1000000};
  std::vector<int> small(qs.size(), 0);
  for (int i = 0; i < 200; ++i) {
    const auto profile = bad_scan_profile(form11(rng.uniform(), rng.uniform()), qs);
    for (std::size_t k = 0; k < qs.size(); ++k) small[k] += profile[k].c_estimate < c;
  }
  // Expected count of 0 < |q| <= Q with |q| ||qA + b|| < c is 4 c H_Q.
  double harmonic = 0.0;
  for (std::int64_t q = 1; q <= qs.back(); ++q) harmonic += 1.0 / static_cast<double>(q);
  const double expected = 1.0 - std::exp(-4.0 * c * harmonic);
  CHECK(std::abs(small.back() / 200.0 - expected) < 0.1);
  CHECK(small[1] >= small[0]);
}

TEST_CASE("bad_scan: validation and budget") {
  CHECK_THROWS_AS(bad_scan(form11(0.3, 0), 0), std::invalid_argument);
  const AffineForm big(Matrix::Constant(1, 3, 0.5), Vector::Zero(1));
  CHECK_THROWS_AS(bad_scan(big, 10000, 1000), BudgetExceeded);
  CHECK_THROWS_AS(bad_scan_profile(form11(0.3, 0), {10, 5}), std::invalid_argument);
  CHECK_THROWS(AffineForm(Matrix::Constant(1, 1, NAN), Vector::Zero(1)));
  CHECK_THROWS(AffineForm(Matrix::Constant(2, 1, 0.5), Vector::Zero(1)));
}

TEST_CASE("dirichlet_scan: examples") {
  const auto zero = dirichlet_scan(form11(0, 0), 0.5, {1, 10, 100});
  for (bool f : zero.solvable) CHECK(f);
  CHECK(zero.q0 == std::optional<std::int64_t>(1));

  // Fibonacci thresholds: the best approximation below F_k is F_{k-1}.
  std::vector<std::int64_t> fib = {1, 2};
  while (fib.back() < 50000) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  fib.erase(fib.begin());
  const auto golden = dirichlet_scan(form11(kPhi, 0), 0.4, fib);
  int fails = 0;
  for (bool f : golden.solvable) fails += !f;
  CHECK(fails >= static_cast<int>(fib.size()) - 3);
  CHECK_FALSE(golden.solvable.back());
  CHECK_FALSE(golden.q0.has_value());
}

TEST_CASE("property: Dirichlet's theorem for b = 0") {
  Rng rng(53, 0);
  const std::vector<std::int64_t> qs = {1, 2, 5, 10, 50, 100, 500, 1000};
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 2, n = 1 + (trial / 2) % 2;
    const AffineForm f(testsupport::gaussian_matrix(m, n, rng) * 3, Vector::Zero(m));
    const auto r = dirichlet_scan(f, 1.0, n == 1 ? qs : std::vector<std::int64_t>{1, 2, 5, 10, 30});
    for (bool flag : r.solvable) CHECK(flag);
  }
}

TEST_CASE("property: exact Z-periodicity in b for dyadic shifts") {
  Rng rng(54, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform();
    // b with 20 significant bits: b + k is exact for |k| < 2^30.
    const double b = std::ldexp(std::floor(rng.uniform() * 1048576.0), -20);
    const double k = static_cast<double>(static_cast<int>(rng() % 2001) - 1000);
    const auto f = form11(a, b), g = form11(a, b + k);
    CHECK(bad_scan(f, 2000).c_estimate == bad_scan(g, 2000).c_estimate);
    const auto df = dirichlet_scan(f, 0.7, {10, 100, 1000});
    const auto dg = dirichlet_scan(g, 0.7, {10, 100, 1000});
    CHECK(df.min_dist == dg.min_dist);
    CHECK(df.solvable == dg.solvable);
  }
}

TEST_CASE("dani_bad_indicator: examples") {
  // Integral b: the lattice systole of a_t Z^2 is e^{-t}.
  CHECK(dani_bad_indicator(form11(0, 0), 5.0) == doctest::Approx(std::exp(-5.0)));
  CHECK(dani_bad_indicator(form11(kPhi, 0), 20.0) > 0.4);
  CHECK(dani_bad_indicator(form11(0, 0.5), 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(dani_bad_indicator(form11(kPhi, 0), 20.0, 0.5), std::invalid_argument);

  const auto prof = dani_bad_profile(form11(kPhi, 0.3), {0.0, 5.0, 20.0});
  CHECK(prof.size() == 3);
  CHECK(prof[1] <= prof[0]);
  CHECK(prof[2] <= prof[1]);
  CHECK(prof[2] == dani_bad_indicator(form11(kPhi, 0.3), 20.0));
}

TEST_CASE("dani_bad_indicator: generic forms enter the cusp") {
  Rng rng(55, 0);
  const std::vector<double> horizons = {10, 50, 200};
  std::vector<int> small(horizons.size(), 0);
  for (int i = 0; i < 100; ++i) {
    const auto prof = dani_bad_profile(form11(rng.uniform(), rng.uniform()), horizons);
    for (std::size_t k = 0; k < horizons.size(); ++k) small[k] += prof[k] < 0.05;
  }
  CHECK(small[0] <= small[1]);
  CHECK(small[1] <= small[2]);
  CHECK(small[2] > 50);
}

TEST_CASE("correspondence consistency: positive rank correlation") {
  Rng rng(56, 0);
  // Denominators up to Q are seen by the orbit up to time log Q.
  std::vector<double> bad, dani;
  for (int i = 0; i < 100; ++i) {
    const auto f = form11(rng.uniform(), rng.uniform());
    bad.push_back(bad_scan(f, 1000000).c_estimate);
    dani.push_back(dani_bad_indicator(f, std::log(1e6)));
  }
  CHECK(spearman(bad, dani) > 0.5);
}

TEST_CASE("wilson_interval") {
  const auto w = wilson_interval(50, 100);
  CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
  const auto zero = wilson_interval(0, 10);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
}

TEST_CASE("fractal_survey: Cantor b with golden A, monotone trends, thread independence") {
  const VectorIFS cantor({VectorSimilarity::scalar(1.0 / 3, 0.0), VectorSimilarity::scalar(1.0 / 3, 2.0 / 3)},
                         {0.5, 0.5});
  const auto target = SurveyTarget::vary_b(Matrix::Constant(1, 1, kPhi), cantor);
  SurveySpec spec;
  spec.scanner = Scanner::Dani;
  spec.n_samples = 120;
  spec.thresholds = {0.05, 0.1, 0.2};
  spec.horizons = {5, 10, 20};
  spec.seed = 9;
  const auto one = fractal_survey(target, spec);
  spec.threads = 3;
  const auto three = fractal_survey(target, spec);
  REQUIRE(one.cells.size() == 9);
  for (std::size_t i = 0; i < one.cells.size(); ++i) CHECK(one.cells[i].members == three.cells[i].members);
  for (std::size_t i = 0; i < one.samples.size(); ++i) {
    CHECK(one.samples[i].statistic == three.samples[i].statistic);
    CHECK(one.samples[i].form.a(0, 0) == kPhi);
  }
  // horizon-major: cells[h * 3 + e]
  for (std::size_t h = 0; h < 3; ++h) {
    for (std::size_t e = 1; e < 3; ++e) CHECK(one.cells[h * 3 + e].fraction <= one.cells[h * 3 + e - 1].fraction);
    if (h > 0) {
      for (std::size_t e = 0; e < 3; ++e) CHECK(one.cells[h * 3 + e].fraction <= one.cells[(h - 1) * 3 + e].fraction);
    }
  }
  for (const auto& c : one.cells) CHECK((c.ci_lo <= c.fraction && c.fraction <= c.ci_hi));
}

TEST_CASE("fractal_survey: degenerate IFS rejected") {
  const VectorIFS point({VectorSimilarity::scalar(1.0 / 3, 0.0), VectorSimilarity::scalar(1.0 / 3, 2.0 / 3)},
                        {1.0, 0.0});
  CHECK_THROWS_AS(SurveyTarget::vary_b(Matrix::Constant(1, 1, kPhi), point), std::invalid_argument);
}

TEST_CASE("dirichlet_statistic and survey membership") {
  const auto f = form11(kPhi, 0);
  const double s = dirichlet_statistic(f, 1000);
  CHECK(s > 0.3);
  CHECK(s <= 1.0 + 1e-12);
  CHECK(survey_member(Scanner::Dirichlet, 0.2, 0.3));
  CHECK_FALSE(survey_member(Scanner::Dani, 0.2, 0.3));
  CHECK(survey_member(Scanner::Bad, 0.4, 0.3));
}
