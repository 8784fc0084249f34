#include "gridlab/diophantine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "gridlab/error.hpp"

namespace gridlab {

AffineForm::AffineForm(Matrix a_, Vector b_) : a(std::move(a_)), b(std::move(b_)) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::invalid_argument("affine form: A must be at least 1 x 1");
  }
  if (b.size() != a.rows()) {
    throw DimensionMismatch("affine form: b must have one entry per row of A");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("affine form: entries must be finite");
  }
}

namespace {

void check_ascending(const std::vector<std::int64_t>& q_list) {
  if (q_list.empty()) throw std::invalid_argument("scan: Q list is empty");
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    if (q_list[i] < 1) throw std::invalid_argument("scan: Q must be >= 1");
    if (i > 0 && q_list[i] <= q_list[i - 1]) {
      throw std::invalid_argument("scan: Q list must be strictly ascending");
    }
  }
}

void check_budget(const AffineForm& form, std::int64_t q_max, std::uint64_t budget) {
  const double points =
      std::pow(2.0 * static_cast<double>(q_max) + 1.0, form.n()) - 1.0;
  if (points > static_cast<double>(budget)) {
    throw BudgetExceeded("scan of " + std::to_string(points) +
                         " integer vectors exceeds the budget of " +
                         std::to_string(budget) + "; lower Qmax");
  }
}

// Reducing b modulo 1 up front makes every scan exactly Z-periodic in b.
Vector reduced_shift(const Vector& b) {
  Vector out(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) out(i) = b(i) - std::floor(b(i));
  return out;
}

// Sup-norm distance of A q + b to Z^m.
double form_distance(const Matrix& a, const Vector& b, const IntVector& q) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double v = b(i);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      v = std::fma(a(i, j), static_cast<double>(q(j)), v);
    }
    worst = std::max(worst, std::abs(v - std::round(v)));
  }
  return worst;
}

// Visits every q in Z^n with |q|_inf == r (r >= 1). The first coordinate of
// modulus r decides the layout: earlier ones lie in (-r, r), later ones in
// [-r, r].
template <class Visit>
void for_each_shell_point(int n, std::int64_t r, Visit&& visit) {
  IntVector q(n);
  for (int lead = 0; lead < n; ++lead) {
    for (std::int64_t sign : {1, -1}) {
      q(lead) = sign * r;
      // Odometer over the remaining coordinates.
      for (int j = 0; j < n; ++j) {
        if (j == lead) continue;
        q(j) = j < lead ? -(r - 1) : -r;
      }
      for (;;) {
        visit(static_cast<const IntVector&>(q));
        int j = n - 1;
        for (; j >= 0; --j) {
          if (j == lead) continue;
          const std::int64_t hi = j < lead ? r - 1 : r;
          if (q(j) < hi) {
            ++q(j);
            break;
          }
          q(j) = j < lead ? -(r - 1) : -r;
        }
        if (j < 0) break;
      }
    }
  }
}

// Runs f(r, q, dist) over shells 1..q_max.
template <class F>
void scan_shells(const AffineForm& form, std::int64_t q_max, F&& f) {
  const Vector b = reduced_shift(form.b);
  for (std::int64_t r = 1; r <= q_max; ++r) {
    for_each_shell_point(form.n(), r, [&](const IntVector& q) {
      f(r, q, form_distance(form.a, b, q));
    });
  }
}

}  // namespace

std::vector<BadScanResult> bad_scan_profile(const AffineForm& form,
                                            const std::vector<std::int64_t>& q_list,
                                            std::uint64_t budget) {
  check_ascending(q_list);
  check_budget(form, q_list.back(), budget);
  const double exponent = static_cast<double>(form.n()) / form.m();

  std::vector<BadScanResult> out;
  out.reserve(q_list.size());
  BadScanResult best;
  best.c_estimate = std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  std::int64_t shell = 0;
  scan_shells(form, q_list.back(), [&](std::int64_t r, const IntVector& q, double dist) {
    if (r != shell) {
      while (next < q_list.size() && q_list[next] == shell) {
        best.q_max = shell;
        out.push_back(best);
        ++next;
      }
      shell = r;
    }
    const double value = std::pow(static_cast<double>(r), exponent) * dist;
    if (value < best.c_estimate) {
      best.c_estimate = value;
      best.argmin_q = q;
    }
  });
  while (next < q_list.size()) {
    best.q_max = q_list[next++];
    out.push_back(best);
  }
  return out;
}

BadScanResult bad_scan(const AffineForm& form, std::int64_t q_max,
                       std::uint64_t budget) {
  return bad_scan_profile(form, {q_max}, budget).front();
}

DirichletScanResult dirichlet_scan(const AffineForm& form, double lambda,
                                   const std::vector<std::int64_t>& q_list,
                                   std::uint64_t budget) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dirichlet_scan: lambda must be > 0");
  check_ascending(q_list);
  check_budget(form, q_list.back(), budget);
  const double exponent = static_cast<double>(form.n()) / form.m();

  DirichletScanResult out;
  out.lambda = lambda;
  out.q_list = q_list;
  double best = std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  std::int64_t shell = 0;
  auto record = [&](std::int64_t q) {
    out.min_dist.push_back(best);
    const double bound = lambda * std::pow(static_cast<double>(q), -exponent);
    out.solvable.push_back(best <= bound * (1.0 + 1e-12));
  };
  scan_shells(form, q_list.back(), [&](std::int64_t r, const IntVector&, double dist) {
    if (r != shell) {
      while (next < q_list.size() && q_list[next] == shell) record(q_list[next++]);
      shell = r;
    }
    best = std::min(best, dist);
  });
  while (next < q_list.size()) record(q_list[next++]);

  for (std::size_t i = q_list.size(); i > 0; --i) {
    if (!out.solvable[i - 1]) break;
    out.q0 = q_list[i - 1];
  }
  return out;
}

std::vector<double> dani_bad_profile(const AffineForm& form,
                                     const std::vector<double>& horizons,
                                     double dt, std::uint64_t node_budget) {
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw std::invalid_argument("dani indicator: dt must lie in (0, 0.1]");
  }
  if (horizons.empty()) throw std::invalid_argument("dani indicator: no horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] >= 0.0) || (i > 0 && horizons[i] < horizons[i - 1])) {
      throw std::invalid_argument("dani indicator: horizons must be ascending and >= 0");
    }
  }
  const FlowParams params = form.params();
  AffinePoint x = make_point(form.a, form.b);
  const bool homogeneous = shift_in_lattice(x);
  auto systole = [&](const AffinePoint& p) {
    return homogeneous ? shortest_vector(p.basis, node_budget).norm
                       : shortest_affine_vector(p, node_budget).norm;
  };

  std::vector<double> out;
  out.reserve(horizons.size());
  double inf = systole(x);
  std::uint64_t step = 0;
  for (double horizon : horizons) {
    const auto target = static_cast<std::uint64_t>(std::floor(horizon / dt + 1e-9));
    while (step < target) {
      x = canonicalize(flow_raw(params, dt, x));
      if (homogeneous) x.shift.setZero();
      inf = std::min(inf, systole(x));
      ++step;
    }
    out.push_back(inf);
  }
  return out;
}

double dani_bad_indicator(const AffineForm& form, double T, double dt,
                          std::uint64_t node_budget) {
  return dani_bad_profile(form, {T}, dt, node_budget).front();
}

SurveyTarget SurveyTarget::vary_b(Matrix a, VectorIFS ifs) {
  ifs.require_nondegenerate();
  if (ifs.letters().front().dim() != a.rows()) {
    throw DimensionMismatch("survey: IFS dimension must equal the rows of A");
  }
  SurveyTarget t{std::move(a), Vector(), std::move(ifs)};
  return t;
}

SurveyTarget SurveyTarget::vary_a(Vector b, MatrixIFS ifs) {
  ifs.require_nondegenerate();
  if (ifs.letters().front().rows() != b.size()) {
    throw DimensionMismatch("survey: matrix IFS rows must equal the length of b");
  }
  SurveyTarget t{Matrix(), std::move(b), std::move(ifs)};
  return t;
}

SurveyTarget SurveyTarget::vary_a(Vector b, AnalyticCurve curve) {
  if (curve.rows() != b.size()) {
    throw DimensionMismatch("survey: curve rows must equal the length of b");
  }
  SurveyTarget t{Matrix(), std::move(b), std::move(curve)};
  return t;
}

AffineForm SurveyTarget::draw(Rng& rng, double tol) const {
  if (const auto* ifs = std::get_if<VectorIFS>(&measure)) {
    return AffineForm(fixed_a, ifs->sample(rng, tol));
  }
  if (const auto* ifs = std::get_if<MatrixIFS>(&measure)) {
    return AffineForm(ifs->sample(rng, tol), fixed_b);
  }
  return AffineForm(sample_type2(std::get<AnalyticCurve>(measure), rng), fixed_b);
}

double dirichlet_statistic(const AffineForm& form, std::int64_t horizon,
                           std::uint64_t budget) {
  if (horizon < 1) throw std::invalid_argument("dirichlet statistic: horizon must be >= 1");
  std::vector<std::int64_t> grid;
  auto q = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(horizon))));
  while (q < horizon) {
    grid.push_back(q);
    q = std::max(q + 1, static_cast<std::int64_t>(std::ceil(1.5 * static_cast<double>(q))));
  }
  grid.push_back(horizon);
  const DirichletScanResult scan = dirichlet_scan(form, 1.0, grid, budget);
  const double exponent = static_cast<double>(form.n()) / form.m();
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst = std::max(worst, std::pow(static_cast<double>(grid[i]), exponent) *
                                scan.min_dist[i]);
  }
  return worst;
}

bool survey_member(Scanner scanner, double statistic, double threshold) {
  return scanner == Scanner::Dirichlet ? statistic <= threshold : statistic > threshold;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

std::vector<double> sample_statistics(const AffineForm& form, const SurveySpec& spec) {
  switch (spec.scanner) {
    case Scanner::Bad: {
      std::vector<std::int64_t> qs;
      for (double h : spec.horizons) qs.push_back(static_cast<std::int64_t>(h));
      std::vector<double> out;
      for (const auto& r : bad_scan_profile(form, qs, spec.budget)) {
        out.push_back(r.c_estimate);
      }
      return out;
    }
    case Scanner::Dirichlet: {
      std::vector<double> out;
      for (double h : spec.horizons) {
        out.push_back(dirichlet_statistic(form, static_cast<std::int64_t>(h), spec.budget));
      }
      return out;
    }
    case Scanner::Dani:
      return dani_bad_profile(form, spec.horizons, spec.dt);
  }
  return {};
}

}  // namespace

SurveyReport fractal_survey(const SurveyTarget& target, const SurveySpec& spec) {
  if (spec.n_samples < 1) throw std::invalid_argument("survey: n_samples must be >= 1");
  if (spec.thresholds.empty()) throw std::invalid_argument("survey: no thresholds");
  if (spec.horizons.empty()) throw std::invalid_argument("survey: no horizons");
  if (spec.scanner != Scanner::Dani) {
    for (double h : spec.horizons) {
      if (h < 1.0 || h != std::floor(h)) {
        throw std::invalid_argument("survey: Qmax horizons must be positive integers");
      }
    }
  }

  SurveyReport report;
  report.samples.resize(spec.n_samples);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.n_samples) return;
      try {
        Rng rng(spec.seed, i);
        SurveySample s;
        s.id = i;
        s.form = target.draw(rng, spec.sample_tol);
        s.statistic = sample_statistics(s.form, spec);
        report.samples[i] = std::move(s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = spec.n_samples;
        return;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(
      spec.threads, static_cast<unsigned>(spec.n_samples)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t h = 0; h < spec.horizons.size(); ++h) {
    for (double eps : spec.thresholds) {
      SurveyCell cell;
      cell.threshold = eps;
      cell.horizon = spec.horizons[h];
      cell.total = spec.n_samples;
      for (const auto& s : report.samples) {
        if (survey_member(spec.scanner, s.statistic[h], eps)) ++cell.members;
      }
      cell.fraction = static_cast<double>(cell.members) / static_cast<double>(cell.total);
      const WilsonInterval ci = wilson_interval(cell.members, cell.total);
      cell.ci_lo = ci.lo;
      cell.ci_hi = ci.hi;
      report.cells.push_back(cell);
    }
  }
  return report;
}

}  // namespace gridlab
