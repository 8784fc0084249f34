#include "gridlab/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gridlab/error.hpp"

namespace gridlab {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("test function: ") + what +
                                " must be positive");
  }
}

}  // namespace

TestFunction TestFunction::siegel(double radius) {
  check_positive(radius, "radius");
  TestFunction f;
  f.kind = Kind::Siegel;
  f.radius = radius;
  return f;
}

TestFunction TestFunction::affine_siegel(double radius) {
  check_positive(radius, "radius");
  TestFunction f;
  f.kind = Kind::AffineSiegel;
  f.radius = radius;
  return f;
}

TestFunction TestFunction::cusp_indicator(double threshold) {
  check_positive(threshold, "threshold");
  TestFunction f;
  f.kind = Kind::CuspIndicator;
  f.threshold = threshold;
  return f;
}

TestFunction TestFunction::smooth_bump(double center, double width) {
  check_positive(width, "width");
  TestFunction f;
  f.kind = Kind::SmoothBump;
  f.center = center;
  f.width = width;
  return f;
}

std::string TestFunction::label() const {
  switch (kind) {
    case Kind::Siegel:
      return "siegel(R=" + fmt(radius) + ")";
    case Kind::AffineSiegel:
      return "affine-siegel(R=" + fmt(radius) + ")";
    case Kind::CuspIndicator:
      return "cusp-indicator(eps=" + fmt(threshold) + ")";
    case Kind::SmoothBump:
      return "smooth-bump(c=" + fmt(center) + ",w=" + fmt(width) + ")";
  }
  return "unknown";
}

HistogramSpec TestFunction::default_histogram() const {
  switch (kind) {
    case Kind::Siegel:
    case Kind::AffineSiegel:
      return {-0.5, 64.5, 65};
    case Kind::CuspIndicator:
      return {-0.5, 1.5, 2};
    case Kind::SmoothBump:
      return {0.0, 1.0, 20};
  }
  return {};
}

double siegel_transform(double radius, const LatticeBasis& basis,
                        std::uint64_t node_budget) {
  const Observation obs = evaluate(TestFunction::siegel(radius),
                                   AffinePoint{basis, Vector::Zero(basis.dim())},
                                   node_budget);
  if (obs.capped) {
    throw EnumerationBudgetExceeded("siegel_transform: count capped at " +
                                    fmt(obs.value));
  }
  return obs.value;
}

double affine_siegel_transform(double radius, const AffinePoint& point,
                               std::uint64_t node_budget) {
  const Observation obs =
      evaluate(TestFunction::affine_siegel(radius), point, node_budget);
  if (obs.capped) {
    throw EnumerationBudgetExceeded("affine_siegel_transform: count capped at " +
                                    fmt(obs.value));
  }
  return obs.value;
}

Observation evaluate(const TestFunction& f, const AffinePoint& x,
                     std::uint64_t node_budget) {
  switch (f.kind) {
    case TestFunction::Kind::Siegel:
    case TestFunction::Kind::AffineSiegel: {
      const bool affine = f.kind == TestFunction::Kind::AffineSiegel;
      const Matrix reduced = reduce_basis(x.basis).cols();
      const Vector shift = affine ? x.shift : Vector::Zero(x.dim());
      const PointCount pc =
          count_points(reduced, shift, f.radius, !affine, node_budget);
      return {static_cast<double>(pc.count), pc.capped};
    }
    case TestFunction::Kind::CuspIndicator: {
      const double delta = shortest_vector(x.basis, node_budget).norm;
      return {delta > f.threshold ? 1.0 : 0.0, false};
    }
    case TestFunction::Kind::SmoothBump: {
      const double delta = shortest_vector(x.basis, node_budget).norm;
      const double u = (delta - f.center) / f.width;
      if (std::abs(u) >= 1.0) return {0.0, false};
      return {std::exp(1.0 - 1.0 / (1.0 - u * u)), false};
    }
  }
  return {};
}

StatAccumulator::StatAccumulator(std::string observable, HistogramSpec spec,
                                 std::size_t batch_size)
    : observable_(std::move(observable)), spec_(spec), batch_size_(batch_size) {
  if (spec_.bins < 1 || !(spec_.hi > spec_.lo)) {
    throw std::invalid_argument("accumulator: histogram needs bins >= 1 and hi > lo");
  }
  if (batch_size_ < 1) throw std::invalid_argument("accumulator: batch size must be >= 1");
  hist_.assign(static_cast<std::size_t>(spec_.bins) + 2, 0);
}

void StatAccumulator::add(double value) {
  ++count_;
  const double delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (value - mean_);

  std::size_t bin;
  if (value < spec_.lo) {
    bin = 0;
  } else if (value >= spec_.hi) {
    bin = hist_.size() - 1;
  } else {
    const double width = (spec_.hi - spec_.lo) / spec_.bins;
    bin = 1 + std::min<std::size_t>(static_cast<std::size_t>((value - spec_.lo) / width),
                                    static_cast<std::size_t>(spec_.bins) - 1);
  }
  ++hist_[bin];

  partial_sum_ += value;
  if (++partial_n_ == batch_size_) {
    const double bm = partial_sum_ / static_cast<double>(batch_size_);
    ++batch_count_;
    const double bd = bm - batch_mean_;
    batch_mean_ += bd / static_cast<double>(batch_count_);
    batch_m2_ += bd * (bm - batch_mean_);
    partial_sum_ = 0.0;
    partial_n_ = 0;
  }
}

void StatAccumulator::add(const Observation& obs) {
  if (obs.capped) {
    ++capped_;
    return;
  }
  add(obs.value);
}

namespace {

void chan(std::uint64_t& na, double& ma, double& m2a, std::uint64_t nb, double mb,
          double m2b) {
  if (nb == 0) return;
  if (na == 0) {
    na = nb;
    ma = mb;
    m2a = m2b;
    return;
  }
  const double n = static_cast<double>(na + nb);
  const double delta = mb - ma;
  ma += delta * static_cast<double>(nb) / n;
  m2a += m2b + delta * delta * static_cast<double>(na) * static_cast<double>(nb) / n;
  na += nb;
}

}  // namespace

void StatAccumulator::merge(const StatAccumulator& other) {
  if (other.observable_ != observable_) {
    throw IncompatibleAccumulators("cannot merge '" + observable_ + "' with '" +
                                   other.observable_ + "'");
  }
  if (!(other.spec_ == spec_) || other.batch_size_ != batch_size_) {
    throw IncompatibleAccumulators("accumulators for '" + observable_ +
                                   "' use different histogram or batch settings");
  }
  if (other.count_ == 0 && other.capped_ == 0) return;
  if (count_ == 0 && capped_ == 0) {
    *this = other;
    partial_sum_ = 0.0;
    partial_n_ = 0;
    return;
  }
  chan(count_, mean_, m2_, other.count_, other.mean_, other.m2_);
  chan(batch_count_, batch_mean_, batch_m2_, other.batch_count_, other.batch_mean_,
       other.batch_m2_);
  capped_ += other.capped_;
  for (std::size_t i = 0; i < hist_.size(); ++i) hist_[i] += other.hist_[i];
  partial_sum_ = 0.0;
  partial_n_ = 0;
}

double StatAccumulator::variance() const {
  if (count_ < 2) return 0.0;
  return m2_ / static_cast<double>(count_ - 1);
}

double StatAccumulator::standard_error() const {
  if (batch_size_ > 1 && batch_count_ >= 2) {
    const double var = batch_m2_ / static_cast<double>(batch_count_ - 1);
    return std::sqrt(var / static_cast<double>(batch_count_));
  }
  if (count_ < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(count_));
}

StatAccumulator merge(StatAccumulator a, const StatAccumulator& b) {
  a.merge(b);
  return a;
}

MeasureComparison compare_measures(const StatAccumulator& a,
                                   const StatAccumulator& b, double significance) {
  if (a.observable() != b.observable()) {
    throw IncompatibleAccumulators("compare: observables '" + a.observable() +
                                   "' and '" + b.observable() + "' differ");
  }
  if (!(a.histogram_spec() == b.histogram_spec())) {
    throw IncompatibleAccumulators("compare: histogram layouts differ for '" +
                                   a.observable() + "'");
  }
  MeasureComparison out;
  out.observable = a.observable();
  out.count_a = a.count();
  out.count_b = b.count();
  out.mean_a = a.mean();
  out.mean_b = b.mean();
  out.stderr_a = a.standard_error();
  out.stderr_b = b.standard_error();

  const double diff = a.mean() - b.mean();
  const double se = std::hypot(out.stderr_a, out.stderr_b);
  if (se > 0.0) {
    out.z = diff / se;
  } else if (diff == 0.0) {
    out.z = 0.0;
  } else {
    out.z = std::copysign(std::numeric_limits<double>::infinity(), diff);
  }

  if (a.count() > 0 && b.count() > 0) {
    double tv = 0.0;
    const auto& ha = a.histogram();
    const auto& hb = b.histogram();
    for (std::size_t i = 0; i < ha.size(); ++i) {
      tv += std::abs(static_cast<double>(ha[i]) / a.count() -
                     static_cast<double>(hb[i]) / b.count());
    }
    out.total_variation = 0.5 * tv;
  } else if (a.count() != b.count()) {
    out.total_variation = 1.0;
  }
  out.pass = std::abs(out.z) < significance;
  return out;
}

StatAccumulator birkhoff_average(const AffinePoint& x0, const FlowParams& params,
                                 double T, double dt, const TestFunction& f,
                                 const FlowAverageOptions& options) {
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw std::invalid_argument("birkhoff_average: dt must lie in (0, 0.1]");
  }
  if (!(T >= dt)) throw std::invalid_argument("birkhoff_average: T must be >= dt");
  if (x0.dim() != params.dim()) {
    throw DimensionMismatch("birkhoff_average: point dimension does not match m+n");
  }
  const auto steps = static_cast<std::uint64_t>(std::floor(T / dt + 1e-9));
  const auto batch = static_cast<std::size_t>(
      std::max(1.0, std::round(options.batch_time / dt)));
  StatAccumulator acc(f.label(), f.default_histogram(), batch);
  AffinePoint x = x0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    x = canonicalize(flow_raw(params, dt, x));
    acc.add(evaluate(f, x, options.node_budget));
  }
  return acc;
}

StatAccumulator walk_average(const WalkConfig& cfg, const AffinePoint& x0,
                             const CodingWord& word, const TestFunction& f,
                             const WalkAverageOptions& options) {
  if (word.empty()) throw std::invalid_argument("walk_average: N must be >= 1");
  StatAccumulator acc(f.label(), f.default_histogram(), options.batch_size);
  walk_visit(cfg, x0, word, [&](std::size_t, const AffinePoint& x) {
    acc.add(evaluate(f, x, options.node_budget));
  });
  return acc;
}

StatAccumulator walk_average(const WalkConfig& cfg, const AffinePoint& x0,
                             std::size_t N, const TestFunction& f, Rng& rng,
                             const WalkAverageOptions& options) {
  if (N < 1) throw std::invalid_argument("walk_average: N must be >= 1");
  CodingWord word;
  word.letters.resize(N);
  for (auto& l : word.letters) {
    l = static_cast<std::uint32_t>(rng.categorical(cfg.cumulative));
  }
  return walk_average(cfg, x0, word, f, options);
}

LatticeBasis sample_haar_lattice(int dim, Rng& rng) {
  if (dim != 2) {
    throw DimensionMismatch("exact Haar sampling is implemented for dimension 2 only");
  }
  const double y0 = std::sqrt(3.0) / 2.0;
  double x = 0.0;
  double y = 0.0;
  do {
    x = rng.uniform() - 0.5;
    // Inverse CDF of the density y0 / y^2 on [y0, inf).
    y = y0 / (1.0 - rng.uniform());
  } while (x * x + y * y < 1.0);
  const double s = 1.0 / std::sqrt(y);
  Matrix basis(2, 2);
  basis << s, s * x, 0.0, s * y;
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  Matrix rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return LatticeBasis::trusted(rot * basis);
}

AffinePoint sample_haar_point(int dim, Rng& rng) {
  LatticeBasis basis = sample_haar_lattice(dim, rng);
  Vector coords(dim);
  for (int i = 0; i < dim; ++i) coords(i) = rng.uniform();
  Vector shift = basis.cols() * coords;
  return canonicalize(AffinePoint{std::move(basis), std::move(shift)});
}

}  // namespace gridlab
