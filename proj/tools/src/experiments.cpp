#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <variant>

#include <gridlab/diagnostics.hpp>
#include <gridlab/diophantine.hpp>
#include <gridlab/group.hpp>
#include <gridlab/ifs.hpp>
#include <gridlab/rng.hpp>
#include <gridlab/walk.hpp>

namespace gridlab::cli {

namespace {

using json = nlohmann::json;

const std::string kExp = "experiment";
const std::string kIfs = "ifs";
const std::string kCurve = "curve";

// Stream offsets keep start points, walk letters and suspension words on
// disjoint generator streams.
constexpr std::uint64_t kWalkSalt = 0x57a1c0ffee000001ULL;
constexpr std::uint64_t kSuspensionSalt = 0x5005e45ULL;

template <class F>
auto guard(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::int64_t positive_int(const ConfigDoc& doc, const std::string& section,
                          const std::string& key, std::int64_t fallback) {
  const std::int64_t v = doc.get_int(section, key, fallback);
  if (v < 1) throw ConfigError(key_name(section, key), "must be a positive integer");
  return v;
}

std::int64_t required_positive_int(const ConfigDoc& doc, const std::string& section,
                                   const std::string& key) {
  const std::int64_t v = doc.get_int(section, key);
  if (v < 1) throw ConfigError(key_name(section, key), "must be a positive integer");
  return v;
}

double positive_double(const ConfigDoc& doc, const std::string& section,
                       const std::string& key) {
  const double v = doc.get_double(section, key);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(key_name(section, key), "must be positive");
  }
  return v;
}

double positive_double(const ConfigDoc& doc, const std::string& section,
                       const std::string& key, double fallback) {
  return doc.has(section, key) ? positive_double(doc, section, key) : fallback;
}

double time_step(const ConfigDoc& doc) {
  const double dt = positive_double(doc, kExp, "dt", kDefaultDt);
  if (dt > kMaxDt) throw ConfigError(key_name(kExp, "dt"), "must not exceed 0.1");
  return dt;
}

FlowParams load_params(const ConfigDoc& doc) {
  const auto m = positive_int(doc, kExp, "m", 1);
  const auto n = positive_int(doc, kExp, "n", 1);
  if (m + n > 8) throw ConfigError(key_name(kExp, "m"), "m + n must not exceed 8");
  return FlowParams(static_cast<int>(m), static_cast<int>(n));
}

std::uint64_t load_budget(const ConfigDoc& doc, std::uint64_t fallback) {
  const std::uint64_t b = doc.get_uint(kExp, "budget", fallback);
  if (b == 0) throw ConfigError(key_name(kExp, "budget"), "must be positive");
  return b;
}

std::vector<std::int64_t> int_list(const ConfigDoc& doc, const std::string& key) {
  std::vector<std::int64_t> out;
  for (double v : doc.get_list(kExp, key)) {
    if (v < 1.0 || v != std::floor(v) || v > 9e15) {
      throw ConfigError(key_name(kExp, key), "entries must be positive integers");
    }
    out.push_back(static_cast<std::int64_t>(v));
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) {
      throw ConfigError(key_name(kExp, key), "entries must be strictly ascending");
    }
  }
  return out;
}

std::vector<double> ascending_list(const ConfigDoc& doc, const std::string& key) {
  const auto out = doc.get_list(kExp, key);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= 0.0) || (i > 0 && out[i] < out[i - 1])) {
      throw ConfigError(key_name(kExp, key), "entries must be nonnegative and ascending");
    }
  }
  return out;
}

// ---- alphabets -------------------------------------------------------------

std::vector<std::string> letter_sections(const ConfigDoc& doc) {
  auto names = doc.sections_with_prefix("letter.");
  std::vector<std::pair<std::int64_t, std::string>> indexed;
  for (const auto& s : names) {
    const std::string idx = s.substr(7);
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("[" + s + "]", "letter sections are named letter.0, letter.1, ...");
    }
    indexed.emplace_back(std::stoll(idx), s);
  }
  std::sort(indexed.begin(), indexed.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < indexed.size(); ++i) {
    if (indexed[i].first != static_cast<std::int64_t>(i)) {
      throw ConfigError("[" + indexed[i].second + "]",
                        "letter indices must run 0, 1, 2, ... without gaps");
    }
    out.push_back(indexed[i].second);
  }
  if (out.empty()) throw ConfigError("[letter.0]", "at least one letter section is required");
  return out;
}

Matrix orthogonal_part(const ConfigDoc& doc, const std::string& sec, const std::string& key,
                       int size) {
  if (doc.has(sec, key)) return doc.get_matrix(sec, key, size, size);
  const std::string angle_key = key == "o" ? "angle" : key + "_angle";
  if (doc.has(sec, angle_key)) {
    if (size != 2) {
      throw ConfigError(key_name(sec, angle_key), "a rotation angle needs a 2 x 2 block");
    }
    const double a = doc.get_double(sec, angle_key);
    Matrix r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
  }
  return Matrix::Identity(size, size);
}

std::vector<double> load_weights(const ConfigDoc& doc, std::size_t letters) {
  const auto w = doc.get_list(kIfs, "weights");
  if (w.size() != letters) {
    throw ConfigError(key_name(kIfs, "weights"),
                      "expected " + std::to_string(letters) + " weights, one per letter");
  }
  return w;
}

using Alphabet = std::variant<VectorIFS, MatrixIFS>;

Alphabet load_ifs(const ConfigDoc& doc, const FlowParams& params) {
  if (!doc.has_section(kIfs)) throw ConfigError("[ifs]", "section is required");
  const std::string kind = doc.get_string(kIfs, "kind", "vector");
  const auto sections = letter_sections(doc);
  const auto weights = load_weights(doc, sections.size());
  if (kind == "vector") {
    std::vector<VectorSimilarity> letters;
    for (const auto& sec : sections) {
      letters.push_back(guard("[" + sec + "]", [&] {
        const double rho = doc.get_double(sec, "rho");
        const Matrix o = orthogonal_part(doc, sec, "o", params.m);
        const Vector w =
            doc.has(sec, "w") ? doc.get_vector(sec, "w", params.m) : Vector::Zero(params.m);
        return VectorSimilarity(rho, o, w);
      }));
    }
    return guard(key_name(kIfs, "weights"),
                 [&] { return VectorIFS(std::move(letters), weights); });
  }
  if (kind == "matrix") {
    std::vector<MatrixSimilarity> letters;
    for (const auto& sec : sections) {
      letters.push_back(guard("[" + sec + "]", [&] {
        const double rho = doc.get_double(sec, "rho");
        const Matrix o1 = orthogonal_part(doc, sec, "o1", params.m);
        const Matrix o2 = orthogonal_part(doc, sec, "o2", params.n);
        const Matrix b = doc.has(sec, "b") ? doc.get_matrix(sec, "b", params.m, params.n)
                                           : Matrix::Zero(params.m, params.n);
        return MatrixSimilarity(rho, o1, o2, b);
      }));
    }
    return guard(key_name(kIfs, "weights"),
                 [&] { return MatrixIFS(std::move(letters), weights); });
  }
  throw ConfigError(key_name(kIfs, "kind"), "expected vector or matrix, got '" + kind + "'");
}

WalkConfig load_walk(const ConfigDoc& doc, const FlowParams& params) {
  const Alphabet alphabet = load_ifs(doc, params);
  const auto cadence = static_cast<int>(positive_int(doc, kExp, "renorm_cadence",
                                                     kDefaultRenormCadence));
  return std::visit(
      [&](const auto& ifs) { return WalkConfig::from_ifs(ifs, params, cadence); },
      alphabet);
}

AnalyticCurve load_curve(const ConfigDoc& doc, const FlowParams& params) {
  if (doc.get_bool(kCurve, "veronese", false)) {
    if (params.m != 1) {
      throw ConfigError(key_name(kCurve, "veronese"), "the Veronese curve needs m = 1");
    }
    return AnalyticCurve::veronese(params.n);
  }
  std::vector<Matrix> coeffs;
  for (int k = 0; doc.has(kCurve, "c" + std::to_string(k)); ++k) {
    coeffs.push_back(doc.get_matrix(kCurve, "c" + std::to_string(k), params.m, params.n));
  }
  if (coeffs.empty()) {
    throw ConfigError(key_name(kCurve, "c0"),
                      "curve needs coefficients c0, c1, ... or veronese = true");
  }
  return AnalyticCurve(std::move(coeffs));
}

TestFunction load_observable(const ConfigDoc& doc) {
  const std::string name = doc.get_string(kExp, "observable", "siegel");
  const std::string key = key_name(kExp, "observable");
  if (name == "siegel") {
    return guard(key_name(kExp, "radius"),
                 [&] { return TestFunction::siegel(doc.get_double(kExp, "radius", 1.0)); });
  }
  if (name == "affine-siegel") {
    return guard(key_name(kExp, "radius"), [&] {
      return TestFunction::affine_siegel(doc.get_double(kExp, "radius", 1.0));
    });
  }
  if (name == "cusp-indicator") {
    return guard(key_name(kExp, "epsilon"), [&] {
      return TestFunction::cusp_indicator(doc.get_double(kExp, "epsilon", 0.1));
    });
  }
  if (name == "smooth-bump") {
    return guard(key_name(kExp, "width"), [&] {
      return TestFunction::smooth_bump(doc.get_double(kExp, "center", 1.0),
                                       doc.get_double(kExp, "width", 0.5));
    });
  }
  throw ConfigError(key, "unknown observable '" + name +
                             "'; expected siegel, affine-siegel, cusp-indicator or "
                             "smooth-bump");
}

double haar_mean(const TestFunction& f, int dim) {
  if (f.kind != TestFunction::Kind::Siegel && f.kind != TestFunction::Kind::AffineSiegel) {
    return std::nan("");
  }
  const double half = 0.5 * dim;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0) *
         std::pow(f.radius, dim);
}

// ---- start points ----------------------------------------------------------

struct Start {
  Matrix a;
  Vector b;
};

std::vector<Start> load_starts(const ConfigDoc& doc, const FlowParams& params,
                               std::uint64_t seed) {
  if (doc.has(kExp, "A")) {
    Start s{doc.get_matrix(kExp, "A", params.m, params.n),
            doc.has(kExp, "b") ? doc.get_vector(kExp, "b", params.m)
                               : Vector::Zero(params.m)};
    return {s};
  }
  const auto count = positive_int(doc, kExp, "starts", 1);
  const bool random_shift = doc.get_bool(kExp, "random_shift", false);
  std::vector<Start> out;
  for (std::int64_t i = 0; i < count; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    Start s{Matrix(params.m, params.n), Vector::Zero(params.m)};
    for (int r = 0; r < params.m; ++r) {
      for (int c = 0; c < params.n; ++c) s.a(r, c) = rng.uniform();
    }
    if (random_shift) {
      for (int r = 0; r < params.m; ++r) s.b(r) = rng.uniform();
    }
    out.push_back(std::move(s));
  }
  return out;
}

AffineForm load_form(const ConfigDoc& doc, const FlowParams& params) {
  Matrix a = doc.get_matrix(kExp, "A", params.m, params.n);
  Vector b = doc.has(kExp, "b") ? doc.get_vector(kExp, "b", params.m) : Vector::Zero(params.m);
  return guard(key_name(kExp, "A"), [&] { return AffineForm(a, b); });
}

std::vector<std::string> coord_header(int m, int n, bool with_a = true, bool with_b = true) {
  std::vector<std::string> h;
  if (with_a) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) h.push_back("a_" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  if (with_b) {
    for (int i = 0; i < m; ++i) h.push_back("b_" + std::to_string(i));
  }
  return h;
}

void push_coords(std::vector<std::string>& row, const Matrix* a, const Vector* b) {
  if (a != nullptr) {
    for (Eigen::Index i = 0; i < a->rows(); ++i) {
      for (Eigen::Index j = 0; j < a->cols(); ++j) row.push_back(num((*a)(i, j)));
    }
  }
  if (b != nullptr) {
    for (Eigen::Index i = 0; i < b->size(); ++i) row.push_back(num((*b)(i)));
  }
}

template <class... Lists>
std::vector<std::string> concat(std::vector<std::string> first, const Lists&... rest) {
  (first.insert(first.end(), rest.begin(), rest.end()), ...);
  return first;
}

json stats_json(const StatAccumulator& acc) {
  return {{"count", acc.count()},
          {"capped", acc.capped()},
          {"mean", acc.mean()},
          {"stderr", acc.standard_error()}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- experiments -----------------------------------------------------------

struct Context {
  const ConfigDoc& doc;
  FlowParams params;
  std::uint64_t seed;
  unsigned threads;
};

ExperimentResult flow_avg(const Context& ctx) {
  const auto& doc = ctx.doc;
  const TestFunction f = load_observable(doc);
  const double T = positive_double(doc, kExp, "T");
  const double dt = time_step(doc);
  if (T < dt) throw ConfigError(key_name(kExp, "T"), "must be at least dt");
  FlowAverageOptions opts;
  opts.batch_time = positive_double(doc, kExp, "batch_time", kDefaultBatchTime);
  opts.node_budget = load_budget(doc, kDefaultNodeBudget);
  const double tolerance = positive_double(doc, kExp, "tolerance", 0.05);
  const auto starts = load_starts(doc, ctx.params, ctx.seed);

  std::vector<StatAccumulator> accs(starts.size());
  parallel_for(starts.size(), ctx.threads, [&](std::size_t i) {
    const AffinePoint x = make_point(starts[i].a, starts[i].b);
    accs[i] = birkhoff_average(x, ctx.params, T, dt, f, opts);
  });

  const double target = haar_mean(f, ctx.params.dim());
  ExperimentResult out;
  out.table.header = concat({"start_id"}, coord_header(ctx.params.m, ctx.params.n),
                            std::vector<std::string>{"observable", "T", "dt", "count",
                                                     "capped", "mean", "stderr",
                                                     "haar_mean", "relative_error"});
  std::size_t within = 0;
  json per_start = json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& acc = accs[i];
    const double rel = std::abs(acc.mean() - target) / target;
    if (std::isfinite(rel) && rel <= tolerance) ++within;
    std::vector<std::string> row{num(static_cast<std::uint64_t>(i))};
    push_coords(row, &starts[i].a, &starts[i].b);
    row.insert(row.end(), {f.label(), num(T), num(dt), num(acc.count()), num(acc.capped()),
                           num(acc.mean()), num(acc.standard_error()),
                           std::isfinite(target) ? num(target) : "",
                           std::isfinite(rel) ? num(rel) : ""});
    out.table.add(std::move(row));
    per_start.push_back(stats_json(acc));
  }
  out.results = {{"observable", f.label()},
                 {"T", T},
                 {"dt", dt},
                 {"haar_mean", number_or_null(target)},
                 {"tolerance", tolerance},
                 {"starts", starts.size()},
                 {"within_tolerance", std::isfinite(target) ? json(within) : json(nullptr)},
                 {"per_start", per_start}};
  return out;
}

ExperimentResult walk_exp(const Context& ctx) {
  const auto& doc = ctx.doc;
  const TestFunction f = load_observable(doc);
  const auto N = static_cast<std::size_t>(required_positive_int(doc, kExp, "N"));
  WalkAverageOptions opts;
  opts.batch_size = static_cast<std::size_t>(
      positive_int(doc, kExp, "batch_size", static_cast<std::int64_t>(kDefaultWalkBatch)));
  opts.node_budget = load_budget(doc, kDefaultNodeBudget);
  const WalkConfig cfg = load_walk(doc, ctx.params);
  const auto starts = load_starts(doc, ctx.params, ctx.seed);

  std::vector<StatAccumulator> accs(starts.size());
  parallel_for(starts.size(), ctx.threads, [&](std::size_t i) {
    Rng rng(ctx.seed ^ kWalkSalt, i);
    accs[i] = walk_average(cfg, make_point(starts[i].a, starts[i].b), N, f, rng, opts);
  });

  const double target = haar_mean(f, ctx.params.dim());
  ExperimentResult out;
  out.table.header = concat({"start_id"}, coord_header(ctx.params.m, ctx.params.n),
                            std::vector<std::string>{"observable", "N", "count", "capped",
                                                     "mean", "stderr", "haar_mean"});
  json per_start = json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    std::vector<std::string> row{num(static_cast<std::uint64_t>(i))};
    push_coords(row, &starts[i].a, &starts[i].b);
    row.insert(row.end(), {f.label(), num(static_cast<std::uint64_t>(N)),
                           num(accs[i].count()), num(accs[i].capped()), num(accs[i].mean()),
                           num(accs[i].standard_error()),
                           std::isfinite(target) ? num(target) : ""});
    out.table.add(std::move(row));
    per_start.push_back(stats_json(accs[i]));
  }
  out.results = {{"observable", f.label()},
                 {"N", N},
                 {"mean_roof", cfg.mean_roof()},
                 {"haar_mean", number_or_null(target)},
                 {"per_start", per_start}};
  return out;
}

ExperimentResult walk_vs_flow(const Context& ctx) {
  const auto& doc = ctx.doc;
  const TestFunction f = load_observable(doc);
  const double T = positive_double(doc, kExp, "T");
  const double dt = time_step(doc);
  if (T < dt) throw ConfigError(key_name(kExp, "T"), "must be at least dt");
  const auto N = static_cast<std::size_t>(required_positive_int(doc, kExp, "N"));
  const double significance = positive_double(doc, kExp, "significance", kDefaultSignificance);
  FlowAverageOptions fopts;
  fopts.batch_time = positive_double(doc, kExp, "batch_time", kDefaultBatchTime);
  WalkAverageOptions wopts;
  wopts.batch_size = static_cast<std::size_t>(
      positive_int(doc, kExp, "batch_size", static_cast<std::int64_t>(kDefaultWalkBatch)));
  fopts.node_budget = wopts.node_budget = load_budget(doc, kDefaultNodeBudget);
  const WalkConfig cfg = load_walk(doc, ctx.params);
  const auto starts = load_starts(doc, ctx.params, ctx.seed);

  std::vector<MeasureComparison> cmp(starts.size());
  parallel_for(starts.size(), ctx.threads, [&](std::size_t i) {
    const AffinePoint x = make_point(starts[i].a, starts[i].b);
    const StatAccumulator flow = birkhoff_average(x, ctx.params, T, dt, f, fopts);
    Rng rng(ctx.seed ^ kWalkSalt, i);
    const StatAccumulator walk = walk_average(cfg, x, N, f, rng, wopts);
    cmp[i] = compare_measures(flow, walk, significance);
  });

  ExperimentResult out;
  out.table.header = concat({"start_id"}, coord_header(ctx.params.m, ctx.params.n),
                            std::vector<std::string>{
                                "observable", "T", "N", "flow_count", "flow_mean",
                                "flow_stderr", "walk_count", "walk_mean", "walk_stderr",
                                "z", "tv", "verdict"});
  std::size_t passes = 0;
  json per_start = json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& c = cmp[i];
    if (c.pass) ++passes;
    std::vector<std::string> row{num(static_cast<std::uint64_t>(i))};
    push_coords(row, &starts[i].a, &starts[i].b);
    row.insert(row.end(),
               {c.observable, num(T), num(static_cast<std::uint64_t>(N)), num(c.count_a),
                num(c.mean_a), num(c.stderr_a), num(c.count_b), num(c.mean_b),
                num(c.stderr_b), num(c.z), num(c.total_variation), c.pass ? "pass" : "fail"});
    out.table.add(std::move(row));
    per_start.push_back({{"observable", c.observable},
                         {"T", T},
                         {"N", N},
                         {"flow_mean", c.mean_a},
                         {"flow_stderr", c.stderr_a},
                         {"walk_mean", c.mean_b},
                         {"walk_stderr", c.stderr_b},
                         {"z", number_or_null(c.z)},
                         {"tv", c.total_variation},
                         {"verdict", c.pass ? "pass" : "fail"}});
  }
  out.results = {{"observable", f.label()},
                 {"significance", significance},
                 {"starts", starts.size()},
                 {"passes", passes},
                 {"verdict", passes == starts.size() ? "pass" : "fail"},
                 {"per_start", per_start}};
  return out;
}

ExperimentResult suspension(const Context& ctx) {
  const auto& doc = ctx.doc;
  const auto steps = required_positive_int(doc, kExp, "steps");
  const double dl_max = positive_double(doc, kExp, "dl_max", 1.0);
  const auto record_every = positive_int(doc, kExp, "record_every", std::max<std::int64_t>(1, steps / 100));
  const double significance = positive_double(doc, kExp, "significance", kDefaultSignificance);
  const WalkConfig cfg = load_walk(doc, ctx.params);

  std::vector<double> roofs;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t e = 0; e < cfg.size(); ++e) {
    roofs.push_back(-std::log(cfg.rhos[e]));
    mean += cfg.weights[e] * roofs.back();
    second += cfg.weights[e] * roofs.back() * roofs.back();
  }
  const double var = std::max(0.0, second - mean * mean);

  Rng rng(ctx.seed ^ kSuspensionSalt, 0);
  SuspensionPoint c = make_suspension_point(
      cfg, LazyWord(derive_seed(ctx.seed, kSuspensionSalt), cfg.cumulative), 0.0);
  double elapsed = 0.0;
  std::uint64_t shifts = 0;
  double roof_sum = 0.0;

  ExperimentResult out;
  out.table.header = {"step", "elapsed", "shifts", "k", "mean_roof"};
  for (std::int64_t s = 1; s <= steps; ++s) {
    const double l = rng.uniform(0.0, dl_max);
    std::uint64_t p = 0;
    const SuspensionPoint next = suspension_step(cfg, c, l, &p);
    for (std::uint64_t i = 0; i < p; ++i) roof_sum += roofs[c.word[i]];
    shifts += p;
    elapsed += l;
    c = next;
    if (s % record_every == 0 || s == steps) {
      out.table.add({num(s), num(elapsed), num(shifts), num(c.k),
                     shifts > 0 ? num(roof_sum / static_cast<double>(shifts)) : ""});
    }
  }
  const double empirical = shifts > 0 ? roof_sum / static_cast<double>(shifts) : std::nan("");
  const double se = shifts > 0 ? std::sqrt(var / static_cast<double>(shifts)) : std::nan("");
  double z = 0.0;
  if (se > 0.0) {
    z = (empirical - mean) / se;
  } else if (empirical != mean) {
    z = std::copysign(std::numeric_limits<double>::infinity(), empirical - mean);
  }
  out.results = {{"steps", steps},
                 {"elapsed", elapsed},
                 {"shifts", shifts},
                 {"predicted_shifts", elapsed / mean},
                 {"expected_mean_roof", mean},
                 {"empirical_mean_roof", number_or_null(empirical)},
                 {"stderr", number_or_null(se)},
                 {"z", number_or_null(z)},
                 {"verdict", std::abs(z) < significance ? "pass" : "fail"}};
  return out;
}

// The fractal measure named by the config: [ifs] or [curve].
struct MeasureSpec {
  std::optional<Alphabet> ifs;
  std::optional<AnalyticCurve> curve;
};

MeasureSpec load_measure(const ConfigDoc& doc, const FlowParams& params) {
  MeasureSpec spec;
  if (doc.has_section(kIfs)) {
    spec.ifs = load_ifs(doc, params);
  } else if (doc.has_section(kCurve)) {
    spec.curve = load_curve(doc, params);
  } else {
    throw ConfigError("[ifs]", "an [ifs] or [curve] section is required");
  }
  return spec;
}

ExperimentResult fractal_sample(const Context& ctx) {
  const auto& doc = ctx.doc;
  const auto count = static_cast<std::size_t>(required_positive_int(doc, kExp, "n_samples"));
  const double tol = positive_double(doc, kExp, "tol", 1e-12);
  const MeasureSpec measure = load_measure(doc, ctx.params);
  const int m = ctx.params.m;
  const int n = ctx.params.n;

  const bool vector_points = measure.ifs && std::holds_alternative<VectorIFS>(*measure.ifs);
  if (measure.ifs) {
    std::visit([&](const auto& ifs) {
      guard(key_name(kIfs, "weights"), [&] { ifs.require_nondegenerate(); return 0; });
    }, *measure.ifs);
  }
  std::vector<Matrix> points(count);
  parallel_for(count, ctx.threads, [&](std::size_t i) {
    Rng rng(ctx.seed, i);
    if (measure.curve) {
      points[i] = sample_type2(*measure.curve, rng);
    } else if (vector_points) {
      points[i] = std::get<VectorIFS>(*measure.ifs).sample(rng, tol);
    } else {
      points[i] = std::get<MatrixIFS>(*measure.ifs).sample(rng, tol);
    }
  });

  ExperimentResult out;
  out.table.header = concat({"sample_id"}, vector_points ? coord_header(m, n, false, true)
                                                         : coord_header(m, n, true, false));
  Vector mean = Vector::Zero(points.front().size());
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> row{num(static_cast<std::uint64_t>(i))};
    const Matrix& p = points[i];
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) row.push_back(num(p(r, c)));
    }
    mean += Eigen::Map<const Vector>(p.data(), p.size());
    out.table.add(std::move(row));
  }
  mean /= static_cast<double>(count);
  out.results = {{"n_samples", count},
                 {"tol", tol},
                 {"measure", measure.curve ? "curve" : (vector_points ? "vector-ifs" : "matrix-ifs")},
                 {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())}};
  return out;
}

ExperimentResult bad_scan_exp(const Context& ctx) {
  const auto& doc = ctx.doc;
  const AffineForm form = load_form(doc, ctx.params);
  const auto qs = int_list(doc, "qmax");
  const auto budget = load_budget(doc, kDefaultScanBudget);
  const auto results = bad_scan_profile(form, qs, budget);

  ExperimentResult out;
  out.table.header = {"qmax", "c_estimate"};
  for (int j = 0; j < form.n(); ++j) out.table.header.push_back("argmin_q_" + std::to_string(j));
  json rows = json::array();
  for (const auto& r : results) {
    std::vector<std::string> row{num(r.q_max), num(r.c_estimate)};
    std::vector<std::int64_t> q;
    for (Eigen::Index j = 0; j < r.argmin_q.size(); ++j) {
      row.push_back(num(static_cast<std::int64_t>(r.argmin_q(j))));
      q.push_back(r.argmin_q(j));
    }
    out.table.add(std::move(row));
    rows.push_back({{"qmax", r.q_max}, {"c_estimate", r.c_estimate}, {"argmin_q", q}});
  }
  out.results = {{"scans", rows}};
  return out;
}

ExperimentResult dirichlet_scan_exp(const Context& ctx) {
  const auto& doc = ctx.doc;
  const AffineForm form = load_form(doc, ctx.params);
  const double lambda = positive_double(doc, kExp, "lambda");
  const auto qs = int_list(doc, "Q");
  const auto budget = load_budget(doc, kDefaultScanBudget);
  const auto r = dirichlet_scan(form, lambda, qs, budget);

  ExperimentResult out;
  out.table.header = {"Q", "min_dist", "bound", "solvable"};
  const double exponent = static_cast<double>(form.n()) / form.m();
  std::size_t solvable = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double bound = lambda * std::pow(static_cast<double>(qs[i]), -exponent);
    if (r.solvable[i]) ++solvable;
    out.table.add({num(qs[i]), num(r.min_dist[i]), num(bound),
                   r.solvable[i] ? "true" : "false"});
  }
  out.results = {{"lambda", lambda},
                 {"scanned", qs.size()},
                 {"solvable", solvable},
                 {"all_solvable", solvable == qs.size()},
                 {"q0", r.q0 ? json(*r.q0) : json(nullptr)}};
  return out;
}

ExperimentResult dani_scan(const Context& ctx) {
  const auto& doc = ctx.doc;
  const AffineForm form = load_form(doc, ctx.params);
  const auto horizons = ascending_list(doc, "horizons");
  const double dt = time_step(doc);
  const auto profile =
      dani_bad_profile(form, horizons, dt, load_budget(doc, kDefaultNodeBudget));

  ExperimentResult out;
  out.table.header = {"T", "indicator"};
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    out.table.add({num(horizons[i]), num(profile[i])});
  }
  out.results = {{"dt", dt}, {"horizons", horizons}, {"indicator", profile}};
  return out;
}

ExperimentResult survey(const Context& ctx) {
  const auto& doc = ctx.doc;
  const FlowParams& params = ctx.params;
  SurveySpec spec;
  const std::string scanner = doc.get_string(kExp, "scanner");
  if (scanner == "bad") {
    spec.scanner = Scanner::Bad;
  } else if (scanner == "dirichlet") {
    spec.scanner = Scanner::Dirichlet;
  } else if (scanner == "dani") {
    spec.scanner = Scanner::Dani;
  } else {
    throw ConfigError(key_name(kExp, "scanner"),
                      "expected bad, dirichlet or dani, got '" + scanner + "'");
  }
  spec.n_samples = static_cast<std::size_t>(required_positive_int(doc, kExp, "n_samples"));
  spec.thresholds = doc.get_list(kExp, "thresholds");
  spec.horizons = ascending_list(doc, "horizons");
  if (spec.scanner != Scanner::Dani) int_list(doc, "horizons");
  spec.dt = time_step(doc);
  spec.sample_tol = positive_double(doc, kExp, "tol", 1e-12);
  spec.budget = load_budget(doc, kDefaultScanBudget);
  spec.seed = ctx.seed;
  spec.threads = ctx.threads;

  const MeasureSpec measure = load_measure(doc, params);
  const auto target = guard(key_name(kIfs, "weights"), [&] {
    if (measure.curve) {
      const Vector b = doc.has(kExp, "b") ? doc.get_vector(kExp, "b", params.m)
                                          : Vector::Zero(params.m);
      return SurveyTarget::vary_a(b, *measure.curve);
    }
    if (const auto* ifs = std::get_if<VectorIFS>(&*measure.ifs)) {
      return SurveyTarget::vary_b(doc.get_matrix(kExp, "A", params.m, params.n), *ifs);
    }
    const Vector b = doc.has(kExp, "b") ? doc.get_vector(kExp, "b", params.m)
                                        : Vector::Zero(params.m);
    return SurveyTarget::vary_a(b, std::get<MatrixIFS>(*measure.ifs));
  });
  const SurveyReport report = fractal_survey(target, spec);

  ExperimentResult out;
  out.table.header = concat({"sample_id"}, coord_header(params.m, params.n),
                            std::vector<std::string>{"horizon", "statistic", "threshold",
                                                     "verdict"});
  for (const auto& s : report.samples) {
    for (std::size_t h = 0; h < spec.horizons.size(); ++h) {
      for (double eps : spec.thresholds) {
        std::vector<std::string> row{num(static_cast<std::uint64_t>(s.id))};
        push_coords(row, &s.form.a, &s.form.b);
        const bool member = survey_member(spec.scanner, s.statistic[h], eps);
        row.insert(row.end(), {num(spec.horizons[h]), num(s.statistic[h]), num(eps),
                               member ? "member" : "non-member"});
        out.table.add(std::move(row));
      }
    }
  }
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"threshold", c.threshold},
                     {"horizon", c.horizon},
                     {"members", c.members},
                     {"total", c.total},
                     {"fraction", c.fraction},
                     {"ci_lo", c.ci_lo},
                     {"ci_hi", c.ci_hi}});
  }
  out.results = {{"scanner", scanner},
                 {"varies", target.varies_b() ? "b" : "A"},
                 {"n_samples", spec.n_samples},
                 {"cells", cells}};
  return out;
}

ExperimentResult product_check(const Context& ctx) {
  const auto& doc = ctx.doc;
  const auto words = static_cast<std::size_t>(positive_int(doc, kExp, "n_words", 1000));
  const auto max_len = positive_int(doc, kExp, "max_length", 30);
  const auto min_len = positive_int(doc, kExp, "min_length", 1);
  if (min_len > max_len) {
    throw ConfigError(key_name(kExp, "min_length"), "must not exceed max_length");
  }
  const double tolerance = positive_double(doc, kExp, "tolerance", 1e-10);
  const WalkConfig cfg = load_walk(doc, ctx.params);
  const bool vector_alphabet =
      std::holds_alternative<std::vector<VectorSimilarity>>(cfg.alphabet);

  struct Row {
    CodingWord word;
    ProductReport report;
    double intertwining = 0.0;
  };
  std::vector<Row> rows(words);
  parallel_for(words, ctx.threads, [&](std::size_t i) {
    Rng rng(ctx.seed, i);
    const auto span = static_cast<std::uint64_t>(max_len - min_len + 1);
    const auto len = static_cast<std::size_t>(min_len) +
                     static_cast<std::size_t>(rng.uniform() * static_cast<double>(span));
    Row r;
    r.word.letters.resize(std::min<std::size_t>(len, static_cast<std::size_t>(max_len)));
    for (auto& l : r.word.letters) l = static_cast<std::uint32_t>(rng.categorical(cfg.cumulative));
    r.report = walk_product(cfg, r.word);
    if (vector_alphabet) r.intertwining = intertwining_deviation(cfg, r.word, r.word.size());
    rows[i] = std::move(r);
  });

  ExperimentResult out;
  out.table.header = {"word_id", "length", "word", "closed_form_deviation",
                      "product_deviation", "intertwining_deviation"};
  double worst = 0.0;
  double worst_intertwining = 0.0;
  for (std::size_t i = 0; i < words; ++i) {
    const auto& r = rows[i];
    std::string word;
    for (std::size_t k = 0; k < r.word.size(); ++k) {
      if (k > 0) word += '.';
      word += std::to_string(r.word[k]);
    }
    worst = std::max(worst, r.report.deviation());
    worst_intertwining = std::max(worst_intertwining, r.intertwining);
    out.table.add({num(static_cast<std::uint64_t>(i)),
                   num(static_cast<std::uint64_t>(r.word.size())), word,
                   num(r.report.closed_form_deviation), num(r.report.product_deviation),
                   vector_alphabet ? num(r.intertwining) : ""});
  }
  out.results = {{"n_words", words},
                 {"max_length", max_len},
                 {"max_deviation", worst},
                 {"max_intertwining_deviation",
                  vector_alphabet ? json(worst_intertwining) : json(nullptr)},
                 {"tolerance", tolerance},
                 {"verdict", worst < tolerance ? "pass" : "fail"}};
  return out;
}

using Runner = ExperimentResult (*)(const Context&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> table = {
      {"flow-avg", flow_avg},
      {"walk", walk_exp},
      {"walk-vs-flow", walk_vs_flow},
      {"suspension", suspension},
      {"fractal-sample", fractal_sample},
      {"bad-scan", bad_scan_exp},
      {"dirichlet-scan", dirichlet_scan_exp},
      {"dani-scan", dani_scan},
      {"survey", survey},
      {"product-check", product_check},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

ExperimentResult run_experiment(const ConfigDoc& doc, unsigned threads) {
  if (!doc.has_section(kExp)) throw ConfigError("[experiment]", "section is required");
  const std::string name = doc.get_string(kExp, "name");
  const Context ctx{doc, load_params(doc), doc.get_uint(kExp, "seed", 0),
                    std::max(1u, threads)};
  for (const auto& [n, fn] : registry()) {
    if (n == name) return fn(ctx);
  }
  std::string known;
  for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError(key_name(kExp, "name"),
                    "unknown experiment '" + name + "'; expected one of " + known);
}

}  // namespace gridlab::cli
