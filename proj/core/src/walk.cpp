#include "gridlab/walk.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gridlab/error.hpp"
#include "gridlab/rng.hpp"

namespace gridlab {

namespace {

template <class Letter>
WalkConfig build_config(const IFSystem<Letter>& ifs, const FlowParams& params,
                        int cadence) {
  if (cadence < 1) {
    throw std::invalid_argument("walk: renorm_cadence must be positive");
  }
  WalkConfig cfg;
  cfg.params = params;
  cfg.weights = ifs.weights();
  cfg.cumulative = ifs.cumulative();
  cfg.renorm_cadence = cadence;
  for (const auto& e : ifs.letters()) {
    GroupElement g = letter_to_group(e, params);
    const double det = g.mat.determinant();
    if (std::abs(std::abs(det) - 1.0) > kDetTolerance) {
      throw NonInvertibleBasis("walk: letter has |det| = " +
                               std::to_string(std::abs(det)));
    }
    cfg.letters.push_back(std::move(g));
    cfg.rhos.push_back(e.rho);
  }
  cfg.alphabet = ifs.letters();
  return cfg;
}

void check_word(const WalkConfig& cfg, const CodingWord& word) {
  for (auto l : word.letters) {
    if (l >= cfg.size()) throw std::out_of_range("walk: letter index out of range");
  }
}

Vector pad(const Vector& head, int dim) {
  Vector out = Vector::Zero(dim);
  out.head(head.size()) = head;
  return out;
}

}  // namespace

WalkConfig WalkConfig::from_ifs(const VectorIFS& ifs, const FlowParams& params,
                                int renorm_cadence) {
  return build_config(ifs, params, renorm_cadence);
}

WalkConfig WalkConfig::from_ifs(const MatrixIFS& ifs, const FlowParams& params,
                                int renorm_cadence) {
  return build_config(ifs, params, renorm_cadence);
}

double WalkConfig::mean_roof() const {
  double mean = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i) mean -= weights[i] * std::log(rhos[i]);
  return mean;
}

double roof(const WalkConfig& cfg, const CodingWord& word) {
  if (word.empty()) throw std::invalid_argument("roof: word is empty");
  check_word(cfg, word);
  return -std::log(cfg.rhos[word[0]]);
}

double birkhoff_sum_roof(const WalkConfig& cfg, const CodingWord& word,
                         std::size_t p) {
  if (word.size() < p) {
    throw std::invalid_argument("birkhoff_sum_roof: word shorter than p");
  }
  check_word(cfg, word);
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) total -= std::log(cfg.rhos[word[i]]);
  return total;
}

LazyWord::LazyWord(std::uint64_t seed, std::vector<double> cumulative,
                   std::uint64_t offset)
    : cumulative_(std::make_shared<const std::vector<double>>(std::move(cumulative))),
      seed_(seed),
      offset_(offset) {
  if (cumulative_->empty()) throw std::invalid_argument("lazy word: empty alphabet");
}

std::uint32_t LazyWord::operator[](std::uint64_t i) const {
  const double u = unit_interval(derive_seed(seed_, offset_ + i));
  return static_cast<std::uint32_t>(pick_from_cumulative(*cumulative_, u));
}

LazyWord LazyWord::shifted(std::uint64_t p) const {
  LazyWord out = *this;
  out.offset_ += p;
  return out;
}

CodingWord LazyWord::prefix(std::size_t length) const {
  CodingWord word;
  word.letters.resize(length);
  for (std::size_t i = 0; i < length; ++i) word.letters[i] = (*this)[i];
  return word;
}

SuspensionPoint make_suspension_point(const WalkConfig& cfg, LazyWord word,
                                      double k) {
  const double tau = -std::log(cfg.rhos.at(word[0]));
  if (!(k >= 0.0 && k < tau)) {
    throw std::invalid_argument("suspension point needs 0 <= k < tau(b)");
  }
  return SuspensionPoint{std::move(word), k};
}

SuspensionPoint suspension_step(const WalkConfig& cfg, const SuspensionPoint& c,
                                double l, std::uint64_t* shifts) {
  if (!(l >= 0.0)) throw std::invalid_argument("suspension_step: l must be >= 0");
  double rem = c.k + l;
  std::uint64_t p = 0;
  for (;;) {
    const double tau = -std::log(cfg.rhos[c.word[p]]);
    if (rem - tau < 0.0) break;
    rem -= tau;
    ++p;
  }
  if (shifts != nullptr) *shifts = p;
  return SuspensionPoint{c.word.shifted(p), rem};
}

void dither_point(AffinePoint& x, std::uint64_t step) {
  Matrix cols = x.basis.cols();
  const Eigen::Index d = cols.rows();
  auto jitter = [&](Eigen::Index entry) {
    const double u = 2.0 * unit_interval(derive_seed(step, static_cast<std::uint64_t>(entry))) - 1.0;
    return 1.0 + u * 0x1.0p-52;
  };
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) cols(i, j) *= jitter(j * d + i);
  }
  for (Eigen::Index i = 0; i < d; ++i) x.shift(i) *= jitter(d * d + i);
  x.basis = LatticeBasis::trusted(std::move(cols));
}

Trajectory run_walk(const WalkConfig& cfg, const AffinePoint& x0,
                    const CodingWord& word) {
  check_word(cfg, word);
  Trajectory traj;
  traj.points.reserve(word.size() + 1);
  traj.times.reserve(word.size() + 1);
  traj.points.push_back(x0);
  traj.times.push_back(0.0);
  walk_visit(cfg, x0, word, [&](std::size_t p, const AffinePoint& x) {
    traj.points.push_back(x);
    traj.times.push_back(static_cast<double>(p));
  });
  return traj;
}

ProductReport walk_product(const WalkConfig& cfg, const CodingWord& word) {
  check_word(cfg, word);
  const FlowParams& fp = cfg.params;
  const int d = fp.dim();

  ProductReport report;
  report.product = GroupElement::identity(d);
  for (std::size_t i = 0; i < word.size(); ++i) {
    report.product = compose(cfg.letters[word[i]], report.product);
  }

  double rho = 1.0;
  for (auto l : word.letters) rho *= cfg.rhos[l];

  if (const auto* letters = std::get_if<std::vector<VectorSimilarity>>(&cfg.alphabet)) {
    Matrix rot = Matrix::Identity(fp.m, fp.m);
    GroupElement chain = GroupElement::identity(d);
    for (auto l : word.letters) {
      rot = rot * (*letters)[l].o;
      chain = compose(chain, letter_inverse((*letters)[l], fp));
    }
    const Vector psi = compose_letters(*letters, word, Vector::Zero(fp.m).eval());
    const Matrix bottom =
        Matrix::Identity(fp.n, fp.n) * std::pow(rho, -static_cast<double>(fp.m) / fp.n);
    report.closed_form = {block_diag(rho * rot, bottom), pad(-psi, d)};

    // Analytic inverse of the closed form.
    const Matrix top_inv = rot.transpose() / rho;
    const Matrix bottom_inv =
        Matrix::Identity(fp.n, fp.n) * std::pow(rho, static_cast<double>(fp.m) / fp.n);
    const GroupElement product_closed{block_diag(top_inv, bottom_inv),
                                      pad(top_inv * psi, d)};

    report.closed_form_deviation =
        std::max(relative_deviation(chain.mat, report.closed_form.mat),
                 relative_deviation(chain.trans, report.closed_form.trans));
    report.product_deviation =
        std::max(relative_deviation(report.product.mat, product_closed.mat),
                 relative_deviation(report.product.trans, product_closed.trans));
    return report;
  }

  const auto& letters = std::get<std::vector<MatrixSimilarity>>(cfg.alphabet);
  Matrix rot1 = Matrix::Identity(fp.m, fp.m);
  Matrix rot2 = Matrix::Identity(fp.n, fp.n);
  for (auto l : word.letters) {
    rot1 = letters[l].o1.transpose() * rot1;
    rot2 = letters[l].o2 * rot2;
  }
  const Matrix psi = compose_letters(letters, word, Matrix::Zero(fp.m, fp.n).eval());
  const double dd = d;
  const Matrix scale = block_diag(
      Matrix::Identity(fp.m, fp.m) * std::pow(rho, -fp.n / dd),
      Matrix::Identity(fp.n, fp.n) * std::pow(rho, fp.m / dd));
  report.closed_form = {block_diag(rot1, rot2) * scale * horo(-psi).mat,
                        Vector::Zero(d)};
  report.product_deviation =
      std::max(relative_deviation(report.product.mat, report.closed_form.mat),
               relative_deviation(report.product.trans, report.closed_form.trans));
  return report;
}

double intertwining_deviation(const WalkConfig& cfg, const CodingWord& word,
                              std::size_t j) {
  const auto* letters = std::get_if<std::vector<VectorSimilarity>>(&cfg.alphabet);
  if (letters == nullptr) {
    throw std::invalid_argument("intertwining identity needs a vector alphabet");
  }
  if (j > word.size()) throw std::invalid_argument("intertwining: j > word length");
  check_word(cfg, word);
  const FlowParams& fp = cfg.params;
  const int d = fp.dim();
  const Vector zero = Vector::Zero(fp.m);

  const Vector eta = compose_letters(*letters, word, zero);
  const Vector eta_tail = compose_letters(*letters, word, zero, j);

  CodingWord head;
  head.letters.assign(word.letters.begin(),
                      word.letters.begin() + static_cast<std::ptrdiff_t>(j));
  const double t = birkhoff_sum_roof(cfg, head, j);

  Matrix rot = Matrix::Identity(fp.m, fp.m);
  GroupElement walk = GroupElement::identity(d);
  for (auto l : head.letters) {
    rot = rot * (*letters)[l].o;
    walk = compose(cfg.letters[l], walk);
  }
  const GroupElement lhs =
      compose(diag_flow(fp, t), GroupElement::translation(pad(eta, d)));
  const GroupElement rotation{block_diag(rot, Matrix::Identity(fp.n, fp.n)),
                              Vector::Zero(d)};
  const GroupElement rhs = compose(
      rotation, compose(GroupElement::translation(pad(eta_tail, d)), walk));
  return std::max(relative_deviation(rhs.mat, lhs.mat),
                  relative_deviation(rhs.trans, lhs.trans));
}

}  // namespace gridlab
