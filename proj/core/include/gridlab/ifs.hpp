#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridlab/error.hpp"
#include "gridlab/group.hpp"
#include "gridlab/rng.hpp"
#include "gridlab/types.hpp"

namespace gridlab {

inline constexpr double kOrthogonalityTolerance = 1e-10;

bool is_orthogonal(const Matrix& o, double tol = kOrthogonalityTolerance);

// x -> rho * O x + w on R^m.
struct VectorSimilarity {
  using Point = Vector;

  double rho = 0.5;
  Matrix o;
  Vector w;

  VectorSimilarity() = default;
  VectorSimilarity(double rho_, Matrix o_, Vector w_);
  // Scalar convenience for m = 1 with O = +1.
  static VectorSimilarity scalar(double rho, double w);

  int dim() const { return static_cast<int>(w.size()); }
  Vector apply(const Vector& x) const { return rho * (o * x) + w; }
  Vector fixed_point() const;
  Vector origin() const { return Vector::Zero(w.size()); }
  double translation_norm() const { return w.norm(); }
};

// A -> rho * O1 A O2 + B on m x n matrices.
struct MatrixSimilarity {
  using Point = Matrix;

  double rho = 0.5;
  Matrix o1;
  Matrix o2;
  Matrix b;

  MatrixSimilarity() = default;
  MatrixSimilarity(double rho_, Matrix o1_, Matrix o2_, Matrix b_);

  int rows() const { return static_cast<int>(b.rows()); }
  int cols() const { return static_cast<int>(b.cols()); }
  Matrix apply(const Matrix& a) const { return rho * (o1 * a * o2) + b; }
  Matrix fixed_point() const;
  Matrix origin() const { return Matrix::Zero(b.rows(), b.cols()); }
  double translation_norm() const { return b.norm(); }
};

inline double point_distance(const Vector& a, const Vector& b) {
  return (a - b).norm();
}
inline double point_distance(const Matrix& a, const Matrix& b) {
  return (a - b).norm();
}

// A finite prefix of an infinite word over the alphabet.
struct CodingWord {
  std::vector<std::uint32_t> letters;

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  std::uint32_t operator[](std::size_t i) const { return letters[i]; }
};

// A weighted alphabet of contracting similarities.
template <class Letter>
class IFSystem {
 public:
  using Point = typename Letter::Point;

  IFSystem(std::vector<Letter> letters, std::vector<double> weights);

  const std::vector<Letter>& letters() const { return letters_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  std::size_t size() const { return letters_.size(); }

  double max_rho() const { return max_rho_; }
  // Radius of a ball about the origin mapped into itself by every letter;
  // it contains the attractor.
  double attractor_radius() const { return radius_; }

  // True when the positive-weight letters share one fixed point, i.e. the
  // Bernoulli measure is a point mass. Pure diagonal walks (all w = 0) are
  // degenerate in this sense and are still valid walk alphabets.
  bool degenerate_support() const;
  // Throws std::invalid_argument naming the problem when the Bernoulli
  // measure is a point mass.
  void require_nondegenerate() const;

  // Smallest word length whose contraction bound is below tol.
  std::size_t word_length(double tol) const;

  // phi_{b_1} o ... o phi_{b_len}(0). Throws WordTooShort when
  // max_rho^len * attractor_radius > tol.
  Point coding_map(const CodingWord& word, double tol) const;

  // Letters drawn i.i.d. by weight.
  CodingWord sample_word(Rng& rng, std::size_t length) const;

  // One draw from the Bernoulli measure, accurate to tol.
  Point sample(Rng& rng, double tol) const;

 private:
  std::vector<Letter> letters_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double max_rho_ = 0.0;
  double radius_ = 0.0;
};

using VectorIFS = IFSystem<VectorSimilarity>;
using MatrixIFS = IFSystem<MatrixSimilarity>;

// Finite-word composition phi_{b_1} o ... o phi_{b_p}(x) without a tolerance
// check; position `first` onwards.
template <class Letter>
typename Letter::Point compose_letters(const std::vector<Letter>& letters,
                                       const CodingWord& word,
                                       const typename Letter::Point& seed,
                                       std::size_t first = 0) {
  typename Letter::Point x = seed;
  for (std::size_t i = word.size(); i > first; --i) {
    x = letters[word[i - 1]].apply(x);
  }
  return x;
}

// g_e = (blockdiag(rho^-1 O^-1, rho^{m/n} I_n), (rho^-1 O^-1 w, 0)).
GroupElement letter_to_group(const VectorSimilarity& e, const FlowParams& params);
// The closed form of g_e^{-1}: (blockdiag(rho O, rho^{-m/n} I_n), (-w, 0)).
GroupElement letter_inverse(const VectorSimilarity& e, const FlowParams& params);

// g_e = [[rho^{-n/(m+n)} O1^-1, -rho^{-n/(m+n)} O1^-1 B], [0, rho^{m/(m+n)} O2]].
GroupElement letter_to_group(const MatrixSimilarity& e, const FlowParams& params);

// A polynomial curve s -> sum_k coeffs[k] s^k in m x n matrices; the pushforward
// of Lebesgue measure on [0,1] is the measure it carries.
class AnalyticCurve {
 public:
  explicit AnalyticCurve(std::vector<Matrix> coeffs);

  static AnalyticCurve constant(Matrix c);
  static AnalyticCurve affine_line(Matrix c, Matrix d);
  // 1 x n curve s -> (s, s^2, ..., s^n).
  static AnalyticCurve veronese(int n);

  int rows() const { return static_cast<int>(coeffs_.front().rows()); }
  int cols() const { return static_cast<int>(coeffs_.front().cols()); }
  const std::vector<Matrix>& coeffs() const { return coeffs_; }
  Matrix at(double s) const;

 private:
  std::vector<Matrix> coeffs_;
};

Matrix sample_type2(const AnalyticCurve& curve, Rng& rng);

// ---------------------------------------------------------------------------

template <class Letter>
IFSystem<Letter>::IFSystem(std::vector<Letter> letters, std::vector<double> weights)
    : letters_(std::move(letters)), weights_(std::move(weights)) {
  if (letters_.empty()) {
    throw std::invalid_argument("ifs: at least one letter is required");
  }
  if (weights_.size() != letters_.size()) {
    throw std::invalid_argument("ifs: weights must have one entry per letter");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("ifs: weights must be nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("ifs: weights must sum to 1, got " +
                                std::to_string(total));
  }
  double log_rate = 0.0;
  double max_translation = 0.0;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    max_rho_ = std::max(max_rho_, letters_[i].rho);
    log_rate += weights_[i] * std::log(letters_[i].rho);
    max_translation = std::max(max_translation, letters_[i].translation_norm());
  }
  if (!(log_rate < 0.0)) {
    throw std::invalid_argument("ifs: not contracting on average");
  }
  cumulative_ = cumulative_weights(weights_);
  radius_ = max_translation / (1.0 - max_rho_);
}

template <class Letter>
bool IFSystem<Letter>::degenerate_support() const {
  const Letter* anchor = nullptr;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    if (anchor == nullptr) {
      anchor = &letters_[i];
      continue;
    }
    if (point_distance(letters_[i].fixed_point(), anchor->fixed_point()) > 1e-12) {
      return false;
    }
  }
  return true;
}

template <class Letter>
void IFSystem<Letter>::require_nondegenerate() const {
  if (degenerate_support()) {
    throw std::invalid_argument(
        "ifs: weights: positive-weight letters share one fixed point, so the "
        "Bernoulli measure is a singleton");
  }
}

template <class Letter>
std::size_t IFSystem<Letter>::word_length(double tol) const {
  if (!(tol > 0.0)) throw std::invalid_argument("ifs: tolerance must be positive");
  if (radius_ <= tol) return 1;
  return static_cast<std::size_t>(
      std::ceil(std::log(tol / radius_) / std::log(max_rho_)));
}

template <class Letter>
typename IFSystem<Letter>::Point IFSystem<Letter>::coding_map(
    const CodingWord& word, double tol) const {
  const double bound =
      std::pow(max_rho_, static_cast<double>(word.size())) * radius_;
  if (bound > tol) {
    throw WordTooShort("coding_map: word of length " +
                       std::to_string(word.size()) + " only guarantees " +
                       std::to_string(bound) + " > tol; need length " +
                       std::to_string(word_length(tol)));
  }
  for (auto l : word.letters) {
    if (l >= letters_.size()) throw std::out_of_range("coding_map: letter index");
  }
  return compose_letters(letters_, word, letters_.front().origin());
}

template <class Letter>
CodingWord IFSystem<Letter>::sample_word(Rng& rng, std::size_t length) const {
  CodingWord word;
  word.letters.resize(length);
  for (auto& l : word.letters) {
    l = static_cast<std::uint32_t>(rng.categorical(cumulative_));
  }
  return word;
}

template <class Letter>
typename IFSystem<Letter>::Point IFSystem<Letter>::sample(Rng& rng,
                                                          double tol) const {
  return coding_map(sample_word(rng, word_length(tol)), tol);
}

}  // namespace gridlab
