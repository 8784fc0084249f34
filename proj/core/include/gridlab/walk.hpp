#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "gridlab/group.hpp"
#include "gridlab/ifs.hpp"
#include "gridlab/lattice.hpp"
#include "gridlab/rng.hpp"

namespace gridlab {

inline constexpr int kDefaultRenormCadence = 16;
inline constexpr double kRenormCondition = 1e8;

// The step distribution of the walk: letters g_e with weights, plus the
// similarities they came from (needed for roof values and closed forms).
struct WalkConfig {
  using Alphabet =
      std::variant<std::vector<VectorSimilarity>, std::vector<MatrixSimilarity>>;

  FlowParams params;
  std::vector<GroupElement> letters;
  std::vector<double> weights;
  std::vector<double> cumulative;
  std::vector<double> rhos;
  Alphabet alphabet;
  int renorm_cadence = kDefaultRenormCadence;
  // Relative rounding noise of order 2^-52 applied entrywise after each step;
  // see dither_point.
  bool dither = true;

  static WalkConfig from_ifs(const VectorIFS& ifs, const FlowParams& params,
                             int renorm_cadence = kDefaultRenormCadence);
  static WalkConfig from_ifs(const MatrixIFS& ifs, const FlowParams& params,
                             int renorm_cadence = kDefaultRenormCadence);

  std::size_t size() const { return letters.size(); }
  // Mean roof sum_e nu(e) * (-log rho_e).
  double mean_roof() const;
};

// tau(b) = -log rho_{b_1}.
double roof(const WalkConfig& cfg, const CodingWord& word);

// t_p(b) = -(log rho_{b_1} + ... + log rho_{b_p}); p terms.
double birkhoff_sum_roof(const WalkConfig& cfg, const CodingWord& word,
                         std::size_t p);

// An infinite word whose letters are a pure function of (seed, index), so any
// shift T^p b is reproducible without storing the prefix.
class LazyWord {
 public:
  LazyWord(std::uint64_t seed, std::vector<double> cumulative,
           std::uint64_t offset = 0);

  std::uint32_t operator[](std::uint64_t i) const;
  LazyWord shifted(std::uint64_t p) const;
  CodingWord prefix(std::size_t length) const;
  std::uint64_t offset() const { return offset_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::shared_ptr<const std::vector<double>> cumulative_;
  std::uint64_t seed_;
  std::uint64_t offset_;
};

// A point (b, k) of the suspension, 0 <= k < tau(b).
struct SuspensionPoint {
  LazyWord word;
  double k = 0.0;
};

SuspensionPoint make_suspension_point(const WalkConfig& cfg, LazyWord word,
                                      double k);

// T_l(b, k) = (T^p b, k + l - t_p(b)) with p maximal such that the new roof
// coordinate is nonnegative. `shifts` receives p when given.
SuspensionPoint suspension_step(const WalkConfig& cfg, const SuspensionPoint& c,
                                double l, std::uint64_t* shifts = nullptr);

struct Trajectory {
  std::vector<AffinePoint> points;
  std::vector<double> times;
};

// points[p] = g_{b_p} points[p-1], canonicalized every renorm_cadence steps
// and whenever the basis condition number passes kRenormCondition (which also
// halves the cadence for the rest of the walk).
Trajectory run_walk(const WalkConfig& cfg, const AffinePoint& x0,
                    const CodingWord& word);

// Multiplies every basis and shift entry by 1 + u 2^-52, u in [-1, 1) a hash
// of (step, entry). Exact letters such as diag(2, 1/2) act on dyadic doubles
// without rounding, so reductions cancel exactly and the pseudo-orbit of a
// generic start locks onto the rational orbit of its double representation.
// The noise has the size of ordinary rounding, keeps exact zeros (so Z^2 stays
// divergent) and is reproducible.
void dither_point(AffinePoint& x, std::uint64_t step);

// Streams the walk without storing it; visit(p, point) is called for
// p = 1..len(word). The point handed to visit may be uncanonicalized.
template <class Visit>
void walk_visit(const WalkConfig& cfg, const AffinePoint& x0,
                const CodingWord& word, Visit&& visit);

struct ProductReport {
  GroupElement product;  // g_{b_p} ... g_{b_1}
  // Vector alphabets: (g_{b_p} ... g_{b_1})^{-1} in closed form,
  // (blockdiag(rho O_{b_1}...O_{b_p}, rho^{-m/n}), (-phi_{b_1}o...o phi_{b_p}(0), 0))
  // with rho the product of the rho's. Matrix alphabets: the product itself
  // as K * diag * u(-phi_{b_1}o...o phi_{b_p}(0)).
  GroupElement closed_form;
  // Entrywise relative deviation of the letter-by-letter inverse chain from
  // the closed form (vector alphabets; 0 for matrix alphabets).
  double closed_form_deviation = 0.0;
  // Entrywise relative deviation of the product from the closed form
  // (inverted analytically for vector alphabets).
  double product_deviation = 0.0;

  double deviation() const { return std::max(closed_form_deviation, product_deviation); }
};

ProductReport walk_product(const WalkConfig& cfg, const CodingWord& word);

// Relative deviation between the two sides of
//   a_{t_j(b)} [I, (eta(b), 0)]  =  R_j [I, (eta(T^j b), 0)] g_{b_j} ... g_{b_1}
// with R_j = blockdiag(O_{b_1} ... O_{b_j}, I_n); eta is evaluated on the
// finite word, for which the identity is exact algebra. Vector alphabets only.
double intertwining_deviation(const WalkConfig& cfg, const CodingWord& word,
                              std::size_t j);

// ---------------------------------------------------------------------------

template <class Visit>
void walk_visit(const WalkConfig& cfg, const AffinePoint& x0,
                const CodingWord& word, Visit&& visit) {
  AffinePoint x = x0;
  int cadence = std::max(1, cfg.renorm_cadence);
  int since = 0;
  for (std::size_t p = 0; p < word.size(); ++p) {
    x = act_raw(cfg.letters[word[p]], x);
    if (cfg.dither) dither_point(x, p);
    ++since;
    if (since >= cadence) {
      x = canonicalize(x);
      since = 0;
    } else if (scaled_condition_number(x.basis.cols()) > kRenormCondition) {
      x = canonicalize(x);
      since = 0;
      cadence = std::max(1, cadence / 2);
    }
    visit(p + 1, static_cast<const AffinePoint&>(x));
  }
}

}  // namespace gridlab
