#include "gridlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gridlab/error.hpp"

namespace gridlab {

namespace {

constexpr double kSizeReduceSlack = 1e-9;
constexpr double kTieTolerance = 2e-9;  // relative, on squared norms
constexpr int kMaxLllIterations = 1'000'000;

// cols = Q * R with R upper triangular and positive diagonal.
struct Triangular {
  Matrix q;
  Matrix r;
};

Triangular triangularize(const Matrix& cols) {
  Eigen::HouseholderQR<Matrix> qr(cols);
  Triangular t;
  t.q = qr.householderQ();
  t.r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < t.r.rows(); ++i) {
    if (t.r(i, i) < 0.0) {
      t.r.row(i) *= -1.0;
      t.q.col(i) *= -1.0;
    }
  }
  return t;
}

void check_square(const Matrix& cols) {
  if (cols.rows() != cols.cols() || cols.rows() == 0) {
    throw DimensionMismatch("lattice basis must be a nonempty square matrix, got " +
                            std::to_string(cols.rows()) + "x" +
                            std::to_string(cols.cols()));
  }
}

void check_conditioning(const Matrix& cols) {
  const double cond = scaled_condition_number(cols);
  if (!std::isfinite(cond) || cond > kMaxCondition) {
    throw NonInvertibleBasis("basis condition number " + std::to_string(cond) +
                             " exceeds 1e12; renormalize more often");
  }
}

// Depth-first Fincke-Pohst enumeration of y = R z + c with |y|^2 <= bound2.
// The leaf callback may shrink the bound. Levels run from dim-1 down to 0.
class Enumerator {
 public:
  Enumerator(const Matrix& r, const Vector& c, double bound2,
             std::uint64_t budget)
      : r_(r), c_(c), bound2_(bound2), budget_(budget),
        z_(static_cast<std::size_t>(r.rows()), 0) {}

  template <class Leaf>
  void run(Leaf&& leaf) {
    descend(static_cast<int>(r_.rows()) - 1, 0.0, leaf);
  }

  double& bound2() { return bound2_; }
  bool exhausted() const { return nodes_ > budget_; }
  const std::vector<std::int64_t>& z() const { return z_; }

  // c_i + sum_{j>i} R_ij z_j for the current partial assignment.
  double level_offset(int level) const {
    double s = c_(level);
    for (Eigen::Index j = level + 1; j < r_.cols(); ++j) {
      s += r_(level, j) * static_cast<double>(z_[static_cast<std::size_t>(j)]);
    }
    return s;
  }

  template <class Leaf>
  void descend(int level, double partial, Leaf& leaf) {
    if (exhausted()) return;
    const double rii = r_(level, level);
    const double offset = level_offset(level);
    const double center = -offset / rii;
    const double rem = bound2_ - partial;
    if (rem < 0.0) return;
    const double half = std::sqrt(rem) / rii;
    const double lo = std::ceil(center - half);
    const double hi = std::floor(center + half);
    if (hi < lo) return;
    if constexpr (requires { leaf.count_level(0, 0.0, 0.0, 0.0); }) {
      if (level == 0) {
        leaf.count_level(lo, hi, center, partial);
        ++nodes_;
        return;
      }
    }
    // Visit values in order of increasing distance from the center so the
    // bound shrinks early.
    const double start = std::round(center);
    for (std::int64_t step = 0;; ++step) {
      const double up = start + static_cast<double>(step);
      const double down = start - static_cast<double>(step);
      if (up > hi && down < lo) break;
      for (int side = 0; side < (step == 0 ? 1 : 2); ++side) {
        const double value = side == 0 ? up : down;
        if (value < lo || value > hi) continue;
        const double diff = rii * value + offset;
        const double dist2 = partial + diff * diff;
        if (dist2 > bound2_) continue;
        if (++nodes_ > budget_) return;
        z_[static_cast<std::size_t>(level)] = static_cast<std::int64_t>(value);
        if (level == 0) {
          leaf(z_, dist2);
        } else {
          descend(level - 1, dist2, leaf);
        }
        if (exhausted()) return;
      }
    }
    z_[static_cast<std::size_t>(level)] = 0;
  }

 private:
  const Matrix& r_;
  const Vector& c_;
  double bound2_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<std::int64_t> z_;
};

struct Candidate {
  IntVector z;
  double dist2;
};

IntVector to_int_vector(const std::vector<std::int64_t>& z) {
  IntVector out(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = z[i];
  }
  return out;
}

Vector to_real(const IntVector& z) { return z.cast<double>(); }

// True when a is lexicographically larger than b beyond a relative tolerance.
bool lex_greater(const Vector& a, const Vector& b, double tol) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) > b(i) + tol) return true;
    if (a(i) < b(i) - tol) return false;
  }
  return false;
}

bool first_nonzero_positive(const Vector& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > tol) return true;
    if (v(i) < -tol) return false;
  }
  return false;
}

// Among near-minimal candidates, pick the lexicographically largest vector
// (optionally restricted to vectors whose first nonzero coordinate is
// positive, which fixes the sign of a lattice vector pair).
ShortVectorResult pick_tie(const std::vector<Candidate>& candidates,
                           double best2, const Matrix& reduced,
                           const Vector& offset, const IntMatrix& transform,
                           const IntVector& z_shift, bool sign_normalize) {
  const double limit = best2 * (1.0 + kTieTolerance) + 1e-300;
  ShortVectorResult out;
  bool have = false;
  for (const auto& cand : candidates) {
    if (cand.dist2 > limit) continue;
    Vector v = reduced * to_real(cand.z) + offset;
    const double tol = 1e-9 * std::max(1e-300, v.norm());
    if (sign_normalize && !first_nonzero_positive(v, tol)) continue;
    if (!have || lex_greater(v, out.vector, tol)) {
      out.vector = std::move(v);
      out.coeffs = transform * (cand.z + z_shift);
      have = true;
    }
  }
  if (!have) {
    throw NonInvertibleBasis("enumeration produced no candidate");
  }
  out.norm = out.vector.norm();
  return out;
}

}  // namespace

LatticeBasis LatticeBasis::from_columns(Matrix cols) {
  check_square(cols);
  if (!cols.allFinite()) {
    throw NonInvertibleBasis("basis has non-finite entries");
  }
  const double det = cols.determinant();
  if (std::abs(std::abs(det) - 1.0) > kDetTolerance) {
    throw NonInvertibleBasis("basis is not unimodular: |det| = " +
                             std::to_string(std::abs(det)));
  }
  return LatticeBasis(std::move(cols));
}

double condition_number(const Matrix& cols) {
  if (!cols.allFinite()) return std::numeric_limits<double>::infinity();
  if (cols.rows() == 1) return 1.0;
  if (cols.rows() == 2 && cols.cols() == 2) {
    const double det = std::abs(cols(0, 0) * cols(1, 1) - cols(0, 1) * cols(1, 0));
    if (det == 0.0) return std::numeric_limits<double>::infinity();
    const double fro2 = cols.squaredNorm();
    const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
    const double smax2 = 0.5 * (fro2 + disc);
    // smin^2 = det^2 / smax^2 avoids cancellation.
    const double smin2 = det * det / smax2;
    return std::sqrt(smax2 / smin2);
  }
  Eigen::JacobiSVD<Matrix> svd(cols);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double scaled_condition_number(const Matrix& cols) {
  if (!cols.allFinite()) return std::numeric_limits<double>::infinity();
  Matrix scaled = cols;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double norm = scaled.col(j).norm();
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    scaled.col(j) /= norm;
  }
  return condition_number(scaled);
}

Reduction lll_reduce(const Matrix& cols, double delta) {
  check_square(cols);
  const Eigen::Index d = cols.cols();
  Reduction red{cols, IntMatrix::Identity(d, d)};
  Matrix& b = red.basis;
  IntMatrix& u = red.transform;

  Matrix bstar(cols.rows(), d);
  Vector norm2(d);
  Matrix mu = Matrix::Zero(d, d);

  auto orthogonalize_from = [&](Eigen::Index from) {
    for (Eigen::Index i = from; i < d; ++i) {
      bstar.col(i) = b.col(i);
      for (Eigen::Index j = 0; j < i; ++j) {
        mu(i, j) = b.col(i).dot(bstar.col(j)) / norm2(j);
        bstar.col(i) -= mu(i, j) * bstar.col(j);
      }
      norm2(i) = bstar.col(i).squaredNorm();
      if (!(norm2(i) > 0.0)) {
        throw NonInvertibleBasis("basis vectors are linearly dependent");
      }
    }
  };
  auto refresh_row = [&](Eigen::Index k) {
    for (Eigen::Index j = 0; j < k; ++j) {
      mu(k, j) = b.col(k).dot(bstar.col(j)) / norm2(j);
    }
  };

  orthogonalize_from(0);
  Eigen::Index k = 1;
  int iterations = 0;
  while (k < d) {
    if (++iterations > kMaxLllIterations) {
      throw NonInvertibleBasis("LLL did not converge");
    }
    for (int pass = 0; pass < 4; ++pass) {
      bool changed = false;
      for (Eigen::Index j = k - 1; j >= 0; --j) {
        if (std::abs(mu(k, j)) <= 0.5 + kSizeReduceSlack) continue;
        const double r = std::round(mu(k, j));
        if (std::abs(r) > 9.0e15) {
          throw NonInvertibleBasis("size reduction coefficient overflow");
        }
        const auto ri = static_cast<std::int64_t>(r);
        b.col(k) -= r * b.col(j);
        u.col(k) -= ri * u.col(j);
        for (Eigen::Index i = 0; i < j; ++i) mu(k, i) -= r * mu(j, i);
        mu(k, j) -= r;
        changed = true;
      }
      if (!changed) break;
      refresh_row(k);
    }
    const double lhs = norm2(k);
    const double rhs = (delta - mu(k, k - 1) * mu(k, k - 1)) * norm2(k - 1);
    if (lhs >= rhs) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      u.col(k).swap(u.col(k - 1));
      orthogonalize_from(k - 1);
      k = std::max<Eigen::Index>(k - 1, 1);
    }
  }
  return red;
}

LatticeBasis reduce_basis(const LatticeBasis& basis) {
  check_conditioning(basis.cols());
  return LatticeBasis::trusted(lll_reduce(basis.cols()).basis);
}

ShortVectorResult shortest_vector(const LatticeBasis& basis,
                                  std::uint64_t node_budget) {
  check_conditioning(basis.cols());
  const Reduction red = lll_reduce(basis.cols());
  const Triangular tri = triangularize(red.basis);
  const Eigen::Index d = red.basis.cols();
  const Vector zero = Vector::Zero(d);

  double best2 = red.basis.colwise().squaredNorm().minCoeff();
  Enumerator en(tri.r, zero, best2 * (1.0 + kTieTolerance), node_budget);
  std::vector<Candidate> candidates;
  en.run([&](const std::vector<std::int64_t>& z, double dist2) {
    if (std::all_of(z.begin(), z.end(), [](std::int64_t v) { return v == 0; })) {
      return;
    }
    if (dist2 < best2) best2 = dist2;
    en.bound2() = best2 * (1.0 + kTieTolerance);
    candidates.push_back({to_int_vector(z), dist2});
  });
  if (en.exhausted()) {
    throw EnumerationBudgetExceeded("shortest_vector exceeded node budget of " +
                                    std::to_string(node_budget));
  }
  return pick_tie(candidates, best2, red.basis, zero, red.transform,
                  IntVector::Zero(d), /*sign_normalize=*/true);
}

ShortVectorResult shortest_affine_vector(const AffinePoint& point,
                                         std::uint64_t node_budget) {
  check_conditioning(point.basis.cols());
  if (point.shift.size() != point.dim()) {
    throw DimensionMismatch("shift length does not match basis dimension");
  }
  const Reduction red = lll_reduce(point.basis.cols());
  const Eigen::Index d = red.basis.cols();

  // Bring the shift near the origin: shift = B*k + residual.
  const Vector coords = red.basis.partialPivLu().solve(point.shift);
  IntVector k(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    k(i) = static_cast<std::int64_t>(std::round(coords(i)));
  }
  const Vector residual = point.shift - red.basis * to_real(k);

  const Triangular tri = triangularize(red.basis);
  const Vector c = tri.q.transpose() * residual;
  // Babai's nearest plane always lands within this radius.
  double best2 = 0.25 * tri.r.diagonal().squaredNorm() * (1.0 + 1e-9) + 1e-300;
  best2 = std::min(best2, residual.squaredNorm());
  Enumerator en(tri.r, c, best2 * (1.0 + kTieTolerance) + 1e-300, node_budget);
  std::vector<Candidate> candidates;
  en.run([&](const std::vector<std::int64_t>& z, double dist2) {
    if (dist2 < best2) best2 = dist2;
    en.bound2() = best2 * (1.0 + kTieTolerance) + 1e-300;
    candidates.push_back({to_int_vector(z), dist2});
  });
  if (en.exhausted()) {
    throw EnumerationBudgetExceeded(
        "shortest_affine_vector exceeded node budget of " +
        std::to_string(node_budget));
  }
  return pick_tie(candidates, best2, red.basis, residual, red.transform, k,
                  /*sign_normalize=*/false);
}

AffinePoint canonicalize(const AffinePoint& point) {
  if (point.shift.size() != point.dim()) {
    throw DimensionMismatch("shift length does not match basis dimension");
  }
  LatticeBasis reduced = reduce_basis(point.basis);
  const Vector coords = reduced.cols().partialPivLu().solve(point.shift);
  Vector frac(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    const double c = coords(i);
    const double nearest = std::round(c);
    frac(i) = std::abs(c - nearest) < 1e-12 ? 0.0 : c - std::floor(c);
  }
  Vector shift = reduced.cols() * frac;
  return AffinePoint{std::move(reduced), std::move(shift)};
}

bool shift_in_lattice(const AffinePoint& point, double tol) {
  const Vector coords = point.basis.cols().partialPivLu().solve(point.shift);
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    if (std::abs(coords(i) - std::round(coords(i))) > tol) return false;
  }
  return true;
}

PointCount count_points(const Matrix& reduced_cols, const Vector& shift,
                        double radius, bool exclude_origin,
                        std::uint64_t node_budget) {
  const Eigen::Index d = reduced_cols.cols();
  const Vector coords = reduced_cols.partialPivLu().solve(shift);
  IntVector k(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    k(i) = static_cast<std::int64_t>(std::round(coords(i)));
  }
  const Vector residual = shift - reduced_cols * to_real(k);
  const Triangular tri = triangularize(reduced_cols);
  const Vector c = tri.q.transpose() * residual;
  const bool homogeneous = residual.squaredNorm() == 0.0 && exclude_origin;

  constexpr double kExactLimit = 9007199254740992.0;  // 2^53
  PointCount out;
  double total = 0.0;
  const double bound2 = radius * radius * (1.0 + 1e-12);

  struct Counter {
    Enumerator* en;
    double* total;
    bool homogeneous;
    void operator()(const std::vector<std::int64_t>&, double) { *total += 1.0; }
    void count_level(double lo, double hi, double, double) {
      double n = hi - lo + 1.0;
      if (homogeneous && lo <= 0.0 && hi >= 0.0) {
        const auto& z = en->z();
        const bool upper_zero = std::all_of(
            z.begin() + 1, z.end(), [](std::int64_t v) { return v == 0; });
        if (upper_zero) n -= 1.0;
      }
      *total += n;
    }
  };
  Enumerator en(tri.r, c, bound2, node_budget);
  Counter counter{&en, &total, homogeneous};
  en.run(counter);
  out.capped = en.exhausted() || total > kExactLimit;
  out.count = static_cast<std::uint64_t>(std::min(total, kExactLimit));
  return out;
}

}  // namespace gridlab
