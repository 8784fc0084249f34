#pragma once

// Hand-rolled generators and brute-force oracles shared by the test suites.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <gridlab/lattice.hpp>
#include <gridlab/rng.hpp>
#include <gridlab/types.hpp>

namespace testsupport {

using gridlab::IntMatrix;
using gridlab::Matrix;
using gridlab::Rng;
using gridlab::Vector;

inline Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  Matrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = rng.normal();
  return out;
}

// Product of `steps` elementary column operations with multipliers in [-k, k],
// occasionally a column swap or sign flip.
inline IntMatrix random_unimodular(int d, Rng& rng, int steps = 6, int k = 2) {
  IntMatrix u = IntMatrix::Identity(d, d);
  if (d == 1) {
    if (rng.uniform() < 0.5) u(0, 0) = -1;
    return u;
  }
  for (int s = 0; s < steps; ++s) {
    const int i = static_cast<int>(rng() % d);
    int j = static_cast<int>(rng() % (d - 1));
    if (j >= i) ++j;
    const double r = rng.uniform();
    if (r < 0.1) {
      u.col(i).swap(u.col(j));
    } else if (r < 0.2) {
      u.col(i) = -u.col(i);
    } else {
      std::int64_t c = static_cast<std::int64_t>(rng() % (2 * k + 1)) - k;
      if (c == 0) c = 1;
      u.col(i) += c * u.col(j);
    }
  }
  return u;
}

// A unimodular real basis: Gaussian columns scaled to |det| = 1, skewed by a
// random integer unimodular matrix.
inline Matrix random_basis(int d, Rng& rng, int steps = 6) {
  Matrix g;
  double det = 0.0;
  do {
    g = gaussian_matrix(d, d, rng);
    det = g.determinant();
  } while (std::abs(det) < 0.05);
  g /= std::pow(std::abs(det), 1.0 / d);
  return g * random_unimodular(d, rng, steps).cast<double>();
}

inline Vector random_vector(int d, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

// Calls visit(z) for every integer z with lo <= z <= hi. Returns false without
// visiting if the box holds more than `limit` points.
inline bool for_each_in_box(const std::vector<std::int64_t>& lo,
                            const std::vector<std::int64_t>& hi,
                            const std::function<void(const std::vector<std::int64_t>&)>& visit,
                            double limit = 4e6) {
  double size = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) size *= static_cast<double>(hi[i] - lo[i] + 1);
  if (size > limit) return false;
  std::vector<std::int64_t> z = lo;
  for (;;) {
    visit(z);
    std::size_t i = 0;
    for (; i < z.size(); ++i) {
      if (z[i] < hi[i]) {
        ++z[i];
        break;
      }
      z[i] = lo[i];
    }
    if (i == z.size()) return true;
  }
}

inline Vector grid_vector(const Matrix& cols, const Vector& shift,
                          const std::vector<std::int64_t>& z) {
  Vector v = shift;
  for (std::size_t i = 0; i < z.size(); ++i) v += static_cast<double>(z[i]) * cols.col(i);
  return v;
}

// Coefficient box containing every z with |cols z + shift| <= radius:
// z = cols^{-1}(y - shift), so |z_i + (cols^{-1} shift)_i| <= |row_i| radius.
inline void coefficient_box(const Matrix& cols, const Vector& shift, double radius,
                            std::vector<std::int64_t>& lo,
                            std::vector<std::int64_t>& hi) {
  const Matrix inv = cols.inverse();
  const Vector center = -(inv * shift);
  const int d = static_cast<int>(cols.cols());
  lo.assign(d, 0);
  hi.assign(d, 0);
  for (int i = 0; i < d; ++i) {
    const double r = inv.row(i).norm() * radius * (1 + 1e-9) + 1e-9;
    lo[i] = static_cast<std::int64_t>(std::ceil(center(i) - r));
    hi[i] = static_cast<std::int64_t>(std::floor(center(i) + r));
  }
}

// Exhaustive shortest nonzero lattice vector norm; nullopt if the box is too big.
inline std::optional<double> brute_shortest(const Matrix& cols) {
  const int d = static_cast<int>(cols.cols());
  double radius = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d; ++j) radius = std::min(radius, cols.col(j).norm());
  std::vector<std::int64_t> lo, hi;
  coefficient_box(cols, Vector::Zero(d), radius, lo, hi);
  double best = radius;
  const bool ok = for_each_in_box(lo, hi, [&](const std::vector<std::int64_t>& z) {
    bool zero = true;
    for (auto c : z) zero = zero && c == 0;
    if (zero) return;
    best = std::min(best, grid_vector(cols, Vector::Zero(d), z).norm());
  });
  if (!ok) return std::nullopt;
  return best;
}

// Exhaustive minimal norm of cols z + shift.
inline std::optional<double> brute_closest(const Matrix& cols, const Vector& shift) {
  const int d = static_cast<int>(cols.cols());
  // Any grid point bounds the answer; take the rounded one.
  const Vector c = cols.inverse() * shift;
  std::vector<std::int64_t> z0(d);
  for (int i = 0; i < d; ++i) z0[i] = -static_cast<std::int64_t>(std::llround(c(i)));
  const double radius = grid_vector(cols, shift, z0).norm();
  std::vector<std::int64_t> lo, hi;
  coefficient_box(cols, shift, radius, lo, hi);
  double best = radius;
  const bool ok = for_each_in_box(lo, hi, [&](const std::vector<std::int64_t>& z) {
    best = std::min(best, grid_vector(cols, shift, z).norm());
  });
  if (!ok) return std::nullopt;
  return best;
}

// Exhaustive count of grid points with norm <= radius.
inline std::optional<std::uint64_t> brute_count(const Matrix& cols, const Vector& shift,
                                                double radius, bool exclude_origin) {
  std::vector<std::int64_t> lo, hi;
  coefficient_box(cols, shift, radius, lo, hi);
  std::uint64_t count = 0;
  const bool ok = for_each_in_box(lo, hi, [&](const std::vector<std::int64_t>& z) {
    const Vector v = grid_vector(cols, shift, z);
    if (exclude_origin && v.norm() == 0.0) return;
    if (v.norm() <= radius) ++count;
  });
  if (!ok) return std::nullopt;
  return count;
}

// Fundamental-cell coordinates of shift with respect to cols, each in [0, 1).
inline bool in_fundamental_cell(const Matrix& cols, const Vector& shift, double tol = 1e-9) {
  const Vector c = cols.fullPivLu().solve(shift);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) < -tol || c(i) >= 1.0 + tol) return false;
  }
  return true;
}

}  // namespace testsupport
