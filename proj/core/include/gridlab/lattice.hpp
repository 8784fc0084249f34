#pragma once

#include <cstdint>

#include "gridlab/types.hpp"

namespace gridlab {

inline constexpr double kDetTolerance = 1e-9;
inline constexpr double kMaxCondition = 1e12;
inline constexpr double kLllDelta = 0.99;
inline constexpr std::uint64_t kDefaultNodeBudget = std::uint64_t{1} << 24;

// A unimodular lattice basis; columns are the basis vectors.
class LatticeBasis {
 public:
  // Validates squareness, finiteness and |det| = 1 within kDetTolerance.
  static LatticeBasis from_columns(Matrix cols);
  // Skips the determinant check. Used on the hot paths of flows and walks,
  // where the input is the image of a validated basis.
  static LatticeBasis trusted(Matrix cols) { return LatticeBasis(std::move(cols)); }
  static LatticeBasis identity(int dim) {
    return LatticeBasis(Matrix::Identity(dim, dim));
  }

  int dim() const { return static_cast<int>(cols_.cols()); }
  const Matrix& cols() const { return cols_; }
  double det() const { return cols_.determinant(); }

 private:
  explicit LatticeBasis(Matrix cols) : cols_(std::move(cols)) {}
  Matrix cols_;
};

// A grid basis * Z^dim + shift.
struct AffinePoint {
  LatticeBasis basis;
  Vector shift;

  int dim() const { return basis.dim(); }
};

struct ShortVectorResult {
  Vector vector;
  double norm = 0.0;
  IntVector coeffs;  // relative to the basis passed in
};

// LLL output: reduced = input * transform, transform unimodular.
struct Reduction {
  Matrix basis;
  IntMatrix transform;
};

// Ratio of extreme singular values.
double condition_number(const Matrix& cols);
// Condition number after scaling every column to unit length. Insensitive to
// how deep in the cusp the lattice sits; large only for skewed bases. This is
// the quantity compared against kMaxCondition.
double scaled_condition_number(const Matrix& cols);

Reduction lll_reduce(const Matrix& cols, double delta = kLllDelta);
LatticeBasis reduce_basis(const LatticeBasis& basis);

ShortVectorResult shortest_vector(const LatticeBasis& basis,
                                  std::uint64_t node_budget = kDefaultNodeBudget);
ShortVectorResult shortest_affine_vector(
    const AffinePoint& point, std::uint64_t node_budget = kDefaultNodeBudget);

AffinePoint canonicalize(const AffinePoint& point);

// True when basis^{-1} * shift is integral within `tol`.
bool shift_in_lattice(const AffinePoint& point, double tol = 1e-9);

// Number of lattice points y = basis*z + shift with |y| <= radius. The
// innermost enumeration level is counted in closed form, so a thin lattice
// deep in the cusp costs O(#outer nodes), not O(count).
struct PointCount {
  std::uint64_t count = 0;
  bool capped = false;  // node budget exhausted or count above 2^53
};
PointCount count_points(const Matrix& reduced_cols, const Vector& shift,
                        double radius, bool exclude_origin,
                        std::uint64_t node_budget = kDefaultNodeBudget);

}  // namespace gridlab
