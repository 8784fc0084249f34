#pragma once

#include "gridlab/lattice.hpp"
#include "gridlab/types.hpp"

namespace gridlab {

struct FlowParams {
  int m = 1;  // expanding block
  int n = 1;  // contracting block

  FlowParams() = default;
  FlowParams(int m_, int n_);
  int dim() const { return m + n; }
};

// An element (A, v) of SL±(d, R) ⋉ R^d acting by x -> A x + v.
struct GroupElement {
  Matrix mat;
  Vector trans;

  static GroupElement identity(int dim);
  // Checks squareness, matching translation and |det| = 1 within 1e-9.
  static GroupElement checked(Matrix mat, Vector trans);
  // The pure translation [I, v].
  static GroupElement translation(Vector v);

  int dim() const { return static_cast<int>(mat.rows()); }
};

// (A1, v1)(A2, v2) = (A1 A2, A1 v2 + v1).
GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);

GroupElement diag_flow(const FlowParams& params, double t);
// u(A) = [[I_m, A], [0, I_n]] for an m x n matrix A.
GroupElement horo(const Matrix& a);
Matrix block_diag(const Matrix& top, const Matrix& bottom);

// The grid [u(A), (b, 0)]Γ, canonicalized.
AffinePoint make_point(const Matrix& a, const Vector& b);

// g.x without canonicalization; used by walks that renormalize on a cadence.
AffinePoint act_raw(const GroupElement& g, const AffinePoint& x);
AffinePoint act(const GroupElement& g, const AffinePoint& x);

// Multiplies the first m coordinates by e^t and the last n by e^{-mt/n}.
// Equivalent to act_raw(diag_flow(params, t), x) without forming the matrix.
AffinePoint flow_raw(const FlowParams& params, double t, const AffinePoint& x);

}  // namespace gridlab
