#include "gridlab/group.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gridlab/error.hpp"

namespace gridlab {

FlowParams::FlowParams(int m_, int n_) : m(m_), n(n_) {
  if (m < 1 || n < 1) {
    throw std::invalid_argument("flow parameters need m >= 1 and n >= 1");
  }
}

GroupElement GroupElement::identity(int dim) {
  return {Matrix::Identity(dim, dim), Vector::Zero(dim)};
}

GroupElement GroupElement::checked(Matrix mat, Vector trans) {
  if (mat.rows() != mat.cols() || trans.size() != mat.rows()) {
    throw DimensionMismatch("group element needs a square matrix and matching "
                            "translation");
  }
  const double det = mat.determinant();
  if (!std::isfinite(det) || std::abs(std::abs(det) - 1.0) > kDetTolerance) {
    throw NonInvertibleBasis("group element is not in SL±: |det| = " +
                             std::to_string(std::abs(det)));
  }
  return {std::move(mat), std::move(trans)};
}

GroupElement GroupElement::translation(Vector v) {
  const auto d = v.size();
  return {Matrix::Identity(d, d), std::move(v)};
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  if (g.dim() != h.dim()) {
    throw DimensionMismatch("compose: dimensions " + std::to_string(g.dim()) +
                            " and " + std::to_string(h.dim()));
  }
  return {g.mat * h.mat, g.mat * h.trans + g.trans};
}

GroupElement inverse(const GroupElement& g) {
  Eigen::FullPivLU<Matrix> lu(g.mat);
  if (!lu.isInvertible()) {
    throw NonInvertibleBasis("group element matrix is singular");
  }
  Matrix inv = lu.inverse();
  Vector trans = -(inv * g.trans);
  return {std::move(inv), std::move(trans)};
}

GroupElement diag_flow(const FlowParams& params, double t) {
  Vector diag(params.dim());
  diag.head(params.m).setConstant(std::exp(t));
  diag.tail(params.n).setConstant(
      std::exp(-static_cast<double>(params.m) * t / params.n));
  return {diag.asDiagonal(), Vector::Zero(params.dim())};
}

GroupElement horo(const Matrix& a) {
  const auto m = a.rows();
  const auto n = a.cols();
  Matrix u = Matrix::Identity(m + n, m + n);
  u.topRightCorner(m, n) = a;
  return {std::move(u), Vector::Zero(m + n)};
}

Matrix block_diag(const Matrix& top, const Matrix& bottom) {
  const auto d = top.rows() + bottom.rows();
  Matrix out = Matrix::Zero(d, d);
  out.topLeftCorner(top.rows(), top.cols()) = top;
  out.bottomRightCorner(bottom.rows(), bottom.cols()) = bottom;
  return out;
}

AffinePoint make_point(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) {
    throw DimensionMismatch("make_point: b must have m = rows(A) entries");
  }
  const auto m = a.rows();
  const auto n = a.cols();
  Vector shift = Vector::Zero(m + n);
  shift.head(m) = b;
  return canonicalize(
      AffinePoint{LatticeBasis::trusted(horo(a).mat), std::move(shift)});
}

AffinePoint act_raw(const GroupElement& g, const AffinePoint& x) {
  if (g.dim() != x.dim()) {
    throw DimensionMismatch("act: group dimension " + std::to_string(g.dim()) +
                            " vs point dimension " + std::to_string(x.dim()));
  }
  return AffinePoint{LatticeBasis::trusted(g.mat * x.basis.cols()),
                     g.mat * x.shift + g.trans};
}

AffinePoint act(const GroupElement& g, const AffinePoint& x) {
  return canonicalize(act_raw(g, x));
}

AffinePoint flow_raw(const FlowParams& params, double t, const AffinePoint& x) {
  if (params.dim() != x.dim()) {
    throw DimensionMismatch("flow: parameter dimension does not match point");
  }
  const double up = std::exp(t);
  const double down = std::exp(-static_cast<double>(params.m) * t / params.n);
  Matrix cols = x.basis.cols();
  Vector shift = x.shift;
  cols.topRows(params.m) *= up;
  cols.bottomRows(params.n) *= down;
  shift.head(params.m) *= up;
  shift.tail(params.n) *= down;
  return AffinePoint{LatticeBasis::trusted(std::move(cols)), std::move(shift)};
}

}  // namespace gridlab
