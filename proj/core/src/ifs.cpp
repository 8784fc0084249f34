#include "gridlab/ifs.hpp"

#include <cmath>
#include <stdexcept>

namespace gridlab {

bool is_orthogonal(const Matrix& o, double tol) {
  if (o.rows() != o.cols()) return false;
  return ((o.transpose() * o) - Matrix::Identity(o.rows(), o.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

namespace {

void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("similarity: rho must lie in (0, 1), got " +
                                std::to_string(rho));
  }
}

}  // namespace

VectorSimilarity::VectorSimilarity(double rho_, Matrix o_, Vector w_)
    : rho(rho_), o(std::move(o_)), w(std::move(w_)) {
  check_rho(rho);
  if (o.rows() != w.size() || !is_orthogonal(o)) {
    throw std::invalid_argument("similarity: O must be an orthogonal m x m matrix");
  }
}

VectorSimilarity VectorSimilarity::scalar(double rho, double w) {
  return VectorSimilarity(rho, Matrix::Identity(1, 1), Vector::Constant(1, w));
}

Vector VectorSimilarity::fixed_point() const {
  const auto m = w.size();
  const Matrix lhs = Matrix::Identity(m, m) - rho * o;
  return lhs.partialPivLu().solve(w);
}

MatrixSimilarity::MatrixSimilarity(double rho_, Matrix o1_, Matrix o2_, Matrix b_)
    : rho(rho_), o1(std::move(o1_)), o2(std::move(o2_)), b(std::move(b_)) {
  check_rho(rho);
  if (o1.rows() != b.rows() || !is_orthogonal(o1)) {
    throw std::invalid_argument("similarity: O1 must be an orthogonal m x m matrix");
  }
  if (o2.rows() != b.cols() || !is_orthogonal(o2)) {
    throw std::invalid_argument("similarity: O2 must be an orthogonal n x n matrix");
  }
}

Matrix MatrixSimilarity::fixed_point() const {
  // vec(O1 A O2) = (O2^T kron O1) vec(A).
  const auto m = b.rows();
  const auto n = b.cols();
  Matrix kron(m * n, m * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * m, j * m, m, m) = o2(j, i) * o1;
    }
  }
  const Matrix lhs = Matrix::Identity(m * n, m * n) - rho * kron;
  const Vector vec_b = Eigen::Map<const Vector>(b.data(), m * n);
  const Vector vec_a = lhs.partialPivLu().solve(vec_b);
  return Eigen::Map<const Matrix>(vec_a.data(), m, n);
}

GroupElement letter_to_group(const VectorSimilarity& e, const FlowParams& params) {
  if (e.dim() != params.m) {
    throw DimensionMismatch("vector letter dimension must equal m");
  }
  const Matrix top = e.o.transpose() / e.rho;
  const Matrix bottom =
      Matrix::Identity(params.n, params.n) *
      std::pow(e.rho, static_cast<double>(params.m) / params.n);
  Vector trans = Vector::Zero(params.dim());
  trans.head(params.m) = top * e.w;
  return {block_diag(top, bottom), std::move(trans)};
}

GroupElement letter_inverse(const VectorSimilarity& e, const FlowParams& params) {
  if (e.dim() != params.m) {
    throw DimensionMismatch("vector letter dimension must equal m");
  }
  const Matrix top = e.rho * e.o;
  const Matrix bottom =
      Matrix::Identity(params.n, params.n) *
      std::pow(e.rho, -static_cast<double>(params.m) / params.n);
  Vector trans = Vector::Zero(params.dim());
  trans.head(params.m) = -e.w;
  return {block_diag(top, bottom), std::move(trans)};
}

GroupElement letter_to_group(const MatrixSimilarity& e, const FlowParams& params) {
  if (e.rows() != params.m || e.cols() != params.n) {
    throw DimensionMismatch("matrix letter must be m x n");
  }
  const double d = params.dim();
  const double up = std::pow(e.rho, -params.n / d);
  const double down = std::pow(e.rho, params.m / d);
  const Matrix o1_inv = e.o1.transpose();
  Matrix mat = Matrix::Zero(params.dim(), params.dim());
  mat.topLeftCorner(params.m, params.m) = up * o1_inv;
  mat.topRightCorner(params.m, params.n) = -up * o1_inv * e.b;
  mat.bottomRightCorner(params.n, params.n) = down * e.o2;
  return {std::move(mat), Vector::Zero(params.dim())};
}

AnalyticCurve::AnalyticCurve(std::vector<Matrix> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw std::invalid_argument("curve: at least one coefficient matrix required");
  }
  for (const auto& c : coeffs_) {
    if (c.rows() != coeffs_.front().rows() || c.cols() != coeffs_.front().cols()) {
      throw std::invalid_argument("curve: coefficient shapes differ");
    }
  }
}

AnalyticCurve AnalyticCurve::constant(Matrix c) { return AnalyticCurve({std::move(c)}); }

AnalyticCurve AnalyticCurve::affine_line(Matrix c, Matrix d) {
  return AnalyticCurve({std::move(c), std::move(d)});
}

AnalyticCurve AnalyticCurve::veronese(int n) {
  if (n < 1) throw std::invalid_argument("curve: veronese degree must be >= 1");
  std::vector<Matrix> coeffs(static_cast<std::size_t>(n) + 1, Matrix::Zero(1, n));
  for (int k = 1; k <= n; ++k) coeffs[static_cast<std::size_t>(k)](0, k - 1) = 1.0;
  return AnalyticCurve(std::move(coeffs));
}

Matrix AnalyticCurve::at(double s) const {
  // Horner.
  Matrix out = coeffs_.back();
  for (std::size_t k = coeffs_.size() - 1; k > 0; --k) {
    out = out * s + coeffs_[k - 1];
  }
  return out;
}

Matrix sample_type2(const AnalyticCurve& curve, Rng& rng) {
  return curve.at(rng.uniform());
}

}  // namespace gridlab
