#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace lorhol {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Rank decision with a relative singular-value threshold. `margin` is the ratio of the
// largest discarded singular value to the smallest kept one (0 when nothing is discarded or
// nothing is kept); values close to 1 mean the decision is fragile.
template <typename Scalar>
struct SvdSplit {
  int rank = 0;
  VectorX<Scalar> singular_values;
  MatrixX<Scalar> range;     // orthonormal columns
  MatrixX<Scalar> kernel;    // orthonormal columns
  Scalar margin = 0;
};

template <typename Derived>
SvdSplit<typename Derived::Scalar> svd_split(const Eigen::MatrixBase<Derived>& m, double rel_tol) {
  using Scalar = typename Derived::Scalar;
  SvdSplit<Scalar> out;
  MatrixX<Scalar> a = m;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  if (rows == 0 || cols == 0) {
    out.kernel = MatrixX<Scalar>::Identity(cols, cols);
    out.range = MatrixX<Scalar>(rows, 0);
    return out;
  }
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const Scalar smax = out.singular_values.size() ? out.singular_values(0) : Scalar(0);
  int r = 0;
  if (smax > Scalar(0))
    while (r < out.singular_values.size() && out.singular_values(r) > rel_tol * smax) ++r;
  out.rank = r;
  out.range = svd.matrixU().leftCols(r);
  out.kernel = svd.matrixV().rightCols(cols - r);
  if (r > 0 && r < out.singular_values.size()) out.margin = out.singular_values(r) / out.singular_values(r - 1);
  return out;
}

// Canonical basis of the column span of `basis`: reduced row-echelon form of its transpose,
// pivoting column by column in index order. Independent of the input basis chosen.
template <typename Derived>
MatrixX<typename Derived::Scalar> canonical_basis(const Eigen::MatrixBase<Derived>& basis, double tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> r = basis.transpose();
  const Eigen::Index n = r.rows(), m = r.cols();
  if (n == 0 || m == 0) return MatrixX<Scalar>(m, 0);
  Eigen::Index row = 0;
  const Scalar scale = std::max<Scalar>(r.cwiseAbs().maxCoeff(), Scalar(1e-300));
  for (Eigen::Index col = 0; col < m && row < n; ++col) {
    Eigen::Index piv;
    const Scalar best = r.col(col).segment(row, n - row).cwiseAbs().maxCoeff(&piv);
    if (best <= tol * scale) continue;
    piv += row;
    r.row(row).swap(r.row(piv));
    r.row(row) /= r(row, col);
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != row) r.row(i) -= r(i, col) * r.row(row);
    ++row;
  }
  return r.topRows(row).transpose();
}

// Residual of projecting v onto the column span of an orthonormal basis q.
template <typename DerivedQ, typename DerivedV>
typename DerivedV::Scalar span_residual(const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedV>& v) {
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.transpose() * v)).norm();
}

}  // namespace lorhol
