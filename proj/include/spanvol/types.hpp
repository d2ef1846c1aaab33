#ifndef SPANVOL_TYPES_HPP
#define SPANVOL_TYPES_HPP

#include <Eigen/Dense>
#include <vector>

namespace spanvol {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXi = Eigen::VectorXi;

/// Preprocessed input points. Row i of `data` is point v_i expressed in an
/// orthonormal basis of the span of the input, so `data` always has full
/// column rank and its column count equals the effective rank.
template <typename Scalar>
struct PointSet {
  MatrixX<Scalar> data;        // n x k, k = effective rank
  Index ambient_dim = 0;       // dimension of the raw input rows
  MatrixX<Scalar> span_basis;  // ambient_dim x k, orthonormal columns

  // Row bookkeeping relative to the raw input: kept row t came from raw row
  // source_rows[t]; dropped_rows lists the raw rows removed as zero.
  std::vector<Index> source_rows;
  std::vector<Index> dropped_rows;

  Index n() const { return data.rows(); }
  Index dim() const { return data.cols(); }
  Index effective_rank() const { return data.cols(); }

  VectorX<Scalar> point(Index i) const { return data.row(i).transpose(); }

  /// Map a working-coordinate vector back to ambient coordinates.
  VectorX<Scalar> to_ambient(const VectorX<Scalar>& w) const { return span_basis * w; }
};

}  // namespace spanvol

#endif  // SPANVOL_TYPES_HPP
