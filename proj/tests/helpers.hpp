#ifndef SPANVOL_TESTS_HELPERS_HPP
#define SPANVOL_TESTS_HELPERS_HPP

#include <random>

#include "spanvol/engine.hpp"

namespace testutil {

using spanvol::Index;
using spanvol::MatrixX;
using spanvol::VectorXi;

inline MatrixX<double> gaussian_matrix(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixX<double> m(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

inline spanvol::PointSet<double> gaussian_points(Index n, Index d, std::uint64_t seed) {
  return spanvol::preprocess(gaussian_matrix(n, d, seed));
}

/// Multiplicities for a random full-rank selection of total size r.
inline VectorXi random_counts(const spanvol::PointSet<double>& points, Index r,
                              std::uint64_t seed, bool allow_repeats = false) {
  std::mt19937_64 rng(seed);
  VectorXi counts = VectorXi::Zero(points.n());
  // Seed with a spanning subset so M is full rank, then fill randomly.
  for (Index i : spanvol::greedy_order(points)) counts(i) += 1;
  std::uniform_int_distribution<Index> pick(0, points.n() - 1);
  Index placed = points.dim();
  while (placed < r) {
    const Index i = pick(rng);
    if (!allow_repeats && counts(i) > 0) continue;
    counts(i) += 1;
    ++placed;
  }
  return counts;
}

/// det(M - v_i v_i^T + v_j v_j^T) / det(M), both determinants from scratch.
inline double det_ratio_oracle(const spanvol::PointSet<double>& points, const VectorXi& counts,
                               Index i, Index j) {
  const MatrixX<double> m = spanvol::gram_sum(points, counts);
  VectorXi swapped = counts;
  swapped(i) -= 1;
  swapped(j) += 1;
  MatrixX<double> m2;
  if (swapped.sum() >= 1 && swapped.minCoeff() >= 0) {
    m2 = spanvol::gram_sum(points, swapped);
  } else {
    m2 = m - points.point(i) * points.point(i).transpose() +
         points.point(j) * points.point(j).transpose();
  }
  return m2.determinant() / m.determinant();
}

}  // namespace testutil

#endif  // SPANVOL_TESTS_HELPERS_HPP
