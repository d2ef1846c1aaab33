#ifndef SPANVOL_CORE_HPP
#define SPANVOL_CORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "spanvol/errors.hpp"
#include "spanvol/types.hpp"

namespace spanvol {

/// Validate, drop zero rows, and restrict to the span of the input.
///
/// If rank_tol <= 0, singular values below sigma_max * max(n,d) * eps are
/// treated as zero; otherwise the cutoff is sigma_max * rank_tol. When the
/// numerical rank equals d the coordinates are returned unchanged and
/// span_basis is the identity; otherwise rows are re-expressed in an
/// orthonormal basis of the span and span_basis maps back to ambient
/// coordinates.
template <typename Scalar>
PointSet<Scalar> preprocess(const MatrixX<Scalar>& raw, Scalar rank_tol = Scalar(0)) {
  const Index n_raw = raw.rows();
  const Index d = raw.cols();
  if (n_raw < 1 || d < 1) {
    throw error(errc::invalid_config, "preprocess: need at least one row and one column");
  }
  if (!raw.allFinite()) {
    throw error(errc::non_finite, "preprocess: input contains NaN or Inf");
  }

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar max_abs = raw.cwiseAbs().maxCoeff();
  if (max_abs == Scalar(0)) {
    throw error(errc::all_zero, "preprocess: every input row is zero");
  }

  // A row is numerically zero when all entries sit at roundoff level
  // relative to the largest input entry.
  const Scalar zero_row_tol = max_abs * Scalar(std::max(n_raw, d)) * eps;

  PointSet<Scalar> out;
  out.ambient_dim = d;
  for (Index i = 0; i < n_raw; ++i) {
    if (raw.row(i).template lpNorm<Eigen::Infinity>() <= zero_row_tol) {
      out.dropped_rows.push_back(i);
    } else {
      out.source_rows.push_back(i);
    }
  }
  const Index n = static_cast<Index>(out.source_rows.size());
  if (n == 0) {
    throw error(errc::all_zero, "preprocess: every input row is numerically zero");
  }

  MatrixX<Scalar> kept(n, d);
  for (Index t = 0; t < n; ++t) kept.row(t) = raw.row(out.source_rows[t]);

  Eigen::JacobiSVD<MatrixX<Scalar>> svd(kept, Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const Scalar sigma_max = sigma(0);
  const Scalar cutoff = sigma_max * (rank_tol > Scalar(0) ? rank_tol : Scalar(std::max(n, d)) * eps);
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;
  if (rank == 0) {
    throw error(errc::all_zero, "preprocess: input has numerical rank zero");
  }

  if (rank == d) {
    out.data = std::move(kept);
    out.span_basis = MatrixX<Scalar>::Identity(d, d);
  } else {
    out.span_basis = svd.matrixV().leftCols(rank);
    out.data = kept * out.span_basis;
  }
  return out;
}

/// Sum of counts[i] * v_i v_i^T over the point set.
template <typename Scalar>
MatrixX<Scalar> gram_sum(const PointSet<Scalar>& points, const VectorXi& counts) {
  if (counts.size() != points.n()) {
    throw error(errc::invalid_config, "gram_sum: counts length mismatch");
  }
  if (counts.minCoeff() < 0 || counts.sum() < 1) {
    throw error(errc::invalid_config, "gram_sum: counts must be nonnegative with positive sum");
  }
  const Index k = points.dim();
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(k, k);
  for (Index i = 0; i < points.n(); ++i) {
    if (counts(i) == 0) continue;
    m.template selfadjointView<Eigen::Lower>().rankUpdate(points.data.row(i).transpose(),
                                                          Scalar(counts(i)));
  }
  m.template triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return m;
}

/// Working multiset S with its Gram sum M, maintained inverse and log det.
/// Mutation is owned by a single thread; the read-only queries below are safe
/// to run concurrently against an unchanging state.
template <typename Scalar>
struct SelectionState {
  VectorXi counts;        // multiplicity per point index, length n
  Index r = 0;            // counts.sum()
  MatrixX<Scalar> M;      // sum of counts[i] v_i v_i^T
  MatrixX<Scalar> M_inv;  // maintained via Sherman-Morrison, refactored periodically
  Scalar logdet = Scalar(0);
  long swaps_applied = 0;
  int updates_since_refactor = 0;
  int refactor_interval = 64;
};

/// Recompute M_inv and logdet from M by a fresh Cholesky factorization.
template <typename Scalar>
void refactor(SelectionState<Scalar>& state) {
  const Index k = state.M.rows();
  Eigen::LLT<MatrixX<Scalar>> llt(state.M);
  if (llt.info() != Eigen::Success) {
    throw error(errc::singular_state, "refactor: M is not positive definite");
  }
  state.M_inv = llt.solve(MatrixX<Scalar>::Identity(k, k));
  state.M_inv = ((state.M_inv + state.M_inv.transpose()) / Scalar(2)).eval();
  state.logdet = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  state.updates_since_refactor = 0;
}

/// Build a state from explicit multiplicities. Requires the selected points
/// to span the working space.
template <typename Scalar>
SelectionState<Scalar> make_selection(const PointSet<Scalar>& points, const VectorXi& counts) {
  SelectionState<Scalar> state;
  state.counts = counts;
  state.r = counts.sum();
  if (state.r < points.dim()) {
    throw error(errc::singular_state, "make_selection: fewer selected points than dimensions");
  }
  state.M = gram_sum(points, counts);
  refactor(state);
  return state;
}

/// Leverage tau(v) = v^T M^{-1} v.
template <typename Scalar, typename Derived>
Scalar leverage(const SelectionState<Scalar>& state, const Eigen::MatrixBase<Derived>& v) {
  if (state.M_inv.rows() != v.size()) {
    throw error(errc::singular_state, "leverage: state has no valid inverse for this size");
  }
  return v.derived().dot(state.M_inv * v.derived());
}

/// Cross-leverage u^T M^{-1} v; symmetric in (u, v).
template <typename Scalar, typename DerivedU, typename DerivedV>
Scalar cross_leverage(const SelectionState<Scalar>& state, const Eigen::MatrixBase<DerivedU>& u,
                      const Eigen::MatrixBase<DerivedV>& v) {
  if (state.M_inv.rows() != u.size() || state.M_inv.rows() != v.size()) {
    throw error(errc::singular_state, "cross_leverage: state has no valid inverse for this size");
  }
  return u.derived().dot(state.M_inv * v.derived());
}

/// Ratio det(M - v_i v_i^T + v_j v_j^T) / det(M) in closed form,
/// (1 - tau_i)(1 + tau_j) + tau_ij^2. Requires one copy of i in S; j is any
/// index, possibly equal to i or already selected.
template <typename Scalar>
Scalar swap_gain(const PointSet<Scalar>& points, const SelectionState<Scalar>& state, Index i,
                 Index j) {
  if (i < 0 || i >= points.n() || state.counts(i) < 1) {
    throw error(errc::not_in_set, "swap_gain: index " + std::to_string(i) + " not in S");
  }
  const auto vi = points.data.row(i).transpose();
  const auto vj = points.data.row(j).transpose();
  const VectorX<Scalar> wi = state.M_inv * vi;
  const Scalar tau_i = vi.dot(wi);
  const Scalar tau_j = leverage(state, vj);
  const Scalar tau_ij = vj.dot(wi);
  return (Scalar(1) - tau_i) * (Scalar(1) + tau_j) + tau_ij * tau_ij;
}

namespace detail {
constexpr double kDegenerateGainTol = 1e-12;
}

/// Exchange one copy of i for j: counts, M, M_inv and logdet are updated via
/// two rank-one steps, adding v_j before removing v_i so the intermediate
/// matrix stays full rank.
template <typename Scalar>
void apply_swap(const PointSet<Scalar>& points, SelectionState<Scalar>& state, Index i, Index j) {
  const Scalar gain = swap_gain(points, state, i, j);
  if (!(gain > Scalar(detail::kDegenerateGainTol))) {
    throw error(errc::degenerate_swap,
                "apply_swap: swap (" + std::to_string(i) + "," + std::to_string(j) +
                    ") would make M singular (gain " + std::to_string(static_cast<double>(gain)) +
                    ")");
  }

  const VectorX<Scalar> vi = points.data.row(i).transpose();
  const VectorX<Scalar> vj = points.data.row(j).transpose();

  // Add v_j.
  VectorX<Scalar> w = state.M_inv * vj;
  const Scalar tau_j = vj.dot(w);
  state.M_inv.template selfadjointView<Eigen::Lower>().rankUpdate(w, Scalar(-1) / (Scalar(1) + tau_j));
  state.M_inv.template triangularView<Eigen::StrictlyUpper>() = state.M_inv.transpose();
  state.M.template selfadjointView<Eigen::Lower>().rankUpdate(vj, Scalar(1));
  state.M.template triangularView<Eigen::StrictlyUpper>() = state.M.transpose();
  state.logdet += std::log1p(tau_j);

  // Remove v_i.
  state.M.template selfadjointView<Eigen::Lower>().rankUpdate(vi, Scalar(-1));
  state.M.template triangularView<Eigen::StrictlyUpper>() = state.M.transpose();
  VectorX<Scalar> u = state.M_inv * vi;
  const Scalar t = vi.dot(u);
  if (Scalar(1) - t > Scalar(1e-14)) {
    state.M_inv.template selfadjointView<Eigen::Lower>().rankUpdate(u, Scalar(1) / (Scalar(1) - t));
    state.M_inv.template triangularView<Eigen::StrictlyUpper>() = state.M_inv.transpose();
    state.logdet += std::log1p(-t);
    state.updates_since_refactor += 2;
  } else {
    // Cancellation in 1 - t: fall back to a fresh factorization of the
    // already-updated M.
    refactor(state);
  }

  state.counts(i) -= 1;
  state.counts(j) += 1;
  state.swaps_applied += 1;
  if (state.updates_since_refactor >= state.refactor_interval) refactor(state);
}

/// Leverage values of every point against a selection, with the local-search
/// termination bound (d + r*delta)/(r - d + 1).
template <typename Scalar>
struct LeverageProfile {
  VectorX<Scalar> tau;
  Scalar bound = Scalar(0);
  Scalar max_tau_candidate = Scalar(0);
  Scalar delta = Scalar(0);
};

/// Compute a LeverageProfile from scratch (fresh Gram sum and factorization,
/// independent of any maintained inverse). When include_members is false the
/// candidate max skips indices with counts > 0.
template <typename Scalar>
LeverageProfile<Scalar> leverage_profile(const PointSet<Scalar>& points, const VectorXi& counts,
                                         Scalar delta, bool include_members) {
  const Index n = points.n();
  const Index k = points.dim();
  const MatrixX<Scalar> m = gram_sum(points, counts);
  Eigen::LLT<MatrixX<Scalar>> llt(m);
  if (llt.info() != Eigen::Success) {
    throw error(errc::singular_state, "leverage_profile: selection Gram sum is singular");
  }

  LeverageProfile<Scalar> profile;
  profile.delta = delta;
  const Scalar r = Scalar(counts.sum());
  profile.bound = (Scalar(k) + r * delta) / (r - Scalar(k) + Scalar(1));

  const MatrixX<Scalar> solved = llt.solve(points.data.transpose());  // k x n
  profile.tau = (points.data.array() * solved.transpose().array()).rowwise().sum();

  profile.max_tau_candidate = Scalar(0);
  for (Index j = 0; j < n; ++j) {
    if (!include_members && counts(j) > 0) continue;
    profile.max_tau_candidate = std::max(profile.max_tau_candidate, profile.tau(j));
  }
  return profile;
}

}  // namespace spanvol

#endif  // SPANVOL_CORE_HPP
