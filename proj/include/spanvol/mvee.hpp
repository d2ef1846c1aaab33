#ifndef SPANVOL_MVEE_HPP
#define SPANVOL_MVEE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "spanvol/engine.hpp"

namespace spanvol {

/// Origin-centered ellipsoid {x : x^T H x <= d} enclosing the points, with
/// the dual weights lambda that produced it. neg_logdet = -ln det(H) is the
/// volume proxy. certified is false when the solver hit its iteration cap
/// before reaching tolerance.
template <typename Scalar>
struct EllipsoidResult {
  MatrixX<Scalar> H;
  Scalar neg_logdet = Scalar(0);
  VectorX<Scalar> lambda;
  Scalar max_violation = Scalar(0);
  bool certified = false;
  long iterations = 0;
};

/// Lagrangian lower bound ln det(sum_i lambda_i v_i v_i^T) + d - d sum_i
/// lambda_i on the MVEE objective -ln det(H). Returns -infinity when the
/// weighted Gram sum is singular.
template <typename Scalar>
Scalar dual_bound(const PointSet<Scalar>& points, const VectorX<Scalar>& lambda) {
  if (lambda.size() != points.n()) {
    throw error(errc::invalid_config, "dual_bound: lambda length mismatch");
  }
  if (lambda.minCoeff() < Scalar(0)) {
    throw error(errc::invalid_config, "dual_bound: lambda must be nonnegative");
  }
  const Index k = points.dim();
  const MatrixX<Scalar> a =
      points.data.transpose() * lambda.asDiagonal() * points.data;
  Eigen::LLT<MatrixX<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) {
    return -std::numeric_limits<Scalar>::infinity();
  }
  const Scalar logdet = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (!std::isfinite(static_cast<double>(logdet))) {
    return -std::numeric_limits<Scalar>::infinity();
  }
  return logdet + Scalar(k) - Scalar(k) * lambda.sum();
}

namespace detail {

template <typename Scalar>
struct KhachiyanWork {
  MatrixX<Scalar> m_inv;
  VectorX<Scalar> tau;
  Scalar logdet = Scalar(0);

  void refactor(const PointSet<Scalar>& points, const VectorX<Scalar>& lambda) {
    const Index k = points.dim();
    const MatrixX<Scalar> m =
        points.data.transpose() * lambda.asDiagonal() * points.data;
    Eigen::LLT<MatrixX<Scalar>> llt(m);
    if (llt.info() != Eigen::Success) {
      throw error(errc::singular_state, "khachiyan_mvee: weighted Gram sum lost rank");
    }
    m_inv = llt.solve(MatrixX<Scalar>::Identity(k, k));
    m_inv = ((m_inv + m_inv.transpose()) / Scalar(2)).eval();
    logdet = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    tau = (points.data.array() * (points.data * m_inv).array()).rowwise().sum();
  }
};

}  // namespace detail

/// Frank-Wolfe solver with away steps for the symmetric MVEE program
///   min -ln det(H)  s.t.  v_i^T H v_i <= d,  H PSD.
/// Maximizes ln det(sum lambda_i v_i v_i^T) over the simplex and returns
/// H = (d / max_i tau_i) * M(lambda)^{-1}, which is feasible by construction.
/// Terminates once max_i tau_i <= d (1 + tol); the duality gap against
/// dual_bound(lambda) is then at most d ln(1 + tol).
template <typename Scalar>
EllipsoidResult<Scalar> khachiyan_mvee(const PointSet<Scalar>& points, Scalar tol = Scalar(1e-7),
                                       long max_iter = 0) {
  const Index n = points.n();
  const Index k = points.dim();
  if (max_iter <= 0) {
    max_iter = static_cast<long>(
        std::ceil(100.0 * static_cast<double>(k) * std::log(std::max<double>(n, 2.0))));
  }

  EllipsoidResult<Scalar> result;
  result.lambda = VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));

  if (k == 1) {
    // One working dimension: all weight on the largest-magnitude point.
    Index jmax = 0;
    points.data.col(0).cwiseAbs().maxCoeff(&jmax);
    result.lambda.setZero();
    result.lambda(jmax) = Scalar(1);
    const Scalar m = points.data(jmax, 0) * points.data(jmax, 0);
    result.H = MatrixX<Scalar>::Constant(1, 1, Scalar(1) / m);
    result.neg_logdet = std::log(m);
    result.max_violation = Scalar(0);
    result.certified = true;
    return result;
  }

  detail::KhachiyanWork<Scalar> work;
  work.refactor(points, result.lambda);

  const Scalar dk = Scalar(k);
  constexpr long kRefactorEvery = 128;
  long since_refactor = 0;
  while (result.iterations < max_iter) {
    Index j_plus = 0;
    const Scalar tau_max = work.tau.maxCoeff(&j_plus);
    const Scalar eps_plus = tau_max / dk - Scalar(1);
    if (eps_plus <= tol) {
      // Maintained quantities say converged; confirm on a fresh factorization.
      work.refactor(points, result.lambda);
      Index j_check = 0;
      if (work.tau.maxCoeff(&j_check) / dk - Scalar(1) <= tol) break;
      since_refactor = 0;
      continue;
    }

    // Away candidate: support point with the smallest leverage.
    Index j_minus = -1;
    Scalar tau_min = std::numeric_limits<Scalar>::max();
    for (Index i = 0; i < n; ++i) {
      if (result.lambda(i) > Scalar(0) && work.tau(i) < tau_min) {
        tau_min = work.tau(i);
        j_minus = i;
      }
    }
    const Scalar eps_minus = Scalar(1) - tau_min / dk;

    Index j = j_plus;
    Scalar tau_j = tau_max;
    Scalar gamma = (tau_max - dk) / (dk * (tau_max - Scalar(1)));
    Scalar a = gamma / (Scalar(1) - gamma);
    Scalar denom = Scalar(1) + a * tau_j;
    if (j_minus >= 0 && eps_minus > eps_plus && result.lambda(j_minus) < Scalar(1)) {
      // Away step: shrink the weight of the least-leveraged support point.
      // For tau > 1 the line search has an interior optimum; for tau <= 1
      // the objective increases monotonically down to full removal, so the
      // step is a drop. Near-essential points (lambda * tau close to 1)
      // make the rank-one update singular; keep the vertex step then.
      const Scalar lam = result.lambda(j_minus);
      const Scalar gamma_min = -lam / (Scalar(1) - lam);
      Scalar away_gamma = gamma_min;
      if (tau_min > Scalar(1)) {
        away_gamma = std::max((tau_min - dk) / (dk * (tau_min - Scalar(1))), gamma_min);
      }
      const Scalar away_a = away_gamma / (Scalar(1) - away_gamma);
      const Scalar away_denom = Scalar(1) + away_a * tau_min;
      if (away_denom > Scalar(1e-12)) {
        j = j_minus;
        tau_j = tau_min;
        gamma = away_gamma;
        a = away_a;
        denom = away_denom;
      }
    }

    const VectorX<Scalar> w = work.m_inv * points.point(j);
    const VectorX<Scalar> cross = points.data * w;
    work.tau = ((work.tau - (a / denom) * cross.array().square().matrix()) / (Scalar(1) - gamma)).eval();
    work.m_inv.template selfadjointView<Eigen::Lower>().rankUpdate(w, -a / denom);
    work.m_inv.template triangularView<Eigen::StrictlyUpper>() = work.m_inv.transpose();
    work.m_inv /= (Scalar(1) - gamma);
    work.logdet += dk * std::log1p(-gamma) + std::log1p(a * tau_j);

    result.lambda *= (Scalar(1) - gamma);
    result.lambda(j) += gamma;
    if (result.lambda(j) < Scalar(1e-18)) result.lambda(j) = Scalar(0);

    ++result.iterations;
    if (++since_refactor >= kRefactorEvery) {
      work.refactor(points, result.lambda);
      since_refactor = 0;
    }
  }

  work.refactor(points, result.lambda);
  const Scalar tau_max = work.tau.maxCoeff();
  result.certified = (tau_max / dk - Scalar(1) <= tol);
  const Scalar scale = dk / tau_max;  // <= 1 because sum lambda_i tau_i = d
  result.H = scale * work.m_inv;
  result.neg_logdet = work.logdet - dk * std::log(scale);
  result.max_violation = scale * tau_max - dk;
  return result;
}

/// Point set restricted to a list of row indices (working coordinates and
/// span basis are shared).
template <typename Scalar>
PointSet<Scalar> subset_points(const PointSet<Scalar>& points, const std::vector<Index>& rows) {
  PointSet<Scalar> out;
  out.ambient_dim = points.ambient_dim;
  out.span_basis = points.span_basis;
  out.data.resize(static_cast<Index>(rows.size()), points.dim());
  for (Index t = 0; t < out.data.rows(); ++t) {
    out.data.row(t) = points.data.row(rows[t]);
    out.source_rows.push_back(points.source_rows.empty() ? rows[t]
                                                         : points.source_rows[rows[t]]);
  }
  return out;
}

template <typename Scalar>
struct CoresetVerification {
  Scalar neg_logdet_x = Scalar(0);
  Scalar neg_logdet_t = Scalar(0);
  Scalar allowed_gap = Scalar(0);   // d ln(1+eps)
  Scalar solver_slack = Scalar(0);  // 3 d solver_tol
  Scalar volume_gap = Scalar(0);    // neg_logdet_x - neg_logdet_t
  Scalar max_h_quadform = Scalar(0);       // max_j v_j^T H v_j, H from coreset weights
  Scalar leverage_bound = Scalar(0);       // d (1+eps/4)^2
  Scalar max_scaled_quadform = Scalar(0);  // with H/(1+eps)
  bool solvers_certified = false;
  bool volume_ok = false;
  bool monotone_ok = false;
  bool leverage_ok = false;
  bool feasibility_ok = false;

  bool ok() const {
    return solvers_certified && volume_ok && monotone_ok && leverage_ok && feasibility_ok;
  }
};

template <typename Scalar>
struct CoresetResult {
  std::vector<Index> support;  // sorted indices with positive count
  VectorXi counts;             // length n multiset multiplicities
  Index r = 0;
  Scalar delta = Scalar(0);
  Scalar epsilon = Scalar(0);
  CoresetVerification<Scalar> verification;
  EngineReport<Scalar> engine;
};

/// Check the coreset guarantee along both routes: solver volumes
/// (neg_logdet of MVEE(X) vs MVEE(T)) and the direct feasibility argument
/// with H built from the local-search weights.
template <typename Scalar>
CoresetVerification<Scalar> verify_coreset(const PointSet<Scalar>& points,
                                           const CoresetResult<Scalar>& coreset, Scalar epsilon,
                                           Scalar solver_tol = Scalar(1e-7)) {
  const Index k = points.dim();
  CoresetVerification<Scalar> v;
  v.allowed_gap = Scalar(k) * std::log1p(epsilon);
  v.solver_slack = Scalar(3) * Scalar(k) * solver_tol;

  const auto full = khachiyan_mvee(points, solver_tol);
  const auto restricted = khachiyan_mvee(subset_points(points, coreset.support), solver_tol);
  v.solvers_certified = full.certified && restricted.certified;
  v.neg_logdet_x = full.neg_logdet;
  v.neg_logdet_t = restricted.neg_logdet;
  v.volume_gap = v.neg_logdet_x - v.neg_logdet_t;
  v.volume_ok = v.volume_gap <= v.allowed_gap + v.solver_slack;
  v.monotone_ok = v.neg_logdet_t <= v.neg_logdet_x + Scalar(k) * solver_tol;

  // Proof route: lambda_i = n_i / r gives H = r M^{-1}; the termination
  // certificate makes v^T H v < d (1+eps/4)^2, so H/(1+eps) encloses X.
  const MatrixX<Scalar> m = gram_sum(points, coreset.counts);
  Eigen::LLT<MatrixX<Scalar>> llt(m);
  if (llt.info() != Eigen::Success) {
    throw error(errc::singular_state, "verify_coreset: coreset Gram sum is singular");
  }
  const MatrixX<Scalar> solved = llt.solve(points.data.transpose());
  const VectorX<Scalar> tau = (points.data.array() * solved.transpose().array()).rowwise().sum();
  v.max_h_quadform = Scalar(coreset.r) * tau.maxCoeff();
  const Scalar one_plus = Scalar(1) + epsilon / Scalar(4);
  v.leverage_bound = Scalar(k) * one_plus * one_plus;
  v.leverage_ok = v.max_h_quadform < v.leverage_bound + Scalar(1e-8);
  v.max_scaled_quadform = v.max_h_quadform / (Scalar(1) + epsilon);
  v.feasibility_ok = v.max_scaled_quadform <= Scalar(k) * (Scalar(1) + Scalar(1e-8));
  return v;
}

/// Coreset for the symmetric MVEE problem by repeat-mode local search with
/// r = ceil((1 + 4/eps) d) and delta = eps d / (4 r). The support T of the
/// returned multiset satisfies vol(MVEE(X)) <= (1+eps)^d vol(MVEE(T)).
template <typename Scalar>
CoresetResult<Scalar> mvee_coreset(const PointSet<Scalar>& points, Scalar epsilon,
                                   PivotRule pivot = PivotRule::FirstImproving,
                                   bool verify = true, Scalar solver_tol = Scalar(1e-7)) {
  if (!(epsilon > Scalar(0))) {
    throw error(errc::bad_epsilon, "mvee_coreset: epsilon must be positive");
  }
  const Index k = points.dim();

  CoresetResult<Scalar> result;
  result.epsilon = epsilon;
  result.r = static_cast<Index>(
      std::ceil((1.0 + 4.0 / static_cast<double>(epsilon)) * static_cast<double>(k)));
  result.delta = epsilon * Scalar(k) / (Scalar(4) * Scalar(result.r));

  EngineConfig cfg;
  cfg.r = result.r;
  cfg.delta = static_cast<double>(result.delta);
  cfg.mode = SearchMode::Repeat;
  cfg.pivot = pivot;
  result.engine = local_search(points, cfg);
  result.counts = result.engine.selection.counts;
  for (Index i = 0; i < points.n(); ++i) {
    if (result.counts(i) > 0) result.support.push_back(i);
  }
  if (verify) result.verification = verify_coreset(points, result, epsilon, solver_tol);
  return result;
}

}  // namespace spanvol

#endif  // SPANVOL_MVEE_HPP
