#ifndef SPANVOL_SPANNER_HPP
#define SPANVOL_SPANNER_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "spanvol/engine.hpp"
#include "spanvol/parallel.hpp"

namespace spanvol {

/// A chosen subset S together with, for every input point, a coefficient
/// vector over S that reproduces the point, its lp norm, and the achieved
/// and guaranteed approximation factors. Members of S carry their indicator
/// vector (norm exactly 1).
template <typename Scalar>
struct SpannerCertificate {
  std::vector<Index> subset;      // sorted
  double p = 2.0;
  MatrixX<Scalar> coefficients;   // n x |S|, row j = alpha_j
  VectorX<Scalar> norms;          // lp norm per row
  Scalar c_achieved = Scalar(0);
  Scalar c_guaranteed = Scalar(0);
  Scalar max_candidate_norm = Scalar(0);  // max over j not in S
  Scalar max_residual = Scalar(0);        // max_j |v_j - U alpha_j| / (1 + |v_j|)
};

template <typename Scalar>
struct SpannerResult {
  SpannerCertificate<Scalar> certificate;
  EngineReport<Scalar> engine;
  Index r = 0;
  double delta = 0.0;
};

template <typename Scalar>
Scalar lp_norm(const VectorX<Scalar>& x, double p) {
  if (p == 2.0) return x.norm();
  if (p == 1.0) return x.template lpNorm<1>();
  return Scalar(std::pow(x.array().abs().pow(Scalar(p)).sum(), 1.0 / p));
}

/// Minimum-l2-norm coefficients of v_j over the subset columns; the
/// indicator vector when j is itself in the subset.
template <typename Scalar>
VectorX<Scalar> coefficients(const PointSet<Scalar>& points, const std::vector<Index>& subset,
                             Index j) {
  const Index s = static_cast<Index>(subset.size());
  for (Index t = 0; t < s; ++t) {
    if (subset[t] == j) {
      VectorX<Scalar> alpha = VectorX<Scalar>::Zero(s);
      alpha(t) = Scalar(1);
      return alpha;
    }
  }
  MatrixX<Scalar> u(points.dim(), s);
  for (Index t = 0; t < s; ++t) u.col(t) = points.data.row(subset[t]).transpose();
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(u);
  if (cod.rank() < points.dim()) {
    throw error(errc::subset_rank_deficient, "coefficients: subset does not span the working space");
  }
  return cod.solve(points.point(j));
}

/// Smallest r in [d+1, r_max] with r^(2/p-1) * (d + r*delta) / (r - d + 1)
/// <= 1 at delta = d/r, i.e. r^(2/p-1) * 2d <= r - d + 1; returns r_max + 1
/// when no size up to r_max certifies (as p approaches 1 the required size
/// grows without bound). Only meaningful for p in (1, 2).
inline Index lp_spanner_size(Index d, double p, Index r_max = 2000000) {
  const double exponent = 2.0 / p - 1.0;
  for (Index r = d + 1; r <= r_max; ++r) {
    const double rr = static_cast<double>(r);
    const double lhs = std::pow(rr, exponent) * (2.0 * static_cast<double>(d)) / (rr - d + 1.0);
    if (lhs <= 1.0) return r;
  }
  return r_max + 1;
}

namespace detail {

template <typename Scalar>
void fill_certificate(const PointSet<Scalar>& points, SpannerCertificate<Scalar>& cert,
                      int threads) {
  const Index n = points.n();
  const Index s = static_cast<Index>(cert.subset.size());
  MatrixX<Scalar> u(points.dim(), s);
  for (Index t = 0; t < s; ++t) u.col(t) = points.data.row(cert.subset[t]).transpose();
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(u);
  if (cod.rank() < points.dim()) {
    throw error(errc::subset_rank_deficient, "build_spanner: selection lost rank");
  }

  std::vector<Index> position(n, -1);
  for (Index t = 0; t < s; ++t) position[cert.subset[t]] = t;

  cert.coefficients.resize(n, s);
  cert.norms.resize(n);
  VectorX<Scalar> residuals(n);
  parallel_for(n, threads, [&](Index j) {
    VectorX<Scalar> alpha;
    if (position[j] >= 0) {
      alpha = VectorX<Scalar>::Zero(s);
      alpha(position[j]) = Scalar(1);
      cert.norms(j) = Scalar(1);
    } else {
      alpha = cod.solve(points.point(j));
      cert.norms(j) = lp_norm(alpha, cert.p);
    }
    cert.coefficients.row(j) = alpha.transpose();
    const VectorX<Scalar> v = points.point(j);
    residuals(j) = (v - u * alpha).norm() / (Scalar(1) + v.norm());
  });

  cert.c_achieved = cert.norms.maxCoeff();
  cert.max_candidate_norm = Scalar(0);
  for (Index j = 0; j < n; ++j) {
    if (position[j] < 0) cert.max_candidate_norm = std::max(cert.max_candidate_norm, cert.norms(j));
  }
  cert.max_residual = residuals.maxCoeff();
}

}  // namespace detail

/// Build an lp volumetric spanner by no-repeat local search.
///
/// Parameter choices by norm:
///   p >= 2 : r = min(3d, n), delta = 1/3
///   p in (1,2): delta = d/r with r the smallest size whose Holder bound
///              certifies coefficient norms <= 1 (lp_spanner_size)
///   p = 1  : r = min(3d, n), delta = 1/3, guarantee sqrt(3d)
/// When the rule asks for r >= n the whole input is returned as a trivial
/// spanner with guarantee 1. r_override (when > 0) replaces the rule's r.
template <typename Scalar>
SpannerResult<Scalar> build_spanner(const PointSet<Scalar>& points, double p,
                                    Index r_override = -1,
                                    PivotRule pivot = PivotRule::FirstImproving,
                                    int threads = 1, double delta_override = -1.0) {
  if (!(p >= 1.0)) throw error(errc::invalid_config, "build_spanner: p must be >= 1");
  const Index n = points.n();
  const Index d = points.dim();

  Index r = 0;
  if (r_override > 0) {
    r = std::min(std::max(r_override, d), n);
  } else if (p >= 2.0 || p == 1.0) {
    r = std::min(Index(3) * d, n);
  } else {
    r = std::min(lp_spanner_size(d, p, n), n);  // uncertifiable sizes clamp to trivial
  }

  EngineConfig cfg;
  cfg.r = r;
  cfg.mode = SearchMode::NoRepeat;
  cfg.pivot = pivot;
  cfg.delta = (p > 1.0 && p < 2.0) ? static_cast<double>(d) / static_cast<double>(r) : 1.0 / 3.0;
  if (delta_override > 0.0) cfg.delta = delta_override;

  SpannerResult<Scalar> result;
  result.engine = local_search(points, cfg);
  result.r = r;
  result.delta = cfg.delta;

  auto& cert = result.certificate;
  cert.p = p;
  for (Index i = 0; i < n; ++i) {
    if (result.engine.selection.counts(i) > 0) cert.subset.push_back(i);
  }

  const bool trivial = static_cast<Index>(cert.subset.size()) == n;
  const Scalar bound = result.engine.tau_bound;
  if (trivial) {
    cert.c_guaranteed = Scalar(1);
  } else if (p >= 2.0) {
    cert.c_guaranteed = std::max(Scalar(1), Scalar(std::sqrt(static_cast<double>(bound))));
  } else if (p > 1.0) {
    const double scale = std::pow(static_cast<double>(r), 1.0 / p - 0.5);
    cert.c_guaranteed =
        std::max(Scalar(1), Scalar(scale * std::sqrt(static_cast<double>(bound))));
  } else {
    cert.c_guaranteed = Scalar(std::sqrt(static_cast<double>(r))) *
                        std::max(Scalar(1), Scalar(std::sqrt(static_cast<double>(bound))));
  }

  detail::fill_certificate(points, cert, threads);
  return result;
}

}  // namespace spanvol

#endif  // SPANVOL_SPANNER_HPP
