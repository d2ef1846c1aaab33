#ifndef SPANVOL_EXPERIMENTS_HPP
#define SPANVOL_EXPERIMENTS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "spanvol/core.hpp"

namespace spanvol {

namespace detail {

/// SplitMix64 output function. The sign ensemble uses the counter-mode
/// stream out(idx) = mix64(seed + (idx + 1) * 0x9E3779B97F4A7C15), which is
/// reproducible from the (seed, index) pair alone on any platform with
/// 64-bit unsigned arithmetic.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_stream(std::uint64_t seed, std::uint64_t idx) {
  return mix64(seed + (idx + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Visit every size-k index subset of [0, n) in lexicographic order.
inline void for_each_subset(Index n, Index k, const std::function<void(const std::vector<Index>&)>& visit) {
  std::vector<Index> pick(k);
  for (Index t = 0; t < k; ++t) pick[t] = t;
  if (k == 0 || k > n) return;
  while (true) {
    visit(pick);
    Index t = k - 1;
    while (t >= 0 && pick[t] == n - k + t) --t;
    if (t < 0) break;
    ++pick[t];
    for (Index s = t + 1; s < k; ++s) pick[s] = pick[s - 1] + 1;
  }
}

inline double binomial(Index n, Index k) {
  double result = 1.0;
  for (Index t = 0; t < k; ++t) result *= static_cast<double>(n - t) / static_cast<double>(t + 1);
  return result;
}

}  // namespace detail

/// Random unit vectors with entries +-1/sqrt(d), signs from the documented
/// SplitMix64 counter stream (entry (i, c) uses stream index i*d + c).
template <typename Scalar = double>
PointSet<Scalar> sign_ensemble(Index n, Index d, std::uint64_t seed) {
  if (n < 2 || d < 1) {
    throw error(errc::invalid_config, "sign_ensemble: need n >= 2 and d >= 1");
  }
  MatrixX<Scalar> raw(n, d);
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(d));
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) {
      const std::uint64_t word =
          detail::counter_stream(seed, static_cast<std::uint64_t>(i) * d + c);
      raw(i, c) = (word >> 63) ? scale : -scale;
    }
  }
  return preprocess(raw);
}

/// Lower bound on |alpha|_1 for ANY representation v_i = sum_{j in S}
/// alpha_j v_j: <v_i, v_i> / max_{j in S} |<v_i, v_j>|. Returns +infinity
/// when every inner product is numerically zero (v_i is orthogonal to S and
/// unrepresentable over it).
template <typename Scalar>
Scalar l1_certificate(const PointSet<Scalar>& points, const std::vector<Index>& subset, Index i) {
  const VectorX<Scalar> vi = points.point(i);
  Scalar max_inner = Scalar(0);
  for (Index j : subset) {
    max_inner = std::max(max_inner, std::abs(vi.dot(points.point(j))));
  }
  const Scalar self = vi.squaredNorm();
  const Scalar tiny = self * Scalar(points.dim()) * std::numeric_limits<Scalar>::epsilon();
  if (max_inner <= tiny) return std::numeric_limits<Scalar>::infinity();
  return self / max_inner;
}

/// Lower bound on |alpha|_p via Holder: |S|^(1/p - 1) times the l1 bound.
template <typename Scalar>
Scalar lp_certificate(const PointSet<Scalar>& points, const std::vector<Index>& subset, Index i,
                      double p) {
  if (!(p > 1.0 && p < 2.0)) {
    throw error(errc::invalid_config, "lp_certificate: p must lie in (1, 2)");
  }
  const double s = static_cast<double>(subset.size());
  return Scalar(std::pow(s, 1.0 / p - 1.0)) * l1_certificate(points, subset, i);
}

/// Exact determinant maximizer over all size-k subsets, by enumeration.
/// Ties go to the lexicographically smallest subset. Guarded to
/// binom(n, k) <= 1e6 enumerated subsets.
template <typename Scalar>
std::pair<std::vector<Index>, Scalar> brute_force_max_det(const PointSet<Scalar>& points,
                                                          Index k) {
  const Index n = points.n();
  if (k < 1 || k > n) throw error(errc::invalid_config, "brute_force_max_det: bad subset size");
  if (detail::binomial(n, k) > 1e6) {
    throw error(errc::too_large, "brute_force_max_det: more than 1e6 subsets");
  }
  std::vector<Index> best;
  Scalar best_det = -std::numeric_limits<Scalar>::infinity();
  detail::for_each_subset(n, k, [&](const std::vector<Index>& pick) {
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(points.dim(), points.dim());
    for (Index i : pick) {
      m.template selfadjointView<Eigen::Lower>().rankUpdate(points.point(i), Scalar(1));
    }
    m.template triangularView<Eigen::StrictlyUpper>() = m.transpose();
    const Scalar det = m.determinant();
    if (det > best_det) {
      best_det = det;
      best = pick;
    }
  });
  return {best, best_det};
}

/// Coherence statistics and per-held-out-point l1 certificates for an
/// almost-orthogonal ensemble.
template <typename Scalar>
struct EnsembleReport {
  Index n = 0;
  Index d = 0;
  std::uint64_t seed = 0;
  Scalar coherence = Scalar(0);        // max_{i != j} |<v_i, v_j>|
  Scalar coherence_ratio = Scalar(0);  // coherence / sqrt(ln n / d)
  VectorX<Scalar> l1_certificates;     // certificate for each i vs S = [n] \ {i}
};

/// Build a sign ensemble and measure it: pairwise coherence plus, for every
/// point, the l1 lower-bound certificate against all remaining points.
template <typename Scalar = double>
EnsembleReport<Scalar> ensemble_report(Index n, Index d, std::uint64_t seed) {
  EnsembleReport<Scalar> report;
  report.n = n;
  report.d = d;
  report.seed = seed;
  const PointSet<Scalar> points = sign_ensemble<Scalar>(n, d, seed);

  const MatrixX<Scalar> gram = points.data * points.data.transpose();
  report.coherence = Scalar(0);
  report.l1_certificates.resize(n);
  for (Index i = 0; i < n; ++i) {
    Scalar max_inner = Scalar(0);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      max_inner = std::max(max_inner, std::abs(gram(i, j)));
    }
    report.coherence = std::max(report.coherence, max_inner);
    report.l1_certificates(i) = max_inner > Scalar(0)
                                    ? gram(i, i) / max_inner
                                    : std::numeric_limits<Scalar>::infinity();
  }
  report.coherence_ratio =
      report.coherence / Scalar(std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(d)));
  return report;
}

}  // namespace spanvol

#endif  // SPANVOL_EXPERIMENTS_HPP
