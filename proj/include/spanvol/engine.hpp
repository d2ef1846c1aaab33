#ifndef SPANVOL_ENGINE_HPP
#define SPANVOL_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "spanvol/core.hpp"

namespace spanvol {

enum class SearchMode { NoRepeat, Repeat };
enum class PivotRule { FirstImproving, BestImproving };

struct EngineConfig {
  Index r = 0;             // target selection size, >= working dimension
  double delta = 1.0 / 3.0;
  SearchMode mode = SearchMode::NoRepeat;
  PivotRule pivot = PivotRule::FirstImproving;
  long max_sweeps = 0;     // extra safety cap on accepted swaps; 0 = derived cap only
  std::uint64_t seed = 0;  // recorded for reproducibility; the search itself is deterministic
};

template <typename Scalar>
struct EngineReport {
  SelectionState<Scalar> selection;
  long iterations = 0;
  Scalar final_max_tau = Scalar(0);
  Scalar tau_bound = Scalar(0);
  std::vector<Scalar> logdet_trace;
};

/// Upper bound on accepted swaps: ceil(4/delta * (d ln d + d ln(e r / d))).
/// Every swap gains a (1+delta) determinant factor and the greedy start is
/// within binom(r,d) * d! of the optimum, so exceeding this cap indicates
/// broken arithmetic rather than slow progress.
inline long iteration_cap(Index d, Index r, double delta) {
  const double dd = static_cast<double>(d);
  const double rr = static_cast<double>(r);
  const double work = dd * std::log(dd) + dd * std::log(std::exp(1.0) * rr / dd);
  return static_cast<long>(std::ceil(4.0 / delta * std::max(work, 1.0)));
}

/// Greedy volume-maximization order: k picks, each maximizing the component
/// orthogonal to the span of the previous picks (ties to the lowest index).
template <typename Scalar>
std::vector<Index> greedy_order(const PointSet<Scalar>& points) {
  const Index n = points.n();
  const Index k = points.dim();
  MatrixX<Scalar> residual = points.data;
  VectorX<Scalar> norms2 = residual.rowwise().squaredNorm();
  const Scalar floor =
      norms2.maxCoeff() * Scalar(std::max(n, k)) * std::numeric_limits<Scalar>::epsilon();

  std::vector<Index> order;
  order.reserve(k);
  for (Index step = 0; step < k; ++step) {
    Index pick = 0;
    norms2.maxCoeff(&pick);
    if (!(norms2(pick) > floor)) {
      throw error(errc::rank_deficient, "greedy_order: points do not span the working space");
    }
    order.push_back(pick);
    const VectorX<Scalar> q = residual.row(pick).transpose() / std::sqrt(norms2(pick));
    residual -= (residual * q) * q.transpose();
    norms2 = residual.rowwise().squaredNorm();
  }
  return order;
}

/// Greedy initialization: d volume-maximizing picks, then the remaining
/// r - d slots are filled with the lowest unused indices (cycling through
/// [n] again in Repeat mode when r > n).
template <typename Scalar>
SelectionState<Scalar> greedy_init(const PointSet<Scalar>& points, Index r,
                                   SearchMode mode = SearchMode::NoRepeat) {
  const Index n = points.n();
  const Index k = points.dim();
  if (r < k) throw error(errc::invalid_config, "greedy_init: r must be at least the working dimension");
  if (mode == SearchMode::NoRepeat && r > n) {
    throw error(errc::invalid_config, "greedy_init: r exceeds n in no-repeat mode");
  }

  VectorXi counts = VectorXi::Zero(n);
  for (Index i : greedy_order(points)) counts(i) += 1;

  Index placed = k;
  for (Index idx = 0; idx < n && placed < r; ++idx) {
    if (counts(idx) == 0) {
      counts(idx) += 1;
      ++placed;
    }
  }
  // Repeat mode with r > n: keep cycling through the indices in order.
  for (Index cursor = 0; placed < r; cursor = (cursor + 1) % n) {
    counts(cursor) += 1;
    ++placed;
  }
  return make_selection(points, counts);
}

/// Scan for an improving swap against an unchanging state. Candidates j run
/// over non-members in NoRepeat mode and over all of [n] in Repeat mode; the
/// improvement test is log(gain) > log1p(delta).
template <typename Scalar>
std::optional<std::pair<Index, Index>> find_improving_swap(const PointSet<Scalar>& points,
                                                           const SelectionState<Scalar>& state,
                                                           const EngineConfig& cfg) {
  const Index n = points.n();
  const double log_thresh = std::log1p(cfg.delta);

  // tau_j for all candidates, against the current inverse.
  const MatrixX<Scalar> p = points.data * state.M_inv;  // n x k
  const VectorX<Scalar> tau = (p.array() * points.data.array()).rowwise().sum();

  std::optional<std::pair<Index, Index>> best;
  Scalar best_gain = Scalar(0);
  for (Index i = 0; i < n; ++i) {
    if (state.counts(i) == 0) continue;
    const Scalar tau_i = tau(i);
    const VectorX<Scalar> cross = p * points.data.row(i).transpose();  // cross(j) = tau_ij
    for (Index j = 0; j < n; ++j) {
      const bool member = state.counts(j) > 0;
      if (cfg.mode == SearchMode::NoRepeat && member) continue;
      const Scalar gain =
          (Scalar(1) - tau_i) * (Scalar(1) + tau(j)) + cross(j) * cross(j);
      if (gain > Scalar(0) && std::log(static_cast<double>(gain)) > log_thresh) {
        if (cfg.pivot == PivotRule::FirstImproving) return std::make_pair(i, j);
        if (gain > best_gain) {
          best_gain = gain;
          best = std::make_pair(i, j);
        }
      }
    }
  }
  return best;
}

/// One-swap local search: repeatedly exchange a selected point for a
/// candidate while the determinant grows by more than a (1+delta) factor.
/// The returned report carries the independently rescanned termination
/// certificate max_j tau_j < (d + r delta)/(r - d + 1) over candidates.
template <typename Scalar>
EngineReport<Scalar> local_search(const PointSet<Scalar>& points, EngineConfig cfg) {
  const Index n = points.n();
  const Index k = points.dim();
  if (cfg.delta <= 0.0) throw error(errc::invalid_config, "local_search: delta must be positive");
  if (cfg.r < k) throw error(errc::invalid_config, "local_search: r must be at least the working dimension");
  if (cfg.mode == SearchMode::NoRepeat && cfg.r > n) cfg.r = n;  // trivial all-points selection

  EngineReport<Scalar> report;
  report.selection = greedy_init(points, cfg.r, cfg.mode);
  report.logdet_trace.push_back(report.selection.logdet);

  long cap = iteration_cap(k, cfg.r, cfg.delta);
  if (cfg.max_sweeps > 0) cap = std::min(cap, cfg.max_sweeps);

  while (auto swap = find_improving_swap(points, report.selection, cfg)) {
    if (report.iterations >= cap) {
      throw error(errc::iteration_cap_exceeded,
                  "local_search: exceeded " + std::to_string(cap) +
                      " iterations; accepted swaps no longer gain (1+delta)");
    }
    apply_swap(points, report.selection, swap->first, swap->second);
    ++report.iterations;
    report.logdet_trace.push_back(report.selection.logdet);
  }

  const auto profile = leverage_profile(points, report.selection.counts, Scalar(cfg.delta),
                                        cfg.mode == SearchMode::Repeat);
  report.final_max_tau = profile.max_tau_candidate;
  report.tau_bound = profile.bound;
  return report;
}

}  // namespace spanvol

#endif  // SPANVOL_ENGINE_HPP
