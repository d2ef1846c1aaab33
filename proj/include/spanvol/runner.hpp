#ifndef SPANVOL_RUNNER_HPP
#define SPANVOL_RUNNER_HPP

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "spanvol/experiments.hpp"
#include "spanvol/io.hpp"
#include "spanvol/mvee.hpp"
#include "spanvol/spanner.hpp"

namespace spanvol {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string subcommand;  // spanner | coreset | mvee | lowerbound | oracle
  std::string input_path;
  std::string output_path;  // empty = stdout
  double p = 2.0;
  double epsilon = 0.5;
  Index r = -1;        // optional spanner size override
  double delta = -1.;  // optional spanner swap threshold override
  std::string mode;    // "nr" | "r" | "" = subcommand default
  std::string pivot = "first";
  std::uint64_t seed = 0;
  double rank_tol = 0.0;
  double solver_tol = 1e-7;
  long max_iter = 0;
  bool symmetrize = false;  // MVEE formulas are even in v, so +-X is implicit
  int threads = 0;          // 0 = SPANVOL_THREADS env or 1
  Index k = -1;             // oracle subset size
  Index n = 1000;           // lowerbound ensemble rows
  Index d = 100;            // lowerbound ensemble dimension
};

namespace detail {

inline int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SPANVOL_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

inline PivotRule parse_pivot(const std::string& name) {
  if (name == "first") return PivotRule::FirstImproving;
  if (name == "best") return PivotRule::BestImproving;
  throw error(errc::invalid_config, "pivot must be 'first' or 'best'");
}

template <typename Derived>
json to_json_vector(const Eigen::MatrixBase<Derived>& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

template <typename Derived>
json to_json_matrix(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json_vector(m.row(i).transpose()));
  return rows;
}

inline json input_block(const RunConfig& cfg, Index n_raw, const PointSet<double>& points) {
  json block;
  block["path"] = cfg.input_path;
  block["n_raw"] = n_raw;
  block["n"] = points.n();
  block["d"] = points.ambient_dim;
  block["effective_rank"] = points.effective_rank();
  block["dropped_zero_rows"] = points.dropped_rows;
  if (!points.dropped_rows.empty()) block["index_map"] = points.source_rows;
  // Results are expressed in span coordinates when the input is rank
  // deficient; the basis maps them back to the ambient space.
  if (points.effective_rank() < points.ambient_dim) {
    block["span_basis"] = to_json_matrix(points.span_basis);
  }
  return block;
}

/// Re-derive the certificate's claims through plain loops, independent of
/// the factorizations used to build it.
inline std::vector<std::string> check_spanner(const PointSet<double>& points,
                                              const SpannerResult<double>& res) {
  std::vector<std::string> failures;
  const auto& cert = res.certificate;
  const Index s = static_cast<Index>(cert.subset.size());
  for (Index j = 0; j < points.n(); ++j) {
    VectorX<double> rebuilt = VectorX<double>::Zero(points.dim());
    for (Index t = 0; t < s; ++t) {
      rebuilt += cert.coefficients(j, t) * points.point(cert.subset[t]);
    }
    const double residual =
        (points.point(j) - rebuilt).norm() / (1.0 + points.point(j).norm());
    if (!(residual <= 1e-8)) {
      failures.push_back("reconstruction residual " + std::to_string(residual) + " at row " +
                         std::to_string(j));
      break;
    }
  }
  if (!(cert.c_achieved <= cert.c_guaranteed + 1e-8)) {
    failures.push_back("c_achieved exceeds c_guaranteed");
  }
  if (!(res.engine.final_max_tau < res.engine.tau_bound + 1e-10)) {
    failures.push_back("termination leverage rescan failed");
  }
  return failures;
}

inline std::vector<std::string> check_mvee(const PointSet<double>& points,
                                           const EllipsoidResult<double>& ell, double solver_tol,
                                           double dual) {
  std::vector<std::string> failures;
  const double k = static_cast<double>(points.dim());
  if (!ell.certified) failures.push_back("solver not certified (iteration cap)");
  double max_quadform = 0.0;
  for (Index i = 0; i < points.n(); ++i) {
    max_quadform = std::max(max_quadform, double(points.point(i).dot(ell.H * points.point(i))));
  }
  if (!(max_quadform <= k * (1.0 + 1e-8))) failures.push_back("enclosure constraint violated");
  const double gap = ell.neg_logdet - dual;
  if (!(gap >= -1e-9 && gap <= k * std::log1p(solver_tol) + 1e-9)) {
    failures.push_back("duality gap " + std::to_string(gap) + " outside certified range");
  }
  return failures;
}

inline std::vector<std::string> check_lowerbound(const EnsembleReport<double>& report) {
  std::vector<std::string> failures;
  const PointSet<double> points = sign_ensemble<double>(report.n, report.d, report.seed);
  double coherence = 0.0;
  for (Index i = 0; i < points.n(); ++i) {
    for (Index j = i + 1; j < points.n(); ++j) {
      double inner = 0.0;
      for (Index c = 0; c < points.dim(); ++c) inner += points.data(i, c) * points.data(j, c);
      coherence = std::max(coherence, std::abs(inner));
    }
  }
  if (!(std::abs(coherence - report.coherence) <= 1e-12)) {
    failures.push_back("coherence recomputation mismatch");
  }
  if (!(report.l1_certificates.minCoeff() >= 1.0 - 1e-12)) {
    failures.push_back("unit-vector certificate below 1");
  }
  return failures;
}

}  // namespace detail

/// Execute one subcommand and write the JSON result document. Returns the
/// process exit code: 0 success with verified output, 1 input/configuration
/// error, 2 verification failure.
inline int run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const int threads = detail::resolve_threads(cfg.threads);

  json doc;
  doc["schema_version"] = 1;
  std::vector<std::string> failures;

  try {
    json params;
    params["seed"] = cfg.seed;
    params["threads"] = threads;

    if (cfg.subcommand == "lowerbound") {
      if (cfg.n < 2 || cfg.d < 1) throw error(errc::invalid_config, "lowerbound: need n >= 2, d >= 1");
      params["n"] = cfg.n;
      params["d"] = cfg.d;
      const auto report = ensemble_report<double>(cfg.n, cfg.d, cfg.seed);
      failures = detail::check_lowerbound(report);
      json result;
      result["coherence"] = report.coherence;
      result["coherence_ratio"] = report.coherence_ratio;
      result["l1_certificates"] = detail::to_json_vector(report.l1_certificates);
      result["min_l1_certificate"] = report.l1_certificates.minCoeff();
      doc["input"] = {{"generated", "sign_ensemble"}, {"n", cfg.n}, {"d", cfg.d}};
      doc["params"] = params;
      doc["result"] = result;
      doc["trace"] = {{"iterations", 0}, {"logdet_trace_length", 0}};
    } else {
      const MatrixX<double> raw = parse_matrix(cfg.input_path);
      const PointSet<double> points = preprocess(raw, cfg.rank_tol);
      params["rank_tol"] = cfg.rank_tol;
      doc["input"] = detail::input_block(cfg, raw.rows(), points);

      if (cfg.subcommand == "spanner") {
        if (!cfg.mode.empty() && cfg.mode != "nr") {
          throw error(errc::invalid_config,
                      "spanner requires --mode nr; repeat-mode multisets have no subset certificate");
        }
        if (!(cfg.p >= 1.0)) throw error(errc::invalid_config, "spanner: --p must be >= 1");
        const auto res =
            build_spanner(points, cfg.p, cfg.r, detail::parse_pivot(cfg.pivot), threads, cfg.delta);
        failures = detail::check_spanner(points, res);
        params["p"] = cfg.p;
        params["r"] = res.r;
        params["delta"] = res.delta;
        params["mode"] = "nr";
        params["pivot"] = cfg.pivot;
        json result;
        result["subset"] = res.certificate.subset;
        result["norms"] = detail::to_json_vector(res.certificate.norms);
        result["c_achieved"] = res.certificate.c_achieved;
        result["c_guaranteed"] = res.certificate.c_guaranteed;
        result["max_candidate_norm"] = res.certificate.max_candidate_norm;
        result["max_reconstruction_residual"] = res.certificate.max_residual;
        result["tau_bound"] = res.engine.tau_bound;
        result["final_max_tau"] = res.engine.final_max_tau;
        doc["params"] = params;
        doc["result"] = result;
        doc["trace"] = {{"iterations", res.engine.iterations},
                        {"logdet_trace_length", res.engine.logdet_trace.size()}};
      } else if (cfg.subcommand == "coreset") {
        if (!cfg.mode.empty() && cfg.mode != "r") {
          throw error(errc::invalid_config, "coreset requires --mode r (multiset local search)");
        }
        if (cfg.r > 0 || cfg.delta > 0) {
          throw error(errc::invalid_config,
                      "coreset derives r and delta from --epsilon; do not pass --r/--delta");
        }
        const auto coreset = mvee_coreset(points, cfg.epsilon, detail::parse_pivot(cfg.pivot),
                                          true, cfg.solver_tol);
        if (!coreset.verification.ok()) failures.push_back("coreset verification failed");
        params["epsilon"] = cfg.epsilon;
        params["r"] = coreset.r;
        params["delta"] = coreset.delta;
        params["mode"] = "r";
        params["pivot"] = cfg.pivot;
        params["solver_tol"] = cfg.solver_tol;
        params["symmetrize"] = cfg.symmetrize;
        json counts = json::array();
        for (Index i : coreset.support) counts.push_back(coreset.counts(i));
        const auto& v = coreset.verification;
        json result;
        result["support"] = coreset.support;
        result["counts"] = counts;
        result["verification"] = {{"neg_logdet_x", v.neg_logdet_x},
                                  {"neg_logdet_t", v.neg_logdet_t},
                                  {"volume_gap", v.volume_gap},
                                  {"allowed_gap", v.allowed_gap},
                                  {"solver_slack", v.solver_slack},
                                  {"max_h_quadform", v.max_h_quadform},
                                  {"leverage_bound", v.leverage_bound},
                                  {"max_scaled_quadform", v.max_scaled_quadform},
                                  {"passed", v.ok()}};
        doc["params"] = params;
        doc["result"] = result;
        doc["trace"] = {{"iterations", coreset.engine.iterations},
                        {"logdet_trace_length", coreset.engine.logdet_trace.size()}};
      } else if (cfg.subcommand == "mvee") {
        const auto ell = khachiyan_mvee(points, cfg.solver_tol, cfg.max_iter);
        const double dual = dual_bound(points, ell.lambda);
        failures = detail::check_mvee(points, ell, cfg.solver_tol, dual);
        params["solver_tol"] = cfg.solver_tol;
        params["max_iter"] = cfg.max_iter;
        params["symmetrize"] = cfg.symmetrize;
        json result;
        result["H"] = detail::to_json_matrix(ell.H);
        result["neg_logdet"] = ell.neg_logdet;
        result["lambda"] = detail::to_json_vector(ell.lambda);
        result["max_violation"] = ell.max_violation;
        result["dual_bound"] = dual;
        result["certified"] = ell.certified;
        doc["params"] = params;
        doc["result"] = result;
        doc["trace"] = {{"iterations", ell.iterations}, {"logdet_trace_length", 0}};
      } else if (cfg.subcommand == "oracle") {
        if (cfg.k < 1) throw error(errc::invalid_config, "oracle: --k is required and must be >= 1");
        const auto [subset, det] = brute_force_max_det(points, cfg.k);
        const double check = gram_sum(points, [&] {
                               VectorXi counts = VectorXi::Zero(points.n());
                               for (Index i : subset) counts(i) += 1;
                               return counts;
                             }()).determinant();
        if (!(std::abs(check - det) <= 1e-12 * std::max(1.0, std::abs(det)))) {
          failures.push_back("oracle determinant recomputation mismatch");
        }
        params["k"] = cfg.k;
        doc["params"] = params;
        doc["result"] = {{"subset", subset}, {"det", det}};
        doc["trace"] = {{"iterations", 0}, {"logdet_trace_length", 0}};
      } else {
        throw error(errc::invalid_config, "unknown subcommand '" + cfg.subcommand + "'");
      }
    }
  } catch (const error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  doc["result"]["verified"] = failures.empty();
  if (!failures.empty()) doc["result"]["verification_failures"] = failures;
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start).count();
  doc["trace"]["wall_time_ms"] = ms;

  if (cfg.output_path.empty() || cfg.output_path == "-") {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(cfg.output_path);
    if (!out) {
      std::cerr << "error: cannot write '" << cfg.output_path << "'\n";
      return 1;
    }
    out << doc.dump(2) << "\n";
  }

  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "verification: " << f << "\n";
    return 2;
  }
  return 0;
}

}  // namespace spanvol

#endif  // SPANVOL_RUNNER_HPP
