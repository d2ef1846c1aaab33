#include <CLI11.hpp>

#include "spanvol/runner.hpp"

namespace {

void add_common(CLI::App* cmd, spanvol::RunConfig& cfg) {
  cmd->add_option("-o,--output", cfg.output_path, "Output JSON path (default: stdout)");
  cmd->add_option("--seed", cfg.seed, "Seed recorded in params and used by generators");
  cmd->add_option("--threads", cfg.threads,
                  "Worker cap (0 = SPANVOL_THREADS env, then 1)");
}

void add_input(CLI::App* cmd, spanvol::RunConfig& cfg) {
  cmd->add_option("input", cfg.input_path, "Matrix file (CSV or whitespace, # comments)")
      ->required();
  cmd->add_option("--rank-tol", cfg.rank_tol,
                  "Relative singular-value cutoff (0 = max(n,d)*eps heuristic)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumetric spanners and MVEE coresets via one-swap local search"};
  app.require_subcommand(1);
  spanvol::RunConfig cfg;

  auto* spanner = app.add_subcommand("spanner", "Build an lp volumetric spanner with certificate");
  add_input(spanner, cfg);
  add_common(spanner, cfg);
  spanner->add_option("-p,--p", cfg.p, "Coefficient norm exponent, >= 1")->capture_default_str();
  spanner->add_option("-r,--r", cfg.r, "Override the spanner size rule");
  spanner->add_option("--delta", cfg.delta, "Override the swap improvement threshold");
  spanner->add_option("--mode", cfg.mode, "Search mode (only 'nr' is valid here)");
  spanner->add_option("--pivot", cfg.pivot, "Swap pivot rule: first | best")->capture_default_str();

  auto* coreset = app.add_subcommand("coreset", "MVEE coreset via repeat-mode local search");
  add_input(coreset, cfg);
  add_common(coreset, cfg);
  coreset->add_option("-e,--epsilon", cfg.epsilon, "Volume approximation parameter, > 0")
      ->required();
  coreset->add_option("--mode", cfg.mode, "Search mode (only 'r' is valid here)");
  coreset->add_option("--pivot", cfg.pivot, "Swap pivot rule: first | best")->capture_default_str();
  coreset->add_option("--solver-tol", cfg.solver_tol, "Verification solver tolerance")
      ->capture_default_str();
  coreset->add_flag("--symmetrize", cfg.symmetrize,
                    "Treat input as X union -X (implicit: formulas are even in v)");

  auto* mvee = app.add_subcommand("mvee", "Minimum volume enclosing ellipsoid (symmetric)");
  add_input(mvee, cfg);
  add_common(mvee, cfg);
  mvee->add_option("--solver-tol", cfg.solver_tol, "Leverage termination tolerance")
      ->capture_default_str();
  mvee->add_option("--max-iter", cfg.max_iter, "Iteration cap (0 = 100 d ln n)");
  mvee->add_flag("--symmetrize", cfg.symmetrize,
                 "Treat input as X union -X (implicit: formulas are even in v)");

  auto* lowerbound = app.add_subcommand("lowerbound", "Sign-ensemble l1 lower-bound experiment");
  add_common(lowerbound, cfg);
  lowerbound->add_option("-n,--n", cfg.n, "Ensemble size")->capture_default_str();
  lowerbound->add_option("-d,--d", cfg.d, "Ambient dimension")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Brute-force max-determinant subset");
  add_input(oracle, cfg);
  add_common(oracle, cfg);
  oracle->add_option("-k,--k", cfg.k, "Subset size to enumerate")->required();

  CLI11_PARSE(app, argc, argv);
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return spanvol::run(cfg);
}
