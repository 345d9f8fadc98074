// Command-line front-end for the witness toolkit.
//
// Exit codes: 0 success, 1 validation error, 2 internal size guard.

#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ghzw/commands.hpp"

namespace {

using ghzw::cli::Command;
using ghzw::cli::OutputFormat;
using ghzw::cli::RunConfig;

void add_common_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--n", cfg.n_parties, "number of parties N");
  sub->add_option("--eps", cfg.grid.step, "grid step for the (alpha, beta, phi) scan")
      ->capture_default_str();
  sub->add_option("--refine", cfg.grid.refine_rounds, "local refinement rounds")
      ->capture_default_str();
  sub->add_option("--refine-shrink", cfg.grid.refine_shrink,
                  "window/step shrink factor per refinement round")
      ->capture_default_str();
  sub->add_option("--threshold", cfg.threshold, "ranking threshold")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ghzw::search::ThresholdMode>{
              {"asym", ghzw::search::ThresholdMode::asymptotic},
              {"exact", ghzw::search::ThresholdMode::exact}}))
      ->default_str("asym");
  sub->add_option("--format", cfg.format, "output format")
      ->transform(CLI::CheckedTransformer(std::map<std::string, OutputFormat>{
          {"table", OutputFormat::human},
          {"csv", OutputFormat::csv},
          {"json", OutputFormat::json}}))
      ->default_str("table");
  sub->add_option("--out", cfg.out_path, "write output to this file instead of stdout");
  sub->add_option("--workers", cfg.workers, "worker threads (0 = hardware)")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  sub->add_flag("--radians", cfg.radians, "also report angles in radians");
}

void add_search_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--c-mode", cfg.c_mode, "C scan policy")
      ->transform(CLI::CheckedTransformer(std::map<std::string, ghzw::search::CMode>{
          {"fixed", ghzw::search::CMode::fixed_at_size},
          {"int", ghzw::search::CMode::integer_scan},
          {"fine", ghzw::search::CMode::fine_scan}}))
      ->default_str("int");
  sub->add_option("--fine-step", cfg.fine_step, "C step for --c-mode fine")
      ->capture_default_str();
  sub->add_flag("--dedup,!--no-dedup", cfg.dedup,
                "prune equivalent setting subsets (default on)");
}

void emit(const ghzw::cli::ResultRecord& record, const RunConfig& cfg) {
  const std::string text = ghzw::cli::render(record, cfg.format);
  if (cfg.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out_path);
  if (!out) throw ghzw::ValidationError("cannot open output file " + cfg.out_path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement witness family for N-partite GHZ-like states: "
               "biseparable bounds, setting-subset search, noise thresholds "
               "and dense oracle verification"};
  app.require_subcommand(1);

  RunConfig cfg;

  CLI::App* alpha = app.add_subcommand(
      "alpha", "upper bound alpha_S^u and noise thresholds for an explicit S, C");
  add_common_options(alpha, cfg);
  alpha->add_option("--s-indices", cfg.s_indices, "measurement angle indices")
      ->delimiter(',');
  alpha->add_option("--c", cfg.c_weight, "weight C, |S| <= C <= 2|S|");

  CLI::App* searchcmd = app.add_subcommand(
      "search", "optimal settings and C for one budget |S|");
  add_common_options(searchcmd, cfg);
  add_search_options(searchcmd, cfg);
  searchcmd->add_option("--budget", cfg.budget, "number of x-y-plane settings |S|");

  CLI::App* tolerance = app.add_subcommand(
      "tolerance", "noise thresholds from an explicit alpha_u");
  add_common_options(tolerance, cfg);
  tolerance->add_option("--s-indices", cfg.s_indices, "measurement angle indices")
      ->delimiter(',');
  tolerance->add_option("--s-size", cfg.s_size, "number of settings |S|");
  tolerance->add_option("--c", cfg.c_weight, "weight C");
  tolerance->add_option("--alpha-u", cfg.alpha_override, "bound value to evaluate");

  CLI::App* verify = app.add_subcommand(
      "verify", "see-saw oracle vs bound sandwich check (N <= 8)");
  add_common_options(verify, cfg);
  verify->add_option("--s-indices", cfg.s_indices, "measurement angle indices")
      ->delimiter(',');
  verify->add_option("--c", cfg.c_weight, "weight C");
  verify->add_option("--restarts", cfg.seesaw.restarts, "see-saw restarts")
      ->capture_default_str();
  verify->add_option("--max-iters", cfg.seesaw.max_iters, "see-saw iteration cap")
      ->capture_default_str();
  verify->add_option("--tol", cfg.seesaw.convergence_tol, "see-saw convergence tolerance")
      ->capture_default_str();

  CLI::App* table = app.add_subcommand(
      "table", "optimal witness per budget 1..N");
  add_common_options(table, cfg);
  add_search_options(table, cfg);

  CLI::App* curve = app.add_subcommand(
      "curve", "noise tolerance vs budget for variable C and C=|S|");
  add_common_options(curve, cfg);
  add_search_options(curve, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  if (alpha->parsed()) cfg.command = Command::alpha;
  if (searchcmd->parsed()) cfg.command = Command::search;
  if (tolerance->parsed()) cfg.command = Command::tolerance;
  if (verify->parsed()) cfg.command = Command::verify;
  if (table->parsed()) cfg.command = Command::table;
  if (curve->parsed()) cfg.command = Command::curve;

  try {
    emit(ghzw::cli::run(cfg), cfg);
  } catch (const ghzw::SizeGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ghzw::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
