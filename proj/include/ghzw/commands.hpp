#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghzw/bound.hpp"
#include "ghzw/common.hpp"
#include "ghzw/oracle.hpp"
#include "ghzw/search.hpp"
#include "ghzw/settings.hpp"

// Batch front-end: each command validates its inputs, runs the underlying
// modules and returns a self-describing result record that serialises to a
// human table, CSV, or JSON.
namespace ghzw::cli {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// Oracle values this far above the bound flag a sandwich violation; matches
// the grid slack of the verification suite.
inline constexpr double kSandwichSlack = 1e-3;

enum class Command { alpha, search, tolerance, verify, table, curve };
enum class OutputFormat { human, csv, json };

struct RunConfig {
  Command command = Command::alpha;
  int n_parties = 0;
  std::vector<int> s_indices;
  int budget = 0;
  int s_size = 0;               // tolerance: |S| when no explicit indices
  double c_weight = 0.0;        // 0 = unset
  double alpha_override = -1.0; // tolerance: alpha_u to evaluate, < 0 = unset
  search::CMode c_mode = search::CMode::integer_scan;
  double fine_step = 0.1;
  bound::GridSpec grid;
  search::ThresholdMode threshold = search::ThresholdMode::asymptotic;
  OutputFormat format = OutputFormat::human;
  std::string out_path;
  int workers = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 1;
  bool dedup = true;
  bool radians = false;
  oracle::SeesawConfig seesaw;
};

struct ResultRecord {
  std::string schema_version = kSchemaVersion;
  std::string command;
  json inputs;
  json outputs;
  json provenance;

  bool operator==(const ResultRecord&) const = default;
};

inline json to_json(const ResultRecord& r) {
  return json{{"schema_version", r.schema_version},
              {"command", r.command},
              {"inputs", r.inputs},
              {"outputs", r.outputs},
              {"provenance", r.provenance}};
}

inline ResultRecord record_from_json(const json& j) {
  ResultRecord r;
  r.schema_version = j.at("schema_version").get<std::string>();
  require(r.schema_version == kSchemaVersion,
          "unsupported schema_version " + r.schema_version);
  r.command = j.at("command").get<std::string>();
  r.inputs = j.at("inputs");
  r.outputs = j.at("outputs");
  r.provenance = j.at("provenance");
  return r;
}

namespace detail {

inline std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string angles_csv(const std::vector<int>& idx) {
  std::string out = "[";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(idx[i]);
  }
  out += ']';
  return out;
}

inline std::string angles_human(const std::vector<int>& idx) {
  std::string out = "[";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(idx[i]);
  }
  out += ']';
  return out;
}

inline json angles_radians(const std::vector<int>& idx, int n) {
  json out = json::array();
  for (int j : idx) out.push_back(setting_angle(j, n));
  return out;
}

inline json grid_json(const bound::GridSpec& g) {
  return json{{"eps", g.step},
              {"refine_rounds", g.refine_rounds},
              {"refine_shrink", g.refine_shrink}};
}

inline bound::GridSpec grid_checked(const RunConfig& cfg) {
  bound::validate(cfg.grid);
  return cfg.grid;
}

inline json candidate_json(const search::WitnessCandidate& cand, bool radians) {
  json j{{"n", cand.n_parties},
         {"angles", cand.settings.indices},
         {"c", cand.c_weight},
         {"alpha_upper", cand.alpha_upper},
         {"p_asymptotic", cand.p_asymptotic},
         {"p_exact", cand.p_exact},
         {"detecting", cand.detecting}};
  if (radians)
    j["angles_radians"] = angles_radians(cand.settings.indices, cand.n_parties);
  return j;
}

inline json report_json(const search::SearchReport& report, bool radians) {
  json ties = json::array();
  for (const auto& cand : report.ties) ties.push_back(candidate_json(cand, radians));
  return json{{"budget", report.budget},
              {"best", candidate_json(report.best, radians)},
              {"ties", std::move(ties)},
              {"n_ties", report.ties.size()},
              {"scanned", report.scanned},
              {"pruned", report.pruned}};
}

inline search::SearchConfig search_config(const RunConfig& cfg) {
  search::SearchConfig sc;
  sc.c_mode = cfg.c_mode;
  sc.fine_step = cfg.fine_step;
  sc.grid = grid_checked(cfg);
  sc.dedup = cfg.dedup;
  sc.rank_by = cfg.threshold;
  sc.workers = cfg.workers;
  return sc;
}

inline const char* threshold_name(search::ThresholdMode m) {
  return m == search::ThresholdMode::asymptotic ? "asymptotic" : "exact";
}

inline const char* c_mode_name(search::CMode m) {
  switch (m) {
    case search::CMode::fixed_at_size: return "fixed";
    case search::CMode::integer_scan: return "int";
    case search::CMode::fine_scan: return "fine";
  }
  return "?";
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// Bound plus both noise thresholds for an explicit (S, C).
inline ResultRecord cmd_alpha(const RunConfig& cfg) {
  require(cfg.n_parties >= 2, "alpha requires --n");
  require(!cfg.s_indices.empty(), "alpha requires --s-indices");
  require(cfg.c_weight > 0.0, "alpha requires --c");
  const SettingSet s = make_setting_set(cfg.n_parties, cfg.s_indices);
  const bound::GridSpec grid = detail::grid_checked(cfg);
  detail::Stopwatch timer;
  const bound::BoundResult result = bound::alpha_upper(s, cfg.c_weight, grid, cfg.workers);
  const auto cand = search::make_candidate(s, cfg.c_weight, result.alpha_upper);

  ResultRecord record;
  record.command = "alpha";
  record.inputs = {{"n", cfg.n_parties},
                   {"s_indices", s.indices},
                   {"c", cfg.c_weight},
                   {"grid", detail::grid_json(grid)},
                   {"workers", cfg.workers},
                   {"seed", cfg.seed}};
  record.outputs = detail::candidate_json(cand, cfg.radians);
  record.outputs["arg_best"] = {{"k", result.arg_best.k},
                                {"a1_abs", result.arg_best.a1_abs},
                                {"an_abs", result.arg_best.an_abs},
                                {"phase", result.arg_best.phase}};
  record.provenance = {{"grid", detail::grid_json(grid)},
                       {"evaluations", result.evaluations},
                       {"wall_time_ms", timer.elapsed_ms()}};
  return record;
}

// Optimal (S, C) for one budget.
inline ResultRecord cmd_search(const RunConfig& cfg) {
  require(cfg.n_parties >= 2, "search requires --n");
  require(cfg.budget >= 1, "search requires --budget");
  const search::SearchConfig sc = detail::search_config(cfg);
  detail::Stopwatch timer;
  const search::SearchReport report =
      search::search_optimal(cfg.n_parties, cfg.budget, sc);

  ResultRecord record;
  record.command = "search";
  record.inputs = {{"n", cfg.n_parties},
                   {"budget", cfg.budget},
                   {"c_mode", detail::c_mode_name(cfg.c_mode)},
                   {"threshold", detail::threshold_name(cfg.threshold)},
                   {"dedup", cfg.dedup},
                   {"grid", detail::grid_json(sc.grid)},
                   {"workers", cfg.workers},
                   {"seed", cfg.seed}};
  record.outputs = detail::report_json(report, cfg.radians);
  record.provenance = {{"grid", detail::grid_json(sc.grid)},
                       {"scanned", report.scanned},
                       {"pruned", report.pruned},
                       {"wall_time_ms", timer.elapsed_ms()}};
  return record;
}

// Threshold formulas for a given alpha_u; no grid work.
inline ResultRecord cmd_tolerance(const RunConfig& cfg) {
  require(cfg.n_parties >= 2, "tolerance requires --n");
  require(cfg.c_weight > 0.0, "tolerance requires --c");
  require(cfg.alpha_override >= 0.0, "tolerance requires --alpha-u");
  int size_s = cfg.s_size;
  if (!cfg.s_indices.empty()) {
    const SettingSet s = make_setting_set(cfg.n_parties, cfg.s_indices);
    size_s = s.size();
  }
  require(size_s >= 1, "tolerance requires --s-size or --s-indices");

  detail::Stopwatch timer;
  const double p_asym =
      search::noise_threshold_asymptotic(cfg.alpha_override, size_s, cfg.c_weight);
  const double p_exact = search::noise_threshold_exact(cfg.alpha_override, size_s,
                                                       cfg.c_weight, cfg.n_parties);

  ResultRecord record;
  record.command = "tolerance";
  record.inputs = {{"n", cfg.n_parties},
                   {"s_size", size_s},
                   {"c", cfg.c_weight},
                   {"alpha_u", cfg.alpha_override}};
  record.outputs = {{"p_asymptotic", p_asym},
                    {"p_exact", p_exact},
                    {"detecting",
                     search::is_detecting(cfg.alpha_override, size_s, cfg.c_weight)}};
  record.provenance = {{"wall_time_ms", timer.elapsed_ms()}};
  return record;
}

// Oracle vs bound cross-check on one (S, C).
inline ResultRecord cmd_verify(const RunConfig& cfg) {
  require(cfg.n_parties >= 2, "verify requires --n");
  require(!cfg.s_indices.empty(), "verify requires --s-indices");
  require(cfg.c_weight > 0.0, "verify requires --c");
  const SettingSet s = make_setting_set(cfg.n_parties, cfg.s_indices);
  const bound::GridSpec grid = detail::grid_checked(cfg);
  oracle::SeesawConfig seesaw = cfg.seesaw;
  seesaw.rng_seed = cfg.seed;

  detail::Stopwatch timer;
  const oracle::OracleReport lower = oracle::alpha_oracle(s, cfg.c_weight, seesaw, cfg.workers);
  const bound::BoundResult upper = bound::alpha_upper(s, cfg.c_weight, grid, cfg.workers);
  const bool sandwich_ok = lower.alpha_best <= upper.alpha_upper + kSandwichSlack;

  json per_k = json::array();
  for (const auto& part : lower.per_k)
    per_k.push_back({{"k", part.k},
                     {"f_value", part.f_value},
                     {"converged", part.converged},
                     {"restarts_used", part.restarts_used}});

  ResultRecord record;
  record.command = "verify";
  record.inputs = {{"n", cfg.n_parties},
                   {"s_indices", s.indices},
                   {"c", cfg.c_weight},
                   {"grid", detail::grid_json(grid)},
                   {"restarts", seesaw.restarts},
                   {"max_iters", seesaw.max_iters},
                   {"convergence_tol", seesaw.convergence_tol},
                   {"workers", cfg.workers},
                   {"seed", cfg.seed}};
  record.outputs = {{"alpha_oracle", lower.alpha_best},
                    {"alpha_upper", upper.alpha_upper},
                    {"gap", upper.alpha_upper - lower.alpha_best},
                    {"sandwich_ok", sandwich_ok},
                    {"per_k", std::move(per_k)}};
  record.provenance = {{"grid", detail::grid_json(grid)},
                       {"evaluations", upper.evaluations},
                       {"oracle_iterations", lower.iterations_total},
                       {"wall_time_ms", timer.elapsed_ms()}};
  return record;
}

// One optimal-witness row per budget 1..N.
inline ResultRecord cmd_table(const RunConfig& cfg) {
  require(cfg.n_parties >= 2, "table requires --n");
  const search::SearchConfig sc = detail::search_config(cfg);

  detail::Stopwatch timer;
  json rows = json::array();
  std::uint64_t scanned = 0, pruned = 0;
  for (int budget = 1; budget <= cfg.n_parties; ++budget) {
    const auto report = search::search_optimal(cfg.n_parties, budget, sc);
    scanned += report.scanned;
    pruned += report.pruned;
    const double p = cfg.threshold == search::ThresholdMode::asymptotic
                         ? report.best.p_asymptotic
                         : report.best.p_exact;
    json row = {{"budget", budget},
                {"p", p},
                {"angles", report.best.settings.indices},
                {"c_opt", report.best.c_weight},
                {"n_ties", report.ties.size()},
                {"best", detail::candidate_json(report.best, cfg.radians)},
                {"ties", detail::report_json(report, cfg.radians)["ties"]}};
    rows.push_back(std::move(row));
  }

  ResultRecord record;
  record.command = "table";
  record.inputs = {{"n", cfg.n_parties},
                   {"c_mode", detail::c_mode_name(cfg.c_mode)},
                   {"threshold", detail::threshold_name(cfg.threshold)},
                   {"dedup", cfg.dedup},
                   {"grid", detail::grid_json(sc.grid)},
                   {"workers", cfg.workers},
                   {"seed", cfg.seed}};
  record.outputs = {{"rows", std::move(rows)}};
  record.provenance = {{"grid", detail::grid_json(sc.grid)},
                       {"scanned", scanned},
                       {"pruned", pruned},
                       {"wall_time_ms", timer.elapsed_ms()}};
  return record;
}

// Noise tolerance versus budget for both C policies.
inline ResultRecord cmd_curve(const RunConfig& cfg) {
  require(cfg.n_parties >= 2, "curve requires --n");
  const search::SearchConfig sc = detail::search_config(cfg);

  detail::Stopwatch timer;
  const auto curve = search::tradeoff_curve(cfg.n_parties, sc);
  json rows = json::array();
  for (const auto& point : curve) {
    const bool asym = cfg.threshold == search::ThresholdMode::asymptotic;
    const double p_var = asym ? point.variable_c.best.p_asymptotic
                              : point.variable_c.best.p_exact;
    const double p_fix = asym ? point.fixed_c.best.p_asymptotic
                              : point.fixed_c.best.p_exact;
    rows.push_back({{"budget", point.variable_c.budget},
                    {"p_variable_c", p_var},
                    {"p_fixed_c", p_fix},
                    {"best_variable", detail::candidate_json(point.variable_c.best, cfg.radians)},
                    {"best_fixed", detail::candidate_json(point.fixed_c.best, cfg.radians)}});
  }

  ResultRecord record;
  record.command = "curve";
  record.inputs = {{"n", cfg.n_parties},
                   {"c_mode", detail::c_mode_name(cfg.c_mode)},
                   {"threshold", detail::threshold_name(cfg.threshold)},
                   {"dedup", cfg.dedup},
                   {"grid", detail::grid_json(sc.grid)},
                   {"workers", cfg.workers},
                   {"seed", cfg.seed}};
  record.outputs = {{"rows", std::move(rows)}};
  record.provenance = {{"grid", detail::grid_json(sc.grid)},
                       {"wall_time_ms", timer.elapsed_ms()}};
  return record;
}

inline ResultRecord run(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::alpha: return cmd_alpha(cfg);
    case Command::search: return cmd_search(cfg);
    case Command::tolerance: return cmd_tolerance(cfg);
    case Command::verify: return cmd_verify(cfg);
    case Command::table: return cmd_table(cfg);
    case Command::curve: return cmd_curve(cfg);
  }
  throw ValidationError("unknown command");
}

inline std::string to_csv(const ResultRecord& r) {
  using detail::compact;
  using detail::fixed3;
  std::string out;
  if (r.command == "table") {
    out = "k,p,angles,C_opt,n_ties\n";
    for (const auto& row : r.outputs.at("rows")) {
      out += std::to_string(row.at("budget").get<int>()) + ',' +
             fixed3(row.at("p").get<double>()) + ',' +
             detail::angles_csv(row.at("angles").get<std::vector<int>>()) + ',' +
             compact(row.at("c_opt").get<double>()) + ',' +
             std::to_string(row.at("n_ties").get<std::uint64_t>()) + '\n';
    }
  } else if (r.command == "curve") {
    out = "k,p_variable_C,p_fixed_C\n";
    for (const auto& row : r.outputs.at("rows")) {
      out += std::to_string(row.at("budget").get<int>()) + ',' +
             fixed3(row.at("p_variable_c").get<double>()) + ',' +
             fixed3(row.at("p_fixed_c").get<double>()) + '\n';
    }
  } else if (r.command == "search") {
    out = "k,p,angles,C_opt,n_ties\n";
    const auto& rep = r.outputs;
    const auto& best = rep.at("best");
    const bool exact = r.inputs.value("threshold", "asymptotic") == std::string("exact");
    const double p = best.at(exact ? "p_exact" : "p_asymptotic").get<double>();
    out += std::to_string(rep.at("budget").get<int>()) + ',' + fixed3(p) + ',' +
           detail::angles_csv(best.at("angles").get<std::vector<int>>()) + ',' +
           compact(best.at("c").get<double>()) + ',' +
           std::to_string(rep.at("n_ties").get<std::uint64_t>()) + '\n';
  } else if (r.command == "alpha") {
    out = "n,s,c,alpha_upper,p_asymptotic,p_exact,detecting\n";
    const auto& o = r.outputs;
    out += std::to_string(o.at("n").get<int>()) + ',' +
           detail::angles_csv(o.at("angles").get<std::vector<int>>()) + ',' +
           compact(o.at("c").get<double>()) + ',' +
           compact(o.at("alpha_upper").get<double>()) + ',' +
           compact(o.at("p_asymptotic").get<double>()) + ',' +
           compact(o.at("p_exact").get<double>()) + ',' +
           (o.at("detecting").get<bool>() ? "1" : "0") + '\n';
  } else if (r.command == "verify") {
    out = "n,s,c,alpha_oracle,alpha_upper,sandwich_ok\n";
    const auto& in = r.inputs;
    const auto& o = r.outputs;
    out += std::to_string(in.at("n").get<int>()) + ',' +
           detail::angles_csv(in.at("s_indices").get<std::vector<int>>()) + ',' +
           compact(in.at("c").get<double>()) + ',' +
           compact(o.at("alpha_oracle").get<double>()) + ',' +
           compact(o.at("alpha_upper").get<double>()) + ',' +
           (o.at("sandwich_ok").get<bool>() ? "1" : "0") + '\n';
  } else if (r.command == "tolerance") {
    out = "n,s_size,c,alpha_u,p_asymptotic,p_exact,detecting\n";
    const auto& in = r.inputs;
    const auto& o = r.outputs;
    out += std::to_string(in.at("n").get<int>()) + ',' +
           std::to_string(in.at("s_size").get<int>()) + ',' +
           compact(in.at("c").get<double>()) + ',' +
           compact(in.at("alpha_u").get<double>()) + ',' +
           compact(o.at("p_asymptotic").get<double>()) + ',' +
           compact(o.at("p_exact").get<double>()) + ',' +
           (o.at("detecting").get<bool>() ? "1" : "0") + '\n';
  } else {
    throw ValidationError("no CSV form for command " + r.command);
  }
  return out;
}

inline std::string to_human(const ResultRecord& r) {
  using detail::compact;
  using detail::fixed3;
  std::string out;
  char line[256];
  if (r.command == "table") {
    std::snprintf(line, sizeof(line), "%-4s %-7s %-34s %-6s %s\n", "|S|", "p",
                  "Measurement angles", "C_opt", "ties");
    out += line;
    for (const auto& row : r.outputs.at("rows")) {
      std::snprintf(line, sizeof(line), "%-4d %-7s %-34s %-6s %llu\n",
                    row.at("budget").get<int>(),
                    fixed3(row.at("p").get<double>()).c_str(),
                    detail::angles_human(row.at("angles").get<std::vector<int>>()).c_str(),
                    compact(row.at("c_opt").get<double>()).c_str(),
                    static_cast<unsigned long long>(row.at("n_ties").get<std::uint64_t>()));
      out += line;
    }
  } else if (r.command == "curve") {
    std::snprintf(line, sizeof(line), "%-4s %-12s %s\n", "|S|", "p(var C)",
                  "p(C=|S|)");
    out += line;
    for (const auto& row : r.outputs.at("rows")) {
      std::snprintf(line, sizeof(line), "%-4d %-12s %s\n",
                    row.at("budget").get<int>(),
                    fixed3(row.at("p_variable_c").get<double>()).c_str(),
                    fixed3(row.at("p_fixed_c").get<double>()).c_str());
      out += line;
    }
  } else if (r.command == "search") {
    const auto& best = r.outputs.at("best");
    out += "budget      : " + std::to_string(r.outputs.at("budget").get<int>()) + '\n';
    out += "best S      : " +
           detail::angles_human(best.at("angles").get<std::vector<int>>()) + '\n';
    out += "C_opt       : " + compact(best.at("c").get<double>()) + '\n';
    out += "alpha_upper : " + compact(best.at("alpha_upper").get<double>()) + '\n';
    out += "p_asymptotic: " + compact(best.at("p_asymptotic").get<double>()) + '\n';
    out += "p_exact     : " + compact(best.at("p_exact").get<double>()) + '\n';
    out += "ties        : " + std::to_string(r.outputs.at("n_ties").get<std::uint64_t>()) + '\n';
  } else if (r.command == "alpha") {
    const auto& o = r.outputs;
    out += "S           : " + detail::angles_human(o.at("angles").get<std::vector<int>>()) + '\n';
    out += "C           : " + compact(o.at("c").get<double>()) + '\n';
    out += "alpha_upper : " + compact(o.at("alpha_upper").get<double>()) + '\n';
    out += "p_asymptotic: " + compact(o.at("p_asymptotic").get<double>()) + '\n';
    out += "p_exact     : " + compact(o.at("p_exact").get<double>()) + '\n';
    out += "detecting   : " + std::string(o.at("detecting").get<bool>() ? "yes" : "no") + '\n';
    if (r.inputs.contains("s_indices") && o.contains("angles_radians")) {
      out += "angles (rad): ";
      for (const auto& v : o.at("angles_radians")) out += compact(v.get<double>()) + " ";
      out += '\n';
    }
  } else if (r.command == "verify") {
    const auto& o = r.outputs;
    out += "alpha_oracle: " + compact(o.at("alpha_oracle").get<double>()) + '\n';
    out += "alpha_upper : " + compact(o.at("alpha_upper").get<double>()) + '\n';
    out += "gap         : " + compact(o.at("gap").get<double>()) + '\n';
    out += "sandwich_ok : " + std::string(o.at("sandwich_ok").get<bool>() ? "yes" : "no") + '\n';
    for (const auto& part : o.at("per_k"))
      out += "  k=" + std::to_string(part.at("k").get<int>()) + "  f=" +
             compact(part.at("f_value").get<double>()) +
             (part.at("converged").get<bool>() ? "  (converged)\n" : "  (not converged)\n");
  } else if (r.command == "tolerance") {
    const auto& o = r.outputs;
    out += "p_asymptotic: " + compact(o.at("p_asymptotic").get<double>()) + '\n';
    out += "p_exact     : " + compact(o.at("p_exact").get<double>()) + '\n';
    out += "detecting   : " + std::string(o.at("detecting").get<bool>() ? "yes" : "no") + '\n';
  }
  return out;
}

inline std::string render(const ResultRecord& r, OutputFormat format) {
  switch (format) {
    case OutputFormat::human: return to_human(r);
    case OutputFormat::csv: return to_csv(r);
    case OutputFormat::json: return to_json(r).dump(2) + "\n";
  }
  return {};
}

}  // namespace ghzw::cli
