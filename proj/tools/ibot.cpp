// ibot: command-line front end for the IB-OT solvers.
//
// Subcommands:
//   curve   sweep thresholds (GAS or BA slope search) or a BA beta sweep
//   point   single solve, SolverReport as JSON on stdout
//   oracle  closed-form R(I) evaluation
//   bench   GAS vs BA slope-search timing
//
// Exit codes: 0 success (including per-row infeasible results), 2 argument or
// domain errors, 3 input-file errors, 4 when every sweep point failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ibot/ba.hpp"
#include "ibot/gas.hpp"
#include "ibot/oracles.hpp"
#include "ibot/problems.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr double kLn2 = 0.6931471805599453;

// ---------------------------------------------------------------------------
// flag bundles

struct ProblemFlags {
  std::string kind = "bernoulli";
  double e = 0.15;
  double snr = 1.0;
  double half_width = 10.0;
  double step = 0.2;
  std::string data_path;
  int label_col = 0;
  bool header = false;
};

struct SolverFlags {
  std::string solver = "gas";
  ibot::gas::GasConfig gas;
  ibot::ba::SlopeSearchConfig search;
};

struct OutputFlags {
  std::string out_path;  // empty: stdout
  std::string format = "csv";
  std::string units = "nats";
};

void add_problem_flags(CLI::App& cmd, ProblemFlags& pf) {
  cmd.add_option("--problem", pf.kind, "bernoulli|gaussian|constant-slope|empirical")
      ->check(CLI::IsMember({"bernoulli", "gaussian", "constant-slope", "empirical"}));
  cmd.add_option("--e", pf.e, "Bernoulli noise parameter (default 0.15)");
  cmd.add_option("--snr", pf.snr, "Gaussian signal-to-noise ratio (default 1)");
  cmd.add_option("--half-width", pf.half_width, "Gaussian grid half width (default 10)");
  cmd.add_option("--step", pf.step, "Gaussian grid step (default 0.2)");
  cmd.add_option("--data", pf.data_path, "labeled CSV for the empirical problem");
  cmd.add_option("--label-col", pf.label_col, "zero-based label column (default 0)");
  cmd.add_flag("--header", pf.header, "skip the first CSV row");
}

void add_solver_flags(CLI::App& cmd, SolverFlags& sf) {
  cmd.add_option("--solver", sf.solver, "gas|ba (default gas)")
      ->check(CLI::IsMember({"gas", "ba"}));
  cmd.add_option("--max-iter", sf.gas.max_iter, "GAS iteration cap (default 1000)");
  cmd.add_option("--rate-tol", sf.gas.rate_tol, "successive-objective stop (nats)");
  cmd.add_option("--constraint-tol", sf.gas.constraint_tol, "|I(T;Y) - I| target");
  cmd.add_option("--bottleneck-size", sf.gas.bottleneck_size, "N (default: |X|)");
  cmd.add_option("--jitter", sf.gas.jitter_scale, "initial-w perturbation scale");
  cmd.add_option("--seed", sf.gas.rng_seed, "RNG seed for the jittered init");
  cmd.add_option("--accel-period", sf.gas.accel_period,
                 "zeta extrapolation period, 0 disables (default 50)");
  cmd.add_flag_function(
      "--unstabilized", [&sf](std::int64_t) { sf.gas.stabilized = false; },
      "run the direct (non-log-domain) kernel path");
  cmd.add_option("--search-tol", sf.search.tol, "BA slope-search |relevance - I| tolerance");
  cmd.add_option("--max-trials", sf.search.max_trials, "BA slope-search solve budget");
  cmd.add_option("--beta-max", sf.search.beta_max, "BA slope-search bracket cap");
}

void add_output_flags(CLI::App& cmd, OutputFlags& of) {
  cmd.add_option("--out", of.out_path, "output file (default stdout)");
  cmd.add_option("--format", of.format, "csv|json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd.add_option("--units", of.units, "nats|bits for information columns (default nats)")
      ->check(CLI::IsMember({"nats", "bits"}));
}

// ---------------------------------------------------------------------------
// problem construction and manifests

ibot::JointDistribution build_joint(const ProblemFlags& pf) {
  if (pf.kind == "bernoulli") return ibot::bernoulli_joint(pf.e);
  if (pf.kind == "gaussian")
    return ibot::gaussian_discretized({pf.snr, pf.half_width, pf.step});
  if (pf.kind == "constant-slope") return ibot::constant_slope_joint();
  if (pf.data_path.empty())
    throw std::domain_error("empirical problem requires --data");
  return ibot::empirical_joint(
      ibot::load_labeled_csv(pf.data_path, pf.label_col, pf.header));
}

nlohmann::json problem_manifest(const ProblemFlags& pf) {
  nlohmann::json j{{"kind", pf.kind}};
  if (pf.kind == "bernoulli") j["e"] = pf.e;
  if (pf.kind == "gaussian") {
    j["snr"] = pf.snr;
    j["half_width"] = pf.half_width;
    j["step"] = pf.step;
  }
  if (pf.kind == "empirical") {
    j["data"] = pf.data_path;
    j["label_col"] = pf.label_col;
    j["header"] = pf.header;
  }
  return j;
}

nlohmann::json solver_manifest(const SolverFlags& sf) {
  return {{"solver", sf.solver},
          {"max_iter", sf.gas.max_iter},
          {"rate_tol", sf.gas.rate_tol},
          {"constraint_tol", sf.gas.constraint_tol},
          {"newton_tol", sf.gas.newton_tol},
          {"bottleneck_size", sf.gas.bottleneck_size},
          {"jitter_scale", sf.gas.jitter_scale},
          {"stabilized", sf.gas.stabilized},
          {"accel_period", sf.gas.accel_period},
          {"search_tol", sf.search.tol},
          {"max_trials", sf.search.max_trials},
          {"beta_max", sf.search.beta_max}};
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const ProblemFlags& pf, const SolverFlags& sf, const OutputFlags& of,
                    nlohmann::json sweep) {
  if (out_path.empty()) return;
  nlohmann::json manifest{{"tool", "ibot"},
                          {"version", kToolVersion},
                          {"command", command},
                          {"problem", problem_manifest(pf)},
                          {"solver", solver_manifest(sf)},
                          {"sweep", std::move(sweep)},
                          {"seed", sf.gas.rng_seed},
                          {"format", of.format},
                          {"units", of.units},
                          {"timestamp", timestamp_utc()}};
  std::ofstream out(out_path + ".manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest next to " + out_path);
  out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// row assembly

struct Row {
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double relevance = std::numeric_limits<double>::quiet_NaN();
  double zeta = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string status;
  double marginal = std::numeric_limits<double>::quiet_NaN();
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_rows(std::ostream& os, const std::vector<Row>& rows, const OutputFlags& of) {
  const double scale = of.units == "bits" ? 1.0 / kLn2 : 1.0;
  if (of.format == "csv") {
    os << "threshold_I,rate_R,relevance,zeta,iterations,status,marginal_residual\n";
    for (const Row& r : rows)
      os << fmt(r.threshold * scale) << ',' << fmt(r.rate * scale) << ','
         << fmt(r.relevance * scale) << ',' << fmt(r.zeta) << ',' << r.iterations << ','
         << r.status << ',' << fmt(r.marginal) << '\n';
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const Row& r : rows)
      arr.push_back({{"threshold_I", r.threshold * scale},
                     {"rate_R", r.rate * scale},
                     {"relevance", r.relevance * scale},
                     {"zeta", r.zeta},
                     {"iterations", r.iterations},
                     {"status", r.status},
                     {"marginal_residual", r.marginal}});
    os << arr.dump(2) << '\n';
  }
}

void write_output(const OutputFlags& of, const std::vector<Row>& rows) {
  if (of.out_path.empty()) {
    emit_rows(std::cout, rows, of);
    return;
  }
  std::ofstream out(of.out_path);
  if (!out) throw std::runtime_error("cannot open output file " + of.out_path);
  emit_rows(out, rows, of);
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepFlags {
  std::vector<double> i_list;
  double i_min = 0.0, i_max = 0.0;
  int i_steps = 0;
  std::string beta_sweep;  // lo:hi:steps
};

std::vector<double> thresholds_of(const SweepFlags& sw) {
  if (!sw.i_list.empty()) {
    std::vector<double> ts = sw.i_list;
    std::sort(ts.begin(), ts.end());
    return ts;
  }
  if (sw.i_steps <= 0)
    throw std::domain_error("provide --i-list or --i-min/--i-max/--i-steps");
  if (!(sw.i_max >= sw.i_min)) throw std::domain_error("--i-max must be >= --i-min");
  std::vector<double> ts(sw.i_steps);
  for (int k = 0; k < sw.i_steps; ++k)
    ts[k] = sw.i_steps == 1
                ? sw.i_min
                : sw.i_min + k * (sw.i_max - sw.i_min) / (sw.i_steps - 1);
  return ts;
}

std::vector<double> betas_of(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int steps = 0;
  char colon1 = 0, colon2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> colon1 >> hi >> colon2 >> steps) || colon1 != ':' || colon2 != ':' ||
      steps <= 0 || !(hi >= lo))
    throw std::domain_error("--beta-sweep expects lo:hi:steps");
  std::vector<double> betas(steps);
  for (int k = 0; k < steps; ++k)
    betas[k] = steps == 1 ? lo : lo + k * (hi - lo) / (steps - 1);
  return betas;
}

Row gas_row(const ibot::IbProblem& problem, double threshold, const SolverFlags& sf) {
  const ibot::SolverReport rep = ibot::gas::solve(problem, sf.gas);
  Row row;
  row.threshold = threshold;
  row.rate = rep.rate;
  row.relevance = rep.relevance;
  row.zeta = rep.zeta;
  row.iterations = rep.iterations;
  row.status = ibot::to_string(rep.status);
  row.marginal = rep.residuals.marginal;
  return row;
}

Row ba_search_row(const ibot::IbProblem& problem, double threshold, const SolverFlags& sf) {
  Row row;
  row.threshold = threshold;
  ibot::ba::SlopeSearchConfig cfg = sf.search;
  cfg.ba.rng_seed = sf.gas.rng_seed;
  cfg.ba.jitter_scale = sf.gas.jitter_scale;
  const ibot::ba::SlopeSearchResult res = ibot::ba::slope_search(problem, threshold, cfg);
  row.iterations = res.trials;
  if (res.found) {
    row.rate = res.report.rate;
    row.relevance = res.report.relevance;
    row.zeta = res.beta;
    row.status = "Converged";
    row.marginal = 0.0;  // BA encoders are row-normalized by construction
  } else {
    row.status = "SearchFailed";
  }
  return row;
}

int cmd_curve(const ProblemFlags& pf, const SolverFlags& sf, const SweepFlags& sw,
              const OutputFlags& of) {
  const ibot::JointDistribution joint = build_joint(pf);
  std::vector<Row> rows;
  nlohmann::json sweep_manifest;

  if (!sw.beta_sweep.empty()) {
    if (sf.solver != "ba")
      throw std::domain_error("--beta-sweep requires --solver ba");
    const std::vector<double> betas = betas_of(sw.beta_sweep);
    sweep_manifest = {{"beta_sweep", sw.beta_sweep}};
    for (double beta : betas) {
      ibot::ba::BaConfig cfg = sf.search.ba;
      cfg.beta = beta;
      cfg.rng_seed = sf.gas.rng_seed;
      cfg.jitter_scale = sf.gas.jitter_scale;
      const ibot::IbProblem problem(joint, 0.0);
      const ibot::SolverReport rep = ibot::ba::ba_solve(problem, cfg);
      Row row;
      row.rate = rep.rate;
      row.relevance = rep.relevance;
      row.zeta = beta;
      row.iterations = rep.iterations;
      row.status = ibot::to_string(rep.status);
      row.marginal = 0.0;
      rows.push_back(row);
    }
  } else {
    const std::vector<double> thresholds = thresholds_of(sw);
    sweep_manifest = {{"i_list", thresholds}};
    const double ixy = ibot::mutual_information(joint);
    for (double threshold : thresholds) {
      if (threshold >= ixy - 1e-9) {
        Row row;
        row.threshold = threshold;
        row.status = ibot::to_string(ibot::SolverStatus::Infeasible);
        rows.push_back(row);
        continue;
      }
      const ibot::IbProblem problem(joint, threshold);
      try {
        rows.push_back(sf.solver == "gas" ? gas_row(problem, threshold, sf)
                                          : ba_search_row(problem, threshold, sf));
      } catch (const ibot::NumericalError& err) {
        Row row;
        row.threshold = threshold;
        row.status = ibot::to_string(ibot::SolverStatus::NumericalFailure);
        rows.push_back(row);
        std::cerr << "point I=" << threshold << ": " << err.what() << '\n';
      }
    }
  }

  write_output(of, rows);
  write_manifest(of.out_path, "curve", pf, sf, of, std::move(sweep_manifest));

  const bool any_usable = std::any_of(rows.begin(), rows.end(), [](const Row& r) {
    return r.status != ibot::to_string(ibot::SolverStatus::NumericalFailure);
  });
  return any_usable ? 0 : 4;
}

int cmd_point(const ProblemFlags& pf, const SolverFlags& sf, double threshold,
              const OutputFlags& of) {
  const ibot::JointDistribution joint = build_joint(pf);
  const ibot::IbProblem problem(joint, threshold);
  const ibot::SolverReport rep = ibot::gas::solve(problem, sf.gas);
  const double scale = of.units == "bits" ? 1.0 / kLn2 : 1.0;
  nlohmann::json j{{"threshold_I", threshold * scale},
                   {"rate_R", rep.rate * scale},
                   {"relevance", rep.relevance * scale},
                   {"objective", rep.objective * scale},
                   {"zeta", rep.zeta},
                   {"iterations", rep.iterations},
                   {"status", ibot::to_string(rep.status)},
                   {"residuals",
                    {{"marginal", rep.residuals.marginal},
                     {"constraint", rep.residuals.constraint},
                     {"rate_change", rep.residuals.rate_change}}}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const std::string& model, const ProblemFlags& pf,
               const std::vector<double>& i_list, const OutputFlags& of) {
  if (i_list.empty()) throw std::domain_error("oracle requires --i-list");
  std::vector<Row> rows;
  for (double threshold : i_list) {
    Row row;
    row.threshold = threshold;
    if (model == "bernoulli")
      row.rate = ibot::bernoulli_R(threshold, pf.e);
    else if (model == "gaussian")
      row.rate = ibot::gaussian_R(threshold, pf.snr);
    else
      row.rate = ibot::constant_slope_R(threshold);
    row.status = "Oracle";
    rows.push_back(row);
  }
  const double scale = of.units == "bits" ? 1.0 / kLn2 : 1.0;
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!of.out_path.empty()) {
    file.open(of.out_path);
    if (!file) throw std::runtime_error("cannot open output file " + of.out_path);
    os = &file;
  }
  *os << "threshold_I,rate_R\n";
  for (const Row& r : rows)
    *os << fmt(r.threshold * scale) << ',' << fmt(r.rate * scale) << '\n';
  return 0;
}

int cmd_bench(const ProblemFlags& pf, const SolverFlags& sf,
              const std::vector<double>& targets, int repeats, const OutputFlags& of) {
  if (targets.empty()) throw std::domain_error("bench requires --i-list");
  if (repeats < 1) throw std::domain_error("--repeats must be >= 1");
  const ibot::JointDistribution joint = build_joint(pf);

  const auto timed = [&](const auto& fn) {
    std::vector<double> seconds(repeats);
    for (int k = 0; k < repeats; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      seconds[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    const double mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / repeats;
    double var = 0.0;
    for (double s : seconds) var += (s - mean) * (s - mean);
    return std::pair<double, double>{mean, repeats > 1 ? std::sqrt(var / (repeats - 1)) : 0.0};
  };

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!of.out_path.empty()) {
    file.open(of.out_path);
    if (!file) throw std::runtime_error("cannot open output file " + of.out_path);
    os = &file;
  }
  *os << "target_I,gas_mean_s,gas_stddev_s,ba_mean_s,ba_stddev_s,ba_trials,ba_status,"
         "speedup\n";
  for (double target : targets) {
    const ibot::IbProblem problem(joint, target);
    const auto [gas_mean, gas_sd] =
        timed([&] { (void)ibot::gas::solve(problem, sf.gas); });
    ibot::ba::SlopeSearchResult last;
    ibot::ba::SlopeSearchConfig cfg = sf.search;
    cfg.ba.rng_seed = sf.gas.rng_seed;
    cfg.ba.jitter_scale = sf.gas.jitter_scale;
    const auto [ba_mean, ba_sd] =
        timed([&] { last = ibot::ba::slope_search(problem, target, cfg); });
    *os << fmt(target) << ',' << fmt(gas_mean) << ',' << fmt(gas_sd) << ',' << fmt(ba_mean)
        << ',' << fmt(ba_sd) << ',' << last.trials << ','
        << (last.found ? "Converged" : "SearchFailed") << ','
        << fmt(gas_mean > 0.0 ? ba_mean / gas_mean : 0.0) << '\n';
  }
  write_manifest(of.out_path, "bench", pf, sf, of,
                 {{"i_list", targets}, {"repeats", repeats}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IB-OT relevance-compression curve solver (GAS) with a BA baseline"};
  app.require_subcommand(1);

  ProblemFlags pf;
  SolverFlags sf;
  OutputFlags of;
  SweepFlags sw;
  double point_i = 0.0;
  std::string oracle_model = "bernoulli";
  std::vector<double> oracle_i_list;
  int repeats = 1;

  CLI::App* curve = app.add_subcommand("curve", "sweep thresholds and emit curve records");
  add_problem_flags(*curve, pf);
  add_solver_flags(*curve, sf);
  add_output_flags(*curve, of);
  curve->add_option("--i-list", sw.i_list, "comma-separated thresholds (nats)")->delimiter(',');
  curve->add_option("--i-min", sw.i_min, "sweep start");
  curve->add_option("--i-max", sw.i_max, "sweep end");
  curve->add_option("--i-steps", sw.i_steps, "sweep point count");
  curve->add_option("--beta-sweep", sw.beta_sweep, "BA beta sweep lo:hi:steps");

  CLI::App* point = app.add_subcommand("point", "single solve, JSON report on stdout");
  add_problem_flags(*point, pf);
  add_solver_flags(*point, sf);
  add_output_flags(*point, of);
  point->add_option("--i", point_i, "relevance threshold (nats)")->required();

  CLI::App* oracle = app.add_subcommand("oracle", "closed-form R(I) evaluation");
  oracle->add_option("--model", oracle_model, "bernoulli|gaussian|constant-slope")
      ->check(CLI::IsMember({"bernoulli", "gaussian", "constant-slope"}));
  oracle->add_option("--e", pf.e, "Bernoulli noise parameter");
  oracle->add_option("--snr", pf.snr, "Gaussian signal-to-noise ratio");
  oracle->add_option("--i-list", oracle_i_list, "thresholds (nats)")->delimiter(',');
  add_output_flags(*oracle, of);

  CLI::App* bench = app.add_subcommand("bench", "time GAS solve vs BA slope search");
  add_problem_flags(*bench, pf);
  add_solver_flags(*bench, sf);
  add_output_flags(*bench, of);
  bench->add_option("--i-list,--target-i-list", oracle_i_list, "target thresholds (nats)")
      ->delimiter(',');
  bench->add_option("--repeats", repeats, "runs per target (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (curve->parsed()) return cmd_curve(pf, sf, sw, of);
    if (point->parsed()) return cmd_point(pf, sf, point_i, of);
    if (oracle->parsed()) return cmd_oracle(oracle_model, pf, oracle_i_list, of);
    return cmd_bench(pf, sf, oracle_i_list, repeats, of);
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 3;
  }
}
