// lowrank: single recoveries and CSV experiment tables.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lowrank/bench.hpp"
#include "lowrank/csv.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/measure.hpp"
#include "lowrank/recover.hpp"

namespace {

using namespace lowrank;

struct RecoverOptions {
  int n1 = 20;
  int n2 = 20;
  int rank = 2;
  int m = 400;
  std::optional<std::uint64_t> seed;
  double noise_l1 = 0.0;
  std::string algorithm = "miht";
  std::optional<int> s;
  std::string t = "all";
  double gamma = 3.0;
  std::string policy = "adaptive";
  double beta = 1.0;
  double step_scale = 1.0;
  int max_iter = 500;
  double tol_residual = 1e-10;
  double tol_change = 1e-8;
  bool condsri_stop = false;
  std::string map_path;
  std::string measurements_path;
  std::string truth_path;
  std::string trace_path;
  std::string map_out;
  std::string out;
};

// Raw text of the list-valued experiment flags; parsed after CLI11 is done.
struct ExperimentOptions {
  ExperimentSpec spec;
  std::optional<std::uint64_t> seed;
  std::string m_values;
  std::string s_values = "all";
  std::string t_values = "all";
  std::string noise = "0.01,0.02,0.04,0.08";
  std::string n_values = "10,20,40";
  std::string algorithms;
  std::string dist = "gaussian";
};

std::vector<std::string> fields(const std::string& text) {
  std::vector<std::string> out;
  for (auto& f : csv::split(text, ',')) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(f.substr(first, last - first + 1));
  }
  return out;
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : csv::parse_row(text)) {
    if (v != static_cast<int>(v)) throw ParameterError("expected integers, got '" + text + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<RankParam> rank_list(const std::string& text) {
  std::vector<RankParam> out;
  for (const auto& f : fields(text)) out.push_back(parse_rank_param(f));
  return out;
}

std::vector<Algorithm> algorithm_list(const std::string& text) {
  std::vector<Algorithm> out;
  for (const auto& f : fields(text)) out.push_back(parse_algorithm(f));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw ParameterError("cannot open '" + path + "' for writing");
  file << text;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParameterError("cannot open '" + path + "'");
  return file;
}

Vector read_vector(const std::string& path) {
  auto file = open_input(path);
  std::vector<double> values;
  std::string line;
  while (std::getline(file, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (double v : csv::parse_row(line)) values.push_back(v);
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

int run_recover(const RecoverOptions& o) {
  std::optional<MeasurementMap> map;
  Vector y;
  std::optional<Matrix> truth;
  if (!o.map_path.empty()) {
    if (o.measurements_path.empty()) throw ParameterError("--map needs --measurements");
    auto file = open_input(o.map_path);
    map = read_map(file);
    y = read_vector(o.measurements_path);
    if (y.size() != map->m()) throw ParameterError("measurement count does not match the map");
    if (!o.truth_path.empty()) {
      auto truth_file = open_input(o.truth_path);
      truth = read_matrix_csv(truth_file);
    }
  } else {
    if (!o.seed) throw ParameterError("a planted instance needs --seed");
    auto inst = make_planted_instance(o.n1, o.n2, o.rank, o.m, RngSeed{*o.seed}, o.noise_l1);
    map = std::move(inst.map);
    y = std::move(inst.y);
    truth = std::move(inst.truth);
  }

  const StopRule stop{o.max_iter, o.tol_residual, o.tol_change};
  RecoveryResult result;
  if (o.algorithm == "miht") {
    MihtConfig cfg;
    cfg.target_rank = o.rank;
    cfg.thresh_s = o.s.value_or(o.rank);
    cfg.thresh_t = parse_rank_param(o.t);
    cfg.gamma = o.gamma;
    if (o.policy == "adaptive") {
      cfg.stepsize_policy = StepsizePolicy::adaptive;
    } else if (o.policy == "fixed") {
      cfg.stepsize_policy = StepsizePolicy::fixed;
    } else {
      throw ParameterError("unknown stepsize policy '" + o.policy + "'");
    }
    cfg.fixed_beta = o.beta;
    cfg.step_scale = o.step_scale;
    cfg.max_iter = o.max_iter;
    cfg.tol_residual = o.tol_residual;
    cfg.tol_change = o.tol_change;
    cfg.enable_condsri_stop = o.condsri_stop;
    result = miht(*map, y, cfg, truth);
  } else if (o.algorithm == "iht") {
    result = iht_classic(*map, y, o.rank, natural_iht_stepsize(*map), stop, truth);
  } else if (o.algorithm == "niht") {
    result = niht(*map, y, o.rank, stop, truth);
  } else {
    throw ParameterError("unknown algorithm '" + o.algorithm + "' (miht, iht, niht)");
  }

  if (!o.trace_path.empty()) {
    std::ostringstream trace;
    write_trace_csv(trace, result);
    write_text(o.trace_path, trace.str());
  }
  if (!o.map_out.empty()) {
    std::ostringstream text;
    write_map(text, *map);
    write_text(o.map_out, text.str());
  }
  if (!o.out.empty()) {
    std::ostringstream text;
    write_matrix_csv(text, result.final_iterate);
    write_text(o.out, text.str());
  }

  std::cerr << "stop=" << to_string(result.stop_reason) << " iterations=" << result.iterations_used
            << " l1_residual=" << csv::format(result.trace.back().l1_residual);
  if (truth) {
    std::cerr << " rel_error=" << csv::format(relative_error(*truth, result.final_iterate));
  }
  std::cerr << '\n';
  return 0;
}

int run_experiment_command(ExperimentOptions o, Experiment experiment) {
  ExperimentSpec& spec = o.spec;
  spec.experiment = experiment;
  if (!o.seed) throw ParameterError("--seed is required");
  spec.seed = RngSeed{*o.seed};
  if (!o.m_values.empty()) spec.m_values = int_list(o.m_values);
  spec.s_values = rank_list(o.s_values);
  spec.t_values = rank_list(o.t_values);
  spec.noise_l1_values = csv::parse_row(o.noise);
  spec.n_values = int_list(o.n_values);
  if (!o.algorithms.empty()) spec.algorithms = algorithm_list(o.algorithms);
  spec.dist = parse_distribution(o.dist);
  if (experiment == Experiment::st_grid && o.s_values == "all") {
    spec.s_values = {spec.rank};
  }
  write_text(spec.output_path, run_experiment(spec));
  return 0;
}

void add_experiment_flags(CLI::App* cmd, ExperimentOptions& o) {
  cmd->add_option("--seed", o.seed, "Base seed (required)");
  cmd->add_option("--n1", o.spec.n1, "Rows N1")->capture_default_str();
  cmd->add_option("--n2", o.spec.n2, "Columns N2")->capture_default_str();
  cmd->add_option("-r,--rank", o.spec.rank, "Target rank r")->capture_default_str();
  cmd->add_option("--trials", o.spec.trials, "Trials per grid cell")->capture_default_str();
  cmd->add_option("--success-threshold", o.spec.success_threshold,
                  "Relative Frobenius error counted as success")
      ->capture_default_str();
  cmd->add_option("--gamma", o.spec.gamma, "gamma used by the MIHT stepsize")
      ->capture_default_str();
  cmd->add_option("--max-iter", o.spec.max_iter, "Iteration cap")->capture_default_str();
  cmd->add_option("--workers", o.spec.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_option("--out", o.spec.output_path, "CSV output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix recovery from l1-robust measurements"};
  app.set_config("--config", "", "key=value file with option defaults");
  app.require_subcommand(1);

  RecoverOptions rec;
  auto* recover = app.add_subcommand("recover", "Recover one planted or file-given instance");
  recover->add_option("--n1", rec.n1, "Rows N1")->capture_default_str();
  recover->add_option("--n2", rec.n2, "Columns N2")->capture_default_str();
  recover->add_option("-r,--rank", rec.rank, "Target rank r")->capture_default_str();
  recover->add_option("-m", rec.m, "Number of measurements")->capture_default_str();
  recover->add_option("--seed", rec.seed, "Seed of the planted instance");
  recover->add_option("--noise-l1", rec.noise_l1, "l1 norm of the planted noise")
      ->capture_default_str();
  recover->add_option("--algorithm", rec.algorithm, "miht, iht or niht")->capture_default_str();
  recover->add_option("-s", rec.s, "Outer threshold s (default r)");
  recover->add_option("-t", rec.t, "Inner threshold t or 'all'")->capture_default_str();
  recover->add_option("--gamma", rec.gamma, "gamma used by the stepsize")->capture_default_str();
  recover->add_option("--policy", rec.policy, "adaptive or fixed")->capture_default_str();
  recover->add_option("--beta", rec.beta, "beta for the fixed policy")->capture_default_str();
  recover->add_option("--step-scale", rec.step_scale, "Multiplier on every stepsize")
      ->capture_default_str();
  recover->add_option("--max-iter", rec.max_iter, "Iteration cap")->capture_default_str();
  recover->add_option("--tol-residual", rec.tol_residual, "Relative l1 residual tolerance")
      ->capture_default_str();
  recover->add_option("--tol-change", rec.tol_change, "Iterate change tolerance")
      ->capture_default_str();
  recover->add_flag("--condsri-stop", rec.condsri_stop, "Stop when condsri fires");
  recover->add_option("--map", rec.map_path, "Measurement map file");
  recover->add_option("--measurements", rec.measurements_path, "Measurement vector file");
  recover->add_option("--truth", rec.truth_path, "Ground truth matrix CSV");
  recover->add_option("--trace", rec.trace_path, "Per-iteration trace CSV");
  recover->add_option("--map-out", rec.map_out, "Write the measurement map here");
  recover->add_option("--out", rec.out, "Write the final iterate here (CSV)");

  ExperimentOptions st, phase, robust, timing, rrip;

  auto* st_cmd = app.add_subcommand("st-grid", "Success counts over an (s, t) grid");
  add_experiment_flags(st_cmd, st);
  st_cmd->add_option("-m", st.m_values, "Number of measurements")->default_str("400");
  st_cmd->add_option("--s-values", st.s_values, "Comma list of s (default r)");
  st_cmd->add_option("--t-values", st.t_values, "Comma list of t or 'all'")
      ->capture_default_str();

  auto* phase_cmd = app.add_subcommand("phase", "Success counts over an m grid");
  add_experiment_flags(phase_cmd, phase);
  phase.m_values = "80,160,240,320,400";
  phase.algorithms = "miht_default,miht_r_2r,iht,niht";
  phase_cmd->add_option("--m-values", phase.m_values, "Comma list of m")->capture_default_str();
  phase_cmd->add_option("--algorithms", phase.algorithms, "Comma list of algorithms")
      ->capture_default_str();

  auto* robust_cmd = app.add_subcommand("robustness", "Recovery error over a noise grid");
  add_experiment_flags(robust_cmd, robust);
  robust.algorithms = "miht_default";
  robust_cmd->add_option("-m", robust.m_values, "Number of measurements")->default_str("400");
  robust_cmd->add_option("--noise", robust.noise, "Comma list of l1 noise levels")
      ->capture_default_str();
  robust_cmd->add_option("--algorithms", robust.algorithms, "Comma list of algorithms")
      ->capture_default_str();

  auto* timing_cmd = app.add_subcommand("timing", "Wall time and iterations over N");
  add_experiment_flags(timing_cmd, timing);
  timing.algorithms = "miht_default,miht_r_2r";
  timing.spec.trials = 5;
  timing_cmd->add_option("--n-values", timing.n_values, "Comma list of N")->capture_default_str();
  timing_cmd->add_option("--m-factor", timing.spec.m_factor, "m = ceil(factor * r * N)")
      ->capture_default_str();
  timing_cmd->add_option("--algorithms", timing.algorithms, "Comma list of algorithms")
      ->capture_default_str();

  auto* rrip_cmd = app.add_subcommand("rrip-curve", "gamma_hat of dense maps over an m grid");
  add_experiment_flags(rrip_cmd, rrip);
  rrip.spec.n1 = rrip.spec.n2 = 15;
  rrip.spec.rank = 1;
  rrip.spec.trials = 10;
  rrip.m_values = "30,60,120,240";
  rrip_cmd->add_option("--m-values", rrip.m_values, "Comma list of m")->capture_default_str();
  rrip_cmd->add_option("--dist", rrip.dist, "gaussian or laplace")->capture_default_str();
  rrip_cmd->add_option("--samples", rrip.spec.rrip_samples, "Samples per estimate")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (recover->parsed()) return run_recover(rec);
    if (st_cmd->parsed()) return run_experiment_command(st, Experiment::st_grid);
    if (phase_cmd->parsed()) return run_experiment_command(phase, Experiment::phase);
    if (robust_cmd->parsed()) return run_experiment_command(robust, Experiment::robustness);
    if (timing_cmd->parsed()) return run_experiment_command(timing, Experiment::timing);
    if (rrip_cmd->parsed()) {
      if (rrip.spec.n1 != rrip.spec.n2) throw ParameterError("rrip-curve needs --n1 == --n2");
      return run_experiment_command(rrip, Experiment::rrip);
    }
  } catch (const ParameterError& e) {
    std::cerr << "lowrank: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lowrank: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
