#pragma once

// Planted-instance experiments producing deterministic CSV tables.
//
// Seeding: trial k of an experiment with seed S uses the instance seed
// derive_seed(S, stream, k), where `stream` is 0 for st_grid and robustness
// (every grid cell sees the same instances) and the cell's m or N otherwise.
// From an instance seed I, the map uses derive_seed(I, 1, 0), the planted
// matrix derive_seed(I, 2, 0) and the noise signs derive_seed(I, 3, 0).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowrank/matana.hpp"
#include "lowrank/measure.hpp"
#include "lowrank/recover.hpp"
#include "lowrank/rripcheck.hpp"

namespace lowrank {

enum class Experiment { st_grid, phase, timing, robustness, rrip };
enum class Algorithm { miht_default, miht_r_2r, iht, niht };

std::string_view to_string(Experiment e);
std::string_view to_string(Algorithm a);
Experiment parse_experiment(std::string_view label);
Algorithm parse_algorithm(std::string_view label);

/// nullopt stands for ALL (= min(N1, N2)).
using RankParam = std::optional<int>;
std::string format_rank_param(const RankParam& value);
/// Accepts a positive integer or "all"/"ALL".
RankParam parse_rank_param(std::string_view text);

struct ExperimentSpec {
  Experiment experiment = Experiment::phase;
  int n1 = 20;
  int n2 = 20;
  int rank = 2;
  /// st_grid and robustness use exactly one value.
  std::vector<int> m_values{400};
  std::vector<RankParam> s_values;
  std::vector<RankParam> t_values;
  std::vector<double> noise_l1_values;
  /// timing: square sizes N with m = ceil(m_factor * r * N).
  std::vector<int> n_values;
  double m_factor = 8.0;
  int trials = 25;
  RngSeed seed{};
  double success_threshold = 1e-4;
  std::vector<Algorithm> algorithms{Algorithm::miht_default};
  double gamma = 3.0;
  int max_iter = 500;
  /// rrip: samples per estimate and the dense-map law.
  int rrip_samples = 400;
  Distribution dist = Distribution::gaussian;
  /// 0 picks std::thread::hardware_concurrency(); timing always runs serially.
  int workers = 0;
  std::string output_path;
};

/// Throws ParameterError describing the first violated constraint.
void validate(const ExperimentSpec& spec);

/// "# key=value ..." line recording every field that affects the output.
std::string describe(const ExperimentSpec& spec);

struct PlantedInstance {
  MeasurementMap map;
  Matrix truth;  // rank r, unit Frobenius norm
  Vector noise;  // equal magnitudes noise_l1 / m, random signs
  Vector y;      // A(truth) + noise
};

PlantedInstance make_planted_instance(Index n1, Index n2, Index rank, Index m, RngSeed seed,
                                      double noise_l1 = 0.0);

/// Runs one algorithm with the harness defaults (gamma and max_iter from the
/// spec; IHT uses natural_iht_stepsize).
RecoveryResult run_algorithm(Algorithm algorithm, const PlantedInstance& instance, int rank,
                             double gamma, int max_iter);

double relative_error(const Matrix& truth, const Matrix& estimate);

struct StGridRow {
  RankParam s;
  RankParam t;
  int success_count = 0;
  int trials = 0;
};

struct PhaseRow {
  Algorithm algorithm = Algorithm::miht_default;
  int m = 0;
  int success_count = 0;
  int trials = 0;
};

struct RobustnessRow {
  Algorithm algorithm = Algorithm::miht_default;
  double l1_noise = 0.0;
  double frob_error_median = 0.0;
  double frob_error_max = 0.0;
};

struct TimingRow {
  Algorithm algorithm = Algorithm::miht_default;
  int n = 0;
  double median_wall_time_seconds = 0.0;
  double median_iterations = 0.0;
  int successes = 0;
};

std::vector<StGridRow> run_st_grid(const ExperimentSpec& spec);
std::vector<PhaseRow> run_phase(const ExperimentSpec& spec);
std::vector<RobustnessRow> run_robustness(const ExperimentSpec& spec);
std::vector<TimingRow> run_timing(const ExperimentSpec& spec);
std::vector<CurveRow> run_rrip_curve(const ExperimentSpec& spec);

/// CSV text: the describe() comment line, a header row, then data rows.
std::string to_csv(const ExperimentSpec& spec, const std::vector<StGridRow>& rows);
std::string to_csv(const ExperimentSpec& spec, const std::vector<PhaseRow>& rows);
std::string to_csv(const ExperimentSpec& spec, const std::vector<RobustnessRow>& rows);
std::string to_csv(const ExperimentSpec& spec, const std::vector<TimingRow>& rows);
std::string to_csv(const ExperimentSpec& spec, const std::vector<CurveRow>& rows);

/// Validates, dispatches on spec.experiment and returns the CSV text.
std::string run_experiment(const ExperimentSpec& spec);

}  // namespace lowrank
