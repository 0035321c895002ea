#include "lowrank/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "lowrank/csv.hpp"
#include "lowrank/errors.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace lowrank {

namespace {

template <class T, class Format>
std::string join_values(const std::vector<T>& values, Format&& format) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (const auto& v : values) fields.push_back(format(v));
  return csv::join(fields);
}

std::string int_text(int v) { return std::to_string(v); }

int resolve_rank(const RankParam& value, int n_min) { return value ? *value : n_min; }

MihtConfig base_config(int rank, double gamma, int max_iter) {
  MihtConfig cfg = MihtConfig::practical(rank, gamma);
  cfg.max_iter = max_iter;
  return cfg;
}

int n_min(const ExperimentSpec& spec) { return std::min(spec.n1, spec.n2); }

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::st_grid: return "st_grid";
    case Experiment::phase: return "phase";
    case Experiment::timing: return "timing";
    case Experiment::robustness: return "robustness";
    case Experiment::rrip: return "rrip";
  }
  return "phase";
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::miht_default: return "miht_default";
    case Algorithm::miht_r_2r: return "miht_r_2r";
    case Algorithm::iht: return "iht";
    case Algorithm::niht: return "niht";
  }
  return "miht_default";
}

Experiment parse_experiment(std::string_view label) {
  for (auto e : {Experiment::st_grid, Experiment::phase, Experiment::timing,
                 Experiment::robustness, Experiment::rrip}) {
    if (label == to_string(e)) return e;
  }
  throw ParameterError("unknown experiment '" + std::string(label) + "'");
}

Algorithm parse_algorithm(std::string_view label) {
  for (auto a : {Algorithm::miht_default, Algorithm::miht_r_2r, Algorithm::iht, Algorithm::niht}) {
    if (label == to_string(a)) return a;
  }
  throw ParameterError("unknown algorithm '" + std::string(label) + "'");
}

std::string format_rank_param(const RankParam& value) {
  return value ? std::to_string(*value) : std::string("ALL");
}

RankParam parse_rank_param(std::string_view text) {
  if (text == "all" || text == "ALL") return std::nullopt;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1) {
    throw ParameterError("expected a positive integer or ALL, got '" + std::string(text) + "'");
  }
  return value;
}

void validate(const ExperimentSpec& spec) {
  const auto fail = [](const std::string& what) { throw ParameterError("experiment: " + what); };
  if (spec.n1 < 1 || spec.n2 < 1) fail("N1 and N2 must be >= 1");
  if (spec.rank < 1 || spec.rank > n_min(spec)) fail("rank must lie in [1, min(N1,N2)]");
  if (spec.trials < 1) fail("trials must be >= 1");
  if (!(spec.success_threshold > 0.0)) fail("success_threshold must be > 0");
  if (!(spec.gamma >= 1.0)) fail("gamma must be >= 1");
  if (spec.max_iter < 1) fail("max_iter must be >= 1");
  if (spec.algorithms.empty()) fail("algorithm list is empty");

  const auto need_m = [&](bool single) {
    if (spec.m_values.empty()) fail("m grid is empty");
    if (single && spec.m_values.size() != 1) fail("this experiment takes exactly one m");
    for (int m : spec.m_values) {
      if (m < 1) fail("m values must be >= 1");
    }
  };
  const auto check_ranks = [&](const std::vector<RankParam>& values, const char* name) {
    if (values.empty()) fail(std::string(name) + " grid is empty");
    for (const auto& v : values) {
      if (v && (*v < 1 || *v > n_min(spec))) {
        fail(std::string(name) + " value " + std::to_string(*v) + " exceeds min(N1,N2)");
      }
    }
  };

  switch (spec.experiment) {
    case Experiment::st_grid:
      need_m(true);
      check_ranks(spec.s_values, "s");
      check_ranks(spec.t_values, "t");
      for (const auto& s : spec.s_values) {
        if (resolve_rank(s, n_min(spec)) < spec.rank) fail("s values must be >= r");
      }
      break;
    case Experiment::phase:
      need_m(false);
      break;
    case Experiment::robustness:
      need_m(true);
      if (spec.noise_l1_values.empty()) fail("noise grid is empty");
      for (double e : spec.noise_l1_values) {
        if (!(e >= 0.0) || !std::isfinite(e)) fail("noise levels must be finite and >= 0");
      }
      break;
    case Experiment::timing:
      if (spec.n_values.empty()) fail("N grid is empty");
      for (int n : spec.n_values) {
        if (n < spec.rank) fail("N values must be >= r");
      }
      if (!(spec.m_factor > 0.0)) fail("m_factor must be > 0");
      break;
    case Experiment::rrip:
      need_m(false);
      if (spec.n1 != spec.n2) fail("rrip curves use square N x N maps");
      if (spec.rrip_samples < 2) fail("rrip_samples must be >= 2");
      if (spec.dist == Distribution::custom) fail("rrip needs gaussian or laplace");
      break;
  }
}

std::string describe(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "# experiment=" << to_string(spec.experiment) << " N1=" << spec.n1 << " N2=" << spec.n2
      << " r=" << spec.rank << " trials=" << spec.trials << " seed=" << spec.seed.value
      << " success_threshold=" << csv::format(spec.success_threshold)
      << " gamma=" << csv::format(spec.gamma) << " max_iter=" << spec.max_iter
      << " algorithms=" << join_values(spec.algorithms, [](Algorithm a) {
           return std::string(to_string(a));
         });
  switch (spec.experiment) {
    case Experiment::st_grid:
      out << " m=" << join_values(spec.m_values, int_text)
          << " s_values=" << join_values(spec.s_values, format_rank_param)
          << " t_values=" << join_values(spec.t_values, format_rank_param);
      break;
    case Experiment::phase:
      out << " m=" << join_values(spec.m_values, int_text);
      break;
    case Experiment::robustness:
      out << " m=" << join_values(spec.m_values, int_text) << " noise_l1="
          << join_values(spec.noise_l1_values, [](double v) { return csv::format(v); });
      break;
    case Experiment::timing:
      out << " n_values=" << join_values(spec.n_values, int_text)
          << " m_factor=" << csv::format(spec.m_factor);
      break;
    case Experiment::rrip:
      out << " m=" << join_values(spec.m_values, int_text) << " dist=" << to_string(spec.dist)
          << " rrip_samples=" << spec.rrip_samples;
      break;
  }
  return out.str();
}

PlantedInstance make_planted_instance(Index n1, Index n2, Index rank, Index m, RngSeed seed,
                                      double noise_l1) {
  if (!(noise_l1 >= 0.0)) throw ParameterError("planted instance: noise level must be >= 0");
  PlantedInstance inst{make_rank_one_map(n1, n2, m, derive_seed(seed, 1, 0)),
                       sample_rank_r(n1, n2, rank, derive_seed(seed, 2, 0)), Vector::Zero(m),
                       Vector()};
  if (noise_l1 > 0.0) {
    Rng rng(derive_seed(seed, 3, 0));
    const double magnitude = noise_l1 / static_cast<double>(m);
    for (Index i = 0; i < m; ++i) inst.noise(i) = magnitude * rng.rademacher();
  }
  inst.y = inst.map.apply(inst.truth) + inst.noise;
  return inst;
}

RecoveryResult run_algorithm(Algorithm algorithm, const PlantedInstance& instance, int rank,
                             double gamma, int max_iter) {
  const auto& map = instance.map;
  const StopRule stop{max_iter, 1e-10, 1e-8};
  switch (algorithm) {
    case Algorithm::miht_default:
      return miht(map, instance.y, base_config(rank, gamma, max_iter), instance.truth);
    case Algorithm::miht_r_2r: {
      MihtConfig cfg = base_config(rank, gamma, max_iter);
      cfg.thresh_t = static_cast<int>(std::min<Index>(2 * rank, std::min(map.n1(), map.n2())));
      return miht(map, instance.y, cfg, instance.truth);
    }
    case Algorithm::iht:
      return iht_classic(map, instance.y, rank, natural_iht_stepsize(map), stop, instance.truth);
    case Algorithm::niht:
      return niht(map, instance.y, rank, stop, instance.truth);
  }
  throw ParameterError("unknown algorithm");
}

double relative_error(const Matrix& truth, const Matrix& estimate) {
  const double scale = truth.norm();
  const double diff = (truth - estimate).norm();
  return scale > 0.0 ? diff / scale : diff;
}

std::vector<StGridRow> run_st_grid(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.experiment != Experiment::st_grid) throw ParameterError("run_st_grid: wrong experiment");
  const int m = spec.m_values.front();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t cells = spec.s_values.size() * spec.t_values.size();

  // success[cell * trials + k]
  std::vector<char> success(cells * trials, 0);
  detail::parallel_for(trials, spec.workers, [&](std::size_t k) {
    const PlantedInstance inst =
        make_planted_instance(spec.n1, spec.n2, spec.rank, m, derive_seed(spec.seed, 0, k));
    std::size_t cell = 0;
    for (const auto& s : spec.s_values) {
      for (const auto& t : spec.t_values) {
        MihtConfig cfg = base_config(spec.rank, spec.gamma, spec.max_iter);
        cfg.thresh_s = resolve_rank(s, n_min(spec));
        cfg.thresh_t = t;
        const auto result = miht(inst.map, inst.y, cfg);
        success[cell * trials + k] =
            relative_error(inst.truth, result.final_iterate) <= spec.success_threshold;
        ++cell;
      }
    }
  });

  std::vector<StGridRow> rows;
  std::size_t cell = 0;
  for (const auto& s : spec.s_values) {
    for (const auto& t : spec.t_values) {
      const auto first = success.begin() + static_cast<std::ptrdiff_t>(cell * trials);
      rows.push_back({s, t, static_cast<int>(std::count(first, first + spec.trials, 1)),
                      spec.trials});
      ++cell;
    }
  }
  return rows;
}

std::vector<PhaseRow> run_phase(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.experiment != Experiment::phase) throw ParameterError("run_phase: wrong experiment");
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t jobs = spec.m_values.size() * trials;

  // success[(m_index * n_alg + alg) * trials + k]
  std::vector<char> success(jobs * n_alg, 0);
  detail::parallel_for(jobs, spec.workers, [&](std::size_t job) {
    const std::size_t mi = job / trials;
    const std::size_t k = job % trials;
    const int m = spec.m_values[mi];
    const PlantedInstance inst = make_planted_instance(
        spec.n1, spec.n2, spec.rank, m, derive_seed(spec.seed, static_cast<std::uint64_t>(m), k));
    for (std::size_t a = 0; a < n_alg; ++a) {
      const auto result =
          run_algorithm(spec.algorithms[a], inst, spec.rank, spec.gamma, spec.max_iter);
      success[(mi * n_alg + a) * trials + k] =
          relative_error(inst.truth, result.final_iterate) <= spec.success_threshold;
    }
  });

  std::vector<PhaseRow> rows;
  for (std::size_t a = 0; a < n_alg; ++a) {
    for (std::size_t mi = 0; mi < spec.m_values.size(); ++mi) {
      const auto first = success.begin() + static_cast<std::ptrdiff_t>((mi * n_alg + a) * trials);
      rows.push_back({spec.algorithms[a], spec.m_values[mi],
                      static_cast<int>(std::count(first, first + spec.trials, 1)), spec.trials});
    }
  }
  return rows;
}

std::vector<RobustnessRow> run_robustness(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.experiment != Experiment::robustness) {
    throw ParameterError("run_robustness: wrong experiment");
  }
  const int m = spec.m_values.front();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t n_noise = spec.noise_l1_values.size();

  // errors[(alg * n_noise + noise) * trials + k]
  std::vector<double> errors(n_alg * n_noise * trials, 0.0);
  detail::parallel_for(n_noise * trials, spec.workers, [&](std::size_t job) {
    const std::size_t e = job / trials;
    const std::size_t k = job % trials;
    const PlantedInstance inst =
        make_planted_instance(spec.n1, spec.n2, spec.rank, m, derive_seed(spec.seed, 0, k),
                              spec.noise_l1_values[e]);
    for (std::size_t a = 0; a < n_alg; ++a) {
      const auto result =
          run_algorithm(spec.algorithms[a], inst, spec.rank, spec.gamma, spec.max_iter);
      errors[(a * n_noise + e) * trials + k] = (inst.truth - result.final_iterate).norm();
    }
  });

  std::vector<RobustnessRow> rows;
  for (std::size_t a = 0; a < n_alg; ++a) {
    for (std::size_t e = 0; e < n_noise; ++e) {
      const auto first = errors.begin() + static_cast<std::ptrdiff_t>((a * n_noise + e) * trials);
      const std::vector<double> cell(first, first + spec.trials);
      rows.push_back({spec.algorithms[a], spec.noise_l1_values[e], detail::median(cell),
                      *std::max_element(cell.begin(), cell.end())});
    }
  }
  return rows;
}

std::vector<TimingRow> run_timing(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.experiment != Experiment::timing) throw ParameterError("run_timing: wrong experiment");
  std::vector<TimingRow> rows;
  for (Algorithm algorithm : spec.algorithms) {
    for (int n : spec.n_values) {
      const int m = static_cast<int>(std::ceil(spec.m_factor * spec.rank * n));
      std::vector<double> times;
      std::vector<double> iterations;
      for (int k = 0; k < spec.trials; ++k) {
        const PlantedInstance inst = make_planted_instance(
            n, n, spec.rank, m,
            derive_seed(spec.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)));
        const auto start = std::chrono::steady_clock::now();
        const auto result = run_algorithm(algorithm, inst, spec.rank, spec.gamma, spec.max_iter);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (relative_error(inst.truth, result.final_iterate) <= spec.success_threshold) {
          times.push_back(elapsed.count());
          iterations.push_back(result.iterations_used);
        }
      }
      rows.push_back({algorithm, n, detail::median(times), detail::median(iterations),
                      static_cast<int>(times.size())});
    }
  }
  return rows;
}

std::vector<CurveRow> run_rrip_curve(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.experiment != Experiment::rrip) throw ParameterError("run_rrip_curve: wrong experiment");
  std::vector<Index> m_values(spec.m_values.begin(), spec.m_values.end());
  return concentration_curve(spec.dist, spec.n1, spec.rank, m_values, spec.trials, spec.seed,
                             spec.rrip_samples, spec.workers);
}

std::string to_csv(const ExperimentSpec& spec, const std::vector<StGridRow>& rows) {
  std::ostringstream out;
  out << describe(spec) << "\ns,t,success_count,trials\n";
  for (const auto& row : rows) {
    out << format_rank_param(row.s) << ',' << format_rank_param(row.t) << ','
        << row.success_count << ',' << row.trials << '\n';
  }
  return out.str();
}

std::string to_csv(const ExperimentSpec& spec, const std::vector<PhaseRow>& rows) {
  std::ostringstream out;
  out << describe(spec) << "\nalgorithm,m,success_count,trials\n";
  for (const auto& row : rows) {
    out << to_string(row.algorithm) << ',' << row.m << ',' << row.success_count << ','
        << row.trials << '\n';
  }
  return out.str();
}

std::string to_csv(const ExperimentSpec& spec, const std::vector<RobustnessRow>& rows) {
  std::ostringstream out;
  out << describe(spec) << "\nalgorithm,l1_noise,frob_error_median,frob_error_max\n";
  for (const auto& row : rows) {
    out << to_string(row.algorithm) << ',' << csv::format(row.l1_noise) << ','
        << csv::format(row.frob_error_median) << ',' << csv::format(row.frob_error_max) << '\n';
  }
  return out.str();
}

std::string to_csv(const ExperimentSpec& spec, const std::vector<TimingRow>& rows) {
  std::ostringstream out;
  out << describe(spec) << "\nalgorithm,N,median_wall_time_seconds,median_iterations,successes\n";
  for (const auto& row : rows) {
    out << to_string(row.algorithm) << ',' << row.n << ','
        << csv::format(row.median_wall_time_seconds) << ',' << csv::format(row.median_iterations)
        << ',' << row.successes << '\n';
  }
  return out.str();
}

std::string to_csv(const ExperimentSpec& spec, const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << describe(spec) << '\n';
  write_curve_csv(out, rows);
  return out.str();
}

std::string run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  switch (spec.experiment) {
    case Experiment::st_grid: return to_csv(spec, run_st_grid(spec));
    case Experiment::phase: return to_csv(spec, run_phase(spec));
    case Experiment::robustness: return to_csv(spec, run_robustness(spec));
    case Experiment::timing: return to_csv(spec, run_timing(spec));
    case Experiment::rrip: return to_csv(spec, run_rrip_curve(spec));
  }
  throw ParameterError("unknown experiment");
}

}  // namespace lowrank
