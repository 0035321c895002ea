// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "lowrank/bench.hpp"
#include "lowrank/matana.hpp"
#include "lowrank/measure.hpp"
#include "lowrank/recover.hpp"
#include "lowrank/rripcheck.hpp"
#include "support/oracles.hpp"

using namespace lowrank;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  RngSeed seed;
  std::filesystem::path csv_dir;
};

std::string fmt(const char* pattern, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double log_uniform(oracle::Gen& gen, double lo, double hi) {
  return std::exp(gen.uniform(std::log(lo), std::log(hi)));
}

void write_csv(const Context& ctx, const std::string& name, const std::string& text) {
  if (ctx.csv_dir.empty()) return;
  std::filesystem::create_directories(ctx.csv_dir);
  std::ofstream(ctx.csv_dir / name) << text;
}

// ||X - H_s(Z)|| <= eta(s/r) ||X - Z|| for rank(X) <= r, s >= r, s + 2r <= min(N1, N2).
Verdict threshold_error_bound(const Context& ctx) {
  oracle::Gen gen(derive_seed(ctx.seed, 1, 0).value);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Index n1 = gen.integer(3, 12), n2 = gen.integer(3, 12);
    const int n_min = static_cast<int>(std::min(n1, n2));
    const int r = gen.integer(1, std::min(3, n_min / 3));
    const int s = gen.integer(r, n_min - 2 * r);
    const Matrix x = gen.low_rank(n1, n2, gen.integer(1, r));
    Matrix z;
    switch (trial % 3) {
      case 0: z = x + log_uniform(gen, 1e-3, 10.0) * gen.gaussian(n1, n2); break;
      case 1: z = x + log_uniform(gen, 1e-3, 10.0) * gen.low_rank(n1, n2, gen.integer(1, n_min)); break;
      default: z = gen.gaussian(n1, n2); break;
    }
    const double kappa = static_cast<double>(s) / r;
    const double bound = (1.0 + std::sqrt(8.0 / (kappa + 1.0))) * (x - z).norm();
    const double lhs = (x - hard_threshold(z, s)).norm();
    worst = std::max(worst, lhs / bound);
    if (lhs > bound * (1.0 + 1e-12)) ++violations;
  }
  return {violations == 0, fmt("10000 trials, %d violations, max lhs/rhs %.4f", violations, worst)};
}

// |<A, B - H_k(B)>| <= sqrt(j / (k + j - i)) ||A|| ||H_{k+j}(B) - H_i(B)|| for rank(A) <= j.
Verdict tail_inner_product_bound(const Context& ctx) {
  oracle::Gen gen(derive_seed(ctx.seed, 2, 0).value);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Index n1 = gen.integer(2, 12), n2 = gen.integer(2, 12);
    const int n_min = static_cast<int>(std::min(n1, n2));
    const int j = gen.integer(1, n_min);
    const int k = gen.integer(0, n_min - j);
    const int i = gen.integer(0, k);
    Matrix b = gen.gaussian(n1, n2);
    if (trial % 2) b = gen.low_rank(n1, n2, gen.integer(1, n_min)) + 1e-3 * b;
    const SvdFactors f = svd(b);
    // Half the trials use the extremal A = H_{k+j}(B) - H_k(B), which attains equality at i = k.
    const Matrix a = trial % 4 < 2 ? gen.low_rank(n1, n2, gen.integer(1, j))
                                   : Matrix(hard_threshold(f, k + j) - hard_threshold(f, k));
    const double lhs = std::abs(frobenius_inner(a, b - hard_threshold(f, k)));
    const double rhs = std::sqrt(static_cast<double>(j) / (k + j - i)) * a.norm() *
                       (hard_threshold(f, k + j) - hard_threshold(f, i)).norm();
    if (rhs > 0) worst = std::max(worst, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-10) + 1e-14 * a.norm() * b.norm()) ++violations;
  }
  return {violations == 0, fmt("10000 trials, %d violations, max lhs/rhs %.12f", violations, worst)};
}

// One MIHT step from zero against the exact constants of order s + r = min(N1, N2).
Verdict one_step_bound(const Context& ctx) {
  struct Shape {
    Index n1, n2;
    int s;
    Index m;
  };
  const std::vector<Shape> shapes{{2, 2, 1, 10}, {2, 3, 1, 14}, {3, 2, 1, 14}, {2, 4, 1, 16}, {3, 3, 2, 16}};
  oracle::Gen gen(derive_seed(ctx.seed, 3, 0).value);
  int violations = 0, precondition_failures = 0, trials = 0;
  double worst = 0.0;
  for (std::size_t map_index = 0; map_index < 20; ++map_index) {
    const Shape& sh = shapes[map_index % shapes.size()];
    const RngSeed map_seed = derive_seed(ctx.seed, 3, map_index + 1);
    const MeasurementMap map = map_index % 2 == 0
                                   ? make_rank_one_map(sh.n1, sh.n2, sh.m, map_seed)
                                   : make_dense_map(sh.n1, sh.n2, sh.m, Distribution::gaussian, map_seed);
    const IsometryConstants c = exact_constants_full_order(map);
    const double beta_sq = c.beta * c.beta;
    const int r = 1;
    for (int k = 0; k < 50; ++k, ++trials) {
      const Matrix x = log_uniform(gen, 1e-2, 1e2) * gen.low_rank(sh.n1, sh.n2, 1);
      const Vector ax = map.apply(x);
      Vector e = Vector::Zero(sh.m);
      if (k % 4 == 1) {
        e = gen.gaussian(sh.m);
      } else if (k % 4 >= 2) {
        // Sparse corruption concentrates the noise in a few measurements.
        const int hits = gen.integer(1, 3);
        for (int l = 0; l < hits; ++l) e(gen.integer(0, static_cast<int>(sh.m) - 1)) = gen.normal();
      }
      if (e.lpNorm<1>() > 0) e *= log_uniform(gen, 1e-3, 3.0) * ax.lpNorm<1>() / e.lpNorm<1>();
      const double tau = k % 5 == 0 ? 1.0 : gen.uniform(1.0, 3.0);
      const Vector y = ax + e;
      const Matrix d = hard_threshold(map.adjoint(sign_vector(y)), sh.s);
      const double lo = std::max(beta_sq / tau, d.squaredNorm());
      if (lo > beta_sq * (1.0 + 1e-12)) {
        ++precondition_failures;
        continue;
      }
      const double u = k % 3 == 0 ? 0.0 : (k % 3 == 1 ? 1.0 : gen.uniform(0.0, 1.0));
      const double nu = lo + u * (beta_sq - lo);
      const double mu = y.lpNorm<1>() / nu;
      const double lhs = (x - mu * d).norm();
      const double rhs = (1.0 - 1.0 / (2.0 * c.gamma * c.gamma) + tau * std::sqrt(static_cast<double>(r) / (sh.s + r))) *
                             x.norm() +
                         6.0 * tau * tau / c.beta * e.lpNorm<1>();
      worst = std::max(worst, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12)) ++violations;
    }
  }
  return {violations == 0 && precondition_failures == 0,
          fmt("%d trials on 20 maps, %d violations, %d unsatisfiable stepsize windows, max lhs/rhs %.4f",
              trials, violations, precondition_failures, worst)};
}

// <A*u, Z> against <u, A(Z)> evaluated straight from the definition of each variant.
Verdict adjoint_identity(const Context& ctx) {
  oracle::Gen gen(derive_seed(ctx.seed, 4, 0).value);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n1 = gen.integer(1, 15), n2 = gen.integer(1, 15), m = gen.integer(1, 60);
    const RngSeed map_seed = derive_seed(ctx.seed, 4, static_cast<std::uint64_t>(trial) + 1);
    const MeasurementMap map =
        trial % 2 == 0 ? make_rank_one_map(n1, n2, m, map_seed)
                       : make_dense_map(n1, n2, m, trial % 4 == 1 ? Distribution::gaussian : Distribution::laplace,
                                        map_seed);
    const Vector u = gen.gaussian(m);
    const Matrix z = gen.gaussian(n1, n2);
    double direct = 0.0, scale = 0.0;
    for (Index i = 0; i < m; ++i) {
      double value = 0.0;
      if (map.variant() == MeasurementMap::Variant::rank_one) {
        for (Index p = 0; p < n1; ++p) {
          for (Index q = 0; q < n2; ++q) value += map.left_vectors()(i, p) * z(p, q) * map.right_vectors()(i, q);
        }
      } else {
        for (Index p = 0; p < n1; ++p) {
          for (Index q = 0; q < n2; ++q) value += map.coefficients()(i, p * n2 + q) * z(p, q);
        }
      }
      direct += u(i) * value;
      scale += std::abs(u(i) * value);
    }
    const double via_adjoint = frobenius_inner(map.adjoint(u), z);
    worst = std::max(worst, std::abs(via_adjoint - direct) / scale);
  }
  return {worst <= 1e-10, fmt("1000 triples, max relative deviation %.3e", worst)};
}

struct ExactRecoveryRuns {
  int successes = 0;
  int trials = 0;
  int max_iterations = 0;
  double seconds = 0.0;
  std::vector<std::vector<double>> ratios;  // per success, iterations 5..end
};

ExactRecoveryRuns run_exact_recovery(const Context& ctx) {
  ExactRecoveryRuns out;
  const auto start = std::chrono::steady_clock::now();
  std::string trace_text;
  for (int k = 0; k < 50; ++k, ++out.trials) {
    const auto inst = make_planted_instance(20, 20, 2, 400, derive_seed(ctx.seed, 5, k));
    const RecoveryResult result = miht(inst.map, inst.y, MihtConfig::practical(2, 3.0), inst.truth);
    out.max_iterations = std::max(out.max_iterations, result.iterations_used);
    if (relative_error(inst.truth, result.final_iterate) > 1e-4 || result.iterations_used > 500) continue;
    ++out.successes;
    std::vector<double> ratios;
    for (std::size_t n = 5; n + 1 < result.trace.size(); ++n) {
      ratios.push_back(*result.trace[n + 1].frob_error / *result.trace[n].frob_error);
    }
    out.ratios.push_back(std::move(ratios));
    if (trace_text.empty()) {
      std::ostringstream text;
      write_trace_csv(text, result);
      trace_text = text.str();
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_csv(ctx, "trace.csv", trace_text);
  return out;
}

Verdict exact_recovery(const ExactRecoveryRuns& runs) {
  const bool pass = runs.successes >= 48 && runs.seconds <= 300.0;
  return {pass, fmt("%d/%d recovered to 1e-4, max %d iterations, %.1f s", runs.successes, runs.trials,
                    runs.max_iterations, runs.seconds)};
}

Verdict geometric_convergence(const ExactRecoveryRuns& runs) {
  std::vector<double> pooled;
  double worst_trial = 0.0;
  for (const auto& ratios : runs.ratios) {
    pooled.insert(pooled.end(), ratios.begin(), ratios.end());
    worst_trial = std::max(worst_trial, median(ratios));
  }
  const double pooled_median = median(pooled);
  return {!runs.ratios.empty() && pooled_median < 0.95 && worst_trial < 0.95,
          fmt("%zu successful runs, pooled median ratio %.4f, largest per-run median %.4f", runs.ratios.size(),
              pooled_median, worst_trial)};
}

Verdict noise_robustness(const Context& ctx) {
  ExperimentSpec spec;
  spec.experiment = Experiment::robustness;
  spec.seed = derive_seed(ctx.seed, 7, 0);
  spec.noise_l1_values = {0.01, 0.02, 0.04, 0.08};
  spec.trials = 25;
  const auto rows = run_robustness(spec);
  write_csv(ctx, "robustness.csv", to_csv(spec, rows));
  const double d = rows.front().frob_error_median / rows.front().l1_noise;
  double worst = 0.0;
  for (const auto& row : rows) worst = std::max(worst, row.frob_error_median / (d * row.l1_noise));
  return {std::isfinite(d) && worst <= 3.0, fmt("d = %.4f, worst median error / (d * noise) = %.3f", d, worst)};
}

Verdict rrip_ratio(const Context& ctx) {
  const auto gauss = estimate_constants(make_rank_one_map(20, 20, 400, derive_seed(ctx.seed, 8, 1)), 2, 2000,
                                        derive_seed(ctx.seed, 8, 2));
  const auto dense = estimate_constants(
      make_dense_map(20, 20, 400, Distribution::gaussian, derive_seed(ctx.seed, 8, 3)), 2, 2000,
      derive_seed(ctx.seed, 8, 4));
  const auto laplace = estimate_constants(
      make_dense_map(20, 20, 400, Distribution::laplace, derive_seed(ctx.seed, 8, 5)), 2, 2000,
      derive_seed(ctx.seed, 8, 6));
  const bool pass = gauss.gamma_hat <= 3.5 && laplace.gamma_hat <= 2.0 * gauss.gamma_hat &&
                    laplace.gamma_hat <= 2.0 * dense.gamma_hat;
  return {pass, fmt("gaussian rank-one %.3f, gaussian dense %.3f, laplace dense %.3f", gauss.gamma_hat,
                    dense.gamma_hat, laplace.gamma_hat)};
}

// Noise large enough against the per-measurement signal for the stopping test to fire mid-run.
Verdict condsri_soundness(const Context& ctx) {
  const Index n = 4, m = 10000;
  const int r = 1;
  MihtConfig cfg = MihtConfig::practical(r, 3.0);
  cfg.thresh_t = 2;
  cfg.enable_condsri_stop = true;
  const int order = std::min<int>(*cfg.thresh_t + cfg.thresh_s + r, n);
  std::vector<MeasurementMap> maps;
  std::vector<double> beta_hat;
  for (std::uint64_t k = 0; k < 10; ++k) {
    maps.push_back(make_rank_one_map(n, n, m, derive_seed(ctx.seed, 9, k)));
    beta_hat.push_back(estimate_constants(maps.back(), order, 2000, derive_seed(ctx.seed, 10, k)).beta_hat);
  }
  const std::vector<double> noise_levels{1.0, 2.0, 4.0};
  int triggered = 0, attempts = 0, violations = 0;
  double worst = 0.0;
  std::vector<double> stop_iterations;
  for (std::uint64_t k = 0; triggered < 100 && k < 300; ++k, ++attempts) {
    const MeasurementMap& map = maps[k % maps.size()];
    const Matrix x = sample_rank_r(n, n, r, derive_seed(ctx.seed, 11, k));
    Rng rng(derive_seed(ctx.seed, 12, k));
    const double level = noise_levels[k % noise_levels.size()];
    Vector e(m);
    for (Index i = 0; i < m; ++i) e(i) = rng.rademacher() * level / static_cast<double>(m);
    const RecoveryResult result = miht(map, map.apply(x) + e, cfg);
    if (result.stop_reason != StopReason::condsri_triggered) continue;
    ++triggered;
    stop_iterations.push_back(result.iterations_used);
    const Matrix hx = hard_threshold(x, r);
    const double e_prime = (map.apply(x - hx) + e).lpNorm<1>();
    const double lhs = (hx - result.final_iterate).norm();
    const double rhs = 4.0 * cfg.gamma / beta_hat[k % maps.size()] * e_prime;
    worst = std::max(worst, lhs / rhs);
    if (lhs > rhs) ++violations;
  }
  return {triggered >= 100 && violations == 0,
          fmt("%d triggered runs out of %d, %d violations, max lhs/rhs %.4f, median stop iteration %.0f", triggered,
              attempts, violations, worst, median(stop_iterations))};
}

Verdict baseline_contrast(const Context& ctx) {
  ExperimentSpec spec;
  spec.experiment = Experiment::phase;
  spec.seed = derive_seed(ctx.seed, 13, 0);
  spec.m_values = {80, 160, 240, 320, 400};
  spec.algorithms = {Algorithm::miht_default, Algorithm::niht};
  spec.trials = 25;
  const auto rows = run_phase(spec);
  write_csv(ctx, "phase.csv", to_csv(spec, rows));
  const auto at = [&](Algorithm a, Index m) {
    for (const auto& row : rows) {
      if (row.algorithm == a && row.m == m) return row.success_count;
    }
    return -1;
  };
  const Index lo = spec.m_values.front(), hi = spec.m_values.back();
  return {at(Algorithm::miht_default, hi) >= at(Algorithm::niht, hi),
          fmt("m=%lld: miht %d/25, niht %d/25 (m=%lld: miht %d/25, niht %d/25, not asserted)",
              static_cast<long long>(hi), at(Algorithm::miht_default, hi), at(Algorithm::niht, hi),
              static_cast<long long>(lo), at(Algorithm::miht_default, lo), at(Algorithm::niht, lo))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Property and desk-scale acceptance checks for the lowrank library"};
  std::uint64_t seed = 20240611;
  std::string csv_dir;
  std::vector<std::string> only;
  app.add_option("--seed", seed, "base seed");
  app.add_option("--csv-dir", csv_dir, "write phase, robustness and trace CSVs here");
  app.add_option("--only", only, "run only the named criteria");
  CLI11_PARSE(app, argc, argv);
  const Context ctx{RngSeed{seed}, csv_dir};

  int failures = 0, ran = 0;
  const auto report = [&](const std::string& name, double limit_seconds, const std::function<Verdict()>& body) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) return;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0 && seconds > limit_seconds) {
      v.pass = false;
      v.detail += fmt("; over the %.0f s budget", limit_seconds);
    }
    ++ran;
    failures += !v.pass;
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), seconds);
    std::fflush(stdout);
  };

  report("threshold_error_bound", 60, [&] { return threshold_error_bound(ctx); });
  report("tail_inner_product_bound", 60, [&] { return tail_inner_product_bound(ctx); });
  report("one_step_bound", 120, [&] { return one_step_bound(ctx); });
  report("adjoint_identity", 0, [&] { return adjoint_identity(ctx); });
  ExactRecoveryRuns runs;
  bool have_runs = false;
  const auto recovery = [&]() -> const ExactRecoveryRuns& {
    if (!have_runs) runs = run_exact_recovery(ctx), have_runs = true;
    return runs;
  };
  report("exact_recovery", 300, [&] { return exact_recovery(recovery()); });
  report("geometric_convergence", 0, [&] { return geometric_convergence(recovery()); });
  report("noise_robustness", 0, [&] { return noise_robustness(ctx); });
  report("rrip_ratio", 0, [&] { return rrip_ratio(ctx); });
  report("condsri_soundness", 0, [&] { return condsri_soundness(ctx); });
  report("baseline_contrast", 0, [&] { return baseline_contrast(ctx); });

  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
