#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lowrank/bench.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/matana.hpp"
#include "lowrank/measure.hpp"
#include "lowrank/recover.hpp"
#include "lowrank/rripcheck.hpp"

namespace py = pybind11;
using namespace lowrank;

namespace {

RngSeed seed_of(std::uint64_t value) { return RngSeed{value}; }

std::string trace_csv(const RecoveryResult& result) {
  std::ostringstream out;
  write_trace_csv(out, result);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-rank matrix recovery by modified iterative hard thresholding";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // matana
  py::class_<SvdFactors>(m, "SvdFactors")
      .def_readonly("left", &SvdFactors::left)
      .def_readonly("values", &SvdFactors::values)
      .def_readonly("right", &SvdFactors::right);
  m.def("svd", &svd, py::arg("z"));
  m.def("hard_threshold", py::overload_cast<const Matrix&, Index>(&hard_threshold), py::arg("z"),
        py::arg("k"), "Best rank-k approximation in Frobenius norm");
  m.def("eta", &eta, py::arg("kappa"));
  m.def("sign_vector", &sign_vector, py::arg("u"));

  // measure
  py::enum_<Distribution>(m, "Distribution")
      .value("gaussian", Distribution::gaussian)
      .value("laplace", Distribution::laplace)
      .value("custom", Distribution::custom);

  py::class_<MeasurementMap> map(m, "MeasurementMap");
  py::enum_<MeasurementMap::Variant>(map, "Variant")
      .value("rank_one", MeasurementMap::Variant::rank_one)
      .value("dense", MeasurementMap::Variant::dense);
  map.def_static(
         "from_rank_one",
         [](Matrix left, Matrix right) {
           return MeasurementMap::from_rank_one(std::move(left), std::move(right));
         },
         py::arg("left"), py::arg("right"))
      .def_static(
          "from_dense",
          [](Index n1, Index n2, Matrix coefficients) {
            return MeasurementMap::from_dense(n1, n2, std::move(coefficients));
          },
          py::arg("n1"), py::arg("n2"), py::arg("coefficients"))
      .def_property_readonly("variant", &MeasurementMap::variant)
      .def_property_readonly("n1", &MeasurementMap::n1)
      .def_property_readonly("n2", &MeasurementMap::n2)
      .def_property_readonly("m", &MeasurementMap::m)
      .def_property_readonly("seed", [](const MeasurementMap& a) { return a.seed().value; })
      .def_property_readonly("distribution", &MeasurementMap::distribution)
      .def("apply", &MeasurementMap::apply, py::arg("z"))
      .def("adjoint", &MeasurementMap::adjoint, py::arg("u"))
      .def("as_dense", &MeasurementMap::as_dense);
  m.def(
      "make_rank_one_map",
      [](Index n1, Index n2, Index count, std::uint64_t seed) {
        return make_rank_one_map(n1, n2, count, seed_of(seed));
      },
      py::arg("n1"), py::arg("n2"), py::arg("m"), py::arg("seed"));
  m.def(
      "make_dense_map",
      [](Index n1, Index n2, Index count, Distribution dist, std::uint64_t seed) {
        return make_dense_map(n1, n2, count, dist, seed_of(seed));
      },
      py::arg("n1"), py::arg("n2"), py::arg("m"), py::arg("dist"), py::arg("seed"));

  // recover
  py::enum_<StepsizePolicy>(m, "StepsizePolicy")
      .value("adaptive", StepsizePolicy::adaptive)
      .value("fixed", StepsizePolicy::fixed);
  py::enum_<StopReason>(m, "StopReason")
      .value("residual_converged", StopReason::residual_converged)
      .value("iterate_converged", StopReason::iterate_converged)
      .value("max_iter", StopReason::max_iter)
      .value("condsri_triggered", StopReason::condsri_triggered);

  py::class_<MihtConfig>(m, "MihtConfig")
      .def(py::init<>())
      .def_readwrite("target_rank", &MihtConfig::target_rank)
      .def_readwrite("thresh_s", &MihtConfig::thresh_s)
      .def_readwrite("thresh_t", &MihtConfig::thresh_t)
      .def_readwrite("gamma", &MihtConfig::gamma)
      .def_readwrite("stepsize_policy", &MihtConfig::stepsize_policy)
      .def_readwrite("fixed_beta", &MihtConfig::fixed_beta)
      .def_readwrite("step_scale", &MihtConfig::step_scale)
      .def_readwrite("max_iter", &MihtConfig::max_iter)
      .def_readwrite("tol_residual", &MihtConfig::tol_residual)
      .def_readwrite("tol_change", &MihtConfig::tol_change)
      .def_readwrite("enable_condsri_stop", &MihtConfig::enable_condsri_stop)
      .def_static("practical", &MihtConfig::practical, py::arg("rank"), py::arg("gamma") = 3.0)
      .def_static("rank_2r", &MihtConfig::rank_2r, py::arg("rank"), py::arg("n_min"),
                  py::arg("gamma") = 3.0)
      .def("validate", &MihtConfig::validate, py::arg("n1"), py::arg("n2"));

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iter", &TraceRecord::iter)
      .def_readonly("l1_residual", &TraceRecord::l1_residual)
      .def_readonly("stepsize", &TraceRecord::stepsize)
      .def_readonly("frob_error", &TraceRecord::frob_error);

  py::class_<RecoveryResult>(m, "RecoveryResult")
      .def_readonly("final_iterate", &RecoveryResult::final_iterate)
      .def_readonly("iterations_used", &RecoveryResult::iterations_used)
      .def_readonly("stop_reason", &RecoveryResult::stop_reason)
      .def_readonly("trace", &RecoveryResult::trace)
      .def("trace_csv", &trace_csv);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("mu", &StepResult::mu)
      .def_readonly("condsri_hit", &StepResult::condsri_hit)
      .def_readonly("degenerate", &StepResult::degenerate)
      .def_readonly("direction", &StepResult::direction)
      .def_readonly("residual_l1", &StepResult::residual_l1);

  py::class_<StopRule>(m, "StopRule")
      .def(py::init<>())
      .def_readwrite("max_iter", &StopRule::max_iter)
      .def_readwrite("tol_residual", &StopRule::tol_residual)
      .def_readwrite("tol_change", &StopRule::tol_change);

  m.def("stepsize", &stepsize, py::arg("map"), py::arg("y"), py::arg("xn"), py::arg("cfg"));
  m.def("miht", &miht, py::arg("map"), py::arg("y"), py::arg("cfg"),
        py::arg("truth") = std::nullopt, py::call_guard<py::gil_scoped_release>());
  m.def("iht_classic", &iht_classic, py::arg("map"), py::arg("y"), py::arg("rank"),
        py::arg("mu"), py::arg("stop") = StopRule{}, py::arg("truth") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("niht", &niht, py::arg("map"), py::arg("y"), py::arg("rank"),
        py::arg("stop") = StopRule{}, py::arg("truth") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("natural_iht_stepsize", &natural_iht_stepsize, py::arg("map"));

  // rripcheck
  py::class_<RripEstimate>(m, "RripEstimate")
      .def_readonly("order", &RripEstimate::order)
      .def_readonly("n_samples", &RripEstimate::n_samples)
      .def_readonly("alpha_hat", &RripEstimate::alpha_hat)
      .def_readonly("beta_hat", &RripEstimate::beta_hat)
      .def_readonly("gamma_hat", &RripEstimate::gamma_hat)
      .def_readonly("sample_l1_values", &RripEstimate::sample_l1_values);
  py::class_<IsometryConstants>(m, "IsometryConstants")
      .def_readonly("alpha", &IsometryConstants::alpha)
      .def_readonly("beta", &IsometryConstants::beta)
      .def_readonly("gamma", &IsometryConstants::gamma);
  m.def(
      "sample_rank_r",
      [](Index n1, Index n2, Index rank, std::uint64_t seed) {
        return sample_rank_r(n1, n2, rank, seed_of(seed));
      },
      py::arg("n1"), py::arg("n2"), py::arg("rank"), py::arg("seed"));
  m.def(
      "estimate_constants",
      [](const MeasurementMap& a, Index rank, int n_samples, std::uint64_t seed,
         bool keep_samples, int workers) {
        return estimate_constants(a, rank, n_samples, seed_of(seed), keep_samples, workers);
      },
      py::arg("map"), py::arg("rank"), py::arg("n_samples"), py::arg("seed"),
      py::arg("keep_samples") = false, py::arg("workers") = 1,
      py::call_guard<py::gil_scoped_release>());
  m.def("exact_constants_full_order", &exact_constants_full_order, py::arg("map"));
  m.def("exact_constants_rank_one", &exact_constants_rank_one, py::arg("map"));

  // bench
  py::enum_<Experiment>(m, "Experiment")
      .value("st_grid", Experiment::st_grid)
      .value("phase", Experiment::phase)
      .value("timing", Experiment::timing)
      .value("robustness", Experiment::robustness)
      .value("rrip", Experiment::rrip);
  py::enum_<Algorithm>(m, "Algorithm")
      .value("miht_default", Algorithm::miht_default)
      .value("miht_r_2r", Algorithm::miht_r_2r)
      .value("iht", Algorithm::iht)
      .value("niht", Algorithm::niht);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def(py::init<>())
      .def_readwrite("experiment", &ExperimentSpec::experiment)
      .def_readwrite("n1", &ExperimentSpec::n1)
      .def_readwrite("n2", &ExperimentSpec::n2)
      .def_readwrite("rank", &ExperimentSpec::rank)
      .def_readwrite("m_values", &ExperimentSpec::m_values)
      .def_readwrite("s_values", &ExperimentSpec::s_values)
      .def_readwrite("t_values", &ExperimentSpec::t_values)
      .def_readwrite("noise_l1_values", &ExperimentSpec::noise_l1_values)
      .def_readwrite("n_values", &ExperimentSpec::n_values)
      .def_readwrite("m_factor", &ExperimentSpec::m_factor)
      .def_readwrite("trials", &ExperimentSpec::trials)
      .def_property(
          "seed", [](const ExperimentSpec& s) { return s.seed.value; },
          [](ExperimentSpec& s, std::uint64_t v) { s.seed = seed_of(v); })
      .def_readwrite("success_threshold", &ExperimentSpec::success_threshold)
      .def_readwrite("algorithms", &ExperimentSpec::algorithms)
      .def_readwrite("gamma", &ExperimentSpec::gamma)
      .def_readwrite("max_iter", &ExperimentSpec::max_iter)
      .def_readwrite("rrip_samples", &ExperimentSpec::rrip_samples)
      .def_readwrite("dist", &ExperimentSpec::dist)
      .def_readwrite("workers", &ExperimentSpec::workers)
      .def("validate", [](const ExperimentSpec& s) { validate(s); })
      .def("describe", [](const ExperimentSpec& s) { return describe(s); });

  py::class_<PlantedInstance>(m, "PlantedInstance")
      .def_readonly("map", &PlantedInstance::map)
      .def_readonly("truth", &PlantedInstance::truth)
      .def_readonly("noise", &PlantedInstance::noise)
      .def_readonly("y", &PlantedInstance::y);
  m.def(
      "make_planted_instance",
      [](Index n1, Index n2, Index rank, Index count, std::uint64_t seed, double noise_l1) {
        return make_planted_instance(n1, n2, rank, count, seed_of(seed), noise_l1);
      },
      py::arg("n1"), py::arg("n2"), py::arg("rank"), py::arg("m"), py::arg("seed"),
      py::arg("noise_l1") = 0.0);
  m.def("run_experiment", &run_experiment, py::arg("spec"),
        py::call_guard<py::gil_scoped_release>(), "Runs the experiment and returns CSV text");
}
