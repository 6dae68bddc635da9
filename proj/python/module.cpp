// pybind11 bindings for the main library operations.

#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include "pspin/bounds.hpp"
#include "pspin/mc.hpp"
#include "pspin/oracle.hpp"
#include "pspin/rs.hpp"

namespace py = pybind11;
using namespace pspin;

namespace {

ModelParams make_params(int p, double beta, double h, double a) {
  return ModelParams(MixtureSpec(p, beta), h, a);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "p-spin moment and overlap bounds: core bindings";

  py::register_exception<InvalidParams>(m, "InvalidParams", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded",
                                         PyExc_RuntimeError);
  py::register_exception<InfeasibleConstraint>(m, "InfeasibleConstraint",
                                               PyExc_ValueError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init(&make_params), py::arg("p"), py::arg("beta"), py::arg("h"),
           py::arg("a"))
      .def_property_readonly("p",
                             [](const ModelParams& s) { return s.mixture.p; })
      .def_property_readonly(
          "beta", [](const ModelParams& s) { return s.mixture.beta; })
      .def_readonly("h", &ModelParams::h)
      .def_readonly("a", &ModelParams::a)
      .def_readonly("n", &ModelParams::n)
      .def("xi", &ModelParams::xi)
      .def("xi_prime", &ModelParams::xi_prime)
      .def("theta", &ModelParams::theta)
      .def("delta", &ModelParams::delta);

  py::class_<CriticalPoint>(m, "CriticalPoint")
      .def_readonly("q", &CriticalPoint::q)
      .def_readonly("residual", &CriticalPoint::residual);

  py::class_<LocalMax>(m, "LocalMax")
      .def_readonly("q", &LocalMax::q)
      .def_readonly("value", &LocalMax::value);

  py::class_<RsReport>(m, "RsReport")
      .def_readonly("q0", &RsReport::q0)
      .def_readonly("value", &RsReport::value)
      .def_readonly("unique_max", &RsReport::unique_max)
      .def_readonly("maxima", &RsReport::maxima)
      .def_readonly("all_critical_points", &RsReport::all_critical_points);

  m.def("rs_value", &rs_value, py::arg("q"), py::arg("params"));
  m.def("rs_maximize", &rs_maximize, py::arg("params"),
        py::arg("grid") = 1001);
  m.def("critical_points", &critical_points, py::arg("params"));

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("n", &BoundReport::n)
      .def_readonly("q", &BoundReport::q)
      .def_readonly("psi_inf", &BoundReport::psi_inf)
      .def_readonly("rs_q", &BoundReport::rs_q)
      .def_readonly("Psi_at_embedding", &BoundReport::Psi_at_embedding)
      .def_readonly("Psi_inf", &BoundReport::Psi_inf)
      .def_readonly("holder_gap", &BoundReport::holder_gap)
      .def_readonly("strict", &BoundReport::strict)
      .def_readonly("strict_reason", &BoundReport::strict_reason)
      .def_readonly("chain_ok", &BoundReport::chain_ok)
      .def_readonly("margin_embedding", &BoundReport::margin_embedding)
      .def_readonly("margin_psi", &BoundReport::margin_psi)
      .def_readonly("margin_Psi", &BoundReport::margin_Psi)
      .def_readonly("lambda_grad_norm", &BoundReport::lambda_grad_norm);

  m.def(
      "chain_verify",
      [](const Eigen::VectorXd& u_vec, int target_index,
         const ModelParams& params, int order) {
        return chain_verify(u_vec, target_index, params, {}, order);
      },
      py::arg("u_vec"), py::arg("target_index"), py::arg("params"),
      py::arg("order") = 128);

  m.def("annealed_moment_exact", &annealed_moment_exact, py::arg("N"),
        py::arg("m"), py::arg("params"), py::arg("t") = 1.0,
        py::arg("q") = 0.0);

  py::class_<TiltedOverlapDistribution>(m, "TiltedOverlapDistribution")
      .def_readonly("N", &TiltedOverlapDistribution::N)
      .def_readonly("a", &TiltedOverlapDistribution::a)
      .def_readonly("t", &TiltedOverlapDistribution::t)
      .def_readonly("q", &TiltedOverlapDistribution::q)
      .def_readonly("ks", &TiltedOverlapDistribution::ks)
      .def_readonly("log_probs", &TiltedOverlapDistribution::log_probs)
      .def("prob", &TiltedOverlapDistribution::prob)
      .def("log_prob", &TiltedOverlapDistribution::log_prob);

  m.def("tilted_overlap_distribution", &tilted_overlap_distribution,
        py::arg("N"), py::arg("params"), py::arg("t") = 1.0,
        py::arg("q") = 0.0);
  m.def("tilted_delta_expectation", &tilted_delta_expectation, py::arg("N"),
        py::arg("t"), py::arg("params"), py::arg("q0"));

  py::class_<HolderChain>(m, "HolderChain")
      .def_readonly("m1", &HolderChain::m1)
      .def_readonly("m2", &HolderChain::m2)
      .def_readonly("m3", &HolderChain::m3)
      .def_readonly("m4", &HolderChain::m4);

  m.def("holder_chain_check", &holder_chain_check, py::arg("N"),
        py::arg("params"), py::arg("t"), py::arg("q0"));

  py::class_<RatePoint>(m, "RatePoint")
      .def_readonly("N", &RatePoint::N)
      .def_readonly("k", &RatePoint::k)
      .def_readonly("log_prob", &RatePoint::log_prob)
      .def_readonly("rate", &RatePoint::rate);

  m.def("rate_function", &rate_function, py::arg("N_list"), py::arg("u"),
        py::arg("params"), py::arg("t") = 1.0, py::arg("q") = 0.0);

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("mean", &McEstimate::mean)
      .def_property_readonly("stderr",
                             [](const McEstimate& e) { return e.stderr_; })
      .def_readonly("n_samples", &McEstimate::n_samples)
      .def_readonly("estimator_kind", &McEstimate::estimator_kind)
      .def_readonly("ess", &McEstimate::ess)
      .def_readonly("ci_valid", &McEstimate::ci_valid)
      .def_readonly("bias_warning", &McEstimate::bias_warning);

  m.def("moment_mc", &moment_mc, py::arg("N"), py::arg("a"),
        py::arg("n_samples"), py::arg("seed"), py::arg("params"),
        py::arg("n_threads") = 1);
  m.def("tilted_overlap_mc", &tilted_overlap_mc, py::arg("N"), py::arg("a"),
        py::arg("u"), py::arg("n_samples"), py::arg("seed"), py::arg("params"),
        py::arg("n_threads") = 1);
}
