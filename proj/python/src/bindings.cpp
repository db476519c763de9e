#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "epigain/efe.hpp"
#include "epigain/error.hpp"
#include "epigain/inquiry.hpp"
#include "epigain/json_io.hpp"
#include "epigain/model.hpp"
#include "epigain/numerics.hpp"
#include "epigain/optimize.hpp"
#include "epigain/svg.hpp"
#include "epigain/sweep.hpp"

namespace py = pybind11;
using namespace epigain;

namespace {

template <typename T>
std::string repr_of(const T& value, const char* type) {
    return std::string(type) + "(" + to_json(value).dump() + ")";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Information gains, optimal surprise and expected free energy under a Gaussian model";
    m.attr("__version__") = EPIGAIN_VERSION;

    // Translators run in reverse registration order, so the base class goes
    // first and the specific errors take priority over it.
    auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<QuadratureError>(m, "QuadratureError", error.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
    py::register_exception<OptimizerError>(m, "OptimizerError", error.ptr());

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double s_p, double s_l, double epsilon, int n, double eta, double obs_mean,
                         double obs_var) {
                 ModelParams p;
                 p.s_p = s_p;
                 p.s_l = s_l;
                 p.epsilon = epsilon;
                 p.n = n;
                 p.eta = eta;
                 p.obs_mean = obs_mean;
                 p.obs_var = obs_var;
                 p.validate();
                 return p;
             }),
             py::arg("s_p") = 10.0, py::arg("s_l") = 1.0, py::arg("epsilon") = 1e-3, py::arg("n") = 1,
             py::arg("eta") = 0.0, py::arg("obs_mean") = 0.0, py::arg("obs_var") = 0.0)
        .def_readwrite("s_p", &ModelParams::s_p)
        .def_readwrite("s_l", &ModelParams::s_l)
        .def_readwrite("epsilon", &ModelParams::epsilon)
        .def_readwrite("n", &ModelParams::n)
        .def_readwrite("eta", &ModelParams::eta)
        .def_readwrite("obs_mean", &ModelParams::obs_mean)
        .def_readwrite("obs_var", &ModelParams::obs_var)
        .def("delta", &ModelParams::delta)
        .def("validate", &ModelParams::validate)
        .def(py::self == py::self)
        .def("__repr__", [](const ModelParams& p) { return repr_of(p, "ModelParams"); });

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init<>())
        .def_readwrite("abs_tol", &QuadratureConfig::abs_tol)
        .def_readwrite("rel_tol", &QuadratureConfig::rel_tol)
        .def_readwrite("max_subdivisions", &QuadratureConfig::max_subdivisions)
        .def_readwrite("truncation_sigmas", &QuadratureConfig::truncation_sigmas)
        .def("validate", &QuadratureConfig::validate);

    py::class_<GainPoint>(m, "GainPoint")
        .def_readonly("delta", &GainPoint::delta)
        .def_readonly("evidence", &GainPoint::evidence)
        .def_readonly("surprise", &GainPoint::surprise)
        .def_readonly("kld", &GainPoint::kld)
        .def_readonly("bs", &GainPoint::bs)
        .def_readonly("ig", &GainPoint::ig)
        .def_readonly("u", &GainPoint::u)
        .def_readonly("w_post", &GainPoint::w_post)
        .def_readonly("w_pri", &GainPoint::w_pri)
        .def("__repr__", [](const GainPoint& g) { return repr_of(g, "GainPoint"); });

    // Closed-form model
    m.def("evidence", &evidence, py::arg("params"), py::arg("delta"));
    m.def("log_evidence", &log_evidence, py::arg("params"), py::arg("delta"));
    m.def("surprise", &surprise, py::arg("params"), py::arg("delta"));
    m.def("free_energy", &free_energy, py::arg("params"), py::arg("delta"));
    m.def("kld_gaussian", &kld_gaussian, py::arg("params"), py::arg("delta"));
    m.def("bs_gaussian", &bs_gaussian, py::arg("params"), py::arg("delta"));
    m.def("kld_minus_bs_gaussian", &kld_minus_bs_gaussian, py::arg("params"), py::arg("delta"));

    // Noisy likelihood
    const QuadratureConfig default_cfg;
    m.def("kld_noisy", &kld_noisy, py::arg("params"), py::arg("delta"), py::arg("quadrature") = default_cfg);
    m.def("bs_noisy", &bs_noisy, py::arg("params"), py::arg("delta"), py::arg("quadrature") = default_cfg);
    m.def("uncertainty_u", &uncertainty_U, py::arg("params"), py::arg("delta"), py::arg("quadrature") = default_cfg);
    m.def("gain_point", &gain_point, py::arg("params"), py::arg("delta"), py::arg("quadrature") = default_cfg);
    m.def(
        "gain_curve",
        [](const ModelParams& p, const std::vector<double>& deltas, const QuadratureConfig& cfg) {
            std::vector<GainPoint> out;
            out.reserve(deltas.size());
            for (double d : deltas) out.push_back(gain_point(p, d, cfg));
            return out;
        },
        py::arg("params"), py::arg("deltas"), py::arg("quadrature") = default_cfg);

    // Optimization
    py::class_<OptimizeOptions>(m, "OptimizeOptions")
        .def(py::init<>())
        .def_readwrite("search_bound", &OptimizeOptions::search_bound)
        .def_readwrite("tol", &OptimizeOptions::tol)
        .def_readwrite("max_iters", &OptimizeOptions::max_iters)
        .def_readwrite("max_widenings", &OptimizeOptions::max_widenings);

    py::class_<OptimaRecord>(m, "OptimaRecord")
        .def_readonly("params", &OptimaRecord::params)
        .def_readonly("delta_kld", &OptimaRecord::delta_kld)
        .def_readonly("delta_bs", &OptimaRecord::delta_bs)
        .def_readonly("delta_ig", &OptimaRecord::delta_ig)
        .def_readonly("s_kld", &OptimaRecord::s_kld)
        .def_readonly("s_bs", &OptimaRecord::s_bs)
        .def_readonly("s_ig", &OptimaRecord::s_ig)
        .def_readonly("max_kld", &OptimaRecord::max_kld)
        .def_readonly("max_bs", &OptimaRecord::max_bs)
        .def_readonly("max_ig", &OptimaRecord::max_ig)
        .def_readonly("d_delta", &OptimaRecord::d_delta)
        .def_readonly("d_s", &OptimaRecord::d_s)
        .def_readonly("search_bound", &OptimaRecord::search_bound)
        .def_readonly("converged_kld", &OptimaRecord::converged_kld)
        .def_readonly("converged_bs", &OptimaRecord::converged_bs)
        .def_readonly("converged_ig", &OptimaRecord::converged_ig)
        .def_property_readonly("converged", &OptimaRecord::converged)
        .def("__repr__", [](const OptimaRecord& r) { return repr_of(r, "OptimaRecord"); });

    m.def("find_optima", &find_optima, py::arg("params"), py::arg("quadrature") = default_cfg,
          py::arg("options") = OptimizeOptions{});

    // Sweeps
    py::class_<AxisRange>(m, "AxisRange")
        .def(py::init([](double lo, double hi, double step) { return AxisRange{lo, hi, step}; }), py::arg("min"),
             py::arg("max"), py::arg("step"))
        .def_readwrite("min", &AxisRange::min)
        .def_readwrite("max", &AxisRange::max)
        .def_readwrite("step", &AxisRange::step)
        .def("values", &AxisRange::values)
        .def("__len__", &AxisRange::count);
    m.def("parse_range", &parse_range, py::arg("text"));

    py::class_<SweepSpec>(m, "SweepSpec")
        .def(py::init<>())
        .def_readwrite("s_l", &SweepSpec::s_l)
        .def_readwrite("s_p", &SweepSpec::s_p)
        .def_readwrite("epsilon", &SweepSpec::epsilon)
        .def_readwrite("n", &SweepSpec::n)
        .def_readwrite("quadrature", &SweepSpec::quadrature)
        .def_readwrite("tol", &SweepSpec::tol)
        .def_readwrite("workers", &SweepSpec::worker_count_hint);

    py::class_<SweepGrid>(m, "SweepGrid")
        .def_readonly("spec", &SweepGrid::spec)
        .def_readonly("s_l_values", &SweepGrid::s_l_values)
        .def_readonly("s_p_values", &SweepGrid::s_p_values)
        .def_readonly("records", &SweepGrid::records)
        .def_property_readonly("failed_cells", [](const SweepGrid& g) { return g.metadata.failed_cells; })
        .def("at", &SweepGrid::at, py::arg("i_l"), py::arg("i_p"), py::return_value_policy::reference_internal)
        .def("to_csv",
             [](const SweepGrid& g) {
                 std::ostringstream out;
                 export_csv(g, out);
                 return out.str();
             })
        .def("to_json", [](const SweepGrid& g) { return to_json(g).dump(); })
        .def("heatmap_svg", [](const SweepGrid& g, const std::string& field) {
            return svg::render(svg::sweep_heatmap(g, field));
        });

    // The worker threads never touch Python objects, so the GIL can go.
    m.def("run_sweep", [](const SweepSpec& spec) { return run_sweep(spec); }, py::arg("spec"),
          py::call_guard<py::gil_scoped_release>());

    // Inquiry cycle
    py::enum_<Phase>(m, "Phase").value("diversive", Phase::diversive).value("specific", Phase::specific);
    py::enum_<Emotion>(m, "Emotion")
        .value("boredom", Emotion::boredom)
        .value("pleasure", Emotion::pleasure)
        .value("optimal_band", Emotion::optimal_band)
        .value("interest", Emotion::interest)
        .value("confusion", Emotion::confusion);

    py::class_<InquiryStep>(m, "InquiryStep")
        .def_readonly("index", &InquiryStep::index)
        .def_readonly("phase", &InquiryStep::phase)
        .def_readonly("delta", &InquiryStep::delta)
        .def_readonly("surprise", &InquiryStep::surprise)
        .def_readonly("kld", &InquiryStep::kld)
        .def_readonly("bs", &InquiryStep::bs)
        .def_readonly("ig", &InquiryStep::ig)
        .def_readonly("emotion", &InquiryStep::emotion);

    py::class_<InquiryTrace>(m, "InquiryTrace")
        .def_readonly("steps", &InquiryTrace::steps)
        .def_readonly("optima", &InquiryTrace::optima)
        .def("to_csv", [](const InquiryTrace& t) {
            std::ostringstream out;
            export_trace_csv(t, out);
            return out.str();
        });

    m.def(
        "simulate",
        [](const ModelParams& p, int cycles, double initial_delta, const std::string& mode, double rate,
           double boredom_frac, double confusion_frac, double arrival_tol) {
            InquiryConfig cfg;
            cfg.params = p;
            cfg.cycles = cycles;
            cfg.initial_delta = initial_delta;
            if (mode == "jump")
                cfg.step_mode = StepMode::jump();
            else if (mode == "relax")
                cfg.step_mode = StepMode::relax(rate);
            else
                throw ValidationError("mode must be 'jump' or 'relax'");
            cfg.thresholds = {boredom_frac, confusion_frac};
            cfg.arrival_tol = arrival_tol;
            return simulate(cfg);
        },
        py::arg("params"), py::arg("cycles") = 3, py::arg("initial_delta") = 0.0, py::arg("mode") = "jump",
        py::arg("rate") = 0.5, py::arg("boredom_frac") = 0.5, py::arg("confusion_frac") = 1.5,
        py::arg("arrival_tol") = 1e-6);
    m.def(
        "label_emotion",
        [](double s, const OptimaRecord& r, double boredom_frac, double confusion_frac) {
            return label_emotion(s, r, {boredom_frac, confusion_frac});
        },
        py::arg("surprise"), py::arg("optima"), py::arg("boredom_frac") = 0.5, py::arg("confusion_frac") = 1.5);

    // Expected free energy
    py::class_<Policy>(m, "Policy")
        .def(py::init([](std::string name, std::vector<double> q) { return Policy{std::move(name), std::move(q)}; }),
             py::arg("name"), py::arg("q"))
        .def_readwrite("name", &Policy::name)
        .def_readwrite("q", &Policy::predicted_states);

    py::class_<DiscretePolicyModel>(m, "DiscretePolicyModel")
        .def(py::init([](std::vector<std::string> states, std::vector<std::string> observations,
                         std::vector<std::vector<double>> likelihood, std::vector<double> preference,
                         std::vector<Policy> policies, double gamma) {
                 DiscretePolicyModel model{std::move(states),     std::move(observations), std::move(likelihood),
                                           std::move(preference), std::move(policies),     gamma};
                 model.validate();
                 return model;
             }),
             py::arg("states"), py::arg("observations"), py::arg("likelihood"), py::arg("preference"),
             py::arg("policies"), py::arg("gamma") = 1.0)
        .def_readonly("states", &DiscretePolicyModel::states)
        .def_readonly("observations", &DiscretePolicyModel::observations)
        .def_readonly("likelihood", &DiscretePolicyModel::likelihood)
        .def_readonly("preference", &DiscretePolicyModel::preference)
        .def_readonly("policies", &DiscretePolicyModel::policies)
        .def_readwrite("gamma", &DiscretePolicyModel::gamma);

    py::class_<EfeBreakdown>(m, "EfeBreakdown")
        .def_readonly("g", &EfeBreakdown::g)
        .def_readonly("risk", &EfeBreakdown::risk)
        .def_readonly("p_f", &EfeBreakdown::p_f)
        .def_readonly("p_kld", &EfeBreakdown::p_kld)
        .def_readonly("p_bs", &EfeBreakdown::p_bs)
        .def("reconstructed", &EfeBreakdown::reconstructed);

    m.def("load_policy_model", &load_policy_model, py::arg("path"));
    m.def("efe_direct", py::overload_cast<const DiscretePolicyModel&, std::size_t>(&efe_direct), py::arg("model"),
          py::arg("policy"));
    m.def("efe_decompose", py::overload_cast<const DiscretePolicyModel&, std::size_t>(&efe_decompose),
          py::arg("model"), py::arg("policy"));
    m.def(
        "policy_prior", [](const std::vector<double>& g, double gamma) { return policy_prior(g, gamma); },
        py::arg("g"), py::arg("gamma"));
}
