#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "cochlea/analysis.hpp"
#include "cochlea/errors.hpp"
#include "cochlea/filter_design.hpp"
#include "cochlea/harness.hpp"
#include "cochlea/lut.hpp"
#include "cochlea/params.hpp"
#include "cochlea/rbf.hpp"
#include "cochlea/stimulus.hpp"
#include "cochlea/tl_model.hpp"
#include "cochlea/wkb.hpp"

namespace py = pybind11;
using namespace cochlea;

namespace {

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(T));
    return out;
}

py::dict traces_to_dict(const Traces& tr) {
    py::dict d;
    d["fs"] = tr.fs;
    d["decim"] = tr.decim;
    d["sections"] = tr.sections;
    d["t"] = to_array(tr.t);
    auto mat = [&](const std::vector<std::vector<double>>& cols) {
        const std::size_t ns = cols.size();
        const std::size_t nf = ns ? cols[0].size() : 0;
        py::array_t<double> a({ns, nf});
        auto r = a.mutable_unchecked<2>();
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < nf; ++j) r(i, j) = cols[i][j];
        return a;
    };
    d["v"] = mat(tr.v);
    d["y"] = mat(tr.y);
    if (!tr.G.empty()) d["G"] = mat(tr.G);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cochlear transmission-line simulation toolkit";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NumericalError>(m, "NumericalError");

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("H", &ModelParams::H)
        .def_readwrite("sigma_bm", &ModelParams::sigma_bm)
        .def_readwrite("rho", &ModelParams::rho)
        .def_readwrite("mu", &ModelParams::mu)
        .def_readwrite("b_visc", &ModelParams::b_visc)
        .def_readwrite("G_min", &ModelParams::G_min)
        .def_readwrite("G_max", &ModelParams::G_max)
        .def_readwrite("G_ref", &ModelParams::G_ref)
        .def_readwrite("fs", &ModelParams::fs)
        .def_readwrite("N", &ModelParams::N)
        .def_readwrite("L", &ModelParams::L)
        .def_readwrite("A1", &ModelParams::A1)
        .def_readwrite("A2", &ModelParams::A2)
        .def_readwrite("B", &ModelParams::B)
        .def_readwrite("qerb_base", &ModelParams::qerb_base)
        .def_readwrite("qerb_exp", &ModelParams::qerb_exp)
        .def_readwrite("a", &ModelParams::a)
        .def_readwrite("lambda1", &ModelParams::lambda1)
        .def_readwrite("lambda2", &ModelParams::lambda2)
        .def_readwrite("K", &ModelParams::K)
        .def_readwrite("m2", &ModelParams::m2)
        .def("validate", &ModelParams::validate);

    m.def("load_params", &load_params);
    m.def("save_params", &save_params);
    m.def("greenwood_cf", &greenwood_cf, py::arg("x"), py::arg("params"));
    m.def("qerb", &qerb, py::arg("f_hz"), py::arg("params"));
    m.def("omega_bm_of", &omega_bm_of, py::arg("omega_n"));
    m.def("section_positions", [](const ModelParams& p) {
        const SectionMap s = section_positions(p);
        return py::make_tuple(to_array(s.x), to_array(s.cf));
    });

    m.def("pressure_focusing", &pressure_focusing);
    m.def(
        "solve_dispersion",
        [](double omega, double omega_bm, double G, const ModelParams& p, double tol,
           int max_iter) {
            const DispersionSolution s = solve_dispersion(omega, omega_bm, G, p, tol, max_iter);
            py::dict d;
            d["kappa"] = s.kappa;
            d["alpha"] = s.alpha;
            d["iterations"] = s.iterations;
            d["residual"] = s.residual;
            return d;
        },
        py::arg("omega"), py::arg("omega_bm"), py::arg("G"), py::arg("params"),
        py::arg("tol") = 1e-8, py::arg("max_iter") = 200);
    m.def("beta_target", [](double omega_bm, double G, const ModelParams& p) {
        const ComplexSpectrum b = beta_target(omega_bm, G, p);
        return py::make_tuple(to_array(b.freqs), to_array(b.values));
    });

    py::class_<PoleFilter>(m, "PoleFilter")
        .def(py::init<>())
        .def_readwrite("b", &PoleFilter::b)
        .def_readwrite("eps", &PoleFilter::eps)
        .def_readwrite("omega_bm", &PoleFilter::omega_bm)
        .def_readwrite("G", &PoleFilter::G);

    m.def("fit_filter",
          [](py::array_t<double> freqs, py::array_t<std::complex<double>> values,
             double omega_bm, double G, const ModelParams& p) {
              ComplexSpectrum beta;
              beta.freqs.assign(freqs.data(), freqs.data() + freqs.size());
              beta.values.assign(values.data(), values.data() + values.size());
              FitDiagnostics d;
              const PoleFilter f = fit_filter(beta, omega_bm, G, p, &d);
              py::dict diag;
              diag["cost"] = d.cost;
              diag["max_mag_err"] = d.max_mag_err;
              diag["max_pole_radius"] = d.max_pole_radius;
              diag["iterations"] = d.iterations;
              return py::make_tuple(f, diag);
          });
    m.def("beta_hat", &beta_hat, py::arg("filter"), py::arg("omega"), py::arg("fs"));
    m.def("filter_poles", &filter_poles);

    py::class_<RbfNet>(m, "RbfNet")
        .def_readonly("n_omega", &RbfNet::n_omega)
        .def_readonly("n_g", &RbfNet::n_g)
        .def_readonly("sigma", &RbfNet::sigma)
        .def_readonly("weights", &RbfNet::weights)
        .def_readonly("omega_bm_min", &RbfNet::omega_bm_min)
        .def_readonly("omega_bm_max", &RbfNet::omega_bm_max);
    m.def(
        "train_rbf",
        [](const ModelParams& p, std::uint64_t seed, int stage1_steps, int stage2_steps) {
            TrainOptions o;
            o.seed = seed;
            if (stage1_steps > 0) o.stage1_steps = stage1_steps;
            if (stage2_steps >= 0) o.stage2_steps = stage2_steps;
            TrainReport rep;
            RbfNet net = train_rbf(p, o, &rep);
            py::dict r;
            r["stage1_first_mean"] = rep.stage1_first_mean;
            r["stage1_last_mean"] = rep.stage1_last_mean;
            r["stage2_first_mean"] = rep.stage2_first_mean;
            r["stage2_last_mean"] = rep.stage2_last_mean;
            return py::make_tuple(net, r);
        },
        py::arg("params"), py::arg("seed") = 1, py::arg("stage1_steps") = -1,
        py::arg("stage2_steps") = -1);
    m.def("rbf_forward", &rbf_forward);
    m.def("save_rbf", &save_rbf);
    m.def("load_rbf", &load_rbf);

    py::class_<FilterLUT>(m, "FilterLUT")
        .def_readonly("n_sections", &FilterLUT::n_sections)
        .def_readonly("n_g", &FilterLUT::n_g)
        .def_readonly("K", &FilterLUT::K)
        .def_readonly("G_min", &FilterLUT::G_min)
        .def_readonly("G_max", &FilterLUT::G_max);
    m.def("build_lut", &build_lut, py::arg("net"), py::arg("params"), py::arg("n_g") = 30);
    m.def("save_lut", &save_lut);
    m.def("load_lut", [](const std::string& path, const ModelParams& p) {
        return load_lut(path, &p);
    });
    m.def("lut_query", &lut_query);
    m.def("lut_body_crc", &lut_body_crc);

    py::enum_<Mode>(m, "Mode").value("v1d", Mode::v1d).value("vstar", Mode::vstar);
    py::enum_<StimulusKind>(m, "StimulusKind")
        .value("tone", StimulusKind::tone)
        .value("chirp", StimulusKind::chirp)
        .value("click", StimulusKind::click);

    py::class_<StimulusSpec>(m, "StimulusSpec")
        .def(py::init<>())
        .def_readwrite("kind", &StimulusSpec::kind)
        .def_readwrite("level_db", &StimulusSpec::level_db)
        .def_readwrite("freq_hz", &StimulusSpec::freq_hz)
        .def_readwrite("f_start_hz", &StimulusSpec::f_start_hz)
        .def_readwrite("f_end_hz", &StimulusSpec::f_end_hz)
        .def_readwrite("click_onset_s", &StimulusSpec::click_onset_s)
        .def_readwrite("click_width_s", &StimulusSpec::click_width_s)
        .def_readwrite("ramp_s", &StimulusSpec::ramp_s)
        .def_readwrite("duration_s", &StimulusSpec::duration_s)
        .def_readwrite("fs", &StimulusSpec::fs);
    m.def("gen_stimulus", [](const StimulusSpec& s) {
        return to_array(gen_stimulus(s));
    });

    py::class_<TLConfig>(m, "TLConfig")
        .def(py::init<>())
        .def_readwrite("coupling", &TLConfig::coupling)
        .def_readwrite("xi_start_20k", &TLConfig::xi_start_20k)
        .def_readwrite("xi_sat_ratio", &TLConfig::xi_sat_ratio)
        .def_readwrite("stim_scale", &TLConfig::stim_scale)
        .def_readwrite("drive_scale", &TLConfig::drive_scale)
        .def_readwrite("i_knee1_db", &TLConfig::i_knee1_db)
        .def_readwrite("v_knee1", &TLConfig::v_knee1)
        .def_readwrite("v_knee2", &TLConfig::v_knee2)
        .def_readwrite("update_period", &TLConfig::update_period)
        .def_readwrite("rk_rtol", &TLConfig::rk_rtol)
        .def_readwrite("rk_atol", &TLConfig::rk_atol);

    m.def(
        "calibrate_knees",
        [](const ModelParams& p, const TLConfig& cfg, Mode mode, const FilterLUT* lut,
           double cf) {
            const KneeCalibration k = calibrate_knees(p, cfg, mode, lut, cf);
            py::dict d;
            d["v_knee1"] = k.v_knee1;
            d["v_knee2"] = k.v_knee2;
            d["v_knee1_db"] = k.v_knee1_db;
            d["v_knee2_db"] = k.v_knee2_db;
            d["i_knee1_db"] = k.i_knee1_db;
            d["i_knee2_db"] = k.i_knee2_db;
            return d;
        },
        py::arg("params"), py::arg("config"), py::arg("mode"),
        py::arg("lut") = nullptr, py::arg("cf_hz") = 20000.0);

    m.def(
        "simulate",
        [](py::array_t<double> stimulus, const ModelParams& p, const TLConfig& cfg,
           Mode mode, const FilterLUT* lut, std::vector<int> sections, int decim,
           const std::string& pole, std::optional<double> fixed_G) {
            std::vector<double> stim(stimulus.data(), stimulus.data() + stimulus.size());
            RunOptions ro;
            ro.sections = std::move(sections);
            ro.decim = decim;
            ro.fixed_G = fixed_G;
            if (pole == "start") ro.pole = RunOptions::Pole::start;
            else if (pole == "sat") ro.pole = RunOptions::Pole::sat;
            else if (pole == "passive") ro.pole = RunOptions::Pole::passive;
            return traces_to_dict(simulate(stim, p, cfg, mode, lut, ro));
        },
        py::arg("stimulus"), py::arg("params"), py::arg("config"), py::arg("mode"),
        py::arg("lut") = nullptr, py::arg("sections") = std::vector<int>{},
        py::arg("decim") = 1, py::arg("pole") = "nonlinear",
        py::arg("fixed_G") = std::nullopt);

    m.def(
        "growth_function",
        [](const ModelParams& p, const TLConfig& cfg, Mode mode, const FilterLUT* lut,
           double cf, const std::vector<double>& levels) {
            const GrowthResult g = growth_function(p, cfg, mode, lut, cf, levels);
            py::dict d;
            std::vector<double> lv, vdb;
            for (const auto& pt : g.points) {
                lv.push_back(pt.level_db);
                vdb.push_back(pt.v_db);
            }
            d["levels_db"] = lv;
            d["v_db"] = vdb;
            d["slope_low"] = g.slope_low;
            d["slope_mid"] = g.slope_mid;
            d["span_db"] = g.span_db;
            d["compression_depth_db"] = g.compression_depth_db;
            return d;
        },
        py::arg("params"), py::arg("config"), py::arg("mode"), py::arg("lut") = nullptr,
        py::arg("cf_hz") = 20000.0, py::arg("levels_db") = std::vector<double>{});
}
