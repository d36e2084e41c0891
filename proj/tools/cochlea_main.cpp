// Command-line driver: filter fitting, RBF training, LUT management,
// time-domain simulation, response analysis, acceptance verification.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cochlea/analysis.hpp"
#include "cochlea/errors.hpp"
#include "cochlea/filter_design.hpp"
#include "cochlea/harness.hpp"
#include "cochlea/lut.hpp"
#include "cochlea/params.hpp"
#include "cochlea/rbf.hpp"
#include "cochlea/stimulus.hpp"
#include "cochlea/tl_model.hpp"
#include "cochlea/trace_io.hpp"
#include "cochlea/verify.hpp"
#include "cochlea/wkb.hpp"

namespace {

using namespace cochlea;
namespace fs = std::filesystem;

ModelParams params_from(const std::string& file) {
    return file.empty() ? ModelParams{} : load_params(file);
}

std::vector<double> parse_levels(const std::string& spec) {
    // "lo:hi:step" or comma-separated list
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi, step;
        char c;
        std::istringstream ss(spec);
        ss >> lo >> c >> hi >> c >> step;
        if (!ss || step <= 0.0) throw ConfigError("bad level range: " + spec);
        for (double L = lo; L <= hi + 1e-9; L += step) out.push_back(L);
    } else {
        std::istringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw ConfigError("no levels in: " + spec);
    return out;
}

int cmd_fit(const std::string& params_file, std::vector<double> fbm_list,
            std::vector<double> g_list, const std::string& out_dir, bool dump_beta) {
    const ModelParams p = params_from(params_file);
    fs::create_directories(out_dir);
    std::ofstream diag_csv(fs::path(out_dir) / "fit_diagnostics.csv");
    diag_csv << "omega_bm_hz,G,cost,max_mag_err,max_pole_radius\n";
    diag_csv.precision(12);
    for (double fbm : fbm_list) {
        for (double G : g_list) {
            const double omega_bm = 2.0 * M_PI * fbm;
            const ComplexSpectrum beta = beta_target(omega_bm, G, p);
            FitDiagnostics d;
            const PoleFilter f = fit_filter(beta, omega_bm, G, p, &d);
            diag_csv << fbm << "," << G << "," << d.cost << "," << d.max_mag_err << ","
                     << d.max_pole_radius << "\n";
            std::ostringstream tag;
            tag << "fbm" << static_cast<long>(fbm) << "_G" << G;
            if (dump_beta)
                write_beta_csv(beta, (fs::path(out_dir) / ("beta_" + tag.str() + ".csv")).string());
            std::ofstream bf(fs::path(out_dir) / ("filter_" + tag.str() + ".csv"));
            bf.precision(17);
            bf << "k,b\n";
            for (int k = 0; k < f.b.size(); ++k) bf << (k + 1) << "," << f.b(k) << "\n";
            bf << "eps," << f.eps << "\n";
            std::cout << "fit fbm=" << fbm << " G=" << G << ": cost " << d.cost
                      << ", max |mag| err " << d.max_mag_err * 100.0 << "%, max pole "
                      << d.max_pole_radius << "\n";
        }
    }
    std::cout << "diagnostics: " << (fs::path(out_dir) / "fit_diagnostics.csv").string()
              << "\n";
    return 0;
}

int cmd_train(const std::string& params_file, std::uint64_t seed,
              const std::string& out_file) {
    const ModelParams p = params_from(params_file);
    TrainOptions opts;
    opts.seed = seed;
    TrainReport rep;
    const RbfNet net = train_rbf(p, opts, &rep);
    save_rbf(net, out_file);
    std::cout << "stage 1 loss: " << rep.stage1_first_mean << " -> "
              << rep.stage1_last_mean << "\n"
              << "stage 2 cost: " << rep.stage2_first_mean << " -> "
              << rep.stage2_last_mean << "\n"
              << "net written to " << out_file << "\n";
    return 0;
}

int cmd_lut_build(const std::string& params_file, const std::string& net_file,
                  const std::string& out_file) {
    const ModelParams p = params_from(params_file);
    const RbfNet net = load_rbf(net_file);
    const FilterLUT lut = build_lut(net, p);
    save_lut(lut, out_file);
    std::cout << "lut " << lut.n_sections << "x" << lut.n_g << "x" << lut.K
              << " written to " << out_file << " (crc32 " << lut_body_crc(lut) << ")\n";
    return 0;
}

int cmd_lut_verify(const std::string& params_file, const std::string& lut_file) {
    const ModelParams p = params_from(params_file);
    const FilterLUT lut = load_lut(lut_file, &p);  // throws on CRC mismatch
    double worst_dc = 0.0, worst_pole = 0.0;
    for (std::uint32_t n = 0; n < lut.n_sections; ++n) {
        for (std::uint32_t g = 0; g < lut.n_g; ++g) {
            PoleFilter f;
            f.b = Eigen::Map<const Eigen::VectorXd>(lut.entry_b(n, g), lut.K);
            f.eps = lut.entry_eps(n, g);
            worst_dc = std::max(worst_dc,
                                std::abs(std::abs(beta_hat(f, 0.0, p.fs)) - 1.0));
            worst_pole = std::max(worst_pole, max_pole_radius(f));
        }
    }
    std::cout << "crc ok; worst |beta_hat(0)-1| = " << worst_dc
              << "; max pole radius = " << worst_pole << "\n";
    if (worst_pole >= 1.0) throw NumericalError("lut verify: unstable entry");
    return 0;
}

int cmd_lut_inspect(const std::string& lut_file) {
    const FilterLUT lut = load_lut(lut_file);
    std::cout << "sections " << lut.n_sections << ", G steps " << lut.n_g << ", order "
              << lut.K << ", G range [" << lut.G_min << ", " << lut.G_max
              << "], version " << lut.version << ", body crc32 " << lut_body_crc(lut)
              << "\n";
    return 0;
}

StimulusSpec stimulus_from_flags(const std::string& kind, double level, double freq,
                                 double f_start, double f_end, double duration,
                                 double fs) {
    StimulusSpec spec;
    spec.level_db = level;
    spec.duration_s = duration;
    spec.fs = fs;
    if (kind == "tone") {
        spec.kind = StimulusKind::tone;
        spec.freq_hz = freq;
    } else if (kind == "chirp") {
        spec.kind = StimulusKind::chirp;
        spec.f_start_hz = f_start;
        spec.f_end_hz = f_end;
        spec.ramp_s = std::min(0.005, duration / 10.0);
    } else if (kind == "click") {
        spec.kind = StimulusKind::click;
    } else {
        throw ConfigError("unknown stimulus kind: " + kind);
    }
    return spec;
}

int cmd_sim(const std::string& params_file, const std::string& mode_str,
            const std::string& lut_file, const StimulusSpec& spec, int update_period,
            const std::string& out_dir, const std::string& format,
            std::uint64_t seed, int decim, const std::string& sections_str) {
    const ModelParams p = params_from(params_file);
    const Mode mode = (mode_str == "vstar") ? Mode::vstar : Mode::v1d;
    TLConfig cfg;
    cfg.update_period = update_period;

    FilterLUT lut;
    const FilterLUT* lutp = nullptr;
    if (mode == Mode::vstar) {
        if (lut_file.empty()) throw ConfigError("vstar mode requires --lut");
        lut = load_lut(lut_file, &p);
        lutp = &lut;
    }
    const KneeCalibration cal = calibrate_knees(p, cfg, mode, lutp);
    cfg.v_knee1 = cal.v_knee1;
    cfg.v_knee2 = cal.v_knee2;
    std::cout << "knees: v1 " << cal.v_knee1_db << " dB at level " << cal.i_knee1_db
              << ", v2 " << cal.v_knee2_db << " dB at level " << cal.i_knee2_db << "\n";

    Simulator sim(p, cfg, mode, lutp);
    RunOptions ro;
    ro.decim = decim;
    if (!sections_str.empty()) {
        std::istringstream ss(sections_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) ro.sections.push_back(std::stoi(tok));
    }
    const Traces tr = sim.run(gen_stimulus(spec), ro);

    fs::create_directories(out_dir);
    const bool csv = (format == "csv");
    const std::string trace_path =
        (fs::path(out_dir) / (csv ? "trace.csv" : "trace.btrc")).string();
    save_traces(tr, trace_path, csv);
    write_run_manifest((fs::path(out_dir) / "manifest.json").string(), p, cfg, mode,
                       lutp, seed, spec);
    std::cout << "trace written to " << trace_path << " (" << tr.t.size()
              << " frames x " << tr.sections.size() << " sections)\n";
    return 0;
}

int cmd_analyze_fr(const std::string& trace_file, int section, double level,
                   double f_start, double f_end, double duration, double sigma_ms,
                   const std::string& out_file) {
    const Traces tr = load_traces(trace_file);
    int row = -1;
    for (std::size_t i = 0; i < tr.sections.size(); ++i)
        if (tr.sections[i] == section) row = static_cast<int>(i);
    if (row < 0) throw ConfigError("section not present in trace");
    StimulusSpec spec;
    spec.kind = StimulusKind::chirp;
    spec.level_db = level;
    spec.f_start_hz = f_start;
    spec.f_end_hz = f_end;
    spec.duration_s = duration;
    spec.fs = tr.fs / tr.decim;
    AnalysisResult r =
        sliding_gaussian_response(tr.v[row], spec, sigma_ms * 1e-3);
    bool partial = false;
    const double q = q10(r, &partial);
    std::ofstream out(out_file);
    out.precision(12);
    out << "f_hz,mag_db_re_level,phase_rad\n";
    for (std::size_t i = 0; i < r.freqs.size(); ++i)
        out << r.freqs[i] << "," << r.mag_db[i] << "," << r.phase[i] << "\n";
    std::cout << "frequency response written to " << out_file << "; Q10dB = "
              << (partial ? std::string("n/a (missing flank)") : std::to_string(q));
    if (r.sweep_warning) std::cout << " [warning: sweep fast for window]";
    std::cout << "\n";
    return 0;
}

int cmd_analyze_growth(const std::string& params_file, const std::string& mode_str,
                       const std::string& lut_file, double cf, const std::string& levels,
                       const std::string& out_file) {
    const ModelParams p = params_from(params_file);
    const Mode mode = (mode_str == "vstar") ? Mode::vstar : Mode::v1d;
    TLConfig cfg;
    FilterLUT lut;
    const FilterLUT* lutp = nullptr;
    if (mode == Mode::vstar) {
        if (lut_file.empty()) throw ConfigError("vstar mode requires --lut");
        lut = load_lut(lut_file, &p);
        lutp = &lut;
    }
    const KneeCalibration cal = calibrate_knees(p, cfg, mode, lutp);
    cfg.v_knee1 = cal.v_knee1;
    cfg.v_knee2 = cal.v_knee2;
    const GrowthResult g =
        growth_function(p, cfg, mode, lutp, cf, parse_levels(levels));
    std::ofstream out(out_file);
    out.precision(12);
    out << "level_db,v_rms,v_db\n";
    for (const auto& pt : g.points)
        out << pt.level_db << "," << pt.v_rms << "," << pt.v_db << "\n";
    std::cout << "growth table written to " << out_file << "\n"
              << "slope_low " << g.slope_low << " dB/dB, slope_mid " << g.slope_mid
              << " dB/dB, compressive span " << g.span_db << " dB [" << g.span_lo_db
              << ", " << g.span_hi_db << "], compression depth "
              << g.compression_depth_db << " dB\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cochlear transmission-line simulation toolkit"};
    app.require_subcommand(1);

    std::string params_file, lut_file, net_file, out_dir = "out", format = "bin";
    std::uint64_t seed = 1;
    int update_period = 6;

    // fit
    auto* fit = app.add_subcommand("fit", "fit correction filters for (f_bm, G) pairs");
    std::vector<double> fit_fbm{25500.0}, fit_g{0.0, 0.35, 1.0, 1.3};
    bool fit_dump_beta = false;
    fit->add_option("--params", params_file, "parameter file");
    fit->add_option("--fbm", fit_fbm, "characteristic frequencies (Hz)");
    fit->add_option("--g", fit_g, "active-process strengths");
    fit->add_option("--out", out_dir, "output directory");
    fit->add_flag("--dump-beta", fit_dump_beta, "also write beta target CSVs");

    // train
    auto* train = app.add_subcommand("train", "train the coefficient regressor");
    std::string train_out = "rbf.json";
    train->add_option("--params", params_file, "parameter file");
    train->add_option("--seed", seed, "training seed");
    train->add_option("--out", train_out, "output net file");

    // lut
    auto* lutc = app.add_subcommand("lut", "build / verify / inspect the filter table");
    lutc->require_subcommand(1);
    auto* lut_build = lutc->add_subcommand("build", "materialize a net into a table");
    std::string lut_out = "filters.blut";
    lut_build->add_option("--params", params_file, "parameter file");
    lut_build->add_option("--net", net_file, "trained net file")->required();
    lut_build->add_option("--out", lut_out, "output table file");
    auto* lut_ver = lutc->add_subcommand("verify", "CRC + invariants check");
    lut_ver->add_option("--params", params_file, "parameter file");
    lut_ver->add_option("--lut", lut_file, "table file")->required();
    auto* lut_ins = lutc->add_subcommand("inspect", "print the table header");
    lut_ins->add_option("--lut", lut_file, "table file")->required();

    // sim
    auto* simc = app.add_subcommand("sim", "run a time-domain simulation");
    std::string mode_str = "v1d", stim_kind = "tone", sections_str;
    double level = 40.0, freq = 20000.0, f_start = 5000.0, f_end = 30000.0;
    double duration = 0.02;
    int decim = 1;
    simc->add_option("--params", params_file, "parameter file");
    simc->add_option("--mode", mode_str, "v1d|vstar")
        ->check(CLI::IsMember({"v1d", "vstar"}));
    simc->add_option("--lut", lut_file, "filter table (vstar)");
    simc->add_option("--stimulus", stim_kind, "tone|chirp|click")
        ->check(CLI::IsMember({"tone", "chirp", "click"}));
    simc->add_option("--level", level, "stimulus level (dB)");
    simc->add_option("--freq", freq, "tone frequency (Hz)");
    simc->add_option("--f-start", f_start, "chirp start (Hz)");
    simc->add_option("--f-end", f_end, "chirp end (Hz)");
    simc->add_option("--duration", duration, "stimulus duration (s)");
    simc->add_option("--update-period", update_period, "filter update period (steps)")
        ->check(CLI::IsMember({1, 6, 12}));
    simc->add_option("--seed", seed, "seed recorded in the manifest");
    simc->add_option("--out", out_dir, "output directory");
    simc->add_option("--format", format, "csv|bin")
        ->check(CLI::IsMember({"csv", "bin"}));
    simc->add_option("--decim", decim, "output decimation");
    simc->add_option("--sections", sections_str, "comma-separated section indices");

    // analyze
    auto* ana = app.add_subcommand("analyze", "analysis of saved traces / sweeps");
    ana->require_subcommand(1);
    auto* fr = ana->add_subcommand("fr", "chirp-derived frequency response + Q10");
    std::string trace_file, fr_out = "fr.csv";
    int fr_section = 0;
    double fr_sigma_ms = 2.0;
    fr->add_option("--trace", trace_file, "saved trace")->required();
    fr->add_option("--section", fr_section, "section index")->required();
    fr->add_option("--level", level, "chirp level (dB)");
    fr->add_option("--f-start", f_start, "chirp start (Hz)");
    fr->add_option("--f-end", f_end, "chirp end (Hz)");
    fr->add_option("--duration", duration, "chirp duration (s)");
    fr->add_option("--sigma-ms", fr_sigma_ms, "gaussian window sigma (ms)");
    fr->add_option("--out", fr_out, "output CSV");
    auto* gr = ana->add_subcommand("growth", "tone growth function at a place");
    double gr_cf = 20000.0;
    std::string gr_levels = "0:100:5", gr_out = "growth.csv";
    gr->add_option("--params", params_file, "parameter file");
    gr->add_option("--mode", mode_str, "v1d|vstar")
        ->check(CLI::IsMember({"v1d", "vstar"}));
    gr->add_option("--lut", lut_file, "filter table (vstar)");
    gr->add_option("--cf", gr_cf, "probe characteristic frequency (Hz)");
    gr->add_option("--levels", gr_levels, "lo:hi:step or comma list (dB)");
    gr->add_option("--out", gr_out, "output CSV");

    // verify
    auto* ver = app.add_subcommand("verify", "run the acceptance suite");
    std::string cache_dir = "verify_cache";
    std::vector<int> only;
    ver->add_option("--cache", cache_dir, "artifact cache directory");
    ver->add_option("--seed", seed, "training seed");
    ver->add_option("--only", only, "criterion ids to run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return cmd_fit(params_file, fit_fbm, fit_g, out_dir, fit_dump_beta);
        if (*train) return cmd_train(params_file, seed, train_out);
        if (*lut_build) return cmd_lut_build(params_file, net_file, lut_out);
        if (*lut_ver) return cmd_lut_verify(params_file, lut_file);
        if (*lut_ins) return cmd_lut_inspect(lut_file);
        if (*simc) {
            const StimulusSpec spec = stimulus_from_flags(
                stim_kind, level, freq, f_start, f_end, duration,
                params_from(params_file).fs);
            return cmd_sim(params_file, mode_str, lut_file, spec, update_period,
                           out_dir, format, seed, decim, sections_str);
        }
        if (*fr)
            return cmd_analyze_fr(trace_file, fr_section, level, f_start, f_end,
                                  duration, fr_sigma_ms, fr_out);
        if (*gr)
            return cmd_analyze_growth(params_file, mode_str, lut_file, gr_cf, gr_levels,
                                      gr_out);
        if (*ver) {
            AcceptanceOptions opts;
            opts.cache_dir = cache_dir;
            opts.seed = seed;
            opts.only = only;
            const auto results = cochlea::run_acceptance(opts, std::cout);
            return all_passed(results) ? 0 : 4;
        }
    } catch (const cochlea::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cochlea::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
