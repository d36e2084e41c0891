#include "cochlea/trace_io.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "cochlea/errors.hpp"
#include "json.hpp"

namespace cochlea {

void save_traces_csv(const Traces& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out.precision(17);
    const bool has_g = !tr.G.empty();
    out << (has_g ? "t,section,v,y,G\n" : "t,section,v,y\n");
    for (std::size_t f = 0; f < tr.t.size(); ++f) {
        for (std::size_t s = 0; s < tr.sections.size(); ++s) {
            out << tr.t[f] << "," << tr.sections[s] << "," << tr.v[s][f] << ","
                << tr.y[s][f];
            if (has_g) out << "," << tr.G[s][f];
            out << "\n";
        }
    }
}

Traces load_traces_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("empty trace file: " + path);
    const bool has_g = header.find(",G") != std::string::npos;

    std::map<int, std::size_t> index;
    Traces tr;
    std::string line;
    double t_prev = -1.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double t, v, y, g = 0.0;
        int sec;
        char c;
        ss >> t >> c >> sec >> c >> v >> c >> y;
        if (has_g) ss >> c >> g;
        if (!ss) throw ConfigError("malformed trace row: " + line);
        auto it = index.find(sec);
        if (it == index.end()) {
            it = index.emplace(sec, tr.sections.size()).first;
            tr.sections.push_back(sec);
            tr.v.emplace_back();
            tr.y.emplace_back();
            if (has_g) tr.G.emplace_back();
        }
        if (t != t_prev) {
            tr.t.push_back(t);
            t_prev = t;
        }
        tr.v[it->second].push_back(v);
        tr.y[it->second].push_back(y);
        if (has_g) tr.G[it->second].push_back(g);
    }
    if (tr.t.size() >= 2) tr.fs = 1.0 / (tr.t[1] - tr.t[0]);
    return tr;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("trace file: truncated");
    return v;
}

void put_col(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_col(std::istream& in, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ConfigError("trace file: truncated column");
}

}  // namespace

void save_traces_bin(const Traces& tr, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out.write("BTRC", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tr.sections.size()));
    put<std::uint64_t>(out, tr.t.size());
    put<double>(out, tr.fs);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tr.decim));
    put<std::uint8_t>(out, tr.G.empty() ? 0 : 1);
    for (int s : tr.sections) put<std::int32_t>(out, s);
    put_col(out, tr.t);
    for (const auto& col : tr.v) put_col(out, col);
    for (const auto& col : tr.y) put_col(out, col);
    for (const auto& col : tr.G) put_col(out, col);
    if (!out) throw ConfigError("trace write failed: " + path);
}

Traces load_traces_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "BTRC", 4) != 0)
        throw ConfigError("trace file: bad magic");
    get<std::uint32_t>(in);  // version
    const auto n_sec = get<std::uint32_t>(in);
    const auto n_frames = get<std::uint64_t>(in);
    Traces tr;
    tr.fs = get<double>(in);
    tr.decim = static_cast<int>(get<std::uint32_t>(in));
    const bool has_g = get<std::uint8_t>(in) != 0;
    tr.sections.resize(n_sec);
    for (auto& s : tr.sections) s = get<std::int32_t>(in);
    get_col(in, tr.t, n_frames);
    tr.v.resize(n_sec);
    tr.y.resize(n_sec);
    for (auto& col : tr.v) get_col(in, col, n_frames);
    for (auto& col : tr.y) get_col(in, col, n_frames);
    if (has_g) {
        tr.G.resize(n_sec);
        for (auto& col : tr.G) get_col(in, col, n_frames);
    }
    return tr;
}

void save_traces(const Traces& tr, const std::string& path, bool csv) {
    if (csv)
        save_traces_csv(tr, path);
    else
        save_traces_bin(tr, path);
}

Traces load_traces(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
        return load_traces_csv(path);
    return load_traces_bin(path);
}

void write_run_manifest(const std::string& path, const ModelParams& p,
                        const TLConfig& cfg, Mode mode, const FilterLUT* lut,
                        std::uint64_t seed, const StimulusSpec& spec) {
    // FNV-1a over the canonical parameter serialization
    auto fnv = [](const std::string& s) {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    };
    std::ostringstream ser;
    ser.precision(17);
    ser << p.H << p.sigma_bm << p.rho << p.mu << p.b_visc << p.G_min << p.G_max
        << p.G_ref << p.fs << p.N << p.L << p.A1 << p.A2 << p.B << p.qerb_base
        << p.qerb_exp << p.a << p.lambda1 << p.lambda2 << p.K << p.m2
        << cfg.coupling << cfg.m_s0 << cfg.m_p0 << cfg.xi_start_20k << cfg.xi_sat_ratio
        << cfg.stim_scale << cfg.drive_scale << cfg.i_knee1_db << cfg.v_knee1
        << cfg.v_knee2 << cfg.update_period << cfg.rk_rtol << cfg.rk_atol;

    nlohmann::json j;
    j["config_hash"] = fnv(ser.str());
    j["mode"] = (mode == Mode::vstar) ? "vstar" : "v1d";
    j["seed"] = seed;
    j["lut_crc32"] = lut ? lut_body_crc(*lut) : 0u;
    j["stimulus"] = {{"kind", spec.kind == StimulusKind::tone    ? "tone"
                              : spec.kind == StimulusKind::chirp ? "chirp"
                                                                 : "click"},
                     {"level_db", spec.level_db},
                     {"freq_hz", spec.freq_hz},
                     {"f_start_hz", spec.f_start_hz},
                     {"f_end_hz", spec.f_end_hz},
                     {"duration_s", spec.duration_s},
                     {"fs", spec.fs}};
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace cochlea
