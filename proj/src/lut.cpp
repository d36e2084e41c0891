#include "cochlea/lut.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cochlea/errors.hpp"

namespace cochlea {

FilterLUT build_lut(const RbfNet& net, const ModelParams& p, int n_g) {
    const SectionMap map = section_positions(p);
    FilterLUT lut;
    lut.n_sections = static_cast<std::uint32_t>(p.N);
    lut.n_g = static_cast<std::uint32_t>(n_g);
    lut.K = static_cast<std::uint32_t>(net.K);
    lut.G_min = p.G_min;
    lut.G_max = p.G_max;
    lut.b.assign(std::size_t(p.N) * n_g * net.K, 0.0);
    lut.eps.assign(std::size_t(p.N) * n_g, 0.0);
    lut.omega_bm.resize(p.N);
    for (int n = 0; n < p.N; ++n)
        lut.omega_bm[n] = omega_bm_of(2.0 * M_PI * map.cf[n]);

    std::vector<std::pair<int, int>> unstable;
#pragma omp parallel for schedule(dynamic)
    for (int n = 0; n < p.N; ++n) {
        for (int g = 0; g < n_g; ++g) {
            const Eigen::VectorXd bk = rbf_forward(net, lut.omega_bm[n], lut.g_value(g));
            PoleFilter f;
            f.b = bk;
            f.eps = -bk.sum();
            if (!is_stable(f)) {
#pragma omp critical
                unstable.emplace_back(n, g);
                continue;
            }
            std::copy(bk.data(), bk.data() + net.K,
                      lut.b.begin() + (std::size_t(n) * n_g + g) * net.K);
            lut.eps[std::size_t(n) * n_g + g] = f.eps;
        }
    }
    if (!unstable.empty()) {
        std::ostringstream msg;
        msg << "build_lut: " << unstable.size() << " unstable entries:";
        for (std::size_t i = 0; i < unstable.size() && i < 16; ++i)
            msg << " (" << unstable[i].first << "," << unstable[i].second << ")";
        throw NumericalError(msg.str());
    }
    return lut;
}

int lut_g_index(const FilterLUT& lut, double G) {
    if (G <= lut.G_min) return 0;
    if (G >= lut.G_max) return static_cast<int>(lut.n_g) - 1;
    const double step = (lut.G_max - lut.G_min) / (lut.n_g - 1);
    const double pos = (G - lut.G_min) / step;
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, static_cast<int>(lut.n_g) - 1);
    return (G - lut.g_value(lo)) <= (lut.g_value(hi) - G) ? lo : hi;
}

PoleFilter lut_query(const FilterLUT& lut, int n, double G) {
    if (n < 0 || n >= static_cast<int>(lut.n_sections))
        throw std::domain_error("lut_query: section index out of range");
    const int g = lut_g_index(lut, G);
    PoleFilter f;
    f.b = Eigen::Map<const Eigen::VectorXd>(lut.entry_b(n, g), lut.K);
    f.eps = lut.entry_eps(n, g);
    f.G = lut.g_value(g);
    f.omega_bm = lut.omega_bm.empty() ? 0.0 : lut.omega_bm[n];
    return f;
}

namespace {

void body_bytes(const FilterLUT& lut, std::vector<unsigned char>& out) {
    const std::size_t rec = (lut.K + 1) * sizeof(double);
    out.resize(std::size_t(lut.n_sections) * lut.n_g * rec);
    unsigned char* dst = out.data();
    for (std::uint32_t n = 0; n < lut.n_sections; ++n) {
        for (std::uint32_t g = 0; g < lut.n_g; ++g) {
            std::memcpy(dst, lut.entry_b(n, g), lut.K * sizeof(double));
            dst += lut.K * sizeof(double);
            const double e = lut.entry_eps(n, g);
            std::memcpy(dst, &e, sizeof(double));
            dst += sizeof(double);
        }
    }
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("lut file: truncated");
    return v;
}

}  // namespace

std::uint32_t lut_body_crc(const FilterLUT& lut) {
    std::vector<unsigned char> body;
    body_bytes(lut, body);
    return static_cast<std::uint32_t>(
        ::crc32(0L, body.data(), static_cast<uInt>(body.size())));
}

void save_lut(const FilterLUT& lut, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out.write("BLUT", 4);
    put<std::uint32_t>(out, lut.version);
    put<std::uint32_t>(out, lut.n_sections);
    put<std::uint32_t>(out, lut.n_g);
    put<std::uint32_t>(out, lut.K);
    put<double>(out, lut.G_min);
    put<double>(out, lut.G_max);
    std::vector<unsigned char> body;
    body_bytes(lut, body);
    out.write(reinterpret_cast<const char*>(body.data()),
              static_cast<std::streamsize>(body.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(
                                ::crc32(0L, body.data(), static_cast<uInt>(body.size()))));
    if (!out) throw ConfigError("lut write failed: " + path);
}

FilterLUT load_lut(const std::string& path, const ModelParams* p) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "BLUT", 4) != 0)
        throw ConfigError("lut file: bad magic");
    FilterLUT lut;
    lut.version = get<std::uint32_t>(in);
    lut.n_sections = get<std::uint32_t>(in);
    lut.n_g = get<std::uint32_t>(in);
    lut.K = get<std::uint32_t>(in);
    lut.G_min = get<double>(in);
    lut.G_max = get<double>(in);
    if (lut.n_sections == 0 || lut.n_g == 0 || lut.K == 0 || lut.K > 4096)
        throw ConfigError("lut file: implausible header");

    const std::size_t n_rec = std::size_t(lut.n_sections) * lut.n_g;
    std::vector<unsigned char> body(n_rec * (lut.K + 1) * sizeof(double));
    in.read(reinterpret_cast<char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
    if (!in) throw ConfigError("lut file: truncated body");
    const std::uint32_t crc_stored = get<std::uint32_t>(in);
    const std::uint32_t crc_actual = static_cast<std::uint32_t>(
        ::crc32(0L, body.data(), static_cast<uInt>(body.size())));
    if (crc_stored != crc_actual)
        throw ConfigError("lut file: CRC mismatch");

    lut.b.resize(n_rec * lut.K);
    lut.eps.resize(n_rec);
    const unsigned char* src = body.data();
    for (std::size_t r = 0; r < n_rec; ++r) {
        std::memcpy(&lut.b[r * lut.K], src, lut.K * sizeof(double));
        src += lut.K * sizeof(double);
        std::memcpy(&lut.eps[r], src, sizeof(double));
        src += sizeof(double);
    }
    if (p && static_cast<std::uint32_t>(p->N) == lut.n_sections) {
        const SectionMap map = section_positions(*p);
        lut.omega_bm.resize(p->N);
        for (int n = 0; n < p->N; ++n)
            lut.omega_bm[n] = omega_bm_of(2.0 * M_PI * map.cf[n]);
    }
    return lut;
}

}  // namespace cochlea
