#include <cmath>
#include <cstdio>
#include <fstream>

#include "cochlea/errors.hpp"
#include "cochlea/lut.hpp"
#include "cochlea/rbf.hpp"
#include "cochlea/wkb.hpp"
#include "doctest.h"

using namespace cochlea;

namespace {

// cheap synthetic beta family for training tests: a smooth bump whose height
// scales with (G - G_ref), flat at DC
ComplexSpectrum synthetic_beta(const ModelParams& p, double omega_bm, double G) {
    ComplexSpectrum b;
    b.freqs = regression_grid(p);
    b.values.resize(p.m2);
    for (int m = 0; m < p.m2; ++m) {
        const double nu = 2.0 * M_PI * b.freqs[m] / omega_bm;
        const double bump = std::exp(-8.0 * (nu - 0.9) * (nu - 0.9));
        const double mag = 1.0 + 0.35 * (G - p.G_ref) * bump;
        const double ph = -0.2 * (G - p.G_ref) * bump;
        b.values[m] = std::polar(mag, ph);
    }
    return b;
}

ComplexSpectrum unit_beta_fn(const ModelParams& p) {
    ComplexSpectrum b;
    b.freqs = regression_grid(p);
    b.values.assign(p.m2, 1.0);
    return b;
}

}  // namespace

TEST_CASE("net construction and forward pass") {
    const ModelParams p;
    RbfNet net = make_rbf_net(p);
    CHECK(net.n_centers() == 360);
    CHECK(net.centers.rows() == 18 * 20);
    CHECK(net.sigma == 0.04);
    // normalization bounds span the mapped section range
    CHECK(net.omega_bm_min == doctest::Approx(2.0 * M_PI * 1721.2).epsilon(1e-3));
    CHECK(net.omega_bm_max == doctest::Approx(2.0 * M_PI * 61591.2).epsilon(1e-3));

    SUBCASE("zero weights give the zero vector") {
        const Eigen::VectorXd out = rbf_forward(net, 2.0 * M_PI * 10e3, 0.5);
        CHECK(out.size() == p.K);
        CHECK(out.norm() == 0.0);
    }

    SUBCASE("single center, input at the center, unit affine term") {
        RbfNet tiny = net;
        tiny.centers.resize(1, 2);
        tiny.centers << 0.25, 0.5;
        tiny.weights = Eigen::MatrixXd::Zero(1, p.K);
        tiny.weights(0, 0) = 1.0;
        tiny.slope = Eigen::VectorXd::Zero(1);
        tiny.intercept = Eigen::VectorXd::Ones(1);
        const double wbm =
            tiny.omega_bm_min + 0.25 * (tiny.omega_bm_max - tiny.omega_bm_min);
        const double g = tiny.g_min + 0.5 * (tiny.g_max - tiny.g_min);
        const Eigen::VectorXd out = rbf_forward(tiny, wbm, g);
        CHECK(out(0) == doctest::Approx(1.0));  // exp(0) * (0*u1 + 1) * w
        for (int k = 1; k < p.K; ++k) CHECK(out(k) == 0.0);
    }
}

TEST_CASE("training") {
    ModelParams p;
    p.N = 100;  // smaller section map; training cost dominated by the fits

    SUBCASE("constant unit target trains to near-zero coefficients") {
        TrainOptions o;
        o.seed = 42;
        o.stage1_steps = 200;
        o.stage2_steps = 50;
        const RbfNet net = train_rbf_with(
            p, o, [&](double, double) { return unit_beta_fn(p); });
        double worst = 0.0;
        for (double u1 : {0.1, 0.5, 0.9}) {
            for (double u2 : {0.1, 0.5, 0.9}) {
                const double wbm =
                    net.omega_bm_min + u1 * (net.omega_bm_max - net.omega_bm_min);
                const Eigen::VectorXd out =
                    rbf_forward(net, wbm, p.G_min + u2 * (p.G_max - p.G_min));
                worst = std::max(worst, out.lpNorm<Eigen::Infinity>());
            }
        }
        CHECK(worst < 1e-2);
    }

    SUBCASE("stage-1 loss decreases and training is reproducible") {
        TrainOptions o;
        o.seed = 7;
        o.stage1_steps = 300;
        o.stage2_steps = 120;
        TrainReport rep;
        auto fn = [&](double wbm, double G) { return synthetic_beta(p, wbm, G); };
        const RbfNet a = train_rbf_with(p, o, fn, &rep);
        CHECK(rep.stage1_last_mean < rep.stage1_first_mean);
        const RbfNet b = train_rbf_with(p, o, fn);
        CHECK((a.weights - b.weights).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((a.slope - b.slope).lpNorm<Eigen::Infinity>() == 0.0);

        SUBCASE("fine-tuning does not degrade the validation cost by > 5%") {
            TrainOptions o1 = o;
            o1.stage2_steps = 0;
            const RbfNet stage1_only = train_rbf_with(p, o1, fn);
            auto val_cost = [&](const RbfNet& net) {
                double acc = 0.0;
                for (double u1 : {0.2, 0.5, 0.8}) {
                    for (double u2 : {0.2, 0.5, 0.8}) {
                        const double wbm = net.omega_bm_min +
                                           u1 * (net.omega_bm_max - net.omega_bm_min);
                        const double G = p.G_min + u2 * (p.G_max - p.G_min);
                        const ComplexSpectrum beta = fn(wbm, G);
                        const RegressionProblem prob = build_problem(beta, wbm, p);
                        acc += lse_cost_plain(rbf_forward(net, wbm, G), prob);
                    }
                }
                return acc;
            };
            CHECK(val_cost(a) <= 1.05 * val_cost(stage1_only));
        }
    }

    SUBCASE("save / load round trip") {
        TrainOptions o;
        o.seed = 3;
        o.stage1_steps = 40;
        o.stage2_steps = 0;
        const RbfNet net = train_rbf_with(
            p, o, [&](double wbm, double G) { return synthetic_beta(p, wbm, G); });
        save_rbf(net, "rbf_test.json");
        const RbfNet back = load_rbf("rbf_test.json");
        CHECK((net.weights - back.weights).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(back.omega_bm_max == net.omega_bm_max);
        std::remove("rbf_test.json");
    }
}

TEST_CASE("lookup table") {
    ModelParams p;
    p.N = 60;
    TrainOptions o;
    o.seed = 11;
    o.stage1_steps = 800;
    o.stage2_steps = 0;
    const RbfNet net = train_rbf_with(
        p, o, [&](double wbm, double G) { return synthetic_beta(p, wbm, G); });
    const FilterLUT lut = build_lut(net, p);

    SUBCASE("dimensions and invariants") {
        CHECK(lut.n_sections == 60);
        CHECK(lut.n_g == 30);
        CHECK(lut.K == 32);
        for (std::uint32_t n = 0; n < lut.n_sections; ++n) {
            for (std::uint32_t g = 0; g < lut.n_g; ++g) {
                double sum = 0.0;
                for (std::uint32_t k = 0; k < lut.K; ++k) sum += lut.entry_b(n, g)[k];
                const double dc = (1.0 + lut.entry_eps(n, g)) / (1.0 - sum);
                CHECK(std::abs(dc - 1.0) < 1e-9);
            }
        }
    }

    SUBCASE("query endpoints and tie-break") {
        CHECK(lut_g_index(lut, p.G_min) == 0);
        CHECK(lut_g_index(lut, p.G_max) == 29);
        CHECK(lut_g_index(lut, p.G_min - 5.0) == 0);   // clamped
        CHECK(lut_g_index(lut, p.G_max + 5.0) == 29);  // clamped
        const double mid = 0.5 * (lut.g_value(7) + lut.g_value(8));
        CHECK(lut_g_index(lut, mid) == 7);  // ties toward the lower index
        const PoleFilter f = lut_query(lut, 10, lut.g_value(3) + 1e-9);
        CHECK(f.G == doctest::Approx(lut.g_value(3)));
        CHECK(f.omega_bm > 0.0);
        CHECK_THROWS_AS(lut_query(lut, -1, 0.5), std::domain_error);
    }

    SUBCASE("adjacent-in-G smoothness proxy") {
        for (std::uint32_t n = 0; n < lut.n_sections; n += 7) {
            for (std::uint32_t g = 0; g + 1 < lut.n_g; ++g) {
                auto peak_mag = [&](std::uint32_t gi) {
                    PoleFilter f;
                    f.b = Eigen::Map<const Eigen::VectorXd>(lut.entry_b(n, gi), lut.K);
                    f.eps = lut.entry_eps(n, gi);
                    double mx = 0.0;
                    for (double fr = 0.0; fr < p.fs / 2; fr += p.fs / 128)
                        mx = std::max(mx, std::abs(beta_hat(f, 2 * M_PI * fr, p.fs)));
                    return mx;
                };
                const double r = peak_mag(g) / peak_mag(g + 1);
                CHECK(std::abs(20.0 * std::log10(r)) < 3.0);
            }
        }
    }

    SUBCASE("binary round trip is bit-exact and CRC guards the body") {
        save_lut(lut, "lut_test.blut");
        const FilterLUT back = load_lut("lut_test.blut", &p);
        CHECK(back.b == lut.b);
        CHECK(back.eps == lut.eps);
        CHECK(back.n_sections == lut.n_sections);
        CHECK(lut_body_crc(back) == lut_body_crc(lut));

        // corrupt one byte in the body
        std::fstream f("lut_test.blut",
                       std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(64);
        char c;
        f.seekg(64);
        f.get(c);
        f.seekp(64);
        f.put(static_cast<char>(c ^ 0x5a));
        f.close();
        CHECK_THROWS_AS(load_lut("lut_test.blut"), ConfigError);
        std::remove("lut_test.blut");
    }
}
