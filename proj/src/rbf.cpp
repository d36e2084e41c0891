#include "cochlea/rbf.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "cochlea/errors.hpp"
#include "cochlea/filter_design.hpp"
#include "cochlea/wkb.hpp"
#include "json.hpp"

namespace cochlea {

RbfNet make_rbf_net(const ModelParams& p) {
    RbfNet net;
    net.K = p.K;
    net.g_min = p.G_min;
    net.g_max = p.G_max;
    const SectionMap map = section_positions(p);
    net.omega_bm_min = omega_bm_of(2.0 * M_PI * map.cf.back());
    net.omega_bm_max = omega_bm_of(2.0 * M_PI * map.cf.front());

    const int C = net.n_omega * net.n_g;
    net.centers.resize(C, 2);
    for (int i = 0; i < net.n_omega; ++i) {
        for (int j = 0; j < net.n_g; ++j) {
            const int c = i * net.n_g + j;
            net.centers(c, 0) = (net.n_omega == 1) ? 0.5 : double(i) / (net.n_omega - 1);
            net.centers(c, 1) = (net.n_g == 1) ? 0.5 : double(j) / (net.n_g - 1);
        }
    }
    net.weights = Eigen::MatrixXd::Zero(C, net.K);
    net.slope = Eigen::VectorXd::Zero(C);
    net.intercept = Eigen::VectorXd::Ones(C);
    return net;
}

namespace {

inline double clamp01(double u) { return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u); }

// phi_c(u) = (s_c u1 + t_c) * exp(-|u-c|^2/(2 sigma^2)); also returns the bare
// kernel needed for the affine-term gradients.
void activations(const RbfNet& net, double u1, double u2,
                 Eigen::VectorXd& phi, Eigen::VectorXd& kernel) {
    const int C = net.n_centers();
    phi.resize(C);
    kernel.resize(C);
    const double inv2s2 = 1.0 / (2.0 * net.sigma * net.sigma);
    for (int c = 0; c < C; ++c) {
        const double d1 = u1 - net.centers(c, 0);
        const double d2 = u2 - net.centers(c, 1);
        kernel(c) = std::exp(-(d1 * d1 + d2 * d2) * inv2s2);
        phi(c) = (net.slope(c) * u1 + net.intercept(c)) * kernel(c);
    }
}

struct Normalized {
    double u1, u2;
};

Normalized normalize(const RbfNet& net, double omega_bm, double G) {
    return {clamp01((omega_bm - net.omega_bm_min) /
                    (net.omega_bm_max - net.omega_bm_min)),
            clamp01((G - net.g_min) / (net.g_max - net.g_min))};
}

// Deterministic uniform in [0,1): 53-bit mantissa straight from the engine.
inline double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

struct Momentum {
    Eigen::MatrixXd w;
    Eigen::VectorXd s, t;
    void init(const RbfNet& net) {
        w = Eigen::MatrixXd::Zero(net.n_centers(), net.K);
        s = Eigen::VectorXd::Zero(net.n_centers());
        t = Eigen::VectorXd::Zero(net.n_centers());
    }
};

// Backpropagate dL/db_hat into the net parameters and apply one momentum step.
// The gradient norm is clipped: the hinge term of the stage-2 cost behaves as
// a near-infinite wall when an emitted filter approaches instability, and a
// raw momentum step there destroys the surrounding region.
void sgd_step(RbfNet& net, Momentum& vel, Eigen::VectorXd grad_b,
              double u1, const Eigen::VectorXd& phi, const Eigen::VectorXd& kernel,
              double lr, double momentum, double grad_clip) {
    const double gn = grad_b.norm();
    if (gn > grad_clip) grad_b *= grad_clip / gn;
    const Eigen::MatrixXd gw = phi * grad_b.transpose();          // C x K
    const Eigen::VectorXd wg = net.weights * grad_b;              // C
    const Eigen::VectorXd gs = wg.cwiseProduct(kernel) * u1;
    const Eigen::VectorXd gt = wg.cwiseProduct(kernel);
    vel.w = momentum * vel.w - lr * gw;
    vel.s = momentum * vel.s - lr * gs;
    vel.t = momentum * vel.t - lr * gt;
    net.weights += vel.w;
    net.slope += vel.s;
    net.intercept += vel.t;
}

}  // namespace

Eigen::VectorXd rbf_forward(const RbfNet& net, double omega_bm, double G) {
    const Normalized u = normalize(net, omega_bm, G);
    Eigen::VectorXd phi, kernel;
    activations(net, u.u1, u.u2, phi, kernel);
    return net.weights.transpose() * phi;
}

RbfNet train_rbf_with(const ModelParams& p, const TrainOptions& opts,
                      const BetaFn& beta_fn, TrainReport* report) {
    RbfNet net = make_rbf_net(p);
    std::mt19937_64 rng(opts.seed);
    Momentum vel;
    vel.init(net);

    auto sample = [&](double& omega_bm, double& G) {
        omega_bm = net.omega_bm_min +
                   uniform01(rng) * (net.omega_bm_max - net.omega_bm_min);
        G = net.g_min + uniform01(rng) * (net.g_max - net.g_min);
    };

    std::vector<double> loss1(opts.stage1_steps), loss2(opts.stage2_steps);
    // Divergence scale: the per-sample cost varies by orders of magnitude
    // across (omega_bm, G), so reference the running max of the early steps.
    double scale1 = 1e-12;

    // Stage-1 targets; re-fit with escalating ridge when the stability
    // policy rejects a sample (deep-reduction corners of the domain).
    auto fit_target = [&](const ComplexSpectrum& beta, double omega_bm, double G) {
        ModelParams q = p;
        for (int attempt = 0;; ++attempt) {
            try {
                return fit_filter(beta, omega_bm, G, q);
            } catch (const FitError&) {
                if (attempt >= 5) throw;
                q.lambda1 *= 4.0;
            }
        }
    };

    // Stage 1: squared distance to LM-fitted coefficients.
    for (int step = 0; step < opts.stage1_steps; ++step) {
        double omega_bm, G;
        sample(omega_bm, G);
        const ComplexSpectrum beta = beta_fn(omega_bm, G);
        const PoleFilter target = fit_target(beta, omega_bm, G);
        const Normalized u = normalize(net, omega_bm, G);
        Eigen::VectorXd phi, kernel;
        activations(net, u.u1, u.u2, phi, kernel);
        const Eigen::VectorXd out = net.weights.transpose() * phi;
        const Eigen::VectorXd err = out - target.b;
        const double loss = err.squaredNorm();
        loss1[step] = loss;
        if (step < 50) scale1 = std::max(scale1, loss);
        if (!std::isfinite(loss) || (step >= 50 && loss > 1e6 * scale1))
            throw TrainingError("train_rbf: stage-1 divergence", opts.seed, step);
        sgd_step(net, vel, 2.0 * err, u.u1, phi, kernel, opts.lr1,
                 opts.momentum1, /*grad_clip=*/1e3);
    }

    // Stage 2: minimize the penalized LSE cost of the net's own output.
    vel.init(net);
    double scale2 = 1e-12;
    for (int step = 0; step < opts.stage2_steps; ++step) {
        double omega_bm, G;
        sample(omega_bm, G);
        const ComplexSpectrum beta = beta_fn(omega_bm, G);
        const RegressionProblem prob = build_problem(beta, omega_bm, p);
        const Normalized u = normalize(net, omega_bm, G);
        Eigen::VectorXd phi, kernel;
        activations(net, u.u1, u.u2, phi, kernel);
        const Eigen::VectorXd out = net.weights.transpose() * phi;
        double cost = 0.0;
        Eigen::VectorXd grad_b = lse_cost_plain_grad(out, prob, &cost);
        // per-row normalization keeps the stated learning rate meaningful
        // across the (omega_bm, G) range (m1 varies by a factor of ~30)
        cost /= p.m2;
        grad_b /= p.m2;
        loss2[step] = cost;
        if (step < 50) scale2 = std::max(scale2, cost);
        if (!std::isfinite(cost) || (step >= 50 && cost > 1e6 * scale2))
            throw TrainingError("train_rbf: stage-2 divergence", opts.seed, step);
        sgd_step(net, vel, grad_b, u.u1, phi, kernel, opts.lr2,
                 opts.momentum2, /*grad_clip=*/1.0);
    }

    if (report) {
        auto mean_of = [](const std::vector<double>& v, std::size_t from, std::size_t to) {
            if (v.empty() || to <= from) return 0.0;
            double s = 0.0;
            for (std::size_t i = from; i < to; ++i) s += v[i];
            return s / (to - from);
        };
        const std::size_t h1 = std::min<std::size_t>(100, loss1.size());
        const std::size_t h2 = std::min<std::size_t>(100, loss2.size());
        report->stage1_first_mean = mean_of(loss1, 0, h1);
        report->stage1_last_mean = mean_of(loss1, loss1.size() - h1, loss1.size());
        report->stage2_first_mean = mean_of(loss2, 0, h2);
        report->stage2_last_mean = mean_of(loss2, loss2.size() - h2, loss2.size());
    }
    return net;
}

RbfNet train_rbf(const ModelParams& p, const TrainOptions& opts, TrainReport* report) {
    return train_rbf_with(
        p, opts,
        [&p](double omega_bm, double G) { return beta_target(omega_bm, G, p); },
        report);
}

void save_rbf(const RbfNet& net, const std::string& path) {
    nlohmann::json j;
    j["n_omega"] = net.n_omega;
    j["n_g"] = net.n_g;
    j["sigma"] = net.sigma;
    j["K"] = net.K;
    j["omega_bm_min"] = net.omega_bm_min;
    j["omega_bm_max"] = net.omega_bm_max;
    j["g_min"] = net.g_min;
    j["g_max"] = net.g_max;
    auto dump = [](const auto& m) {
        std::vector<double> v(m.data(), m.data() + m.size());
        return v;
    };
    j["centers"] = dump(net.centers);
    j["weights"] = dump(net.weights);
    j["slope"] = dump(net.slope);
    j["intercept"] = dump(net.intercept);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump() << "\n";
}

RbfNet load_rbf(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    RbfNet net;
    net.n_omega = j.at("n_omega");
    net.n_g = j.at("n_g");
    net.sigma = j.at("sigma");
    net.K = j.at("K");
    net.omega_bm_min = j.at("omega_bm_min");
    net.omega_bm_max = j.at("omega_bm_max");
    net.g_min = j.at("g_min");
    net.g_max = j.at("g_max");
    const int C = net.n_omega * net.n_g;
    auto fill = [&](const char* key, auto& m, int rows, int cols) {
        const std::vector<double> v = j.at(key);
        if (static_cast<int>(v.size()) != rows * cols)
            throw ConfigError(std::string("rbf file: bad size for ") + key);
        m.resize(rows, cols);
        std::copy(v.begin(), v.end(), m.data());
    };
    fill("centers", net.centers, C, 2);
    fill("weights", net.weights, C, net.K);
    Eigen::MatrixXd tmp;
    fill("slope", tmp, C, 1);
    net.slope = tmp;
    fill("intercept", tmp, C, 1);
    net.intercept = tmp;
    return net;
}

}  // namespace cochlea
