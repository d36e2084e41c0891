#include "cochlea/filter_design.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "cochlea/errors.hpp"

namespace cochlea {

namespace {
constexpr double kDenFloor = 1e-6;
}

RegressionProblem build_problem(const ComplexSpectrum& beta, double omega_bm,
                                const ModelParams& p) {
    const int m2 = p.m2;
    const int K = p.K;
    if (static_cast<int>(beta.values.size()) != m2)
        throw ConfigError("build_problem: beta not on the canonical grid");

    const double df = p.fs / (2.0 * m2);
    const double f_cut = 1.3 * omega_bm / (2.0 * M_PI);
    int m1 = static_cast<int>(std::ceil(f_cut / df));
    if (m1 > m2) m1 = m2;
    if (m1 <= 0)
        throw ConfigError("build_problem: omega_cut below the first grid point");

    RegressionProblem prob;
    prob.m1 = m1;
    prob.lambda1 = p.lambda1;
    prob.lambda2 = p.lambda2;
    prob.Xl_re.resize(m1, K);
    prob.Xl_im.resize(m1, K);
    prob.Xr_re.resize(m2 - m1, K);
    prob.Xr_im.resize(m2 - m1, K);
    for (int m = 0; m < m2; ++m) {
        for (int k = 1; k <= K; ++k) {
            const double ph = M_PI * k * m / m2;
            const double c = std::cos(ph), s = -std::sin(ph);
            if (m < m1) {
                prob.Xl_re(m, k - 1) = c;
                prob.Xl_im(m, k - 1) = s;
            } else {
                prob.Xr_re(m - m1, k - 1) = c;
                prob.Xr_im(m - m1, k - 1) = s;
            }
        }
    }
    prob.Yl_re.resize(m1);
    prob.Yl_im.resize(m1);
    for (int m = 0; m < m1; ++m) {
        const std::complex<double> w = 1.0 - 1.0 / beta.values[m];
        prob.Yl_re(m) = w.real();
        prob.Yl_im(m) = w.imag();
    }
    return prob;
}

namespace {

// Residual vector layout: [left-re | left-im | ridge(b) | ridge(eps) | hinge].
// Cost == r.squaredNorm().
void residuals(const Eigen::VectorXd& b, double eps, const RegressionProblem& prob,
               Eigen::VectorXd& r, bool* guard_hit = nullptr) {
    const int m1 = prob.m1;
    const int K = static_cast<int>(b.size());
    const int mr = static_cast<int>(prob.Xr_re.rows());
    r.resize(2 * m1 + K + 1 + mr);
    r.segment(0, m1) = prob.Yl_re - prob.Xl_re * b +
                       (prob.Yl_re.array() - 1.0).matrix() * eps;
    r.segment(m1, m1) = prob.Yl_im - prob.Xl_im * b + prob.Yl_im * eps;
    const double s1 = std::sqrt(prob.lambda1);
    r.segment(2 * m1, K) = s1 * b;
    r(2 * m1 + K) = s1 * eps;
    const double s2 = std::sqrt(prob.lambda2);
    const Eigen::VectorXd u = prob.Xr_im * b;
    const Eigen::VectorXd den = Eigen::VectorXd::Ones(mr) - prob.Xr_re * b;
    for (int m = 0; m < mr; ++m) {
        double d = den(m);
        if (std::abs(d) < kDenFloor) {
            d = (d >= 0.0 ? kDenFloor : -kDenFloor);
            if (guard_hit) *guard_hit = true;
        }
        r(2 * m1 + K + 1 + m) = s2 * std::max(0.0, u(m) / d);
    }
}

void jacobian(const Eigen::VectorXd& b, double /*eps*/, const RegressionProblem& prob,
              Eigen::MatrixXd& J) {
    const int m1 = prob.m1;
    const int K = static_cast<int>(b.size());
    const int mr = static_cast<int>(prob.Xr_re.rows());
    J.setZero(2 * m1 + K + 1 + mr, K + 1);
    J.block(0, 0, m1, K) = -prob.Xl_re;
    J.block(0, K, m1, 1) = (prob.Yl_re.array() - 1.0).matrix();
    J.block(m1, 0, m1, K) = -prob.Xl_im;
    J.block(m1, K, m1, 1) = prob.Yl_im;
    const double s1 = std::sqrt(prob.lambda1);
    J.block(2 * m1, 0, K, K) = s1 * Eigen::MatrixXd::Identity(K, K);
    J(2 * m1 + K, K) = s1;
    const double s2 = std::sqrt(prob.lambda2);
    const Eigen::VectorXd u = prob.Xr_im * b;
    const Eigen::VectorXd den = Eigen::VectorXd::Ones(mr) - prob.Xr_re * b;
    for (int m = 0; m < mr; ++m) {
        double d = den(m);
        if (std::abs(d) < kDenFloor) d = (d >= 0.0 ? kDenFloor : -kDenFloor);
        if (u(m) / d <= 0.0) continue;  // inactive hinge: zero subgradient
        // d/db [u/(1-w)] = Xr_im/d + u * Xr_re / d^2
        J.row(2 * m1 + K + 1 + m).head(K) =
            s2 * (prob.Xr_im.row(m) / d + (u(m) / (d * d)) * prob.Xr_re.row(m));
    }
}

struct LMResult {
    Eigen::VectorXd b;
    double eps;
    double cost;
    int iterations;
};

LMResult levenberg_marquardt(const RegressionProblem& prob, int K, bool with_eps) {
    const int n_par = with_eps ? K + 1 : K;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(K + 1);
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    residuals(theta.head(K), theta(K), prob, r);
    double cost = r.squaredNorm();
    double lm = 1e-3;
    int it = 0;
    for (; it < 500; ++it) {
        jacobian(theta.head(K), theta(K), prob, J);
        const auto Jp = J.leftCols(n_par);
        const Eigen::MatrixXd JtJ = Jp.transpose() * Jp;
        const Eigen::VectorXd g = Jp.transpose() * r;
        bool stepped = false;
        for (int attempt = 0; attempt < 24; ++attempt) {
            Eigen::MatrixXd M = JtJ;
            M.diagonal().array() += lm;
            const Eigen::VectorXd delta = M.ldlt().solve(g);
            Eigen::VectorXd cand = theta;
            cand.head(n_par) -= delta;
            Eigen::VectorXd rc;
            residuals(cand.head(K), cand(K), prob, rc);
            const double cc = rc.squaredNorm();
            if (std::isfinite(cc) && cc < cost) {
                const double rel = (cost - cc) / std::max(cost, 1e-300);
                theta = cand;
                r = rc;
                cost = cc;
                lm = std::max(lm / 10.0, 1e-12);
                stepped = true;
                if (rel < 1e-10) it = 500;  // converged
                break;
            }
            lm *= 10.0;
        }
        if (!stepped) break;  // damping exhausted: local minimum
    }
    return {theta.head(K), theta(K), cost, it >= 500 ? 500 : it};
}

}  // namespace

double lse_cost(const Eigen::VectorXd& b, double eps, const RegressionProblem& prob) {
    Eigen::VectorXd r;
    residuals(b, eps, prob, r);
    return r.squaredNorm();
}

double lse_cost_plain(const Eigen::VectorXd& b, const RegressionProblem& prob) {
    RegressionProblem q = prob;
    // the eps columns vanish at eps = 0, but the ridge eps term must not count
    Eigen::VectorXd r;
    residuals(b, 0.0, q, r);
    return r.squaredNorm();
}

Eigen::VectorXd lse_cost_plain_grad(const Eigen::VectorXd& b,
                                    const RegressionProblem& prob, double* cost) {
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    residuals(b, 0.0, prob, r);
    jacobian(b, 0.0, prob, J);
    if (cost) *cost = r.squaredNorm();
    return 2.0 * (J.transpose() * r).head(b.size());
}

std::complex<double> beta_hat(const PoleFilter& f, double omega, double fs) {
    const std::complex<double> z1 = std::exp(std::complex<double>(0.0, -omega / fs));
    std::complex<double> acc = 0.0;
    std::complex<double> zk = 1.0;
    for (int k = 0; k < f.b.size(); ++k) {
        zk *= z1;
        acc += f.b(k) * zk;
    }
    return (1.0 + f.eps) / (1.0 - acc);
}

std::vector<std::complex<double>> filter_poles(const PoleFilter& f) {
    const int K = static_cast<int>(f.b.size());
    if (f.b.lpNorm<Eigen::Infinity>() == 0.0)
        return std::vector<std::complex<double>>(K, 0.0);
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(K, K);
    comp.row(0) = f.b.transpose();
    comp.block(1, 0, K - 1, K - 1).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> roots(K);
    for (int i = 0; i < K; ++i) roots[i] = es.eigenvalues()(i);
    return roots;
}

double max_pole_radius(const PoleFilter& f) {
    double r = 0.0;
    for (const auto& z : filter_poles(f)) r = std::max(r, std::abs(z));
    return r;
}

bool is_stable(const PoleFilter& f, double radius_limit) {
    return max_pole_radius(f) < radius_limit;
}

PoleFilter fit_filter(const ComplexSpectrum& beta, double omega_bm, double G,
                      const ModelParams& p, FitDiagnostics* diag) {
    RegressionProblem prob = build_problem(beta, omega_bm, p);
    bool doubled = false;
    LMResult res = levenberg_marquardt(prob, p.K, /*with_eps=*/true);
    if (!std::isfinite(res.cost))
        throw FitError("fit_filter: non-finite cost");

    PoleFilter f;
    f.omega_bm = omega_bm;
    f.G = G;
    f.b = res.b;
    f.eps = -res.b.sum();  // DC enforcement
    if (!is_stable(f)) {
        prob.lambda1 *= 2.0;
        doubled = true;
        res = levenberg_marquardt(prob, p.K, /*with_eps=*/true);
        f.b = res.b;
        f.eps = -res.b.sum();
        if (!is_stable(f))
            throw FitError("fit_filter: unstable after lambda1 retry");
    }

    if (diag) {
        diag->cost = res.cost;
        diag->iterations = res.iterations;
        diag->lambda1_doubled = doubled;
        diag->max_pole_radius = max_pole_radius(f);
        double err = 0.0;
        for (int m = 0; m < prob.m1; ++m) {
            const double target = std::abs(beta.values[m]);
            if (target < 1e-12) continue;
            const double got =
                std::abs(beta_hat(f, 2.0 * M_PI * beta.freqs[m], p.fs));
            err = std::max(err, std::abs(got - target) / target);
        }
        diag->max_mag_err = err;
    }
    return f;
}

PoleFilter fit_filter_plain(const ComplexSpectrum& beta, double omega_bm, double G,
                            const ModelParams& p, FitDiagnostics* diag) {
    RegressionProblem prob = build_problem(beta, omega_bm, p);
    const LMResult res = levenberg_marquardt(prob, p.K, /*with_eps=*/false);
    if (!std::isfinite(res.cost))
        throw FitError("fit_filter_plain: non-finite cost");
    PoleFilter f;
    f.omega_bm = omega_bm;
    f.G = G;
    f.b = res.b;
    f.eps = 0.0;
    if (diag) {
        diag->cost = res.cost;
        diag->iterations = res.iterations;
        diag->max_pole_radius = max_pole_radius(f);
    }
    return f;
}

}  // namespace cochlea
