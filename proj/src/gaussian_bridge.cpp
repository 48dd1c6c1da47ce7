#include "sbridge/gaussian_bridge.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sbridge {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void require_finite(const MatrixXd& m, const char* what, double t) {
    if (!m.allFinite())
        throw SolverConvergenceError(std::string(what) + " diverged near t = " +
                                         std::to_string(t),
                                     std::numeric_limits<double>::infinity());
}

// One classical RK4 step of an autonomous matrix flow, symmetrized.
template <typename Rhs>
MatrixXd rk4_step(const MatrixXd& x, double h, const Rhs& rhs) {
    const MatrixXd k1 = rhs(x);
    const MatrixXd k2 = rhs(x + 0.5 * h * k1);
    const MatrixXd k3 = rhs(x + 0.5 * h * k2);
    const MatrixXd k4 = rhs(x + h * k3);
    return symmetrize(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

template <typename Rhs, typename Visit>
void rk4_sym(MatrixXd x, double h, int n_steps, const Rhs& rhs, const Visit& visit) {
    visit(0, x);
    for (int k = 0; k < n_steps; ++k) {
        x = rk4_step(x, h, rhs);
        require_finite(x, "riccati flow", h * (k + 1));
        visit(k + 1, x);
    }
}

// Preimage of one forward RK4 step: solves rk4_step(y) = x by fixed-point
// iteration seeded with the explicit reversed step. Making the backward
// sweep the exact inverse of the forward discretization removes the O(h^4)
// forward/backward mismatch that would otherwise floor the boundary
// iteration's residual.
template <typename Rhs>
MatrixXd rk4_step_preimage(const MatrixXd& x, double h, const Rhs& rhs) {
    MatrixXd y = rk4_step(x, -h, rhs);
    for (int it = 0; it < 12; ++it) {
        const MatrixXd delta = x - rk4_step(y, h, rhs);
        y = symmetrize(y + delta);
        if (delta.norm() <= 1e-15 * (1.0 + y.norm())) break;
    }
    return y;
}

struct Flows {
    const MatrixXd& A;
    MatrixXd BBt;

    MatrixXd pi_rhs(const MatrixXd& p) const {
        return -A.transpose() * p - p * A + p * BBt * p;
    }
    MatrixXd h_rhs(const MatrixXd& hh) const {
        return -A.transpose() * hh - hh * A - hh * BBt * hh;
    }
};

MatrixXd spd_inverse(const MatrixXd& m, const char* what) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::domain_error(std::string(what) + ": matrix not positive definite");
    return llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

LinearSystem::LinearSystem(MatrixXd a, MatrixXd b, MatrixXd b1, double horizon)
    : A(std::move(a)), B(std::move(b)), B1(std::move(b1)), t_f(horizon) {
    if (A.rows() != A.cols()) throw std::invalid_argument("LinearSystem: A must be square");
    if (B.rows() != A.rows() || B1.rows() != A.rows())
        throw std::invalid_argument("LinearSystem: channel row dimension mismatch");
    if (!(t_f > 0.0)) throw std::invalid_argument("LinearSystem: horizon must be positive");
}

bool LinearSystem::same_channels() const {
    return B.rows() == B1.rows() && B.cols() == B1.cols() &&
           (B - B1).cwiseAbs().maxCoeff() == 0.0;
}

GaussianState::GaussianState(VectorXd mean_, MatrixXd covariance)
    : mean(std::move(mean_)), cov(std::move(covariance)) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw std::invalid_argument("GaussianState: dimension mismatch");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::domain_error("GaussianState: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(cov));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::domain_error("GaussianState: covariance not positive definite");
}

int controllability_rank(const MatrixXd& A, const MatrixXd& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
        throw std::invalid_argument("controllability_rank: dimension mismatch");
    const auto n = A.rows();
    const auto m = B.cols();
    MatrixXd ctrb(n, n * m);
    MatrixXd block = B;
    for (Eigen::Index k = 0; k < n; ++k) {
        ctrb.middleCols(k * m, m) = block;
        block = A * block;
    }
    Eigen::JacobiSVD<MatrixXd> svd(ctrb);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double thresh =
        static_cast<double>(n) * std::numeric_limits<double>::epsilon() * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) ++rank;
    return rank;
}

RiccatiSchedule solve_gauss_bridge(const LinearSystem& sys, const GaussianState& start,
                                   const GaussianState& end, int n_grid, double tol) {
    const auto n = sys.A.rows();
    if (!sys.same_channels())
        throw UnsupportedConfigurationError(
            "solve_gauss_bridge: B != B1 is outside this solver's scope (the "
            "dynamically coupled Riccati system is not implemented)");
    if (start.mean.size() != n || end.mean.size() != n)
        throw std::invalid_argument("solve_gauss_bridge: marginal dimension mismatch");
    if (controllability_rank(sys.A, sys.B) != n)
        throw std::invalid_argument("solve_gauss_bridge: (A, B) is not controllable");
    if (n_grid < 2) throw std::invalid_argument("solve_gauss_bridge: n_grid too small");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_gauss_bridge: tol must be positive");

    const MatrixXd sigma0_inv = spd_inverse(start.cov, "solve_gauss_bridge");
    const MatrixXd sigma1_inv = spd_inverse(end.cov, "solve_gauss_bridge");
    const double h = sys.t_f / n_grid;
    const Flows flows{sys.A, sys.B * sys.B.transpose()};

    // The damped map contracts linearly (factors up to ~0.9 for the
    // oscillator cases); iterations are three cheap RK4 sweeps each.
    const int max_outer = 5000;
    constexpr double damping = 0.5;

    RiccatiSchedule sched;
    sched.times.resize(n_grid + 1);
    for (int k = 0; k <= n_grid; ++k) sched.times[k] = h * k;
    sched.pi.assign(n_grid + 1, MatrixXd::Zero(n, n));
    sched.h.assign(n_grid + 1, MatrixXd::Zero(n, n));
    sched.input_matrix = sys.B;

    MatrixXd pi0 = MatrixXd::Zero(n, n);
    double residual1 = std::numeric_limits<double>::infinity();
    bool converged = false;

    const auto pi_rhs = [&](const MatrixXd& p) { return flows.pi_rhs(p); };
    const auto h_rhs = [&](const MatrixXd& hh) { return flows.h_rhs(hh); };

    for (int outer = 0; outer < max_outer; ++outer) {
        rk4_sym(pi0, h, n_grid, pi_rhs, [&](int k, const MatrixXd& p) { sched.pi[k] = p; });
        const MatrixXd h0 = symmetrize(sigma0_inv - pi0);
        rk4_sym(h0, h, n_grid, h_rhs, [&](int k, const MatrixXd& hh) { sched.h[k] = hh; });

        residual1 = (sched.pi[n_grid] + sched.h[n_grid] - sigma1_inv).norm();
        sched.outer_iterations = outer + 1;
        if (residual1 < tol) {
            converged = true;
            break;
        }

        // Correct the terminal condition and shoot Pi back to t = 0 by
        // reversing the forward steps exactly.
        MatrixXd pi_back = symmetrize(sigma1_inv - sched.h[n_grid]);
        for (int k = n_grid; k-- > 0;) {
            pi_back = rk4_step_preimage(pi_back, h, pi_rhs);
            require_finite(pi_back, "riccati backward sweep", h * k);
        }
        pi0 = symmetrize(pi0 + damping * (pi_back - pi0));
    }

    if (!converged)
        throw SolverConvergenceError(
            "solve_gauss_bridge: boundary coupling not met after " +
                std::to_string(max_outer) + " iterations (residual " +
                std::to_string(residual1) + ")",
            residual1);

    sched.boundary_residual0 = (sched.pi[0] + sched.h[0] - sigma0_inv).norm();
    sched.boundary_residual1 = residual1;

    // Pi + H plays the role of an inverse covariance along the path; losing
    // definiteness signals an invalid steering problem.
    for (int k = 0; k <= n_grid; ++k) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sched.pi[k] + sched.h[k]);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw SolverConvergenceError(
                "solve_gauss_bridge: Pi + H lost positive definiteness at t = " +
                    std::to_string(sched.times[k]),
                residual1);
    }

    // Decoupled mean transfer via the reachability Gramian; exact zeros when
    // both endpoint means vanish.
    sched.mean.assign(n_grid + 1, VectorXd::Zero(n));
    sched.u_ff.assign(n_grid + 1, VectorXd::Zero(sys.B.cols()));
    const bool zero_means =
        start.mean.isZero(0.0) && end.mean.isZero(0.0);
    if (!zero_means) {
        MatrixXd phi = MatrixXd::Identity(n, n);   // state transition e^{At}
        MatrixXd gram = MatrixXd::Zero(n, n);      // reachability Gramian
        for (int k = 0; k < n_grid; ++k) {
            auto joint_rhs = [&](const MatrixXd& ph, const MatrixXd& w,
                                 MatrixXd& dph, MatrixXd& dw) {
                dph = sys.A * ph;
                dw = sys.A * w + w * sys.A.transpose() + flows.BBt;
            };
            MatrixXd k1p, k1w, k2p, k2w, k3p, k3w, k4p, k4w;
            joint_rhs(phi, gram, k1p, k1w);
            joint_rhs(phi + 0.5 * h * k1p, gram + 0.5 * h * k1w, k2p, k2w);
            joint_rhs(phi + 0.5 * h * k2p, gram + 0.5 * h * k2w, k3p, k3w);
            joint_rhs(phi + h * k3p, gram + h * k3w, k4p, k4w);
            phi += (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p);
            gram = symmetrize(gram + (h / 6.0) * (k1w + 2 * k2w + 2 * k3w + k4w));
        }
        const VectorXd eta =
            Eigen::LDLT<MatrixXd>(gram).solve(end.mean - phi * start.mean);
        VectorXd lambda = phi.transpose() * eta;  // lambda(0) = e^{A^T tf} eta
        VectorXd m = start.mean;
        sched.mean[0] = m;
        sched.u_ff[0] = sys.B.transpose() * lambda;
        for (int k = 0; k < n_grid; ++k) {
            auto rhs = [&](const VectorXd& mm, const VectorXd& ll, VectorXd& dm,
                           VectorXd& dl) {
                dl = -sys.A.transpose() * ll;
                dm = sys.A * mm + flows.BBt * ll;
            };
            VectorXd k1m, k1l, k2m, k2l, k3m, k3l, k4m, k4l;
            rhs(m, lambda, k1m, k1l);
            rhs(m + 0.5 * h * k1m, lambda + 0.5 * h * k1l, k2m, k2l);
            rhs(m + 0.5 * h * k2m, lambda + 0.5 * h * k2l, k3m, k3l);
            rhs(m + h * k3m, lambda + h * k3l, k4m, k4l);
            m += (h / 6.0) * (k1m + 2 * k2m + 2 * k3m + k4m);
            lambda += (h / 6.0) * (k1l + 2 * k2l + 2 * k3l + k4l);
            sched.mean[k + 1] = m;
            sched.u_ff[k + 1] = sys.B.transpose() * lambda;
        }
    }

    sched.sigma = covariance_path(sched, sys, start);
    return sched;
}

std::vector<MatrixXd> covariance_path(const RiccatiSchedule& schedule,
                                      const LinearSystem& sys,
                                      const GaussianState& start) {
    const int n_grid = static_cast<int>(schedule.times.size()) - 1;
    if (n_grid < 1) throw std::invalid_argument("covariance_path: empty schedule");
    const double h = schedule.times[1] - schedule.times[0];
    const MatrixXd BBt = sys.B * sys.B.transpose();
    const MatrixXd noise = sys.B1 * sys.B1.transpose();
    const Flows flows{sys.A, BBt};

    // Re-integrate Pi jointly with Sigma so the RK4 stages see a consistent
    // Pi(t); interpolating the stored knots would cap the order at two.
    std::vector<MatrixXd> out(n_grid + 1);
    MatrixXd pi = schedule.pi[0];
    MatrixXd sigma = start.cov;
    out[0] = sigma;
    for (int k = 0; k < n_grid; ++k) {
        auto rhs = [&](const MatrixXd& p, const MatrixXd& s, MatrixXd& dp,
                       MatrixXd& ds) {
            dp = flows.pi_rhs(p);
            const MatrixXd acl = sys.A - BBt * p;
            ds = acl * s + s * acl.transpose() + noise;
        };
        MatrixXd k1p, k1s, k2p, k2s, k3p, k3s, k4p, k4s;
        rhs(pi, sigma, k1p, k1s);
        rhs(pi + 0.5 * h * k1p, sigma + 0.5 * h * k1s, k2p, k2s);
        rhs(pi + 0.5 * h * k2p, sigma + 0.5 * h * k2s, k3p, k3s);
        rhs(pi + h * k3p, sigma + h * k3s, k4p, k4s);
        pi = symmetrize(pi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p));
        sigma = symmetrize(sigma + (h / 6.0) * (k1s + 2 * k2s + 2 * k3s + k4s));
        require_finite(sigma, "covariance path", schedule.times[k + 1]);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw SolverConvergenceError(
                "covariance_path: covariance lost positive definiteness at t = " +
                    std::to_string(schedule.times[k + 1]),
                es.eigenvalues().minCoeff());
        out[k + 1] = sigma;
    }
    return out;
}

double control_energy(const RiccatiSchedule& schedule,
                      const std::vector<MatrixXd>& sigma_path) {
    if (schedule.times.size() != sigma_path.size())
        throw std::invalid_argument("control_energy: grid mismatch");
    const std::size_t n_knots = schedule.times.size();
    double total = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < n_knots; ++k) {
        const MatrixXd gain = schedule.gain(k);
        double e = (gain * sigma_path[k] * gain.transpose()).trace();
        if (!schedule.u_ff.empty()) e += schedule.u_ff[k].squaredNorm();
        if (k > 0)
            total += 0.5 * (schedule.times[k] - schedule.times[k - 1]) * (prev + e);
        prev = e;
    }
    return total;
}

}  // namespace sbridge
