#include "sbridge/discrete_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbridge/cone_metric.hpp"
#include "sbridge/kernels.hpp"

namespace sbridge {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Kernel entries below this make linear potential propagation underflow-prone;
// the solver switches to log-space potentials (SolveMode::Auto).
constexpr double kLogSpaceTrigger = 1e-300;

struct Support {
    std::vector<unsigned char> mask;
    std::size_t count = 0;
    bool full() const { return count == mask.size(); }
};

Support support_of(const Marginal& m) {
    Support s;
    s.mask.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        s.mask[i] = m.at(i) > 0.0 ? 1 : 0;
        s.count += s.mask[i];
    }
    return s;
}

// out = num / den on the support, 0 elsewhere. Mass prescribed where the
// denominator vanished cannot be reached through the prior.
void guarded_div(std::span<const double> num, std::span<const double> den,
                 const Support& s, std::vector<double>& out) {
    const std::size_t n = num.size();
    out.resize(n);
    if (s.full()) {
        kernels::div(num.data(), den.data(), out.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(out[i]))
                throw InfeasibleBridgeError(
                    "fortet_cycle: unreachable mass at state " + std::to_string(i));
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!s.mask[i]) {
            out[i] = 0.0;
            continue;
        }
        if (den[i] <= 0.0)
            throw InfeasibleBridgeError("fortet_cycle: unreachable mass at state " +
                                        std::to_string(i));
        out[i] = num[i] / den[i];
        if (!std::isfinite(out[i]))
            throw std::runtime_error(
                "fortet_cycle: potential overflow; use SolveMode::LogSpace");
    }
}

double masked_hilbert(std::span<const double> a, std::span<const double> b,
                      const Support& s, std::vector<double>& scratch_a,
                      std::vector<double>& scratch_b) {
    if (s.full()) return hilbert_distance(a, b);
    scratch_a.clear();
    scratch_b.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!s.mask[i]) continue;
        scratch_a.push_back(a[i]);
        scratch_b.push_back(b[i]);
    }
    return hilbert_distance(scratch_a, scratch_b);
}

double max_abs_constraint_gap(std::span<const double> phi, std::span<const double> phihat,
                              const Marginal& target) {
    double r = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j)
        r = std::max(r, std::abs(phi[j] * phihat[j] - target.at(j)));
    return r;
}

std::vector<double> log_of(std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] > 0.0 ? std::log(v[i]) : kNegInf;
    return out;
}

double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double e : v) m = std::max(m, e);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double e : v) s += std::exp(e - m);
    return m + std::log(s);
}

// ly[i] = LSE_j(lm[i*cols + j] + lx[j])
void lse_matvec(const double* lm, std::size_t rows, std::size_t cols,
                const double* lx, double* ly, std::vector<double>& scratch) {
    scratch.resize(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = lm + i * cols;
        double m = kNegInf;
        for (std::size_t j = 0; j < cols; ++j) {
            scratch[j] = row[j] + lx[j];
            m = std::max(m, scratch[j]);
        }
        if (m == kNegInf) {
            ly[i] = kNegInf;
            continue;
        }
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += std::exp(scratch[j] - m);
        ly[i] = m + std::log(s);
    }
}

std::vector<double> transpose(const std::vector<double>& m, std::size_t rows,
                              std::size_t cols) {
    std::vector<double> t(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = m[i * cols + j];
    return t;
}

struct LogSolveState {
    std::vector<double> lpi;    // log prior, row-major n0 x nT
    std::vector<double> lpi_t;  // transposed
};

bool wants_log_space(const DiscreteBridgeProblem& p, SolveMode mode) {
    if (mode == SolveMode::Linear) return false;
    if (mode == SolveMode::LogSpace) return true;
    if (p.prior.min_entry() < kLogSpaceTrigger) return true;
    for (const auto& k : p.step_kernels)
        if (k.min_entry() < kLogSpaceTrigger) return true;
    return false;
}

std::vector<double> initial_phihat0(const DiscreteBridgeProblem& problem,
                                    const SolveOptions& opts, const Support& s0) {
    std::vector<double> init;
    if (opts.init_phihat0.has_value()) {
        init = *opts.init_phihat0;
        if (init.size() != problem.p0.size())
            throw std::invalid_argument("solve: init_phihat0 dimension mismatch");
        for (std::size_t i = 0; i < init.size(); ++i) {
            if (!s0.mask[i]) {
                init[i] = 0.0;
                continue;
            }
            if (!(init[i] > 0.0) || !std::isfinite(init[i]))
                throw std::domain_error("solve: init_phihat0 must be positive on supp(p0)");
        }
    } else {
        init = problem.p0.probabilities();
    }
    const double s = kernels::sum(init.data(), init.size());
    kernels::scale(init.data(), 1.0 / s, init.data(), init.size());
    return init;
}

}  // namespace

DiscreteBridgeProblem::DiscreteBridgeProblem(TransitionKernel prior_, Marginal p0_,
                                             Marginal pT_,
                                             std::vector<TransitionKernel> steps_)
    : prior(std::move(prior_)),
      p0(std::move(p0_)),
      pT(std::move(pT_)),
      step_kernels(std::move(steps_)) {
    if (prior.rows() != p0.size() || prior.cols() != pT.size())
        throw std::invalid_argument("DiscreteBridgeProblem: dimension mismatch");
    if (!step_kernels.empty()) {
        std::size_t d = p0.size();
        for (const auto& k : step_kernels) {
            if (k.rows() != d)
                throw std::invalid_argument("DiscreteBridgeProblem: step kernel chain not conformable");
            d = k.cols();
        }
        if (d != pT.size())
            throw std::invalid_argument("DiscreteBridgeProblem: step kernel chain not conformable");
    }

    // Zero patterns must be absorbing-consistent: every source state with
    // mass must reach supp(pT), and every target state with mass must be
    // reachable from supp(p0).
    const Support s0 = support_of(p0);
    const Support sT = support_of(pT);
    for (std::size_t i = 0; i < p0.size(); ++i) {
        if (!s0.mask[i]) continue;
        double reach = 0.0;
        for (std::size_t j = 0; j < pT.size(); ++j)
            if (sT.mask[j]) reach += prior.at(i, j);
        if (reach <= 0.0)
            throw InfeasibleBridgeError(
                "DiscreteBridgeProblem: mass at source state " + std::to_string(i) +
                " cannot reach supp(pT)");
    }
    for (std::size_t j = 0; j < pT.size(); ++j) {
        if (!sT.mask[j]) continue;
        double reach = 0.0;
        for (std::size_t i = 0; i < p0.size(); ++i)
            if (s0.mask[i]) reach += prior.at(i, j);
        if (reach <= 0.0)
            throw InfeasibleBridgeError(
                "DiscreteBridgeProblem: target state " + std::to_string(j) +
                " unreachable from supp(p0)");
    }
}

FortetCycleResult fortet_cycle(std::span<const double> phihat0,
                               const DiscreteBridgeProblem& problem) {
    const std::size_t n0 = problem.p0.size();
    const std::size_t nT = problem.pT.size();
    if (phihat0.size() != n0) throw std::invalid_argument("fortet_cycle: dimension mismatch");
    const Support s0 = support_of(problem.p0);
    const Support sT = support_of(problem.pT);

    std::vector<double> start(phihat0.begin(), phihat0.end());
    for (std::size_t i = 0; i < n0; ++i) {
        if (!s0.mask[i]) {
            start[i] = 0.0;
            continue;
        }
        if (!(start[i] > 0.0) || !std::isfinite(start[i]))
            throw std::domain_error("fortet_cycle: phihat0 must be positive on supp(p0)");
    }

    FortetCycleResult r;
    r.phihatT.resize(nT);
    const auto& pi = problem.prior.data();
    kernels::matvec_t(pi.data(), n0, nT, start.data(), r.phihatT.data());
    guarded_div(problem.pT.probabilities(), r.phihatT, sT, r.phiT);
    r.phi0.resize(n0);
    kernels::matvec(pi.data(), n0, nT, r.phiT.data(), r.phi0.data());
    guarded_div(problem.p0.probabilities(), r.phi0, s0, r.phihat0_next);
    return r;
}

namespace {

BridgeSolution solve_linear(const DiscreteBridgeProblem& problem, const SolveOptions& opts) {
    const std::size_t n0 = problem.p0.size();
    const std::size_t nT = problem.pT.size();
    const Support s0 = support_of(problem.p0);
    const Support sT = support_of(problem.pT);
    const auto& pi = problem.prior.data();

    std::vector<double> phihat0 = initial_phihat0(problem, opts, s0);
    std::vector<double> phihatT(nT), phi0(n0);
    std::vector<double> phiT, next;
    std::vector<double> packed_a, packed_b;

    BridgeSolution sol;
    sol.used_log_space = false;

    for (int cycle = 1; cycle <= opts.max_cycles; ++cycle) {
        kernels::matvec_t(pi.data(), n0, nT, phihat0.data(), phihatT.data());
        if (!sol.convergence_log.empty())
            sol.convergence_log.back().marginal_residual =
                max_abs_constraint_gap(phiT, phihatT, problem.pT);
        guarded_div(problem.pT.probabilities(), phihatT, sT, phiT);
        kernels::matvec(pi.data(), n0, nT, phiT.data(), phi0.data());
        guarded_div(problem.p0.probabilities(), phi0, s0, next);

        const double dh = masked_hilbert(next, phihat0, s0, packed_a, packed_b);
        const double mass = kernels::sum(next.data(), n0);
        kernels::scale(next.data(), 1.0 / mass, next.data(), n0);
        phihat0.swap(next);
        sol.convergence_log.push_back(
            {cycle, dh, std::numeric_limits<double>::quiet_NaN()});
        sol.final_dh = dh;
        if (dh < opts.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.iterations = static_cast<int>(sol.convergence_log.size());

    // Gauge-consistent closing pass: phihatT, phiT, phi0 recomputed from the
    // final phihat0 so that phi(T) phihat(T) = pT and the linear relations
    // hold exactly.
    kernels::matvec_t(pi.data(), n0, nT, phihat0.data(), phihatT.data());
    if (!sol.convergence_log.empty())
        sol.convergence_log.back().marginal_residual =
            max_abs_constraint_gap(phiT, phihatT, problem.pT);
    guarded_div(problem.pT.probabilities(), phihatT, sT, phiT);
    kernels::matvec(pi.data(), n0, nT, phiT.data(), phi0.data());

    sol.phihat0 = std::move(phihat0);
    sol.phihatT = std::move(phihatT);
    sol.phiT = std::move(phiT);
    sol.phi0 = std::move(phi0);
    sol.log_phihat0 = log_of(sol.phihat0);
    sol.log_phihatT = log_of(sol.phihatT);
    sol.log_phiT = log_of(sol.phiT);
    sol.log_phi0 = log_of(sol.phi0);
    return sol;
}

BridgeSolution solve_log(const DiscreteBridgeProblem& problem, const SolveOptions& opts) {
    const std::size_t n0 = problem.p0.size();
    const std::size_t nT = problem.pT.size();
    const Support s0 = support_of(problem.p0);
    const Support sT = support_of(problem.pT);

    LogSolveState st;
    st.lpi = log_of(problem.prior.data());
    st.lpi_t = transpose(st.lpi, n0, nT);
    const std::vector<double> lp0 = log_of(problem.p0.probabilities());
    const std::vector<double> lpT = log_of(problem.pT.probabilities());

    std::vector<double> lphihat0 = log_of(initial_phihat0(problem, opts, s0));
    std::vector<double> lphihatT(nT), lphi0(n0), lphiT(nT, kNegInf), lnext(n0);
    std::vector<double> scratch;

    BridgeSolution sol;
    sol.used_log_space = true;

    auto log_residual = [&](const std::vector<double>& lphiT_prev,
                            const std::vector<double>& lphihatT_new) {
        double r = 0.0;
        for (std::size_t j = 0; j < nT; ++j) {
            const double prod = std::isinf(lphiT_prev[j]) || std::isinf(lphihatT_new[j])
                                    ? 0.0
                                    : std::exp(lphiT_prev[j] + lphihatT_new[j]);
            r = std::max(r, std::abs(prod - problem.pT.at(j)));
        }
        return r;
    };

    for (int cycle = 1; cycle <= opts.max_cycles; ++cycle) {
        lse_matvec(st.lpi_t.data(), nT, n0, lphihat0.data(), lphihatT.data(), scratch);
        if (!sol.convergence_log.empty())
            sol.convergence_log.back().marginal_residual = log_residual(lphiT, lphihatT);
        for (std::size_t j = 0; j < nT; ++j) {
            if (!sT.mask[j]) {
                lphiT[j] = kNegInf;
                continue;
            }
            if (std::isinf(lphihatT[j]))
                throw InfeasibleBridgeError("solve: unreachable mass at target state " +
                                            std::to_string(j));
            lphiT[j] = lpT[j] - lphihatT[j];
        }
        lse_matvec(st.lpi.data(), n0, nT, lphiT.data(), lphi0.data(), scratch);
        double dmax = kNegInf, dmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n0; ++i) {
            if (!s0.mask[i]) {
                lnext[i] = kNegInf;
                continue;
            }
            if (std::isinf(lphi0[i]))
                throw InfeasibleBridgeError("solve: unreachable mass at source state " +
                                            std::to_string(i));
            lnext[i] = lp0[i] - lphi0[i];
            const double diff = lnext[i] - lphihat0[i];
            dmax = std::max(dmax, diff);
            dmin = std::min(dmin, diff);
        }
        const double dh = dmax - dmin;
        const double lmass = log_sum_exp(lnext);
        for (std::size_t i = 0; i < n0; ++i)
            if (s0.mask[i]) lnext[i] -= lmass;
        lphihat0.swap(lnext);
        sol.convergence_log.push_back(
            {cycle, dh, std::numeric_limits<double>::quiet_NaN()});
        sol.final_dh = dh;
        if (dh < opts.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.iterations = static_cast<int>(sol.convergence_log.size());

    lse_matvec(st.lpi_t.data(), nT, n0, lphihat0.data(), lphihatT.data(), scratch);
    if (!sol.convergence_log.empty())
        sol.convergence_log.back().marginal_residual = log_residual(lphiT, lphihatT);
    for (std::size_t j = 0; j < nT; ++j)
        lphiT[j] = sT.mask[j] ? lpT[j] - lphihatT[j] : kNegInf;
    lse_matvec(st.lpi.data(), n0, nT, lphiT.data(), lphi0.data(), scratch);

    auto exp_of = [](const std::vector<double>& lv) {
        std::vector<double> v(lv.size());
        for (std::size_t i = 0; i < lv.size(); ++i)
            v[i] = std::isinf(lv[i]) && lv[i] < 0 ? 0.0 : std::exp(lv[i]);
        return v;
    };
    sol.log_phihat0 = std::move(lphihat0);
    sol.log_phihatT = std::move(lphihatT);
    sol.log_phiT = std::move(lphiT);
    sol.log_phi0 = std::move(lphi0);
    sol.phihat0 = exp_of(sol.log_phihat0);
    sol.phihatT = exp_of(sol.log_phihatT);
    sol.phiT = exp_of(sol.log_phiT);
    sol.phi0 = exp_of(sol.log_phi0);
    return sol;
}

}  // namespace

BridgeSolution solve(const DiscreteBridgeProblem& problem, const SolveOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
    if (opts.max_cycles < 1) throw std::invalid_argument("solve: max_cycles must be >= 1");
    return wants_log_space(problem, opts.mode) ? solve_log(problem, opts)
                                               : solve_linear(problem, opts);
}

std::vector<double> Coupling::row_sums() const {
    std::vector<double> s(rows);
    for (std::size_t i = 0; i < rows; ++i)
        s[i] = kernels::sum(q.data() + i * cols, cols);
    return s;
}

std::vector<double> Coupling::col_sums() const {
    std::vector<double> s(cols);
    kernels::matvec_t(q.data(), rows, cols, std::vector<double>(rows, 1.0).data(), s.data());
    return s;
}

Coupling bridge_coupling(const BridgeSolution& sol, const DiscreteBridgeProblem& problem) {
    if (!sol.converged)
        throw std::runtime_error("bridge_coupling: solution did not converge");
    const std::size_t n0 = problem.p0.size();
    const std::size_t nT = problem.pT.size();
    Coupling c;
    c.rows = n0;
    c.cols = nT;
    c.q.resize(n0 * nT);
    if (!sol.used_log_space) {
        std::vector<double> tmp(nT);
        for (std::size_t i = 0; i < n0; ++i) {
            kernels::mul(problem.prior.row(i), sol.phiT.data(), tmp.data(), nT);
            kernels::scale(tmp.data(), sol.phihat0[i], c.q.data() + i * nT, nT);
        }
    } else {
        for (std::size_t i = 0; i < n0; ++i) {
            const double li = sol.log_phihat0[i];
            for (std::size_t j = 0; j < nT; ++j) {
                const double pij = problem.prior.at(i, j);
                if (pij == 0.0 || std::isinf(li) || std::isinf(sol.log_phiT[j])) {
                    c.q[i * nT + j] = 0.0;
                    continue;
                }
                c.q[i * nT + j] = std::exp(li + std::log(pij) + sol.log_phiT[j]);
            }
        }
    }
    return c;
}

std::vector<Marginal> interpolate(const BridgeSolution& sol,
                                  const DiscreteBridgeProblem& problem) {
    if (!sol.converged) throw std::runtime_error("interpolate: solution did not converge");
    if (problem.step_kernels.empty())
        throw std::invalid_argument("interpolate: problem carries no step kernels");

    const TransitionKernel composed = compose(problem.step_kernels);
    double max_diff = 0.0;
    for (std::size_t k = 0; k < composed.data().size(); ++k)
        max_diff = std::max(max_diff,
                            std::abs(composed.data()[k] - problem.prior.data()[k]));
    if (max_diff > 1e-10)
        throw std::invalid_argument(
            "interpolate: step kernels inconsistent with composed prior (max diff " +
            std::to_string(max_diff) + ")");

    const std::size_t steps = problem.step_kernels.size();
    std::vector<Marginal> out;
    out.reserve(steps + 1);

    if (!sol.used_log_space) {
        // Backward sweep for phi(t), then forward sweep for phihat(t).
        std::vector<std::vector<double>> phi(steps + 1);
        phi[steps] = sol.phiT;
        for (std::size_t k = steps; k-- > 0;) {
            const TransitionKernel& kk = problem.step_kernels[k];
            phi[k].resize(kk.rows());
            kernels::matvec(kk.data().data(), kk.rows(), kk.cols(), phi[k + 1].data(),
                            phi[k].data());
        }
        std::vector<double> phihat = sol.phihat0;
        for (std::size_t k = 0; k <= steps; ++k) {
            if (k > 0) {
                const TransitionKernel& kk = problem.step_kernels[k - 1];
                std::vector<double> nexthat(kk.cols());
                kernels::matvec_t(kk.data().data(), kk.rows(), kk.cols(), phihat.data(),
                                  nexthat.data());
                phihat = std::move(nexthat);
            }
            std::vector<double> rho(phihat.size());
            kernels::mul(phi[k].data(), phihat.data(), rho.data(), rho.size());
            const double mass = kernels::sum(rho.data(), rho.size());
            kernels::scale(rho.data(), 1.0 / mass, rho.data(), rho.size());
            out.emplace_back(std::move(rho));
        }
        return out;
    }

    std::vector<std::vector<double>> lsteps(steps), lsteps_t(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        lsteps[k] = log_of(problem.step_kernels[k].data());
        lsteps_t[k] = transpose(lsteps[k], problem.step_kernels[k].rows(),
                                problem.step_kernels[k].cols());
    }
    std::vector<double> scratch;
    std::vector<std::vector<double>> lphi(steps + 1);
    lphi[steps] = sol.log_phiT;
    for (std::size_t k = steps; k-- > 0;) {
        const auto& kk = problem.step_kernels[k];
        lphi[k].resize(kk.rows());
        lse_matvec(lsteps[k].data(), kk.rows(), kk.cols(), lphi[k + 1].data(),
                   lphi[k].data(), scratch);
    }
    std::vector<double> lphihat = sol.log_phihat0;
    for (std::size_t k = 0; k <= steps; ++k) {
        if (k > 0) {
            const auto& kk = problem.step_kernels[k - 1];
            std::vector<double> nexthat(kk.cols());
            lse_matvec(lsteps_t[k - 1].data(), kk.cols(), kk.rows(), lphihat.data(),
                       nexthat.data(), scratch);
            lphihat = std::move(nexthat);
        }
        std::vector<double> lrho(lphihat.size());
        for (std::size_t i = 0; i < lrho.size(); ++i) lrho[i] = lphi[k][i] + lphihat[i];
        const double lmass = log_sum_exp(lrho);
        std::vector<double> rho(lrho.size());
        for (std::size_t i = 0; i < lrho.size(); ++i)
            rho[i] = std::isinf(lrho[i]) && lrho[i] < 0 ? 0.0 : std::exp(lrho[i] - lmass);
        out.emplace_back(std::move(rho));
    }
    return out;
}

double relative_entropy(const BridgeSolution& sol, const DiscreteBridgeProblem& problem) {
    if (!sol.converged)
        throw std::runtime_error("relative_entropy: solution did not converge");
    const std::size_t n0 = problem.p0.size();
    const std::size_t nT = problem.pT.size();

    // q log(q / (p0 pi)) with q = phihat0 pi phiT reduces to
    // q (log phihat0_i + log phiT_j - log p0_i); the prior factor cancels, so
    // zero prior entries never reach a logarithm.
    double d = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
        const double lh = sol.log_phihat0[i];
        if (std::isinf(lh)) continue;
        const double lp = std::log(problem.p0.at(i));
        for (std::size_t j = 0; j < nT; ++j) {
            const double pij = problem.prior.at(i, j);
            if (pij == 0.0 || std::isinf(sol.log_phiT[j])) continue;
            const double lq = lh + std::log(pij) + sol.log_phiT[j];
            const double q = std::exp(lq);
            if (q == 0.0) continue;
            d += q * (lh + sol.log_phiT[j] - lp);
        }
    }
    if (d < 0.0) {
        if (d < -1e-9)
            throw std::logic_error("relative_entropy: negative divergence " +
                                   std::to_string(d));
        d = 0.0;
    }
    return d;
}

}  // namespace sbridge
