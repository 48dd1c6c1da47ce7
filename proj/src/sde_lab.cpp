#include "sbridge/sde_lab.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sbridge/kernels.hpp"

namespace sbridge {

namespace rng {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(c[0]) * kMul0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(c[2]) * kMul1;
        const std::array<std::uint32_t, 4> next = {
            static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ key[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ key[1],
            static_cast<std::uint32_t>(p0),
        };
        c = next;
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return c;
}

NormalPair normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                       std::uint32_t block) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(path),
                                              static_cast<std::uint32_t>(path >> 32),
                                              step, block};
    const auto out = philox4x32(ctr, key);
    const double u1 = to_unit(out[0], out[1]);
    const double u2 = to_unit(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace rng

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// n normals for one (path, step) key, two per Philox block.
void fill_normals(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                  std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); i += 2) {
        const auto pair =
            rng::normal_pair(seed, path, step, static_cast<std::uint32_t>(i / 2));
        out[i] = pair.z0;
        if (i + 1 < out.size()) out[i + 1] = pair.z1;
    }
}

}  // namespace

LinearPolicy LinearPolicy::zero(std::size_t inputs, std::size_t states) {
    LinearPolicy p;
    p.knots_ = {0.0};
    p.gains_ = {MatrixXd::Zero(inputs, states)};
    p.offsets_ = {VectorXd::Zero(inputs)};
    p.descriptor_ = "zero";
    return p;
}

LinearPolicy LinearPolicy::constant_gain(MatrixXd gain) {
    LinearPolicy p;
    p.knots_ = {0.0};
    p.offsets_ = {VectorXd::Zero(gain.rows())};
    p.gains_ = {std::move(gain)};
    p.descriptor_ = "constant-gain";
    return p;
}

LinearPolicy LinearPolicy::from_schedule(const RiccatiSchedule& schedule,
                                         double gain_scale) {
    if (schedule.times.empty()) throw std::invalid_argument("LinearPolicy: empty schedule");
    LinearPolicy p;
    p.knots_ = schedule.times;
    p.gains_.reserve(schedule.times.size());
    p.offsets_.reserve(schedule.times.size());
    for (std::size_t k = 0; k < schedule.times.size(); ++k) {
        MatrixXd gain = gain_scale * schedule.gain(k);
        VectorXd offset = gain * schedule.mean[k];
        if (!schedule.u_ff.empty()) offset += gain_scale * schedule.u_ff[k];
        p.gains_.push_back(std::move(gain));
        p.offsets_.push_back(std::move(offset));
    }
    p.descriptor_ = "schedule-feedback";
    return p;
}

void LinearPolicy::eval(double t, MatrixXd& gain, VectorXd& offset) const {
    if (knots_.size() == 1 || t <= knots_.front()) {
        gain = gains_.front();
        offset = offsets_.front();
        return;
    }
    if (t >= knots_.back()) {
        gain = gains_.back();
        offset = offsets_.back();
        return;
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - knots_[lo]) / (knots_[hi] - knots_[lo]);
    gain = (1.0 - w) * gains_[lo] + w * gains_[hi];
    offset = (1.0 - w) * offsets_[lo] + w * offsets_[hi];
}

InitialLaw InitialLaw::gaussian(const GaussianState& state) {
    InitialLaw law;
    law.mean = state.mean;
    Eigen::LLT<MatrixXd> llt(state.cov);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("InitialLaw: covariance not positive definite");
    law.chol = llt.matrixL();
    law.deterministic = false;
    return law;
}

InitialLaw InitialLaw::point(VectorXd x) {
    InitialLaw law;
    law.chol = MatrixXd::Zero(x.size(), x.size());
    law.mean = std::move(x);
    law.deterministic = true;
    return law;
}

namespace {

void validate_options(const SimOptions& opts) {
    if (opts.n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
    if (opts.n_steps < 1) throw std::invalid_argument("simulate: n_steps must be >= 1");
    if (!(opts.t1 > opts.t0)) throw std::invalid_argument("simulate: empty time interval");
}

struct Accumulators {
    PathEnsemble* ens;
    std::size_t dim, n_paths;

    void init(PathEnsemble& e, const SimOptions& opts, std::size_t d) {
        ens = &e;
        dim = d;
        n_paths = opts.n_paths;
        e.n_paths = opts.n_paths;
        e.dim = d;
        e.seed = opts.seed;
        e.times.resize(opts.n_steps + 1);
        for (std::size_t k = 0; k <= opts.n_steps; ++k)
            e.times[k] = opts.t0 + (opts.t1 - opts.t0) * static_cast<double>(k) /
                                       static_cast<double>(opts.n_steps);
        e.sum_x.assign((opts.n_steps + 1) * d, 0.0);
        e.sum_xx.assign((opts.n_steps + 1) * d * d, 0.0);
        if (opts.store_paths) e.stored.assign((opts.n_steps + 1) * d * n_paths, 0.0);
        if (opts.track_energy) e.energy.assign(n_paths, 0.0);
    }

    // SoA knot: comp[c] is a vector over paths.
    void record_soa(std::size_t t, const std::vector<std::vector<double>>& comp) {
        for (std::size_t c = 0; c < dim; ++c) {
            ens->sum_x[t * dim + c] = kernels::sum(comp[c].data(), n_paths);
            for (std::size_t d2 = 0; d2 <= c; ++d2) {
                const double s = kernels::dot(comp[c].data(), comp[d2].data(), n_paths);
                ens->sum_xx[(t * dim + c) * dim + d2] = s;
                ens->sum_xx[(t * dim + d2) * dim + c] = s;
            }
            if (!ens->stored.empty())
                std::copy(comp[c].begin(), comp[c].end(),
                          ens->stored.begin() + (t * dim + c) * n_paths);
        }
    }

    void record_single(std::size_t t, std::size_t path, std::span<const double> x) {
        for (std::size_t c = 0; c < dim; ++c) {
            ens->sum_x[t * dim + c] += x[c];
            for (std::size_t d2 = 0; d2 < dim; ++d2)
                ens->sum_xx[(t * dim + c) * dim + d2] += x[c] * x[d2];
            if (!ens->stored.empty())
                ens->stored[(t * dim + c) * n_paths + path] = x[c];
        }
    }
};

}  // namespace

PathEnsemble simulate(const LinearSystem& sys, const LinearPolicy& policy,
                      const InitialLaw& x0, const SimOptions& opts) {
    validate_options(opts);
    const std::size_t n = sys.state_dim();
    const std::size_t m1 = static_cast<std::size_t>(sys.B1.cols());
    if (policy.states() != n || policy.inputs() != static_cast<std::size_t>(sys.B.cols()))
        throw std::invalid_argument("simulate: policy dimensions mismatch");
    if (x0.mean.size() != static_cast<Eigen::Index>(n))
        throw std::invalid_argument("simulate: initial law dimension mismatch");

    PathEnsemble ens;
    Accumulators acc;
    acc.init(ens, opts, n);
    ens.policy_descriptor = policy.descriptor();

    const std::size_t P = opts.n_paths;
    const double h = (opts.t1 - opts.t0) / static_cast<double>(opts.n_steps);
    const double sqrt_h = std::sqrt(h);

    // SoA state: one contiguous lane per component.
    std::vector<std::vector<double>> x(n, std::vector<double>(P));
    std::vector<std::vector<double>> xn(n, std::vector<double>(P));
    std::vector<std::vector<double>> z(m1, std::vector<double>(P));

    // Initial states: n normals per path through the init-draw stream.
    {
        std::vector<double> draws(n);
        for (std::size_t p = 0; p < P; ++p) {
            if (x0.deterministic) {
                for (std::size_t c = 0; c < n; ++c) x[c][p] = x0.mean(c);
                continue;
            }
            fill_normals(opts.seed, p, rng::kInitDrawStep, draws);
            for (std::size_t c = 0; c < n; ++c) {
                double v = x0.mean(c);
                for (std::size_t d = 0; d <= c; ++d) v += x0.chol(c, d) * draws[d];
                x[c][p] = v;
            }
        }
    }
    acc.record_soa(0, x);

    MatrixXd gain, closed;
    VectorXd offset, bias;
    std::vector<double> step_draws(m1);

    auto energy_at = [&](double t) {
        // trapezoid accumulation of |u(t, x_p)|^2 into per-path energies
        policy.eval(t, gain, offset);
        const double w = (t == opts.t0 || t == opts.t1) ? 0.5 * h : h;
        for (std::size_t p = 0; p < P; ++p) {
            double usq = 0.0;
            for (Eigen::Index r = 0; r < gain.rows(); ++r) {
                double u = offset(r);
                for (std::size_t c = 0; c < n; ++c) u -= gain(r, c) * x[c][p];
                usq += u * u;
            }
            ens.energy[p] += w * usq;
        }
    };

    for (std::size_t k = 0; k < opts.n_steps; ++k) {
        const double t = ens.times[k];
        policy.eval(t, gain, offset);
        closed = sys.A - sys.B * gain;   // drift matrix of the closed loop
        bias = sys.B * offset;           // constant drift from the feedforward
        if (opts.track_energy) energy_at(t);

        for (std::size_t p = 0; p < P; ++p) {
            fill_normals(opts.seed, p, static_cast<std::uint32_t>(k),
                         std::span<double>(step_draws.data(), m1));
            for (std::size_t j = 0; j < m1; ++j) z[j][p] = step_draws[j];
        }

        for (std::size_t c = 0; c < n; ++c) {
            std::copy(x[c].begin(), x[c].end(), xn[c].begin());
            for (std::size_t d = 0; d < n; ++d)
                kernels::axpy(h * closed(c, d), x[d].data(), xn[c].data(), P);
            if (bias(c) != 0.0) kernels::shift(h * bias(c), xn[c].data(), P);
            for (std::size_t j = 0; j < m1; ++j)
                if (sys.B1(c, j) != 0.0)
                    kernels::axpy(sqrt_h * sys.B1(c, j), z[j].data(), xn[c].data(), P);
        }
        x.swap(xn);
        acc.record_soa(k + 1, x);
    }
    if (opts.track_energy) energy_at(opts.t1);

    ens.terminal.resize(n * P);
    for (std::size_t c = 0; c < n; ++c)
        std::copy(x[c].begin(), x[c].end(), ens.terminal.begin() + c * P);
    return ens;
}

PathEnsemble simulate(const GenericSde& sde, const InitialLaw& x0, const SimOptions& opts) {
    validate_options(opts);
    const std::size_t n = sde.dim;
    if (!sde.drift) throw std::invalid_argument("simulate: missing drift");
    if (x0.mean.size() != static_cast<Eigen::Index>(n))
        throw std::invalid_argument("simulate: initial law dimension mismatch");
    const std::size_t m1 = static_cast<std::size_t>(sde.diffusion.cols());

    PathEnsemble ens;
    Accumulators acc;
    acc.init(ens, opts, n);
    ens.policy_descriptor = "generic-sde";

    const std::size_t P = opts.n_paths;
    const double h = (opts.t1 - opts.t0) / static_cast<double>(opts.n_steps);
    const double sqrt_h = std::sqrt(h);

    std::vector<double> state(n), drift(n), draws(std::max(n, m1));
    ens.terminal.resize(n * P);
    for (std::size_t p = 0; p < P; ++p) {
        if (x0.deterministic) {
            for (std::size_t c = 0; c < n; ++c) state[c] = x0.mean(c);
        } else {
            fill_normals(opts.seed, p, rng::kInitDrawStep,
                         std::span<double>(draws.data(), n));
            for (std::size_t c = 0; c < n; ++c) {
                double v = x0.mean(c);
                for (std::size_t d = 0; d <= c; ++d) v += x0.chol(c, d) * draws[d];
                state[c] = v;
            }
        }
        acc.record_single(0, p, state);
        for (std::size_t k = 0; k < opts.n_steps; ++k) {
            const double t = ens.times[k];
            try {
                sde.drift(t, state, drift);
            } catch (const std::exception& e) {
                throw std::runtime_error("simulate: drift evaluation failed at t = " +
                                         std::to_string(t) + ", path " +
                                         std::to_string(p) + ": " + e.what());
            }
            if (m1 > 0)
                fill_normals(opts.seed, p, static_cast<std::uint32_t>(k),
                             std::span<double>(draws.data(), m1));
            for (std::size_t c = 0; c < n; ++c) {
                double v = state[c] + h * drift[c];
                for (std::size_t j = 0; j < m1; ++j)
                    v += sqrt_h * sde.diffusion(c, j) * draws[j];
                state[c] = v;
            }
            acc.record_single(k + 1, p, state);
        }
        for (std::size_t c = 0; c < n; ++c) ens.terminal[c * P + p] = state[c];
    }
    return ens;
}

TimeMoments empirical_moments(const PathEnsemble& ens, std::size_t time_index) {
    if (ens.n_paths < 2)
        throw std::invalid_argument("empirical_moments: need at least 2 paths");
    if (time_index >= ens.times.size())
        throw std::invalid_argument("empirical_moments: time index out of range");
    const std::size_t d = ens.dim;
    const double np = static_cast<double>(ens.n_paths);
    TimeMoments m;
    m.mean.resize(d);
    for (std::size_t c = 0; c < d; ++c) m.mean(c) = ens.sum_x[time_index * d + c] / np;
    m.cov.resize(d, d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t e = 0; e < d; ++e) {
            const double sxx = ens.sum_xx[(time_index * d + c) * d + e];
            m.cov(c, e) = (sxx - np * m.mean(c) * m.mean(e)) / (np - 1.0);
        }
    return m;
}

TubeStats tube_stats(const PathEnsemble& ens, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("tube_stats: k must be positive");
    TubeStats ts;
    ts.times = ens.times;
    ts.k_sigma = k;
    const std::size_t nt = ens.times.size();
    ts.mean.assign(nt, std::vector<double>(ens.dim));
    ts.stddev.assign(nt, std::vector<double>(ens.dim));
    ts.lo.assign(nt, std::vector<double>(ens.dim));
    ts.hi.assign(nt, std::vector<double>(ens.dim));
    const double np = static_cast<double>(ens.n_paths);
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t c = 0; c < ens.dim; ++c) {
            const double mean = ens.sum_x[t * ens.dim + c] / np;
            const double sxx = ens.sum_xx[(t * ens.dim + c) * ens.dim + c];
            const double var = ens.n_paths > 1
                                   ? std::max(0.0, (sxx - np * mean * mean) / (np - 1.0))
                                   : 0.0;
            const double sd = std::sqrt(var);
            ts.mean[t][c] = mean;
            ts.stddev[t][c] = sd;
            ts.lo[t][c] = mean - k * sd;
            ts.hi[t][c] = mean + k * sd;
        }
    }
    return ts;
}

}  // namespace sbridge
