#include "sbridge/omt_reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sbridge/cone_metric.hpp"
#include "sbridge/discrete_bridge.hpp"

namespace sbridge {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrt2Pi = 2.5066282746310002;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("inverse_normal_cdf: u must lie in (0,1)");

    // Acklam's rational initializer, then one Halley step against erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    double x;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Tail-accurate residual: in the upper tail compare survival functions so
    // the subtraction keeps relative accuracy.
    // Phi(x) - u, formed from the survival function in the upper tail so the
    // subtraction keeps relative accuracy there.
    const double e = x > 0.0 ? (1.0 - u) - 0.5 * std::erfc(x / kSqrt2)
                             : normal_cdf(x) - u;
    const double un = e * kSqrt2Pi * std::exp(0.5 * x * x);
    return x - un / (1.0 + 0.5 * x * un);
}

Gaussian1D::Gaussian1D(double m, double s) : mean(m), stddev(s) {
    if (!(stddev > 0.0)) throw std::invalid_argument("Gaussian1D: stddev must be positive");
}

double Gaussian1D::pdf(double x) const {
    return normal_pdf((x - mean) / stddev) / stddev;
}

Quantile1D::Quantile1D(std::vector<double> probabilities, std::vector<double> values)
    : prob(std::move(probabilities)), value(std::move(values)) {
    if (prob.empty() || prob.size() != value.size())
        throw std::invalid_argument("Quantile1D: bad shape");
    for (std::size_t i = 0; i < prob.size(); ++i) {
        if (!(prob[i] > 0.0 && prob[i] < 1.0))
            throw std::domain_error("Quantile1D: probabilities must lie in (0,1)");
        if (i > 0 && !(prob[i] > prob[i - 1]))
            throw std::domain_error("Quantile1D: probabilities must be strictly increasing");
        if (i > 0 && value[i] < value[i - 1])
            throw std::domain_error("Quantile1D: quantile values must be nondecreasing");
    }
}

Quantile1D gaussian_quantiles(const Gaussian1D& g, std::size_t m) {
    if (m == 0) throw std::invalid_argument("gaussian_quantiles: m must be positive");
    std::vector<double> u(m), v(m);
    for (std::size_t k = 0; k < m; ++k) {
        u[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
        v[k] = g.quantile(u[k]);
    }
    return Quantile1D(std::move(u), std::move(v));
}

namespace {
void require_matching_grids(const Quantile1D& a, const Quantile1D& b, const char* what) {
    if (a.prob.size() != b.prob.size())
        throw std::invalid_argument(std::string(what) + ": probability grids differ");
    for (std::size_t i = 0; i < a.prob.size(); ++i)
        if (std::abs(a.prob[i] - b.prob[i]) > 1e-12)
            throw std::invalid_argument(std::string(what) + ": probability grids differ");
}
}  // namespace

std::vector<double> monotone_map_1d(const Quantile1D& rho0, const Quantile1D& rho1) {
    require_matching_grids(rho0, rho1, "monotone_map_1d");
    return rho1.value;
}

Gaussian1D displacement_interpolation(const Gaussian1D& a, const Gaussian1D& b, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("displacement_interpolation: t outside [0,1]");
    return Gaussian1D((1.0 - t) * a.mean + t * b.mean,
                      (1.0 - t) * a.stddev + t * b.stddev);
}

Quantile1D displacement_interpolation(const Quantile1D& a, const Quantile1D& b, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("displacement_interpolation: t outside [0,1]");
    require_matching_grids(a, b, "displacement_interpolation");
    std::vector<double> v(a.value.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = (1.0 - t) * a.value[i] + t * b.value[i];
    return Quantile1D(a.prob, std::move(v));
}

double wasserstein2(const Gaussian1D& a, const Gaussian1D& b) {
    const double dm = a.mean - b.mean;
    const double ds = a.stddev - b.stddev;
    return std::sqrt(dm * dm + ds * ds);
}

double wasserstein2(const Quantile1D& a, const Quantile1D& b) {
    require_matching_grids(a, b, "wasserstein2");
    const std::size_t m = a.prob.size();
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double left = k == 0 ? 0.0 : a.prob[k - 1];
        const double right = k + 1 == m ? 1.0 : a.prob[k + 1];
        const double w = 0.5 * (right - left);
        const double diff = a.value[k] - b.value[k];
        s += w * diff * diff;
    }
    return std::sqrt(s);
}

double wasserstein2_grid(const Marginal& a, const Marginal& b, const Grid1D& grid) {
    if (a.size() != grid.n_points || b.size() != grid.n_points)
        throw std::invalid_argument("wasserstein2_grid: dimension mismatch");
    const std::size_t n = grid.n_points;
    std::size_t ia = 0, ib = 0;
    while (ia < n && a.at(ia) == 0.0) ++ia;
    while (ib < n && b.at(ib) == 0.0) ++ib;
    double ca = ia < n ? a.at(ia) : 1.0;
    double cb = ib < n ? b.at(ib) : 1.0;
    double prev = 0.0;
    double s = 0.0;
    while (prev < 1.0 && ia < n && ib < n) {
        const double cut = std::min(1.0, std::min(ca, cb));
        const double diff = grid.point(ia) - grid.point(ib);
        s += diff * diff * (cut - prev);
        prev = cut;
        if (ca <= cut) {
            do {
                ++ia;
            } while (ia < n && a.at(ia) == 0.0);
            if (ia < n) ca += a.at(ia);
        }
        if (cb <= cut) {
            do {
                ++ib;
            } while (ib < n && b.at(ib) == 0.0);
            if (ib < n) cb += b.at(ib);
        }
    }
    return std::sqrt(std::max(0.0, s));
}

double wasserstein2_grid_gaussian(const Marginal& a, const Grid1D& grid,
                                  const Gaussian1D& g) {
    if (a.size() != grid.n_points)
        throw std::invalid_argument("wasserstein2_grid_gaussian: dimension mismatch");
    // Piecewise integral of (x_k - mu - s z(u))^2 du over the cumulative
    // slabs, with closed-form Gaussian partial moments:
    //   int z phi = phi(z0) - phi(z1),  int z^2 phi = (Phi - z phi)|.
    double s = 0.0;
    double cum = 0.0;
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        const double w = a.at(k);
        if (w == 0.0) continue;
        const double c0 = cum;
        if (c0 >= 1.0) break;  // rounding exhausted the mass early
        cum = std::min(1.0, cum + w);
        if (cum <= c0) continue;
        const double z0 = c0 <= 0.0 ? -std::numeric_limits<double>::infinity()
                                    : inverse_normal_cdf(c0);
        const double z1 = cum >= 1.0 ? std::numeric_limits<double>::infinity()
                                     : inverse_normal_cdf(cum);
        const double phi0 = std::isinf(z0) ? 0.0 : normal_pdf(z0);
        const double phi1 = std::isinf(z1) ? 0.0 : normal_pdf(z1);
        const double cdf0 = std::isinf(z0) ? 0.0 : normal_cdf(z0);
        const double cdf1 = std::isinf(z1) ? 1.0 : normal_cdf(z1);
        const double zphi0 = std::isinf(z0) ? 0.0 : z0 * phi0;
        const double zphi1 = std::isinf(z1) ? 0.0 : z1 * phi1;
        const double d = grid.point(k) - g.mean;
        const double m0 = cdf1 - cdf0;            // int phi
        const double m1 = phi0 - phi1;            // int z phi
        const double m2 = (cdf1 - zphi1) - (cdf0 - zphi0);  // int z^2 phi
        s += d * d * m0 - 2.0 * d * g.stddev * m1 + g.stddev * g.stddev * m2;
    }
    return std::sqrt(std::max(0.0, s));
}

DisplacementPath DisplacementPath::between(const Gaussian1D& rho0, const Gaussian1D& rho1) {
    DisplacementPath p;
    p.gaussian_ = true;
    p.mu0_ = rho0.mean;
    p.mu1_ = rho1.mean;
    p.s0_ = rho0.stddev;
    p.s1_ = rho1.stddev;
    return p;
}

DisplacementPath DisplacementPath::between(const Quantile1D& rho0, const Quantile1D& rho1) {
    require_matching_grids(rho0, rho1, "DisplacementPath");
    DisplacementPath p;
    p.gaussian_ = false;
    p.qprob_ = rho0.prob;
    p.qv0_ = rho0.value;
    p.qv1_ = rho1.value;
    return p;
}

void DisplacementPath::require_gaussian() const {
    if (!gaussian_)
        throw UnsupportedConfigurationError(
            "DisplacementPath: potential accessors need the smooth Gaussian case");
}

Gaussian1D DisplacementPath::gaussian_at(double t) const {
    require_gaussian();
    return Gaussian1D((1.0 - t) * mu0_ + t * mu1_, (1.0 - t) * s0_ + t * s1_);
}

Quantile1D DisplacementPath::quantile_at(double t) const {
    if (gaussian_)
        return gaussian_quantiles(gaussian_at(t), 512);
    std::vector<double> v(qv0_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - t) * qv0_[i] + t * qv1_[i];
    return Quantile1D(qprob_, std::move(v));
}

// psi(x,t) = (a + delta) x^2/2 + b x + c with
//   a(t) = (s1-s0)/s(t), b(t) = (mu1-mu0) - a(t) mu(t),
//   c(t) = -int_0^t b^2/2, all closed form.
double DisplacementPath::psi(double x, double t) const {
    require_gaussian();
    const double dsig = s1_ - s0_;
    const double dmu = mu1_ - mu0_;
    const double sig = (1.0 - t) * s0_ + t * s1_;
    const double a = dsig / sig + perturbation_;
    const double b = dmu - (dsig / sig) * ((1.0 - t) * mu0_ + t * mu1_);
    double c;
    if (dsig != 0.0) {
        const double q = mu0_ - s0_ * dmu / dsig;
        c = -0.5 * dsig * q * q * (1.0 / s0_ - 1.0 / sig);
    } else {
        c = -0.5 * dmu * dmu * t;
    }
    return 0.5 * a * x * x + b * x + c;
}

double DisplacementPath::psi_x(double x, double t) const {
    require_gaussian();
    const double dsig = s1_ - s0_;
    const double sig = (1.0 - t) * s0_ + t * s1_;
    const double a = dsig / sig + perturbation_;
    const double b = (mu1_ - mu0_) - (dsig / sig) * ((1.0 - t) * mu0_ + t * mu1_);
    return a * x + b;
}

double DisplacementPath::psi_t(double x, double t) const {
    require_gaussian();
    const double dsig = s1_ - s0_;
    const double dmu = mu1_ - mu0_;
    const double sig = (1.0 - t) * s0_ + t * s1_;
    const double mu = (1.0 - t) * mu0_ + t * mu1_;
    const double a = dsig / sig;  // the perturbation is constant in t
    const double b = dmu - a * mu;
    const double da = -a * a;
    const double db = a * a * mu - a * dmu;
    const double dc = -0.5 * b * b;
    return 0.5 * da * x * x + db * x + dc;
}

double DisplacementPath::density(double x, double t) const {
    require_gaussian();
    return gaussian_at(t).pdf(x);
}

HjReport hj_residual(const DisplacementPath& path, const Grid1D& grid,
                     const std::vector<double>& times) {
    if (!path.is_gaussian())
        throw UnsupportedConfigurationError(
            "hj_residual: quantile paths are not smooth; unsupported");
    HjReport rep;
    const double hx = grid.spacing();
    const double ht = hx;
    for (double t : times) {
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            const double x = grid.point(i);
            const double g = path.psi_x(x, t);
            const double hj = path.psi_t(x, t) + 0.5 * g * g;
            rep.max_hj_residual = std::max(rep.max_hj_residual, std::abs(hj));

            // centered-difference continuity residual of (rho, psi_x)
            const double drho_dt =
                (path.density(x, t + ht) - path.density(x, t - ht)) / (2.0 * ht);
            const double flux_p = path.velocity(x + hx, t) * path.density(x + hx, t);
            const double flux_m = path.velocity(x - hx, t) * path.density(x - hx, t);
            const double cont = drho_dt + (flux_p - flux_m) / (2.0 * hx);
            rep.max_continuity_residual =
                std::max(rep.max_continuity_residual, std::abs(cont));
        }
    }
    return rep;
}

std::vector<ZeroNoiseRow> zero_noise_study(const Gaussian1D& rho0, const Gaussian1D& rho1,
                                           const Grid1D& grid,
                                           const std::vector<double>& epsilons,
                                           int n_time_steps,
                                           const ZeroNoiseOptions& opts) {
    if (epsilons.empty())
        throw std::invalid_argument("zero_noise_study: empty epsilon list");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0))
            throw std::invalid_argument("zero_noise_study: epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("zero_noise_study: epsilons must be strictly decreasing");
    }
    if (n_time_steps < 2 || n_time_steps % 2 != 0)
        throw std::invalid_argument(
            "zero_noise_study: n_time_steps must be even so t = 1/2 is a knot");

    // Truncate-and-renormalize bias dies off when the grid clears the
    // diffusive margin beyond the marginal supports.
    const double dt = 1.0 / n_time_steps;
    const double margin = 6.0 * std::sqrt(epsilons.front() * dt);
    const double support_lo =
        std::min(rho0.mean - 3.0 * rho0.stddev, rho1.mean - 3.0 * rho1.stddev);
    const double support_hi =
        std::max(rho0.mean + 3.0 * rho0.stddev, rho1.mean + 3.0 * rho1.stddev);
    if (grid.lower > support_lo - margin || grid.upper < support_hi + margin)
        throw std::invalid_argument(
            "zero_noise_study: grid too narrow for the largest epsilon (need a " +
            std::to_string(margin) + " margin beyond the 3-sigma support)");

    const Marginal p0 = discretize_gaussian(grid, rho0.mean, rho0.stddev);
    const Marginal pT = discretize_gaussian(grid, rho1.mean, rho1.stddev);
    const Gaussian1D disp_mid = displacement_interpolation(rho0, rho1, 0.5);
    const Marginal disp_mid_grid =
        discretize_gaussian(grid, disp_mid.mean, disp_mid.stddev);
    const double floor_w2 = wasserstein2_grid_gaussian(disp_mid_grid, grid, disp_mid);

    std::vector<ZeroNoiseRow> rows;
    std::vector<double> warm;
    for (double eps : epsilons) {
        std::vector<TransitionKernel> steps;
        steps.reserve(n_time_steps);
        for (int k = 0; k < n_time_steps; ++k)
            steps.push_back(build_heat_kernel(grid, eps, dt));
        TransitionKernel prior = compose(steps);
        const double bound =
            birkhoff_ratio(PositiveMatrix(prior.rows(), prior.cols(), prior.data()));

        DiscreteBridgeProblem problem(std::move(prior), p0, pT, std::move(steps));
        SolveOptions sopts;
        sopts.tol = opts.tol;
        sopts.max_cycles = opts.max_cycles;
        if (opts.warm_start && !warm.empty()) sopts.init_phihat0 = warm;
        BridgeSolution sol = solve(problem, sopts);
        if (!sol.converged)
            throw SolverConvergenceError(
                "zero_noise_study: bridge did not converge at epsilon = " +
                    std::to_string(eps),
                sol.final_dh);
        if (opts.warm_start) warm = sol.phihat0;

        const std::vector<Marginal> path = interpolate(sol, problem);
        const Marginal& mid = path[static_cast<std::size_t>(n_time_steps / 2)];
        rows.push_back({eps, wasserstein2_grid(mid, disp_mid_grid, grid), sol.iterations,
                        bound * bound, floor_w2});
    }
    return rows;
}

}  // namespace sbridge
