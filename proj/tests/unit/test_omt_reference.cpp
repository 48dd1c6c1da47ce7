#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sbridge/omt_reference.hpp"

using namespace sbridge;

TEST_CASE("inverse normal cdf round trip") {
    for (double u : {1e-9, 1e-4, 0.02, 0.2, 0.5, 0.77, 0.98, 1.0 - 1e-6}) {
        const double z = inverse_normal_cdf(u);
        CHECK(normal_cdf(z) == doctest::Approx(u).epsilon(1e-13));
        // symmetry where 1-u is exactly representable enough: d z / d u blows
        // up like 1/phi(z) in the far tail, amplifying the rounding of 1-u
        if (u >= 1e-4)
            CHECK(inverse_normal_cdf(1.0 - u) == doctest::Approx(-z).epsilon(1e-10));
    }
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
}

TEST_CASE("monotone map: identity, dilation, shift") {
    const Gaussian1D std_normal(0, 1);
    const Quantile1D q0 = gaussian_quantiles(std_normal, 257);

    auto ident = monotone_map_1d(q0, q0);
    for (std::size_t k = 0; k < q0.value.size(); ++k)
        CHECK(ident[k] == q0.value[k]);

    const Quantile1D q4 = gaussian_quantiles(Gaussian1D(0, 2), 257);
    auto dil = monotone_map_1d(q0, q4);
    for (std::size_t k = 0; k < q0.value.size(); ++k)
        CHECK(std::abs(dil[k] - 2.0 * q0.value[k]) <= 1e-10);

    const Quantile1D qs = gaussian_quantiles(Gaussian1D(3, 1), 257);
    auto shift = monotone_map_1d(q0, qs);
    for (std::size_t k = 0; k < q0.value.size(); ++k)
        CHECK(std::abs(shift[k] - (q0.value[k] + 3.0)) <= 1e-10);

    CHECK_THROWS_AS(monotone_map_1d(q0, gaussian_quantiles(std_normal, 100)),
                    std::invalid_argument);
}

TEST_CASE("monotone map pushes samples onto the target law") {
    // Push 1e5 fixed-seed samples of N(0,1) through T = F1^{-1} o F0 toward
    // N(1, 2.25); the Kolmogorov-Smirnov statistic must clear the 1% band.
    const Gaussian1D rho0(0, 1);
    const Gaussian1D rho1(1, 1.5);
    const std::size_t n = 100000;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unif(1e-12, 1.0 - 1e-12);
    std::vector<double> pushed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rho0.quantile(unif(rng));
        // T through the quantile identity F1^{-1}(F0(x)) rather than the
        // affine closed form the map is being checked against.
        pushed[i] = rho1.quantile(normal_cdf((x - rho0.mean) / rho0.stddev));
    }
    std::sort(pushed.begin(), pushed.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = normal_cdf((pushed[i] - rho1.mean) / rho1.stddev);
        ks = std::max(ks, std::abs(f - (static_cast<double>(i) + 0.5) /
                                           static_cast<double>(n)));
    }
    CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("displacement interpolation endpoints and hand values") {
    const Gaussian1D a(0, 1), b(0, 2);
    CHECK(displacement_interpolation(a, b, 0.0).stddev == 1.0);
    CHECK(displacement_interpolation(a, b, 1.0).stddev == 2.0);
    const Gaussian1D mid = displacement_interpolation(a, b, 0.5);
    CHECK(mid.stddev == doctest::Approx(1.5));
    CHECK(mid.stddev * mid.stddev == doctest::Approx(2.25));

    const Gaussian1D l(-1, 1), r(1, 1);
    const Gaussian1D c = displacement_interpolation(l, r, 0.5);
    CHECK(c.mean == doctest::Approx(0.0));
    CHECK(c.stddev == doctest::Approx(1.0));

    CHECK_THROWS_AS(displacement_interpolation(a, b, 1.5), std::invalid_argument);
}

TEST_CASE("constant-speed geodesic property for translates") {
    const Gaussian1D a(0, 1), b(4, 1);
    const double total = wasserstein2(a, b);
    for (double t : {0.1, 0.25, 0.5, 0.9}) {
        const Gaussian1D mid = displacement_interpolation(a, b, t);
        CHECK(std::abs(wasserstein2(a, mid) - t * total) <= 1e-10);
    }
    // quantile representation agrees
    const Quantile1D qa = gaussian_quantiles(a, 501);
    const Quantile1D qb = gaussian_quantiles(b, 501);
    for (double t : {0.25, 0.75}) {
        const Quantile1D mid = displacement_interpolation(qa, qb, t);
        CHECK(std::abs(wasserstein2(qa, mid) - t * wasserstein2(qa, qb)) <= 1e-10);
    }
}

TEST_CASE("gaussian W2 closed forms") {
    CHECK(wasserstein2(Gaussian1D(1, 2), Gaussian1D(1, 2)) == 0.0);
    CHECK(wasserstein2(Gaussian1D(0, 1), Gaussian1D(3, 1)) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(wasserstein2(Gaussian1D(0, 1), Gaussian1D(0, 2)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wasserstein2(Gaussian1D(3, 1), Gaussian1D(0, 5)) ==
          doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("discrete grid transport is exact on point masses") {
    Grid1D grid(-2.0, 2.0, 8);  // spacing 0.5
    std::vector<double> a(8, 0.0), b(8, 0.0);
    a[1] = 1.0;
    b[6] = 1.0;
    const double d = grid.point(6) - grid.point(1);
    CHECK(wasserstein2_grid(Marginal(a), Marginal(b), grid) ==
          doctest::Approx(d).epsilon(1e-14));

    // delta vs gaussian: W2^2 = (x0-mu)^2 + s^2
    const Gaussian1D g(0.3, 0.7);
    const double expect = std::sqrt(std::pow(grid.point(1) - 0.3, 2) + 0.49);
    CHECK(wasserstein2_grid_gaussian(Marginal(a), grid, g) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("discrete transport of discretized gaussians tracks the closed form") {
    Grid1D grid(-6.0, 6.0, 600);
    Marginal a = discretize_gaussian(grid, -1.0, 0.5);
    Marginal b = discretize_gaussian(grid, 1.0, 0.5);
    CHECK(wasserstein2_grid(a, b, grid) == doctest::Approx(2.0).epsilon(1e-3));
    // discretization floor of a single gaussian is at the cell scale
    const double floor_w2 = wasserstein2_grid_gaussian(a, grid, Gaussian1D(-1.0, 0.5));
    CHECK(floor_w2 <= grid.spacing());
    CHECK(floor_w2 > 0.0);
}

TEST_CASE("hamilton-jacobi residual: clean path passes, perturbed path fails") {
    Grid1D grid(-4.0, 4.0, 200);
    const std::vector<double> times{0.1, 0.3, 0.5, 0.7, 0.9};

    DisplacementPath still = DisplacementPath::between(Gaussian1D(0, 1), Gaussian1D(0, 1));
    HjReport r0 = hj_residual(still, grid, times);
    CHECK(r0.max_hj_residual == 0.0);

    DisplacementPath path = DisplacementPath::between(Gaussian1D(0, 1), Gaussian1D(0, 2));
    HjReport r1 = hj_residual(path, grid, times);
    CHECK(r1.max_hj_residual <= 1e-8);

    // continuity residual is second order in the grid spacing
    Grid1D fine(-4.0, 4.0, 400);
    HjReport r2 = hj_residual(path, fine, times);
    REQUIRE(r2.max_continuity_residual > 0.0);
    const double order = std::log2(r1.max_continuity_residual / r2.max_continuity_residual);
    CHECK(order >= 1.8);

    DisplacementPath bent = DisplacementPath::between(Gaussian1D(0, 1), Gaussian1D(0, 2));
    bent.perturb_quadratic(1e-2);
    HjReport r3 = hj_residual(bent, grid, times);
    CHECK(r3.max_hj_residual >= 1e-3);

    DisplacementPath quant = DisplacementPath::between(gaussian_quantiles(Gaussian1D(0, 1), 64),
                                                       gaussian_quantiles(Gaussian1D(0, 2), 64));
    CHECK_THROWS_AS(hj_residual(quant, grid, times), UnsupportedConfigurationError);
}

TEST_CASE("psi solves the hamilton-jacobi equation with nonzero means too") {
    DisplacementPath path =
        DisplacementPath::between(Gaussian1D(-1.0, 0.5), Gaussian1D(2.0, 1.5));
    Grid1D grid(-5.0, 5.0, 100);
    HjReport rep = hj_residual(path, grid, {0.2, 0.5, 0.8});
    CHECK(rep.max_hj_residual <= 1e-8);
    // velocity field moves the mean at rate mu1 - mu0 at the center line
    const double v = path.velocity(path.gaussian_at(0.5).mean, 0.5);
    CHECK(v == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("zero-noise study: distances shrink with epsilon") {
    Gaussian1D rho0(-1.0, 0.5), rho1(1.0, 0.5);
    Grid1D grid(-4.0, 4.0, 160);
    ZeroNoiseOptions opts;
    opts.tol = 1e-9;
    auto rows = zero_noise_study(rho0, rho1, grid, {0.4, 0.1}, 8, opts);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].epsilon == 0.4);
    CHECK(rows[0].w2_mid > rows[1].w2_mid);
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.w2_mid));
        CHECK(r.bridge_cycles >= 1);
        CHECK(r.contraction_bound >= 0.0);
        CHECK(r.contraction_bound <= 1.0);
        CHECK(r.discretization_floor > 0.0);
    }
}

TEST_CASE("zero-noise study: equal marginals sit at the discretization floor") {
    Gaussian1D rho(0.0, 0.5);
    Grid1D grid(-4.0, 4.0, 160);
    ZeroNoiseOptions opts;
    opts.tol = 1e-9;
    auto rows = zero_noise_study(rho, rho, grid, {0.1, 0.05}, 4, opts);
    for (const auto& r : rows) CHECK(r.w2_mid <= r.discretization_floor);
}

TEST_CASE("zero-noise study: large epsilon sits far from the displacement path") {
    Gaussian1D rho0(-1.0, 0.5), rho1(1.0, 0.5);
    Grid1D wide(-10.0, 10.0, 250);
    ZeroNoiseOptions opts;
    opts.tol = 1e-8;
    auto rows = zero_noise_study(rho0, rho1, wide, {5.0, 0.05}, 4, opts);
    CHECK(rows[0].w2_mid >= 2.0 * rows[1].w2_mid);
}

TEST_CASE("zero-noise study input validation") {
    Gaussian1D rho0(-1.0, 0.5), rho1(1.0, 0.5);
    Grid1D narrow(-2.0, 2.0, 50);
    CHECK_THROWS_AS(zero_noise_study(rho0, rho1, narrow, {0.5, 0.1}, 4, {}),
                    std::invalid_argument);
    Grid1D grid(-4.0, 4.0, 100);
    CHECK_THROWS_AS(zero_noise_study(rho0, rho1, grid, {0.1, 0.5}, 4, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(zero_noise_study(rho0, rho1, grid, {0.5, 0.1}, 5, {}),
                    std::invalid_argument);
}
