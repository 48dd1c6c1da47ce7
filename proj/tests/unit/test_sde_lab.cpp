#include <doctest.h>

#include <cmath>
#include <cstring>

#include "sbridge/sde_lab.hpp"

using namespace sbridge;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LinearSystem scalar_system(double a, double sigma) {
    return LinearSystem(MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, 1.0),
                        MatrixXd::Constant(1, 1, sigma), 1.0);
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 test suite.
    auto r0 = rng::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(r0[0] == 0x6627e8d5u);
    CHECK(r0[1] == 0xe169c58du);
    CHECK(r0[2] == 0xbc57ac4cu);
    CHECK(r0[3] == 0x9b00dbd8u);

    auto r1 = rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
    CHECK(r1[0] == 0x408f276du);
    CHECK(r1[1] == 0x41c83b0eu);
    CHECK(r1[2] == 0xa20bc7c6u);
    CHECK(r1[3] == 0x6d5451fdu);

    auto r2 = rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
    CHECK(r2[0] == 0xd16cfe09u);
    CHECK(r2[1] == 0x94fdccebu);
    CHECK(r2[2] == 0x5001e420u);
    CHECK(r2[3] == 0x24126ea1u);
}

TEST_CASE("fixed seed reproduces the ensemble bit for bit") {
    LinearSystem sys = scalar_system(-0.5, 1.0);
    SimOptions opts;
    opts.n_paths = 64;
    opts.n_steps = 32;
    opts.seed = 11;
    opts.store_paths = true;
    auto x0 = InitialLaw::gaussian(GaussianState(VectorXd::Zero(1), MatrixXd::Identity(1, 1)));
    auto policy = LinearPolicy::zero(1, 1);
    PathEnsemble a = simulate(sys, policy, x0, opts);
    PathEnsemble b = simulate(sys, policy, x0, opts);
    REQUIRE(a.stored.size() == b.stored.size());
    CHECK(std::memcmp(a.stored.data(), b.stored.data(),
                      a.stored.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.terminal.data(), b.terminal.data(),
                      a.terminal.size() * sizeof(double)) == 0);

    SimOptions other = opts;
    other.seed = 12;
    PathEnsemble c = simulate(sys, policy, x0, other);
    CHECK(std::memcmp(a.terminal.data(), c.terminal.data(),
                      a.terminal.size() * sizeof(double)) != 0);
}

TEST_CASE("no dynamics, no noise: constant paths and zero-width tube") {
    LinearSystem sys = scalar_system(0.0, 0.0);
    SimOptions opts;
    opts.n_paths = 16;
    opts.n_steps = 10;
    opts.store_paths = true;
    PathEnsemble ens = simulate(sys, LinearPolicy::zero(1, 1),
                                InitialLaw::point(VectorXd::Constant(1, 1.25)), opts);
    for (std::size_t t = 0; t < ens.times.size(); ++t)
        for (std::size_t p = 0; p < ens.n_paths; ++p)
            CHECK(ens.path_value(t, 0, p) == 1.25);
    TubeStats tube = tube_stats(ens, 3.0);
    for (std::size_t t = 0; t < tube.times.size(); ++t) {
        CHECK(tube.hi[t][0] == tube.lo[t][0]);
        CHECK(tube.stddev[t][0] == 0.0);
    }
    TimeMoments m = empirical_moments(ens, 5);
    CHECK(m.cov(0, 0) == 0.0);
}

TEST_CASE("deterministic exponential decay within the euler bound") {
    for (std::size_t n_steps : {50u, 100u, 200u}) {
        LinearSystem sys = scalar_system(-1.0, 0.0);
        SimOptions opts;
        opts.n_paths = 1;
        opts.n_steps = n_steps;
        PathEnsemble ens = simulate(sys, LinearPolicy::zero(1, 1),
                                    InitialLaw::point(VectorXd::Constant(1, 1.0)), opts);
        const double h = 1.0 / static_cast<double>(n_steps);
        CHECK(std::abs(ens.terminal_value(0, 0) - std::exp(-1.0)) <= 5.0 * h);
    }
}

TEST_CASE("brownian motion variance at t = 1") {
    LinearSystem sys = scalar_system(0.0, 1.0);
    SimOptions opts;
    opts.n_paths = 100000;
    opts.n_steps = 64;
    opts.seed = 2024;
    PathEnsemble ens = simulate(sys, LinearPolicy::zero(1, 1),
                                InitialLaw::point(VectorXd::Zero(1)), opts);
    TimeMoments m = empirical_moments(ens, opts.n_steps);
    const double se = std::sqrt(2.0 / (static_cast<double>(opts.n_paths) - 1.0));
    CHECK(std::abs(m.cov(0, 0) - 1.0) <= 3.0 * se);
    CHECK(std::abs(m.mean(0)) <= 3.0 / std::sqrt(static_cast<double>(opts.n_paths)));

    // tube half-width tracks 3 sqrt(t)
    TubeStats tube = tube_stats(ens, 3.0);
    for (std::size_t t : {std::size_t(16), std::size_t(32), std::size_t(64)}) {
        const double half = 0.5 * (tube.hi[t][0] - tube.lo[t][0]);
        const double expect = 3.0 * std::sqrt(ens.times[t]);
        CHECK(std::abs(half - expect) <= 3.0 * expect * se);
    }
}

TEST_CASE("three-sigma empirical coverage") {
    LinearSystem sys = scalar_system(0.0, 1.0);
    SimOptions opts;
    opts.n_paths = 100000;
    opts.n_steps = 8;
    opts.seed = 77;
    PathEnsemble ens = simulate(sys, LinearPolicy::zero(1, 1),
                                InitialLaw::point(VectorXd::Zero(1)), opts);
    TubeStats tube = tube_stats(ens, 3.0);
    std::size_t inside = 0;
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        const double x = ens.terminal_value(0, p);
        if (x >= tube.lo.back()[0] && x <= tube.hi.back()[0]) ++inside;
    }
    const double cover = static_cast<double>(inside) / static_cast<double>(ens.n_paths);
    CHECK(cover >= 0.995);
    CHECK(cover <= 0.999);
}

TEST_CASE("weak order one on the scalar OU mean") {
    std::vector<double> errs;
    for (std::size_t n_steps : {8u, 16u, 32u}) {
        LinearSystem sys = scalar_system(-1.0, 0.1);
        SimOptions opts;
        opts.n_paths = 100000;
        opts.n_steps = n_steps;
        opts.seed = 5;
        PathEnsemble ens = simulate(sys, LinearPolicy::zero(1, 1),
                                    InitialLaw::point(VectorXd::Constant(1, 1.0)), opts);
        TimeMoments m = empirical_moments(ens, n_steps);
        errs.push_back(std::abs(m.mean(0) - std::exp(-1.0)));
    }
    const double slope = std::log2(errs[0] / errs[2]) / 2.0;
    CHECK(slope >= 0.8);
}

TEST_CASE("generic sde path agrees with the kernel-stepped linear path") {
    LinearSystem sys = scalar_system(-0.7, 0.8);
    SimOptions opts;
    opts.n_paths = 500;
    opts.n_steps = 40;
    opts.seed = 31;
    auto x0 = InitialLaw::point(VectorXd::Constant(1, 0.4));
    PathEnsemble lin = simulate(sys, LinearPolicy::zero(1, 1), x0, opts);

    GenericSde sde;
    sde.dim = 1;
    sde.diffusion = MatrixXd::Constant(1, 1, 0.8);
    sde.drift = [](double, std::span<const double> x, std::span<double> d) {
        d[0] = -0.7 * x[0];
    };
    PathEnsemble gen = simulate(sde, x0, opts);
    for (std::size_t p = 0; p < opts.n_paths; ++p)
        CHECK(lin.terminal_value(0, p) ==
              doctest::Approx(gen.terminal_value(0, p)).epsilon(1e-12));
}

TEST_CASE("nonlinear oscillator simulation stays sane and reports drift failures") {
    // Duffing-style quartic potential, damped and noisy.
    GenericSde sde;
    sde.dim = 2;
    MatrixXd diff(2, 1);
    diff << 0.0, 0.5;
    sde.diffusion = diff;
    sde.drift = [](double, std::span<const double> x, std::span<double> d) {
        d[0] = x[1];
        d[1] = -x[1] - x[0] - 0.3 * x[0] * x[0] * x[0];
    };
    SimOptions opts;
    opts.n_paths = 200;
    opts.n_steps = 100;
    opts.seed = 9;
    PathEnsemble ens =
        simulate(sde, InitialLaw::point(Eigen::Vector2d(1.0, 0.0)), opts);
    TimeMoments m = empirical_moments(ens, opts.n_steps);
    CHECK(std::isfinite(m.mean(0)));
    CHECK(std::isfinite(m.cov(0, 0)));
    CHECK(m.cov(0, 0) >= 0.0);

    GenericSde failing = sde;
    failing.drift = [](double t, std::span<const double>, std::span<double>) {
        if (t > 0.5) throw std::runtime_error("potential blew up");
    };
    CHECK_THROWS_WITH_AS(simulate(failing, InitialLaw::point(Eigen::Vector2d(1.0, 0.0)), opts),
                         doctest::Contains("drift evaluation failed"), std::runtime_error);
}

TEST_CASE("control energy accumulator matches the analytic value") {
    // dX = u dt with u = -x: closed loop dX = -X dt, X(0)=1 deterministic.
    // int_0^1 u^2 dt = int e^{-2t} = (1 - e^-2)/2.
    LinearSystem sys = scalar_system(0.0, 0.0);
    SimOptions opts;
    opts.n_paths = 3;
    opts.n_steps = 2000;
    opts.track_energy = true;
    PathEnsemble ens = simulate(sys, LinearPolicy::constant_gain(MatrixXd::Identity(1, 1)),
                                InitialLaw::point(VectorXd::Constant(1, 1.0)), opts);
    const double expect = 0.5 * (1.0 - std::exp(-2.0));
    for (double e : ens.energy) CHECK(e == doctest::Approx(expect).epsilon(1e-3));
}
