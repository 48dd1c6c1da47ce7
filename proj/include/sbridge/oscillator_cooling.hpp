#pragma once

// Controlled stochastic oscillator in a quadratic potential, its
// Maxwell-Boltzmann targets at a chosen effective temperature, and the
// two-phase cooling plan: finite-horizon steering to the target state
// followed by stationary maintenance.

#include <Eigen/Dense>

#include "sbridge/gaussian_bridge.hpp"
#include "sbridge/stationary_steering.hpp"

namespace sbridge {

// Noise intensity obeys the fluctuation-dissipation relation
// sigma^2 = 2 k beta T / m structurally: sigma is derived, never stored.
struct OscillatorModel {
    OscillatorModel(double mass, double damping, double boltzmann,
                    double bath_temperature, double stiffness);

    double mass;              // m > 0
    double damping;           // beta >= 0
    double boltzmann;         // k > 0
    double bath_temperature;  // T > 0
    double stiffness;         // kappa > 0, potential V(x) = kappa x^2 / 2

    double noise_intensity() const;  // sigma
};

// State (x, v): A = [[0, 1], [-kappa/m, -beta]], B = (0, 1)^T (physical
// force channel), B1 = (0, sigma)^T.
LinearSystem oscillator_system(const OscillatorModel& model, double horizon = 1.0);

// Maxwell-Boltzmann law at temperature t_eff: zero mean, covariance
// diag(k t_eff / kappa, k t_eff / m).
GaussianState target_state(const OscillatorModel& model, double t_eff);

struct CoolingPlan {
    RiccatiSchedule steering;  // solved in the matched channel B = B1 = (0, sigma)^T
    double channel_scale = 1.0;  // sigma used by the steering solve
    StationaryGain maintenance;  // physical-channel gain holding the target
    GaussianState target;
    double steering_energy = 0.0;  // E int |u_phys|^2 dt over the steering phase

    // Physical-channel feedback gain at knot k: u = -K x through B = (0,1)^T.
    Eigen::MatrixXd physical_gain(std::size_t k) const {
        return channel_scale * steering.gain(k);
    }
};

// Steering phase on [0, t1] from `initial` to the t_eff Maxwell-Boltzmann
// state, then a maintenance gain holding it. Maintenance feasibility is
// verified, not assumed. Throws InfeasibleStationaryError or steering
// solver errors.
CoolingPlan cooling_plan(const OscillatorModel& model, const GaussianState& initial,
                         double t_eff, double t1, int n_grid = 400, double tol = 1e-10);

// Effective temperature read off the stationary covariance of the closed
// loop A - B K: returns (kappa Var(x) / k, m Var(v) / k).
std::pair<double, double> effective_temperature(const OscillatorModel& model,
                                                const Eigen::MatrixXd& gain);

}  // namespace sbridge
