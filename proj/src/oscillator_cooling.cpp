#include "sbridge/oscillator_cooling.hpp"

#include <cmath>

namespace sbridge {

namespace {
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;
}  // namespace

OscillatorModel::OscillatorModel(double m, double beta, double k, double t_bath,
                                 double kappa)
    : mass(m), damping(beta), boltzmann(k), bath_temperature(t_bath), stiffness(kappa) {
    if (!(mass > 0.0)) throw std::invalid_argument("OscillatorModel: mass must be positive");
    if (damping < 0.0) throw std::invalid_argument("OscillatorModel: damping must be >= 0");
    if (!(boltzmann > 0.0))
        throw std::invalid_argument("OscillatorModel: boltzmann constant must be positive");
    if (!(bath_temperature > 0.0))
        throw std::invalid_argument("OscillatorModel: bath temperature must be positive");
    if (!(stiffness > 0.0))
        throw std::invalid_argument("OscillatorModel: stiffness must be positive");
}

double OscillatorModel::noise_intensity() const {
    return std::sqrt(2.0 * boltzmann * damping * bath_temperature / mass);
}

LinearSystem oscillator_system(const OscillatorModel& model, double horizon) {
    MatrixXd a(2, 2);
    a << 0.0, 1.0, -model.stiffness / model.mass, -model.damping;
    MatrixXd b(2, 1);
    b << 0.0, 1.0;
    MatrixXd b1(2, 1);
    b1 << 0.0, model.noise_intensity();
    return LinearSystem(a, b, b1, horizon);
}

GaussianState target_state(const OscillatorModel& model, double t_eff) {
    if (!(t_eff > 0.0))
        throw std::invalid_argument("target_state: effective temperature must be positive");
    MatrixXd cov = MatrixXd::Zero(2, 2);
    cov(0, 0) = model.boltzmann * t_eff / model.stiffness;
    cov(1, 1) = model.boltzmann * t_eff / model.mass;
    return GaussianState(Vector2d::Zero(), cov);
}

CoolingPlan cooling_plan(const OscillatorModel& model, const GaussianState& initial,
                         double t_eff, double t1, int n_grid, double tol) {
    if (!(t1 > 0.0)) throw std::invalid_argument("cooling_plan: t1 must be positive");
    const GaussianState target = target_state(model, t_eff);
    const double sigma = model.noise_intensity();
    if (!(sigma > 0.0))
        throw UnsupportedConfigurationError(
            "cooling_plan: undamped model has no noise channel to steer through");

    // Steering is solved with control and noise through the same scaled
    // velocity channel B = B1 = (0, sigma)^T; the physical force gain is the
    // solver gain rescaled by sigma (same closed loop).
    MatrixXd a(2, 2);
    a << 0.0, 1.0, -model.stiffness / model.mass, -model.damping;
    MatrixXd chan(2, 1);
    chan << 0.0, sigma;
    const LinearSystem steering_sys(a, chan, chan, t1);

    CoolingPlan plan{
        solve_gauss_bridge(steering_sys, initial, target, n_grid, tol),
        sigma,
        StationaryGain{},
        target,
        0.0,
    };
    // |u_phys|^2 = sigma^2 |u_solver|^2
    plan.steering_energy =
        sigma * sigma * control_energy(plan.steering, plan.steering.sigma);

    const MatrixXd terminal = plan.steering.sigma.back();
    if ((terminal - target.cov).norm() > 1e-4)
        throw SolverConvergenceError(
            "cooling_plan: steering terminal covariance misses the target",
            (terminal - target.cov).norm());

    MatrixXd b_phys(2, 1);
    b_phys << 0.0, 1.0;
    MatrixXd b1(2, 1);
    b1 << 0.0, sigma;
    plan.maintenance =
        optimal_stationary_gain(StationaryProblem(a, b_phys, b1, target.cov));

    const MatrixXd acl = a - b_phys * plan.maintenance.K;
    const MatrixXd held = solve_continuous_lyapunov(acl, b1 * b1.transpose());
    if ((held - target.cov).norm() > 1e-8)
        throw SolverConvergenceError(
            "cooling_plan: maintenance gain does not hold the target covariance",
            (held - target.cov).norm());
    return plan;
}

std::pair<double, double> effective_temperature(const OscillatorModel& model,
                                                const MatrixXd& gain) {
    MatrixXd a(2, 2);
    a << 0.0, 1.0, -model.stiffness / model.mass, -model.damping;
    MatrixXd b(2, 1);
    b << 0.0, 1.0;
    MatrixXd b1(2, 1);
    b1 << 0.0, model.noise_intensity();
    const MatrixXd acl = a - b * gain;
    const MatrixXd cov = solve_continuous_lyapunov(acl, b1 * b1.transpose());
    return {model.stiffness * cov(0, 0) / model.boltzmann,
            model.mass * cov(1, 1) / model.boltzmann};
}

}  // namespace sbridge
