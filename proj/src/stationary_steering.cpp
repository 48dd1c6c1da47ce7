#include "sbridge/stationary_steering.hpp"

#include <cmath>

namespace sbridge {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// vec(B X^T + X B^T) as a matrix acting on vec(X), column-major vec.
MatrixXd constraint_operator(const MatrixXd& B) {
    const auto n = B.rows();
    const auto m = B.cols();
    MatrixXd op = MatrixXd::Zero(n * n, n * m);
    for (Eigen::Index c = 0; c < m; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const Eigen::Index col = c * n + r;  // index of X(r, c)
            // B X^T: entry (i, r) += B(i, c)
            for (Eigen::Index i = 0; i < n; ++i) op(r * n + i, col) += B(i, c);
            // X B^T: entry (r, j) += B(j, c)
            for (Eigen::Index j = 0; j < n; ++j) op(j * n + r, col) += B(j, c);
        }
    }
    return op;
}

MatrixXd drift_mismatch(const StationaryProblem& p) {
    return p.A * p.sigma + p.sigma * p.A.transpose() + p.B1 * p.B1.transpose();
}

}  // namespace

StationaryProblem::StationaryProblem(MatrixXd a, MatrixXd b, MatrixXd b1, MatrixXd s)
    : A(std::move(a)), B(std::move(b)), B1(std::move(b1)), sigma(std::move(s)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("StationaryProblem: A must be square");
    if (B.rows() != A.rows() || B1.rows() != A.rows() || sigma.rows() != A.rows() ||
        sigma.rows() != sigma.cols())
        throw std::invalid_argument("StationaryProblem: dimension mismatch");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::domain_error("StationaryProblem: sigma not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sigma + sigma.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::domain_error("StationaryProblem: sigma not positive definite");
}

FeasibilityReport check_feasibility(const StationaryProblem& prob) {
    const auto n = prob.A.rows();
    const auto m = prob.B.cols();
    const MatrixXd mismatch = drift_mismatch(prob);
    const MatrixXd op = constraint_operator(prob.B);
    const VectorXd rhs = Eigen::Map<const VectorXd>(mismatch.data(), n * n);

    // Minimum-norm least squares; rank decided by the decomposition.
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(op);
    const VectorXd x = cod.solve(rhs);

    FeasibilityReport rep;
    rep.X = Eigen::Map<const MatrixXd>(x.data(), n, m);
    rep.residual = (rhs - op * x).norm();
    rep.threshold = 1e-8 * (1.0 + mismatch.norm());
    rep.feasible = rep.residual <= rep.threshold;
    return rep;
}

StationaryGain optimal_stationary_gain(const StationaryProblem& prob) {
    FeasibilityReport rep = check_feasibility(prob);
    if (!rep.feasible)
        throw InfeasibleStationaryError(
            "optimal_stationary_gain: target covariance cannot be maintained "
            "(residual " +
                std::to_string(rep.residual) + ")",
            rep);

    const auto n = prob.A.rows();
    const auto m = prob.B.cols();
    const MatrixXd op = constraint_operator(prob.B);
    const MatrixXd mismatch = drift_mismatch(prob);
    const VectorXd rhs = Eigen::Map<const VectorXd>(mismatch.data(), n * n);

    // minimize vec(X)^T (I kron Sigma^{-1}) vec(X)  s.t.  op vec(X) = rhs
    const MatrixXd sigma_inv =
        Eigen::LLT<MatrixXd>(prob.sigma).solve(MatrixXd::Identity(n, n));
    MatrixXd quad = MatrixXd::Zero(n * m, n * m);
    for (Eigen::Index c = 0; c < m; ++c)
        quad.block(c * n, c * n, n, n) = sigma_inv;

    const Eigen::Index nx = n * m;
    const Eigen::Index nc = n * n;
    MatrixXd kkt = MatrixXd::Zero(nx + nc, nx + nc);
    kkt.topLeftCorner(nx, nx) = 2.0 * quad;
    kkt.topRightCorner(nx, nc) = op.transpose();
    kkt.bottomLeftCorner(nc, nx) = op;
    VectorXd kkt_rhs = VectorXd::Zero(nx + nc);
    kkt_rhs.tail(nc) = rhs;

    // The multiplier block may be rank-deficient when the constraint operator
    // is not surjective; take the minimum-norm solution and flag it.
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(kkt);
    const VectorXd sol = cod.solve(kkt_rhs);

    StationaryGain out;
    out.kkt_rank = static_cast<int>(cod.rank());
    out.degenerate = cod.rank() < kkt.rows();
    const MatrixXd X = Eigen::Map<const MatrixXd>(sol.data(), n, m);
    out.K = X.transpose() * sigma_inv;  // K = X^T Sigma^{-1}
    out.power = (out.K * prob.sigma * out.K.transpose()).trace();

    const MatrixXd acl = prob.A - prob.B * out.K;
    out.lyapunov_residual =
        (acl * prob.sigma + prob.sigma * acl.transpose() + prob.B1 * prob.B1.transpose())
            .norm();

    Eigen::EigenSolver<MatrixXd> es(acl);
    out.closed_loop_eig_real = es.eigenvalues().real();
    out.stable = (out.closed_loop_eig_real.array() < 0.0).all();
    return out;
}

MatrixXd solve_continuous_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
    const auto n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("solve_continuous_lyapunov: dimension mismatch");
    const MatrixXd eye = MatrixXd::Identity(n, n);
    // vec(A X + X A^T) = (I kron A + A kron I) vec(X), column-major vec
    MatrixXd op = MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) op.block(j * n, j * n, n, n) += A;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            op.block(j * n, i * n, n, n) += A(j, i) * eye;
    const VectorXd rhs = -Eigen::Map<const VectorXd>(Q.data(), n * n);
    Eigen::FullPivLU<MatrixXd> lu(op);
    if (!lu.isInvertible())
        throw std::domain_error("solve_continuous_lyapunov: singular Lyapunov operator");
    const VectorXd x = lu.solve(rhs);
    const MatrixXd X = Eigen::Map<const MatrixXd>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

}  // namespace sbridge
