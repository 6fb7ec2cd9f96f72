#pragma once

// Gaussian belief propagation: Kalman predict/update (Joseph form), hybrid
// EKF prediction with Riccati covariance integration, entropic-state and
// mutual-information measures, and divergence detection.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netobs/dynamics.hpp"

namespace netobs {

struct GaussianBelief {
    VectorXd mean;
    MatrixXd cov;
    long cycle = 0;

    void symmetrize() { cov = 0.5 * (cov + cov.transpose()).eval(); }
};

enum class EntropyMode { Trace, LogDet };

struct EntropicState {
    double value = 0.0;
    EntropyMode mode = EntropyMode::Trace;
    bool singular = false;
};

/// Time update: mean <- A^T mean, cov <- A^T cov A + Q.
inline GaussianBelief kf_predict(const GaussianBelief& b, const MatrixXd& a,
                                 const MatrixXd& q) {
    const auto n = b.mean.size();
    if (a.rows() != n || a.cols() != n || q.rows() != n || q.cols() != n)
        throw std::invalid_argument("kf_predict: dimension mismatch");
    GaussianBelief out;
    out.mean = a.transpose() * b.mean;
    out.cov = a.transpose() * b.cov * a + q;
    out.cycle = b.cycle;
    out.symmetrize();
    if (!out.mean.allFinite() || !out.cov.allFinite())
        throw DivergenceError("kf_predict: non-finite belief");
    return out;
}

/// Covariance-only Kalman measurement update in Joseph form. Returns the gain
/// through `gain_out` when requested.
inline MatrixXd kf_update_cov(const MatrixXd& p, const MatrixXd& c, const MatrixXd& r,
                              MatrixXd* gain_out = nullptr) {
    const MatrixXd pct = p * c.transpose();
    const MatrixXd s = c * pct + r;
    Eigen::LDLT<MatrixXd> ldlt(s);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 0.0) {
        throw std::runtime_error(
            "kf_update: innovation covariance not invertible (min pivot " +
            std::to_string(ldlt.vectorD().minCoeff()) + ")");
    }
    const MatrixXd k = ldlt.solve(pct.transpose()).transpose();
    const MatrixXd ikc = MatrixXd::Identity(p.rows(), p.cols()) - k * c;
    MatrixXd post = ikc * p * ikc.transpose() + k * r * k.transpose();
    post = 0.5 * (post + post.transpose()).eval();
    if (gain_out) *gain_out = k;
    return post;
}

/// Measurement update with the selection matrix induced by the monitored
/// nodes (ascending order).
inline GaussianBelief kf_update(const GaussianBelief& b, const std::vector<int>& nodes,
                                const MatrixXd& r, const VectorXd& z) {
    if (z.size() != static_cast<Eigen::Index>(nodes.size()))
        throw std::invalid_argument("kf_update: measurement dimension mismatch");
    const MatrixXd c = selection_matrix(nodes, static_cast<int>(b.mean.size()));
    MatrixXd gain;
    GaussianBelief out;
    out.cov = kf_update_cov(b.cov, c, r, &gain);
    out.mean = b.mean + gain * (z - c * b.mean);
    out.cycle = b.cycle + 1;
    if (!out.mean.allFinite() || !out.cov.allFinite())
        throw DivergenceError("kf_update: non-finite belief");
    return out;
}

/// Hybrid EKF time update over `span` seconds: the mean follows the drift via
/// RK4 and the covariance follows Pdot = F P + P F^T + Q with F evaluated at
/// the current mean, integrated jointly with the same RK4 steps.
inline GaussianBelief hekf_predict(const GaussianBelief& b, const ContinuousModel& model,
                                   double span, double trace_limit = 1e12) {
    if (!(span > 0.0)) throw std::invalid_argument("hekf_predict: span must be > 0");
    const double steps_exact = span / model.dt;
    const int steps = static_cast<int>(std::lround(steps_exact));
    if (steps < 1 || std::abs(steps_exact - steps) > 1e-9)
        throw std::invalid_argument("hekf_predict: dt must divide the span");

    const auto n = b.mean.size();
    VectorXd x = b.mean;
    MatrixXd p = b.cov;
    auto joint_deriv = [&](const VectorXd& xs, const MatrixXd& ps)
        -> std::pair<VectorXd, MatrixXd> {
        const MatrixXd f = model.jacobian(xs);
        return {model.deriv(xs),
                (f * ps + ps * f.transpose() + model.noise_intensity).eval()};
    };
    const double dt = model.dt;
    for (int i = 0; i < steps; ++i) {
        const auto [kx1, kp1] = joint_deriv(x, p);
        const auto [kx2, kp2] = joint_deriv(x + 0.5 * dt * kx1, p + 0.5 * dt * kp1);
        const auto [kx3, kp3] = joint_deriv(x + 0.5 * dt * kx2, p + 0.5 * dt * kp2);
        const auto [kx4, kp4] = joint_deriv(x + dt * kx3, p + dt * kp3);
        x += (dt / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
        p += (dt / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
        p = 0.5 * (p + p.transpose()).eval();
        if (!x.allFinite() || !p.allFinite() || p.trace() > trace_limit)
            throw DivergenceError("hekf_predict: covariance overflow");
    }
    GaussianBelief out;
    out.mean = std::move(x);
    out.cov = std::move(p);
    out.cycle = b.cycle;
    return out;
}

/// Log-determinant of a symmetric PSD matrix via LDLT. Returns -inf for
/// singular (or numerically non-positive) matrices.
inline double logdet_psd(const MatrixXd& p) {
    Eigen::LDLT<MatrixXd> ldlt(p);
    if (ldlt.info() != Eigen::Success)
        return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ldlt.vectorD().size(); ++i) {
        const double d = ldlt.vectorD()(i);
        if (d <= 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log(d);
    }
    return acc;
}

inline EntropicState entropic_state(const MatrixXd& cov, EntropyMode mode) {
    EntropicState h;
    h.mode = mode;
    if (mode == EntropyMode::Trace) {
        h.value = cov.trace();
        return h;
    }
    const auto n = static_cast<double>(cov.rows());
    const double ld = logdet_psd(cov);
    if (!std::isfinite(ld)) {
        h.value = -std::numeric_limits<double>::infinity();
        h.singular = true;
        return h;
    }
    h.value = 0.5 * (ld + n * std::log(2.0 * M_PI * M_E));
    return h;
}

inline EntropicState entropic_state(const GaussianBelief& b, EntropyMode mode) {
    return entropic_state(b.cov, mode);
}

/// Gaussian mutual information between the state under the prior and under
/// the posterior: 0.5 * (logdet(prior) - logdet(post)).
inline double mutual_information(const MatrixXd& prior_cov, const MatrixXd& post_cov) {
    const double lp = logdet_psd(prior_cov);
    const double lq = logdet_psd(post_cov);
    if (!std::isfinite(lp) || !std::isfinite(lq))
        throw std::runtime_error("mutual_information: covariance not positive definite");
    return 0.5 * (lp - lq);
}

/// True iff the belief covariance is non-finite or its trace exceeds the
/// crash threshold.
inline bool divergence_check(const GaussianBelief& b, double trace_limit = 1e12) {
    if (!b.cov.allFinite() || !b.mean.allFinite()) return true;
    return b.cov.trace() > trace_limit;
}

}  // namespace netobs
