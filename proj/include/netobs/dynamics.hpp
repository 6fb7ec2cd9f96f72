#pragma once

// Ground-truth state evolution: linear discrete stepping, node measurements,
// mass-action chemistry ODEs, and RK4 integration with discretized process
// noise.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "netobs/digraph.hpp"
#include "netobs/rng.hpp"

namespace netobs {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Draws zero-mean Gaussian vectors with a fixed covariance. The transform is
/// factored once; diagonal covariances take a cheap path.
class GaussianSampler {
public:
    explicit GaussianSampler(const MatrixXd& cov) {
        if (cov.rows() != cov.cols())
            throw std::invalid_argument("GaussianSampler: covariance must be square");
        n_ = static_cast<int>(cov.rows());
        diagonal_ = cov.isDiagonal(1e-300);
        if (diagonal_) {
            sqrt_diag_ = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
        } else {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
            transform_ = es.eigenvectors() *
                         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }
    }

    VectorXd sample(Rng& rng) const {
        VectorXd z(n_);
        for (int i = 0; i < n_; ++i) z(i) = rng.normal();
        if (diagonal_) return sqrt_diag_.cwiseProduct(z);
        return transform_ * z;
    }

    int dim() const { return n_; }

private:
    int n_ = 0;
    bool diagonal_ = false;
    VectorXd sqrt_diag_;
    MatrixXd transform_;
};

struct NoiseSpec {
    MatrixXd process;      // Q: covariance (discrete) or intensity per unit time (continuous)
    MatrixXd measurement;  // R: per-monitored-node covariance

    void validate() const {
        check_symmetric(process, "Q", false);
        check_symmetric(measurement, "R", true);
    }

private:
    static void check_symmetric(const MatrixXd& m, const char* name, bool require_pd) {
        if (m.rows() != m.cols())
            throw std::invalid_argument(std::string("NoiseSpec: ") + name + " not square");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument(std::string("NoiseSpec: ") + name + " not symmetric");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        if (require_pd ? min_eig <= 0.0 : min_eig < -1e-12)
            throw std::invalid_argument(std::string("NoiseSpec: ") + name +
                                        " has inadmissible eigenvalues");
    }
};

/// One step of x_{k+1} = A^T x_k + v_k, v_k ~ N(0, Q).
inline VectorXd step_linear(const MatrixXd& a, const VectorXd& x, const GaussianSampler& q,
                            Rng& rng) {
    if (a.rows() != a.cols() || a.rows() != x.size() || q.dim() != x.size())
        throw std::invalid_argument("step_linear: dimension mismatch");
    VectorXd next = a.transpose() * x + q.sample(rng);
    if (!next.allFinite()) throw DivergenceError("step_linear: non-finite state");
    return next;
}

inline VectorXd step_linear(const MatrixXd& a, const VectorXd& x, const MatrixXd& q,
                            Rng& rng) {
    return step_linear(a, x, GaussianSampler(q), rng);
}

/// Stacks selection rows e_j for the monitored nodes (ascending index).
inline MatrixXd selection_matrix(const std::vector<int>& nodes, int n) {
    MatrixXd c = MatrixXd::Zero(static_cast<int>(nodes.size()), n);
    for (int r = 0; r < static_cast<int>(nodes.size()); ++r) {
        const int j = nodes[r];
        if (j < 1 || j > n) throw std::invalid_argument("selection_matrix: node out of range");
        if (r > 0 && nodes[r] <= nodes[r - 1])
            throw std::invalid_argument("selection_matrix: nodes must be strictly ascending");
        c(r, j - 1) = 1.0;
    }
    return c;
}

/// z = C x + w with w ~ N(0, R); C selects the monitored nodes.
inline VectorXd measure(const VectorXd& x, const std::vector<int>& nodes,
                        const GaussianSampler& r, Rng& rng) {
    if (nodes.empty()) throw std::invalid_argument("measure: empty monitor set");
    if (r.dim() != static_cast<int>(nodes.size()))
        throw std::invalid_argument("measure: R dimension mismatch");
    VectorXd z(static_cast<int>(nodes.size()));
    for (int i = 0; i < z.size(); ++i) {
        const int j = nodes[i];
        if (j < 1 || j > x.size()) throw std::invalid_argument("measure: node out of range");
        z(i) = x(j - 1);
    }
    return z + r.sample(rng);
}

inline VectorXd measure(const VectorXd& x, const std::vector<int>& nodes, const MatrixXd& r,
                        Rng& rng) {
    return measure(x, nodes, GaussianSampler(r), rng);
}

// ---------------------------------------------------------------------------
// Mass-action chemistry benchmark: 11 species, 6 elementary reactions.

struct ChemParams {
    std::array<double, 6> k{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    VectorXd x0 = VectorXd::Ones(11);

    void validate() const {
        for (double ki : k)
            if (!(ki > 0.0)) throw std::invalid_argument("ChemParams: rate constants must be > 0");
        if (x0.size() != 11 || (x0.array() < 0.0).any())
            throw std::invalid_argument("ChemParams: x0 must be 11 nonnegative concentrations");
    }
};

inline VectorXd chem_derivatives(const VectorXd& x, const ChemParams& p) {
    if (x.size() != 11) throw std::invalid_argument("chem_derivatives: state must be 11-dim");
    const double k1 = p.k[0], k2 = p.k[1], k3 = p.k[2], k4 = p.k[3], k5 = p.k[4],
                 k6 = p.k[5];
    const double r1 = k1 * x(0) * x(1) * x(2);
    const double r46 = k4 * x(7) * x(8);
    const double r6 = k6 * x(9) * x(10);
    VectorXd d(11);
    d(0) = -r1;
    d(1) = -r1;
    d(2) = -r1;
    d(3) = r1 - k2 * x(3) + k3 * x(4);
    d(4) = k2 * x(3) - k3 * x(4);
    d(5) = r1;
    d(6) = r46 - k5 * x(6) + r6;
    d(7) = -r46 + k5 * x(6) + r6;
    d(8) = -r46 + k5 * x(6);
    d(9) = r1 - r6;
    d(10) = -r6;
    return d;
}

inline MatrixXd chem_jacobian(const VectorXd& x, const ChemParams& p) {
    if (x.size() != 11) throw std::invalid_argument("chem_jacobian: state must be 11-dim");
    const double k1 = p.k[0], k2 = p.k[1], k3 = p.k[2], k4 = p.k[3], k5 = p.k[4],
                 k6 = p.k[5];
    const double d1 = k1 * x(1) * x(2);  // d r1 / d x1
    const double d2 = k1 * x(0) * x(2);
    const double d3 = k1 * x(0) * x(1);
    MatrixXd j = MatrixXd::Zero(11, 11);
    for (int row : {0, 1, 2}) {
        j(row, 0) = -d1;
        j(row, 1) = -d2;
        j(row, 2) = -d3;
    }
    j(3, 0) = d1;
    j(3, 1) = d2;
    j(3, 2) = d3;
    j(3, 3) = -k2;
    j(3, 4) = k3;
    j(4, 3) = k2;
    j(4, 4) = -k3;
    j(5, 0) = d1;
    j(5, 1) = d2;
    j(5, 2) = d3;
    j(6, 6) = -k5;
    j(6, 7) = k4 * x(8);
    j(6, 8) = k4 * x(7);
    j(6, 9) = k6 * x(10);
    j(6, 10) = k6 * x(9);
    j(7, 6) = k5;
    j(7, 7) = -k4 * x(8);
    j(7, 8) = -k4 * x(7);
    j(7, 9) = k6 * x(10);
    j(7, 10) = k6 * x(9);
    j(8, 6) = k5;
    j(8, 7) = -k4 * x(8);
    j(8, 8) = -k4 * x(7);
    j(9, 0) = d1;
    j(9, 1) = d2;
    j(9, 2) = d3;
    j(9, 9) = -k6 * x(10);
    j(9, 10) = -k6 * x(9);
    j(10, 9) = -k6 * x(10);
    j(10, 10) = -k6 * x(9);
    return j;
}

/// Dependency digraph of the chemistry benchmark: edge i -> j iff x_i appears
/// in the rate equation of x_j. Weights are structural (1).
inline Digraph chem_digraph() {
    ChemParams p;
    const MatrixXd j = chem_jacobian(VectorXd::Ones(11), p);
    Digraph g(11);
    for (int col = 0; col < 11; ++col)
        for (int row = 0; row < 11; ++row)
            if (j(row, col) != 0.0) g.add_edge(col + 1, row + 1, 1.0);
    return g;
}

using DerivFn = std::function<VectorXd(const VectorXd&)>;

/// Classical 4th-order Runge-Kutta step.
inline VectorXd rk4_step(const DerivFn& f, const VectorXd& x, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
    const VectorXd k1 = f(x);
    const VectorXd k2 = f(x + 0.5 * dt * k1);
    const VectorXd k3 = f(x + 0.5 * dt * k2);
    const VectorXd k4 = f(x + dt * k3);
    VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw DivergenceError("rk4_step: non-finite state");
    return next;
}

struct ContinuousModel {
    DerivFn deriv;
    std::function<MatrixXd(const VectorXd&)> jacobian;
    MatrixXd noise_intensity;  // Q per unit time
    double dt = 0.025;         // integrator step
};

inline ContinuousModel chem_model(const ChemParams& params, const MatrixXd& q, double dt) {
    ChemParams p = params;
    p.validate();
    return {[p](const VectorXd& x) { return chem_derivatives(x, p); },
            [p](const VectorXd& x) { return chem_jacobian(x, p); }, q, dt};
}

/// Integrates the drift with RK4 at step dt and injects N(0, Q*dt) after each
/// step. Returns states at sampling instants, starting with (0, x0).
inline std::vector<std::pair<double, VectorXd>> simulate_continuous(
    const ContinuousModel& model, const VectorXd& x0, double t_end, double sample_rate,
    Rng& rng) {
    if (!(sample_rate > 0.0))
        throw std::invalid_argument("simulate_continuous: sample_rate must be > 0");
    const double interval = 1.0 / sample_rate;
    const double steps_exact = interval / model.dt;
    const int steps = static_cast<int>(std::lround(steps_exact));
    if (steps < 1 || std::abs(steps_exact - steps) > 1e-9)
        throw std::invalid_argument("simulate_continuous: dt must divide the sampling interval");

    const GaussianSampler noise(model.noise_intensity * model.dt);
    const int samples = static_cast<int>(std::lround(t_end * sample_rate));

    std::vector<std::pair<double, VectorXd>> out;
    out.reserve(samples + 1);
    out.emplace_back(0.0, x0);
    VectorXd x = x0;
    for (int s = 1; s <= samples; ++s) {
        for (int i = 0; i < steps; ++i) {
            x = rk4_step(model.deriv, x, model.dt);
            x += noise.sample(rng);
        }
        if (!x.allFinite()) throw DivergenceError("simulate_continuous: non-finite state");
        out.emplace_back(s * interval, x);
    }
    return out;
}

}  // namespace netobs
