#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "netobs/dynamics.hpp"
#include "netobs/harness.hpp"

using namespace netobs;

TEST_CASE("step_linear follows A^T x") {
    Rng rng(1);
    const MatrixXd zero_q = MatrixXd::Zero(3, 3);
    VectorXd x(3);
    x << 1, 2, 3;
    CHECK((step_linear(MatrixXd::Identity(3, 3), x, zero_q, rng) - x).norm() == 0.0);

    // Column sums of the published matrix for an all-ones state.
    VectorXd ones = VectorXd::Ones(7);
    VectorXd next = step_linear(example1_matrix(), ones, MatrixXd::Zero(7, 7), rng);
    VectorXd expected(7);
    expected << 1.2, 1.0, -0.3, 0.9, -0.5, 0.4, 1.7;
    CHECK((next - expected).norm() < 1e-12);
}

TEST_CASE("process noise has the requested covariance") {
    Rng rng(2);
    const double sigma2 = 0.3;
    const MatrixXd a = MatrixXd::Identity(2, 2);
    const MatrixXd q = sigma2 * MatrixXd::Identity(2, 2);
    const GaussianSampler sampler(q);
    const VectorXd x = VectorXd::Zero(2);
    MatrixXd acc = MatrixXd::Zero(2, 2);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        VectorXd v = step_linear(a, x, sampler, rng);
        acc += v * v.transpose();
    }
    acc /= draws;
    CHECK(std::abs(acc(0, 0) - sigma2) < 0.05 * sigma2);
    CHECK(std::abs(acc(1, 1) - sigma2) < 0.05 * sigma2);
    CHECK(std::abs(acc(0, 1)) < 0.05 * sigma2);
}

TEST_CASE("measure selects monitored nodes") {
    Rng rng(3);
    VectorXd x(3);
    x << 5, 6, 7;
    const MatrixXd r0_1 = MatrixXd::Zero(1, 1);
    const MatrixXd r0_2 = MatrixXd::Zero(2, 2);
    CHECK(measure(x, {3}, r0_1, rng)(0) == 7.0);
    VectorXd z = measure(x, {1, 3}, r0_2, rng);
    CHECK(z(0) == 5.0);
    CHECK(z(1) == 7.0);
    CHECK_THROWS_AS(measure(x, {}, r0_1, rng), std::invalid_argument);

    const double sigma2 = 0.02;
    MatrixXd r(1, 1);
    r << sigma2;
    const GaussianSampler sampler(r);
    double sum = 0.0, sum2 = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const double v = measure(x, {2}, sampler, rng)(0);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    CHECK(std::abs(var - sigma2) < 0.05 * sigma2);
}

TEST_CASE("chemistry derivatives match the published balance equations") {
    ChemParams p;  // all rates 1
    VectorXd d = chem_derivatives(VectorXd::Ones(11), p);
    VectorXd expected(11);
    expected << -1, -1, -1, 1, 0, 1, 1, 1, 0, 0, -1;
    CHECK((d - expected).norm() < 1e-14);

    CHECK(chem_derivatives(VectorXd::Zero(11), p).norm() == 0.0);

    // Identical right-hand sides: species 1, 2, 3 move together.
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd x(11);
        for (int i = 0; i < 11; ++i) x(i) = rng.uniform(0.0, 2.0);
        VectorXd dx = chem_derivatives(x, p);
        CHECK(dx(0) == dx(1));
        CHECK(dx(0) == dx(2));
        CHECK(dx(3) + dx(4) == Catch::Approx(-dx(0)).margin(1e-14));
    }
}

TEST_CASE("chemistry jacobian matches central finite differences") {
    ChemParams p;
    p.k = {0.7, 1.3, 0.4, 2.1, 0.9, 1.6};
    Rng rng(7);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        VectorXd x(11);
        for (int i = 0; i < 11; ++i) x(i) = rng.uniform(0.0, 2.0);
        const MatrixXd j = chem_jacobian(x, p);
        for (int col = 0; col < 11; ++col) {
            VectorXd xp = x, xm = x;
            xp(col) += h;
            xm(col) -= h;
            VectorXd fd = (chem_derivatives(xp, p) - chem_derivatives(xm, p)) / (2 * h);
            for (int row = 0; row < 11; ++row) {
                const double scale = std::max(1.0, std::abs(j(row, col)));
                CHECK(std::abs(j(row, col) - fd(row)) < 1e-5 * scale);
            }
        }
        CHECK(j.col(5).norm() == 0.0);  // x6 feeds nothing
    }
}

TEST_CASE("rk4 accuracy on exponential decay") {
    const DerivFn decay = [](const VectorXd& x) { return (-x).eval(); };
    VectorXd x0(1);
    x0 << 1.0;
    VectorXd x1 = rk4_step(decay, x0, 0.1);
    CHECK(x1(0) == Catch::Approx(std::exp(-0.1)).margin(1e-7));

    const DerivFn still = [](const VectorXd& x) { return VectorXd::Zero(x.size()).eval(); };
    CHECK(rk4_step(still, x0, 0.5)(0) == 1.0);

    // Order-4 convergence: halving dt cuts the global error ~16x.
    auto global_error = [&](double dt) {
        VectorXd x = x0;
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) x = rk4_step(decay, x, dt);
        return std::abs(x(0) - std::exp(-1.0));
    };
    const double e1 = global_error(0.1);
    const double e2 = global_error(0.05);
    const double ratio = e1 / e2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("continuous simulation sampling grid") {
    ChemParams p;
    ContinuousModel model = chem_model(p, MatrixXd::Zero(11, 11), 0.025);
    Rng rng(9);
    auto traj = simulate_continuous(model, p.x0, 20.0, 4.0, rng);
    CHECK(traj.size() == 81);  // t=0 plus 80 samples
    CHECK(traj.front().first == 0.0);
    CHECK(traj.back().first == Catch::Approx(20.0));

    // Noise-free chemistry: x1 decreases, x6 increases.
    for (std::size_t i = 1; i < traj.size(); ++i) {
        CHECK(traj[i].second(0) < traj[i - 1].second(0));
        CHECK(traj[i].second(5) > traj[i - 1].second(5));
    }

    ContinuousModel bad = model;
    bad.dt = 0.03;  // does not divide the 0.25 s sampling interval
    CHECK_THROWS_AS(simulate_continuous(bad, p.x0, 1.0, 4.0, rng), std::invalid_argument);
}

TEST_CASE("noise-free stoichiometric invariants hold over 20 s") {
    ChemParams p;
    p.k = {1.0, 0.8, 1.2, 0.9, 1.1, 1.0};
    VectorXd x0(11);
    x0 << 1.0, 1.2, 0.9, 0.1, 0.2, 0.0, 0.5, 0.6, 0.7, 0.8, 0.9;
    p.x0 = x0;
    ContinuousModel model = chem_model(p, MatrixXd::Zero(11, 11), 0.025);
    Rng rng(11);
    auto traj = simulate_continuous(model, x0, 20.0, 4.0, rng);
    const VectorXd& a = traj.front().second;
    for (const auto& [t, x] : traj) {
        CHECK(x(0) - x(1) == Catch::Approx(a(0) - a(1)).margin(1e-6));
        CHECK(x(0) - x(2) == Catch::Approx(a(0) - a(2)).margin(1e-6));
        CHECK(x(0) + x(3) + x(4) == Catch::Approx(a(0) + a(3) + a(4)).margin(1e-6));
    }
}

TEST_CASE("noise spec validation") {
    NoiseSpec ok{MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1)};
    CHECK_NOTHROW(ok.validate());

    MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS((NoiseSpec{asym, MatrixXd::Identity(1, 1)}.validate()),
                    std::invalid_argument);
    MatrixXd neg = -MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS((NoiseSpec{neg, MatrixXd::Identity(1, 1)}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((NoiseSpec{MatrixXd::Identity(2, 2), MatrixXd::Zero(1, 1)}.validate()),
                    std::invalid_argument);
}

TEST_CASE("deterministic under a fixed stream") {
    ChemParams p;
    ContinuousModel model = chem_model(p, 1e-4 * MatrixXd::Identity(11, 11), 0.025);
    Rng r1(13), r2(13);
    auto a = simulate_continuous(model, p.x0, 2.0, 4.0, r1);
    auto b = simulate_continuous(model, p.x0, 2.0, 4.0, r2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK((a[i].second - b[i].second).norm() == 0.0);
}
