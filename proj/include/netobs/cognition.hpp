#pragma once

// Cognitive controller: monitor-action library, entropic reward, value-to-go
// learning, measurement-free predictive planning through the feedforward
// link, and epsilon-greedy action selection.

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "netobs/belief.hpp"
#include "netobs/dynamics.hpp"
#include "netobs/rng.hpp"

namespace netobs {

struct MonitorAction {
    std::vector<int> nodes;  // sorted ascending
    int id = 0;              // 1-based dense index into the library
};

enum class ActionMode { Select, Dismiss };

/// Select mode: all cardinality-subsets of the accessible set. Dismiss mode:
/// all (m - cardinality)-subsets, i.e. complements of dismissed sets. Actions
/// are ordered lexicographically by node indices; ids are 1-based.
inline std::vector<MonitorAction> build_action_library(std::vector<int> accessible,
                                                       ActionMode mode, int cardinality) {
    std::sort(accessible.begin(), accessible.end());
    accessible.erase(std::unique(accessible.begin(), accessible.end()), accessible.end());
    const int m = static_cast<int>(accessible.size());
    if (cardinality < 1 || cardinality > m)
        throw std::invalid_argument("build_action_library: bad cardinality");
    const int size = mode == ActionMode::Select ? cardinality : m - cardinality;
    if (size < 1)
        throw std::invalid_argument("build_action_library: dismissal leaves no monitors");

    std::vector<MonitorAction> library;
    std::vector<int> pick(size);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        MonitorAction a;
        a.nodes.reserve(size);
        for (int i : pick) a.nodes.push_back(accessible[i]);
        a.id = static_cast<int>(library.size()) + 1;
        library.push_back(std::move(a));
        // next combination in lexicographic order
        int i = size - 1;
        while (i >= 0 && pick[i] == m - size + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
    return library;
}

struct ValueTable {
    std::vector<double> values;  // indexed by action id - 1, initialized to zero
    double learn_rate = 0.2;
    double discount = 0.8;
    double explore = 0.05;
    double explore_decay = 0.99;

    explicit ValueTable(std::size_t actions = 0) : values(actions, 0.0) {}

    double& at(int action_id) { return values.at(action_id - 1); }
    double at(int action_id) const { return values.at(action_id - 1); }
};

/// Relative entropy reduction: positive iff the entropic state decreased.
inline double entropic_reward(double h_prev, double h_cur) {
    if (!(h_prev > 0.0)) throw std::invalid_argument("entropic_reward: h_prev must be > 0");
    return (h_prev - h_cur) / h_prev;
}

/// Reward with the log-det fallback: the ratio form needs a positive previous
/// entropic state; log-det entropies can be negative, in which case the raw
/// reduction is used instead.
inline double guarded_reward(double h_prev, double h_cur) {
    return h_prev > 0.0 ? entropic_reward(h_prev, h_cur) : h_prev - h_cur;
}

/// Value-to-go update from an executed action's reward:
/// v[a] <- (1-alpha) v[a] + alpha (r + discount * max_a' v[a']).
inline void learn_update(ValueTable& vt, const MonitorAction& a, double reward) {
    const double best = vt.values.empty()
                            ? 0.0
                            : *std::max_element(vt.values.begin(), vt.values.end());
    double& v = vt.at(a.id);
    v = (1.0 - vt.learn_rate) * v + vt.learn_rate * (reward + vt.discount * best);
}

struct PlanSpec {
    int num_hypothesized = 30;
    int depth = 2;
};

struct LinearPlanModel {
    MatrixXd a;
    MatrixXd q;
};

struct ContinuousPlanModel {
    const ContinuousModel* model = nullptr;
    double span = 0.0;
};

using PlanDynamics = std::variant<LinearPlanModel, ContinuousPlanModel>;

namespace detail {

inline MatrixXd action_noise(const VectorXd& meas_var, const std::vector<int>& nodes) {
    VectorXd d(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) d(static_cast<Eigen::Index>(i)) =
        meas_var(nodes[i] - 1);
    return d.asDiagonal();
}

/// Hypothesized entropic-state sequence for one action: depth cycles of
/// {predict; covariance-only update}, no real measurements.
inline std::vector<double> hypothesize_generic(const GaussianBelief& belief,
                                               const MonitorAction& action,
                                               const PlanDynamics& dyn,
                                               const VectorXd& meas_var, EntropyMode mode,
                                               int depth) {
    GaussianBelief b = belief;
    const int n = static_cast<int>(b.mean.size());
    const MatrixXd c = selection_matrix(action.nodes, n);
    const MatrixXd r = action_noise(meas_var, action.nodes);
    std::vector<double> h;
    h.reserve(depth);
    for (int d = 0; d < depth; ++d) {
        if (const auto* lin = std::get_if<LinearPlanModel>(&dyn)) {
            b = kf_predict(b, lin->a, lin->q);
        } else {
            const auto& cont = std::get<ContinuousPlanModel>(dyn);
            b = hekf_predict(b, *cont.model, cont.span);
        }
        b.cov = kf_update_cov(b.cov, c, r);
        h.push_back(entropic_state(b.cov, mode).value);
    }
    return h;
}

/// Fast path for linear dynamics with trace entropy. The action-independent
/// bases B_d = (A^T)^d-propagation of the current covariance are shared, and
/// each action carries only low-rank selection corrections, so the cost per
/// action is O(n^2 q depth) instead of O(n^3 depth).
class LinearTracePlanner {
public:
    LinearTracePlanner(const MatrixXd& cov, const MatrixXd& a, const MatrixXd& q,
                       int depth)
        : a_(a), depth_(depth) {
        bases_.reserve(depth);
        MatrixXd b = a.transpose() * cov * a + q;
        bases_.push_back(b);
        for (int d = 1; d < depth; ++d) {
            b = a.transpose() * bases_.back() * a + q;
            bases_.push_back(b);
        }
    }

    std::vector<double> hypothesize(const MonitorAction& action,
                                    const VectorXd& meas_var) const {
        const int q = static_cast<int>(action.nodes.size());
        std::vector<MatrixXd> vs;  // n x q correction factors
        std::vector<MatrixXd> ms;  // q x q middle terms (S^-1)
        std::vector<double> h;
        h.reserve(depth_);
        for (int d = 0; d < depth_; ++d) {
            const MatrixXd& base = bases_[d];
            // Columns of the implicit predicted covariance at the monitors.
            MatrixXd u(base.rows(), q);
            for (int c = 0; c < q; ++c) u.col(c) = base.col(action.nodes[c] - 1);
            for (std::size_t j = 0; j < vs.size(); ++j) {
                MatrixXd vm = vs[j] * ms[j];  // n x q
                MatrixXd vsel(q, q);
                for (int c = 0; c < q; ++c) vsel.row(c) = vs[j].row(action.nodes[c] - 1);
                u.noalias() -= vm * vsel.transpose();
            }
            MatrixXd s(q, q);
            for (int c = 0; c < q; ++c) s.row(c) = u.row(action.nodes[c] - 1);
            for (int c = 0; c < q; ++c) s(c, c) += meas_var(action.nodes[c] - 1);
            s = 0.5 * (s + s.transpose()).eval();
            Eigen::LDLT<MatrixXd> ldlt(s);
            if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
                throw std::runtime_error("plan: innovation covariance not invertible");
            const MatrixXd sinv = ldlt.solve(MatrixXd::Identity(q, q));

            double tr_minus = base.trace();
            for (std::size_t j = 0; j < vs.size(); ++j)
                tr_minus -= ((vs[j] * ms[j]).cwiseProduct(vs[j])).sum();
            const double tr_plus = tr_minus - ((u * sinv).cwiseProduct(u)).sum();
            h.push_back(tr_plus);

            vs.push_back(u);
            ms.push_back(sinv);
            if (d + 1 < depth_)
                for (auto& v : vs) v = (a_.transpose() * v).eval();
        }
        return h;
    }

private:
    const MatrixXd& a_;
    int depth_;
    std::vector<MatrixXd> bases_;
};

}  // namespace detail

/// Predictive planning: samples hypothesized actions uniformly without
/// replacement (always including the currently executed action when given),
/// rolls each forward `depth` cycles through the measurement-free covariance
/// recursion, and folds the discounted hypothesized rewards into the value
/// table. The caller's belief is never mutated.
inline void plan(const GaussianBelief& belief, ValueTable& vt,
                 const std::vector<MonitorAction>& library, const PlanSpec& spec,
                 const PlanDynamics& dyn, const VectorXd& meas_var, EntropyMode mode,
                 Rng& rng, int current_action_id = 0) {
    const int lib = static_cast<int>(library.size());
    if (spec.num_hypothesized < 1 || spec.num_hypothesized > lib)
        throw std::invalid_argument("plan: num_hypothesized out of range");
    if (spec.depth < 1) throw std::invalid_argument("plan: depth must be >= 1");

    // Sample hypothesized action indices (0-based), incumbent first.
    std::vector<int> pool(lib);
    std::iota(pool.begin(), pool.end(), 0);
    int fixed = 0;
    if (current_action_id >= 1 && current_action_id <= lib) {
        std::swap(pool[0], pool[current_action_id - 1]);
        fixed = 1;
    }
    for (int i = fixed; i < spec.num_hypothesized; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(lib - i));
        std::swap(pool[i], pool[j]);
    }

    const double h0 = entropic_state(belief.cov, mode).value;
    const auto* lin = std::get_if<LinearPlanModel>(&dyn);
    const bool fast = lin != nullptr && mode == EntropyMode::Trace;
    std::optional<detail::LinearTracePlanner> planner;
    if (fast) planner.emplace(belief.cov, lin->a, lin->q, spec.depth);

    for (int i = 0; i < spec.num_hypothesized; ++i) {
        const MonitorAction& action = library[pool[i]];
        const std::vector<double> h =
            fast ? planner->hypothesize(action, meas_var)
                 : detail::hypothesize_generic(belief, action, dyn, meas_var, mode,
                                               spec.depth);
        double acc = 0.0;
        double weight = 1.0;
        double h_prev = h0;
        for (double hd : h) {
            acc += weight * guarded_reward(h_prev, hd);
            weight *= vt.discount;
            h_prev = hd;
        }
        double& v = vt.at(action.id);
        v = (1.0 - vt.learn_rate) * v + vt.learn_rate * acc;
    }
}

/// Epsilon-greedy selection: with probability `explore` a uniform random
/// action, otherwise the argmax of the value table (ties to the lowest id).
/// The exploration rate decays after every call.
inline const MonitorAction& select_action(ValueTable& vt,
                                          const std::vector<MonitorAction>& library,
                                          Rng& rng) {
    if (library.empty()) throw std::invalid_argument("select_action: empty library");
    std::size_t pick;
    if (rng.uniform() < vt.explore) {
        pick = static_cast<std::size_t>(rng.uniform_int(library.size()));
    } else {
        pick = 0;
        for (std::size_t i = 1; i < library.size(); ++i)
            if (vt.values[i] > vt.values[pick]) pick = i;
    }
    vt.explore *= vt.explore_decay;
    return library[pick];
}

}  // namespace netobs
