#pragma once

// Seeded random digraph generation: Erdos-Renyi and directed scale-free
// (three-event preferential attachment), weight assignment, and spectral
// stabilization.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "netobs/digraph.hpp"
#include "netobs/rng.hpp"

namespace netobs {

enum class Topology { Er, ScaleFree };

struct GenSpec {
    Topology topology = Topology::Er;
    int n = 100;
    double p = 0.021;  // ER edge probability
    // Scale-free event probabilities: alpha adds node->existing(in-degree),
    // beta adds edge existing->existing, gamma adds existing(out-degree)->node.
    double alpha = 0.41;
    double beta = 0.54;
    double gamma = 0.05;
    double delta_in = 1.0;
    double delta_out = 1.0;
    double weight_low = -1.0;
    double weight_high = 1.0;
    double spectral_target = 0.95;  // 0 disables scaling
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1) throw std::invalid_argument("GenSpec: n must be >= 1");
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("GenSpec: p must be in [0,1]");
        if (std::abs(alpha + beta + gamma - 1.0) > 1e-9)
            throw std::invalid_argument("GenSpec: alpha+beta+gamma must sum to 1");
        if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
            throw std::invalid_argument("GenSpec: negative event probability");
        if (delta_in < 0.0 || delta_out < 0.0)
            throw std::invalid_argument("GenSpec: attachment offsets must be nonnegative");
        if (!(weight_low < weight_high))
            throw std::invalid_argument("GenSpec: weight_low must be < weight_high");
        if (spectral_target < 0.0)
            throw std::invalid_argument("GenSpec: spectral_target must be >= 0");
    }
};

/// Every ordered pair (i,j), i != j, receives an edge independently with
/// probability p. Weights start at 1.
inline Digraph gen_er(int n, double p, Rng& rng) {
    if (n < 1) throw std::invalid_argument("gen_er: n must be >= 1");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gen_er: p must be in [0,1]");
    Digraph g(n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (i != j && rng.bernoulli(p)) g.add_edge(i, j, 1.0);
    return g;
}

namespace detail {

/// Samples node index (1-based) with probability proportional to
/// degree[v] + offset over v in 1..count.
inline int sample_by_degree(const std::vector<int>& degree, int count, double offset,
                            Rng& rng) {
    double total = 0.0;
    for (int v = 1; v <= count; ++v) total += degree[v] + offset;
    double target = rng.uniform() * total;
    double acc = 0.0;
    for (int v = 1; v <= count; ++v) {
        acc += degree[v] + offset;
        if (target < acc) return v;
    }
    return count;
}

}  // namespace detail

/// Directed scale-free growth from a 2-node seed cycle. Each step adds at most
/// one edge; duplicate or self-loop draws are retried up to 100 times, then
/// the step is skipped. Growth stops once the node count reaches n.
inline Digraph gen_scalefree(int n, double alpha, double beta, double gamma,
                             double delta_in, double delta_out, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_scalefree: n must be >= 2");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-9 || alpha < 0.0 || beta < 0.0 ||
        gamma < 0.0)
        throw std::invalid_argument("gen_scalefree: event probabilities must sum to 1");

    Digraph g(n);
    std::vector<int> indeg(n + 1, 0), outdeg(n + 1, 0);
    int count = 2;
    g.add_edge(1, 2, 1.0);
    g.add_edge(2, 1, 1.0);
    indeg[1] = indeg[2] = outdeg[1] = outdeg[2] = 1;

    while (count < n) {
        const double u = rng.uniform();
        if (u < alpha) {
            // New node with an edge to an existing node.
            const int target = detail::sample_by_degree(indeg, count, delta_in, rng);
            ++count;
            g.add_edge(count, target, 1.0);
            ++outdeg[count];
            ++indeg[target];
        } else if (u < alpha + beta) {
            // Edge between existing nodes.
            bool placed = false;
            for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
                const int src = detail::sample_by_degree(outdeg, count, delta_out, rng);
                const int dst = detail::sample_by_degree(indeg, count, delta_in, rng);
                if (src == dst || g.has_edge(src, dst)) continue;
                g.add_edge(src, dst, 1.0);
                ++outdeg[src];
                ++indeg[dst];
                placed = true;
            }
        } else {
            // New node with an edge from an existing node.
            const int src = detail::sample_by_degree(outdeg, count, delta_out, rng);
            ++count;
            g.add_edge(src, count, 1.0);
            ++outdeg[src];
            ++indeg[count];
        }
    }
    return g;
}

/// Resamples all edge weights i.i.d. uniform on [lo, hi], rejecting the
/// near-zero band |w| < 1e-6 so weights stay valid.
inline Digraph assign_weights(Digraph g, double lo, double hi, Rng& rng) {
    if (!(lo < hi)) throw std::invalid_argument("assign_weights: lo must be < hi");
    g.map_weights([&](int, int, double) {
        double w;
        do {
            w = rng.uniform(lo, hi);
        } while (std::abs(w) < 1e-6);
        return w;
    });
    return g;
}

/// Spectral radius of the transpose incident matrix. Computed from the full
/// eigendecomposition: power-type iterations stall whenever several
/// eigenvalue moduli tie near the top, which random signed weights produce
/// regularly.
inline double spectral_radius(const Digraph& g) {
    if (g.node_count() == 0 || g.edge_count() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(incident_matrix(g).transpose(), false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_radius: eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Scales all weights so the spectral radius of A^T equals spectral_target.
/// Graphs with zero spectral radius (e.g. nilpotent chains) are unchanged.
inline Digraph stabilize(Digraph g, double spectral_target) {
    if (!(spectral_target > 0.0))
        throw std::invalid_argument("stabilize: spectral_target must be > 0");
    const double rho = spectral_radius(g);
    if (rho <= 1e-12) return g;
    g.scale_weights(spectral_target / rho);
    return g;
}

inline Digraph generate(const GenSpec& spec) {
    spec.validate();
    Rng rng(substream_seed(spec.seed, 0));
    Digraph g = spec.topology == Topology::Er
                    ? gen_er(spec.n, spec.p, rng)
                    : gen_scalefree(spec.n, spec.alpha, spec.beta, spec.gamma,
                                    spec.delta_in, spec.delta_out, rng);
    g = assign_weights(std::move(g), spec.weight_low, spec.weight_high, rng);
    if (spec.spectral_target > 0.0) g = stabilize(std::move(g), spec.spectral_target);
    return g;
}

}  // namespace netobs
