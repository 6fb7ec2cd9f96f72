#pragma once

// Strongly connected components (iterative Tarjan), condensation, and the
// root-SCC construction that yields the necessary-monitor sets.

#include <algorithm>
#include <set>
#include <vector>

#include "netobs/digraph.hpp"

namespace netobs {

struct SccPartition {
    /// Disjoint node sets covering 1..n, each sorted ascending. Components are
    /// ordered by their smallest contained node index.
    std::vector<std::vector<int>> components;
    /// Directed edges between component indices (0-based into `components`).
    std::vector<std::pair<int, int>> condensation;
    /// Component indices with condensation in-degree zero.
    std::vector<int> roots;
    /// component_of[v] = index of the component containing node v (slot 0 unused).
    std::vector<int> component_of;
};

inline SccPartition scc(const Digraph& g) {
    const int n = g.node_count();
    const auto adj = g.adjacency();

    std::vector<int> index(n + 1, -1), lowlink(n + 1, 0);
    std::vector<bool> on_stack(n + 1, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> raw_components;
    int next_index = 0;

    // Explicit DFS stack: (vertex, position in adjacency list).
    struct Frame {
        int v;
        std::size_t pos;
    };
    std::vector<Frame> frames;

    for (int start = 1; start <= n; ++start) {
        if (index[start] != -1) continue;
        frames.push_back({start, 0});
        index[start] = lowlink[start] = next_index++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.pos < adj[f.v].size()) {
                int w = adj[f.v][f.pos++];
                if (index[w] == -1) {
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    lowlink[f.v] = std::min(lowlink[f.v], index[w]);
                }
            } else {
                if (lowlink[f.v] == index[f.v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                    } while (w != f.v);
                    std::sort(comp.begin(), comp.end());
                    raw_components.push_back(std::move(comp));
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[v]);
            }
        }
    }

    SccPartition out;
    out.components = std::move(raw_components);
    std::sort(out.components.begin(), out.components.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    out.component_of.assign(n + 1, -1);
    for (int c = 0; c < static_cast<int>(out.components.size()); ++c)
        for (int v : out.components[c]) out.component_of[v] = c;

    std::set<std::pair<int, int>> cond;
    for (const Edge& e : g.edges()) {
        int a = out.component_of[e.from];
        int b = out.component_of[e.to];
        if (a != b) cond.insert({a, b});
    }
    out.condensation.assign(cond.begin(), cond.end());

    std::vector<int> indeg(out.components.size(), 0);
    for (const auto& [a, b] : out.condensation) ++indeg[b];
    for (int c = 0; c < static_cast<int>(out.components.size()); ++c)
        if (indeg[c] == 0) out.roots.push_back(c);
    return out;
}

/// Necessary-monitor node sets: one per root SCC of the inference diagram.
/// A network needs at least one monitor from each returned set.
inline std::vector<std::vector<int>> lsb_monitor_sets(const Digraph& g) {
    const SccPartition p = scc(inference_diagram(g));
    std::vector<std::vector<int>> sets;
    sets.reserve(p.roots.size());
    for (int r : p.roots) sets.push_back(p.components[r]);
    return sets;
}

}  // namespace netobs
