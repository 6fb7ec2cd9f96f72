#pragma once

// Weighted directed graph with 1-based node indices. The incident matrix A
// stores the dependency weight of node j on node i at A(i,j).

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netobs {

struct Edge {
    int from = 0;
    int to = 0;
    double weight = 0.0;
};

class Digraph {
public:
    Digraph() = default;
    explicit Digraph(int n) : n_(n) {
        if (n < 0) throw std::invalid_argument("Digraph: negative node count");
    }

    int node_count() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }

    void add_edge(int from, int to, double weight) {
        check_node(from);
        check_node(to);
        if (!std::isfinite(weight) || weight == 0.0)
            throw std::invalid_argument("Digraph: edge weight must be finite and nonzero");
        auto [it, inserted] = edges_.emplace(std::make_pair(from, to), weight);
        if (!inserted) throw std::invalid_argument("Digraph: duplicate edge");
    }

    bool has_edge(int from, int to) const {
        return edges_.count({from, to}) > 0;
    }

    double weight(int from, int to) const {
        auto it = edges_.find({from, to});
        return it == edges_.end() ? 0.0 : it->second;
    }

    /// Edges in deterministic (from, to) lexicographic order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edges_.size());
        for (const auto& [key, w] : edges_) out.push_back({key.first, key.second, w});
        return out;
    }

    /// Out-neighbour adjacency lists, index 1..n (slot 0 unused).
    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(n_ + 1);
        for (const auto& [key, w] : edges_) adj[key.first].push_back(key.second);
        return adj;
    }

    void scale_weights(double factor) {
        if (!std::isfinite(factor) || factor == 0.0)
            throw std::invalid_argument("Digraph: scale factor must be finite and nonzero");
        for (auto& [key, w] : edges_) w *= factor;
    }

    template <typename Fn>
    void map_weights(Fn&& fn) {
        for (auto& [key, w] : edges_) {
            double nw = fn(key.first, key.second, w);
            if (!std::isfinite(nw) || nw == 0.0)
                throw std::invalid_argument("Digraph: mapped weight must be finite and nonzero");
            w = nw;
        }
    }

    bool operator==(const Digraph& other) const {
        return n_ == other.n_ && edges_ == other.edges_;
    }

private:
    void check_node(int v) const {
        if (v < 1 || v > n_) throw std::invalid_argument("Digraph: node index out of range");
    }

    int n_ = 0;
    std::map<std::pair<int, int>, double> edges_;
};

inline Eigen::MatrixXd incident_matrix(const Digraph& g) {
    const int n = g.node_count();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) m(e.from - 1, e.to - 1) = e.weight;
    return m;
}

inline Digraph digraph_from_matrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("digraph_from_matrix: matrix must be square");
    Digraph g(static_cast<int>(m.rows()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) g.add_edge(i + 1, j + 1, m(i, j));
    return g;
}

/// Transpose graph: the dependency digraph seen as an inference diagram.
/// Root SCCs of this graph are where necessary monitors live.
inline Digraph inference_diagram(const Digraph& g) {
    Digraph t(g.node_count());
    for (const Edge& e : g.edges()) t.add_edge(e.to, e.from, e.weight);
    return t;
}

// Edge-list file format:
//   nodes <n>
//   <from> <to> <weight>     (one edge per line, '#' starts a comment)

inline Digraph load_edge_list(std::istream& in) {
    std::string line;
    int n = -1;
    Digraph g;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "nodes") {
            if (n >= 0 || !(ls >> n) || n < 0)
                throw std::runtime_error("edge list: bad 'nodes' header at line " +
                                         std::to_string(lineno));
            g = Digraph(n);
            continue;
        }
        if (n < 0) throw std::runtime_error("edge list: missing 'nodes <n>' header");
        int from = 0, to = 0;
        double w = 0.0;
        std::istringstream es(line);
        if (!(es >> from >> to >> w))
            throw std::runtime_error("edge list: malformed edge at line " +
                                     std::to_string(lineno));
        g.add_edge(from, to, w);
    }
    if (n < 0) throw std::runtime_error("edge list: missing 'nodes <n>' header");
    return g;
}

inline Digraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return load_edge_list(in);
}

inline std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void save_edge_list(const Digraph& g, std::ostream& out) {
    out << "nodes " << g.node_count() << "\n";
    for (const Edge& e : g.edges())
        out << e.from << " " << e.to << " " << format_float(e.weight) << "\n";
}

inline void save_edge_list(const Digraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write graph file: " + path);
    save_edge_list(g, out);
}

inline std::string edge_list_string(const Digraph& g) {
    std::ostringstream os;
    save_edge_list(g, os);
    return os.str();
}

}  // namespace netobs
