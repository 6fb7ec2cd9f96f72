#pragma once

// Flat key/value config files and batch output writing (runs/*.csv,
// histogram.csv, curves.csv, manifest).

#include <filesystem>
#include <fstream>
#include <sstream>

#include "netobs/harness.hpp"

namespace netobs {

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::string token;
    std::istringstream is(s);
    while (std::getline(is, token, ',')) {
        std::istringstream ts(token);
        int v;
        while (ts >> v) out.push_back(v);
    }
    return out;
}

inline std::string join_nodes(const std::vector<int>& nodes, char sep = ';') {
    std::string s;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(nodes[i]);
    }
    return s;
}

}  // namespace detail

inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
    auto as_double = [&] { return std::stod(value); };
    auto as_int = [&] { return std::stoi(value); };
    auto as_bool = [&] {
        if (value == "true" || value == "on" || value == "1") return true;
        if (value == "false" || value == "off" || value == "0") return false;
        throw std::invalid_argument("config: bad boolean '" + value + "'");
    };

    if (key == "model") cfg.model = value;
    else if (key == "graph_file") cfg.graph_file = value;
    else if (key == "topology") {
        if (value == "er") cfg.gen.topology = Topology::Er;
        else if (value == "scalefree") cfg.gen.topology = Topology::ScaleFree;
        else throw std::invalid_argument("config: unknown topology '" + value + "'");
    }
    else if (key == "n") cfg.gen.n = as_int();
    else if (key == "p") cfg.gen.p = as_double();
    else if (key == "alpha") cfg.gen.alpha = as_double();
    else if (key == "beta") cfg.gen.beta = as_double();
    else if (key == "gamma") cfg.gen.gamma = as_double();
    else if (key == "delta_in") cfg.gen.delta_in = as_double();
    else if (key == "delta_out") cfg.gen.delta_out = as_double();
    else if (key == "weight_low") cfg.gen.weight_low = as_double();
    else if (key == "weight_high") cfg.gen.weight_high = as_double();
    else if (key == "spectral_target") cfg.gen.spectral_target = as_double();
    else if (key == "graph_seed") cfg.gen.seed = std::stoull(value);
    else if (key == "accessible") {
        if (value != "all") cfg.accessible = detail::parse_int_list(value);
    }
    else if (key == "action_mode") {
        if (value == "select") cfg.action_mode = ActionMode::Select;
        else if (value == "dismiss") cfg.action_mode = ActionMode::Dismiss;
        else throw std::invalid_argument("config: unknown action_mode '" + value + "'");
    }
    else if (key == "cardinality") cfg.cardinality = as_int();
    else if (key == "fixed_monitors") cfg.fixed_monitors = detail::parse_int_list(value);
    else if (key == "plan_actions") cfg.plan.num_hypothesized = as_int();
    else if (key == "plan_depth") cfg.plan.depth = as_int();
    else if (key == "learn_rate") cfg.learn_rate = as_double();
    else if (key == "discount") cfg.discount = as_double();
    else if (key == "explore") cfg.explore = as_double();
    else if (key == "explore_decay") cfg.explore_decay = as_double();
    else if (key == "duration") cfg.duration = as_double();
    else if (key == "obs_rate") cfg.obs_rate = as_double();
    else if (key == "process_noise") cfg.process_noise = as_double();
    else if (key == "measure_noise") cfg.measure_noise = as_double();
    else if (key == "init_cov") cfg.init_cov = as_double();
    else if (key == "init_state") cfg.init_state = as_double();
    else if (key == "crash_threshold") cfg.crash_threshold = as_double();
    else if (key == "dt") cfg.dt = as_double();
    else if (key == "chem_k1") cfg.chem_k[0] = as_double();
    else if (key == "chem_k2") cfg.chem_k[1] = as_double();
    else if (key == "chem_k3") cfg.chem_k[2] = as_double();
    else if (key == "chem_k4") cfg.chem_k[3] = as_double();
    else if (key == "chem_k5") cfg.chem_k[4] = as_double();
    else if (key == "chem_k6") cfg.chem_k[5] = as_double();
    else if (key == "entropy_mode") {
        if (value == "trace") cfg.entropy_mode = EntropyMode::Trace;
        else if (value == "logdet") cfg.entropy_mode = EntropyMode::LogDet;
        else throw std::invalid_argument("config: unknown entropy_mode '" + value + "'");
    }
    else if (key == "controller") cfg.controller = as_bool();
    else if (key == "baseline_per_cycle") cfg.baseline_per_cycle = as_bool();
    else if (key == "realizations") cfg.realizations = as_int();
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::istringstream check(line);
            std::string token;
            if (check >> token)
                throw std::runtime_error("config: malformed line " + std::to_string(lineno));
            continue;
        }
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            s.erase(s.find_last_not_of(ws) + 1);
            return s;
        };
        apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "model = " << cfg.model << "\n";
    if (!cfg.graph_file.empty()) os << "graph_file = " << cfg.graph_file << "\n";
    os << "topology = " << (cfg.gen.topology == Topology::Er ? "er" : "scalefree") << "\n";
    os << "n = " << cfg.gen.n << "\n";
    os << "p = " << format_float(cfg.gen.p) << "\n";
    os << "alpha = " << format_float(cfg.gen.alpha) << "\n";
    os << "beta = " << format_float(cfg.gen.beta) << "\n";
    os << "gamma = " << format_float(cfg.gen.gamma) << "\n";
    os << "delta_in = " << format_float(cfg.gen.delta_in) << "\n";
    os << "delta_out = " << format_float(cfg.gen.delta_out) << "\n";
    os << "weight_low = " << format_float(cfg.gen.weight_low) << "\n";
    os << "weight_high = " << format_float(cfg.gen.weight_high) << "\n";
    os << "spectral_target = " << format_float(cfg.gen.spectral_target) << "\n";
    os << "graph_seed = " << cfg.gen.seed << "\n";
    os << "accessible = "
       << (cfg.accessible.empty() ? std::string("all")
                                  : detail::join_nodes(cfg.accessible, ','))
       << "\n";
    os << "action_mode = "
       << (cfg.action_mode == ActionMode::Select ? "select" : "dismiss") << "\n";
    os << "cardinality = " << cfg.cardinality << "\n";
    if (!cfg.fixed_monitors.empty())
        os << "fixed_monitors = " << detail::join_nodes(cfg.fixed_monitors, ',') << "\n";
    os << "plan_actions = " << cfg.plan.num_hypothesized << "\n";
    os << "plan_depth = " << cfg.plan.depth << "\n";
    os << "learn_rate = " << format_float(cfg.learn_rate) << "\n";
    os << "discount = " << format_float(cfg.discount) << "\n";
    os << "explore = " << format_float(cfg.explore) << "\n";
    os << "explore_decay = " << format_float(cfg.explore_decay) << "\n";
    os << "duration = " << format_float(cfg.duration) << "\n";
    os << "obs_rate = " << format_float(cfg.obs_rate) << "\n";
    os << "process_noise = " << format_float(cfg.process_noise) << "\n";
    os << "measure_noise = " << format_float(cfg.measure_noise) << "\n";
    os << "init_cov = " << format_float(cfg.init_cov) << "\n";
    os << "init_state = " << format_float(cfg.init_state) << "\n";
    os << "crash_threshold = " << format_float(cfg.crash_threshold) << "\n";
    os << "dt = " << format_float(cfg.dt) << "\n";
    for (int i = 0; i < 6; ++i)
        os << "chem_k" << (i + 1) << " = " << format_float(cfg.chem_k[i]) << "\n";
    os << "entropy_mode = "
       << (cfg.entropy_mode == EntropyMode::Trace ? "trace" : "logdet") << "\n";
    os << "controller = " << (cfg.controller ? "true" : "false") << "\n";
    os << "baseline_per_cycle = " << (cfg.baseline_per_cycle ? "true" : "false") << "\n";
    os << "realizations = " << cfg.realizations << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "out_dir = " << cfg.out_dir << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Batch outputs

inline void write_run_csv(const RunRecord& rec, std::ostream& out) {
    out << "cycle,t,H,sq_error,reward,action_id,nodes\n";
    for (const CycleRow& row : rec.rows) {
        out << row.cycle << "," << format_float(row.t) << ","
            << format_float(row.entropic) << "," << format_float(row.sq_error) << ","
            << format_float(row.reward) << "," << row.action_id << ","
            << detail::join_nodes(row.nodes) << "\n";
    }
}

inline void write_histogram_csv(const std::vector<HistogramRow>& hist, std::ostream& out) {
    out << "action_id,nodes,count,frequency\n";
    for (const HistogramRow& h : hist)
        out << h.action_id << "," << detail::join_nodes(h.nodes) << "," << h.count << ","
            << format_float(h.frequency) << "\n";
}

inline void write_curves_csv(const CurveTable& curves, std::ostream& out) {
    out << "cycle,t,mean_H,mean_mse,ci_half\n";
    for (const CurveRow& row : curves.rows)
        out << row.cycle << "," << format_float(row.t) << ","
            << format_float(row.mean_entropic) << "," << format_float(row.mean_sq_error)
            << "," << format_float(row.ci_half) << "\n";
}

/// Writes runs/<idx>.csv, histogram.csv, curves.csv (when any run survived),
/// and a manifest with the fully resolved config and crash count.
inline void write_batch_outputs(const ExperimentConfig& cfg,
                                const std::vector<RunRecord>& records,
                                const std::vector<MonitorAction>& library) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir / "runs");

    int crashed = 0;
    for (const RunRecord& rec : records) {
        if (rec.crashed) ++crashed;
        std::ofstream out(dir / "runs" / (std::to_string(rec.run_index) + ".csv"));
        write_run_csv(rec, out);
    }
    {
        std::ofstream out(dir / "histogram.csv");
        write_histogram_csv(aggregate_histogram(records, library), out);
    }
    if (crashed < static_cast<int>(records.size())) {
        std::ofstream out(dir / "curves.csv");
        write_curves_csv(aggregate_curves(records), out);
    }
    {
        std::ofstream out(dir / "manifest");
        out << serialize_config(cfg);
        out << "crash_count = " << crashed << "\n";
    }
}

}  // namespace netobs
