// Command-line front end: graph generation, LSB monitor analysis, the three
// built-in benchmark experiments, config-driven batches, and the
// density-versus-monitor-count table.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "netobs/config_io.hpp"
#include "netobs/harness.hpp"

using namespace netobs;

namespace {

void run_batch(ExperimentConfig cfg) {
    cfg.validate();
    const ResolvedModel model = resolve_model(cfg);
    const auto library = resolve_library(cfg, model.n);
    const auto records = run_monte_carlo(cfg);
    write_batch_outputs(cfg, records, library);

    int crashed = 0;
    for (const auto& rec : records)
        if (rec.crashed) ++crashed;
    std::cout << "runs: " << records.size() << "  crashed: " << crashed
              << "  outputs: " << cfg.out_dir << "\n";

    const auto hist = aggregate_histogram(records, library);
    std::vector<HistogramRow> top(hist.begin(), hist.end());
    std::sort(top.begin(), top.end(),
              [](const auto& a, const auto& b) { return a.count > b.count; });
    std::cout << "top actions:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, top.size()); ++i) {
        std::cout << "  {";
        for (std::size_t j = 0; j < top[i].nodes.size(); ++j)
            std::cout << (j ? " " : "") << top[i].nodes[j];
        std::cout << "}:" << format_float(top[i].frequency);
    }
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic network observability under supervisory cognitive control"};
    app.require_subcommand(1);

    // lsb <graphfile>
    std::string graph_path;
    auto* lsb_cmd = app.add_subcommand("lsb", "Print necessary-monitor node sets");
    lsb_cmd->add_option("graphfile", graph_path, "Edge-list file")->required();
    lsb_cmd->callback([&] {
        for (const auto& set : lsb_monitor_sets(load_edge_list(graph_path))) {
            for (std::size_t i = 0; i < set.size(); ++i)
                std::cout << (i ? " " : "") << set[i];
            std::cout << "\n";
        }
    });

    // gen
    GenSpec spec;
    std::string topology_name = "er";
    std::string out_path;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a random digraph");
    gen_cmd->add_option("--topology", topology_name, "er | scalefree");
    gen_cmd->add_option("--n", spec.n, "Node count");
    gen_cmd->add_option("--p", spec.p, "ER edge probability");
    gen_cmd->add_option("--alpha", spec.alpha, "Scale-free alpha");
    gen_cmd->add_option("--beta", spec.beta, "Scale-free beta");
    gen_cmd->add_option("--gamma", spec.gamma, "Scale-free gamma");
    gen_cmd->add_option("--delta-in", spec.delta_in, "In-degree offset");
    gen_cmd->add_option("--delta-out", spec.delta_out, "Out-degree offset");
    gen_cmd->add_option("--weight-low", spec.weight_low, "Weight interval low end");
    gen_cmd->add_option("--weight-high", spec.weight_high, "Weight interval high end");
    gen_cmd->add_option("--spectral-target", spec.spectral_target,
                        "Spectral radius of A^T after scaling (0 disables)");
    gen_cmd->add_option("--seed", spec.seed, "Generator seed");
    gen_cmd->add_option("--out", out_path, "Output edge-list file")->required();
    gen_cmd->callback([&] {
        spec.topology = topology_name == "scalefree" ? Topology::ScaleFree : Topology::Er;
        Digraph g = generate(spec);
        save_edge_list(g, out_path);
        std::cout << "nodes " << g.node_count() << " edges " << g.edge_count() << " -> "
                  << out_path << "\n";
    });

    // example1
    int q = 1;
    bool no_controller = false;
    int realizations = 0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    auto* ex1 = app.add_subcommand("example1", "Published 7-node linear benchmark");
    ex1->add_option("--q", q, "Monitors per cycle (1 or 2)")->check(CLI::Range(1, 7));
    ex1->add_flag("--no-controller", no_controller, "Fixed random monitor baseline");
    ex1->add_option("--realizations", realizations, "Monte Carlo runs");
    ex1->add_option("--seed", seed, "Master seed");
    ex1->add_option("--out", out_dir, "Output directory");
    ex1->callback([&] {
        ExperimentConfig cfg = example1_config(q, !no_controller);
        if (realizations > 0) cfg.realizations = realizations;
        cfg.seed = seed;
        cfg.out_dir = out_dir;
        run_batch(cfg);
    });

    // example2 <topology> <density>
    std::string ex2_topology;
    double density = 0.021;
    auto* ex2 = app.add_subcommand("example2", "Topology-vs-observability study (n=100)");
    ex2->add_option("topology", ex2_topology, "er | scalefree")->required();
    ex2->add_option("density", density, "Edge probability (er) or target edges (scalefree)")
        ->required();
    ex2->add_option("--realizations", realizations, "Monte Carlo runs");
    ex2->add_option("--seed", seed, "Master seed");
    ex2->add_option("--out", out_dir, "Output directory");
    ex2->callback([&] {
        ExperimentConfig cfg = example2_config(
            ex2_topology == "scalefree" ? Topology::ScaleFree : Topology::Er, density, seed);
        if (realizations > 0) cfg.realizations = realizations;
        cfg.out_dir = out_dir;
        run_batch(cfg);
    });

    // example3
    int dismiss = 1;
    bool fixed_lsb = false;
    auto* ex3 = app.add_subcommand("example3", "Chemistry benchmark with HEKF");
    ex3->add_option("--dismiss", dismiss, "Redundant monitors per cycle")
        ->check(CLI::Range(1, 2));
    ex3->add_flag("--fixed-lsb", fixed_lsb, "Fixed LSB monitors, no controller");
    ex3->add_option("--realizations", realizations, "Monte Carlo runs");
    ex3->add_option("--seed", seed, "Master seed");
    ex3->add_option("--out", out_dir, "Output directory");
    ex3->callback([&] {
        ExperimentConfig cfg = example3_config(dismiss, fixed_lsb);
        if (realizations > 0) cfg.realizations = realizations;
        cfg.seed = seed;
        cfg.out_dir = out_dir;
        run_batch(cfg);
    });

    // run <configfile>
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run a config-file experiment");
    run_cmd->add_option("configfile", config_path, "Key/value config file")->required();
    run_cmd->callback([&] { run_batch(parse_config_file(config_path)); });

    // table1
    int cell_realizations = 100;
    auto* table_cmd =
        app.add_subcommand("table1", "LSB monitor counts across densities (n=100)");
    table_cmd->add_option("--realizations", cell_realizations, "Graphs per cell");
    table_cmd->add_option("--seed", seed, "Master seed");
    table_cmd->callback([&] {
        std::vector<DensityCell> grid;
        for (double p : {0.021, 0.037, 0.060, 0.162}) {
            DensityCell cell;
            cell.topology = Topology::Er;
            cell.density = p;
            cell.gen.n = 100;
            cell.gen.p = p;
            grid.push_back(cell);
        }
        const std::array<std::array<double, 3>, 4> sf_params{
            {{0.41, 0.54, 0.05}, {0.21, 0.74, 0.05}, {0.41, 0.54, 0.05}, {0.05, 0.94, 0.01}}};
        const std::array<double, 4> sf_targets{210, 370, 600, 1620};
        for (int i = 0; i < 4; ++i) {
            DensityCell cell;
            cell.topology = Topology::ScaleFree;
            cell.density = sf_targets[i];
            cell.gen.n = 100;
            cell.gen.alpha = sf_params[i][0];
            cell.gen.beta = sf_params[i][1];
            cell.gen.gamma = sf_params[i][2];
            grid.push_back(cell);
        }
        std::printf("%-10s %-10s %-12s %-10s\n", "topology", "density", "mean_edges",
                    "monitors");
        for (const DensityRow& row : lsb_density_study(grid, cell_realizations, seed)) {
            std::printf("%-10s %-10g %-12.1f %d\n",
                        row.topology == Topology::Er ? "er" : "scalefree", row.density,
                        row.mean_edges, row.rounded_up);
        }
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
