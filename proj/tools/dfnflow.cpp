// dfnflow: batch front-end for Darcy flow and heat transport on discrete
// fracture networks.
//
//   dfnflow run <config.ini> [overrides]     one simulation
//   dfnflow run --case tc1 --config-index 0 --scheme tpfaup --h coarse
//   dfnflow sweep-tc1 --schemes tpfaup,mfemup --configs 0..20 --levels coarse
//   dfnflow mesh-stats <geometry: file|tc1:N|tc2|cross> [--h H]

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "dfnflow/runner.hpp"

namespace {

double parse_level(const std::string& s, const std::string& source) {
    if (s == "coarse") return source == "tc2" ? 0.214 : 0.075;
    if (s == "fine") return source == "tc2" ? 0.034 : 0.024;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw dfn::ConfigError("--h expects coarse, fine or a number");
    }
}

std::vector<int> parse_configs(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots != std::string::npos) {
            const int a = std::stoi(item.substr(0, dots));
            const int b = std::stoi(item.substr(dots + 2));
            for (int k = a; k <= b; ++k) out.push_back(k);
        } else if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
    }
    if (out.empty()) throw dfn::ConfigError("--configs parsed to an empty set");
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Darcy flow and heat transport on discrete fracture networks"};
    app.set_help_flag("--help", "print help");  // frees -h/--h for the mesh level
    app.require_subcommand(1);

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "execute one configured simulation");
    std::string config_path, case_name, scheme, level, out_dir, geometry_file;
    int config_index = -1, steps = -1, snapshots = -1;
    double dt = -1.0;
    run_cmd->add_option("config", config_path, "run configuration file (INI)");
    run_cmd->add_option("--case", case_name, "builtin geometry: tc1, tc2, cross");
    run_cmd->add_option("--geometry", geometry_file, "geometry file (DFN text format)");
    run_cmd->add_option("--config-index", config_index, "tc1 configuration id (0..20)");
    run_cmd->add_option("--scheme", scheme, "pairing tag: tpfaup, mfemup, vemup, mfemsupg");
    run_cmd->add_option("--h", level, "mesh level: coarse, fine or a target size");
    run_cmd->add_option("--steps", steps, "number of implicit Euler steps");
    run_cmd->add_option("--dt", dt, "time step length");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--snapshots", snapshots, "field snapshot cadence (0 = off)");

    // ---- sweep-tc1 ----
    auto* sweep_cmd = app.add_subcommand("sweep-tc1", "vanishing-trace configuration sweep");
    std::string sweep_schemes = "tpfaup", sweep_configs = "0..20", sweep_levels = "coarse";
    std::string sweep_out = "sweep_tc1";
    int jobs = 0;
    sweep_cmd->add_option("--schemes", sweep_schemes, "comma list of pairing tags");
    sweep_cmd->add_option("--configs", sweep_configs, "configuration ids, e.g. 0..20 or 0,10,20");
    sweep_cmd->add_option("--levels", sweep_levels, "comma list of mesh levels");
    sweep_cmd->add_option("--out", sweep_out, "output directory");
    sweep_cmd->add_option("--jobs", jobs, "worker pool size (default: DFNFLOW_THREADS or cores)");

    // ---- mesh-stats ----
    auto* stats_cmd = app.add_subcommand("mesh-stats", "mesh a geometry and print statistics");
    std::string stats_geometry;
    std::string stats_h = "coarse";
    stats_cmd->add_option("geometry", stats_geometry, "file path or tc1:N | tc2 | cross")
        ->required();
    stats_cmd->add_option("--h", stats_h, "mesh level: coarse, fine or a target size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            dfn::RunConfig cfg;
            if (!config_path.empty()) cfg = dfn::load_config(config_path);
            if (!case_name.empty()) cfg.source = case_name;
            if (!geometry_file.empty()) {
                cfg.source = "file";
                cfg.geometry_path = geometry_file;
            }
            if (config_index >= 0) cfg.config_index = config_index;
            if (!scheme.empty()) cfg.pairing = scheme;
            if (!level.empty()) {
                cfg.target_h = parse_level(level, cfg.source);
                cfg.level.clear();
            }
            if (steps >= 0) cfg.n_steps = steps;
            if (dt > 0.0) cfg.dt = dt;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (snapshots >= 0) cfg.snapshot_every = snapshots;
            const dfn::RunResult res = dfn::run(cfg);
            std::printf("cells %zu\ndarcy_dofs %zu\ntransport_dofs %zu\n", res.cells,
                        res.darcy_dofs, res.transport_dofs);
            std::printf("final_avg_outflow %.17g\npe_max %.17g\n", res.final_avg_outflow,
                        res.pe_max);
            for (const auto& [tid, phi] : res.max_phi)
                std::printf("max_phi_t%d %.17g\n", tid, phi);
            std::printf("csv %s\n", res.csv_path.c_str());
        } else if (sweep_cmd->parsed()) {
            const auto entries = dfn::sweep_tc1(split_list(sweep_schemes),
                                                parse_configs(sweep_configs),
                                                split_list(sweep_levels), sweep_out, jobs);
            const std::string summary = sweep_out + "/summary.csv";
            std::filesystem::create_directories(sweep_out);
            dfn::write_sweep_summary(entries, summary);
            std::size_t failed = 0;
            for (const auto& e : entries)
                if (!e.ok) {
                    ++failed;
                    std::fprintf(stderr, "run %s/%s/C%d failed: %s\n", e.scheme.c_str(),
                                 e.level.c_str(), e.config, e.error.c_str());
                }
            std::printf("summary %s (%zu runs, %zu failed)\n", summary.c_str(), entries.size(),
                        failed);
        } else if (stats_cmd->parsed()) {
            dfn::RunConfig cfg;
            if (stats_geometry.rfind("tc1:", 0) == 0) {
                cfg.source = "tc1";
                cfg.config_index = std::stoi(stats_geometry.substr(4));
            } else if (stats_geometry == "tc1" || stats_geometry == "tc2" ||
                       stats_geometry == "cross") {
                cfg.source = stats_geometry;
            } else {
                cfg.source = "file";
                cfg.geometry_path = stats_geometry;
            }
            cfg.target_h = parse_level(stats_h, cfg.source);
            const dfn::FractureNetwork net = dfn::build_geometry(cfg);
            const dfn::NetworkMesh nm = dfn::triangulate_conforming(net, cfg.target_h);
            const dfn::MeshStatistics st = dfn::mesh_statistics(nm);
            std::printf("fractures %zu\ntraces %zu\n", net.fractures.size(), net.traces.size());
            std::printf("cells %zu\nvertices %zu\nedges %zu\n", st.cells, st.vertices, st.edges);
            std::printf("min_angle_deg %.4f\nh_max %.6g\nh_min %.6g\n", st.min_angle_deg,
                        st.h_max, st.h_min);
        }
    } catch (const dfn::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
