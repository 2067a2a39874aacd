#pragma once

// Run configuration: flat key-value text with [section] headers. Every value
// has a default; the echoed config written next to the outputs reproduces the
// run exactly.

#include <fstream>
#include <sstream>

#include "dfnflow/darcy_solve.hpp"
#include "dfnflow/physics.hpp"
#include "dfnflow/transport.hpp"
#include "dfnflow/triangulate.hpp"

namespace dfn {

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

struct RunConfig {
    // [geometry]
    std::string source = "tc1";  // tc1 | tc2 | cross | file
    int config_index = 0;
    std::string geometry_path;

    // [mesh]
    double target_h = 0.075;
    std::string level;           // optional named level: coarse | fine
    double coarsen_ratio = 0.0;  // 0 = off
    std::string mesh_import;     // optional .txt/.msh path
    double trace_size_fraction = -1.0;  // <0: mesher default
    int min_trace_segments = -1;

    // [schemes]
    std::string pairing = "tpfaup";  // tpfaup | mfemup | vemup | mfemsupg | custom
    std::string darcy_scheme;        // set explicitly when pairing = custom
    std::string transport_scheme;

    // [physics]
    bool derive = false;
    double K = 1.0;
    double D = 1e-4;
    double zeta = 1.0;
    double iota = 0.0;
    double theta_hat = 0.0;
    double theta_inflow = 1.0;
    double theta_initial = 0.0;
    FractureProperties fracture_props;
    FluidProperties fluid_props;
    RockProperties rock_props;

    // [time]
    double dt = 0.05;
    int n_steps = 300;

    // [output]
    std::string out_dir = "out";
    int snapshot_every = 0;  // 0 = no field snapshots

    // [solver]
    double tol_darcy = 1e-10;
    double tol_step = 1e-9;

    DarcyScheme darcy() const {
        if (!darcy_scheme.empty()) return darcy_scheme_from_string(darcy_scheme);
        if (pairing == "tpfaup") return DarcyScheme::tpfa;
        if (pairing == "mfemup" || pairing == "mfemsupg") return DarcyScheme::mixed_rt0;
        if (pairing == "vemup") return DarcyScheme::vem_p1;
        throw ConfigError("unknown scheme pairing '" + pairing + "'");
    }

    TransportScheme transport() const {
        if (!transport_scheme.empty()) {
            if (transport_scheme == "fv_upwind" || transport_scheme == "upwind")
                return TransportScheme::fv_upwind;
            if (transport_scheme == "fem_supg" || transport_scheme == "supg")
                return TransportScheme::fem_supg;
            throw ConfigError("unknown transport scheme '" + transport_scheme + "'");
        }
        if (pairing == "tpfaup" || pairing == "mfemup") return TransportScheme::fv_upwind;
        // the polygonal tag pairs the VEM flow solve with the SUPG transport:
        // upwind FV needs locally conservative face fluxes, which the primal
        // VEM (like P1) does not provide
        if (pairing == "vemup" || pairing == "mfemsupg") return TransportScheme::fem_supg;
        throw ConfigError("unknown scheme pairing '" + pairing + "'");
    }

    void validate() const {
        if (pairing == "femsupg" || pairing == "xfemsupg")
            throw ConfigError("pairing '" + pairing +
                              "' (non-matching optimization schemes) is out of scope");
        const DarcyScheme d = darcy();
        const TransportScheme t = transport();
        const bool ok = (d == DarcyScheme::tpfa && t == TransportScheme::fv_upwind) ||
                        (d == DarcyScheme::mixed_rt0) ||
                        (d == DarcyScheme::p1_fem && t == TransportScheme::fem_supg) ||
                        (d == DarcyScheme::vem_p1 && t == TransportScheme::fem_supg);
        if (!ok)
            throw ConfigError("invalid scheme pairing: " + to_string(d) + " + " + to_string(t));
        if (coarsen_ratio > 0.0 && t == TransportScheme::fem_supg)
            throw ConfigError("fem_supg transport requires a triangular mesh; "
                              "coarsening pairs with tpfaup only");
        if (source != "tc1" && source != "tc2" && source != "cross" && source != "file")
            throw ConfigError("geometry source must be tc1, tc2, cross or file");
        if (source == "file" && geometry_path.empty())
            throw ConfigError("geometry source 'file' needs geometry.path");
        if (source == "tc1" && (config_index < 0 || config_index > 20))
            throw ConfigError("tc1 config_index must lie in [0,20]");
        if (!(target_h > 0.0)) throw ConfigError("mesh.target_h must be positive");
        if (coarsen_ratio < 0.0 || coarsen_ratio >= 1.0)
            throw ConfigError("mesh.coarsen_ratio must lie in [0,1)");
        if (!(dt > 0.0)) throw ConfigError("time.dt must be positive");
        if (n_steps < 0) throw ConfigError("time.n_steps must be nonnegative");
        if (snapshot_every < 0) throw ConfigError("output.snapshots must be nonnegative");
        if (!(tol_darcy > 0.0) || !(tol_step > 0.0))
            throw ConfigError("solver tolerances must be positive");
    }

    /// Physical coefficients, either direct or derived from primitives.
    void resolve_physics(double& K_out, TransportCoefficients& coeff) const {
        if (derive) {
            const DerivedCoefficients dc = heat_coefficients(fracture_props, fluid_props, rock_props);
            K_out = dc.K;
            coeff = {dc.zeta, dc.D, dc.iota, rock_props.theta_hat};
        } else {
            K_out = K;
            coeff = {zeta, D, iota, theta_hat};
        }
    }

    TriangulationOptions mesh_options() const {
        TriangulationOptions opt;
        if (trace_size_fraction >= 0.0) opt.trace_size_fraction = trace_size_fraction;
        if (min_trace_segments >= 0) opt.min_trace_segments = min_trace_segments;
        return opt;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline RunConfig parse_config_text(std::istream& in, const std::string& origin) {
    RunConfig cfg;
    std::string line, section;
    int line_no = 0;
    auto bad = [&](const std::string& what) {
        return ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw bad("malformed section header");
            section = s.substr(1, s.size() - 2);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw bad("expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        auto as_double = [&]() {
            try {
                std::size_t used = 0;
                const double v = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
                return v;
            } catch (const std::exception&) {
                throw bad("value of '" + key + "' is not a number");
            }
        };
        auto as_int = [&]() {
            try {
                std::size_t used = 0;
                const int v = std::stoi(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
                return v;
            } catch (const std::exception&) {
                throw bad("value of '" + key + "' is not an integer");
            }
        };
        const std::string full = section + "." + key;
        if (full == "geometry.source") cfg.source = val;
        else if (full == "geometry.config_index") cfg.config_index = as_int();
        else if (full == "geometry.path") cfg.geometry_path = val;
        else if (full == "mesh.target_h") cfg.target_h = as_double();
        else if (full == "mesh.level") cfg.level = val;
        else if (full == "mesh.coarsen_ratio") cfg.coarsen_ratio = as_double();
        else if (full == "mesh.import") cfg.mesh_import = val;
        else if (full == "mesh.trace_size_fraction") cfg.trace_size_fraction = as_double();
        else if (full == "mesh.min_trace_segments") cfg.min_trace_segments = as_int();
        else if (full == "schemes.pairing") cfg.pairing = val;
        else if (full == "schemes.darcy") cfg.darcy_scheme = val;
        else if (full == "schemes.transport") cfg.transport_scheme = val;
        else if (full == "physics.derive") cfg.derive = as_int() != 0;
        else if (full == "physics.K") cfg.K = as_double();
        else if (full == "physics.D") cfg.D = as_double();
        else if (full == "physics.zeta") cfg.zeta = as_double();
        else if (full == "physics.iota") cfg.iota = as_double();
        else if (full == "physics.theta_hat") cfg.theta_hat = as_double();
        else if (full == "physics.theta_inflow") cfg.theta_inflow = as_double();
        else if (full == "physics.theta_initial") cfg.theta_initial = as_double();
        else if (full == "physics.epsilon") cfg.fracture_props.epsilon = as_double();
        else if (full == "physics.phi") cfg.fracture_props.phi = as_double();
        else if (full == "physics.g") cfg.fracture_props.g = as_double();
        else if (full == "physics.mu") cfg.fluid_props.mu = as_double();
        else if (full == "physics.rho_w") cfg.fluid_props.rho_w = as_double();
        else if (full == "physics.c_w") cfg.fluid_props.c_w = as_double();
        else if (full == "physics.lambda_w") cfg.fluid_props.lambda_w = as_double();
        else if (full == "physics.rho_m") cfg.rock_props.rho_m = as_double();
        else if (full == "physics.c_m") cfg.rock_props.c_m = as_double();
        else if (full == "physics.lambda_m") cfg.rock_props.lambda_m = as_double();
        else if (full == "physics.gamma_e") cfg.rock_props.gamma_e = as_double();
        else if (full == "physics.theta_rock") cfg.rock_props.theta_hat = as_double();
        else if (full == "time.dt") cfg.dt = as_double();
        else if (full == "time.n_steps") cfg.n_steps = as_int();
        else if (full == "output.dir") cfg.out_dir = val;
        else if (full == "output.snapshots") cfg.snapshot_every = as_int();
        else if (full == "solver.tol_darcy") cfg.tol_darcy = as_double();
        else if (full == "solver.tol_step") cfg.tol_step = as_double();
        else throw bad("unknown key '" + full + "'");
    }
    // named mesh levels per benchmark case
    if (!cfg.level.empty()) {
        if (cfg.level == "coarse")
            cfg.target_h = cfg.source == "tc2" ? 0.214 : 0.075;
        else if (cfg.level == "fine")
            cfg.target_h = cfg.source == "tc2" ? 0.034 : 0.024;
        else
            throw ConfigError(origin + ": mesh.level must be coarse or fine");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config_text(in, path);
}

/// Echo with all defaults resolved; reruns to identical outputs.
inline void write_config_echo(const RunConfig& c, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "[geometry]\nsource = %s\n", c.source.c_str());
    std::fprintf(f, "config_index = %d\n", c.config_index);
    if (!c.geometry_path.empty()) std::fprintf(f, "path = %s\n", c.geometry_path.c_str());
    std::fprintf(f, "\n[mesh]\ntarget_h = %.17g\ncoarsen_ratio = %.17g\n", c.target_h,
                 c.coarsen_ratio);
    if (!c.mesh_import.empty()) std::fprintf(f, "import = %s\n", c.mesh_import.c_str());
    if (c.trace_size_fraction >= 0.0)
        std::fprintf(f, "trace_size_fraction = %.17g\n", c.trace_size_fraction);
    if (c.min_trace_segments >= 0)
        std::fprintf(f, "min_trace_segments = %d\n", c.min_trace_segments);
    std::fprintf(f, "\n[schemes]\npairing = %s\n", c.pairing.c_str());
    if (!c.darcy_scheme.empty()) std::fprintf(f, "darcy = %s\n", c.darcy_scheme.c_str());
    if (!c.transport_scheme.empty())
        std::fprintf(f, "transport = %s\n", c.transport_scheme.c_str());
    std::fprintf(f, "\n[physics]\nderive = %d\n", c.derive ? 1 : 0);
    std::fprintf(f, "K = %.17g\nD = %.17g\nzeta = %.17g\niota = %.17g\n", c.K, c.D, c.zeta, c.iota);
    std::fprintf(f, "theta_hat = %.17g\ntheta_inflow = %.17g\ntheta_initial = %.17g\n",
                 c.theta_hat, c.theta_inflow, c.theta_initial);
    if (c.derive) {
        std::fprintf(f, "epsilon = %.17g\nphi = %.17g\ng = %.17g\n", c.fracture_props.epsilon,
                     c.fracture_props.phi, c.fracture_props.g);
        std::fprintf(f, "mu = %.17g\nrho_w = %.17g\nc_w = %.17g\nlambda_w = %.17g\n",
                     c.fluid_props.mu, c.fluid_props.rho_w, c.fluid_props.c_w,
                     c.fluid_props.lambda_w);
        std::fprintf(f, "rho_m = %.17g\nc_m = %.17g\nlambda_m = %.17g\ngamma_e = %.17g\n",
                     c.rock_props.rho_m, c.rock_props.c_m, c.rock_props.lambda_m,
                     c.rock_props.gamma_e);
        std::fprintf(f, "theta_rock = %.17g\n", c.rock_props.theta_hat);
    }
    std::fprintf(f, "\n[time]\ndt = %.17g\nn_steps = %d\n", c.dt, c.n_steps);
    std::fprintf(f, "\n[output]\ndir = %s\nsnapshots = %d\n", c.out_dir.c_str(), c.snapshot_every);
    std::fprintf(f, "\n[solver]\ntol_darcy = %.17g\ntol_step = %.17g\n", c.tol_darcy, c.tol_step);
    std::fclose(f);
}

}  // namespace dfn
