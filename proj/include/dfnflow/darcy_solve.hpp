#pragma once

// Entry point of the flow step: assemble + solve + velocity recovery for any
// of the four Darcy schemes.

#include "dfnflow/darcy.hpp"
#include "dfnflow/darcy_fem.hpp"
#include "dfnflow/darcy_mixed.hpp"
#include "dfnflow/darcy_vem.hpp"

namespace dfn {

struct DarcySolution {
    HeadField head;
    FluxField flux;
    SolveReport report;
    std::size_t n_dofs = 0;
};

inline DarcyScheme darcy_scheme_from_string(const std::string& s) {
    if (s == "tpfa") return DarcyScheme::tpfa;
    if (s == "mixed_rt0" || s == "mfem") return DarcyScheme::mixed_rt0;
    if (s == "p1_fem" || s == "fem") return DarcyScheme::p1_fem;
    if (s == "vem_p1" || s == "vem") return DarcyScheme::vem_p1;
    throw Error("unknown darcy scheme '" + s + "'");
}

inline DarcySolution solve_darcy(const NetworkMesh& nm, DarcyScheme scheme,
                                 const DarcyParameters& params) {
    DarcySolution out;
    out.head.scheme = scheme;
    switch (scheme) {
        case DarcyScheme::tpfa: {
            TpfaSystem sys = assemble_tpfa(nm, params);
            std::vector<double> h;
            out.report = solve_spd(sys.A, sys.rhs, h, params.tol);
            if (!out.report.converged) throw Error("tpfa solve did not converge");
            out.n_dofs = sys.index.total;
            out.head.values.resize(nm.meshes.size());
            for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
                out.head.values[m].resize(nm.meshes[m].cells.size());
                for (std::size_t c = 0; c < out.head.values[m].size(); ++c)
                    out.head.values[m][c] = h[sys.index((int)m, (int)c)];
            }
            out.flux = tpfa_fluxes(nm, sys, h);
            break;
        }
        case DarcyScheme::mixed_rt0: {
            MixedSystem sys = assemble_mixed_rt0(nm, params);
            MixedSolution sol = solve_mixed(sys, params.tol);
            out.report = sol.report;
            if (!out.report.converged) throw Error("mixed_rt0 solve did not converge");
            out.n_dofs = sys.dofs.n_flux + sys.dofs.n_pressure;
            out.head.values.resize(nm.meshes.size());
            for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
                out.head.values[m].resize(nm.meshes[m].cells.size());
                for (std::size_t c = 0; c < out.head.values[m].size(); ++c)
                    out.head.values[m][c] = sol.pressure[sys.dofs.cells((int)m, (int)c)];
            }
            out.head.trace_multipliers.assign(sol.pressure.begin() + (long)sys.dofs.cells.total,
                                              sol.pressure.end());
            out.flux = mixed_fluxes(nm, sys, sol);
            break;
        }
        case DarcyScheme::p1_fem:
        case DarcyScheme::vem_p1: {
            VertexSystem sys = scheme == DarcyScheme::p1_fem ? assemble_p1_fem(nm, params)
                                                             : assemble_vem_p1(nm, params);
            std::vector<double> h;
            out.report = solve_spd(sys.A, sys.rhs, h, params.tol);
            if (!out.report.converged)
                throw Error(to_string(scheme) + " solve did not converge");
            out.n_dofs = sys.dofs.n_global;
            out.head.values = expand_vertex_solution(nm, sys.dofs, h);
            const auto grads = scheme == DarcyScheme::p1_fem
                                   ? p1_cell_gradients(nm, out.head.values)
                                   : vem_cell_gradients(nm, out.head.values);
            out.flux = vertex_scheme_fluxes(nm, params, out.head.values, grads, scheme);
            break;
        }
    }
    return out;
}

}  // namespace dfn
