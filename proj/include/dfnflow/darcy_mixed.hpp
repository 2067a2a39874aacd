#pragma once

// Mixed RT0-P0 Darcy scheme (saddle point). Edge-flux DOFs with exact RT0
// element mass matrices; at trace edges, flux continuity inside each fracture
// is broken into one DOF per adjacent cell, and one multiplier per matched
// segment enforces the flux balance of the coupling condition; head
// continuity holds weakly through the same multiplier.

#include "dfnflow/darcy.hpp"

namespace dfn {

struct MixedDofs {
    std::vector<std::vector<int>> edge_dof;                 // single-DOF edges, -1 otherwise
    std::map<int, std::vector<std::vector<int>>> half_dof;  // [trace][seg][half]
    std::size_t n_flux = 0;
    CellIndex cells;
    std::map<int, std::vector<std::size_t>> segment_row;  // pressure-block row per segment
    std::size_t n_pressure = 0;

    explicit MixedDofs(const NetworkMesh& nm) : cells(nm) {}
};

struct MixedSystem {
    SparseMatrix A;  // flux-flux (RT0 mass with 1/K)
    SparseMatrix B;  // [divergence rows; trace balance rows]
    std::vector<double> f;  // flux equations rhs (Dirichlet head terms)
    std::vector<double> g;  // pressure/constraint rhs
    MixedDofs dofs;
    TraceCouplingTable coupling;

    explicit MixedSystem(const NetworkMesh& nm) : dofs(nm) {}
};

inline MixedSystem assemble_mixed_rt0(const NetworkMesh& nm, const DarcyParameters& params) {
    for (const auto& mesh : nm.meshes)
        for (const auto& cell : mesh.cells)
            if (cell.size() != 3) throw Error("mixed scheme requires triangles");

    MixedSystem sys(nm);
    sys.coupling = build_trace_coupling(nm);

    // flux DOF layout
    sys.dofs.edge_dof.resize(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m)
        sys.dofs.edge_dof[m].assign(nm.meshes[m].edges.size(), -1);
    std::size_t next = 0;
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (edge.is_trace()) continue;
            if (edge.is_boundary()) {
                const EdgeTag& tag = detail::edge_tag(nm, (int)m, edge);
                if (tag.kind == BcKind::neumann_noflow) continue;  // essential zero flux
            }
            sys.dofs.edge_dof[m][e] = static_cast<int>(next++);
        }
    }
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        auto& per_trace = sys.dofs.half_dof[tid];
        if (per_trace.size() <= s) per_trace.resize(s + 1);
        per_trace[s].resize(seg.halves.size());
        for (std::size_t h = 0; h < seg.halves.size(); ++h)
            per_trace[s][h] = static_cast<int>(next++);
    });
    sys.dofs.n_flux = next;

    // pressure block: cell rows then one balance row per matched segment
    std::size_t prow = sys.dofs.cells.total;
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment&) {
        auto& rows = sys.dofs.segment_row[tid];
        if (rows.size() <= s) rows.resize(s + 1);
        rows[s] = prow++;
    });
    sys.dofs.n_pressure = prow;

    sys.A = SparseMatrix(sys.dofs.n_flux, sys.dofs.n_flux);
    sys.B = SparseMatrix(sys.dofs.n_pressure, sys.dofs.n_flux);
    sys.f.assign(sys.dofs.n_flux, 0.0);
    sys.g.assign(sys.dofs.n_pressure, 0.0);

    // helper: local DOF and orientation sign (+1 if DOF direction is outward
    // of the cell) for one edge of a cell
    auto local_dof = [&](int m, int c, int e) -> std::pair<int, double> {
        const MeshEdge& edge = nm.meshes[(std::size_t)m].edges[(std::size_t)e];
        if (edge.is_trace()) {
            const auto& segs = sys.coupling.segments.at(edge.trace_id);
            const auto& dofs = sys.dofs.half_dof.at(edge.trace_id);
            for (std::size_t s = 0; s < segs.size(); ++s)
                for (std::size_t h = 0; h < segs[s].halves.size(); ++h)
                    if (segs[s].halves[h].mesh == m && segs[s].halves[h].cell == c &&
                        segs[s].halves[h].edge == e)
                        return {dofs[s][h], 1.0};
            throw Error("trace half DOF not found");
        }
        const int dof = sys.dofs.edge_dof[(std::size_t)m][(std::size_t)e];
        return {dof, nm.meshes[(std::size_t)m].outward_sign(c, e)};
    };

    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const double K = params.conductivity(mesh.fracture_id);
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const auto& cell = mesh.cells[c];
            const double area = mesh.cell_area((int)c);
            const std::size_t crow = sys.dofs.cells((int)m, (int)c);
            // local basis: edge k of the cell runs (vk, vk+1); opposite vertex vk+2
            std::array<int, 3> dof{};
            std::array<double, 3> sign{};
            std::array<Vec2, 3> opp{};
            for (int k = 0; k < 3; ++k) {
                const int e = mesh.cell_edges[c][(std::size_t)k];
                const auto [d, s] = local_dof((int)m, (int)c, e);
                dof[(std::size_t)k] = d;
                sign[(std::size_t)k] = s;
                opp[(std::size_t)k] = mesh.vertices[(std::size_t)cell[(std::size_t)((k + 2) % 3)]];
            }
            // midpoint quadrature, exact for the quadratic integrand
            std::array<Vec2, 3> mid{};
            for (int k = 0; k < 3; ++k)
                mid[(std::size_t)k] =
                    (mesh.vertices[(std::size_t)cell[(std::size_t)k]] +
                     mesh.vertices[(std::size_t)cell[(std::size_t)((k + 1) % 3)]]) *
                    0.5;
            for (int i = 0; i < 3; ++i) {
                if (dof[(std::size_t)i] < 0) continue;
                for (int j = 0; j < 3; ++j) {
                    if (dof[(std::size_t)j] < 0) continue;
                    double acc = 0.0;
                    for (int q = 0; q < 3; ++q) {
                        const Vec2 phi_i = (mid[(std::size_t)q] - opp[(std::size_t)i]) *
                                           (sign[(std::size_t)i] / (2.0 * area));
                        const Vec2 phi_j = (mid[(std::size_t)q] - opp[(std::size_t)j]) *
                                           (sign[(std::size_t)j] / (2.0 * area));
                        acc += dot(phi_i, phi_j);
                    }
                    sys.A.add((std::size_t)dof[(std::size_t)i], (std::size_t)dof[(std::size_t)j],
                              acc * area / (3.0 * K));
                }
                // divergence row: b(u, q) = -(div u, q)
                sys.B.add(crow, (std::size_t)dof[(std::size_t)i], -sign[(std::size_t)i]);
            }
            if (params.source)
                sys.g[crow] -= params.source(mesh.fracture_id, mesh.cell_centroid((int)c)) * area;
        }
        // Dirichlet boundary term G(v) = -<h, v.n>
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (!edge.is_boundary() || edge.is_trace()) continue;
            const EdgeTag& tag = detail::edge_tag(nm, (int)m, edge);
            if (tag.kind != BcKind::dirichlet) continue;
            const int dof = sys.dofs.edge_dof[m][e];
            if (dof >= 0) sys.f[(std::size_t)dof] -= tag.head;
        }
    }

    // trace balance rows: the four (or fewer) outward half fluxes sum to zero
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        const std::size_t row = sys.dofs.segment_row.at(tid)[s];
        for (std::size_t h = 0; h < seg.halves.size(); ++h)
            sys.B.add(row, (std::size_t)sys.dofs.half_dof.at(tid)[s][h], 1.0);
    });
    return sys;
}

struct MixedSolution {
    std::vector<double> flux_dofs;
    std::vector<double> pressure;  // cell heads then segment multipliers
    SolveReport report;
};

inline MixedSolution solve_mixed(const MixedSystem& sys, double tol) {
    MixedSolution sol;
    sol.report = solve_saddle(sys.A, sys.B, sys.f, sys.g, sol.flux_dofs, sol.pressure, tol);
    return sol;
}

/// Fluxes of a solved mixed system; DOF values are already edge-integrated.
inline FluxField mixed_fluxes(const NetworkMesh& nm, const MixedSystem& sys,
                              const MixedSolution& sol) {
    FluxField flux;
    flux.scheme = DarcyScheme::mixed_rt0;
    flux.locally_conservative = true;
    flux.edge_flux.resize(nm.meshes.size());
    flux.cell_velocity.resize(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        flux.edge_flux[m].assign(mesh.edges.size(), 0.0);
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const int dof = sys.dofs.edge_dof[m][e];
            if (dof >= 0) flux.edge_flux[m][e] = sol.flux_dofs[(std::size_t)dof];
        }
        // RT0 velocity at the centroid
        flux.cell_velocity[m].assign(mesh.cells.size(), Vec2{});
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const auto& cell = mesh.cells[c];
            const double area = mesh.cell_area((int)c);
            const Vec2 xc = mesh.cell_centroid((int)c);
            Vec2 u{};
            for (int k = 0; k < 3; ++k) {
                const int e = mesh.cell_edges[c][(std::size_t)k];
                const MeshEdge& edge = mesh.edges[(std::size_t)e];
                double val = 0.0, sign = 1.0;
                if (edge.is_trace()) {
                    const auto& segs = sys.coupling.segments.at(edge.trace_id);
                    for (std::size_t s = 0; s < segs.size(); ++s)
                        for (std::size_t h = 0; h < segs[s].halves.size(); ++h)
                            if (segs[s].halves[h].mesh == (int)m &&
                                segs[s].halves[h].cell == (int)c && segs[s].halves[h].edge == e)
                                val = sol.flux_dofs[(std::size_t)sys.dofs.half_dof.at(edge.trace_id)[s][h]];
                } else {
                    const int dof = sys.dofs.edge_dof[m][(std::size_t)e];
                    if (dof >= 0) val = sol.flux_dofs[(std::size_t)dof];
                    sign = mesh.outward_sign((int)c, e);
                }
                const Vec2 opp = mesh.vertices[(std::size_t)cell[(std::size_t)((k + 2) % 3)]];
                u = u + (xc - opp) * (sign * val / (2.0 * area));
            }
            flux.cell_velocity[m][c] = u;
        }
    }
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        auto& per_trace = flux.trace_half_flux[tid];
        if (per_trace.size() <= s) per_trace.resize(s + 1);
        per_trace[s].resize(seg.halves.size());
        for (std::size_t h = 0; h < seg.halves.size(); ++h)
            per_trace[s][h] = sol.flux_dofs[(std::size_t)sys.dofs.half_dof.at(tid)[s][h]];
    });
    return flux;
}

/// Per-cell divergence residual |div u - f| of a mixed solution (flux units).
inline double mixed_max_cell_residual(const MixedSystem& sys, const MixedSolution& sol) {
    const std::vector<double> bu = sys.B.apply(sol.flux_dofs);
    double worst = 0.0;
    for (std::size_t r = 0; r < sys.dofs.cells.total; ++r)
        worst = std::max(worst, std::abs(bu[r] - sys.g[r]));
    return worst;
}

/// Largest trace-segment flux imbalance (constraint rows of the saddle system).
inline double mixed_max_trace_imbalance(const MixedSystem& sys, const MixedSolution& sol) {
    const std::vector<double> bu = sys.B.apply(sol.flux_dofs);
    double worst = 0.0;
    for (std::size_t r = sys.dofs.cells.total; r < sys.dofs.n_pressure; ++r)
        worst = std::max(worst, std::abs(bu[r]));
    return worst;
}

}  // namespace dfn
