#pragma once

// P1 FEM semi-discretization of the heat equation with SUPG stabilization.
// Advection uses the cell-constant Darcy velocity in elementwise conservative
// form; inflow vertices are pinned to the boundary temperature; the
// stabilization acts on the spatial residual only.

#include "dfnflow/transport.hpp"

namespace dfn {

/// Streamline diffusion parameter tau = h/(2|u|) (coth(Pe) - 1/Pe), evaluated
/// through its series for small Peclet numbers (limit h^2/(12 D)).
inline double supg_tau(double unorm, double h, double D) {
    if (unorm <= 0.0) return 0.0;
    if (D <= 0.0) return 0.5 * h / unorm;
    const double pe = unorm * h / (2.0 * D);
    if (pe < 1e-4) return h * pe / (6.0 * unorm) * (1.0 - pe * pe / 15.0);
    if (pe > 50.0) return 0.5 * h / unorm * (1.0 - 1.0 / pe);
    return 0.5 * h / unorm * (1.0 / std::tanh(pe) - 1.0 / pe);
}

inline TransportOperator assemble_p1_supg(const NetworkMesh& nm, const FluxField& flux,
                                          const TransportProblem& problem,
                                          bool stabilized = true) {
    problem.validate();
    TransportOperator op;
    op.scheme = TransportScheme::fem_supg;
    op.boundary = classify_boundary(nm, flux);

    const DirichletMarker inflow_marker = [&](int m, int e) -> std::optional<double> {
        if (op.boundary[(std::size_t)m][(std::size_t)e] == EdgeFlow::inflow)
            return problem.theta_inflow;
        return std::nullopt;
    };
    op.dofs = build_vertex_dofs(nm, inflow_marker);
    const std::size_t n = op.dofs.n_global;
    op.M = SparseMatrix(n, n);
    op.A = SparseMatrix(n, n);
    op.s.assign(n, 0.0);
    op.dirichlet_row.assign(n, 0);
    op.dirichlet_value.assign(n, 0.0);
    for (std::size_t g = 0; g < n; ++g) {
        op.dirichlet_row[g] = op.dofs.is_dirichlet[g];
        op.dirichlet_value[g] = op.dofs.dirichlet_value[g];
    }

    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const TransportCoefficients& c = problem.coefficients(mesh.fracture_id);
        for (std::size_t cell = 0; cell < mesh.cells.size(); ++cell) {
            const auto& cv = mesh.cells[cell];
            if (cv.size() != 3) throw Error("fem_supg requires a triangular mesh");
            const Vec2 p0 = mesh.vertices[(std::size_t)cv[0]];
            const Vec2 p1 = mesh.vertices[(std::size_t)cv[1]];
            const Vec2 p2 = mesh.vertices[(std::size_t)cv[2]];
            const double area = mesh.cell_area((int)cell);
            if (area <= 0.0) throw Error("zero-measure element in fem_supg assembly");
            const auto g = fem::p1_gradients(p0, p1, p2, area);
            const Vec2 u = flux.cell_velocity[m][cell];
            const double unorm = norm(u);
            const double h = mesh.cell_diameter((int)cell);
            const double tau = stabilized ? supg_tau(unorm, h, c.D) : 0.0;
            const std::array<int, 3> gd{op.dofs.global[m][(std::size_t)cv[0]],
                                        op.dofs.global[m][(std::size_t)cv[1]],
                                        op.dofs.global[m][(std::size_t)cv[2]]};
            for (int i = 0; i < 3; ++i) {
                const std::size_t ri = (std::size_t)gd[(std::size_t)i];
                const double ugi = dot(u, g[(std::size_t)i]);
                for (int j = 0; j < 3; ++j) {
                    const std::size_t cj = (std::size_t)gd[(std::size_t)j];
                    const double mass = c.zeta * area / 12.0 * (i == j ? 2.0 : 1.0);
                    op.M.add(ri, cj, mass);
                    double a = c.D * area * dot(g[(std::size_t)i], g[(std::size_t)j]);
                    // conservative advection, integrated by parts; the element
                    // boundary terms collapse to the domain boundary below
                    a -= area / 3.0 * ugi;
                    a += c.iota * area / 12.0 * (i == j ? 2.0 : 1.0);
                    // streamline stabilization of the spatial residual
                    a += tau * area * ugi * dot(u, g[(std::size_t)j]);
                    a += tau * c.iota * ugi * area / 3.0;
                    op.A.add(ri, cj, a);
                }
                op.s[ri] += c.iota * c.theta_hat * area / 3.0;
                op.s[ri] += tau * ugi * c.iota * c.theta_hat * area;
            }
        }
        // single-valued advective boundary flux: inflow and outflow Dirichlet
        // edges carry their computed normal flux, no-flow edges carry none
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (!edge.is_boundary() || edge.is_trace()) continue;
            if (op.boundary[m][e] == EdgeFlow::none) continue;
            const double q = flux.edge_flux[m][e];  // outward, edge-integrated
            const std::size_t ga = (std::size_t)op.dofs.global[m][(std::size_t)edge.v0];
            const std::size_t gb = (std::size_t)op.dofs.global[m][(std::size_t)edge.v1];
            op.A.add(ga, ga, q / 3.0);
            op.A.add(ga, gb, q / 6.0);
            op.A.add(gb, ga, q / 6.0);
            op.A.add(gb, gb, q / 3.0);
        }
    }
    return op;
}

/// Per-mesh vertex snapshots of a vertex-scheme history entry.
inline std::vector<std::vector<double>> split_vertex_snapshot(const NetworkMesh& nm,
                                                              const VertexDofs& dofs,
                                                              const std::vector<double>& flat) {
    std::vector<std::vector<double>> out(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        out[m].resize(nm.meshes[m].vertices.size());
        for (std::size_t v = 0; v < out[m].size(); ++v)
            out[m][v] = flat[(std::size_t)dofs.global[m][v]];
    }
    return out;
}

/// Per-mesh cell snapshots of an FV history entry.
inline std::vector<std::vector<double>> split_cell_snapshot(const NetworkMesh& nm,
                                                            const std::vector<double>& flat) {
    const CellIndex index(nm);
    std::vector<std::vector<double>> out(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        out[m].resize(nm.meshes[m].cells.size());
        for (std::size_t c = 0; c < out[m].size(); ++c) out[m][c] = flat[index((int)m, (int)c)];
    }
    return out;
}

}  // namespace dfn
