#pragma once

// Vertex-based schemes: the shared global DOF layer (matched trace vertices
// collapse to one DOF, imposing head/temperature continuity strongly) and the
// P1 finite element Darcy assembly with Dirichlet elimination by lifting.

#include <numeric>
#include <optional>

#include "dfnflow/darcy.hpp"

namespace dfn {

/// Global vertex numbering across all fracture meshes with matched trace
/// vertices identified, plus the Dirichlet marks with their lifted values.
struct VertexDofs {
    std::vector<std::vector<int>> global;  // per mesh, per mesh-vertex
    std::size_t n_global = 0;
    std::vector<char> is_dirichlet;
    std::vector<double> dirichlet_value;
    std::vector<int> free_index;       // global -> reduced index or -1
    std::vector<int> free_to_global;

    std::size_t n_free() const { return free_to_global.size(); }
};

/// Dirichlet marker: maps a boundary mesh edge (by index) to its prescribed
/// value, or nothing when the edge carries no essential condition. The
/// default marks the head-Dirichlet edges of the Darcy problem.
using DirichletMarker = std::function<std::optional<double>(int mesh, int edge)>;

inline DirichletMarker head_dirichlet_marker(const NetworkMesh& nm) {
    return [&nm](int m, int e) -> std::optional<double> {
        const EdgeTag& tag =
            detail::edge_tag(nm, m, nm.meshes[(std::size_t)m].edges[(std::size_t)e]);
        if (tag.kind == BcKind::dirichlet) return tag.head;
        return std::nullopt;
    };
}

inline VertexDofs build_vertex_dofs(const NetworkMesh& nm, const DirichletMarker& marker) {
    VertexDofs dofs;
    std::vector<std::size_t> offset(nm.meshes.size());
    std::size_t total = 0;
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        offset[m] = total;
        total += nm.meshes[m].vertices.size();
    }
    std::vector<std::size_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    // vertices carrying an essential condition in their own fracture: these
    // are excluded from the cross-fracture identification below, so a trace
    // endpoint touching a Dirichlet edge does not pin a point value inside
    // the neighbouring fracture (a zero-capacity constraint the continuous
    // model does not impose)
    std::vector<std::vector<char>> pinned(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        pinned[m].assign(nm.meshes[m].vertices.size(), 0);
        const FractureMesh& mesh = nm.meshes[m];
        for (std::size_t ei = 0; ei < mesh.edges.size(); ++ei) {
            const MeshEdge& e = mesh.edges[ei];
            if (!e.is_boundary() || e.boundary_edge < 0) continue;
            if (!marker((int)m, (int)ei)) continue;
            pinned[m][(std::size_t)e.v0] = 1;
            pinned[m][(std::size_t)e.v1] = 1;
        }
    }

    // identify matched trace vertices via their 3D positions
    for (const auto& [tid, pairs] : nm.trace_matching) {
        const Trace& tr = nm.network->traces[static_cast<std::size_t>(tid)];
        const int mi = nm.mesh_index(tr.fractures.first);
        const int mj = nm.mesh_index(tr.fractures.second);
        const Fracture& fi = nm.network->fractures[static_cast<std::size_t>(mi)];
        const Fracture& fj = nm.network->fractures[static_cast<std::size_t>(mj)];
        const double tol = 1e-9 * std::max(1.0, tr.length());
        for (const TraceSegmentPair& sp : pairs) {
            const MeshEdge& ei = nm.meshes[(std::size_t)mi].edges[(std::size_t)sp.edge_i];
            const MeshEdge& ej = nm.meshes[(std::size_t)mj].edges[(std::size_t)sp.edge_j];
            const Vec3 a0 = fi.frame.to_world(nm.meshes[(std::size_t)mi].vertices[(std::size_t)ei.v0]);
            const Vec3 b0 = fj.frame.to_world(nm.meshes[(std::size_t)mj].vertices[(std::size_t)ej.v0]);
            const bool straight = norm(a0 - b0) <= tol;
            const int vi0 = ei.v0, vi1 = ei.v1;
            const int vj0 = straight ? ej.v0 : ej.v1;
            const int vj1 = straight ? ej.v1 : ej.v0;
            if (!pinned[(std::size_t)mi][(std::size_t)vi0] && !pinned[(std::size_t)mj][(std::size_t)vj0])
                parent[find(offset[(std::size_t)mi] + vi0)] = find(offset[(std::size_t)mj] + vj0);
            if (!pinned[(std::size_t)mi][(std::size_t)vi1] && !pinned[(std::size_t)mj][(std::size_t)vj1])
                parent[find(offset[(std::size_t)mi] + vi1)] = find(offset[(std::size_t)mj] + vj1);
        }
    }

    std::vector<int> root_dof(total, -1);
    dofs.global.resize(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        dofs.global[m].resize(nm.meshes[m].vertices.size());
        for (std::size_t v = 0; v < nm.meshes[m].vertices.size(); ++v) {
            const std::size_t root = find(offset[m] + v);
            if (root_dof[root] < 0) root_dof[root] = static_cast<int>(dofs.n_global++);
            dofs.global[m][v] = root_dof[root];
        }
    }

    dofs.is_dirichlet.assign(dofs.n_global, 0);
    dofs.dirichlet_value.assign(dofs.n_global, 0.0);
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        for (std::size_t ei = 0; ei < mesh.edges.size(); ++ei) {
            const MeshEdge& e = mesh.edges[ei];
            if (!e.is_boundary() || e.boundary_edge < 0) continue;
            const std::optional<double> value = marker((int)m, (int)ei);
            if (!value) continue;
            for (int v : {e.v0, e.v1}) {
                const int g = dofs.global[m][(std::size_t)v];
                dofs.is_dirichlet[(std::size_t)g] = 1;
                dofs.dirichlet_value[(std::size_t)g] = *value;
            }
        }
    }
    dofs.free_index.assign(dofs.n_global, -1);
    for (std::size_t g = 0; g < dofs.n_global; ++g) {
        if (!dofs.is_dirichlet[g]) {
            dofs.free_index[g] = static_cast<int>(dofs.free_to_global.size());
            dofs.free_to_global.push_back(static_cast<int>(g));
        }
    }
    return dofs;
}

namespace fem {

/// P1 gradients: grad[i] of the hat function at vertex i of triangle (p0,p1,p2).
inline std::array<Vec2, 3> p1_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2,
                                        double area) {
    const double f = 1.0 / (2.0 * area);
    return {Vec2{(p1.y - p2.y) * f, (p2.x - p1.x) * f},
            Vec2{(p2.y - p0.y) * f, (p0.x - p2.x) * f},
            Vec2{(p0.y - p1.y) * f, (p1.x - p0.x) * f}};
}

}  // namespace fem

/// Reduced SPD system of a vertex scheme: A_II h_I = rhs_I - A_ID h_D.
struct VertexSystem {
    SparseMatrix A;
    std::vector<double> rhs;
    VertexDofs dofs;
};

namespace detail {

/// Scatter one element matrix into the reduced system with Dirichlet lifting.
inline void scatter_element(VertexSystem& sys, const std::vector<int>& gdofs,
                            const std::vector<std::vector<double>>& ke,
                            const std::vector<double>& fe) {
    const std::size_t n = gdofs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int gi = gdofs[i];
        if (sys.dofs.is_dirichlet[(std::size_t)gi]) continue;
        const std::size_t ri = (std::size_t)sys.dofs.free_index[(std::size_t)gi];
        sys.rhs[ri] += fe[i];
        for (std::size_t j = 0; j < n; ++j) {
            const int gj = gdofs[j];
            if (sys.dofs.is_dirichlet[(std::size_t)gj])
                sys.rhs[ri] -= ke[i][j] * sys.dofs.dirichlet_value[(std::size_t)gj];
            else
                sys.A.add(ri, (std::size_t)sys.dofs.free_index[(std::size_t)gj], ke[i][j]);
        }
    }
}

}  // namespace detail

/// P1 FEM Darcy assembly on the (triangular) network mesh. Matched trace
/// vertices share one global DOF; Dirichlet rows are eliminated with lifting.
inline VertexSystem assemble_p1_fem(const NetworkMesh& nm, const DarcyParameters& params) {
    VertexSystem sys;
    sys.dofs = build_vertex_dofs(nm, head_dirichlet_marker(nm));
    const std::size_t nf = sys.dofs.n_free();
    sys.A = SparseMatrix(nf, nf);
    sys.rhs.assign(nf, 0.0);
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const double K = params.conductivity(mesh.fracture_id);
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const auto& cell = mesh.cells[c];
            if (cell.size() != 3) throw Error("p1_fem requires a triangular mesh");
            const Vec2 p0 = mesh.vertices[(std::size_t)cell[0]];
            const Vec2 p1 = mesh.vertices[(std::size_t)cell[1]];
            const Vec2 p2 = mesh.vertices[(std::size_t)cell[2]];
            const double area = mesh.cell_area((int)c);
            const auto g = fem::p1_gradients(p0, p1, p2, area);
            std::vector<std::vector<double>> ke(3, std::vector<double>(3, 0.0));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) ke[i][j] = K * area * dot(g[i], g[j]);
            std::vector<double> fe(3, 0.0);
            if (params.source) {
                const double f = params.source(mesh.fracture_id, mesh.cell_centroid((int)c));
                for (int i = 0; i < 3; ++i) fe[i] = f * area / 3.0;
            }
            std::vector<int> gd{sys.dofs.global[m][(std::size_t)cell[0]],
                                sys.dofs.global[m][(std::size_t)cell[1]],
                                sys.dofs.global[m][(std::size_t)cell[2]]};
            detail::scatter_element(sys, gd, ke, fe);
        }
    }
    return sys;
}

/// Expand a reduced solution to per-mesh vertex values.
inline std::vector<std::vector<double>> expand_vertex_solution(const NetworkMesh& nm,
                                                               const VertexDofs& dofs,
                                                               const std::vector<double>& reduced) {
    std::vector<double> full(dofs.n_global, 0.0);
    for (std::size_t g = 0; g < dofs.n_global; ++g)
        full[g] = dofs.is_dirichlet[g] ? dofs.dirichlet_value[g]
                                       : reduced[(std::size_t)dofs.free_index[g]];
    std::vector<std::vector<double>> out(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        out[m].resize(nm.meshes[m].vertices.size());
        for (std::size_t v = 0; v < out[m].size(); ++v)
            out[m][v] = full[(std::size_t)dofs.global[m][v]];
    }
    return out;
}

/// Cell velocities u = -K grad(h) for a vertex-based head field, and edge
/// fluxes by averaging the two adjacent cell velocities. Trace half fluxes
/// stay one-sided (these schemes are only globally conservative).
inline FluxField vertex_scheme_fluxes(const NetworkMesh& nm, const DarcyParameters& params,
                                      const std::vector<std::vector<double>>& head,
                                      const std::vector<std::vector<Vec2>>& cell_gradients,
                                      DarcyScheme scheme) {
    (void)head;
    FluxField flux;
    flux.scheme = scheme;
    flux.locally_conservative = false;
    flux.edge_flux.resize(nm.meshes.size());
    flux.cell_velocity.resize(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const double K = params.conductivity(mesh.fracture_id);
        auto& vel = flux.cell_velocity[m];
        vel.resize(mesh.cells.size());
        for (std::size_t c = 0; c < mesh.cells.size(); ++c)
            vel[c] = cell_gradients[m][c] * (-K);
        auto& ef = flux.edge_flux[m];
        ef.assign(mesh.edges.size(), 0.0);
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            Vec2 u = vel[(std::size_t)edge.cell_left];
            if (edge.cell_right >= 0)
                u = (u + vel[(std::size_t)edge.cell_right]) * 0.5;
            ef[e] = dot(u, edge.normal) * edge.length;
        }
    }
    const TraceCouplingTable coupling = build_trace_coupling(nm);
    coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        auto& per_trace = flux.trace_half_flux[tid];
        if (per_trace.size() <= s) per_trace.resize(s + 1);
        per_trace[s].resize(seg.halves.size());
        for (std::size_t k = 0; k < seg.halves.size(); ++k) {
            const TraceHalf& th = seg.halves[k];
            const FractureMesh& mesh = nm.meshes[(std::size_t)th.mesh];
            const MeshEdge& edge = mesh.edges[(std::size_t)th.edge];
            const double sign = mesh.outward_sign(th.cell, th.edge);
            per_trace[s][k] =
                dot(flux.cell_velocity[(std::size_t)th.mesh][(std::size_t)th.cell], edge.normal) *
                edge.length * sign;
        }
    });
    return flux;
}

/// Per-cell constant gradients of a P1 field.
inline std::vector<std::vector<Vec2>> p1_cell_gradients(
    const NetworkMesh& nm, const std::vector<std::vector<double>>& head) {
    std::vector<std::vector<Vec2>> out(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        out[m].resize(mesh.cells.size());
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const auto& cell = mesh.cells[c];
            const Vec2 p0 = mesh.vertices[(std::size_t)cell[0]];
            const Vec2 p1 = mesh.vertices[(std::size_t)cell[1]];
            const Vec2 p2 = mesh.vertices[(std::size_t)cell[2]];
            const auto g = fem::p1_gradients(p0, p1, p2, mesh.cell_area((int)c));
            Vec2 gh{};
            for (int i = 0; i < 3; ++i) gh = gh + g[i] * head[m][(std::size_t)cell[i]];
            out[m][c] = gh;
        }
    }
    return out;
}

}  // namespace dfn
