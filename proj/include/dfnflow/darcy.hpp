#pragma once

// Darcy flow on a network mesh. Four interchangeable discretizations share
// the field and coupling-table types defined here; this header carries the
// cell-centered TPFA scheme with star-delta elimination of the trace heads.

#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dfnflow/linalg.hpp"
#include "dfnflow/mesh.hpp"

namespace dfn {

enum class DarcyScheme { tpfa, mixed_rt0, p1_fem, vem_p1 };

inline std::string to_string(DarcyScheme s) {
    switch (s) {
        case DarcyScheme::tpfa: return "tpfa";
        case DarcyScheme::mixed_rt0: return "mixed_rt0";
        case DarcyScheme::p1_fem: return "p1_fem";
        default: return "vem_p1";
    }
}

struct DarcyParameters {
    double K = 1.0;                          // uniform unless per_fracture_K overrides
    std::map<int, double> per_fracture_K;
    std::function<double(int, const Vec2&)> source;  // f(fracture id, local point), optional
    double tol = 1e-10;

    double conductivity(int fracture_id) const {
        auto it = per_fracture_K.find(fracture_id);
        return it == per_fracture_K.end() ? K : it->second;
    }
};

/// Scheme-tagged head field: one DOF vector per fracture mesh, cell-centered
/// for tpfa/mixed_rt0 and vertex-based for p1_fem/vem_p1.
struct HeadField {
    DarcyScheme scheme = DarcyScheme::tpfa;
    std::vector<std::vector<double>> values;
    std::vector<double> trace_multipliers;  // mixed scheme only, one per matched segment
};

/// Darcy fluxes in the layout transport needs: signed per-edge normal fluxes
/// (positive from cell_left to cell_right, outward on the boundary), cell
/// velocities, and per-trace-segment half fluxes (positive out of the cell).
struct FluxField {
    DarcyScheme scheme = DarcyScheme::tpfa;
    bool locally_conservative = false;
    std::vector<std::vector<double>> edge_flux;
    std::vector<std::vector<Vec2>> cell_velocity;
    // aligned with TraceCouplingTable: [trace][segment][half]
    std::map<int, std::vector<std::vector<double>>> trace_half_flux;
};

/// One cell's connection to a matched trace segment.
struct TraceHalf {
    int mesh = -1;
    int cell = -1;
    int edge = -1;
};

struct TraceSegment {
    double length = 0.0;
    std::vector<TraceHalf> halves;  // 2 per incident fracture (1 if the trace runs on a boundary)
};

/// Per-trace list of matched segments with all incident cells; the shared
/// geometry table behind trace handling in flow, transport and diagnostics.
struct TraceCouplingTable {
    std::map<int, std::vector<TraceSegment>> segments;

    template <typename F>
    void for_each_segment(F&& f) const {
        for (const auto& [tid, segs] : segments)
            for (std::size_t s = 0; s < segs.size(); ++s) f(tid, s, segs[s]);
    }
};

inline TraceCouplingTable build_trace_coupling(const NetworkMesh& nm) {
    TraceCouplingTable table;
    for (const auto& [tid, pairs] : nm.trace_matching) {
        const Trace& tr = nm.network->traces[static_cast<std::size_t>(tid)];
        const int mi = nm.mesh_index(tr.fractures.first);
        const int mj = nm.mesh_index(tr.fractures.second);
        std::vector<TraceSegment> segs;
        segs.reserve(pairs.size());
        for (const TraceSegmentPair& sp : pairs) {
            TraceSegment seg;
            const MeshEdge& ei = nm.meshes[mi].edges[sp.edge_i];
            const MeshEdge& ej = nm.meshes[mj].edges[sp.edge_j];
            seg.length = ei.length;
            seg.halves.push_back({mi, ei.cell_left, sp.edge_i});
            if (ei.cell_right >= 0) seg.halves.push_back({mi, ei.cell_right, sp.edge_i});
            seg.halves.push_back({mj, ej.cell_left, sp.edge_j});
            if (ej.cell_right >= 0) seg.halves.push_back({mj, ej.cell_right, sp.edge_j});
            segs.push_back(std::move(seg));
        }
        table.segments[tid] = std::move(segs);
    }
    return table;
}

/// Flat indexing of cells across all fracture meshes.
struct CellIndex {
    std::vector<std::size_t> offset;
    std::size_t total = 0;

    explicit CellIndex(const NetworkMesh& nm) {
        offset.resize(nm.meshes.size());
        for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
            offset[m] = total;
            total += nm.meshes[m].cells.size();
        }
    }
    std::size_t operator()(int mesh, int cell) const {
        return offset[static_cast<std::size_t>(mesh)] + static_cast<std::size_t>(cell);
    }
};

namespace detail {

inline const EdgeTag& edge_tag(const NetworkMesh& nm, int mesh, const MeshEdge& e) {
    const Fracture& f = nm.network->fractures[static_cast<std::size_t>(mesh)];
    if (e.boundary_edge < 0 || e.boundary_edge >= (int)f.boundary_tags.size())
        throw Error("boundary edge without tag in fracture " + std::to_string(f.id));
    return f.boundary_tags[static_cast<std::size_t>(e.boundary_edge)];
}

/// TPFA half-transmissibility of cell c at edge e: K |e| / dist(centroid, edge).
inline double half_transmissibility(const FractureMesh& mesh, int cell, int edge, double K) {
    const MeshEdge& e = mesh.edges[edge];
    const Vec2 a = mesh.vertices[e.v0];
    const Vec2 c = mesh.cell_centroid(cell);
    const double d = std::abs(dot(c - a, e.normal));
    if (d <= 1e-14 * e.length)
        throw Error("zero centroid-edge distance in cell " + std::to_string(cell) +
                    " of fracture mesh " + std::to_string(mesh.fracture_id));
    return K * e.length / d;
}

}  // namespace detail

/// Assembled TPFA system plus everything needed to reconstruct fluxes.
struct TpfaSystem {
    SparseMatrix A;
    std::vector<double> rhs;
    CellIndex index;
    // flux reconstruction
    struct InteriorEdge {
        int mesh, edge;
        double T;
    };
    struct BoundaryEdge {
        int mesh, edge;
        double alpha, h_bar;
    };
    std::vector<InteriorEdge> interior;
    std::vector<BoundaryEdge> dirichlet;
    std::map<int, std::vector<std::vector<double>>> trace_alpha;  // [trace][seg][half]
    TraceCouplingTable coupling;
    std::vector<double> cell_source;  // integrated source per flat cell

    explicit TpfaSystem(const NetworkMesh& nm) : index(nm) {}
};

/// TPFA assembly. Trace segments introduce an auxiliary trace head connected
/// to every incident cell with half-transmissibility alpha = K|e|/d; the flux
/// balance across the segment eliminates it (star-delta), leaving pairwise
/// transmissibilities alpha_c alpha_d / sum(alpha). Connected components with
/// no Dirichlet edge get one reference cell pinned to zero head.
inline TpfaSystem assemble_tpfa(const NetworkMesh& nm, const DarcyParameters& params,
                                const std::map<int, double>* diffusivity_override = nullptr) {
    TpfaSystem sys(nm);
    const std::size_t n = sys.index.total;
    sys.A = SparseMatrix(n, n);
    sys.rhs.assign(n, 0.0);
    sys.cell_source.assign(n, 0.0);
    sys.coupling = build_trace_coupling(nm);

    auto coeff = [&](int mesh) {
        const int fid = nm.meshes[static_cast<std::size_t>(mesh)].fracture_id;
        if (diffusivity_override) {
            auto it = diffusivity_override->find(fid);
            if (it != diffusivity_override->end()) return it->second;
        }
        return params.conductivity(fid);
    };

    // connected-component bookkeeping for pinning pure-Neumann components
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const double K = coeff(static_cast<int>(m));
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (edge.is_trace()) continue;  // handled through the coupling table
            if (!edge.is_boundary()) {
                const double al = detail::half_transmissibility(mesh, edge.cell_left, (int)e, K);
                const double ar = detail::half_transmissibility(mesh, edge.cell_right, (int)e, K);
                const double T = al * ar / (al + ar);
                const std::size_t l = sys.index((int)m, edge.cell_left);
                const std::size_t r = sys.index((int)m, edge.cell_right);
                sys.A.add(l, l, T);
                sys.A.add(r, r, T);
                sys.A.add(l, r, -T);
                sys.A.add(r, l, -T);
                sys.interior.push_back({(int)m, (int)e, T});
                unite(l, r);
            } else {
                const EdgeTag& tag = detail::edge_tag(nm, (int)m, edge);
                if (tag.kind == BcKind::dirichlet) {
                    const double a = detail::half_transmissibility(mesh, edge.cell_left, (int)e, K);
                    const std::size_t c = sys.index((int)m, edge.cell_left);
                    sys.A.add(c, c, a);
                    sys.rhs[c] += a * tag.head;
                    sys.dirichlet.push_back({(int)m, (int)e, a, tag.head});
                }
            }
        }
    }

    // star-delta elimination of the trace heads
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        std::vector<double> alpha(seg.halves.size());
        double denom = 0.0;
        for (std::size_t h = 0; h < seg.halves.size(); ++h) {
            const TraceHalf& th = seg.halves[h];
            alpha[h] = detail::half_transmissibility(nm.meshes[(std::size_t)th.mesh], th.cell,
                                                     th.edge, coeff(th.mesh));
            denom += alpha[h];
        }
        for (std::size_t a = 0; a < seg.halves.size(); ++a) {
            const std::size_t ca = sys.index(seg.halves[a].mesh, seg.halves[a].cell);
            sys.A.add(ca, ca, alpha[a] * (denom - alpha[a]) / denom);
            for (std::size_t b = 0; b < seg.halves.size(); ++b) {
                if (a == b) continue;
                const std::size_t cb = sys.index(seg.halves[b].mesh, seg.halves[b].cell);
                sys.A.add(ca, cb, -alpha[a] * alpha[b] / denom);
                unite(ca, cb);
            }
        }
        auto& per_trace = sys.trace_alpha[tid];
        if (per_trace.size() <= s) per_trace.resize(s + 1);
        per_trace[s] = std::move(alpha);
    });

    // sources
    if (params.source) {
        for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
            const FractureMesh& mesh = nm.meshes[m];
            const int fid = mesh.fracture_id;
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                const double q = params.source(fid, mesh.cell_centroid((int)c)) *
                                 mesh.cell_area((int)c);
                sys.cell_source[sys.index((int)m, (int)c)] = q;
                sys.rhs[sys.index((int)m, (int)c)] += q;
            }
        }
    }

    // pin one cell per component that never saw a Dirichlet edge
    std::vector<bool> grounded(n, false);
    for (const auto& d : sys.dirichlet) grounded[find(sys.index(d.mesh, nm.meshes[(std::size_t)d.mesh].edges[(std::size_t)d.edge].cell_left))] = true;
    std::vector<bool> pinned(n, false);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t root = find(c);
        if (!grounded[root] && !pinned[root]) {
            sys.A.add(c, c, 1.0);
            pinned[root] = true;
        }
    }
    return sys;
}

/// Edge fluxes and trace half fluxes of a solved TPFA head field. Cell
/// velocities are reconstructed from the edge fluxes for diagnostics.
inline FluxField tpfa_fluxes(const NetworkMesh& nm, const TpfaSystem& sys,
                             const std::vector<double>& h) {
    FluxField flux;
    flux.scheme = DarcyScheme::tpfa;
    flux.locally_conservative = true;
    flux.edge_flux.resize(nm.meshes.size());
    flux.cell_velocity.resize(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        flux.edge_flux[m].assign(nm.meshes[m].edges.size(), 0.0);
        flux.cell_velocity[m].assign(nm.meshes[m].cells.size(), Vec2{});
    }
    for (const auto& ie : sys.interior) {
        const MeshEdge& e = nm.meshes[(std::size_t)ie.mesh].edges[(std::size_t)ie.edge];
        flux.edge_flux[(std::size_t)ie.mesh][(std::size_t)ie.edge] =
            ie.T * (h[sys.index(ie.mesh, e.cell_left)] - h[sys.index(ie.mesh, e.cell_right)]);
    }
    for (const auto& be : sys.dirichlet) {
        const MeshEdge& e = nm.meshes[(std::size_t)be.mesh].edges[(std::size_t)be.edge];
        flux.edge_flux[(std::size_t)be.mesh][(std::size_t)be.edge] =
            be.alpha * (h[sys.index(be.mesh, e.cell_left)] - be.h_bar);
    }
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        const auto& alpha = sys.trace_alpha.at(tid)[s];
        double denom = 0.0, num = 0.0;
        for (std::size_t k = 0; k < seg.halves.size(); ++k) {
            denom += alpha[k];
            num += alpha[k] * h[sys.index(seg.halves[k].mesh, seg.halves[k].cell)];
        }
        const double h_trace = num / denom;
        auto& per_trace = flux.trace_half_flux[tid];
        if (per_trace.size() <= s) per_trace.resize(s + 1);
        per_trace[s].resize(seg.halves.size());
        for (std::size_t k = 0; k < seg.halves.size(); ++k)
            per_trace[s][k] =
                alpha[k] * (h[sys.index(seg.halves[k].mesh, seg.halves[k].cell)] - h_trace);
    });
    // velocity reconstruction: u = (1/|c|) sum q_out (x_e - x_c)
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const Vec2 xc = mesh.cell_centroid((int)c);
            Vec2 u{};
            for (int e : mesh.cell_edges[c]) {
                const MeshEdge& edge = mesh.edges[(std::size_t)e];
                double q = flux.edge_flux[m][(std::size_t)e] * mesh.outward_sign((int)c, e);
                if (edge.is_trace()) {
                    // use the half flux of this cell
                    q = 0.0;
                    const auto& segs = sys.coupling.segments.at(edge.trace_id);
                    const auto& per_trace = flux.trace_half_flux.at(edge.trace_id);
                    for (std::size_t s = 0; s < segs.size(); ++s)
                        for (std::size_t k = 0; k < segs[s].halves.size(); ++k)
                            if (segs[s].halves[k].mesh == (int)m &&
                                segs[s].halves[k].cell == (int)c && segs[s].halves[k].edge == e)
                                q = per_trace[s][k];
                }
                const Vec2 xe = (mesh.vertices[edge.v0] + mesh.vertices[edge.v1]) * 0.5;
                u = u + (xe - xc) * q;
            }
            flux.cell_velocity[m][c] = u * (1.0 / mesh.cell_area((int)c));
        }
    }
    return flux;
}

/// Per-cell conservation residual |sum of outward fluxes - source|.
inline double max_cell_residual(const NetworkMesh& nm, const TpfaSystem& sys,
                                const FluxField& flux) {
    std::vector<double> residual(sys.index.total, 0.0);
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (edge.is_trace()) continue;
            const double q = flux.edge_flux[m][e];
            residual[sys.index((int)m, edge.cell_left)] += q;
            if (edge.cell_right >= 0) residual[sys.index((int)m, edge.cell_right)] -= q;
        }
    }
    sys.coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        const auto& hf = flux.trace_half_flux.at(tid)[s];
        for (std::size_t k = 0; k < seg.halves.size(); ++k)
            residual[sys.index(seg.halves[k].mesh, seg.halves[k].cell)] += hf[k];
    });
    double worst = 0.0;
    for (std::size_t c = 0; c < residual.size(); ++c)
        worst = std::max(worst, std::abs(residual[c] - sys.cell_source[c]));
    return worst;
}

}  // namespace dfn
