#pragma once

// Per-fracture 2D meshes conforming to traces, and the network-level mesh
// with the trace-segment matching between incident fractures.

#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dfnflow/geometry.hpp"

namespace dfn {

/// Edge of a fracture mesh. The canonical direction runs from the lower to
/// the higher vertex index; cell_left/cell_right are the cells on either side
/// of that direction (right = -1 on the boundary). The stored unit normal
/// points from left to right, i.e. outward on boundary edges.
struct MeshEdge {
    int v0 = -1, v1 = -1;        // v0 < v1
    int cell_left = -1;
    int cell_right = -1;
    int boundary_edge = -1;      // polygon edge index (tag lookup), boundary only
    int trace_id = -1;           // trace this edge lies on, or -1
    Vec2 normal;                 // unit, left -> right
    double length = 0.0;

    bool is_boundary() const { return cell_right < 0; }
    bool is_trace() const { return trace_id >= 0; }
};

struct MeshStatistics {
    std::size_t cells = 0;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    double min_angle_deg = 0.0;
    double h_max = 0.0;
    double h_min = 0.0;
};

/// 2D mesh of one fracture in its local frame. Cells are CCW simple polygons
/// (triangles unless the mesh was coarsened).
struct FractureMesh {
    int fracture_id = -1;
    std::vector<Vec2> vertices;
    std::vector<std::vector<int>> cells;
    std::vector<MeshEdge> edges;                   // derived, see build_edges()
    std::vector<std::vector<int>> cell_edges;      // per cell, edge k between vertex k,k+1
    std::map<int, std::vector<int>> trace_edges;   // trace id -> ordered edge chain

    double cell_area(int c) const {
        const auto& cell = cells[c];
        double a = 0.0;
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const Vec2& p = vertices[cell[k]];
            const Vec2& q = vertices[cell[(k + 1) % cell.size()]];
            a += p.x * q.y - q.x * p.y;
        }
        return 0.5 * a;
    }

    Vec2 cell_centroid(int c) const {
        const auto& cell = cells[c];
        double a = 0.0;
        Vec2 ctr{0.0, 0.0};
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const Vec2& p = vertices[cell[k]];
            const Vec2& q = vertices[cell[(k + 1) % cell.size()]];
            const double w = p.x * q.y - q.x * p.y;
            a += w;
            ctr.x += (p.x + q.x) * w;
            ctr.y += (p.y + q.y) * w;
        }
        a *= 0.5;
        return {ctr.x / (6.0 * a), ctr.y / (6.0 * a)};
    }

    double cell_diameter(int c) const {
        const auto& cell = cells[c];
        double d = 0.0;
        for (std::size_t a = 0; a < cell.size(); ++a)
            for (std::size_t b = a + 1; b < cell.size(); ++b)
                d = std::max(d, norm(vertices[cell[a]] - vertices[cell[b]]));
        return d;
    }

    double total_area() const {
        double a = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c) a += cell_area(static_cast<int>(c));
        return a;
    }

    /// Rebuild the edge table from the cell list. Boundary/trace markers of
    /// surviving vertex pairs are carried over from `marks` when provided.
    void build_edges(const std::map<std::pair<int, int>, std::pair<int, int>>* marks = nullptr) {
        edges.clear();
        cell_edges.assign(cells.size(), {});
        std::map<std::pair<int, int>, int> index;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& cell = cells[c];
            cell_edges[c].resize(cell.size());
            for (std::size_t k = 0; k < cell.size(); ++k) {
                int a = cell[k], b = cell[(k + 1) % cell.size()];
                const bool canonical = a < b;
                const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
                auto it = index.find(key);
                if (it == index.end()) {
                    MeshEdge e;
                    e.v0 = key.first;
                    e.v1 = key.second;
                    const Vec2 d = vertices[e.v1] - vertices[e.v0];
                    e.length = norm(d);
                    if (e.length <= 0.0) throw Error("mesh edge of zero length");
                    e.normal = {d.y / e.length, -d.x / e.length};
                    if (marks) {
                        auto mk = marks->find(key);
                        if (mk != marks->end()) {
                            e.boundary_edge = mk->second.first;
                            e.trace_id = mk->second.second;
                        }
                    }
                    it = index.emplace(key, static_cast<int>(edges.size())).first;
                    edges.push_back(e);
                }
                MeshEdge& e = edges[it->second];
                if (canonical) {
                    if (e.cell_left >= 0) throw Error("edge with two left cells: mesh not orientable");
                    e.cell_left = static_cast<int>(c);
                } else {
                    if (e.cell_right >= 0) throw Error("edge with two right cells: mesh not orientable");
                    e.cell_right = static_cast<int>(c);
                }
                cell_edges[c][k] = it->second;
            }
        }
        // canonical direction may leave a boundary edge with only a right cell;
        // flip so the single cell is always the left one and the normal points out
        for (MeshEdge& e : edges) {
            if (e.cell_left < 0 && e.cell_right >= 0) {
                std::swap(e.cell_left, e.cell_right);
                std::swap(e.v0, e.v1);
                e.normal = e.normal * -1.0;
            }
            if (e.cell_left < 0) throw Error("dangling mesh edge");
        }
    }

    /// Outward (from the given cell) sign of the edge normal.
    double outward_sign(int cell, int edge) const {
        const MeshEdge& e = edges[edge];
        if (e.cell_left == cell) return 1.0;
        if (e.cell_right == cell) return -1.0;
        throw Error("cell does not touch edge");
    }
};

struct TraceSegmentPair {
    int edge_i = -1;  // edge index in the mesh of the first (lower-id) fracture
    int edge_j = -1;  // matching edge in the second fracture's mesh
};

/// Meshes of all fractures plus the per-trace matched segment pairs.
struct NetworkMesh {
    const FractureNetwork* network = nullptr;
    std::vector<FractureMesh> meshes;  // aligned with network->fractures
    std::map<int, std::vector<TraceSegmentPair>> trace_matching;

    int mesh_index(int fracture_id) const {
        for (std::size_t m = 0; m < meshes.size(); ++m)
            if (meshes[m].fracture_id == fracture_id) return static_cast<int>(m);
        throw Error("no mesh for fracture " + std::to_string(fracture_id));
    }

    std::size_t total_cells() const {
        std::size_t n = 0;
        for (const auto& m : meshes) n += m.cells.size();
        return n;
    }
};

inline MeshStatistics mesh_statistics(const FractureMesh& mesh) {
    MeshStatistics st;
    st.cells = mesh.cells.size();
    st.vertices = mesh.vertices.size();
    st.edges = mesh.edges.size();
    st.min_angle_deg = 180.0;
    st.h_max = 0.0;
    st.h_min = 1e300;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& cell = mesh.cells[c];
        const std::size_t n = cell.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2& prev = mesh.vertices[cell[(k + n - 1) % n]];
            const Vec2& cur = mesh.vertices[cell[k]];
            const Vec2& next = mesh.vertices[cell[(k + 1) % n]];
            const Vec2 u = prev - cur, v = next - cur;
            const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / M_PI;
            st.min_angle_deg = std::min(st.min_angle_deg, ang);
        }
        const double d = mesh.cell_diameter(static_cast<int>(c));
        st.h_max = std::max(st.h_max, d);
        st.h_min = std::min(st.h_min, d);
    }
    if (mesh.cells.empty()) {
        st.min_angle_deg = 0.0;
        st.h_min = 0.0;
    }
    return st;
}

inline MeshStatistics mesh_statistics(const NetworkMesh& nm) {
    MeshStatistics st;
    st.min_angle_deg = 180.0;
    st.h_min = 1e300;
    for (const auto& m : nm.meshes) {
        const MeshStatistics s = mesh_statistics(m);
        st.cells += s.cells;
        st.vertices += s.vertices;
        st.edges += s.edges;
        st.min_angle_deg = std::min(st.min_angle_deg, s.min_angle_deg);
        st.h_max = std::max(st.h_max, s.h_max);
        st.h_min = std::min(st.h_min, s.h_min);
    }
    if (nm.meshes.empty()) {
        st.min_angle_deg = 0.0;
        st.h_min = 0.0;
    }
    return st;
}

/// Check the FractureMesh invariants: CCW simple positive-area cells, a
/// consistent edge table and trace chains that cover each trace exactly.
inline void validate_mesh(const FractureMesh& mesh, const Fracture& fracture,
                          const std::vector<Trace>* traces = nullptr) {
    if (mesh.cells.empty()) throw Error("mesh has no cells");
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        if (mesh.cells[c].size() < 3) throw Error("cell with fewer than 3 vertices");
        if (mesh.cell_area(static_cast<int>(c)) <= 0.0)
            throw Error("cell " + std::to_string(c) + " not CCW / zero area");
    }
    for (const MeshEdge& e : mesh.edges) {
        if (e.cell_left < 0) throw Error("edge without left cell");
        if (e.is_boundary() && e.boundary_edge < 0 && !e.is_trace())
            throw Error("boundary edge without polygon-edge tag");
    }
    // trace chains cover the trace segments
    if (traces) {
        for (const auto& [tid, chain] : mesh.trace_edges) {
            const Trace& tr = (*traces)[static_cast<std::size_t>(tid)];
            double covered = 0.0;
            for (int ei : chain) covered += mesh.edges[ei].length;
            const double len = tr.length();
            if (std::abs(covered - len) > 1e-9 * std::max(1.0, len))
                throw Error("trace " + std::to_string(tid) + " chain does not cover the segment");
        }
    }
    // total area matches the polygon
    const double poly_area = polygon_area(fracture.vertices2d);
    if (std::abs(mesh.total_area() - poly_area) > 1e-9 * poly_area)
        throw Error("mesh area does not match fracture area");
}

/// Network-level conformity: matched edges coincide geometrically in 3D.
inline void validate_matching(const NetworkMesh& nm) {
    if (!nm.network) throw Error("network mesh not bound to a network");
    for (const auto& [tid, pairs] : nm.trace_matching) {
        const Trace& tr = nm.network->traces[static_cast<std::size_t>(tid)];
        const Fracture& fi = nm.network->fracture(tr.fractures.first);
        const Fracture& fj = nm.network->fracture(tr.fractures.second);
        const FractureMesh& mi = nm.meshes[static_cast<std::size_t>(nm.mesh_index(fi.id))];
        const FractureMesh& mj = nm.meshes[static_cast<std::size_t>(nm.mesh_index(fj.id))];
        const double tol = 1e-9 * std::max(1.0, tr.length());
        for (const TraceSegmentPair& sp : pairs) {
            const MeshEdge& ei = mi.edges[sp.edge_i];
            const MeshEdge& ej = mj.edges[sp.edge_j];
            const Vec3 a0 = fi.frame.to_world(mi.vertices[ei.v0]);
            const Vec3 a1 = fi.frame.to_world(mi.vertices[ei.v1]);
            const Vec3 b0 = fj.frame.to_world(mj.vertices[ej.v0]);
            const Vec3 b1 = fj.frame.to_world(mj.vertices[ej.v1]);
            const double direct = norm(a0 - b0) + norm(a1 - b1);
            const double flipped = norm(a0 - b1) + norm(a1 - b0);
            if (std::min(direct, flipped) > tol)
                throw Error("trace " + std::to_string(tid) + ": matched edges do not coincide");
        }
    }
}

}  // namespace dfn
