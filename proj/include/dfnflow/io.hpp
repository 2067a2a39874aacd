#pragma once

// File formats: the line-oriented DFN geometry format, the mesh text format
// and an ASCII MSH v2 import path for externally generated meshes.
//
// Geometry format (UTF-8, '#' comments and blank lines ignored):
//   FRACTURE <id> <n_vertices>
//   <x> <y> <z>                 x n, 17 significant digits
//   EDGE <k> DIR <head> | EDGE <k> NEU        x n
//
// Mesh format, one block per fracture:
//   MESH <fracture_id>
//   V <n>  followed by n "x y" lines (local frame coordinates)
//   C <n>  followed by n "<k> i0 ... i(k-1)" lines
//   TRACEEDGE <trace_id> <v0> <v1>            in chain order
//
// MSH v2 import: nodes in 3D; 2D elements (type 2) carry the fracture id as
// their physical tag; 1D elements (type 1) with physical tag >= 1000 mark
// trace edges of trace (tag - 1000).

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dfnflow/conforming.hpp"
#include "dfnflow/geometry.hpp"
#include "dfnflow/mesh.hpp"

namespace dfn {

inline void save_geometry(const FractureNetwork& net, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "# DFN geometry, %zu fractures\n", net.fractures.size());
    for (const Fracture& fr : net.fractures) {
        std::fprintf(f, "FRACTURE %d %zu\n", fr.id, fr.n_vertices());
        for (const Vec3& v : fr.vertices3d) std::fprintf(f, "%.17g %.17g %.17g\n", v.x, v.y, v.z);
        for (std::size_t k = 0; k < fr.boundary_tags.size(); ++k) {
            const EdgeTag& t = fr.boundary_tags[k];
            if (t.kind == BcKind::dirichlet)
                std::fprintf(f, "EDGE %zu DIR %.17g\n", k, t.head);
            else
                std::fprintf(f, "EDGE %zu NEU\n", k);
        }
    }
    std::fclose(f);
}

inline FractureNetwork load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<Fracture> fractures;
    std::string line;
    int line_no = 0;
    auto parse_error = [&](const std::string& what) {
        return Error(path + ":" + std::to_string(line_no) + ": " + what);
    };
    auto next_content = [&](std::string& out) {
        while (std::getline(in, line)) {
            ++line_no;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            out = line;
            return true;
        }
        return false;
    };
    std::string cur;
    bool have = next_content(cur);
    while (have) {
        std::istringstream head(cur);
        std::string kw;
        int id = 0;
        std::size_t nv = 0;
        head >> kw >> id >> nv;
        if (kw != "FRACTURE" || head.fail()) throw parse_error("expected 'FRACTURE <id> <n>'");
        if (nv < 3) throw Error("fracture " + std::to_string(id) + ": fewer than 3 vertices");
        Fracture fr;
        fr.id = id;
        for (std::size_t k = 0; k < nv; ++k) {
            if (!next_content(cur)) throw parse_error("unexpected end of file in vertex list");
            std::istringstream vs(cur);
            Vec3 v;
            vs >> v.x >> v.y >> v.z;
            if (vs.fail()) throw parse_error("malformed vertex line");
            fr.vertices3d.push_back(v);
        }
        fr.boundary_tags.assign(nv, EdgeTag{});
        for (std::size_t k = 0; k < nv; ++k) {
            if (!next_content(cur)) throw parse_error("unexpected end of file in edge list");
            std::istringstream es(cur);
            std::string ekw, kind;
            std::size_t edge = 0;
            es >> ekw >> edge >> kind;
            if (ekw != "EDGE" || es.fail() || edge >= nv) throw parse_error("malformed EDGE line");
            if (kind == "DIR") {
                double h = 0.0;
                es >> h;
                if (es.fail()) throw parse_error("EDGE DIR without head value");
                fr.boundary_tags[edge] = {BcKind::dirichlet, h};
            } else if (kind == "NEU") {
                fr.boundary_tags[edge] = {BcKind::neumann_noflow, 0.0};
            } else {
                throw parse_error("edge kind must be DIR or NEU");
            }
        }
        finalize_fracture(fr);  // throws validation errors naming the fracture
        fractures.push_back(std::move(fr));
        have = next_content(cur);
    }
    if (fractures.empty()) throw Error(path + ": no fractures found");
    return build_network(std::move(fractures));
}

inline void save_mesh(const NetworkMesh& nm, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    for (const FractureMesh& mesh : nm.meshes) {
        std::fprintf(f, "MESH %d\n", mesh.fracture_id);
        std::fprintf(f, "V %zu\n", mesh.vertices.size());
        for (const Vec2& v : mesh.vertices) std::fprintf(f, "%.17g %.17g\n", v.x, v.y);
        std::fprintf(f, "C %zu\n", mesh.cells.size());
        for (const auto& cell : mesh.cells) {
            std::fprintf(f, "%zu", cell.size());
            for (int v : cell) std::fprintf(f, " %d", v);
            std::fprintf(f, "\n");
        }
        for (const auto& [tid, chain] : mesh.trace_edges)
            for (int e : chain)
                std::fprintf(f, "TRACEEDGE %d %d %d\n", tid, mesh.edges[(std::size_t)e].v0,
                             mesh.edges[(std::size_t)e].v1);
    }
    std::fclose(f);
}

namespace detail {

/// Assign polygon-edge tags to the boundary edges of a raw mesh, rebuild the
/// edge table with trace markers, order the chains and build the matching.
inline NetworkMesh bind_meshes(const FractureNetwork& net,
                               std::vector<FractureMesh> meshes,
                               std::map<int, std::map<int, std::vector<std::pair<int, int>>>>
                                   trace_vertex_pairs /* fracture -> trace -> (v0,v1) list */) {
    NetworkMesh nm;
    nm.network = &net;
    for (auto& mesh : meshes) {
        const Fracture& fr = net.fracture(mesh.fracture_id);
        mesh.build_edges(nullptr);
        // mark trace edges
        std::map<std::pair<int, int>, std::pair<int, int>> marks;
        auto tp = trace_vertex_pairs.find(mesh.fracture_id);
        if (tp != trace_vertex_pairs.end()) {
            for (const auto& [tid, pairs] : tp->second)
                for (const auto& [v0, v1] : pairs)
                    marks[{std::min(v0, v1), std::max(v0, v1)}] = {-1, tid};
        }
        // boundary edges inherit the polygon edge whose segment contains them
        const std::size_t npoly = fr.vertices2d.size();
        for (const MeshEdge& e : mesh.edges) {
            if (!e.is_boundary()) continue;
            const auto key = std::make_pair(std::min(e.v0, e.v1), std::max(e.v0, e.v1));
            if (marks.count(key)) continue;  // trace running on the boundary
            const Vec2 mid = (mesh.vertices[(std::size_t)e.v0] + mesh.vertices[(std::size_t)e.v1]) * 0.5;
            int best = -1;
            double best_d = 1e300;
            for (std::size_t k = 0; k < npoly; ++k) {
                const double d = detail::point_segment_distance(
                    mid, fr.vertices2d[k], fr.vertices2d[(k + 1) % npoly]);
                if (d < best_d) {
                    best_d = d;
                    best = (int)k;
                }
            }
            if (best < 0 || best_d > 1e-6 * std::max(1.0, fr.diameter()))
                throw Error("boundary edge of fracture " + std::to_string(fr.id) +
                            " does not lie on the polygon boundary");
            marks[key] = {best, -1};
        }
        mesh.build_edges(&marks);
        // chains: order trace edges along the trace
        if (tp != trace_vertex_pairs.end()) {
            std::map<std::pair<int, int>, int> edge_index;
            for (std::size_t e = 0; e < mesh.edges.size(); ++e)
                edge_index[{std::min(mesh.edges[e].v0, mesh.edges[e].v1),
                            std::max(mesh.edges[e].v0, mesh.edges[e].v1)}] = (int)e;
            for (const auto& [tid, pairs] : tp->second) {
                const Trace& tr = net.traces[(std::size_t)tid];
                const bool first = tr.fractures.first == mesh.fracture_id;
                const Vec2 a = first ? tr.segment_local_i[0] : tr.segment_local_j[0];
                const Vec2 b = first ? tr.segment_local_i[1] : tr.segment_local_j[1];
                const Vec2 dir = b - a;
                const double len2 = dot(dir, dir);
                std::vector<std::pair<double, int>> ordered;
                for (const auto& [v0, v1] : pairs) {
                    auto it = edge_index.find({std::min(v0, v1), std::max(v0, v1)});
                    if (it == edge_index.end())
                        throw Error("trace edge not found in mesh of fracture " +
                                    std::to_string(mesh.fracture_id));
                    const Vec2 mid =
                        (mesh.vertices[(std::size_t)v0] + mesh.vertices[(std::size_t)v1]) * 0.5;
                    ordered.emplace_back(dot(mid - a, dir) / len2, it->second);
                }
                std::sort(ordered.begin(), ordered.end());
                std::vector<int> chain;
                for (const auto& [s, e] : ordered) chain.push_back(e);
                mesh.trace_edges[tid] = std::move(chain);
            }
        }
        nm.meshes.push_back(std::move(mesh));
    }
    // matching by chain position
    for (const Trace& tr : net.traces) {
        const int mi = nm.mesh_index(tr.fractures.first);
        const int mj = nm.mesh_index(tr.fractures.second);
        const auto ci = nm.meshes[(std::size_t)mi].trace_edges.find(tr.id);
        const auto cj = nm.meshes[(std::size_t)mj].trace_edges.find(tr.id);
        if (ci == nm.meshes[(std::size_t)mi].trace_edges.end() ||
            cj == nm.meshes[(std::size_t)mj].trace_edges.end())
            throw Error("imported mesh misses trace " + std::to_string(tr.id));
        if (ci->second.size() != cj->second.size())
            throw Error("imported chains of trace " + std::to_string(tr.id) + " do not match");
        std::vector<TraceSegmentPair> pairs(ci->second.size());
        for (std::size_t k = 0; k < pairs.size(); ++k)
            pairs[k] = {ci->second[k], cj->second[k]};
        nm.trace_matching[tr.id] = std::move(pairs);
    }
    validate_matching(nm);
    for (std::size_t m = 0; m < nm.meshes.size(); ++m)
        validate_mesh(nm.meshes[m], net.fracture(nm.meshes[m].fracture_id), &net.traces);
    return nm;
}

}  // namespace detail

inline NetworkMesh load_mesh(const FractureNetwork& net, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<FractureMesh> meshes;
    std::map<int, std::map<int, std::vector<std::pair<int, int>>>> trace_pairs;
    std::string kw;
    FractureMesh* cur = nullptr;
    while (in >> kw) {
        if (kw == "MESH") {
            int fid = 0;
            in >> fid;
            meshes.emplace_back();
            cur = &meshes.back();
            cur->fracture_id = fid;
        } else if (kw == "V") {
            std::size_t n = 0;
            in >> n;
            if (!cur) throw Error(path + ": V before MESH");
            cur->vertices.resize(n);
            for (auto& v : cur->vertices) in >> v.x >> v.y;
        } else if (kw == "C") {
            std::size_t n = 0;
            in >> n;
            if (!cur) throw Error(path + ": C before MESH");
            cur->cells.resize(n);
            for (auto& cell : cur->cells) {
                std::size_t k = 0;
                in >> k;
                cell.resize(k);
                for (auto& v : cell) in >> v;
            }
        } else if (kw == "TRACEEDGE") {
            int tid = 0, v0 = 0, v1 = 0;
            in >> tid >> v0 >> v1;
            if (!cur) throw Error(path + ": TRACEEDGE before MESH");
            trace_pairs[cur->fracture_id][tid].push_back({v0, v1});
        } else {
            throw Error(path + ": unknown keyword '" + kw + "'");
        }
        if (in.fail()) throw Error(path + ": malformed mesh file near '" + kw + "'");
    }
    if (meshes.empty()) throw Error(path + ": no meshes found");
    return detail::bind_meshes(net, std::move(meshes), std::move(trace_pairs));
}

/// ASCII MSH v2 import. Physical tags: triangles tagged with the fracture id,
/// lines tagged (1000 + trace id). Nodes are 3D and get projected into the
/// fracture frames.
inline NetworkMesh import_msh(const FractureNetwork& net, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    std::map<long, Vec3> nodes;
    struct El {
        int type;
        int tag;
        std::vector<long> nodes;
    };
    std::vector<El> elements;
    while (std::getline(in, line)) {
        if (line.rfind("$Nodes", 0) == 0) {
            std::size_t n = 0;
            in >> n;
            for (std::size_t k = 0; k < n; ++k) {
                long id = 0;
                Vec3 p;
                in >> id >> p.x >> p.y >> p.z;
                nodes[id] = p;
            }
        } else if (line.rfind("$Elements", 0) == 0) {
            std::size_t n = 0;
            in >> n;
            for (std::size_t k = 0; k < n; ++k) {
                long id = 0;
                int type = 0, ntags = 0;
                in >> id >> type >> ntags;
                int tag = 0;
                for (int t = 0; t < ntags; ++t) {
                    int v = 0;
                    in >> v;
                    if (t == 0) tag = v;
                }
                const int nn = type == 1 ? 2 : type == 2 ? 3 : -1;
                if (nn < 0) {
                    // skip unsupported element types (points etc.)
                    std::getline(in, line);
                    continue;
                }
                El el;
                el.type = type;
                el.tag = tag;
                el.nodes.resize((std::size_t)nn);
                for (auto& v : el.nodes) in >> v;
                elements.push_back(std::move(el));
            }
            if (in.fail()) throw Error(path + ": malformed $Elements section");
        }
    }
    if (nodes.empty() || elements.empty()) throw Error(path + ": no nodes or elements found");

    // per fracture: local vertex numbering of the referenced nodes
    std::vector<FractureMesh> meshes;
    std::map<int, std::map<long, int>> local;
    std::map<int, std::size_t> mesh_of;
    auto mesh_for = [&](int fid) -> FractureMesh& {
        auto it = mesh_of.find(fid);
        if (it != mesh_of.end()) return meshes[it->second];
        mesh_of[fid] = meshes.size();
        meshes.emplace_back();
        meshes.back().fracture_id = fid;
        return meshes.back();
    };
    auto local_vertex = [&](int fid, long node) {
        const Fracture& fr = net.fracture(fid);
        auto& lut = local[fid];
        auto it = lut.find(node);
        if (it != lut.end()) return it->second;
        FractureMesh& mesh = mesh_for(fid);
        const Vec3& p = nodes.at(node);
        if (std::abs(dot(p - fr.frame.origin, fr.frame.normal)) > 1e-6 * std::max(1.0, fr.diameter()))
            throw Error("msh node off the plane of fracture " + std::to_string(fid));
        const int idx = (int)mesh.vertices.size();
        mesh.vertices.push_back(fr.frame.to_local(p));
        lut[node] = idx;
        return idx;
    };
    for (const El& el : elements) {
        if (el.type != 2) continue;
        FractureMesh& mesh = mesh_for(el.tag);
        std::vector<int> cell(3);
        for (int k = 0; k < 3; ++k) cell[(std::size_t)k] = local_vertex(el.tag, el.nodes[(std::size_t)k]);
        // enforce CCW
        const Vec2 a = mesh.vertices[(std::size_t)cell[0]];
        const Vec2 b = mesh.vertices[(std::size_t)cell[1]];
        const Vec2 c = mesh.vertices[(std::size_t)cell[2]];
        if (cross(b - a, c - a) < 0.0) std::swap(cell[1], cell[2]);
        mesh.cells.push_back(std::move(cell));
    }
    // trace edges: a 1D element lies in both incident fractures
    std::map<int, std::map<int, std::vector<std::pair<int, int>>>> trace_pairs;
    for (const El& el : elements) {
        if (el.type != 1 || el.tag < 1000) continue;
        const int tid = el.tag - 1000;
        if (tid < 0 || tid >= (int)net.traces.size())
            throw Error(path + ": line element references unknown trace " + std::to_string(tid));
        const Trace& tr = net.traces[(std::size_t)tid];
        for (int fid : {tr.fractures.first, tr.fractures.second}) {
            const int v0 = local_vertex(fid, el.nodes[0]);
            const int v1 = local_vertex(fid, el.nodes[1]);
            trace_pairs[fid][tid].push_back({v0, v1});
        }
    }
    return detail::bind_meshes(net, std::move(meshes), std::move(trace_pairs));
}

}  // namespace dfn
