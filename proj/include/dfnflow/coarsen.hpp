#pragma once

// Agglomeration of triangular meshes into polygonal ones for the VEM path:
// greedy merging seeded by descending cell area, across the longest shared
// non-constraint edge, keeping every merged cell simple and star-shaped.
// Trace and boundary edges are never removed, and the vertex set is
// untouched (chain vertices survive as hanging nodes of the polygons).

#include <queue>

#include "dfnflow/darcy_vem.hpp"
#include "dfnflow/mesh.hpp"

namespace dfn {

namespace detail {

/// Merge two CCW polygons sharing exactly one contiguous chain of edges;
/// returns the merged CCW ring or nothing if the shared part is not a single
/// chain (which would pinch a hole).
inline std::optional<std::vector<int>> merge_rings(const std::vector<int>& a,
                                                   const std::vector<int>& b) {
    const std::size_t na = a.size(), nb = b.size();
    std::set<std::pair<int, int>> b_edges;
    for (std::size_t k = 0; k < nb; ++k) {
        const int u = b[k], v = b[(k + 1) % nb];
        b_edges.insert({std::min(u, v), std::max(u, v)});
    }
    std::vector<char> shared(na, 0);
    std::size_t n_shared = 0;
    for (std::size_t k = 0; k < na; ++k) {
        const int u = a[k], v = a[(k + 1) % na];
        if (b_edges.count({std::min(u, v), std::max(u, v)})) {
            shared[k] = 1;
            ++n_shared;
        }
    }
    if (n_shared == 0 || n_shared >= na || n_shared >= nb) return std::nullopt;
    // the shared edges must form one contiguous run along a
    std::size_t runs = 0;
    for (std::size_t k = 0; k < na; ++k)
        if (shared[k] && !shared[(k + na - 1) % na]) ++runs;
    if (runs != 1) return std::nullopt;
    // chain extent on a: first shared edge k0, run length r
    std::size_t k0 = 0;
    while (!(shared[k0] && !shared[(k0 + na - 1) % na])) ++k0;
    std::size_t r = 0;
    while (shared[(k0 + r) % na]) ++r;
    const int chain_begin = a[k0];                 // where a enters the chain
    const int chain_end = a[(k0 + r) % na];        // where a leaves the chain
    // walk a over its non-shared edges: chain_end -> ... -> chain_begin
    std::vector<int> out;
    for (std::size_t k = (k0 + r) % na; a[k] != chain_begin; k = (k + 1) % na) out.push_back(a[k]);
    out.push_back(chain_begin);
    // b traverses the chain reversed, arriving at chain_begin; continue along
    // b's non-shared edges from there up to chain_end
    std::size_t bk = 0;
    while (b[bk] != chain_begin) {
        ++bk;
        if (bk >= nb) return std::nullopt;
    }
    std::size_t steps = 0;
    for (bk = (bk + 1) % nb; b[bk] != chain_end; bk = (bk + 1) % nb) {
        out.push_back(b[bk]);
        if (++steps > nb) return std::nullopt;
    }
    // simple ring, no repeated vertices
    std::set<int> uniq(out.begin(), out.end());
    if (uniq.size() != out.size() || out.size() < 3) return std::nullopt;
    return out;
}

}  // namespace detail

/// Greedy coarsening toward target_ratio * (input cell count). Falls back to
/// keeping triangles whenever a merge would break simplicity or
/// star-shapedness. Trace/boundary edges and the vertex set are preserved.
inline NetworkMesh coarsen_to_polygons(const NetworkMesh& input, double target_ratio) {
    if (!(target_ratio > 0.0 && target_ratio < 1.0))
        throw Error("coarsen_to_polygons: target_ratio must lie in (0,1)");
    NetworkMesh out;
    out.network = input.network;

    for (std::size_t m = 0; m < input.meshes.size(); ++m) {
        const FractureMesh& mesh = input.meshes[m];
        const std::size_t n_in = mesh.cells.size();
        const std::size_t target =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(target_ratio * (double)n_in)));

        // live polygons, merged in place
        std::vector<std::vector<int>> rings = mesh.cells;
        std::vector<double> area(n_in);
        std::vector<char> alive(n_in, 1);
        for (std::size_t c = 0; c < n_in; ++c) area[c] = mesh.cell_area((int)c);

        // cell adjacency over removable (interior non-trace) edges
        struct Adj {
            int other;
            double len;
            std::pair<int, int> verts;
        };
        std::vector<std::vector<Adj>> adj(n_in);
        for (const MeshEdge& e : mesh.edges) {
            if (e.is_boundary() || e.is_trace()) continue;
            adj[(std::size_t)e.cell_left].push_back({e.cell_right, e.length, {e.v0, e.v1}});
            adj[(std::size_t)e.cell_right].push_back({e.cell_left, e.length, {e.v0, e.v1}});
        }
        // cluster membership: cells of the input mesh -> live ring index
        std::vector<int> owner(n_in);
        std::iota(owner.begin(), owner.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (owner[(std::size_t)x] != x) x = owner[(std::size_t)x] = owner[(std::size_t)owner[(std::size_t)x]];
            return x;
        };

        std::size_t live = n_in;
        // seeds in descending area order, deterministic tie-break by index
        std::vector<int> order(n_in);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return area[(std::size_t)a] != area[(std::size_t)b] ? area[(std::size_t)a] > area[(std::size_t)b]
                                                                : a < b;
        });
        bool progress = true;
        while (live > target && progress) {
            progress = false;
            for (int seed : order) {
                if (live <= target) break;
                const int rs = find(seed);
                if (!alive[(std::size_t)rs]) continue;
                // collect mergeable neighbors of the cluster, longest shared edge first
                std::map<int, double> shared_len;
                for (std::size_t c = 0; c < n_in; ++c) {
                    if (find((int)c) != rs) continue;
                    for (const Adj& a2 : adj[c]) {
                        const int ro = find(a2.other);
                        if (ro == rs || !alive[(std::size_t)ro]) continue;
                        shared_len[ro] += a2.len;
                    }
                }
                std::vector<std::pair<double, int>> cand;
                for (const auto& [ro, len] : shared_len) cand.push_back({len, ro});
                std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
                    return x.first != y.first ? x.first > y.first : x.second < y.second;
                });
                for (const auto& [len, ro] : cand) {
                    auto merged = detail::merge_rings(rings[(std::size_t)rs], rings[(std::size_t)ro]);
                    if (!merged) continue;
                    std::vector<Vec2> poly;
                    poly.reserve(merged->size());
                    for (int v : *merged) poly.push_back(mesh.vertices[(std::size_t)v]);
                    if (polygon_area(poly) <= 0.0) continue;
                    bool simple = true;
                    for (std::size_t i = 0; i < poly.size() && simple; ++i)
                        for (std::size_t j = i + 1; j < poly.size(); ++j) {
                            if (j == i + 1 || (i == 0 && j + 1 == poly.size())) continue;
                            if (segments_intersect(poly[i], poly[(i + 1) % poly.size()], poly[j],
                                                   poly[(j + 1) % poly.size()])) {
                                simple = false;
                                break;
                            }
                        }
                    if (!simple || !vem::star_shaped(poly)) continue;
                    rings[(std::size_t)rs] = *merged;
                    alive[(std::size_t)ro] = 0;
                    owner[(std::size_t)ro] = rs;
                    --live;
                    progress = true;
                    break;
                }
            }
        }

        FractureMesh cm;
        cm.fracture_id = mesh.fracture_id;
        cm.vertices = mesh.vertices;  // vertex set unchanged
        for (std::size_t c = 0; c < n_in; ++c)
            if (alive[c] && find((int)c) == (int)c) cm.cells.push_back(rings[c]);
        std::map<std::pair<int, int>, std::pair<int, int>> marks;
        for (const MeshEdge& e : mesh.edges)
            if (e.is_boundary() || e.is_trace())
                marks[{std::min(e.v0, e.v1), std::max(e.v0, e.v1)}] = {e.boundary_edge, e.trace_id};
        cm.build_edges(&marks);
        // rebuild the trace chains against the new edge table
        std::map<std::pair<int, int>, int> edge_index;
        for (std::size_t e = 0; e < cm.edges.size(); ++e)
            edge_index[{std::min(cm.edges[e].v0, cm.edges[e].v1),
                        std::max(cm.edges[e].v0, cm.edges[e].v1)}] = (int)e;
        for (const auto& [tid, chain] : mesh.trace_edges) {
            std::vector<int> new_chain;
            for (int old_e : chain) {
                const MeshEdge& oe = mesh.edges[(std::size_t)old_e];
                auto it = edge_index.find({std::min(oe.v0, oe.v1), std::max(oe.v0, oe.v1)});
                if (it == edge_index.end())
                    throw Error("coarsening destroyed a trace edge (trace " + std::to_string(tid) +
                                ")");
                new_chain.push_back(it->second);
            }
            cm.trace_edges[tid] = std::move(new_chain);
        }
        out.meshes.push_back(std::move(cm));
    }

    // trace matching carries over segment-by-segment (same vertex geometry)
    for (const auto& [tid, pairs] : input.trace_matching) {
        const Trace& tr = input.network->traces[(std::size_t)tid];
        const int mi = out.mesh_index(tr.fractures.first);
        const int mj = out.mesh_index(tr.fractures.second);
        const auto& ci = out.meshes[(std::size_t)mi].trace_edges.at(tid);
        const auto& cj = out.meshes[(std::size_t)mj].trace_edges.at(tid);
        if (ci.size() != cj.size() || ci.size() != pairs.size())
            throw Error("coarsening broke the trace matching of trace " + std::to_string(tid));
        std::vector<TraceSegmentPair> np(pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k) np[k] = {ci[k], cj[k]};
        out.trace_matching[tid] = std::move(np);
    }
    validate_matching(out);
    return out;
}

}  // namespace dfn
