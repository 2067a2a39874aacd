#pragma once

// Network-level conforming triangulation: subdivide every trace once in 3D,
// project the subdivision into both incident fractures and triangulate each
// fracture against those constraints, so the trace edge chains match
// one-to-one across the network.

#include <functional>
#include <map>

#include "dfnflow/geometry.hpp"
#include "dfnflow/mesh.hpp"
#include "dfnflow/triangulate.hpp"

namespace dfn {

namespace detail {

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + ab * t));
}

struct PslgBuilder {
    cdt::Pslg pslg;
    double tol;

    int add_point(const Vec2& p) {
        for (std::size_t k = 0; k < pslg.points.size(); ++k)
            if (norm(pslg.points[k] - p) <= tol) return static_cast<int>(k);
        pslg.points.push_back(p);
        return static_cast<int>(pslg.points.size()) - 1;
    }
};

}  // namespace detail

/// Conforming triangulation of the whole network. Every trace is subdivided
/// at spacing <= target_h; both incident fractures receive the identical
/// subdivision, so matched chains exist by construction.
inline NetworkMesh triangulate_conforming(const FractureNetwork& net, double target_h,
                                          TriangulationOptions opt = {}) {
    if (!(target_h > 0.0)) throw Error("triangulate_conforming: target_h must be positive");
    opt.target_h = target_h;
    NetworkMesh nm;
    nm.network = &net;

    // global trace subdivisions (3D)
    std::map<int, std::vector<Vec3>> trace_points3d;
    for (const Trace& tr : net.traces) {
        const double len = tr.length();
        const int n = std::max(opt.min_trace_segments,
                               static_cast<int>(std::ceil(len / target_h - 1e-12)));
        std::vector<Vec3> pts;
        pts.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double s = static_cast<double>(k) / n;
            pts.push_back(tr.segment3d[0] + (tr.segment3d[1] - tr.segment3d[0]) * s);
        }
        trace_points3d[tr.id] = std::move(pts);
    }

    for (const Fracture& f : net.fractures) {
        const double diam = f.diameter();
        detail::PslgBuilder pb;
        pb.tol = 1e-9 * std::max(diam, 1.0);

        // local trace chains
        struct LocalChain {
            int trace_id;
            std::vector<Vec2> pts;
            std::vector<int> ids;
        };
        std::vector<LocalChain> chains;
        auto inc = net.incidence.find(f.id);
        if (inc != net.incidence.end()) {
            for (int tid : inc->second) {
                LocalChain lc;
                lc.trace_id = tid;
                for (const Vec3& p : trace_points3d.at(tid)) lc.pts.push_back(f.frame.to_local(p));
                chains.push_back(std::move(lc));
            }
        }

        // crossing traces inside one fracture are not meshable conformingly here
        for (std::size_t a = 0; a < chains.size(); ++a)
            for (std::size_t b = a + 1; b < chains.size(); ++b)
                for (std::size_t i = 0; i + 1 < chains[a].pts.size(); ++i)
                    for (std::size_t j = 0; j + 1 < chains[b].pts.size(); ++j)
                        if (segments_intersect(chains[a].pts[i], chains[a].pts[i + 1],
                                               chains[b].pts[j], chains[b].pts[j + 1]))
                            throw Error("traces " + std::to_string(chains[a].trace_id) + " and " +
                                        std::to_string(chains[b].trace_id) +
                                        " intersect inside fracture " + std::to_string(f.id));

        // boundary chains: polygon corners, forced trace points on the edge,
        // then uniform subdivision of each stretch at spacing <= target_h
        const std::size_t nv = f.vertices2d.size();
        std::vector<int> corner_ids(nv);
        for (std::size_t k = 0; k < nv; ++k) corner_ids[k] = pb.add_point(f.vertices2d[k]);
        for (std::size_t e = 0; e < nv; ++e) {
            const Vec2 a = f.vertices2d[e], b = f.vertices2d[(e + 1) % nv];
            const double elen = norm(b - a);
            // forced points: trace subdivision points sitting on this edge
            std::vector<std::pair<double, Vec2>> forced;
            for (const auto& lc : chains)
                for (const Vec2& p : lc.pts)
                    if (detail::point_segment_distance(p, a, b) <= pb.tol) {
                        const double s = dot(p - a, b - a) / (elen * elen);
                        if (s > 1e-12 && s < 1.0 - 1e-12) forced.emplace_back(s, p);
                    }
            std::sort(forced.begin(), forced.end(),
                      [](const auto& u, const auto& v) { return u.first < v.first; });
            std::vector<std::pair<double, Vec2>> stops;
            stops.emplace_back(0.0, a);
            for (const auto& fp : forced) stops.push_back(fp);
            stops.emplace_back(1.0, b);
            int prev_id = corner_ids[e];
            for (std::size_t s = 0; s + 1 < stops.size(); ++s) {
                const Vec2 p0 = stops[s].second, p1 = stops[s + 1].second;
                const double sub_len = norm(p1 - p0);
                const int n = std::max(1, static_cast<int>(std::ceil(sub_len / target_h - 1e-12)));
                for (int k = 1; k <= n; ++k) {
                    const Vec2 q = (k == n && s + 2 == stops.size())
                                       ? f.vertices2d[(e + 1) % nv]
                                       : p0 + (p1 - p0) * (static_cast<double>(k) / n);
                    const int id = pb.add_point(q);
                    if (id != prev_id)
                        pb.pslg.segments.push_back({prev_id, id, cdt::Constraint{(int)e, -1, -1}});
                    prev_id = id;
                }
            }
        }

        // trace constraint segments
        for (auto& lc : chains) {
            lc.ids.reserve(lc.pts.size());
            for (const Vec2& p : lc.pts) lc.ids.push_back(pb.add_point(p));
            for (std::size_t k = 0; k + 1 < lc.ids.size(); ++k)
                if (lc.ids[k] != lc.ids[k + 1])
                    pb.pslg.segments.push_back(
                        {lc.ids[k], lc.ids[k + 1], cdt::Constraint{-1, lc.trace_id, (int)k}});
        }

        // size field: graded toward traces whose subdivision is finer than target_h
        struct TraceSize {
            std::vector<std::pair<Vec2, Vec2>> segs;
            double local;
        };
        std::vector<TraceSize> size_sources;
        for (const auto& lc : chains) {
            TraceSize ts;
            double len = 0.0;
            for (std::size_t k = 0; k + 1 < lc.pts.size(); ++k) {
                ts.segs.emplace_back(lc.pts[k], lc.pts[k + 1]);
                len += norm(lc.pts[k + 1] - lc.pts[k]);
            }
            ts.local = opt.trace_size_fraction * len;
            if (ts.local < target_h) size_sources.push_back(std::move(ts));
        }
        const double grading = opt.grading;
        auto size_field = [target_h, grading, size_sources](const Vec2& p) {
            double s = target_h;
            for (const auto& ts : size_sources) {
                double d = 1e300;
                for (const auto& [u, v] : ts.segs)
                    d = std::min(d, detail::point_segment_distance(p, u, v));
                s = std::min(s, ts.local + grading * d);
            }
            return s;
        };

        cdt::Triangulator tri(pb.pslg, opt, size_field, "fracture " + std::to_string(f.id));
        FractureMesh mesh = tri.extract(f.id);

        // trace edge chains in the extracted mesh
        std::map<std::pair<int, int>, int> edge_index;
        for (std::size_t e = 0; e < mesh.edges.size(); ++e)
            edge_index[{std::min(mesh.edges[e].v0, mesh.edges[e].v1),
                        std::max(mesh.edges[e].v0, mesh.edges[e].v1)}] = static_cast<int>(e);
        for (const auto& lc : chains) {
            std::vector<int> chain_edges;
            for (std::size_t k = 0; k + 1 < lc.ids.size(); ++k) {
                const int a = tri.remapped_vertex(lc.ids[k]);
                const int b = tri.remapped_vertex(lc.ids[k + 1]);
                if (a < 0 || b < 0 || a == b)
                    throw Error("trace " + std::to_string(lc.trace_id) +
                                ": chain vertex missing after triangulation");
                auto it = edge_index.find({std::min(a, b), std::max(a, b)});
                if (it == edge_index.end())
                    throw Error("trace " + std::to_string(lc.trace_id) +
                                ": chain edge missing after triangulation");
                chain_edges.push_back(it->second);
            }
            mesh.trace_edges[lc.trace_id] = std::move(chain_edges);
        }
        validate_mesh(mesh, f, &net.traces);
        nm.meshes.push_back(std::move(mesh));
    }

    // matched segment pairs, aligned by chain position
    for (const Trace& tr : net.traces) {
        const FractureMesh& mi = nm.meshes[static_cast<std::size_t>(nm.mesh_index(tr.fractures.first))];
        const FractureMesh& mj = nm.meshes[static_cast<std::size_t>(nm.mesh_index(tr.fractures.second))];
        const auto& ci = mi.trace_edges.at(tr.id);
        const auto& cj = mj.trace_edges.at(tr.id);
        if (ci.size() != cj.size())
            throw Error("trace " + std::to_string(tr.id) + ": chains do not match across fractures");
        std::vector<TraceSegmentPair> pairs(ci.size());
        for (std::size_t k = 0; k < ci.size(); ++k) pairs[k] = {ci[k], cj[k]};
        nm.trace_matching[tr.id] = std::move(pairs);
    }
    validate_matching(nm);
    return nm;
}

/// Triangulate a single polygon without traces (test/utility path).
inline FractureMesh triangulate_polygon(const Fracture& f, double target_h,
                                        TriangulationOptions opt = {}) {
    std::vector<Fracture> one{f};
    FractureNetwork net;
    net.fractures = one;
    NetworkMesh nm = triangulate_conforming(net, target_h, opt);
    return nm.meshes.front();
}

}  // namespace dfn
