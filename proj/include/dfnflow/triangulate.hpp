#pragma once

// In-house constrained Delaunay triangulation with refinement.
//
// Each fracture is triangulated in its local frame from a PSLG holding the
// (subdivided) polygon boundary and the trace chains. Trace subdivision
// points are generated once in 3D and projected into both incident fractures,
// so the chains match segment-by-segment across the network. Refinement
// inserts circumcenters of low-quality or oversized triangles (Ruppert);
// boundary segments may be split, trace segments never are.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "dfnflow/geometry.hpp"
#include "dfnflow/mesh.hpp"

namespace dfn {

struct TriangulationOptions {
    double target_h = 0.1;
    double min_angle_deg = 20.0;
    // triangles with circumradius above size_factor * local size get refined
    double size_factor = 0.72;
    // mesh size next to a trace is trace_size_fraction * trace length (capped
    // by target_h); grading is the growth slope away from the trace
    double trace_size_fraction = 0.25;
    double grading = 0.2;
    // every trace is resolved by at least this many chain segments, so a
    // shrinking trace forces progressively finer local meshes
    int min_trace_segments = 2;
    int max_passes = 60;
    std::size_t max_vertices_per_fracture = 400000;

    /// Profile for vanishing-trace sweeps: resolves every trace with many
    /// segments and grades the mesh from a fraction of the trace length, so
    /// cell counts grow steadily as a trace shrinks.
    static TriangulationOptions trace_resolving() {
        TriangulationOptions opt;
        opt.trace_size_fraction = 0.06;
        opt.min_trace_segments = 16;
        return opt;
    }
};

namespace cdt {

struct Constraint {
    int boundary_edge = -1;  // polygon edge index, boundary constraints
    int trace_id = -1;       // trace id, trace constraints
    int chain_pos = -1;      // position along the trace chain
    bool is_trace() const { return trace_id >= 0; }
};

struct Pslg {
    std::vector<Vec2> points;
    struct Seg {
        int a, b;
        Constraint mark;
    };
    std::vector<Seg> segments;
};

class Triangulator {
public:
    Triangulator(const Pslg& pslg, const TriangulationOptions& opt,
                 std::function<double(const Vec2&)> size_field, std::string label)
        : opt_(opt), size_(std::move(size_field)), label_(std::move(label)) {
        build_super(pslg.points);
        for (const Vec2& p : pslg.points) pslg_vertex_.push_back(insert_point(p));
        for (const auto& s : pslg.segments)
            enforce_segment(pslg_vertex_[s.a], pslg_vertex_[s.b], s.mark);
        classify_inside();
        refine();
    }

    /// Extract the inside triangles as a FractureMesh (without trace chains).
    FractureMesh extract(int fracture_id) const {
        FractureMesh mesh;
        mesh.fracture_id = fracture_id;
        std::vector<int> remap(pts_.size(), -1);
        for (const Tri& t : tris_) {
            if (!t.alive || !t.inside) continue;
            std::vector<int> cell(3);
            for (int k = 0; k < 3; ++k) {
                if (remap[t.v[k]] < 0) {
                    remap[t.v[k]] = static_cast<int>(mesh.vertices.size());
                    mesh.vertices.push_back(pts_[t.v[k]]);
                }
                cell[k] = remap[t.v[k]];
            }
            mesh.cells.push_back(cell);
        }
        std::map<std::pair<int, int>, std::pair<int, int>> marks;  // (v0,v1) -> (poly edge, trace)
        for (const auto& [key, c] : constraints_) {
            const int a = remap[key.first], b = remap[key.second];
            if (a < 0 || b < 0) continue;
            marks[{std::min(a, b), std::max(a, b)}] = {c.boundary_edge, c.trace_id};
        }
        mesh.build_edges(&marks);
        vertex_remap_ = remap;
        return mesh;
    }

    int remapped_vertex(int pslg_point) const { return vertex_remap_[pslg_vertex_[pslg_point]]; }

private:
    struct Tri {
        std::array<int, 3> v{-1, -1, -1};
        std::array<int, 3> nb{-1, -1, -1};  // nb[i] across edge opposite v[i]
        bool alive = true;
        bool inside = false;
    };

    const TriangulationOptions opt_;
    std::function<double(const Vec2&)> size_;
    std::string label_;
    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> v2t_;  // one incident triangle per vertex
    std::map<std::pair<int, int>, Constraint> constraints_;
    std::vector<int> pslg_vertex_;
    mutable std::vector<int> vertex_remap_;
    double scale_ = 1.0;
    double eps_ = 1e-12;
    int last_tri_ = 0;
    bool classified_ = false;

    static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

    double orient(int a, int b, int c) const {
        const long double abx = (long double)pts_[b].x - pts_[a].x;
        const long double aby = (long double)pts_[b].y - pts_[a].y;
        const long double acx = (long double)pts_[c].x - pts_[a].x;
        const long double acy = (long double)pts_[c].y - pts_[a].y;
        return static_cast<double>(abx * acy - aby * acx);
    }

    double orient_pt(int a, int b, const Vec2& p) const {
        const long double abx = (long double)pts_[b].x - pts_[a].x;
        const long double aby = (long double)pts_[b].y - pts_[a].y;
        const long double apx = (long double)p.x - pts_[a].x;
        const long double apy = (long double)p.y - pts_[a].y;
        return static_cast<double>(abx * apy - aby * apx);
    }

    bool in_circumcircle(const Tri& t, int p) const {
        const Vec2& a = pts_[t.v[0]];
        const Vec2& b = pts_[t.v[1]];
        const Vec2& c = pts_[t.v[2]];
        const Vec2& d = pts_[p];
        const long double ax = a.x - d.x, ay = a.y - d.y;
        const long double bx = b.x - d.x, by = b.y - d.y;
        const long double cx = c.x - d.x, cy = c.y - d.y;
        const long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                                (bx * bx + by * by) * (ax * cy - cx * ay) +
                                (cx * cx + cy * cy) * (ax * by - bx * ay);
        return det > (long double)eps_ * scale_ * scale_;
    }

    bool is_super(int v) const { return v < 3; }

    void build_super(const std::vector<Vec2>& input) {
        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const Vec2& p : input) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        const Vec2 c{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
        scale_ = std::max({hi.x - lo.x, hi.y - lo.y, 1e-12});
        eps_ = 1e-13 * scale_ * scale_;
        const double r = 40.0 * scale_;
        pts_ = {{c.x - 2.0 * r, c.y - r}, {c.x + 2.0 * r, c.y - r}, {c.x, c.y + 2.0 * r}};
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true, false});
        v2t_ = {0, 0, 0};
    }

    // ---- point location ------------------------------------------------

    struct Location {
        int tri = -1;
        int on_edge = -1;    // local edge index, or -1
        int on_vertex = -1;  // global vertex id, or -1
    };

    Location locate(const Vec2& p) const {
        int t = last_tri_;
        if (t < 0 || t >= (int)tris_.size() || !tris_[t].alive) {
            t = -1;
            for (int k = (int)tris_.size() - 1; k >= 0; --k)
                if (tris_[k].alive) {
                    t = k;
                    break;
                }
        }
        const int max_steps = static_cast<int>(tris_.size()) + 16;
        int prev = -1;
        for (int step = 0; step < max_steps; ++step) {
            const Tri& tri = tris_[t];
            double o[3];
            int worst = -1;
            double worst_val = -eps_;
            for (int i = 0; i < 3; ++i) {
                o[i] = orient_pt(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], p);
                if (o[i] < worst_val && tri.nb[i] != prev) {
                    worst_val = o[i];
                    worst = i;
                }
            }
            if (worst < 0) {
                // inside or on boundary of t
                Location loc;
                loc.tri = t;
                const double vtol = 1e-9 * scale_;
                for (int i = 0; i < 3; ++i)
                    if (norm(pts_[tri.v[i]] - p) <= vtol) {
                        loc.on_vertex = tri.v[i];
                        return loc;
                    }
                for (int i = 0; i < 3; ++i) {
                    const int a = tri.v[(i + 1) % 3], b = tri.v[(i + 2) % 3];
                    const double len = norm(pts_[b] - pts_[a]);
                    if (std::abs(o[i]) <= 1e-12 * scale_ * std::max(len, 1e-30)) {
                        loc.on_edge = i;
                        return loc;
                    }
                }
                return loc;
            }
            const int next = tri.nb[worst];
            if (next < 0) {  // walked out of the hull: should not happen with the super triangle
                Location loc;
                loc.tri = t;
                return loc;
            }
            prev = t;
            t = next;
        }
        throw Error("triangulation walk did not terminate (" + label_ + ")");
    }

    // ---- structural edits ----------------------------------------------

    int neighbor_slot(int t, int who) const {
        for (int i = 0; i < 3; ++i)
            if (tris_[t].nb[i] == who) return i;
        throw Error("broken neighbor link");
    }

    void set_nb(int t, int slot, int who) {
        if (t >= 0) tris_[t].nb[slot] = who;
    }

    void repoint(int t, int from, int to) {
        if (t >= 0) tris_[t].nb[neighbor_slot(t, from)] = to;
    }

    int add_tri(const Tri& t) {
        tris_.push_back(t);
        const int id = static_cast<int>(tris_.size()) - 1;
        for (int k = 0; k < 3; ++k) v2t_[t.v[k]] = id;
        return id;
    }

    int add_point(const Vec2& p) {
        pts_.push_back(p);
        v2t_.push_back(-1);
        return static_cast<int>(pts_.size()) - 1;
    }

    /// Insert p; returns its vertex id (an existing one if p coincides with a
    /// vertex). Runs Lawson legalization respecting constrained edges.
    int insert_point(const Vec2& p) {
        if (pts_.size() > opt_.max_vertices_per_fracture + 3)
            throw Error("vertex budget exceeded while meshing " + label_);
        const Location loc = locate(p);
        if (loc.on_vertex >= 0) return loc.on_vertex;
        const int v = add_point(p);
        std::vector<std::pair<int, int>> check;
        if (loc.on_edge < 0)
            split_interior(loc.tri, v, check);
        else
            split_on_edge(loc.tri, loc.on_edge, v, check);
        legalize(check);
        last_tri_ = v2t_[v];
        return v;
    }

    void split_interior(int t, int v, std::vector<std::pair<int, int>>& check) {
        const Tri old = tris_[t];
        const bool inside = old.inside;
        // three children, child i keeps old edge i (opposite old v[i])
        int ids[3];
        Tri c0;
        c0.v = {v, old.v[1], old.v[2]};
        c0.inside = inside;
        tris_[t] = c0;
        ids[0] = t;
        Tri c1;
        c1.v = {v, old.v[2], old.v[0]};
        c1.inside = inside;
        ids[1] = add_tri(c1);
        Tri c2;
        c2.v = {v, old.v[0], old.v[1]};
        c2.inside = inside;
        ids[2] = add_tri(c2);
        for (int k = 0; k < 3; ++k) v2t_[tris_[ids[0]].v[k]] = ids[0];
        for (int i = 0; i < 3; ++i) {
            tris_[ids[i]].nb[0] = old.nb[i];
            if (old.nb[i] >= 0) repoint(old.nb[i], t, ids[i]);
            tris_[ids[i]].nb[1] = ids[(i + 1) % 3];
            tris_[ids[i]].nb[2] = ids[(i + 2) % 3];
            check.push_back({ids[i], 0});
        }
    }

    void split_on_edge(int t, int i, int v, std::vector<std::pair<int, int>>& check) {
        const int u = tris_[t].nb[i];
        const Tri oldt = tris_[t];
        const int a = oldt.v[(i + 1) % 3], b = oldt.v[(i + 2) % 3], x = oldt.v[i];
        // t = (x, a, b); replace with (x, a, v) and (x, v, b)
        Tri t1;
        t1.v = {x, a, v};
        t1.inside = oldt.inside;
        Tri t2;
        t2.v = {x, v, b};
        t2.inside = oldt.inside;
        tris_[t] = t1;
        const int t2id = add_tri(t2);
        for (int k = 0; k < 3; ++k) v2t_[tris_[t].v[k]] = t;

        const int nb_xa = oldt.nb[(i + 2) % 3];  // across (x,a)
        const int nb_bx = oldt.nb[(i + 1) % 3];  // across (b,x)
        // t1 = (x, a, v): edge0 = (a,v) [part of old (a,b)], edge1 = (v,x), edge2 = (x,a)
        tris_[t].nb = {-1, t2id, nb_xa};
        if (nb_xa >= 0) repoint(nb_xa, t, t);
        // t2 = (x, v, b): edge0 = (v,b) [other part], edge1 = (b,x), edge2 = (x,v)
        tris_[t2id].nb = {-1, nb_bx, t};
        if (nb_bx >= 0) repoint(nb_bx, t, t2id);

        // carry a split constraint across: (a,b) -> (a,v) + (v,b)
        auto it = constraints_.find(key(a, b));
        std::optional<Constraint> cmark;
        if (it != constraints_.end()) {
            cmark = it->second;
            constraints_.erase(it);
            constraints_[key(a, v)] = *cmark;
            constraints_[key(v, b)] = *cmark;
        }

        if (u >= 0) {
            const int j = neighbor_slot(u, t);
            const Tri oldu = tris_[u];
            const int y = oldu.v[j];
            // u = (y, b, a); replace with (y, b, v) and (y, v, a)
            Tri u1;
            u1.v = {y, b, v};
            u1.inside = oldu.inside;
            Tri u2;
            u2.v = {y, v, a};
            u2.inside = oldu.inside;
            tris_[u] = u1;
            const int u2id = add_tri(u2);
            for (int k = 0; k < 3; ++k) v2t_[tris_[u].v[k]] = u;
            const int nb_yb = oldu.nb[(j + 2) % 3];  // across (y,b)
            const int nb_ay = oldu.nb[(j + 1) % 3];  // across (a,y)
            tris_[u].nb = {t2id, u2id, nb_yb};
            if (nb_yb >= 0) repoint(nb_yb, u, u);
            tris_[u2id].nb = {t, nb_ay, u};
            if (nb_ay >= 0) repoint(nb_ay, u, u2id);
            tris_[t].nb[0] = u2id;
            tris_[t2id].nb[0] = u;
            check.push_back({u, 2});
            check.push_back({u2id, 1});
        }
        check.push_back({t, 2});
        check.push_back({t2id, 1});
    }

    bool constrained(int a, int b) const { return constraints_.count(key(a, b)) > 0; }

    void flip(int t, int i, int& t_out, int& u_out) {
        const int u = tris_[t].nb[i];
        const int j = neighbor_slot(u, t);
        const Tri oldt = tris_[t], oldu = tris_[u];
        const int x = oldt.v[i], a = oldt.v[(i + 1) % 3], b = oldt.v[(i + 2) % 3];
        const int y = oldu.v[j];
        // t=(x,a,b), u=(y,b,a) -> t'=(x,a,y), u'=(x,y,b)
        Tri nt;
        nt.v = {x, a, y};
        nt.inside = oldt.inside;
        Tri nu;
        nu.v = {x, y, b};
        nu.inside = oldt.inside;
        const int nb_xa = oldt.nb[(i + 2) % 3], nb_bx = oldt.nb[(i + 1) % 3];
        const int nb_yb = oldu.nb[(j + 2) % 3], nb_ay = oldu.nb[(j + 1) % 3];
        nt.nb = {nb_ay, u, nb_xa};          // edges (a,y), (y,x), (x,a)
        nu.nb = {nb_yb, nb_bx, t};          // edges (y,b), (b,x), (x,y)
        tris_[t] = nt;
        tris_[u] = nu;
        for (int k = 0; k < 3; ++k) {
            v2t_[nt.v[k]] = t;
            v2t_[nu.v[k]] = u;
        }
        if (nb_ay >= 0) repoint(nb_ay, u, t);
        if (nb_bx >= 0) repoint(nb_bx, t, u);
        if (nb_xa >= 0) repoint(nb_xa, t, t);
        if (nb_yb >= 0) repoint(nb_yb, u, u);
        t_out = t;
        u_out = u;
    }

    void legalize(std::vector<std::pair<int, int>> stack) {
        int guard = 0;
        const int guard_max = 64 * static_cast<int>(tris_.size()) + 4096;
        while (!stack.empty()) {
            if (++guard > guard_max) throw Error("legalization did not terminate (" + label_ + ")");
            auto [t, i] = stack.back();
            stack.pop_back();
            if (t < 0 || t >= (int)tris_.size() || !tris_[t].alive) continue;
            const int u = tris_[t].nb[i];
            if (u < 0) continue;
            const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
            if (constrained(a, b)) continue;
            const int j = neighbor_slot(u, t);
            const int y = tris_[u].v[j];
            if (!in_circumcircle(tris_[t], y)) continue;
            // flip only strictly convex quads
            const int x = tris_[t].v[i];
            if (orient(x, a, y) <= eps_ || orient(x, y, b) <= eps_) continue;
            int nt, nu;
            flip(t, i, nt, nu);
            stack.push_back({nt, 0});
            stack.push_back({nt, 2});
            stack.push_back({nu, 0});
            stack.push_back({nu, 1});
        }
    }

    // ---- constraint enforcement -----------------------------------------

    /// Triangles incident to vertex v, deterministic order.
    std::vector<int> star(int v) const {
        std::vector<int> out;
        int t0 = v2t_[v];
        if (t0 < 0 || !tris_[t0].alive) {
            for (int k = 0; k < (int)tris_.size(); ++k)
                if (tris_[k].alive &&
                    (tris_[k].v[0] == v || tris_[k].v[1] == v || tris_[k].v[2] == v)) {
                    t0 = k;
                    break;
                }
        }
        if (t0 < 0) throw Error("vertex without incident triangle");
        // walk around v in one direction, then the other if we hit the hull
        auto local = [&](int t) {
            for (int k = 0; k < 3; ++k)
                if (tris_[t].v[k] == v) return k;
            throw Error("star walk left the vertex");
        };
        out.push_back(t0);
        int t = t0;
        for (int dir = 0; dir < 2; ++dir) {
            t = t0;
            int guard = 0;
            while (true) {
                if (++guard > (int)tris_.size() + 8) throw Error("star walk did not terminate");
                const int k = local(t);
                const int next = dir == 0 ? tris_[t].nb[(k + 1) % 3] : tris_[t].nb[(k + 2) % 3];
                if (next < 0 || next == t0) break;
                if (std::find(out.begin(), out.end(), next) != out.end()) break;
                out.push_back(next);
                t = next;
            }
        }
        return out;
    }

    bool edge_exists(int a, int b) const {
        for (int t : star(a)) {
            const Tri& tri = tris_[t];
            for (int k = 0; k < 3; ++k)
                if (tri.v[k] == b) return true;
        }
        return false;
    }

    void enforce_segment(int a, int b, const Constraint& mark) {
        if (a == b) throw Error("zero-length constraint segment (" + label_ + ")");
        int guard = 0;
        while (!edge_exists(a, b)) {
            if (++guard > 1024) throw Error("constraint enforcement stalled (" + label_ + ")");
            // does the segment pass exactly through a vertex of a's star?
            int via = -1;
            for (int t : star(a)) {
                for (int k = 0; k < 3; ++k) {
                    const int w = tris_[t].v[k];
                    if (w == a || w == b || is_super(w)) continue;
                    const double o = orient(a, b, w);
                    const double seg = norm(pts_[b] - pts_[a]);
                    if (std::abs(o) <= 1e-12 * scale_ * seg) {
                        const double s = dot(pts_[w] - pts_[a], pts_[b] - pts_[a]);
                        if (s > 0.0 && s < seg * seg) {
                            via = w;
                            break;
                        }
                    }
                }
                if (via >= 0) break;
            }
            if (via >= 0) {
                enforce_segment(a, via, mark);
                enforce_segment(via, b, mark);
                return;
            }
            cut_and_retriangulate(a, b);
        }
        constraints_[key(a, b)] = mark;
    }

    /// Remove the triangles crossed by segment (a,b) and retriangulate the two
    /// resulting pseudo-polygons so that (a,b) becomes an edge.
    void cut_and_retriangulate(int a, int b) {
        // entry triangle: the star triangle of a whose opposite edge crosses a->b
        int t = -1, entry_edge = -1;
        for (int s : star(a)) {
            int ia = -1;
            for (int k = 0; k < 3; ++k)
                if (tris_[s].v[k] == a) ia = k;
            const int p = tris_[s].v[(ia + 1) % 3], q = tris_[s].v[(ia + 2) % 3];
            const double op = orient(a, b, p), oq = orient(a, b, q);
            if (op > eps_ && oq < -eps_) {
                // b on the far side of edge (p,q)?
                if (orient(p, q, a) * orient_pt(p, q, pts_[b]) < 0.0) {
                    t = s;
                    entry_edge = ia;
                    break;
                }
            }
        }
        if (t < 0) throw Error("constraint walk found no entry triangle (" + label_ + ")");

        std::vector<int> pipe{t};
        std::vector<int> left{a}, right{a};  // cavity boundary chains a -> b
        // cavity boundary edges with their outer neighbors
        std::map<std::pair<int, int>, int> outer;
        auto note_outer = [&](int p, int q, int nbt) { outer[key(p, q)] = nbt; };

        int cur = t;
        int cross_edge = entry_edge;  // local index in cur of crossed edge
        {
            const Tri& tri = tris_[cur];
            const int p = tri.v[(cross_edge + 1) % 3], q = tri.v[(cross_edge + 2) % 3];
            note_outer(a, p, tri.nb[(cross_edge + 2) % 3]);
            note_outer(a, q, tri.nb[(cross_edge + 1) % 3]);
            left.push_back(p);   // p on the left of a->b (orient > 0)
            right.push_back(q);
        }
        int guard = 0;
        while (true) {
            if (++guard > (int)tris_.size() + 8)
                throw Error("constraint pipe did not terminate (" + label_ + ")");
            const Tri& tri = tris_[cur];
            const int p = tri.v[(cross_edge + 1) % 3], q = tri.v[(cross_edge + 2) % 3];
            if (constraints_.count(key(p, q))) {
                const auto& c = constraints_.at(key(p, q));
                throw Error("constraint segments intersect while meshing " + label_ +
                            (c.is_trace() ? " (existing trace " + std::to_string(c.trace_id) + ")"
                                          : " (existing boundary edge)"));
            }
            const int nxt = tri.nb[cross_edge];
            if (nxt < 0) throw Error("constraint pipe left the hull (" + label_ + ")");
            pipe.push_back(nxt);
            const Tri& ntri = tris_[nxt];
            const int jn = neighbor_slot(nxt, cur);
            const int w = ntri.v[jn];  // apex of next triangle beyond edge (p,q)
            if (w == b) {
                note_outer(left.back(), b, ntri.nb[local_edge_between(nxt, jn, left.back())]);
                note_outer(right.back(), b, ntri.nb[local_edge_between(nxt, jn, right.back())]);
                left.push_back(b);
                right.push_back(b);
                break;
            }
            const double ow = orient(a, b, w);
            if (std::abs(ow) <= eps_) {
                // apex exactly on the segment: retriangulate up to w, caller recurses
                note_outer(left.back(), w, ntri.nb[local_edge_between(nxt, jn, left.back())]);
                note_outer(right.back(), w, ntri.nb[local_edge_between(nxt, jn, right.back())]);
                left.push_back(w);
                right.push_back(w);
                b = w;
                break;
            }
            if (ow > 0.0) {
                note_outer(left.back(), w, ntri.nb[local_edge_between(nxt, jn, left.back())]);
                left.push_back(w);
                // next crossed edge of ntri: (w, q) side -> edge opposite the old left vertex
                cross_edge = local_vertex(nxt, right.back());
            } else {
                note_outer(right.back(), w, ntri.nb[local_edge_between(nxt, jn, right.back())]);
                right.push_back(w);
                cross_edge = local_vertex(nxt, left.back());
            }
            cur = nxt;
        }

        for (int dead : pipe) tris_[dead].alive = false;
        std::vector<int> fresh;
        retriangulate_fan(left, true, outer, fresh);
        retriangulate_fan(right, false, outer, fresh);
        // stitch the two sides along (a,b): one triangle per side kept it open
        std::vector<int> open;
        for (int f : fresh)
            for (int k = 0; k < 3; ++k)
                if (tris_[f].nb[k] == -2) open.push_back(f * 4 + k);
        if (open.size() != 2) throw Error("cavity stitching failed (" + label_ + ")");
        const int f0 = open[0] / 4, e0 = open[0] % 4;
        const int f1 = open[1] / 4, e1 = open[1] % 4;
        tris_[f0].nb[e0] = f1;
        tris_[f1].nb[e1] = f0;
        last_tri_ = f0;
    }

    int local_vertex(int t, int v) const {
        for (int k = 0; k < 3; ++k)
            if (tris_[t].v[k] == v) return k;
        throw Error("vertex not in triangle");
    }

    /// Local index of the edge (v[jn], w) of triangle t: the slot of the
    /// remaining (third) vertex.
    int local_edge_between(int t, int jn, int w) const {
        const int vw = local_vertex(t, w);
        for (int k = 0; k < 3; ++k)
            if (k != vw && k != jn) return k;
        throw Error("degenerate triangle in pipe");
    }

    /// Triangulate the pseudo-polygon chain (a ... b) on one side of the new
    /// edge; the new triangle on (a,b) keeps nb = -2 for stitching.
    void retriangulate_fan(const std::vector<int>& chain, bool left_side,
                           std::map<std::pair<int, int>, int>& outer, std::vector<int>& fresh) {
        std::function<int(int, int)> build = [&](int lo, int hi) -> int {
            // chain[lo], chain[hi] are endpoints; vertices between them belong
            // to this pseudo-polygon. returns the triangle adjacent to edge
            // (chain[lo], chain[hi]), or -1 when the edge is a bare cavity edge.
            if (hi - lo < 2) return -1;
            const int a = chain[lo], b = chain[hi];
            int best = lo + 1;
            for (int k = lo + 2; k < hi; ++k) {
                // Delaunay: pick the vertex whose circumcircle with (a,b)
                // contains no other candidate
                Tri probe;
                probe.v = left_side ? std::array<int, 3>{a, b, chain[best]}
                                    : std::array<int, 3>{a, chain[best], b};
                if (in_circumcircle(probe, chain[k])) best = k;
            }
            const int c = chain[best];
            Tri t;
            // chain vertices lie left of a->b on the left side: CCW is (a, b, c)
            t.v = left_side ? std::array<int, 3>{a, b, c} : std::array<int, 3>{a, c, b};
            t.inside = false;
            const int id = add_tri(t);
            fresh.push_back(id);
            const int t_ac = build(lo, best);
            const int t_cb = build(best, hi);
            // wire neighbors: edges (a,c), (c,b), (a,b). For sub-edges use the
            // recursive result or the outer map.
            auto wire = [&](int p, int q, int sub) {
                const int slot = [&] {
                    for (int k = 0; k < 3; ++k) {
                        const int e0 = tris_[id].v[(k + 1) % 3], e1 = tris_[id].v[(k + 2) % 3];
                        if (key(e0, e1) == key(p, q)) return k;
                    }
                    throw Error("edge not found while wiring cavity");
                }();
                if (sub >= 0) {
                    tris_[id].nb[slot] = sub;
                    const int oslot = [&] {
                        for (int k = 0; k < 3; ++k) {
                            const int e0 = tris_[sub].v[(k + 1) % 3], e1 = tris_[sub].v[(k + 2) % 3];
                            if (key(e0, e1) == key(p, q)) return k;
                        }
                        throw Error("edge not found while wiring cavity (sub)");
                    }();
                    tris_[sub].nb[oslot] = id;
                } else {
                    auto it = outer.find(key(p, q));
                    if (it == outer.end()) throw Error("missing cavity boundary edge");
                    tris_[id].nb[slot] = it->second;
                    if (it->second >= 0) {
                        // the outer triangle pointed at a dead pipe triangle
                        for (int k = 0; k < 3; ++k) {
                            const int e0 = tris_[it->second].v[(k + 1) % 3];
                            const int e1 = tris_[it->second].v[(k + 2) % 3];
                            if (key(e0, e1) == key(p, q)) tris_[it->second].nb[k] = id;
                        }
                    }
                }
            };
            wire(a, c, t_ac);
            wire(c, b, t_cb);
            // mark the (a,b) side open; the caller stitches or rewires it
            for (int k = 0; k < 3; ++k) {
                const int e0 = tris_[id].v[(k + 1) % 3], e1 = tris_[id].v[(k + 2) % 3];
                if (key(e0, e1) == key(a, b)) tris_[id].nb[k] = -2;
            }
            return id;
        };
        const int root = build(0, static_cast<int>(chain.size()) - 1);
        if (root < 0) throw Error("degenerate cavity (" + label_ + ")");
    }

    // ---- classification and refinement -----------------------------------

    void classify_inside() {
        for (Tri& t : tris_)
            if (t.alive) t.inside = true;
        std::deque<int> work;
        for (int k = 0; k < (int)tris_.size(); ++k) {
            if (!tris_[k].alive) continue;
            for (int i = 0; i < 3; ++i)
                if (is_super(tris_[k].v[i])) {
                    if (tris_[k].inside) {
                        tris_[k].inside = false;
                        work.push_back(k);
                    }
                    break;
                }
        }
        while (!work.empty()) {
            const int t = work.front();
            work.pop_front();
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].nb[i];
                if (u < 0 || !tris_[u].inside) continue;
                const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
                auto it = constraints_.find(key(a, b));
                if (it != constraints_.end() && !it->second.is_trace()) continue;  // stop at boundary
                tris_[u].inside = false;
                work.push_back(u);
            }
        }
        classified_ = true;
    }

    struct Circum {
        Vec2 c;
        double r2 = 0.0;
        bool ok = false;
    };

    Circum circumcenter(const Tri& t) const {
        const Vec2 a = pts_[t.v[0]], b = pts_[t.v[1]], c = pts_[t.v[2]];
        const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        Circum out;
        if (std::abs(d) < 1e-14 * scale_ * scale_) return out;
        const double a2 = a.x * a.x + a.y * a.y;
        const double b2 = b.x * b.x + b.y * b.y;
        const double c2 = c.x * c.x + c.y * c.y;
        out.c = {(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                 (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
        const Vec2 ra = a - out.c;
        out.r2 = dot(ra, ra);
        out.ok = true;
        return out;
    }

    double min_angle(const Tri& t) const {
        double best = 1e300;
        for (int k = 0; k < 3; ++k) {
            const Vec2 u = pts_[t.v[(k + 1) % 3]] - pts_[t.v[k]];
            const Vec2 v = pts_[t.v[(k + 2) % 3]] - pts_[t.v[k]];
            best = std::min(best, std::atan2(std::abs(cross(u, v)), dot(u, v)));
        }
        return best * 180.0 / M_PI;
    }

    double shortest_edge(const Tri& t) const {
        double s = 1e300;
        for (int k = 0; k < 3; ++k)
            s = std::min(s, norm(pts_[t.v[(k + 1) % 3]] - pts_[t.v[k]]));
        return s;
    }

    /// Does p lie strictly inside the diametral circle of segment (a,b)?
    bool encroaches(const Vec2& p, int a, int b) const {
        const Vec2 pa = pts_[a] - p, pb = pts_[b] - p;
        return dot(pa, pb) < -eps_;
    }

    /// Existing vertex inside the diametral circle of constraint (a,b)?
    bool segment_encroached(int a, int b) const {
        for (int t : star(a)) {
            const Tri& tri = tris_[t];
            bool has_b = false;
            for (int k = 0; k < 3; ++k) has_b |= tri.v[k] == b;
            if (!has_b) continue;
            for (int k = 0; k < 3; ++k) {
                const int w = tri.v[k];
                if (w == a || w == b || is_super(w)) continue;
                if (encroaches(pts_[w], a, b)) return true;
            }
        }
        return false;
    }

    void split_boundary_segment(int a, int b, std::deque<std::pair<int, int>>& seg_queue) {
        const Vec2 m = (pts_[a] + pts_[b]) * 0.5;
        const int v = insert_point(m);  // lands on the edge; constraint split in split_on_edge
        if (v >= 0) {
            seg_queue.push_back(key(a, v));
            seg_queue.push_back(key(v, b));
        }
    }

    void refine() {
        // gather the trace segments once; they are never split
        std::vector<std::pair<int, int>> trace_segs;
        std::deque<std::pair<int, int>> seg_queue;
        for (const auto& [k, c] : constraints_) {
            if (c.is_trace())
                trace_segs.push_back(k);
            else
                seg_queue.push_back(k);
        }
        auto splittable = [&](const std::pair<int, int>& s) {
            const double len = norm(pts_[s.second] - pts_[s.first]);
            const Vec2 mid = (pts_[s.first] + pts_[s.second]) * 0.5;
            return len > 0.35 * std::min(size_(mid), opt_.target_h);
        };

        // 1. clear encroachments of the boundary segments
        int guard = 0;
        while (!seg_queue.empty()) {
            if (++guard > 200000) break;
            const auto s = seg_queue.front();
            seg_queue.pop_front();
            if (!constraints_.count(s)) continue;  // already split
            if (segment_encroached(s.first, s.second) && splittable(s))
                split_boundary_segment(s.first, s.second, seg_queue);
        }

        // 2. size and quality passes
        const double min_angle_limit = opt_.min_angle_deg;
        for (int pass = 0; pass < opt_.max_passes; ++pass) {
            bool changed = false;
            const int snapshot = static_cast<int>(tris_.size());
            for (int t = 0; t < snapshot; ++t) {
                if (!tris_[t].alive || !tris_[t].inside) continue;
                const Circum cc = circumcenter(tris_[t]);
                if (!cc.ok) continue;
                const double r = std::sqrt(cc.r2);
                const Vec2 ctr = (pts_[tris_[t].v[0]] + pts_[tris_[t].v[1]] + pts_[tris_[t].v[2]]) *
                                 (1.0 / 3.0);
                const double sz = size_(ctr);
                const bool too_big = r > opt_.size_factor * sz;
                const bool bad_angle = min_angle(tris_[t]) < min_angle_limit &&
                                       shortest_edge(tris_[t]) > 0.5 * sz;
                if (!too_big && !bad_angle) continue;
                // never create a vertex that encroaches a trace segment
                bool blocked = false;
                for (const auto& ts : trace_segs) {
                    if (!constraints_.count(ts)) continue;
                    if (encroaches(cc.c, ts.first, ts.second)) {
                        blocked = true;
                        break;
                    }
                }
                if (blocked) continue;
                // if it encroaches a boundary segment, split that instead
                std::pair<int, int> hit{-1, -1};
                for (const auto& [k, c] : constraints_) {
                    if (c.is_trace()) continue;
                    if (encroaches(cc.c, k.first, k.second)) {
                        hit = k;
                        break;
                    }
                }
                if (hit.first >= 0) {
                    if (splittable(hit)) {
                        std::deque<std::pair<int, int>> q;
                        split_boundary_segment(hit.first, hit.second, q);
                        while (!q.empty()) {
                            const auto s = q.front();
                            q.pop_front();
                            if (!constraints_.count(s)) continue;
                            if (segment_encroached(s.first, s.second) && splittable(s))
                                split_boundary_segment(s.first, s.second, q);
                        }
                        changed = true;
                    }
                    continue;
                }
                // insert the circumcenter if it falls in an inside triangle
                const Location loc = locate(cc.c);
                if (loc.tri < 0 || !tris_[loc.tri].inside) continue;
                if (loc.on_vertex >= 0) continue;
                bool close = false;
                for (int k = 0; k < 3; ++k)
                    if (norm(pts_[tris_[loc.tri].v[k]] - cc.c) < 0.25 * sz) close = true;
                if (close && !too_big) continue;
                if (loc.on_edge >= 0) {
                    const int p = tris_[loc.tri].v[(loc.on_edge + 1) % 3];
                    const int q = tris_[loc.tri].v[(loc.on_edge + 2) % 3];
                    if (constrained(p, q)) continue;
                }
                // reject insertions that would spawn degenerate slivers
                {
                    bool unsafe = false;
                    const Tri& host = tris_[loc.tri];
                    for (int k = 0; k < 3; ++k) {
                        const int a = host.v[(k + 1) % 3], b = host.v[(k + 2) % 3];
                        const double len = norm(pts_[b] - pts_[a]);
                        const double o = orient_pt(a, b, cc.c);
                        if (loc.on_edge != k && std::abs(o) < 1e-10 * scale_ * std::max(len, 1e-30))
                            unsafe = true;
                    }
                    if (unsafe) continue;
                }
                insert_point(cc.c);
                changed = true;
            }
            if (!changed) break;
        }
    }
};

}  // namespace cdt

}  // namespace dfn
