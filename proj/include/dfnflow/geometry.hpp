#pragma once

// Planar fracture networks in 3D: fracture polygons, local frames and the
// intersection segments (traces) that couple the per-fracture flow problems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dfn {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    if (n == 0.0) throw Error("cannot normalize zero vector");
    return a / n;
}

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

/// Orthonormal in-plane frame of a fracture. Maps between world coordinates
/// and the 2D tangent-plane coordinates all per-fracture solvers work in.
struct Frame {
    Vec3 origin;
    Vec3 e1, e2;  // in-plane axes
    Vec3 normal;

    Vec2 to_local(const Vec3& p) const {
        const Vec3 d = p - origin;
        return {dot(d, e1), dot(d, e2)};
    }
    Vec3 to_world(const Vec2& q) const { return origin + e1 * q.x + e2 * q.y; }
};

enum class BcKind { dirichlet, neumann_noflow };

/// Tag of one polygon edge (edge k runs from vertex k to vertex k+1).
struct EdgeTag {
    BcKind kind = BcKind::neumann_noflow;
    double head = 0.0;  // prescribed head, Dirichlet only
};

// -- 2D polygon helpers ------------------------------------------------------

inline double polygon_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2& p = poly[k];
        const Vec2& q = poly[(k + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

/// Point-in-polygon, boundary counts as inside (within tol).
inline bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p, double tol) {
    const std::size_t n = poly.size();
    // boundary proximity first
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = poly[k], b = poly[(k + 1) % n];
        const Vec2 ab = b - a, ap = p - a;
        const double len2 = dot(ab, ab);
        double t = len2 > 0.0 ? dot(ap, ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 proj = a + ab * t;
        if (norm(p - proj) <= tol) return true;
    }
    // crossing number
    bool inside = false;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = poly[k], b = poly[(k + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return cross(q - p, r - p);
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
           o4 != 0;
}

// -- Fracture -----------------------------------------------------------------

/// A planar polygonal fracture with its local frame and per-edge boundary tags.
struct Fracture {
    int id = -1;
    std::vector<Vec3> vertices3d;      // ordered, simple polygon
    Frame frame;                       // set by finalize()
    std::vector<Vec2> vertices2d;      // vertices in the local frame
    std::vector<EdgeTag> boundary_tags;

    std::size_t n_vertices() const { return vertices3d.size(); }

    double diameter() const {
        double d = 0.0;
        for (std::size_t a = 0; a < vertices3d.size(); ++a)
            for (std::size_t b = a + 1; b < vertices3d.size(); ++b)
                d = std::max(d, norm(vertices3d[a] - vertices3d[b]));
        return d;
    }

    Vec3 centroid3d() const {
        Vec3 c;
        for (const Vec3& v : vertices3d) c = c + v;
        return c / static_cast<double>(vertices3d.size());
    }
};

/// Newell normal; robust for simple planar polygons.
inline Vec3 polygon_normal(const std::vector<Vec3>& verts) {
    Vec3 n;
    for (std::size_t k = 0; k < verts.size(); ++k) {
        const Vec3& p = verts[k];
        const Vec3& q = verts[(k + 1) % verts.size()];
        n.x += (p.y - q.y) * (p.z + q.z);
        n.y += (p.z - q.z) * (p.x + q.x);
        n.z += (p.x - q.x) * (p.y + q.y);
    }
    return n;
}

/// Build the local frame of a planar polygon: origin at the first vertex,
/// axes spanning the plane, normal by vertex orientation. The 3D<->2D map is
/// an isometry. Throws on degenerate (collinear) input.
inline Frame local_frame(const Fracture& f) {
    if (f.vertices3d.size() < 3) throw Error("fracture " + std::to_string(f.id) + ": fewer than 3 vertices");
    const Vec3 n_raw = polygon_normal(f.vertices3d);
    const double nn = norm(n_raw);
    if (nn <= 0.0) throw Error("fracture " + std::to_string(f.id) + ": degenerate polygon (collinear vertices)");
    Frame fr;
    fr.origin = f.vertices3d.front();
    fr.normal = n_raw / nn;
    Vec3 e1 = f.vertices3d[1] - f.vertices3d[0];
    e1 = e1 - fr.normal * dot(e1, fr.normal);
    if (norm(e1) == 0.0) throw Error("fracture " + std::to_string(f.id) + ": degenerate first edge");
    fr.e1 = normalized(e1);
    fr.e2 = cross(fr.normal, fr.e1);
    return fr;
}

/// Compute frame + 2D vertices and validate the fracture invariants.
inline void finalize_fracture(Fracture& f) {
    f.frame = local_frame(f);
    const double diam = f.diameter();
    const double tol = 1e-9 * diam;
    f.vertices2d.clear();
    f.vertices2d.reserve(f.vertices3d.size());
    for (const Vec3& v : f.vertices3d) {
        if (std::abs(dot(v - f.frame.origin, f.frame.normal)) > tol)
            throw Error("fracture " + std::to_string(f.id) + ": vertices not coplanar");
        f.vertices2d.push_back(f.frame.to_local(v));
    }
    // simple polygon: no two non-adjacent edges intersect
    const std::size_t n = f.vertices2d.size();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (b == a + 1 || (a == 0 && b == n - 1)) continue;
            if (segments_intersect(f.vertices2d[a], f.vertices2d[(a + 1) % n], f.vertices2d[b],
                                   f.vertices2d[(b + 1) % n]))
                throw Error("fracture " + std::to_string(f.id) + ": polygon is self-intersecting");
        }
    }
    if (polygon_area(f.vertices2d) <= 0.0)
        throw Error("fracture " + std::to_string(f.id) + ": polygon area not positive");
    if (f.boundary_tags.empty()) f.boundary_tags.assign(n, EdgeTag{});
    if (f.boundary_tags.size() != n)
        throw Error("fracture " + std::to_string(f.id) + ": one boundary tag per edge required");
}

inline Fracture make_fracture(int id, std::vector<Vec3> verts, std::vector<EdgeTag> tags = {}) {
    Fracture f;
    f.id = id;
    f.vertices3d = std::move(verts);
    f.boundary_tags = std::move(tags);
    finalize_fracture(f);
    return f;
}

// -- Trace --------------------------------------------------------------------

/// Intersection segment of two fractures, with its 2D image in both frames.
struct Trace {
    int id = -1;
    std::pair<int, int> fractures;  // (i, j), i < j
    std::array<Vec3, 2> segment3d;
    std::array<Vec2, 2> segment_local_i;
    std::array<Vec2, 2> segment_local_j;

    double length() const { return norm(segment3d[1] - segment3d[0]); }
};

struct FractureNetwork {
    std::vector<Fracture> fractures;
    std::vector<Trace> traces;
    std::map<int, std::set<int>> incidence;  // fracture id -> trace ids

    double diameter() const {
        Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
        for (const Fracture& f : fractures)
            for (const Vec3& v : f.vertices3d) {
                lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
                hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
            }
        return norm(hi - lo);
    }

    const Fracture& fracture(int id) const {
        for (const Fracture& f : fractures)
            if (f.id == id) return f;
        throw Error("unknown fracture id " + std::to_string(id));
    }
};

namespace detail {

/// Parameter intervals (along the line p0 + t*dir) where the line lies inside
/// the given polygon. `dir2` must be unit length so t is arclength.
inline std::vector<std::pair<double, double>> line_polygon_intervals(
    const std::vector<Vec2>& poly, const Vec2& p0, const Vec2& dir2, double tol) {
    std::vector<double> params;
    const std::size_t n = poly.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = poly[k], b = poly[(k + 1) % n];
        const double sa = cross(dir2, a - p0);
        const double sb = cross(dir2, b - p0);
        const bool za = std::abs(sa) <= tol, zb = std::abs(sb) <= tol;
        if (za) params.push_back(dot(a - p0, dir2));
        if (zb) params.push_back(dot(b - p0, dir2));
        if (!za && !zb && (sa > 0) != (sb > 0)) {
            const double t = sa / (sa - sb);  // along edge
            const Vec2 x = a + (b - a) * t;
            params.push_back(dot(x - p0, dir2));
        }
    }
    if (params.empty()) return {};
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end(),
                             [tol](double u, double v) { return std::abs(u - v) <= tol; }),
                 params.end());
    std::vector<std::pair<double, double>> intervals;
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
        const double mid = 0.5 * (params[k] + params[k + 1]);
        if (point_in_polygon(poly, p0 + dir2 * mid, tol)) {
            if (!intervals.empty() && std::abs(intervals.back().second - params[k]) <= tol)
                intervals.back().second = params[k + 1];
            else
                intervals.emplace_back(params[k], params[k + 1]);
        }
    }
    return intervals;
}

inline bool polygons_overlap_2d(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                                 double tol) {
    for (const Vec2& p : b)
        if (point_in_polygon(a, p, tol)) return true;
    for (const Vec2& p : a)
        if (point_in_polygon(b, p, tol)) return true;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
                return true;
    return false;
}

}  // namespace detail

/// Intersect all fracture pairs. Traces are the positive-length segments where
/// two polygons meet; ids follow (i,j) lexicographic order, then position along
/// the intersection line. Segments shorter than tol are dropped.
inline std::vector<Trace> compute_traces(const std::vector<Fracture>& fractures, double tol) {
    if (tol <= 0.0) throw Error("compute_traces: tol must be positive");
    std::vector<Trace> traces;
    int next_id = 0;
    for (std::size_t a = 0; a < fractures.size(); ++a) {
        for (std::size_t b = a + 1; b < fractures.size(); ++b) {
            const Fracture& fi = fractures[a];
            const Fracture& fj = fractures[b];
            const Vec3 ni = fi.frame.normal, nj = fj.frame.normal;
            const Vec3 d_raw = cross(ni, nj);
            const double dn = norm(d_raw);
            const double scale = std::max(fi.diameter(), fj.diameter());
            if (dn < 1e-12) {
                // parallel planes: coplanar overlap is unsupported
                const double gap = std::abs(dot(fj.frame.origin - fi.frame.origin, ni));
                if (gap <= tol) {
                    std::vector<Vec2> bj;
                    bj.reserve(fj.vertices3d.size());
                    for (const Vec3& v : fj.vertices3d) bj.push_back(fi.frame.to_local(v));
                    if (detail::polygons_overlap_2d(fi.vertices2d, bj, tol))
                        throw Error("coplanar overlap unsupported (fractures " +
                                    std::to_string(fi.id) + ", " + std::to_string(fj.id) + ")");
                }
                continue;
            }
            const Vec3 d = d_raw / dn;
            // a point on both planes: solve [ni; nj; d] p0 = (ni.pi, nj.pj, d.ci)
            const Vec3 r0 = ni, r1 = nj, r2 = d;
            const double rhs0 = dot(ni, fi.frame.origin);
            const double rhs1 = dot(nj, fj.frame.origin);
            const double rhs2 = dot(d, fi.centroid3d());
            const double det = dot(r0, cross(r1, r2));
            if (std::abs(det) < 1e-14) continue;
            const Vec3 p0 = (cross(r1, r2) * rhs0 + cross(r2, r0) * rhs1 + cross(r0, r1) * rhs2) / det;

            const Vec2 q_i = fi.frame.to_local(p0);
            const Vec2 e_i{dot(d, fi.frame.e1), dot(d, fi.frame.e2)};
            const Vec2 q_j = fj.frame.to_local(p0);
            const Vec2 e_j{dot(d, fj.frame.e1), dot(d, fj.frame.e2)};

            const double ptol = std::max(tol, 1e-12 * scale);
            auto iv_i = detail::line_polygon_intervals(fi.vertices2d, q_i, e_i, ptol);
            auto iv_j = detail::line_polygon_intervals(fj.vertices2d, q_j, e_j, ptol);
            // intersect the two interval sets
            for (const auto& [s0, s1] : iv_i) {
                for (const auto& [t0, t1] : iv_j) {
                    const double lo = std::max(s0, t0), hi = std::min(s1, t1);
                    if (hi - lo <= tol) continue;
                    Trace tr;
                    tr.id = next_id++;
                    tr.fractures = {fi.id, fj.id};
                    tr.segment3d = {p0 + d * lo, p0 + d * hi};
                    tr.segment_local_i = {fi.frame.to_local(tr.segment3d[0]),
                                          fi.frame.to_local(tr.segment3d[1])};
                    tr.segment_local_j = {fj.frame.to_local(tr.segment3d[0]),
                                          fj.frame.to_local(tr.segment3d[1])};
                    traces.push_back(tr);
                }
            }
        }
    }
    return traces;
}

/// Assemble a network from fractures: computes traces and the incidence map,
/// and checks the network-level invariants.
inline FractureNetwork build_network(std::vector<Fracture> fractures, double tol = -1.0) {
    FractureNetwork net;
    net.fractures = std::move(fractures);
    if (tol <= 0.0) {
        double diam = net.diameter();
        tol = 1e-9 * (diam > 0.0 ? diam : 1.0);
    }
    net.traces = compute_traces(net.fractures, tol);
    for (const Trace& t : net.traces) {
        net.incidence[t.fractures.first].insert(t.id);
        net.incidence[t.fractures.second].insert(t.id);
    }
    bool any_dirichlet = false;
    for (const Fracture& f : net.fractures)
        for (const EdgeTag& tag : f.boundary_tags)
            if (tag.kind == BcKind::dirichlet) any_dirichlet = true;
    if (!any_dirichlet) throw Error("network has no Dirichlet boundary edge");
    return net;
}

}  // namespace dfn
