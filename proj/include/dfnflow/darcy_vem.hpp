#pragma once

// Primal virtual element method of order 1 on polygonal cells. The element
// stiffness is the consistency term built from the elliptic projector plus a
// dofi-dofi stabilization scaled by the cell conductivity; on triangles the
// projector is exact and the scheme coincides with P1.

#include "dfnflow/darcy_fem.hpp"

namespace dfn {
namespace vem {

/// Is the polygon star-shaped? Kernel computed by clipping a bounding box
/// with the half-plane of every edge.
inline bool star_shaped(const std::vector<Vec2>& poly, double tol = 1e-12) {
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& p : poly) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    std::vector<Vec2> kernel{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};
    const double scale = std::max(hi.x - lo.x, hi.y - lo.y);
    for (std::size_t e = 0; e < poly.size() && !kernel.empty(); ++e) {
        const Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
        // keep the left side of a->b (interior of a CCW polygon)
        std::vector<Vec2> next;
        const std::size_t n = kernel.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 p = kernel[k], q = kernel[(k + 1) % n];
            const double sp = cross(b - a, p - a), sq = cross(b - a, q - a);
            if (sp >= -tol * scale) next.push_back(p);
            if ((sp > tol * scale && sq < -tol * scale) ||
                (sp < -tol * scale && sq > tol * scale)) {
                const double t = sp / (sp - sq);
                next.push_back(p + (q - p) * t);
            }
        }
        kernel = std::move(next);
    }
    if (kernel.size() < 3) return false;
    return std::abs(polygon_area(kernel)) > tol * scale * scale;
}

/// Element operator of the order-1 VEM: the projector matrix onto {1, m1, m2}
/// (scaled monomials), consistency + stabilization stiffness and geometry.
struct Element {
    std::vector<std::vector<double>> stiffness;  // n x n
    std::vector<std::vector<double>> pi_star;    // 3 x n, coefficients of the projection
    double h = 0.0;
    Vec2 centroid;
    double area = 0.0;

    /// Gradient of the projection of the vertex field `values`.
    Vec2 projected_gradient(const std::vector<double>& values) const {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            s1 += pi_star[1][i] * values[i];
            s2 += pi_star[2][i] * values[i];
        }
        return {s1 / h, s2 / h};
    }

    /// Projection value at a point (for diagnostics/tests).
    double projected_value(const std::vector<double>& values, const Vec2& p) const {
        double c0 = 0.0, c1 = 0.0, c2 = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            c0 += pi_star[0][i] * values[i];
            c1 += pi_star[1][i] * values[i];
            c2 += pi_star[2][i] * values[i];
        }
        return c0 + c1 * (p.x - centroid.x) / h + c2 * (p.y - centroid.y) / h;
    }
};

inline Element element_matrices(const std::vector<Vec2>& poly, double K,
                                const std::string& cell_name = "cell") {
    const std::size_t n = poly.size();
    if (n < 3) throw Error("vem element with fewer than 3 vertices");
    if (!star_shaped(poly)) throw Error("vem: " + cell_name + " is not star-shaped");
    Element el;
    el.area = polygon_area(poly);
    if (el.area <= 0.0) throw Error("vem: " + cell_name + " has nonpositive area");
    // centroid and diameter
    {
        double a = 0.0;
        Vec2 c{};
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 p = poly[k], q = poly[(k + 1) % n];
            const double w = p.x * q.y - q.x * p.y;
            a += w;
            c.x += (p.x + q.x) * w;
            c.y += (p.y + q.y) * w;
        }
        el.centroid = {c.x / (3.0 * a), c.y / (3.0 * a)};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                el.h = std::max(el.h, norm(poly[i] - poly[j]));
    }

    // D[i][a] = m_a(v_i), B from the projector definition (boundary quadrature
    // of the gradient identity; the constant fixed by the vertex average)
    std::vector<std::vector<double>> D(n, std::vector<double>(3, 0.0));
    std::vector<std::vector<double>> B(3, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        D[i][0] = 1.0;
        D[i][1] = (poly[i].x - el.centroid.x) / el.h;
        D[i][2] = (poly[i].y - el.centroid.y) / el.h;
        B[0][i] = 1.0 / static_cast<double>(n);
    }
    for (std::size_t e = 0; e < n; ++e) {
        const std::size_t i = e, j = (e + 1) % n;
        const Vec2 d = poly[j] - poly[i];
        const Vec2 nrm{d.y, -d.x};  // outward for CCW, length |e|
        for (int a = 1; a <= 2; ++a) {
            const double na = (a == 1 ? nrm.x : nrm.y) / el.h;
            B[(std::size_t)a][i] += 0.5 * na;
            B[(std::size_t)a][j] += 0.5 * na;
        }
    }
    // G = B D (3x3) and its inverse applied to B
    std::vector<std::vector<double>> G(3, std::vector<double>(3, 0.0));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (std::size_t i = 0; i < n; ++i) G[(std::size_t)a][(std::size_t)b] += B[(std::size_t)a][i] * D[i][(std::size_t)b];
    el.pi_star.assign(3, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> col = linalg::dense_solve(
            G, {B[0][i], B[1][i], B[2][i]});
        for (int a = 0; a < 3; ++a) el.pi_star[(std::size_t)a][i] = col[(std::size_t)a];
    }
    // consistency: K (pi*)^T Gt (pi*), with Gt = G zeroed on the average row
    std::vector<std::vector<double>> Gt = G;
    Gt[0] = {0.0, 0.0, 0.0};
    el.stiffness.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    v += el.pi_star[(std::size_t)a][i] * Gt[(std::size_t)a][(std::size_t)b] *
                         el.pi_star[(std::size_t)b][j];
            el.stiffness[i][j] = K * v;
        }
    // dofi-dofi stabilization on (I - D pi*)
    std::vector<std::vector<double>> R(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double dp = 0.0;
            for (int a = 0; a < 3; ++a) dp += D[i][(std::size_t)a] * el.pi_star[(std::size_t)a][j];
            R[i][j] = (i == j ? 1.0 : 0.0) - dp;
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < n; ++k) v += R[k][i] * R[k][j];
            el.stiffness[i][j] += K * v;
        }
    return el;
}

}  // namespace vem

/// VEM Darcy assembly on polygonal (or triangular) meshes; the DOF layout is
/// the same shared-vertex one as P1.
inline VertexSystem assemble_vem_p1(const NetworkMesh& nm, const DarcyParameters& params) {
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
            std::vector<Vec2> poly(cell.size());
            for (std::size_t k = 0; k < cell.size(); ++k)
                poly[k] = mesh.vertices[(std::size_t)cell[k]];
            const vem::Element el = vem::element_matrices(
                poly, K, "cell " + std::to_string(c) + " of fracture " +
                             std::to_string(mesh.fracture_id));
            std::vector<double> fe(cell.size(), 0.0);
            if (params.source) {
                const double f = params.source(mesh.fracture_id, el.centroid);
                for (double& v : fe) v = f * el.area / static_cast<double>(cell.size());
            }
            std::vector<int> gd(cell.size());
            for (std::size_t k = 0; k < cell.size(); ++k)
                gd[k] = sys.dofs.global[m][(std::size_t)cell[k]];
            detail::scatter_element(sys, gd, el.stiffness, fe);
        }
    }
    return sys;
}

/// Per-cell gradients of a vertex field through the VEM projector.
inline std::vector<std::vector<Vec2>> vem_cell_gradients(
    const NetworkMesh& nm, const std::vector<std::vector<double>>& head) {
    std::vector<std::vector<Vec2>> out(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        out[m].resize(mesh.cells.size());
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const auto& cell = mesh.cells[c];
            std::vector<Vec2> poly(cell.size());
            std::vector<double> vals(cell.size());
            for (std::size_t k = 0; k < cell.size(); ++k) {
                poly[k] = mesh.vertices[(std::size_t)cell[k]];
                vals[k] = head[m][(std::size_t)cell[k]];
            }
            out[m][c] = vem::element_matrices(poly, 1.0).projected_gradient(vals);
        }
    }
    return out;
}

}  // namespace dfn
