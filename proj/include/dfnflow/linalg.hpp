#pragma once

// Sparse assembly containers and the Krylov solvers used by the flow and
// transport modules: diagonally preconditioned CG for SPD systems, BiCGStab
// for the nonsymmetric transport steps and a Schur-complement CG for the
// mixed saddle-point systems. Small dense helpers back the oracle paths.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "dfnflow/geometry.hpp"  // Error

namespace dfn {

struct SolveReport {
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
    std::string method;
};

/// Coordinate-assembled sparse matrix with CSR compression. Duplicate
/// coordinate entries sum on compression.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void add(std::size_t r, std::size_t c, double v) {
        if (r >= rows_ || c >= cols_) throw Error("sparse add: index out of range");
        if (!std::isfinite(v)) throw Error("sparse add: non-finite value");
        coo_.push_back({r, c, v});
        compressed_ = false;
    }

    void compress() const {
        if (compressed_) return;
        std::vector<std::size_t> count(rows_ + 1, 0);
        for (const auto& e : coo_) ++count[e.r + 1];
        std::partial_sum(count.begin(), count.end(), count.begin());
        std::vector<std::size_t> cols(coo_.size());
        std::vector<double> vals(coo_.size());
        {
            std::vector<std::size_t> fill(count.begin(), count.end() - 1);
            for (const auto& e : coo_) {
                const std::size_t k = fill[e.r]++;
                cols[k] = e.c;
                vals[k] = e.v;
            }
        }
        row_ptr_.assign(rows_ + 1, 0);
        col_.clear();
        val_.clear();
        col_.reserve(coo_.size());
        val_.reserve(coo_.size());
        std::vector<std::size_t> order;
        for (std::size_t r = 0; r < rows_; ++r) {
            const std::size_t b = count[r], e = count[r + 1];
            const std::size_t row_begin = col_.size();
            order.resize(e - b);
            std::iota(order.begin(), order.end(), b);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t bb) { return cols[a] < cols[bb]; });
            for (std::size_t k : order) {
                if (col_.size() > row_begin && col_.back() == cols[k]) {
                    val_.back() += vals[k];
                } else {
                    col_.push_back(cols[k]);
                    val_.push_back(vals[k]);
                    ++row_ptr_[r + 1];
                }
            }
        }
        for (std::size_t r = 0; r < rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];
        compressed_ = true;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != cols_) throw Error("matvec: dimension mismatch");
        compress();
        std::vector<double> y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] = s;
        }
        return y;
    }

    std::vector<double> apply_transpose(const std::vector<double>& x) const {
        if (x.size() != rows_) throw Error("matvec^T: dimension mismatch");
        compress();
        std::vector<double> y(cols_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                y[col_[k]] += val_[k] * x[r];
        return y;
    }

    double coeff(std::size_t r, std::size_t c) const {
        compress();
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (col_[k] == c) return val_[k];
        return 0.0;
    }

    std::vector<double> diagonal() const {
        compress();
        std::vector<double> d(std::min(rows_, cols_), 0.0);
        for (std::size_t r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
        return d;
    }

    template <typename F>
    void for_each_in_row(std::size_t r, F&& f) const {
        compress();
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) f(col_[k], val_[k]);
    }

    /// Symmetric Gauss-Seidel preconditioner application:
    /// z = (D+U)^-1 D (D+L)^-1 r. Requires a square matrix with nonzero diagonal.
    std::vector<double> sgs_apply(const std::vector<double>& r) const {
        compress();
        const std::size_t n = rows_;
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i], d = 1.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (col_[k] < i) s -= val_[k] * y[col_[k]];
                else if (col_[k] == i) d = val_[k];
            }
            y[i] = std::abs(d) > 1e-300 ? s / d : s;
        }
        std::vector<double> z(n, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            double s = 0.0, d = 1.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (col_[k] > i) s += val_[k] * z[col_[k]];
                else if (col_[k] == i) d = val_[k];
            }
            z[i] = std::abs(d) > 1e-300 ? y[i] - s / d : y[i];
        }
        return z;
    }

    /// Per-row sum of val^2 * w[col]; the diagonal of (this) diag(w) (this)^T.
    std::vector<double> row_sumsq_scaled(const std::vector<double>& w) const {
        if (w.size() != cols_) throw Error("row_sumsq_scaled: dimension mismatch");
        compress();
        std::vector<double> d(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                d[r] += val_[k] * val_[k] * w[col_[k]];
        return d;
    }

    std::vector<std::vector<double>> dense() const {
        compress();
        std::vector<std::vector<double>> a(rows_, std::vector<double>(cols_, 0.0));
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) a[r][col_[k]] += val_[k];
        return a;
    }

    /// MatrixMarket coordinate dump (debugging aid).
    void write_matrix_market(const std::string& path) const {
        compress();
        std::FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw Error("cannot open " + path);
        std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
        std::fprintf(f, "%zu %zu %zu\n", rows_, cols_, col_.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                std::fprintf(f, "%zu %zu %.17g\n", r + 1, col_[k] + 1, val_[k]);
        std::fclose(f);
    }

private:
    struct Entry {
        std::size_t r, c;
        double v;
    };
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Entry> coo_;
    mutable bool compressed_ = false;
    mutable std::vector<std::size_t> row_ptr_, col_;
    mutable std::vector<double> val_;
};

namespace linalg {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }
inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Dense LU with partial pivoting; oracle/fallback path for small systems.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const std::size_t n = a.size();
    if (n == 0) return {};
    if (a[0].size() != n || b.size() != n) throw Error("dense_solve: not square");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a[r][k]) > std::abs(a[p][k])) p = r;
        if (std::abs(a[p][k]) < 1e-300) throw Error("dense_solve: singular matrix");
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double m = a[r][k] / a[k][k];
            if (m == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) a[r][c] -= m * a[k][c];
            b[r] -= m * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= a[k][c] * x[c];
        x[k] = s / a[k][k];
    }
    return x;
}

using LinOp = std::function<std::vector<double>(const std::vector<double>&)>;

/// Preconditioned conjugate gradient on an abstract SPD operator.
inline SolveReport cg(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                      const std::vector<double>& inv_diag, double tol, int max_iter) {
    SolveReport rep;
    rep.method = "pcg";
    const std::size_t n = b.size();
    if (x.size() != n) x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        rep.converged = true;
        return rep;
    }
    std::vector<double> r = A(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    std::vector<double> z(n), p(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        rep.residual_norm = norm2(r);
        if (rep.residual_norm <= tol * bnorm) {
            rep.converged = true;
            rep.iterations = it;
            return rep;
        }
        std::vector<double> ap = A(p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;  // lost positive definiteness (or exact solution)
        const double alpha = rz / pap;
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rep.iterations = it + 1;
    }
    rep.residual_norm = norm2(r);
    rep.converged = rep.residual_norm <= tol * bnorm;
    return rep;
}

}  // namespace linalg

/// Diagonally preconditioned CG for SPD systems. Converged means
/// ||Ax-b|| <= tol ||b||.
inline SolveReport solve_spd(const SparseMatrix& A, const std::vector<double>& b,
                             std::vector<double>& x, double tol = 1e-10, int max_iter = -1) {
    if (A.rows() != A.cols() || b.size() != A.rows()) throw Error("solve_spd: dimension mismatch");
    for (double v : b)
        if (!std::isfinite(v)) throw Error("solve_spd: non-finite rhs");
    if (max_iter < 0) max_iter = static_cast<int>(10 * A.rows() + 100);
    std::vector<double> inv_diag = A.diagonal();
    for (double& d : inv_diag) d = std::abs(d) > 1e-300 ? 1.0 / d : 1.0;
    auto op = [&A](const std::vector<double>& v) { return A.apply(v); };
    SolveReport rep = linalg::cg(op, b, x, inv_diag, tol, max_iter);
    rep.method = "pcg-jacobi";
    return rep;
}

/// Jacobi-preconditioned BiCGStab for the nonsymmetric transport systems.
inline SolveReport solve_unsymmetric(const SparseMatrix& A, const std::vector<double>& b,
                                     std::vector<double>& x, double tol = 1e-9,
                                     int max_iter = -1) {
    using linalg::axpy;
    using linalg::dot;
    using linalg::norm2;
    SolveReport rep;
    rep.method = "bicgstab-sgs";
    const std::size_t n = b.size();
    if (A.rows() != A.cols() || n != A.rows()) throw Error("solve_unsymmetric: dimension mismatch");
    if (max_iter < 0) max_iter = static_cast<int>(10 * n + 100);
    if (x.size() != n) x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        rep.converged = true;
        return rep;
    }
    std::vector<double> r = A.apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    std::vector<double> r0 = r, p(n, 0.0), v(n, 0.0);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        rep.residual_norm = norm2(r);
        if (!std::isfinite(rep.residual_norm)) break;  // breakdown
        rep.iterations = it;
        if (rep.residual_norm <= tol * bnorm) {
            rep.converged = true;
            return rep;
        }
        const double rho_new = dot(r0, r);
        if (std::abs(rho_new) < 1e-300) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        std::vector<double> ph = A.sgs_apply(p);
        v = A.apply(ph);
        alpha = rho / dot(r0, v);
        std::vector<double> s = r;
        axpy(-alpha, v, s);
        if (norm2(s) <= tol * bnorm) {
            axpy(alpha, ph, x);
            r = s;
            rep.residual_norm = norm2(r);
            rep.iterations = it + 1;
            rep.converged = true;
            return rep;
        }
        std::vector<double> sh = A.sgs_apply(s);
        std::vector<double> t = A.apply(sh);
        const double tt = dot(t, t);
        if (tt == 0.0) break;
        omega = dot(t, s) / tt;
        axpy(alpha, ph, x);
        axpy(omega, sh, x);
        r = s;
        axpy(-omega, t, r);
        if (omega == 0.0) break;
    }
    rep.residual_norm = norm2(r);
    rep.converged = std::isfinite(rep.residual_norm) && rep.residual_norm <= tol * bnorm;
    return rep;
}

/// Restarted GMRES with Jacobi preconditioning; fallback path for transport
/// systems on which BiCGStab stagnates.
inline SolveReport solve_gmres(const SparseMatrix& A, const std::vector<double>& b,
                               std::vector<double>& x, double tol = 1e-9, int restart = 80,
                               int max_restarts = 200) {
    using linalg::norm2;
    SolveReport rep;
    rep.method = "gmres-sgs";
    const std::size_t n = b.size();
    if (A.rows() != A.cols() || n != A.rows()) throw Error("solve_gmres: dimension mismatch");
    if (x.size() != n) x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        rep.converged = true;
        return rep;
    }
    auto precond = [&](const std::vector<double>& v) { return A.sgs_apply(v); };
    for (int outer = 0; outer < max_restarts; ++outer) {
        std::vector<double> r = A.apply(x);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        rep.residual_norm = norm2(r);
        if (rep.residual_norm <= tol * bnorm) {
            rep.converged = true;
            return rep;
        }
        r = precond(std::move(r));
        const double beta = norm2(r);
        if (beta == 0.0) break;
        std::vector<std::vector<double>> V{r};
        for (double& v : V[0]) v /= beta;
        const int m = restart;
        std::vector<std::vector<double>> H((std::size_t)m + 1, std::vector<double>((std::size_t)m, 0.0));
        std::vector<double> cs((std::size_t)m, 0.0), sn((std::size_t)m, 0.0), g((std::size_t)m + 1, 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < m; ++k) {
            std::vector<double> w = precond(A.apply(V[(std::size_t)k]));
            for (int i = 0; i <= k; ++i) {
                H[(std::size_t)i][(std::size_t)k] = linalg::dot(w, V[(std::size_t)i]);
                linalg::axpy(-H[(std::size_t)i][(std::size_t)k], V[(std::size_t)i], w);
            }
            H[(std::size_t)k + 1][(std::size_t)k] = norm2(w);
            if (H[(std::size_t)k + 1][(std::size_t)k] > 0.0)
                for (double& v : w) v /= H[(std::size_t)k + 1][(std::size_t)k];
            V.push_back(std::move(w));
            // Givens rotations
            for (int i = 0; i < k; ++i) {
                const double t = cs[(std::size_t)i] * H[(std::size_t)i][(std::size_t)k] +
                                 sn[(std::size_t)i] * H[(std::size_t)i + 1][(std::size_t)k];
                H[(std::size_t)i + 1][(std::size_t)k] =
                    -sn[(std::size_t)i] * H[(std::size_t)i][(std::size_t)k] +
                    cs[(std::size_t)i] * H[(std::size_t)i + 1][(std::size_t)k];
                H[(std::size_t)i][(std::size_t)k] = t;
            }
            const double denom = std::hypot(H[(std::size_t)k][(std::size_t)k],
                                            H[(std::size_t)k + 1][(std::size_t)k]);
            if (denom == 0.0) break;
            cs[(std::size_t)k] = H[(std::size_t)k][(std::size_t)k] / denom;
            sn[(std::size_t)k] = H[(std::size_t)k + 1][(std::size_t)k] / denom;
            H[(std::size_t)k][(std::size_t)k] = denom;
            H[(std::size_t)k + 1][(std::size_t)k] = 0.0;
            g[(std::size_t)k + 1] = -sn[(std::size_t)k] * g[(std::size_t)k];
            g[(std::size_t)k] = cs[(std::size_t)k] * g[(std::size_t)k];
            rep.iterations++;
            if (std::abs(g[(std::size_t)k + 1]) <= 0.1 * tol * bnorm) {
                ++k;
                break;
            }
        }
        // back substitution and update
        std::vector<double> y((std::size_t)k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[(std::size_t)i];
            for (int j = i + 1; j < k; ++j) s -= H[(std::size_t)i][(std::size_t)j] * y[(std::size_t)j];
            y[(std::size_t)i] = s / H[(std::size_t)i][(std::size_t)i];
        }
        for (int i = 0; i < k; ++i) linalg::axpy(y[(std::size_t)i], V[(std::size_t)i], x);
    }
    std::vector<double> r = A.apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    rep.residual_norm = norm2(r);
    rep.converged = rep.residual_norm <= tol * bnorm;
    return rep;
}

/// Saddle-point system
///   [A  B^T] [u]   [f]
///   [B  0  ] [p] = [g]
/// solved by CG on the Schur complement S = B A^{-1} B^T applied matrix-free
/// with inner SPD solves on A. A must be SPD.
inline SolveReport solve_saddle(const SparseMatrix& A, const SparseMatrix& B,
                                const std::vector<double>& f, const std::vector<double>& g,
                                std::vector<double>& u, std::vector<double>& p,
                                double tol = 1e-10) {
    if (A.rows() != A.cols()) throw Error("solve_saddle: A not square");
    if (B.cols() != A.rows()) throw Error("solve_saddle: B incompatible with A");
    if (f.size() != A.rows() || g.size() != B.rows()) throw Error("solve_saddle: rhs mismatch");

    const double inner_tol = std::min(1e-12, 0.01 * tol);
    const int inner_max = static_cast<int>(20 * A.rows() + 200);
    std::vector<double> inv_diag_a = A.diagonal();
    for (double& d : inv_diag_a) d = std::abs(d) > 1e-300 ? 1.0 / d : 1.0;
    auto a_op = [&A](const std::vector<double>& v) { return A.apply(v); };
    int inner_total = 0;
    auto solve_a = [&](const std::vector<double>& rhs) {
        std::vector<double> x(rhs.size(), 0.0);
        SolveReport r = linalg::cg(a_op, rhs, x, inv_diag_a, inner_tol, inner_max);
        inner_total += r.iterations;
        if (!r.converged) throw Error("solve_saddle: inner SPD solve diverged (residual " +
                                      std::to_string(r.residual_norm) + ")");
        return x;
    };

    // eliminate u: S p = B A^{-1} f - g with S = B A^{-1} B^T (SPD)
    std::vector<double> ainv_f = solve_a(f);
    std::vector<double> rhs_s = B.apply(ainv_f);
    for (std::size_t i = 0; i < rhs_s.size(); ++i) rhs_s[i] -= g[i];

    auto s_op = [&](const std::vector<double>& q) { return B.apply(solve_a(B.apply_transpose(q))); };
    // preconditioner: diag(B diag(A)^-1 B^T)
    std::vector<double> s_diag = B.row_sumsq_scaled(inv_diag_a);
    for (double& d : s_diag) d = d > 1e-300 ? 1.0 / d : 1.0;
    p.assign(B.rows(), 0.0);
    SolveReport rep = linalg::cg(s_op, rhs_s, p, s_diag, tol, static_cast<int>(10 * B.rows() + 200));
    rep.method = "schur-cg";
    rep.iterations += inner_total;
    // u = A^{-1} (f - B^T p)
    std::vector<double> rhs_u = B.apply_transpose(p);
    for (std::size_t i = 0; i < rhs_u.size(); ++i) rhs_u[i] = f[i] - rhs_u[i];
    u = solve_a(rhs_u);
    if (!rep.converged)
        rep.method += " (outer CG not converged)";
    return rep;
}

}  // namespace dfn
