#pragma once

// Heat transport driven by a Darcy flux field: boundary classification by the
// sign of the computed normal flux, finite-volume upwind semi-discretization
// (TPFA diffusion, weighted upwind at traces) and the shared implicit Euler
// time loop.

#include "dfnflow/darcy.hpp"
#include "dfnflow/darcy_fem.hpp"

namespace dfn {

enum class TransportScheme { fv_upwind, fem_supg };

inline std::string to_string(TransportScheme s) {
    return s == TransportScheme::fv_upwind ? "fv_upwind" : "fem_supg";
}

struct TransportCoefficients {
    double zeta = 1.0;       // thermal capacity coefficient
    double D = 1e-4;         // diffusion coefficient
    double iota = 0.0;       // fluid-rock exchange; reaction off when 0
    double theta_hat = 0.0;  // rock temperature
};

struct TransportProblem {
    TransportCoefficients coeff;                      // uniform defaults
    std::map<int, TransportCoefficients> per_fracture;
    double theta_inflow = 1.0;   // Dirichlet value on the inflow boundary
    double theta_initial = 0.0;  // initial condition (constant)
    std::function<double(int, const Vec2&)> initial_field;  // overrides theta_initial when set
    double dt = 0.05;
    int n_steps = 300;
    double tol = 1e-9;

    const TransportCoefficients& coefficients(int fracture_id) const {
        auto it = per_fracture.find(fracture_id);
        return it == per_fracture.end() ? coeff : it->second;
    }

    void validate() const {
        if (!(dt > 0.0)) throw Error("transport: dt must be positive");
        if (n_steps < 0) throw Error("transport: n_steps must be nonnegative");
        auto check = [](const TransportCoefficients& c) {
            if (!(c.zeta > 0.0)) throw Error("transport: zeta must be positive");
            if (c.D < 0.0 || c.iota < 0.0) throw Error("transport: D and iota must be nonnegative");
        };
        check(coeff);
        for (const auto& [id, c] : per_fracture) check(c);
    }
};

enum class EdgeFlow { none, inflow, outflow };

/// Partition of the Dirichlet boundary by the sign of the Darcy flux: inflow
/// where u.n_ext < 0, outflow otherwise. Zero-flux Dirichlet edges count as
/// outflow; fluxes below solver noise (relative to the largest flux in the
/// field) are treated as zero.
inline std::vector<std::vector<EdgeFlow>> classify_boundary(const NetworkMesh& nm,
                                                            const FluxField& flux) {
    double qmax = 0.0;
    for (const auto& per_mesh : flux.edge_flux)
        for (double q : per_mesh) qmax = std::max(qmax, std::abs(q));
    const double tol = 1e-9 * std::max(1.0, qmax);
    std::vector<std::vector<EdgeFlow>> out(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        out[m].assign(mesh.edges.size(), EdgeFlow::none);
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (!edge.is_boundary() || edge.is_trace() || edge.boundary_edge < 0) continue;
            const EdgeTag& tag = detail::edge_tag(nm, (int)m, edge);
            if (tag.kind != BcKind::dirichlet) continue;
            out[m][e] = flux.edge_flux[m][e] < -tol ? EdgeFlow::inflow : EdgeFlow::outflow;
        }
    }
    return out;
}

/// Assembled semi-discrete operators: M dθ/dt + A θ = s. For vertex schemes
/// the Dirichlet rows of (M/dt + A) are replaced by identity equations.
struct TransportOperator {
    TransportScheme scheme = TransportScheme::fv_upwind;
    SparseMatrix M;
    SparseMatrix A;
    std::vector<double> s;
    std::vector<char> dirichlet_row;
    std::vector<double> dirichlet_value;
    std::vector<std::vector<EdgeFlow>> boundary;
    // audit data for the global balance check (FV scheme)
    struct BoundaryTerm {
        std::size_t row;
        double q;          // advective flux (outward)
        double alpha;      // diffusive half-transmissibility (inflow edges)
        double theta_bar;  // boundary value (inflow edges)
        bool inflow;
    };
    std::vector<BoundaryTerm> boundary_terms;
    std::vector<double> reaction_volume;  // iota |c| per row
    std::vector<double> reaction_theta;   // theta_hat per row
    VertexDofs dofs;                      // vertex schemes only
};

/// FV upwind + TPFA diffusion semi-discretization. Advection at trace
/// segments upwinds each half connection against the flux-weighted upstream
/// mixture (the eliminated trace state); diffusion uses the same star-delta
/// elimination as the flow solver.
inline TransportOperator assemble_fv_upwind(const NetworkMesh& nm, const FluxField& flux,
                                            const TransportProblem& problem) {
    problem.validate();
    TransportOperator op;
    op.scheme = TransportScheme::fv_upwind;
    op.boundary = classify_boundary(nm, flux);
    const CellIndex index(nm);
    const std::size_t n = index.total;
    op.M = SparseMatrix(n, n);
    op.A = SparseMatrix(n, n);
    op.s.assign(n, 0.0);
    op.dirichlet_row.assign(n, 0);
    op.dirichlet_value.assign(n, 0.0);
    op.reaction_volume.assign(n, 0.0);
    op.reaction_theta.assign(n, 0.0);

    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const TransportCoefficients& c = problem.coefficients(mesh.fracture_id);
        for (std::size_t cell = 0; cell < mesh.cells.size(); ++cell) {
            const std::size_t row = index((int)m, (int)cell);
            const double vol = mesh.cell_area((int)cell);
            op.M.add(row, row, c.zeta * vol);
            if (c.iota > 0.0) {
                op.A.add(row, row, c.iota * vol);
                op.s[row] += c.iota * vol * c.theta_hat;
                op.reaction_volume[row] = c.iota * vol;
                op.reaction_theta[row] = c.theta_hat;
            }
        }
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const MeshEdge& edge = mesh.edges[e];
            if (edge.is_trace()) continue;
            const double q = flux.edge_flux[m][e];
            if (!edge.is_boundary()) {
                const std::size_t l = index((int)m, edge.cell_left);
                const std::size_t r = index((int)m, edge.cell_right);
                // upwind advection
                if (q >= 0.0) {
                    op.A.add(l, l, q);
                    op.A.add(r, l, -q);
                } else {
                    op.A.add(l, r, q);
                    op.A.add(r, r, -q);
                }
                // TPFA diffusion
                if (c.D > 0.0) {
                    const double al = detail::half_transmissibility(mesh, edge.cell_left, (int)e, c.D);
                    const double ar = detail::half_transmissibility(mesh, edge.cell_right, (int)e, c.D);
                    const double T = al * ar / (al + ar);
                    op.A.add(l, l, T);
                    op.A.add(r, r, T);
                    op.A.add(l, r, -T);
                    op.A.add(r, l, -T);
                }
            } else {
                const std::size_t row = index((int)m, edge.cell_left);
                if (op.boundary[m][e] == EdgeFlow::inflow) {
                    // advective influx at theta_bar, diffusive ghost value theta_bar
                    op.s[row] -= q * problem.theta_inflow;  // q < 0
                    double alpha = 0.0;
                    if (c.D > 0.0) {
                        alpha = detail::half_transmissibility(mesh, edge.cell_left, (int)e, c.D);
                        op.A.add(row, row, alpha);
                        op.s[row] += alpha * problem.theta_inflow;
                    }
                    op.boundary_terms.push_back({row, q, alpha, problem.theta_inflow, true});
                } else if (op.boundary[m][e] == EdgeFlow::outflow) {
                    // first-order advective outflow, zero diffusive flux
                    op.A.add(row, row, q);
                    op.boundary_terms.push_back({row, q, 0.0, 0.0, false});
                }
                // no-flow edges carry neither advective nor diffusive flux
            }
        }
    }

    // trace segments: weighted upwind + diffusive star-delta
    const TraceCouplingTable coupling = build_trace_coupling(nm);
    coupling.for_each_segment([&](int tid, std::size_t s, const TraceSegment& seg) {
        const auto& q = flux.trace_half_flux.at(tid)[s];
        const std::size_t nh = seg.halves.size();
        std::vector<std::size_t> rows(nh);
        for (std::size_t h = 0; h < nh; ++h)
            rows[h] = index(seg.halves[h].mesh, seg.halves[h].cell);
        // advection: trace state = flux-weighted mixture of the upstream cells
        double q_pos = 0.0;
        for (double v : q) q_pos += std::max(v, 0.0);
        for (std::size_t h = 0; h < nh; ++h) {
            if (q[h] > 0.0) {
                op.A.add(rows[h], rows[h], q[h]);
            } else if (q[h] < 0.0) {
                if (q_pos > 0.0) {
                    for (std::size_t d = 0; d < nh; ++d)
                        if (q[d] > 0.0) op.A.add(rows[h], rows[d], q[h] * (q[d] / q_pos));
                } else {
                    for (std::size_t d = 0; d < nh; ++d)
                        op.A.add(rows[h], rows[d], q[h] / static_cast<double>(nh));
                }
            }
        }
        // diffusion through the eliminated trace value
        std::vector<double> alpha(nh, 0.0);
        double denom = 0.0;
        for (std::size_t h = 0; h < nh; ++h) {
            const TraceHalf& th = seg.halves[h];
            const double D = problem.coefficients(nm.meshes[(std::size_t)th.mesh].fracture_id).D;
            if (D <= 0.0) continue;
            alpha[h] = detail::half_transmissibility(nm.meshes[(std::size_t)th.mesh], th.cell,
                                                     th.edge, D);
            denom += alpha[h];
        }
        if (denom > 0.0) {
            for (std::size_t a = 0; a < nh; ++a) {
                if (alpha[a] == 0.0) continue;
                op.A.add(rows[a], rows[a], alpha[a] * (denom - alpha[a]) / denom);
                for (std::size_t b = 0; b < nh; ++b) {
                    if (a == b || alpha[b] == 0.0) continue;
                    op.A.add(rows[a], rows[b], -alpha[a] * alpha[b] / denom);
                }
            }
        }
    });
    return op;
}

/// One implicit Euler step: (M/dt + A) θ' = M/dt θ + s, with overridden
/// Dirichlet rows for vertex schemes.
struct TimeStepper {
    SparseMatrix lhs;
    const TransportOperator* op = nullptr;
    double dt = 0.0;
    double tol = 1e-9;

    TimeStepper(const TransportOperator& oper, double dt_, double tol_)
        : op(&oper), dt(dt_), tol(tol_) {
        const std::size_t n = oper.s.size();
        lhs = SparseMatrix(n, n);
        for (std::size_t r = 0; r < n; ++r)
            if (oper.dirichlet_row[r]) lhs.add(r, r, 1.0);
        // scatter M/dt + A, skipping Dirichlet rows
        auto scatter = [&](const SparseMatrix& src, double scale) {
            for (std::size_t r = 0; r < n; ++r) {
                if (oper.dirichlet_row[r]) continue;
                src.for_each_in_row(r, [&](std::size_t c2, double v) { lhs.add(r, c2, v * scale); });
            }
        };
        scatter(oper.M, 1.0 / dt);
        scatter(oper.A, 1.0);
        lhs.compress();
    }

    std::vector<double> step(const std::vector<double>& theta, int step_index) const {
        const std::size_t n = theta.size();
        std::vector<double> rhs = op->M.apply(theta);
        for (std::size_t r = 0; r < n; ++r) {
            rhs[r] = op->dirichlet_row[r] ? op->dirichlet_value[r] : rhs[r] / dt + op->s[r];
        }
        std::vector<double> warm = theta;  // warm start
        for (std::size_t r = 0; r < n; ++r)
            if (op->dirichlet_row[r]) warm[r] = op->dirichlet_value[r];
        std::vector<double> next = warm;
        SolveReport rep = solve_unsymmetric(lhs, rhs, next, tol);
        if (!rep.converged) {
            next = warm;  // discard a possibly broken-down iterate
            rep = solve_gmres(lhs, rhs, next, tol);
        }
        if (!rep.converged)
            throw Error("transport step " + std::to_string(step_index) +
                        " did not converge (residual " + std::to_string(rep.residual_norm) + ")");
        return next;
    }
};

struct TemperatureHistory {
    TransportScheme scheme = TransportScheme::fv_upwind;
    std::vector<std::vector<double>> snapshots;  // flat DOF vector per step (n_steps + 1)
    double dt = 0.0;

    double time(std::size_t k) const { return dt * static_cast<double>(k); }
};

/// Global heat balance residual of one FV step, relative to the active terms:
/// storage change minus boundary and reaction exchange.
inline double fv_balance_residual(const NetworkMesh& nm, const TransportOperator& op,
                                  const std::vector<double>& before,
                                  const std::vector<double>& after, double dt) {
    const CellIndex index(nm);
    double storage = 0.0;
    const std::vector<double> m_after = op.M.apply(after);
    const std::vector<double> m_before = op.M.apply(before);
    for (std::size_t r = 0; r < m_after.size(); ++r) storage += (m_after[r] - m_before[r]) / dt;
    double input = 0.0, scale = std::abs(storage);
    for (const auto& bt : op.boundary_terms) {
        double term = 0.0;
        if (bt.inflow)
            term = -bt.q * bt.theta_bar + bt.alpha * (bt.theta_bar - after[bt.row]);
        else
            term = -bt.q * after[bt.row];
        input += term;
        scale = std::max(scale, std::abs(term));
    }
    for (std::size_t r = 0; r < op.reaction_volume.size(); ++r) {
        if (op.reaction_volume[r] == 0.0) continue;
        input += op.reaction_volume[r] * (op.reaction_theta[r] - after[r]);
        scale = std::max(scale, std::abs(op.reaction_volume[r] * after[r]));
    }
    return std::abs(storage - input) / std::max(scale, 1e-30);
}

/// DOF positions of a transport operator: cell centroids for FV, vertex
/// coordinates for the vertex schemes (one representative per shared DOF).
inline std::vector<double> initial_dof_vector(const NetworkMesh& nm, const TransportOperator& op,
                                              const TransportProblem& problem) {
    std::vector<double> theta(op.s.size(), problem.theta_initial);
    if (!problem.initial_field) return theta;
    if (op.scheme == TransportScheme::fv_upwind) {
        const CellIndex index(nm);
        for (std::size_t m = 0; m < nm.meshes.size(); ++m)
            for (std::size_t c = 0; c < nm.meshes[m].cells.size(); ++c)
                theta[index((int)m, (int)c)] = problem.initial_field(
                    nm.meshes[m].fracture_id, nm.meshes[m].cell_centroid((int)c));
    } else {
        for (std::size_t m = 0; m < nm.meshes.size(); ++m)
            for (std::size_t v = 0; v < nm.meshes[m].vertices.size(); ++v)
                theta[(std::size_t)op.dofs.global[m][v]] =
                    problem.initial_field(nm.meshes[m].fracture_id, nm.meshes[m].vertices[v]);
    }
    return theta;
}

inline TemperatureHistory run_transport(const NetworkMesh& nm, const TransportOperator& op,
                                        const TransportProblem& problem) {
    problem.validate();
    TemperatureHistory hist;
    hist.scheme = op.scheme;
    hist.dt = problem.dt;
    std::vector<double> theta = initial_dof_vector(nm, op, problem);
    hist.snapshots.push_back(theta);
    const TimeStepper stepper(op, problem.dt, problem.tol);
    for (int k = 0; k < problem.n_steps; ++k) {
        theta = stepper.step(theta, k);
        for (double v : theta)
            if (!std::isfinite(v)) throw Error("transport produced non-finite values at step " +
                                               std::to_string(k + 1));
        hist.snapshots.push_back(theta);
    }
    (void)nm;
    return hist;
}

}  // namespace dfn
