#pragma once

// Observables of a transport run: per-fracture averages, outflow-boundary
// average, per-trace total heat fluxes with their conservation mismatch, and
// the mesh Peclet summary. The CSV written here is the single source of truth
// for the benchmark comparisons.

#include <cstdio>
#include <limits>

#include "dfnflow/darcy_vem.hpp"
#include "dfnflow/transport_supg.hpp"

namespace dfn {

/// Uniform access to one temperature snapshot (cell- or vertex-based).
struct FieldView {
    TransportScheme scheme = TransportScheme::fv_upwind;
    std::vector<std::vector<double>> values;  // per mesh

    static FieldView from_flat(const NetworkMesh& nm, const TransportOperator& op,
                               const std::vector<double>& flat) {
        FieldView fv;
        fv.scheme = op.scheme;
        fv.values = op.scheme == TransportScheme::fv_upwind
                        ? split_cell_snapshot(nm, flat)
                        : split_vertex_snapshot(nm, op.dofs, flat);
        return fv;
    }
};

/// Integral mean of theta over one fracture. Exact for cell-constant and P1
/// fields; polygonal VEM cells integrate the projection (vertex mean).
inline double average_theta(const FieldView& field, const NetworkMesh& nm, int fracture_id) {
    const std::size_t m = (std::size_t)nm.mesh_index(fracture_id);
    const FractureMesh& mesh = nm.meshes[m];
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const double a = mesh.cell_area((int)c);
        double v = 0.0;
        if (field.scheme == TransportScheme::fv_upwind) {
            v = field.values[m][c];
        } else {
            for (int vid : mesh.cells[c]) v += field.values[m][(std::size_t)vid];
            v /= static_cast<double>(mesh.cells[c].size());
        }
        num += a * v;
        den += a;
    }
    return num / den;
}

struct OutflowAverage {
    double value = 0.0;
    bool empty = false;  // no outflow edges: value defined as 0 with a warning flag
};

/// Length-weighted mean of the temperature trace on the outflow boundary.
inline OutflowAverage average_outflow(const FieldView& field, const NetworkMesh& nm,
                                      const std::vector<std::vector<EdgeFlow>>& boundary) {
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            if (boundary[m][e] != EdgeFlow::outflow) continue;
            const MeshEdge& edge = mesh.edges[e];
            const double v = field.scheme == TransportScheme::fv_upwind
                                 ? field.values[m][(std::size_t)edge.cell_left]
                                 : 0.5 * (field.values[m][(std::size_t)edge.v0] +
                                          field.values[m][(std::size_t)edge.v1]);
            num += v * edge.length;
            den += edge.length;
        }
    }
    if (den == 0.0) return {0.0, true};
    return {num / den, false};
}

/// Net total (advective + diffusive) heat flux received by fracture `side_id`
/// across one trace: minus the jump of the normal flux within that fracture.
/// FV fields evaluate the star-delta half-connection fluxes; vertex fields use
/// one-sided element traces with the shared edge temperature.
inline double trace_total_flux(const FieldView& field, const FluxField& flux,
                               const NetworkMesh& nm, const TransportProblem& problem,
                               int trace_id, int side_id) {
    const Trace& tr = nm.network->traces[(std::size_t)trace_id];
    if (side_id != tr.fractures.first && side_id != tr.fractures.second)
        throw Error("fracture is not incident to the trace");
    const TraceCouplingTable coupling = build_trace_coupling(nm);
    const auto& segs = coupling.segments.at(trace_id);
    const auto& hf = flux.trace_half_flux.at(trace_id);
    const std::size_t mside = (std::size_t)nm.mesh_index(side_id);
    const double D = problem.coefficients(side_id).D;

    double outflow = 0.0;  // heat leaving the fracture into the trace
    if (field.scheme == TransportScheme::fv_upwind) {
        for (std::size_t s = 0; s < segs.size(); ++s) {
            const auto& halves = segs[s].halves;
            // advective upstream mixture and diffusive eliminated value
            double q_pos = 0.0, theta_up = 0.0;
            for (std::size_t h = 0; h < halves.size(); ++h)
                if (hf[s][h] > 0.0) {
                    q_pos += hf[s][h];
                    theta_up +=
                        hf[s][h] * field.values[(std::size_t)halves[h].mesh][(std::size_t)halves[h].cell];
                }
            theta_up = q_pos > 0.0 ? theta_up / q_pos : 0.0;
            std::vector<double> alpha(halves.size(), 0.0);
            double denom = 0.0, num = 0.0;
            for (std::size_t h = 0; h < halves.size(); ++h) {
                const double Dh =
                    problem.coefficients(nm.meshes[(std::size_t)halves[h].mesh].fracture_id).D;
                if (Dh <= 0.0) continue;
                alpha[h] = detail::half_transmissibility(nm.meshes[(std::size_t)halves[h].mesh],
                                                         halves[h].cell, halves[h].edge, Dh);
                denom += alpha[h];
                num += alpha[h] *
                       field.values[(std::size_t)halves[h].mesh][(std::size_t)halves[h].cell];
            }
            const double theta_diff = denom > 0.0 ? num / denom : 0.0;
            for (std::size_t h = 0; h < halves.size(); ++h) {
                if (halves[h].mesh != (int)mside) continue;
                const double theta_c =
                    field.values[(std::size_t)halves[h].mesh][(std::size_t)halves[h].cell];
                const double adv = hf[s][h] > 0.0 ? hf[s][h] * theta_c : hf[s][h] * theta_up;
                const double dif = alpha[h] * (theta_c - theta_diff);
                outflow += adv + dif;
            }
        }
    } else {
        const FractureMesh& mesh = nm.meshes[mside];
        for (std::size_t s = 0; s < segs.size(); ++s) {
            int edge_index = -1;
            for (const TraceHalf& th : segs[s].halves)
                if (th.mesh == (int)mside) edge_index = th.edge;
            if (edge_index < 0) continue;
            const MeshEdge& edge = mesh.edges[(std::size_t)edge_index];
            const double theta_edge = 0.5 * (field.values[mside][(std::size_t)edge.v0] +
                                             field.values[mside][(std::size_t)edge.v1]);
            auto side_flux = [&](int cell, double outward_sign) {
                const Vec2 u = flux.cell_velocity[mside][(std::size_t)cell];
                // gradient of the P1 field on this cell
                const auto& cv = mesh.cells[(std::size_t)cell];
                Vec2 g{};
                if (cv.size() == 3) {
                    const auto gr = fem::p1_gradients(mesh.vertices[(std::size_t)cv[0]],
                                                      mesh.vertices[(std::size_t)cv[1]],
                                                      mesh.vertices[(std::size_t)cv[2]],
                                                      mesh.cell_area(cell));
                    for (int k = 0; k < 3; ++k)
                        g = g + gr[(std::size_t)k] * field.values[mside][(std::size_t)cv[(std::size_t)k]];
                } else {
                    std::vector<Vec2> poly(cv.size());
                    std::vector<double> vals(cv.size());
                    for (std::size_t k = 0; k < cv.size(); ++k) {
                        poly[k] = mesh.vertices[(std::size_t)cv[k]];
                        vals[k] = field.values[mside][(std::size_t)cv[k]];
                    }
                    g = vem::element_matrices(poly, 1.0).projected_gradient(vals);
                }
                const Vec2 n = edge.normal * outward_sign;
                return (dot(u, n) * theta_edge - D * dot(g, n)) * edge.length;
            };
            outflow += side_flux(edge.cell_left, 1.0);
            if (edge.cell_right >= 0) outflow += side_flux(edge.cell_right, -1.0);
        }
    }
    return -outflow;
}

struct PecletSummary {
    double max = 0.0;
    double min = 0.0;
    bool infinite = false;  // D = 0
    std::map<int, double> per_fracture_max;
};

/// Cell Peclet numbers Pe = |u| h / (2 D), reduced to max/min over the mesh.
inline PecletSummary mesh_peclet(const NetworkMesh& nm, const FluxField& flux,
                                 const TransportProblem& problem) {
    PecletSummary out;
    out.min = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const FractureMesh& mesh = nm.meshes[m];
        const double D = problem.coefficients(mesh.fracture_id).D;
        double fmax = 0.0;
        for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
            const double u = norm(flux.cell_velocity[m][c]);
            const double h = mesh.cell_diameter((int)c);
            if (D <= 0.0) {
                if (u > 0.0) out.infinite = true;
                continue;
            }
            const double pe = u * h / (2.0 * D);
            out.max = std::max(out.max, pe);
            out.min = std::min(out.min, pe);
            fmax = std::max(fmax, pe);
            any = true;
        }
        out.per_fracture_max[mesh.fracture_id] = fmax;
    }
    if (!any) out.min = 0.0;
    return out;
}

/// Time-indexed diagnostics of one run.
struct ObservableSeries {
    std::vector<double> times;
    std::vector<int> fracture_ids;
    std::vector<int> trace_ids;
    std::vector<std::vector<double>> avg_theta;  // [fracture][step]
    std::vector<double> avg_outflow;
    bool outflow_empty = false;
    std::vector<std::vector<double>> phi_i, phi_j, mismatch;  // [trace][step]
    double pe_max = 0.0;

    std::size_t n_steps() const { return times.size(); }
};

inline ObservableSeries compute_observables(const NetworkMesh& nm, const FluxField& flux,
                                            const TransportOperator& op,
                                            const TransportProblem& problem,
                                            const TemperatureHistory& hist) {
    ObservableSeries series;
    for (const auto& mesh : nm.meshes) series.fracture_ids.push_back(mesh.fracture_id);
    for (const auto& [tid, pairs] : nm.trace_matching) series.trace_ids.push_back(tid);
    series.avg_theta.resize(series.fracture_ids.size());
    series.phi_i.resize(series.trace_ids.size());
    series.phi_j.resize(series.trace_ids.size());
    series.mismatch.resize(series.trace_ids.size());
    series.pe_max = mesh_peclet(nm, flux, problem).max;
    for (std::size_t k = 0; k < hist.snapshots.size(); ++k) {
        const FieldView field = FieldView::from_flat(nm, op, hist.snapshots[k]);
        series.times.push_back(hist.time(k));
        for (std::size_t f = 0; f < series.fracture_ids.size(); ++f)
            series.avg_theta[f].push_back(average_theta(field, nm, series.fracture_ids[f]));
        const OutflowAverage oa = average_outflow(field, nm, op.boundary);
        series.avg_outflow.push_back(oa.value);
        series.outflow_empty = oa.empty;
        for (std::size_t t = 0; t < series.trace_ids.size(); ++t) {
            const Trace& tr = nm.network->traces[(std::size_t)series.trace_ids[t]];
            const double pi =
                trace_total_flux(field, flux, nm, problem, series.trace_ids[t], tr.fractures.first);
            const double pj =
                trace_total_flux(field, flux, nm, problem, series.trace_ids[t], tr.fractures.second);
            series.phi_i[t].push_back(pi);
            series.phi_j[t].push_back(pj);
            series.mismatch[t].push_back(std::abs(pi + pj));
        }
    }
    return series;
}

/// Max-in-time transferred flux on a trace: max over steps of the two-sided
/// magnitude mean (the sides carry opposite signs when conservative).
inline double max_trace_flux(const ObservableSeries& series, int trace_id) {
    for (std::size_t t = 0; t < series.trace_ids.size(); ++t) {
        if (series.trace_ids[t] != trace_id) continue;
        double best = 0.0;
        for (std::size_t k = 0; k < series.phi_i[t].size(); ++k)
            best = std::max(best,
                            0.5 * (std::abs(series.phi_i[t][k]) + std::abs(series.phi_j[t][k])));
        return best;
    }
    throw Error("trace not present in the series");
}

/// CSV schema: time,avg_theta_f<id>...,avg_outflow,
/// phi_t<id>_i,phi_t<id>_j,mismatch_t<id>...,pe_max
inline void write_observables_csv(const ObservableSeries& series, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "time");
    for (int id : series.fracture_ids) std::fprintf(f, ",avg_theta_f%d", id);
    std::fprintf(f, ",avg_outflow");
    for (int id : series.trace_ids)
        std::fprintf(f, ",phi_t%d_i,phi_t%d_j,mismatch_t%d", id, id, id);
    std::fprintf(f, ",pe_max\n");
    for (std::size_t k = 0; k < series.n_steps(); ++k) {
        std::fprintf(f, "%.17g", series.times[k]);
        for (std::size_t ff = 0; ff < series.fracture_ids.size(); ++ff)
            std::fprintf(f, ",%.17g", series.avg_theta[ff][k]);
        std::fprintf(f, ",%.17g", series.avg_outflow[k]);
        for (std::size_t t = 0; t < series.trace_ids.size(); ++t)
            std::fprintf(f, ",%.17g,%.17g,%.17g", series.phi_i[t][k], series.phi_j[t][k],
                         series.mismatch[t][k]);
        std::fprintf(f, ",%.17g\n", series.pe_max);
    }
    std::fclose(f);
}

}  // namespace dfn
