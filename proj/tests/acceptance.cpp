// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion (plus indented detail lines).
// Exit code is the number of failed criteria. Criterion 6 is skipped, not
// failed, when the published reference geometries are not supplied
// (environment variable DFNFLOW_REFERENCE_GEOMETRY pointing at a directory with tc1_C0.txt,
// tc1_C10.txt, tc1_C20.txt and tc2.txt in the DFN text format).

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dfnflow/runner.hpp"

using namespace dfn;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& line) { g_notes.push_back(line); }

void flush_notes() {
    for (const std::string& n : g_notes) std::printf("       %s\n", n.c_str());
    g_notes.clear();
    std::fflush(stdout);
}

void criterion(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] C%d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
    flush_notes();
}

void skip(int id, const std::string& name, const std::string& why) {
    std::printf("[SKIP] C%d %s: %s\n", id, name.c_str(), why.c_str());
    flush_notes();
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_1() {
    const FluidProperties water{1000.0, 3.55, 4099.0, 0.667};
    const RockProperties rock{2700.0, 790.0, 3.07, 1.25e-3, 353.15};
    const FractureProperties frac{2e-3, 0.95, 9.81};
    const DerivedCoefficients dc = heat_coefficients(frac, water, rock);
    struct Ref {
        const char* name;
        double got, want;
    } refs[] = {{"K", dc.K, 1.84e-6},        {"c_e", dc.c_e, 4000700.0},
                {"lambda_e", dc.lambda_e, 0.72}, {"zeta", dc.zeta, 1.95e-3},
                {"D", dc.D, 0.35e-9},        {"iota", dc.iota, 3.05e-10}};
    double worst = 0.0;
    std::string worst_name;
    for (const Ref& r : refs) {
        const double rel = std::abs(r.got - r.want) / std::abs(r.want);
        if (rel > worst) {
            worst = rel;
            worst_name = r.name;
        }
    }
    criterion(1, "physical-coefficient reproduction", worst <= 0.01,
              fmt("max rel deviation %.2e (%s) <= 1e-2", worst, worst_name.c_str()));
}

// ---------------------------------------------------------------- criterion 2

void criterion_2() {
    const auto t0 = Clock::now();
    double worst_tpfa = 0.0, worst_mixed = 0.0, worst_mixed_trace = 0.0;
    double worst_tpfa_trace_abs = 0.0, tpfa_trace_scale = 1e-30, worst_heat = 0.0;

    auto visit = [&](const FractureNetwork& net) {
        const NetworkMesh nm = triangulate_conforming(net, 0.075);
        DarcyParameters dp;
        dp.tol = 1e-12;
        // TPFA
        TpfaSystem tp = assemble_tpfa(nm, dp);
        std::vector<double> h;
        if (!solve_spd(tp.A, tp.rhs, h, dp.tol).converged) throw Error("tpfa solve failed");
        const FluxField tpf = tpfa_fluxes(nm, tp, h);
        worst_tpfa = std::max(worst_tpfa, max_cell_residual(nm, tp, tpf));
        // TPFA trace balance (post-elimination)
        for (const auto& [tid, segs] : tpf.trace_half_flux)
            for (const auto& seg : segs) {
                double sum = 0.0;
                for (double q : seg) {
                    sum += q;
                    tpfa_trace_scale = std::max(tpfa_trace_scale, std::abs(q));
                }
                worst_tpfa_trace_abs = std::max(worst_tpfa_trace_abs, std::abs(sum));
            }
        // mixed RT0
        MixedSystem mx = assemble_mixed_rt0(nm, dp);
        const MixedSolution sol = solve_mixed(mx, 1e-11);
        if (!sol.report.converged) throw Error("mixed solve failed");
        worst_mixed = std::max(worst_mixed, mixed_max_cell_residual(mx, sol));
        worst_mixed_trace = std::max(worst_mixed_trace, mixed_max_trace_imbalance(mx, sol));
        // FV heat balance, driven by the TPFA flux
        TransportProblem prob;
        prob.n_steps = 40;
        prob.tol = 1e-12;
        const TransportOperator op = assemble_fv_upwind(nm, tpf, prob);
        const TemperatureHistory hist = run_transport(nm, op, prob);
        for (std::size_t k = 1; k < hist.snapshots.size(); ++k)
            worst_heat = std::max(worst_heat, fv_balance_residual(nm, op, hist.snapshots[k - 1],
                                                                  hist.snapshots[k], prob.dt));
    };

    visit(generate_cross());
    for (int c = 0; c < 21; ++c) visit(generate_test_case_1(c));

    const double worst_tpfa_trace = worst_tpfa_trace_abs / tpfa_trace_scale;
    const bool pass = worst_tpfa <= 1e-10 && worst_mixed <= 1e-10 && worst_heat <= 1e-10 &&
                      worst_tpfa_trace <= 1e-11 && worst_mixed_trace <= 1e-9;
    note(fmt("TPFA max cell residual       %.2e <= 1e-10", worst_tpfa));
    note(fmt("mixed max cell residual      %.2e <= 1e-10", worst_mixed));
    note(fmt("FV heat balance per step     %.2e <= 1e-10 (relative)", worst_heat));
    note(fmt("TPFA trace 4-flux balance    %.2e (relative, star-delta exact)", worst_tpfa_trace));
    note(fmt("mixed trace 4-flux balance   %.2e <= 1e-9 (solver tolerance)", worst_mixed_trace));
    criterion(2, "conservation suite", pass,
              fmt("cross + 21 tc1 configs, coarse mesh, %.0f s", seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 3

FractureNetwork lr_square() {
    FractureNetwork net;
    net.fractures.push_back(
        make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                      {noflow(), dirichlet(0.0), noflow(), dirichlet(1.0)}));
    return net;
}

FractureNetwork dirichlet_square() {
    FractureNetwork net;
    net.fractures.push_back(
        make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                      {dirichlet(0.0), dirichlet(0.0), dirichlet(0.0), dirichlet(0.0)}));
    return net;
}

/// Cartesian mesh of unit squares: the K-orthogonal family for TPFA.
NetworkMesh cartesian_mesh(const FractureNetwork& net, int n) {
    NetworkMesh nm;
    nm.network = &net;
    FractureMesh mesh;
    mesh.fracture_id = 0;
    const double h = 1.0 / n;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) mesh.vertices.push_back({i * h, j * h});
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    std::map<std::pair<int, int>, std::pair<int, int>> marks;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
            if (j == 0) marks[{vid(i, 0), vid(i + 1, 0)}] = {0, -1};
            if (i == n - 1) marks[{std::min(vid(n, j), vid(n, j + 1)), std::max(vid(n, j), vid(n, j + 1))}] = {1, -1};
            if (j == n - 1) marks[{std::min(vid(i, n), vid(i + 1, n)), std::max(vid(i, n), vid(i + 1, n))}] = {2, -1};
            if (i == 0) marks[{std::min(vid(0, j), vid(0, j + 1)), std::max(vid(0, j), vid(0, j + 1))}] = {3, -1};
        }
    mesh.build_edges(&marks);
    nm.meshes.push_back(std::move(mesh));
    return nm;
}

void criterion_3() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;

    // linear-head exactness on an unstructured mesh of the unit square
    {
        const FractureNetwork net = lr_square();
        const NetworkMesh nm = triangulate_conforming(net, 0.17);
        double worst_m = 0.0, worst_p = 0.0, worst_v = 0.0;
        {
            DarcyParameters dp;
            dp.tol = 1e-13;
            const DarcySolution m = solve_darcy(nm, DarcyScheme::mixed_rt0, dp);
            for (std::size_t c = 0; c < nm.meshes[0].cells.size(); ++c)
                worst_m = std::max(worst_m, std::abs(m.head.values[0][c] -
                                                     (1.0 - nm.meshes[0].cell_centroid((int)c).x)));
            const DarcySolution p = solve_darcy(nm, DarcyScheme::p1_fem, dp);
            const DarcySolution v = solve_darcy(nm, DarcyScheme::vem_p1, dp);
            for (std::size_t k = 0; k < nm.meshes[0].vertices.size(); ++k) {
                const double exact = 1.0 - nm.meshes[0].vertices[k].x;
                worst_p = std::max(worst_p, std::abs(p.head.values[0][k] - exact));
                worst_v = std::max(worst_v, std::abs(v.head.values[0][k] - exact));
            }
        }
        const bool ok = worst_m <= 1e-10 && worst_p <= 1e-10 && worst_v <= 1e-10;
        pass = pass && ok;
        note(fmt("linear-head exactness: mixed %.1e  p1 %.1e  vem %.1e (<= 1e-10)", worst_m,
                 worst_p, worst_v));
    }
    // VEM equals P1 on triangles, entry-wise
    {
        const FractureNetwork net = lr_square();
        const NetworkMesh nm = triangulate_conforming(net, 0.3);
        const VertexSystem p1 = assemble_p1_fem(nm, DarcyParameters{});
        const VertexSystem ve = assemble_vem_p1(nm, DarcyParameters{});
        const auto a = p1.A.dense();
        const auto b = ve.A.dense();
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j)
                worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
        pass = pass && worst <= 1e-12;
        note(fmt("VEM equals P1 on triangles: max entry diff %.1e (<= 1e-12)", worst));
    }
    // projector reproduces linears
    {
        const std::vector<Vec2> poly{{0, 0}, {1.3, 0.1}, {1.4, 1.0}, {0.4, 1.5}, {-0.2, 0.7}};
        const vem::Element el = vem::element_matrices(poly, 1.0);
        auto lin = [](const Vec2& p) { return 0.4 + 0.6 * p.x - 1.2 * p.y; };
        std::vector<double> vals;
        for (const Vec2& p : poly) vals.push_back(lin(p));
        double worst = 0.0;
        for (const Vec2& probe : std::vector<Vec2>{{0.4, 0.6}, {1.0, 0.5}, {0.1, 0.2}})
            worst = std::max(worst, std::abs(el.projected_value(vals, probe) - lin(probe)));
        pass = pass && worst <= 1e-12;
        note(fmt("projector linear consistency: max error %.1e (<= 1e-12)", worst));
    }
    // convergence orders on the manufactured sin-sin solution
    {
        const FractureNetwork net = dirichlet_square();
        DarcyParameters dp;
        dp.tol = 1e-13;
        dp.source = [](int, const Vec2& x) {
            return 2.0 * M_PI * M_PI * std::sin(M_PI * x.x) * std::sin(M_PI * x.y);
        };
        auto exact = [](const Vec2& p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
        auto exact_vel = [](const Vec2& p) {
            return Vec2{-M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y),
                        -M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y)};
        };
        auto p1_l2 = [&](double h, DarcyScheme s) {
            const NetworkMesh nm = triangulate_conforming(net, h);
            const DarcySolution sol = solve_darcy(nm, s, dp);
            double err2 = 0.0;
            const FractureMesh& mesh = nm.meshes[0];
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                const auto& cell = mesh.cells[c];
                const double area = mesh.cell_area((int)c);
                for (int k = 0; k < 3; ++k) {
                    const Vec2 q = (mesh.vertices[(std::size_t)cell[k]] +
                                    mesh.vertices[(std::size_t)cell[(k + 1) % 3]]) *
                                   0.5;
                    const double uh = 0.5 * (sol.head.values[0][(std::size_t)cell[k]] +
                                             sol.head.values[0][(std::size_t)cell[(k + 1) % 3]]);
                    err2 += area / 3.0 * (uh - exact(q)) * (uh - exact(q));
                }
            }
            return std::sqrt(err2);
        };
        auto vem_poly_l2 = [&](double h) {
            NetworkMesh nm = triangulate_conforming(net, h);
            nm = coarsen_to_polygons(nm, 0.5);
            const DarcySolution sol = solve_darcy(nm, DarcyScheme::vem_p1, dp);
            double err2 = 0.0;
            const FractureMesh& mesh = nm.meshes[0];
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                const auto& cell = mesh.cells[c];
                std::vector<Vec2> poly(cell.size());
                std::vector<double> vals(cell.size());
                for (std::size_t k = 0; k < cell.size(); ++k) {
                    poly[k] = mesh.vertices[(std::size_t)cell[k]];
                    vals[k] = sol.head.values[0][(std::size_t)cell[k]];
                }
                const vem::Element el = vem::element_matrices(poly, 1.0);
                const Vec2 ctr = mesh.cell_centroid((int)c);
                const double diff = el.projected_value(vals, ctr) - exact(ctr);
                err2 += mesh.cell_area((int)c) * diff * diff;
            }
            return std::sqrt(err2);
        };
        auto mixed_flux_l2 = [&](double h) {
            const NetworkMesh nm = triangulate_conforming(net, h);
            const DarcySolution sol = solve_darcy(nm, DarcyScheme::mixed_rt0, dp);
            double err2 = 0.0;
            const FractureMesh& mesh = nm.meshes[0];
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                const Vec2 d = sol.flux.cell_velocity[0][c] - exact_vel(mesh.cell_centroid((int)c));
                err2 += mesh.cell_area((int)c) * dot(d, d);
            }
            return std::sqrt(err2);
        };
        auto tpfa_l2 = [&](int n) {
            const NetworkMesh nm = cartesian_mesh(net, n);
            DarcyParameters dpc = dp;
            const DarcySolution sol = solve_darcy(nm, DarcyScheme::tpfa, dpc);
            double err2 = 0.0;
            const FractureMesh& mesh = nm.meshes[0];
            for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
                const double diff = sol.head.values[0][c] - exact(mesh.cell_centroid((int)c));
                err2 += mesh.cell_area((int)c) * diff * diff;
            }
            return std::sqrt(err2);
        };
        auto order3 = [](double e1, double e2, double e3) {
            // least-squares slope over three uniform refinements
            return (std::log2(e1 / e2) + std::log2(e2 / e3)) * 0.5;
        };
        const double p1o = order3(p1_l2(0.2, DarcyScheme::p1_fem), p1_l2(0.1, DarcyScheme::p1_fem),
                                  p1_l2(0.05, DarcyScheme::p1_fem));
        const double vemo = order3(vem_poly_l2(0.2), vem_poly_l2(0.1), vem_poly_l2(0.05));
        const double mo = order3(mixed_flux_l2(0.2), mixed_flux_l2(0.1), mixed_flux_l2(0.05));
        const double to = order3(tpfa_l2(8), tpfa_l2(16), tpfa_l2(32));
        const bool ok = p1o >= 1.8 && p1o <= 2.2 && vemo >= 1.8 && vemo <= 2.2 && mo >= 0.8 &&
                        mo <= 1.5 && to >= 0.9;
        pass = pass && ok;
        note(fmt("L2 orders: P1 %.2f, VEM(polygons) %.2f (within [1.8,2.2]); "
                 "mixed flux %.2f (~1); TPFA %.2f (K-orthogonal, >= 0.9)",
                 p1o, vemo, mo, to));
    }
    criterion(3, "patch/consistency suite", pass, fmt("%.0f s", seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 4

void criterion_4() {
    const auto t0 = Clock::now();
    bool pass = true;

    // FV maximum principle on test-case runs
    double over = 0.0, under = 0.0, pe_max = 0.0;
    auto max_principle = [&](const FractureNetwork& net, double h, int steps) {
        const NetworkMesh nm = triangulate_conforming(net, h);
        DarcyParameters dp;
        dp.tol = 3e-15;  // the discrete bound holds up to the flow-solve residual
        const DarcySolution darcy = solve_darcy(nm, DarcyScheme::tpfa, dp);
        TransportProblem prob;
        prob.n_steps = steps;
        prob.tol = 1e-13;
        const TransportOperator op = assemble_fv_upwind(nm, darcy.flux, prob);
        const TemperatureHistory hist = run_transport(nm, op, prob);
        for (const auto& snap : hist.snapshots)
            for (double v : snap) {
                over = std::max(over, v - 1.0);
                under = std::min(under, v);
            }
        pe_max = std::max(pe_max, mesh_peclet(nm, darcy.flux, prob).max);
    };
    max_principle(generate_test_case_1(0), 0.075, 300);
    max_principle(generate_test_case_1(20), 0.075, 100);
    max_principle(generate_test_case_2(), 0.214, 100);
    const bool mp_ok = over <= 1e-12 && under >= -1e-12;
    pass = pass && mp_ok;
    note(fmt("FV maximum principle: overshoot %.2e, undershoot %.2e (|.| <= 1e-12), "
             "mesh Peclet up to %.0f",
             over, under, pe_max));

    // SUPG vs unstabilized Galerkin on a Pe = 100 strip
    {
        FractureNetwork net;
        net.fractures.push_back(
            make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 0.15, 0}, {0, 0.15, 0}},
                          {noflow(), dirichlet(0.0), noflow(), dirichlet(1.0)}));
        const NetworkMesh nm = triangulate_conforming(net, 0.02);
        const DarcySolution darcy = solve_darcy(nm, DarcyScheme::mixed_rt0, DarcyParameters{});
        TransportProblem prob;
        prob.coeff = {1.0, 1e-4, 0.0, 0.0};
        prob.dt = 0.002;
        prob.n_steps = 225;
        auto overshoot = [&](bool stabilized) {
            const TransportOperator op = assemble_p1_supg(nm, darcy.flux, prob, stabilized);
            const TemperatureHistory hist = run_transport(nm, op, prob);
            double worst = 0.0;
            for (const auto& snap : hist.snapshots)
                for (double v : snap) worst = std::max(worst, v - 1.0);
            return worst;
        };
        const double galerkin = overshoot(false);
        const double supg = overshoot(true);
        const bool ok = supg <= 0.05 && galerkin > 0.10;
        pass = pass && ok;
        note(fmt("Pe=100 strip: SUPG overshoot %.1f%% (<= 5%%), Galerkin %.1f%% (> 10%%, "
                 "negative control)",
                 100.0 * supg, 100.0 * galerkin));
    }
    criterion(4, "stability suite", pass, fmt("%.0f s", seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 5

void criterion_5(const std::string& out_root) {
    const auto t0 = Clock::now();
    bool pass = true;

    // coarse sweep: trace flux falls, cell count grows with the configuration
    const auto t_single = Clock::now();
    {
        RunConfig probe;
        probe.source = "tc1";
        probe.pairing = "tpfaup";
        probe.target_h = 0.075;
        const TriangulationOptions tr = TriangulationOptions::trace_resolving();
        probe.trace_size_fraction = tr.trace_size_fraction;
        probe.min_trace_segments = tr.min_trace_segments;
        probe.out_dir = out_root + "/single_coarse";
        run(probe);
    }
    const double single_s = seconds_since(t_single);

    const auto entries = sweep_tc1({"tpfaup"}, [] {
        std::vector<int> v(21);
        std::iota(v.begin(), v.end(), 0);
        return v;
    }(), {"coarse"}, out_root + "/sweep", 1);
    write_sweep_summary(entries, out_root + "/sweep/summary.csv");
    bool flux_monotone = true, cells_monotone = true, all_ok = true;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        all_ok = all_ok && entries[k].ok;
        if (k > 0 && entries[k].ok && entries[k - 1].ok) {
            if (entries[k].result.max_phi.at(0) >= entries[k - 1].result.max_phi.at(0))
                flux_monotone = false;
            if (entries[k].result.cells <= entries[k - 1].result.cells) cells_monotone = false;
        }
    }
    pass = pass && all_ok && flux_monotone && cells_monotone;
    note(fmt("sweep (tpfaup, 21 configs, ~10^3 cells): phi_G0 %.4f -> %.4f strictly decreasing: "
             "%s; cells %zu -> %zu strictly increasing: %s",
             entries.front().result.max_phi.at(0), entries.back().result.max_phi.at(0),
             flux_monotone ? "yes" : "NO", entries.front().result.cells,
             entries.back().result.cells, cells_monotone ? "yes" : "NO"));

    // fine-level cross-scheme band on configuration C0
    {
        std::map<std::string, std::vector<double>> curves;
        for (const std::string scheme : {"tpfaup", "mfemup", "vemup", "mfemsupg"}) {
            RunConfig cfg;
            cfg.source = "tc1";
            cfg.config_index = 0;
            cfg.pairing = scheme;
            cfg.target_h = 0.024;
            const TriangulationOptions tr = TriangulationOptions::trace_resolving();
            cfg.trace_size_fraction = tr.trace_size_fraction;
            cfg.min_trace_segments = tr.min_trace_segments;
            cfg.out_dir = out_root + "/fine_" + scheme;
            run(cfg);
            // read the outflow column back from the CSV (the acceptance reads
            // the same artifact the benchmarks publish)
            std::ifstream in(cfg.out_dir + "/observables.csv");
            std::string line;
            std::getline(in, line);
            std::stringstream hs(line);
            std::string col;
            int outflow_col = -1, idx = 0;
            while (std::getline(hs, col, ',')) {
                if (col == "avg_outflow") outflow_col = idx;
                ++idx;
            }
            std::vector<double> curve;
            while (std::getline(in, line)) {
                std::stringstream ls(line);
                for (int k = 0; std::getline(ls, col, ','); ++k)
                    if (k == outflow_col) curve.push_back(std::stod(col));
            }
            curves[scheme] = std::move(curve);
        }
        std::size_t n = 1e9;
        for (const auto& [s, c] : curves) n = std::min(n, c.size());
        double spread = 0.0, ref = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double lo = 1e300, hi = -1e300;
            for (const auto& [s, c] : curves) {
                lo = std::min(lo, c[k]);
                hi = std::max(hi, c[k]);
                ref = std::max(ref, std::abs(c[k]));
            }
            spread = std::max(spread, hi - lo);
        }
        const double band = spread / ref;
        pass = pass && band <= 0.05;
        note(fmt("fine-level (~10^4 cells) outflow curves, 4 schemes: sup-norm band %.2f%% "
                 "(<= 5%%)",
                 100.0 * band));
    }
    const double total_s = seconds_since(t0);
    pass = pass && single_s <= 60.0 && total_s <= 1800.0;
    criterion(5, "benchmark trend reproduction", pass,
              fmt("single coarse run %.1f s (<= 60 s), total %.0f s (<= 1800 s)", single_s,
                  total_s));
}

// ---------------------------------------------------------------- criterion 6

void criterion_6(const std::string& out_root) {
    const char* dir = std::getenv("DFNFLOW_REFERENCE_GEOMETRY");
    if (!dir || !std::filesystem::is_directory(dir)) {
        skip(6, "reference-value reproduction",
             "published geometry files not supplied (set DFNFLOW_REFERENCE_GEOMETRY); the "
             "benchmark coordinates were never published in print");
        return;
    }
    bool pass = true;
    const double phi_ref[3] = {0.6072, 0.4725, 0.251};
    const int configs[3] = {0, 10, 20};
    for (int k = 0; k < 3; ++k) {
        const std::string path = std::string(dir) + "/tc1_C" + std::to_string(configs[k]) + ".txt";
        if (!std::filesystem::exists(path)) {
            note(fmt("missing %s", path.c_str()));
            pass = false;
            continue;
        }
        RunConfig cfg;
        cfg.source = "file";
        cfg.geometry_path = path;
        cfg.pairing = "mfemsupg";
        cfg.target_h = 0.024;
        cfg.out_dir = out_root + "/reference_tc1_C" + std::to_string(configs[k]);
        const RunResult res = run(cfg);
        const double rel = std::abs(res.max_phi.at(0) - phi_ref[k]) / phi_ref[k];
        note(fmt("tc1 C%d: phi_G0 %.4f vs %.4f (rel %.1f%%, <= 5%%)", configs[k],
                 res.max_phi.at(0), phi_ref[k], 100.0 * rel));
        pass = pass && rel <= 0.05;
    }
    const std::string tc2path = std::string(dir) + "/tc2.txt";
    if (std::filesystem::exists(tc2path)) {
        const double ref[14] = {0.040, 0.079, 0.150, 0.260, 0.284, 0.047, 0.074,
                                0.020, 0.393, 0.163, 0.443, 0.061, 0.058, 0.063};
        RunConfig cfg;
        cfg.source = "file";
        cfg.geometry_path = tc2path;
        cfg.pairing = "mfemsupg";
        cfg.target_h = 0.034;
        cfg.n_steps = 500;
        cfg.out_dir = out_root + "/reference_tc2";
        const RunResult res = run(cfg);
        double worst = 0.0;
        for (int t = 0; t < 14 && res.max_phi.count(t); ++t)
            worst = std::max(worst, std::abs(res.max_phi.at(t) - ref[t]) / ref[t]);
        note(fmt("tc2 trace fluxes: worst rel deviation %.1f%% (<= 10%%)", 100.0 * worst));
        pass = pass && worst <= 0.10;
    } else {
        note("tc2.txt not present, table comparison omitted");
    }
    criterion(6, "reference-value reproduction", pass, "with published geometry files");
}

// ---------------------------------------------------------------- criterion 7

void criterion_7(const std::string& out_root) {
    RunConfig cfg;
    cfg.source = "tc1";
    cfg.config_index = 5;
    cfg.pairing = "tpfaup";
    cfg.target_h = 0.075;
    cfg.n_steps = 60;
    cfg.out_dir = out_root + "/det_a";
    run(cfg);
    std::ifstream a(cfg.out_dir + "/observables.csv", std::ios::binary);
    std::stringstream sa;
    sa << a.rdbuf();
    std::filesystem::remove_all(cfg.out_dir);
    cfg.out_dir = out_root + "/det_b";
    run(cfg);
    std::ifstream b(cfg.out_dir + "/observables.csv", std::ios::binary);
    std::stringstream sb;
    sb << b.rdbuf();
    const bool same = sa.str() == sb.str() && !sa.str().empty();
    criterion(7, "determinism", same,
              same ? "repeated runs produce byte-identical CSV outputs"
                   : "CSV outputs differ between identical runs");
}

}  // namespace

int main() {
    const std::string out_root = "acceptance_out";
    std::filesystem::remove_all(out_root);
    std::filesystem::create_directories(out_root);
    const auto t0 = Clock::now();
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5(out_root);
        criterion_6(out_root);
        criterion_7(out_root);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%s: %d criterion(s) failed, total %.0f s\n", g_failures == 0 ? "OK" : "FAILED",
                g_failures, seconds_since(t0));
    return g_failures;
}
