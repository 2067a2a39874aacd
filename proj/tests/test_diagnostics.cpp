#include <gtest/gtest.h>

#include "dfnflow/diagnostics.hpp"
#include "dfnflow/generators.hpp"
#include "dfnflow/io.hpp"
#include "dfnflow/darcy_solve.hpp"
#include "dfnflow/vtk.hpp"

using namespace dfn;

namespace {

FractureNetwork square_net() {
    FractureNetwork net;
    net.fractures.push_back(
        make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                      {noflow(), dirichlet(0.0), noflow(), dirichlet(1.0)}));
    return net;
}

NetworkMesh two_triangle_mesh(const FractureNetwork& net) {
    NetworkMesh nm;
    nm.network = &net;
    FractureMesh mesh;
    mesh.fracture_id = 0;
    mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    mesh.cells = {{0, 1, 2}, {0, 2, 3}};
    std::map<std::pair<int, int>, std::pair<int, int>> marks{
        {{0, 1}, {0, -1}}, {{1, 2}, {1, -1}}, {{2, 3}, {2, -1}}, {{0, 3}, {3, -1}}};
    mesh.build_edges(&marks);
    nm.meshes.push_back(std::move(mesh));
    return nm;
}

}  // namespace

TEST(AverageTheta, ConstantAndLinearFields) {
    const FractureNetwork net = square_net();
    const NetworkMesh nm = two_triangle_mesh(net);
    FieldView ones;
    ones.scheme = TransportScheme::fv_upwind;
    ones.values = {{1.0, 1.0}};
    EXPECT_DOUBLE_EQ(average_theta(ones, nm, 0), 1.0);

    // P1 field theta = x on the unit square: mean 0.5
    FieldView lin;
    lin.scheme = TransportScheme::fem_supg;
    lin.values = {{0.0, 1.0, 1.0, 0.0}};
    EXPECT_NEAR(average_theta(lin, nm, 0), 0.5, 1e-14);

    // nodal values (0,0,1,1): exact simplex quadrature gives 0.5
    FieldView mixed;
    mixed.scheme = TransportScheme::fem_supg;
    mixed.values = {{0.0, 0.0, 1.0, 1.0}};
    EXPECT_NEAR(average_theta(mixed, nm, 0), 0.5, 1e-14);
}

TEST(AverageOutflow, WeightedTraceMean) {
    const FractureNetwork net = square_net();
    const NetworkMesh nm = two_triangle_mesh(net);
    const DarcySolution darcy = solve_darcy(nm, DarcyScheme::tpfa, DarcyParameters{});
    const auto boundary = classify_boundary(nm, darcy.flux);

    FieldView constant;
    constant.scheme = TransportScheme::fv_upwind;
    constant.values = {{0.3, 0.3}};
    EXPECT_NEAR(average_outflow(constant, nm, boundary).value, 0.3, 1e-14);

    // single outflow edge (right, x=1, vertices 1-2), linear from 0 to 1
    FieldView lin;
    lin.scheme = TransportScheme::fem_supg;
    lin.values = {{0.0, 0.0, 1.0, 0.0}};
    EXPECT_NEAR(average_outflow(lin, nm, boundary).value, 0.5, 1e-14);

    // no outflow anywhere: flagged and defined as 0
    std::vector<std::vector<EdgeFlow>> none(1);
    none[0].assign(nm.meshes[0].edges.size(), EdgeFlow::none);
    const OutflowAverage oa = average_outflow(constant, nm, none);
    EXPECT_TRUE(oa.empty);
    EXPECT_DOUBLE_EQ(oa.value, 0.0);
}

TEST(TraceFlux, ZeroFieldGivesZeroFlux) {
    const FractureNetwork net = generate_cross();
    const NetworkMesh nm = triangulate_conforming(net, 0.2);
    const DarcySolution darcy = solve_darcy(nm, DarcyScheme::tpfa, DarcyParameters{});
    TransportProblem prob;
    FieldView zero;
    zero.scheme = TransportScheme::fv_upwind;
    zero.values.resize(nm.meshes.size());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m)
        zero.values[m].assign(nm.meshes[m].cells.size(), 0.0);
    EXPECT_NEAR(trace_total_flux(zero, darcy.flux, nm, prob, 0, 0), 0.0, 1e-14);
    EXPECT_NEAR(trace_total_flux(zero, darcy.flux, nm, prob, 0, 1), 0.0, 1e-14);
}

TEST(TraceFlux, ConservativePairingHasTinyMismatch) {
    const FractureNetwork net = generate_cross();
    const NetworkMesh nm = triangulate_conforming(net, 0.12);
    DarcyParameters dp;
    dp.tol = 1e-13;
    const DarcySolution darcy = solve_darcy(nm, DarcyScheme::tpfa, dp);
    TransportProblem prob;
    prob.n_steps = 30;
    prob.tol = 1e-12;
    const TransportOperator op = assemble_fv_upwind(nm, darcy.flux, prob);
    const TemperatureHistory hist = run_transport(nm, op, prob);
    const ObservableSeries series = compute_observables(nm, darcy.flux, op, prob, hist);
    const double max_flux = max_trace_flux(series, 0);
    EXPECT_GT(max_flux, 0.01);
    for (double d : series.mismatch[0]) EXPECT_LE(d, 1e-9 * std::max(1.0, max_flux));
}

TEST(TraceFlux, FemPairingMismatchShrinksWithRefinement) {
    // trend asserted in a regime the meshes can resolve (front width D/u
    // comparable to h); at very high Peclet the one-sided jump evaluation is
    // dominated by the unresolved front and only the recorded value is useful
    const FractureNetwork net = generate_cross();
    auto worst_mismatch = [&](double h) {
        const NetworkMesh nm = triangulate_conforming(net, h);
        const DarcySolution darcy = solve_darcy(nm, DarcyScheme::mixed_rt0, DarcyParameters{});
        TransportProblem prob;
        prob.coeff.D = 0.05;
        prob.n_steps = 60;
        const TransportOperator op = assemble_p1_supg(nm, darcy.flux, prob);
        const TemperatureHistory hist = run_transport(nm, op, prob);
        const ObservableSeries series = compute_observables(nm, darcy.flux, op, prob, hist);
        double worst = 0.0;
        for (double d : series.mismatch[0]) worst = std::max(worst, d);
        return worst;
    };
    const double coarse = worst_mismatch(0.2);
    const double fine = worst_mismatch(0.1);
    EXPECT_LT(fine, coarse);
}

TEST(MeshPeclet, ArithmeticAndScaling) {
    const FractureNetwork net = square_net();
    const NetworkMesh nm = two_triangle_mesh(net);
    TransportProblem prob;
    prob.coeff.D = 1e-4;

    FluxField still;
    still.cell_velocity = {{{0.0, 0.0}, {0.0, 0.0}}};
    still.edge_flux = {std::vector<double>(nm.meshes[0].edges.size(), 0.0)};
    const PecletSummary zero = mesh_peclet(nm, still, prob);
    EXPECT_DOUBLE_EQ(zero.max, 0.0);

    // |u| = 1, h = cell diameter = sqrt(2): Pe = sqrt(2) / 2e-4
    FluxField moving = still;
    moving.cell_velocity = {{{1.0, 0.0}, {1.0, 0.0}}};
    const PecletSummary pe = mesh_peclet(nm, moving, prob);
    EXPECT_NEAR(pe.max, std::sqrt(2.0) / 2e-4, 1e-6);
    EXPECT_NEAR(pe.max, pe.min, 1e-9);

    prob.coeff.D = 0.0;
    EXPECT_TRUE(mesh_peclet(nm, moving, prob).infinite);
}

TEST(MeshPeclet, HalvingMeshHalvesPeclet) {
    const FractureNetwork net = square_net();
    TransportProblem prob;
    prob.coeff.D = 1e-4;
    auto max_pe = [&](double h) {
        const NetworkMesh nm = triangulate_conforming(net, h);
        const DarcySolution darcy = solve_darcy(nm, DarcyScheme::tpfa, DarcyParameters{});
        return mesh_peclet(nm, darcy.flux, prob).max;
    };
    const double ratio = max_pe(0.2) / max_pe(0.1);
    EXPECT_GE(ratio, 1.5);
    EXPECT_LE(ratio, 2.6);
}

TEST(Observables, RecomputedFromSnapshotsMatchCsv) {
    const FractureNetwork net = generate_cross();
    const NetworkMesh nm = triangulate_conforming(net, 0.2);
    const DarcySolution darcy = solve_darcy(nm, DarcyScheme::tpfa, DarcyParameters{});
    TransportProblem prob;
    prob.n_steps = 8;
    const TransportOperator op = assemble_fv_upwind(nm, darcy.flux, prob);
    const TemperatureHistory hist = run_transport(nm, op, prob);
    const ObservableSeries series = compute_observables(nm, darcy.flux, op, prob, hist);

    // dump the final snapshot, reload it and recompute the fracture averages
    const FieldView last = FieldView::from_flat(nm, op, hist.snapshots.back());
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        const std::string p = "/tmp/dfn_diag_f" + std::to_string(m) + ".vtk";
        write_legacy_vtk(p, nm, m, {{"theta", &last.values[m]}}, {}, nullptr);
        const VtkSnapshot snap = read_legacy_vtk(p);
        FieldView reloaded = last;
        reloaded.values[m] = snap.cell_data.at("theta");
        EXPECT_NEAR(average_theta(reloaded, nm, nm.meshes[m].fracture_id),
                    series.avg_theta[m].back(), 1e-12);
    }
}
