#include <gtest/gtest.h>

#include "dfnflow/conforming.hpp"
#include "dfnflow/generators.hpp"

using namespace dfn;

namespace {

Fracture unit_square() {
    return make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                         {dirichlet(1.0), noflow(), dirichlet(0.0), noflow()});
}

double chain_length(const FractureMesh& m, int trace_id) {
    double len = 0.0;
    for (int e : m.trace_edges.at(trace_id)) len += m.edges[e].length;
    return len;
}

}  // namespace

TEST(Triangulate, UnitSquareCoarse) {
    const FractureMesh mesh = triangulate_polygon(unit_square(), 0.5);
    EXPECT_GE(mesh.cells.size(), 4u);
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        EXPECT_EQ(mesh.cells[c].size(), 3u);
        EXPECT_GT(mesh.cell_area(static_cast<int>(c)), 0.0);
    }
    EXPECT_NEAR(mesh.total_area(), 1.0, 1e-12);
    // every boundary edge carries a polygon-edge tag
    for (const MeshEdge& e : mesh.edges)
        if (e.is_boundary()) EXPECT_GE(e.boundary_edge, 0);
}

TEST(Triangulate, QualityAndSizing) {
    const FractureMesh mesh = triangulate_polygon(unit_square(), 0.1);
    const MeshStatistics st = mesh_statistics(mesh);
    EXPECT_GE(st.min_angle_deg, 20.0 - 1e-9);  // no constraints force smaller here
    EXPECT_LE(st.h_max, 0.33);
    EXPECT_GT(st.cells, 100u);
}

TEST(Triangulate, DeterministicRepeat) {
    const FractureMesh a = triangulate_polygon(unit_square(), 0.13);
    const FractureMesh b = triangulate_polygon(unit_square(), 0.13);
    ASSERT_EQ(a.vertices.size(), b.vertices.size());
    ASSERT_EQ(a.cells.size(), b.cells.size());
    for (std::size_t k = 0; k < a.vertices.size(); ++k) {
        EXPECT_EQ(a.vertices[k].x, b.vertices[k].x);
        EXPECT_EQ(a.vertices[k].y, b.vertices[k].y);
    }
    for (std::size_t c = 0; c < a.cells.size(); ++c) EXPECT_EQ(a.cells[c], b.cells[c]);
}

TEST(Conforming, CrossNetworkChainsMatch) {
    const FractureNetwork net = generate_cross();
    const NetworkMesh nm = triangulate_conforming(net, 0.2);
    ASSERT_EQ(nm.meshes.size(), 2u);
    const double lt = net.traces[0].length();
    EXPECT_NEAR(chain_length(nm.meshes[0], 0), lt, 1e-9);
    EXPECT_NEAR(chain_length(nm.meshes[1], 0), lt, 1e-9);
    const auto& pairs = nm.trace_matching.at(0);
    EXPECT_EQ(pairs.size(), 5u);  // ceil(1.0 / 0.2) segments
    validate_matching(nm);
}

TEST(Conforming, TestCase1CoarseCellCount) {
    const FractureNetwork net = generate_test_case_1(0);
    const NetworkMesh nm = triangulate_conforming(net, 0.075);
    const std::size_t cells = nm.total_cells();
    EXPECT_GE(cells, 500u);
    EXPECT_LE(cells, 2000u);
    for (std::size_t m = 0; m < nm.meshes.size(); ++m)
        validate_mesh(nm.meshes[m], net.fractures[m], &net.traces);
}

TEST(Conforming, TestCase1CellGrowthTowardVanishingTrace) {
    const std::size_t cells_c0 = triangulate_conforming(generate_test_case_1(0), 0.1).total_cells();
    const std::size_t cells_c20 =
        triangulate_conforming(generate_test_case_1(20), 0.1).total_cells();
    EXPECT_GT(cells_c20, cells_c0);
}

TEST(Conforming, TestCase2Meshable) {
    const FractureNetwork net = generate_test_case_2();
    const NetworkMesh nm = triangulate_conforming(net, 0.3);
    EXPECT_EQ(nm.meshes.size(), 10u);
    EXPECT_EQ(nm.trace_matching.size(), 14u);
    validate_matching(nm);
}

TEST(MeshStatistics, HandBuiltMeshes) {
    FractureMesh one;
    one.fracture_id = 0;
    one.vertices = {{0, 0}, {1, 0}, {0, 1}};
    one.cells = {{0, 1, 2}};
    one.build_edges();
    MeshStatistics st = mesh_statistics(one);
    EXPECT_EQ(st.cells, 1u);
    EXPECT_EQ(st.vertices, 3u);
    EXPECT_EQ(st.edges, 3u);

    FractureMesh two;
    two.fracture_id = 0;
    two.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    two.cells = {{0, 1, 2}, {0, 2, 3}};
    two.build_edges();
    st = mesh_statistics(two);
    EXPECT_EQ(st.cells, 2u);
    EXPECT_EQ(st.edges, 5u);

    // invariance under vertex relabeling
    FractureMesh relabeled;
    relabeled.fracture_id = 0;
    relabeled.vertices = {{1, 1}, {0, 0}, {0, 1}, {1, 0}};
    relabeled.cells = {{1, 3, 0}, {1, 0, 2}};
    relabeled.build_edges();
    const MeshStatistics st2 = mesh_statistics(relabeled);
    EXPECT_EQ(st2.cells, st.cells);
    EXPECT_EQ(st2.edges, st.edges);
    EXPECT_NEAR(st2.min_angle_deg, st.min_angle_deg, 1e-12);
}

TEST(MeshEdges, OrientationAndAdjacency) {
    FractureMesh two;
    two.fracture_id = 0;
    two.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    two.cells = {{0, 1, 2}, {0, 2, 3}};
    two.build_edges();
    int interior = 0;
    for (const MeshEdge& e : two.edges) {
        if (!e.is_boundary()) {
            ++interior;
            EXPECT_NE(e.cell_left, e.cell_right);
        } else {
            EXPECT_GE(e.cell_left, 0);
            // outward normal: points away from the single cell's centroid
            const Vec2 mid = (two.vertices[e.v0] + two.vertices[e.v1]) * 0.5;
            const Vec2 c = two.cell_centroid(e.cell_left);
            EXPECT_GT(dot(e.normal, mid - c), 0.0);
        }
    }
    EXPECT_EQ(interior, 1);
}

#include "dfnflow/coarsen.hpp"

TEST(Coarsen, TwoTrianglesBecomeOneQuad) {
    const FractureNetwork net = [] {
        FractureNetwork n;
        n.fractures.push_back(make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}},
                                            {dirichlet(1.0), noflow(), noflow(), noflow()}));
        return n;
    }();
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
    const NetworkMesh cm = coarsen_to_polygons(nm, 0.5);
    ASSERT_EQ(cm.meshes[0].cells.size(), 1u);
    EXPECT_EQ(cm.meshes[0].cells[0].size(), 4u);
    EXPECT_NEAR(cm.meshes[0].total_area(), 1.0, 1e-12);
}

TEST(Coarsen, RatioOneRejected) {
    const FractureNetwork net = generate_cross();
    const NetworkMesh nm = triangulate_conforming(net, 0.25);
    EXPECT_THROW(coarsen_to_polygons(nm, 1.0), Error);
    EXPECT_THROW(coarsen_to_polygons(nm, 0.0), Error);
}

TEST(Coarsen, HalvesTheCellCount) {
    const FractureNetwork net = generate_test_case_2();
    const NetworkMesh nm = triangulate_conforming(net, 0.3);
    const NetworkMesh cm = coarsen_to_polygons(nm, 0.5);
    const double ratio =
        static_cast<double>(cm.total_cells()) / static_cast<double>(nm.total_cells());
    EXPECT_GE(ratio, 0.4);
    EXPECT_LE(ratio, 0.6);
    // per-fracture area is preserved and chains survive
    for (std::size_t m = 0; m < nm.meshes.size(); ++m) {
        EXPECT_NEAR(cm.meshes[m].total_area(), nm.meshes[m].total_area(),
                    1e-12 * nm.meshes[m].total_area());
        EXPECT_EQ(cm.meshes[m].trace_edges.size(), nm.meshes[m].trace_edges.size());
    }
    validate_matching(cm);
}

TEST(Coarsen, KeepsTraceAndBoundaryEdges) {
    const FractureNetwork net = generate_cross();
    const NetworkMesh nm = triangulate_conforming(net, 0.2);
    const NetworkMesh cm = coarsen_to_polygons(nm, 0.5);
    for (std::size_t m = 0; m < cm.meshes.size(); ++m) {
        double boundary_in = 0.0, boundary_out = 0.0;
        for (const MeshEdge& e : nm.meshes[m].edges)
            if (e.is_boundary()) boundary_in += e.length;
        for (const MeshEdge& e : cm.meshes[m].edges)
            if (e.is_boundary()) boundary_out += e.length;
        EXPECT_NEAR(boundary_in, boundary_out, 1e-12);
        const auto& chain_in = nm.meshes[m].trace_edges.at(0);
        const auto& chain_out = cm.meshes[m].trace_edges.at(0);
        EXPECT_EQ(chain_in.size(), chain_out.size());
    }
}
