#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dfnflow/generators.hpp"
#include "dfnflow/geometry.hpp"

using namespace dfn;

namespace {

Fracture unit_square_z0(int id) {
    return make_fracture(id, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
}

}  // namespace

TEST(LocalFrame, AxisAlignedNormals) {
    Fracture f = unit_square_z0(0);
    EXPECT_NEAR(std::abs(f.frame.normal.z), 1.0, 1e-14);
    EXPECT_NEAR(f.frame.normal.x, 0.0, 1e-14);

    Fracture g = make_fracture(1, {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}});
    EXPECT_NEAR(std::abs(g.frame.normal.x), 1.0, 1e-14);
}

TEST(LocalFrame, RoundTripIsometry) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // a tilted quadrilateral: random in-plane points mapped through a rotated frame
    const Vec3 o{0.3, -1.2, 2.0};
    const Vec3 a = normalized({1.0, 0.4, -0.2});
    const Vec3 b = normalized(cross(a, Vec3{0.2, 1.0, 0.5}));
    std::vector<Vec3> verts;
    for (const Vec2 q : std::vector<Vec2>{{0, 0}, {2, 0}, {2.5, 1.5}, {0.5, 2.0}})
        verts.push_back(o + a * q.x + b * q.y);
    Fracture f = make_fracture(3, verts);
    const double tol = 1e-12 * f.diameter();
    for (std::size_t k = 0; k < verts.size(); ++k) {
        const Vec3 back = f.frame.to_world(f.vertices2d[k]);
        EXPECT_LE(norm(back - verts[k]), tol);
    }
    // frame orthonormality
    EXPECT_NEAR(dot(f.frame.e1, f.frame.e2), 0.0, 1e-12);
    EXPECT_NEAR(norm(f.frame.e1), 1.0, 1e-12);
    EXPECT_NEAR(norm(f.frame.e2), 1.0, 1e-12);
    EXPECT_NEAR(dot(f.frame.e1, f.frame.normal), 0.0, 1e-12);
}

TEST(LocalFrame, DegenerateCollinearThrows) {
    Fracture f;
    f.id = 9;
    f.vertices3d = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    EXPECT_THROW(local_frame(f), Error);
    EXPECT_THROW(make_fracture(9, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}), Error);
}

TEST(ComputeTraces, PerpendicularCross) {
    Fracture a = unit_square_z0(0);
    Fracture b = make_fracture(1, {{0.5, 0, -0.5}, {0.5, 1, -0.5}, {0.5, 1, 0.5}, {0.5, 0, 0.5}});
    auto traces = compute_traces({a, b}, 1e-9);
    ASSERT_EQ(traces.size(), 1u);
    EXPECT_NEAR(traces[0].length(), 1.0, 1e-12);
    EXPECT_EQ(traces[0].fractures.first, 0);
    EXPECT_EQ(traces[0].fractures.second, 1);
}

TEST(ComputeTraces, ParallelDisjointSquares) {
    Fracture a = unit_square_z0(0);
    Fracture b = make_fracture(1, {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}});
    auto traces = compute_traces({a, b}, 1e-9);
    EXPECT_TRUE(traces.empty());
}

TEST(ComputeTraces, CoplanarOverlapRejected) {
    Fracture a = unit_square_z0(0);
    Fracture b = make_fracture(1, {{0.5, 0.5, 0}, {1.5, 0.5, 0}, {1.5, 1.5, 0}, {0.5, 1.5, 0}});
    EXPECT_THROW(compute_traces({a, b}, 1e-9), Error);
}

TEST(ComputeTraces, SwapInvariance) {
    auto net = generate_test_case_1(5);
    auto fr = net.fractures;
    std::swap(fr[0], fr[2]);
    auto traces = compute_traces(fr, 1e-9 * net.diameter());
    ASSERT_EQ(traces.size(), net.traces.size());
    // same segment set up to id relabeling
    auto key = [](const Trace& t) {
        Vec3 lo = t.segment3d[0], hi = t.segment3d[1];
        return std::make_tuple(std::min(lo.x, hi.x), std::min(lo.y, hi.y), std::min(lo.z, hi.z),
                               std::max(lo.x, hi.x), std::max(lo.y, hi.y), std::max(lo.z, hi.z));
    };
    std::vector<std::tuple<double, double, double, double, double, double>> k1, k2;
    for (const auto& t : net.traces) k1.push_back(key(t));
    for (const auto& t : traces) k2.push_back(key(t));
    std::sort(k1.begin(), k1.end());
    std::sort(k2.begin(), k2.end());
    for (std::size_t i = 0; i < k1.size(); ++i) {
        EXPECT_NEAR(std::get<0>(k1[i]), std::get<0>(k2[i]), 1e-12);
        EXPECT_NEAR(std::get<5>(k1[i]), std::get<5>(k2[i]), 1e-12);
    }
}

TEST(ComputeTraces, LocalSegmentsAreIsometric) {
    auto net = generate_test_case_1(0);
    for (const Trace& t : net.traces) {
        const double l3 = t.length();
        const double li = norm(t.segment_local_i[1] - t.segment_local_i[0]);
        const double lj = norm(t.segment_local_j[1] - t.segment_local_j[0]);
        EXPECT_NEAR(li, l3, 1e-12 * l3);
        EXPECT_NEAR(lj, l3, 1e-12 * l3);
        // local endpoints map back to the 3D segment
        const Fracture& fi = net.fracture(t.fractures.first);
        for (int e = 0; e < 2; ++e)
            EXPECT_LE(norm(fi.frame.to_world(t.segment_local_i[e]) - t.segment3d[e]),
                      1e-9 * fi.diameter());
    }
}

TEST(TestCase1, TraceLengthSchedule) {
    auto c0 = generate_test_case_1(0);
    ASSERT_EQ(c0.traces.size(), 2u);
    EXPECT_NEAR(c0.traces[0].length(), 0.6, 1e-12);

    auto c10 = generate_test_case_1(10);
    EXPECT_NEAR(c10.traces[0].length(), 0.305, 1e-12);  // linear schedule

    auto c20 = generate_test_case_1(20);
    EXPECT_NEAR(c20.traces[0].length(), 0.01, 1e-12);
}

TEST(TestCase1, VanishingTraceMonotoneAndFixedTrace) {
    double prev = 1e300;
    double len1_ref = -1.0;
    for (int c = 0; c < 21; ++c) {
        auto net = generate_test_case_1(c);
        ASSERT_EQ(net.traces.size(), 2u);
        const double l0 = net.traces[0].length();
        const double l1 = net.traces[1].length();
        EXPECT_LT(l0, prev);
        prev = l0;
        if (len1_ref < 0.0)
            len1_ref = l1;
        else
            EXPECT_NEAR(l1, len1_ref, 1e-12);
        // trace 0 couples fractures (0,1); trace 1 couples (1,2)
        EXPECT_EQ(net.traces[0].fractures, std::make_pair(0, 1));
        EXPECT_EQ(net.traces[1].fractures, std::make_pair(1, 2));
    }
}

TEST(TestCase1, BoundaryTags) {
    auto net = generate_test_case_1(0);
    // inflow: the two bottom pieces of the notched fracture; outflow: the
    // bottom edge of the sliding fracture
    int n_dirichlet = 0;
    for (const auto& f : net.fractures)
        for (const auto& t : f.boundary_tags)
            if (t.kind == BcKind::dirichlet) ++n_dirichlet;
    EXPECT_EQ(n_dirichlet, 3);
    EXPECT_EQ(net.fractures[0].boundary_tags[0].kind, BcKind::dirichlet);
    EXPECT_DOUBLE_EQ(net.fractures[0].boundary_tags[0].head, 1.0);
    EXPECT_EQ(net.fractures[0].boundary_tags[3].kind, BcKind::dirichlet);
    EXPECT_EQ(net.fractures[1].boundary_tags[0].kind, BcKind::dirichlet);
    EXPECT_DOUBLE_EQ(net.fractures[1].boundary_tags[0].head, 0.0);
    // the vanishing trace must not touch any Dirichlet edge
    const Trace& g0 = net.traces[0];
    for (int side : {0, 1}) {
        const Fracture& f = net.fracture(side == 0 ? g0.fractures.first : g0.fractures.second);
        for (std::size_t e = 0; e < f.boundary_tags.size(); ++e) {
            if (f.boundary_tags[e].kind != BcKind::dirichlet) continue;
            const Vec3 a = f.vertices3d[e], b = f.vertices3d[(e + 1) % f.n_vertices()];
            for (const Vec3& p : g0.segment3d) {
                const Vec3 ab = b - a;
                const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
                EXPECT_GT(norm(p - (a + ab * t)), 0.05);
            }
        }
    }
}

TEST(TestCase1, ConfigOutOfRangeThrows) {
    EXPECT_THROW(generate_test_case_1(-1), Error);
    EXPECT_THROW(generate_test_case_1(21), Error);
}

TEST(TestCase2, TenFracturesFourteenTraces) {
    auto net = generate_test_case_2();
    EXPECT_EQ(net.fractures.size(), 10u);
    EXPECT_EQ(net.traces.size(), 14u);
    for (const Trace& t : net.traces) EXPECT_GT(t.length(), 0.0);
    // every fracture participates in at least one trace
    for (const auto& f : net.fractures) EXPECT_TRUE(net.incidence.count(f.id));
}

TEST(Network, CrossIsWellFormed) {
    auto net = generate_cross();
    ASSERT_EQ(net.traces.size(), 1u);
    EXPECT_NEAR(net.traces[0].length(), 1.0, 1e-12);
    EXPECT_EQ(net.incidence.at(0).size(), 1u);
    EXPECT_EQ(net.incidence.at(1).size(), 1u);
}

TEST(Network, RequiresSomeDirichlet) {
    auto neu = std::vector<EdgeTag>(4, EdgeTag{});
    Fracture a = make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, neu);
    EXPECT_THROW(build_network({a}), Error);
}

TEST(Validation, OneVertexPolygonRejected) {
    EXPECT_THROW(make_fracture(0, {{0, 0, 0}}), Error);
}

TEST(Validation, NonCoplanarRejected) {
    EXPECT_THROW(make_fracture(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0.2}, {0, 1, 0}}), Error);
}

TEST(Validation, SelfIntersectingRejected) {
    EXPECT_THROW(make_fracture(0, {{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}}), Error);
}
