#pragma once

// Built-in benchmark geometries: a two-fracture cross, the three-fracture
// vanishing-trace family (21 configurations) and a synthetic ten-fracture
// network. Published geometries can be loaded from file instead (geometry_io).

#include "dfnflow/geometry.hpp"

namespace dfn {

inline EdgeTag dirichlet(double head) { return {BcKind::dirichlet, head}; }
inline EdgeTag noflow() { return {BcKind::neumann_noflow, 0.0}; }

namespace detail {

/// Axis-aligned rectangle in the plane {axis = offset}; (u, v) are the two
/// remaining coordinates in axis order. Vertices CCW seen from +axis.
inline Fracture axis_rectangle(int id, int axis, double offset, double u0, double u1, double v0,
                               double v1, std::vector<EdgeTag> tags) {
    auto mk = [&](double u, double v) -> Vec3 {
        switch (axis) {
            case 0: return {offset, u, v};
            case 1: return {u, offset, v};
            default: return {u, v, offset};
        }
    };
    // edge k: corner k -> corner k+1; tags follow the same order
    std::vector<Vec3> verts{mk(u0, v0), mk(u1, v0), mk(u1, v1), mk(u0, v1)};
    return make_fracture(id, std::move(verts), std::move(tags));
}

}  // namespace detail

/// Two perpendicular unit squares crossing through their midlines: one trace
/// of length 1. Inflow (h=1) on the left edge of the first square, outflow
/// (h=0) on the bottom edge of the second.
inline FractureNetwork generate_cross() {
    std::vector<Fracture> fr;
    // square in z = 0, (x, y) in [0,1]^2; edges: y=0, x=1, y=1, x=0
    fr.push_back(detail::axis_rectangle(0, 2, 0.0, 0.0, 1.0, 0.0, 1.0,
                                        {noflow(), noflow(), noflow(), dirichlet(1.0)}));
    // square in x = 0.5, y in [0,1], z in [-0.5, 0.5]; edges: z=-0.5, y=1, z=0.5, y=0
    fr.push_back(detail::axis_rectangle(1, 0, 0.5, 0.0, 1.0, -0.5, 0.5,
                                        {dirichlet(0.0), noflow(), noflow(), noflow()}));
    return build_network(std::move(fr));
}

/// Trace-length schedule of the vanishing-trace family: linear from
/// length_first at configuration 0 to length_last at configuration 20.
struct Tc1Schedule {
    double length_first = 0.6;
    double length_last = 0.01;
    int n_configs = 21;

    double length(int config) const {
        return length_first +
               (length_last - length_first) * static_cast<double>(config) /
                   static_cast<double>(n_configs - 1);
    }
};

/// Three-fracture vanishing-trace benchmark. The fixed fracture holds the
/// inflow boundary and carries a small notch at the foot of the intersection
/// line, so the vanishing trace ends on no-flow edges of both fractures (a
/// trace endpoint on a Dirichlet edge would act as a spurious point source).
/// The other two fractures slide down along z together: the first trace
/// shrinks per the schedule, the second keeps its length.
inline FractureNetwork generate_test_case_1(int config, const Tc1Schedule& schedule = {}) {
    if (config < 0 || config >= schedule.n_configs)
        throw Error("test case 1 configuration index out of range [0," +
                    std::to_string(schedule.n_configs - 1) + "]");
    const double len0 = schedule.length(config);
    const double s = len0 - schedule.length_first;  // z displacement, <= 0

    std::vector<Fracture> fr;
    // fixed fracture (inflow): plane y=0, unit square with a notch rising to
    // (0.5, 0.15); both bottom pieces carry the inflow head
    fr.push_back(make_fracture(
        0,
        {{0, 0, 0}, {0.35, 0, 0}, {0.5, 0, 0.15}, {0.65, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}},
        {dirichlet(1.0), noflow(), noflow(), dirichlet(1.0), noflow(), noflow(), noflow()}));
    // sliding fracture (outflow): plane x=0.5, y in [-0.8,0.2], z window of height 1.1
    fr.push_back(detail::axis_rectangle(1, 0, 0.5, -0.8, 0.2, -0.35 + s, 0.75 + s,
                                        {dirichlet(0.0), noflow(), noflow(), noflow()}));
    // passive fracture: plane y=-0.5, x in [0,1], shorter z window (trace length 0.8)
    fr.push_back(detail::axis_rectangle(2, 1, -0.5, 0.0, 1.0, -0.25 + s, 0.55 + s,
                                        {noflow(), noflow(), noflow(), noflow()}));
    return build_network(std::move(fr));
}

/// Synthetic network of 10 fractures and 14 traces: five parallel fractures
/// chained by five orthogonal ones, inflow on the first, outflow on the last.
inline FractureNetwork generate_test_case_2() {
    using detail::axis_rectangle;
    std::vector<Fracture> fr;
    auto neu4 = std::vector<EdgeTag>{noflow(), noflow(), noflow(), noflow()};
    // family A: planes y = const, rectangles in (x, z); edge order z=v0, x=u1, z=v1, x=u0
    fr.push_back(axis_rectangle(0, 1, 0.0, 0.0, 2.0, 0.0, 1.0,
                                {noflow(), noflow(), noflow(), dirichlet(1.0)}));  // inflow x=0
    fr.push_back(axis_rectangle(1, 1, 1.0, 0.5, 2.5, 0.0, 1.0, neu4));
    fr.push_back(axis_rectangle(2, 1, 2.0, 1.0, 3.0, 0.0, 1.0, neu4));
    fr.push_back(axis_rectangle(3, 1, 3.0, 1.5, 3.5, 0.0, 1.0, neu4));
    fr.push_back(axis_rectangle(4, 1, 4.0, 2.0, 4.0, 0.0, 1.0,
                                {noflow(), dirichlet(0.0), noflow(), noflow()}));  // outflow x=4
    // family B: planes x = const, rectangles in (y, z)
    fr.push_back(axis_rectangle(5, 0, 1.0, -0.5, 1.5, 0.2, 1.2, neu4));
    fr.push_back(axis_rectangle(6, 0, 2.0, 0.5, 3.5, -0.2, 0.8, neu4));
    fr.push_back(axis_rectangle(7, 0, 2.25, 0.5, 3.5, 0.1, 1.1, neu4));
    fr.push_back(axis_rectangle(8, 0, 2.9, 1.5, 4.5, 0.05, 1.05, neu4));
    fr.push_back(axis_rectangle(9, 0, 1.5, -0.5, 2.5, 0.3, 0.9, neu4));
    return build_network(std::move(fr));
}

}  // namespace dfn
