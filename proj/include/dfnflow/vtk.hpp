#pragma once

// Legacy-ASCII VTK unstructured-grid snapshots, one file per fracture per
// dump, with arrays "head", "theta" (cell or point data per scheme) and the
// cell-wise "velocity".

#include <cstdio>
#include <string>

#include "dfnflow/darcy.hpp"

namespace dfn {

struct VtkSnapshot {
    std::vector<Vec3> points;
    std::vector<std::vector<int>> cells;
    std::map<std::string, std::vector<double>> cell_data;
    std::map<std::string, std::vector<double>> point_data;
    std::map<std::string, std::vector<Vec3>> cell_vectors;
};

inline void write_legacy_vtk(const std::string& path, const NetworkMesh& nm, std::size_t m,
                             const std::map<std::string, const std::vector<double>*>& cell_data,
                             const std::map<std::string, const std::vector<double>*>& point_data,
                             const std::vector<Vec2>* cell_velocity) {
    const FractureMesh& mesh = nm.meshes[m];
    const Fracture& fr = nm.network->fractures[m];
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "# vtk DataFile Version 2.0\n");
    std::fprintf(f, "fracture %d\n", mesh.fracture_id);
    std::fprintf(f, "ASCII\nDATASET UNSTRUCTURED_GRID\n");
    std::fprintf(f, "POINTS %zu double\n", mesh.vertices.size());
    for (const Vec2& v : mesh.vertices) {
        const Vec3 p = fr.frame.to_world(v);
        std::fprintf(f, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    }
    std::size_t list_len = 0;
    for (const auto& cell : mesh.cells) list_len += cell.size() + 1;
    std::fprintf(f, "CELLS %zu %zu\n", mesh.cells.size(), list_len);
    for (const auto& cell : mesh.cells) {
        std::fprintf(f, "%zu", cell.size());
        for (int v : cell) std::fprintf(f, " %d", v);
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "CELL_TYPES %zu\n", mesh.cells.size());
    for (const auto& cell : mesh.cells) std::fprintf(f, "%d\n", cell.size() == 3 ? 5 : 7);

    bool have_cell_section = !cell_data.empty() || cell_velocity;
    if (have_cell_section) {
        std::fprintf(f, "CELL_DATA %zu\n", mesh.cells.size());
        for (const auto& [name, values] : cell_data) {
            std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name.c_str());
            for (double v : *values) std::fprintf(f, "%.17g\n", v);
        }
        if (cell_velocity) {
            std::fprintf(f, "VECTORS velocity double\n");
            for (const Vec2& u : *cell_velocity) {
                const Vec3 w = fr.frame.e1 * u.x + fr.frame.e2 * u.y;
                std::fprintf(f, "%.17g %.17g %.17g\n", w.x, w.y, w.z);
            }
        }
    }
    if (!point_data.empty()) {
        std::fprintf(f, "POINT_DATA %zu\n", mesh.vertices.size());
        for (const auto& [name, values] : point_data) {
            std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name.c_str());
            for (double v : *values) std::fprintf(f, "%.17g\n", v);
        }
    }
    std::fclose(f);
}

/// Reader for the files written above (round-trip checks and CSV recomputation).
inline VtkSnapshot read_legacy_vtk(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw Error("cannot open " + path);
    VtkSnapshot snap;
    char line[4096];
    auto next_line = [&]() -> char* { return std::fgets(line, sizeof line, f); };
    std::size_t n_cells_hint = 0;
    bool in_point_data = false;
    while (next_line()) {
        std::size_t n = 0;
        if (std::sscanf(line, "POINTS %zu", &n) == 1) {
            snap.points.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                if (!next_line()) throw Error("vtk: truncated POINTS");
                std::sscanf(line, "%lg %lg %lg", &snap.points[k].x, &snap.points[k].y,
                            &snap.points[k].z);
            }
        } else if (std::sscanf(line, "CELLS %zu %*d", &n) == 1) {
            n_cells_hint = n;
            snap.cells.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                if (!next_line()) throw Error("vtk: truncated CELLS");
                int cnt = 0, offset = 0, used = 0;
                std::sscanf(line, "%d%n", &cnt, &used);
                offset = used;
                snap.cells[k].resize((std::size_t)cnt);
                for (int i = 0; i < cnt; ++i) {
                    std::sscanf(line + offset, "%d%n", &snap.cells[k][(std::size_t)i], &used);
                    offset += used;
                }
            }
        } else {
            char name[256];
            std::size_t count = 0;
            if (std::sscanf(line, "CELL_DATA %zu", &count) == 1) {
                in_point_data = false;
                continue;
            }
            if (std::sscanf(line, "POINT_DATA %zu", &count) == 1) {
                in_point_data = true;
                continue;
            }
            if (std::sscanf(line, "SCALARS %255s double", name) == 1) {
                next_line();  // LOOKUP_TABLE
                const std::size_t n_vals = in_point_data ? snap.points.size() : n_cells_hint;
                std::vector<double> vals(n_vals);
                for (std::size_t k = 0; k < n_vals; ++k) {
                    if (!next_line()) throw Error("vtk: truncated SCALARS");
                    std::sscanf(line, "%lg", &vals[k]);
                }
                (in_point_data ? snap.point_data : snap.cell_data)[name] = std::move(vals);
            } else if (std::sscanf(line, "VECTORS %255s double", name) == 1) {
                std::vector<Vec3> vals(n_cells_hint);
                for (std::size_t k = 0; k < n_cells_hint; ++k) {
                    if (!next_line()) throw Error("vtk: truncated VECTORS");
                    std::sscanf(line, "%lg %lg %lg", &vals[k].x, &vals[k].y, &vals[k].z);
                }
                snap.cell_vectors[name] = std::move(vals);
            }
        }
    }
    std::fclose(f);
    return snap;
}

}  // namespace dfn
