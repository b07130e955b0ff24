#include "sbv/grid.hpp"

#include <cmath>

#include "core/error.hpp"

namespace sdr {

int CubeGrid::cell_count() const {
    int n = cells_per_side;
    return space_dim == 1 ? n : n * n;
}

double CubeGrid::cell_volume() const {
    double w = cell_width();
    return space_dim == 1 ? w : w * w;
}

double CubeGrid::facet_area() const { return space_dim == 1 ? 1.0 : cell_width(); }

double CubeGrid::volume() const { return space_dim == 1 ? side : side * side; }

int CubeGrid::cell_index(int i0, int i1) const { return i0 + cells_per_side * i1; }

void CubeGrid::cell_coords(int flat, int& i0, int& i1) const {
    i0 = flat % cells_per_side;
    i1 = flat / cells_per_side;
}

Vec CubeGrid::cell_center(int flat) const {
    int i0, i1;
    cell_coords(flat, i0, i1);
    double w = cell_width();
    Vec c(space_dim);
    c[0] = center[0] - side / 2.0 + (i0 + 0.5) * w;
    if (space_dim == 2) c[1] = center[1] - side / 2.0 + (i1 + 0.5) * w;
    return c;
}

Vec CubeGrid::lower_corner(int flat) const {
    int i0, i1;
    cell_coords(flat, i0, i1);
    double w = cell_width();
    Vec c(space_dim);
    c[0] = center[0] - side / 2.0 + i0 * w;
    if (space_dim == 2) c[1] = center[1] - side / 2.0 + i1 * w;
    return c;
}

Vec CubeGrid::cube_lower_corner() const {
    Vec c(space_dim);
    for (int k = 0; k < space_dim; ++k) c[k] = center[k] - side / 2.0;
    return c;
}

std::vector<CubeGrid::Facet> CubeGrid::interior_facets() const {
    std::vector<Facet> out;
    int n = cells_per_side;
    if (space_dim == 1) {
        out.reserve(n - 1);
        for (int i = 0; i + 1 < n; ++i) out.push_back({0, i, i + 1});
        return out;
    }
    out.reserve(2 * n * (n - 1));
    for (int i1 = 0; i1 < n; ++i1)
        for (int i0 = 0; i0 + 1 < n; ++i0)
            out.push_back({0, cell_index(i0, i1), cell_index(i0 + 1, i1)});
    for (int i1 = 0; i1 + 1 < n; ++i1)
        for (int i0 = 0; i0 < n; ++i0)
            out.push_back({1, cell_index(i0, i1), cell_index(i0, i1 + 1)});
    return out;
}

Vec CubeGrid::facet_midpoint(const Facet& f) const {
    Vec mid = cell_center(f.lower_cell);
    mid[f.dir] += cell_width() / 2.0;
    return mid;
}

bool CubeGrid::same_geometry(const CubeGrid& o) const {
    return space_dim == o.space_dim && target_dim == o.target_dim && side == o.side &&
           center == o.center && normal == o.normal;
}

bool CubeGrid::operator==(const CubeGrid& o) const {
    return same_geometry(o) && cells_per_side == o.cells_per_side;
}

CubeGrid make_grid(int space_dim, int target_dim, int cells_per_side, Vec center, double side,
                   Vec normal) {
    if (space_dim != 1 && space_dim != 2)
        throw Error(ErrorKind::Argument, "make_grid: N must be 1 or 2");
    if (target_dim < 1) throw Error(ErrorKind::Argument, "make_grid: d must be >= 1");
    if (cells_per_side < 1) throw Error(ErrorKind::Argument, "make_grid: n must be >= 1");
    if (!(side > 0.0)) throw Error(ErrorKind::Argument, "make_grid: side must be positive");
    if (static_cast<int>(center.size()) != space_dim)
        throw Error(ErrorKind::Dimension, "make_grid: center has wrong dimension");
    if (static_cast<int>(normal.size()) != space_dim)
        throw Error(ErrorKind::Dimension, "make_grid: normal has wrong dimension");
    if (std::fabs(norm(normal) - 1.0) > 1e-12)
        throw Error(ErrorKind::Argument, "make_grid: normal is not unit length");
    CubeGrid g;
    g.space_dim = space_dim;
    g.target_dim = target_dim;
    g.cells_per_side = cells_per_side;
    g.center = std::move(center);
    g.side = side;
    g.normal = std::move(normal);
    return g;
}

CubeGrid make_grid(int space_dim, int target_dim, int cells_per_side, double side) {
    Vec center(space_dim, 0.0);
    Vec normal(space_dim, 0.0);
    normal[0] = 1.0;
    return make_grid(space_dim, target_dim, cells_per_side, std::move(center), side,
                     std::move(normal));
}

CellBox full_box(const CubeGrid& g) {
    CellBox b;
    b.lo0 = 0;
    b.hi0 = g.cells_per_side;
    b.lo1 = 0;
    b.hi1 = g.space_dim == 2 ? g.cells_per_side : 1;
    return b;
}

}  // namespace sdr
