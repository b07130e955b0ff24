#pragma once

#include <vector>

#include "core/linalg.hpp"

namespace sdr {

// Uniform cube grid on Q_nu(center, side) in R^N, N in {1,2}. The grid is
// always axis-aligned in its working frame; a non-axis orientation nu is
// handled by conjugating densities and data with the rotation taking e1 to
// nu, never by meshing rotated geometry.
//
// Cells are enumerated x1-fastest: flat = i0 + n*i1.
struct CubeGrid {
    int space_dim = 1;    // N
    int target_dim = 1;   // d
    int cells_per_side = 1;
    Vec center;
    double side = 1.0;
    Vec normal;  // orientation nu; e1 when the cube is axis aligned

    int cell_count() const;
    double cell_width() const { return side / cells_per_side; }
    double cell_volume() const;
    double facet_area() const;  // codim-1 measure: 1 when N = 1, width when N = 2
    double volume() const;

    int cell_index(int i0, int i1 = 0) const;
    void cell_coords(int flat, int& i0, int& i1) const;
    Vec cell_center(int flat) const;
    Vec lower_corner(int flat) const;  // cell's lexicographically lowest corner
    Vec cube_lower_corner() const;

    // Interior facet between two adjacent cells. The unit normal is the
    // positive coordinate direction dir; lower/upper are the adjacent cells
    // on the negative/positive side.
    struct Facet {
        int dir = 0;
        int lower_cell = 0;
        int upper_cell = 0;
    };

    // Fixed enumeration order (direction-major, then cell order); reductions
    // over facets are bit-stable because of it.
    std::vector<Facet> interior_facets() const;
    Vec facet_midpoint(const Facet& f) const;

    bool same_geometry(const CubeGrid& o) const;
    bool operator==(const CubeGrid& o) const;
};

CubeGrid make_grid(int space_dim, int target_dim, int cells_per_side, Vec center, double side,
                   Vec normal);

// Axis-aligned grid on the centered unit-like cube with nu = e1.
CubeGrid make_grid(int space_dim, int target_dim, int cells_per_side, double side = 1.0);

// Half-open box of cells [lo0,hi0) x [lo1,hi1), in cell indices.
struct CellBox {
    int lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 1;
    bool contains(int i0, int i1) const { return i0 >= lo0 && i0 < hi0 && i1 >= lo1 && i1 < hi1; }
    int count() const { return (hi0 - lo0) * (hi1 - lo1); }
};

CellBox full_box(const CubeGrid& g);

}  // namespace sdr
