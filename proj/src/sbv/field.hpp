#pragma once

#include <string>
#include <vector>

#include "density/density.hpp"
#include "sbv/grid.hpp"

namespace sdr {

// Piecewise-affine SBV field on a cube grid: one affine map per cell,
// u_c(x) = value_c + gradient_c (x - cell_center). Jumps live on the facet
// skeleton and are evaluated by the facet-midpoint rule, which is exact for
// piecewise-constant jumps and O(h^2) otherwise.
struct SbvField {
    CubeGrid grid;
    std::vector<Vec> values;     // value at each cell center, length n^N
    std::vector<Mat> gradients;  // d x N per cell

    Vec trace(int cell, const Vec& x) const;
    int cell_count() const { return grid.cell_count(); }
};

SbvField make_field(const CubeGrid& grid, std::vector<Vec> values, std::vector<Mat> gradients);

// Globally affine u(x) = offset + A x.
SbvField affine_field(const CubeGrid& grid, const Mat& a, const Vec& offset);

// Piecewise-constant two-sided datum: lambda where x.e1 >= 0 (grid frame),
// theta on the other side, zero gradients. Requires the interface plane to
// lie on the facet skeleton (even n when the plane passes through the
// center).
SbvField jump_datum_field(const CubeGrid& grid, const Vec& lambda, const Vec& theta);

// alpha*f + beta*g on a shared grid.
SbvField field_axpby(double alpha, const SbvField& f, double beta, const SbvField& g);

struct FacetJump {
    CubeGrid::Facet facet;
    Vec midpoint;
    Vec jump;    // upper trace minus lower trace at the midpoint
    Vec normal;  // positive coordinate direction of facet.dir
    double area;
};

// Nonzero midpoint trace differences over interior facets; zero-jump facets
// are omitted. Orientation follows the positive-direction convention, so
// flipping it flips the jump sign.
std::vector<FacetJump> jumps(const SbvField& u, double zero_tol = 0.0);

// Total jump mass sum |[u]| * area.
double jump_total_variation(const SbvField& u);

// Integral of the gradient over a cell box.
Mat gradient_integral(const SbvField& u, const CellBox& box);
Mat gradient_integral(const SbvField& u);

// Sum over facets in a box of [u] (x) nu * area. A facet belongs to the box
// of its lower cell provided its upper cell is in the grid, so a partition of
// the grid counts every interface facet exactly once.
Mat jump_tensor_integral(const SbvField& u, const CellBox& box);

// Boundary flux  integral over the box boundary of (trace u) (x) n, exact by
// the midpoint rule on each boundary facet. Equals gradient_integral +
// jump_tensor_integral on every box (discrete derivative decomposition).
Mat boundary_flux(const SbvField& u, const CellBox& box);

// Energy  sum_cells W(x_c, grad u_c) vol + sum_facets psi(x_f, [u], nu) area.
double energy(const SbvField& u, const BulkDensity& w, const SurfaceDensity& psi);
double energy_in_box(const SbvField& u, const BulkDensity& w, const SurfaceDensity& psi,
                     const CellBox& box);

// Exact L1 distance between two fields on the same grid (closed form when
// d = 1; Gauss-Legendre quadrature otherwise, accurate far beyond test
// tolerances).
double l1_distance(const SbvField& a, const SbvField& b);
double l1_norm(const SbvField& a);

// Cell-averaged piecewise-constant approximation on the m-partition. m must
// divide n (block averaging) or be a multiple of n (the field is refined
// first). Zero gradients; block value = average of the field over the block.
SbvField piecewise_constant_approx(const SbvField& u, int m);

// Piecewise-constant field sampling the trace at each block's lower corner
// instead of averaging; the determining-sequence construction uses this
// anchored variant.
SbvField block_corner_constant(const SbvField& u, int m);

// Field with prescribed per-cell gradients, zero value at every cell center;
// all mismatch is carried by facet jumps. Jump total variation is at most
// alberti_constant(grid) * sum |target| * vol.
SbvField discrete_alberti(const CubeGrid& grid, const std::vector<Mat>& target_gradients);
double alberti_constant(const CubeGrid& grid);

// Exact refinement by an integer factor: same piecewise-affine function on a
// finer grid.
SbvField refine(const SbvField& u, int factor);

// Represent u exactly on a compatible finer grid with n_target cells per
// side (n_target must be a multiple of u's n).
SbvField resample_to(const SbvField& u, int n_target);

// --- weak-convergence test family -------------------------------------------

// Finite family standing in for weak/weak-* convergence tests: monomials of
// degree <= 2 and indicators of dyadic sub-boxes of the cube, levels 0-2.
struct MomentTest {
    enum class Kind { Monomial, DyadicBox };
    Kind kind = Kind::Monomial;
    int e0 = 0, e1 = 0;          // monomial exponents, e0 + e1 <= 2
    int level = 0, j0 = 0, j1 = 0;  // dyadic box: 2^level boxes per side
    std::string label() const;
};

std::vector<MomentTest> standard_moment_tests(int space_dim);

// Exact integral over the cube of (per-cell constant matrix field) * test.
Mat moment_pairing(const CubeGrid& grid, const std::vector<Mat>& cell_field,
                   const MomentTest& test);

// --- serialization -----------------------------------------------------------

// JSON with a grid header and flat arrays of cell values (cell-major, then
// component) and gradients (cell-major, then row-major d x N), cells ordered
// x1-fastest.
std::string field_to_json(const SbvField& u);
SbvField field_from_json(const std::string& json_text);

}  // namespace sdr
