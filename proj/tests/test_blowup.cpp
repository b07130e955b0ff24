#include <cmath>

#include "doctest.h"

#include "cell/blowup.hpp"
#include "core/error.hpp"
#include "density/catalog.hpp"

using namespace sdr;

namespace {

Domain big_domain(int n_dim) {
    Domain d;
    d.center = Vec(n_dim, 0.0);
    d.side = 16.0;
    return d;
}

}  // namespace

TEST_CASE("homogeneous bulk blow-up has constant ratios") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    params.cells_per_side = 8;
    BlowupResult res = blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {1.0}), {Mat(1, 1, {1.0})},
                                   {1.0, 0.5, 0.25}, big_domain(1), params);
    REQUIRE(res.ratios.size() == 3);
    for (double r : res.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.estimate == doctest::Approx(1.0).epsilon(1e-9));
    // three independent solves agree pairwise
    CHECK(std::fabs(res.ratios[0] - res.ratios[1]) < 1e-9);
    CHECK(std::fabs(res.ratios[1] - res.ratios[2]) < 1e-9);
}

TEST_CASE("affine-optimal case: ratio equals W(xi)") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    BlowupResult res = blowup_bulk(w, psi, Vec{0.5}, Vec{0}, Mat(1, 1, {2.0}), {Mat(1, 1, {2.0})},
                                   {1.0, 0.5, 0.25}, big_domain(1), params);
    for (double r : res.ratios) CHECK(r == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("translation invariance: shifting the datum constant changes nothing") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    BlowupResult base = blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {1.0}), {Mat(1, 1, {0.0})},
                                    {1.0, 0.5, 0.25}, big_domain(1), params);
    BlowupResult shifted = blowup_bulk(w, psi, Vec{0}, Vec{5.0}, Mat(1, 1, {1.0}),
                                       {Mat(1, 1, {0.0})}, {1.0, 0.5, 0.25}, big_domain(1), params);
    REQUIRE(base.ratios.size() == shifted.ratios.size());
    for (std::size_t i = 0; i < base.ratios.size(); ++i)
        CHECK(std::fabs(base.ratios[i] - shifted.ratios[i]) <= 1e-10);
}

TEST_CASE("surface blow-up equals the surface cell value") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    BlowupResult res = blowup_surface(w, psi, Vec{0}, Vec{1.0}, Vec{0.0}, Vec{1.0}, 1,
                                      {1.0, 0.5, 0.25}, big_domain(1), params);
    for (double r : res.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-9));

    CellProblemSpec cell;
    cell.kind = CellProblemKind::Surface;
    cell.grid = make_grid(1, 1, 8);
    cell.bulk = w;
    cell.surface = psi;
    cell.p = 2.0;
    cell.jump_lambda = Vec{1.0};
    cell.jump_theta = Vec{0.0};
    CHECK(res.estimate == doctest::Approx(solve_cell_problem(cell).value).epsilon(1e-9));
}

TEST_CASE("surface blow-up in 2D with a rotated cube") {
    BulkDensity w = catalog_bulk("quadratic", 2, 2);
    SurfaceDensity psi = catalog_surface("norm-jump", 2, 2);
    BlowupParams params;
    params.cells_per_side = 4;
    Vec nu{0.0, 1.0};
    BlowupResult res = blowup_surface(w, psi, Vec{0, 0}, Vec{2.0, 0.0}, Vec{0.0, 0.0}, nu, 1,
                                      {1.0, 0.5, 0.25}, big_domain(2), params);
    for (double r : res.ratios) CHECK(r == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("lambda = theta blows up to zero") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    BlowupResult res = blowup_surface(w, psi, Vec{0}, Vec{2.0}, Vec{2.0}, Vec{1.0}, 1,
                                      {1.0, 0.5, 0.25}, big_domain(1), params);
    for (double r : res.ratios) CHECK(r == doctest::Approx(0.0));
}

TEST_CASE("common shifts of (lambda, theta) leave ratios unchanged") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    BlowupResult a = blowup_surface(w, psi, Vec{0}, Vec{1.0}, Vec{0.0}, Vec{1.0}, 1,
                                    {1.0, 0.5, 0.25}, big_domain(1), params);
    BlowupResult b = blowup_surface(w, psi, Vec{0}, Vec{4.5}, Vec{3.5}, Vec{1.0}, 1,
                                    {1.0, 0.5, 0.25}, big_domain(1), params);
    for (std::size_t i = 0; i < a.ratios.size(); ++i)
        CHECK(std::fabs(a.ratios[i] - b.ratios[i]) <= 1e-10);
}

TEST_CASE("ladder validation and domain containment") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    CHECK_THROWS_AS(blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {1.0}), {Mat(1, 1, {1.0})},
                                {1.0, 0.5}, big_domain(1), params),
                    Error);
    CHECK_THROWS_AS(blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {1.0}), {Mat(1, 1, {1.0})},
                                {0.5, 1.0, 0.25}, big_domain(1), params),
                    Error);
    Domain tiny;
    tiny.center = Vec{0.0};
    tiny.side = 0.5;
    CHECK_THROWS_AS(blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {1.0}), {Mat(1, 1, {1.0})},
                                {1.0, 0.5, 0.25}, tiny, params),
                    Error);
}

TEST_CASE("worker fan-out leaves the ladder values unchanged") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams seq;
    BlowupParams par = seq;
    par.workers = 3;
    BlowupResult a = blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {2.0}), {Mat(1, 1, {1.0})},
                                 {1.0, 0.5, 0.25}, big_domain(1), seq);
    BlowupResult b = blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {2.0}), {Mat(1, 1, {1.0})},
                                 {1.0, 0.5, 0.25}, big_domain(1), par);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("two-level blow-up ratios follow the iterated closed form") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    BlowupParams params;
    // xi = 1, B1 = 0, B2 = 2: W(B2) + |B1-B2| + |xi-B1| = 4 + 2 + 1
    BlowupResult res = blowup_bulk(w, psi, Vec{0}, Vec{0}, Mat(1, 1, {1.0}),
                                   {Mat(1, 1, {0.0}), Mat(1, 1, {2.0})}, {1.0, 0.5, 0.25},
                                   big_domain(1), params);
    for (double r : res.ratios) CHECK(r == doctest::Approx(7.0).epsilon(1e-9));
}
