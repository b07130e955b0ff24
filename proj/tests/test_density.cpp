#include <cmath>

#include "doctest.h"

#include "core/error.hpp"
#include "density/catalog.hpp"
#include "density/density.hpp"
#include "density/validate.hpp"

using namespace sdr;

TEST_CASE("eval_bulk on catalog densities") {
    BulkDensity quad = catalog_bulk("quadratic", 2, 2);
    Mat id(2, 2, {1, 0, 0, 1});
    CHECK(eval_bulk(quad, Vec{0, 0}, id) == doctest::Approx(2.0));

    BulkDensity lin = parse_bulk_density("norm(A)", 2, 2);
    CHECK(eval_bulk(lin, Vec{0, 0}, Mat(2, 2)) == doctest::Approx(0.0));

    CHECK_THROWS_AS(eval_bulk(quad, Vec{0}, id), Error);  // x dimension
}

TEST_CASE("eval_surface checks the normal") {
    SurfaceDensity nj = catalog_surface("norm-jump", 2, 2);
    CHECK(eval_surface(nj, Vec{0, 0}, Vec{3, 4}, Vec{1, 0}) == doctest::Approx(5.0));
    CHECK(eval_surface(nj, Vec{0, 0}, Vec{0, 0}, Vec{0, 1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(eval_surface(nj, Vec{0, 0}, Vec{1, 1}, Vec{1, 1}), Error);

    SurfaceDensity aniso = catalog_surface("anisotropic", 2, 2);
    CHECK(eval_surface(aniso, Vec{0, 0}, Vec{1, 0}, Vec{0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("recession of sqrt(1+|A|^2) approaches the norm") {
    BulkDensity w = catalog_bulk("perturbed-linear", 1, 1);
    Mat dir(1, 1, {1.0});
    RecessionEstimate est = recession_estimate(w, Vec{0}, dir, {10, 100, 1000, 10000});
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(est.exact);  // catalog declares the closed form
    CHECK(est.spread < 1e-2);
}

TEST_CASE("recession of a 1-homogeneous density is exact on every ladder") {
    BulkDensity w = parse_bulk_density("norm(A)", 1, 1);
    Mat dir(1, 1, {-1.0});
    for (auto ladder : {std::vector<double>{2, 4, 8}, std::vector<double>{10, 100, 1000, 10000}}) {
        RecessionEstimate est = recession_estimate(w, Vec{0}, dir, ladder);
        CHECK(est.value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(est.spread == doctest::Approx(0.0));
    }
}

TEST_CASE("recession with a slow oscillating correction") {
    // W(A) = |A| + sin(|A|)/(1+|A|); ratios approach 1 with ~1/t spread
    BulkDensity w = parse_bulk_density("norm(A) + sin(norm(A)) / (1 + norm(A))", 1, 1);
    Mat dir(1, 1, {1.0});
    std::vector<double> ladder = {10, 100, 1000, 10000};
    RecessionEstimate est = recession_estimate(w, Vec{0}, dir, ladder);
    CHECK(std::fabs(est.value - 1.0) < 1e-1);
    // spread decays like 1/t: an extended ladder shrinks it by ~10x
    std::vector<double> longer = {100, 1000, 10000, 100000};
    RecessionEstimate est2 = recession_estimate(w, Vec{0}, dir, longer);
    CHECK(est2.spread < est.spread);
    CHECK(est2.spread < 1e-3);
}

TEST_CASE("recession diverges for superlinear growth") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    Mat dir(1, 1, {1.0});
    CHECK_THROWS_AS(recession_estimate(w, Vec{0}, dir, {10, 100, 1000, 10000}), Error);
}

TEST_CASE("recession ladder preconditions") {
    BulkDensity w = parse_bulk_density("norm(A)", 1, 1);
    Mat dir(1, 1, {1.0});
    CHECK_THROWS_AS(recession_estimate(w, Vec{0}, dir, {10, 100}), Error);
    Mat not_unit(1, 1, {2.0});
    CHECK_THROWS_AS(recession_estimate(w, Vec{0}, not_unit, {10, 100, 1000}), Error);
}

TEST_CASE("validate_bulk: quadratic passes all declared hypotheses") {
    BulkDensity w = catalog_bulk("quadratic", 1, 1);
    ValidationReport rep = validate_bulk(w, 42, 10000);
    CHECK(rep.find("nonneg")->verdict == Verdict::Pass);
    CHECK(rep.find("W1")->verdict == Verdict::Pass);
    CHECK(rep.find("W4")->verdict == Verdict::Pass);
    CHECK(rep.find("W5")->verdict == Verdict::Pass);
    CHECK(rep.find("W2")->verdict == Verdict::Skipped);
}

TEST_CASE("validate_bulk: |A|^3 declared with p=2 fails the growth bound") {
    BulkDensity w = parse_bulk_density("norm(A)^3", 1, 1);
    w.p = 2.0;
    w.lipschitz_const = 3.0;
    ValidationReport rep = validate_bulk(w, 42, 10000);
    const HypothesisResult* r = rep.find("W1");
    CHECK(r->verdict == Verdict::Fail);
    CHECK(!r->witness.empty());
    CHECK(r->worst_excess > rep.tolerance);
}

TEST_CASE("validate_bulk: a negative density fails nonnegativity") {
    BulkDensity w = parse_bulk_density("0 - 1", 1, 1);
    ValidationReport rep = validate_bulk(w, 7, 100);
    CHECK(rep.find("nonneg")->verdict == Verdict::Fail);
}

TEST_CASE("validate_surface: the norm jump satisfies psi1-psi5") {
    SurfaceDensity psi = catalog_surface("norm-jump", 2, 2);
    psi.declared_modulus = [](double) { return 0.0; };  // x-independent
    ValidationReport rep = validate_surface(psi, 42, 10000);
    CHECK(rep.all_passed());
    CHECK(rep.find("psi5")->verdict == Verdict::Pass);
}

TEST_CASE("validate_surface: |lambda|^2 breaks homogeneity and the upper bound") {
    SurfaceDensity psi = parse_surface_density("normsq(lambda)", 1, 1);
    ValidationReport rep = validate_surface(psi, 42, 10000);
    CHECK(rep.find("psi3")->verdict == Verdict::Fail);
    CHECK(rep.find("psi2-upper")->verdict == Verdict::Fail);
}

TEST_CASE("validate_surface: |dot(lambda,nu)| fails only the lower growth bound") {
    SurfaceDensity psi = catalog_surface("anisotropic", 2, 2);
    ValidationReport rep = validate_surface(psi, 42, 10000);
    CHECK(rep.find("psi1")->verdict == Verdict::Pass);
    CHECK(rep.find("psi2-lower")->verdict == Verdict::Fail);
    CHECK(rep.find("psi2-upper")->verdict == Verdict::Pass);
    CHECK(rep.find("psi3")->verdict == Verdict::Pass);
    CHECK(rep.find("psi4")->verdict == Verdict::Pass);
}

TEST_CASE("validation is reproducible from the seed") {
    SurfaceDensity psi = catalog_surface("anisotropic", 2, 2);
    ValidationReport a = validate_surface(psi, 99, 2000);
    ValidationReport b = validate_surface(psi, 99, 2000);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        CHECK(a.results[i].verdict == b.results[i].verdict);
        CHECK(a.results[i].worst_excess == b.results[i].worst_excess);
        CHECK(a.results[i].witness == b.results[i].witness);
    }
}

TEST_CASE("surface scaling to machine precision") {
    SurfaceDensity psi = catalog_surface("norm-jump", 1, 1);
    for (double t : {0.25, 0.5, 2.0, 7.5}) {
        Vec lam{1.3};
        Vec scaled{t * 1.3};
        CHECK(eval_surface(psi, Vec{0}, scaled, Vec{1}) ==
              doctest::Approx(t * eval_surface(psi, Vec{0}, lam, Vec{1})).epsilon(1e-15));
    }
}

TEST_CASE("catalog listing") {
    CHECK(catalog_entries().size() >= 6);
    CHECK(catalog_has("quadratic"));
    CHECK(catalog_entry("quadratic").p == 2.0);
    CHECK(catalog_entry("norm-jump").lower == 1.0);
    CHECK(catalog_entry("norm-jump").upper == 1.0);
    std::string listing = catalog_json();
    CHECK(listing.find("quadratic") != std::string::npos);
    CHECK(listing.find("scaled-jump") != std::string::npos);
}

TEST_CASE("frame rotation conjugates the surface density") {
    SurfaceDensity aniso = catalog_surface("anisotropic", 2, 2);
    Vec nu{0.0, 1.0};
    Mat rot = frame_rotation(nu);
    SurfaceDensity rotated = rotate(aniso, rot, Vec{0, 0});
    // in the working frame, e1 maps to nu
    Vec lam{0.0, 2.0};
    Vec e1{1.0, 0.0};
    CHECK(rotated.evaluator(Vec{0, 0}, lam, e1) ==
          doctest::Approx(aniso.evaluator(Vec{0, 0}, lam, nu)).epsilon(1e-14));
}
