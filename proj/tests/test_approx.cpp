#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "approx/approx.hpp"
#include "core/error.hpp"

using namespace sdr;

namespace {

CubeGrid unit_line(int n) { return make_grid(1, 1, n, Vec{0.5}, 1.0, Vec{1.0}); }

StructuredDeformation identity_with_micro(int n_g, double micro) {
    CubeGrid g = unit_line(n_g);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    return make_structured(macro, std::vector<Mat>(g.cell_count(), Mat(1, 1, {micro})));
}

std::vector<Mat> constants(const CubeGrid& g, double v) {
    return std::vector<Mat>(g.cell_count(), Mat(1, 1, {v}));
}

}  // namespace

TEST_CASE("determining sequence for (x, 0): floor staircase with 1/(2n) error") {
    StructuredDeformation sd = identity_with_micro(1, 0.0);
    for (int n : {4, 8, 16}) {
        SbvField u = build_determining_sequence(sd, n);
        // gradients vanish exactly, bitwise
        for (const auto& m : u.gradients) CHECK(m.at(0, 0) == 0.0);
        SbvField g_res = resample_to(sd.macro, u.grid.cells_per_side);
        double err = l1_distance(u, g_res);
        CHECK(err == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-12));
        double reference = oracle::quad_1d(
            [n](double x) { return std::fabs(x - std::floor(n * x) / n); }, 0.0, 1.0);
        CHECK(err == doctest::Approx(reference).epsilon(1e-6));
    }
}

TEST_CASE("the construction does not depend on the macro grid resolution") {
    StructuredDeformation coarse = identity_with_micro(1, 0.0);
    StructuredDeformation fine = identity_with_micro(4, 0.0);
    for (int n : {4, 8}) {
        SbvField a = build_determining_sequence(coarse, n);
        SbvField b = build_determining_sequence(fine, n);
        int common = std::max(a.grid.cells_per_side, b.grid.cells_per_side);
        CHECK(l1_distance(resample_to(a, common), resample_to(b, common)) < 1e-14);
    }
}

TEST_CASE("G = grad g reproduces g at every index") {
    StructuredDeformation sd = identity_with_micro(2, 1.0);
    for (int n : {1, 3, 4}) {
        SbvField u = build_determining_sequence(sd, n);
        SbvField g_res = resample_to(sd.macro, u.grid.cells_per_side);
        CHECK(l1_distance(u, g_res) == doctest::Approx(0.0));
    }
}

TEST_CASE("slope-2 target: gradients exact, error halves with n") {
    StructuredDeformation sd = identity_with_micro(1, 2.0);
    std::vector<double> errs;
    std::vector<double> ns;
    for (int n : {4, 8, 16, 32}) {
        SbvField u = build_determining_sequence(sd, n);
        for (const auto& m : u.gradients) CHECK(m.at(0, 0) == 2.0);
        SbvField g_res = resample_to(sd.macro, u.grid.cells_per_side);
        errs.push_back(l1_distance(u, g_res));
        ns.push_back(n);
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i)
        CHECK(errs[i + 1] == doctest::Approx(errs[i] / 2).epsilon(0.1));
    CHECK(oracle::fitted_rate(ns, errs) == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("multilevel construction (x, 0, 2): gradient identities hold exactly") {
    CubeGrid g = unit_line(1);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 0.0), constants(g, 2.0));
    SbvField u = build_multilevel_sequence(ml, 4, 4);
    for (const auto& m : u.gradients) CHECK(m.at(0, 0) == 2.0);

    DoubleIndexedFamily fam = multilevel_family(ml);
    SbvField inner = fam.inner_limit(4);
    for (const auto& m : inner.gradients) CHECK(m.at(0, 0) == 0.0);

    // inner limits really are the n2-limits of the members
    for (int n2 : {4, 8, 16}) {
        SbvField member = fam.member(4, n2);
        int common = std::max(member.grid.cells_per_side, inner.grid.cells_per_side);
        double d = l1_distance(resample_to(member, common), resample_to(inner, common));
        CHECK(d <= 2.0 / (2.0 * n2) + 1e-12);
    }
}

TEST_CASE("G1 = G2 = grad g keeps the macro field at every index pair") {
    CubeGrid g = unit_line(2);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 1.0), constants(g, 1.0));
    for (auto [n1, n2] : {std::pair{1, 1}, std::pair{4, 2}, std::pair{2, 8}}) {
        SbvField u = build_multilevel_sequence(ml, n1, n2);
        SbvField g_res = resample_to(macro, u.grid.cells_per_side);
        CHECK(l1_distance(u, g_res) == doctest::Approx(0.0));
    }
}

TEST_CASE("degenerate middle level reduces to the two-level construction") {
    CubeGrid g = unit_line(1);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 0.5), constants(g, 0.5));
    SbvField u = build_multilevel_sequence(ml, 4, 8);
    StructuredDeformation two = make_structured(macro, constants(g, 0.5));
    SbvField v = build_determining_sequence(two, 4);
    int common = std::max(u.grid.cells_per_side, v.grid.cells_per_side);
    CHECK(l1_distance(resample_to(u, common), resample_to(v, common)) < 1e-14);
}

TEST_CASE("convergence verification passes on the constructed family") {
    CubeGrid g = unit_line(1);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 0.0), constants(g, 2.0));
    ConvergenceReport rep =
        verify_hsd_convergence(multilevel_family(ml), ml, {2, 4, 8, 16}, 1e-8);
    CHECK(rep.passed());
    for (const auto& c : rep.clauses) CHECK(c.verdict == Verdict::Pass);
    // clause (i) discrepancies decay like 1/n
    CHECK(rep.clauses[0].fitted_rate == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("swapping the limit order flips clause (ii)") {
    CubeGrid g = unit_line(1);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 0.0), constants(g, 2.0));
    ConvergenceReport rep =
        verify_hsd_convergence(multilevel_family(ml), ml, {2, 4, 8, 16}, 1e-8, true);
    CHECK(rep.clauses[0].verdict == Verdict::Pass);   // iterated L1 limit still g
    CHECK(rep.clauses[1].verdict == Verdict::Fail);   // inner gradients are not G1
    CHECK(rep.clauses[2].verdict == Verdict::Pass);
}

TEST_CASE("constant family passes trivially") {
    CubeGrid g = unit_line(2);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 1.0), constants(g, 1.0));
    DoubleIndexedFamily fam;
    fam.member = [macro](int, int) { return macro; };
    fam.inner_limit = [macro](int) { return macro; };
    fam.inner_limit_swapped = fam.inner_limit;
    ConvergenceReport rep = verify_hsd_convergence(fam, ml, {2, 4, 8}, 1e-10);
    CHECK(rep.passed());
}

TEST_CASE("oscillating family fails clause (i)") {
    CubeGrid g = unit_line(2);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 1.0), constants(g, 1.0));
    DoubleIndexedFamily fam;
    fam.member = [macro](int n1, int) {
        SbvField u = macro;
        for (auto& v : u.values) v[0] += std::sin(static_cast<double>(n1));
        return u;
    };
    fam.inner_limit = [fam](int n1) { return fam.member(n1, 0); };
    fam.inner_limit_swapped = fam.inner_limit;
    ConvergenceReport rep = verify_hsd_convergence(fam, ml, {2, 4, 8}, 1e-10);
    CHECK(rep.clauses[0].verdict == Verdict::Fail);
}

TEST_CASE("SD mode reports the gradient L^p supremum") {
    CubeGrid g = unit_line(1);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 0.0), constants(g, 2.0), 2.0,
                                               IntegrabilityMode::SD);
    ConvergenceReport rep = verify_hsd_convergence(multilevel_family(ml), ml, {2, 4, 8}, 1e-8);
    CHECK(rep.sup_gradient_lp == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ladders shorter than three indices are rejected") {
    CubeGrid g = unit_line(1);
    SbvField macro = affine_field(g, Mat(1, 1, {1.0}), Vec{0.0});
    MultiLevelDeformation ml = make_multilevel(macro, constants(g, 0.0), constants(g, 2.0));
    CHECK_THROWS_AS(verify_hsd_convergence(multilevel_family(ml), ml, {2, 4}, 1e-8), Error);
}
