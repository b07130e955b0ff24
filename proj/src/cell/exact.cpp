#include <cmath>

#include "cell/detail.hpp"
#include "cell/solve.hpp"
#include "core/error.hpp"

namespace sdr::detail {

namespace {

// datum classification for dirichlet problems
struct DatumInfo {
    bool affine = false;     // constant gradient, no jumps
    bool two_sided = false;  // zero gradients, two values split by the mid-plane
    Mat xi;                  // affine gradient
    Vec delta;               // two-sided difference (upper minus lower)
};

DatumInfo classify_datum(const SbvField& g) {
    DatumInfo info;
    const CubeGrid& grid = g.grid;
    bool const_grad = true;
    bool zero_grad = true;
    for (int c = 0; c < g.cell_count(); ++c) {
        if (!(g.gradients[c] == g.gradients[0])) const_grad = false;
        if (g.gradients[c].norm() != 0.0) zero_grad = false;
    }
    if (const_grad && jumps(g).empty()) {
        info.affine = true;
        info.xi = g.gradients[0];
        return info;
    }
    if (zero_grad && grid.cells_per_side % 2 == 0) {
        Vec above, below;
        bool ok = true, have_above = false, have_below = false;
        for (int c = 0; c < g.cell_count(); ++c) {
            double rel0 = grid.cell_center(c)[0] - grid.center[0];
            const Vec& v = g.values[c];
            if (rel0 > 0.0) {
                if (!have_above) {
                    above = v;
                    have_above = true;
                } else if (v != above) {
                    ok = false;
                }
            } else {
                if (!have_below) {
                    below = v;
                    have_below = true;
                } else if (v != below) {
                    ok = false;
                }
            }
        }
        if (ok && have_above && have_below) {
            info.two_sided = true;
            info.delta = above - below;
        }
    }
    return info;
}

SolveResult make_exact(const CellSetup& s, const State& st, double value, double lower) {
    SolveResult res;
    res.minimizer = state_field(s, st);
    res.aux_fields = st.aux;
    res.value = value;
    res.diagnostics.certified = true;
    res.diagnostics.certificate = "exact-path";
    res.diagnostics.lower_bound = lower;
    res.diagnostics.recession_spread = s.recession_spread;
    res.diagnostics.gap = s.bulk_is_recession ? s.recession_spread : 0.0;
    if (s.bulk_is_recession && s.recession_spread > s.spec.tolerance)
        res.diagnostics.certified = false;
    return res;
}

}  // namespace

// Exact path: declared-convex W with psi = c|lambda|. Jensen collapses the
// bulk part onto the constrained mean and subadditivity collapses the jump
// part onto the net trace mismatch, so the value is available in closed form
// together with an admissible field attaining it.
std::optional<SolveResult> try_exact(const CellSetup& s) {
    const CellProblemSpec& spec = s.spec;
    if (!closed_form_eligible(spec.bulk, spec.surface)) return std::nullopt;
    const CubeGrid& g = spec.grid;
    const double scale = *spec.surface.norm_scale;
    const double vol = g.volume();
    const int d = g.target_dim, N = g.space_dim;

    switch (spec.kind) {
        case CellProblemKind::Bulk: {
            if (N != 1) return std::nullopt;  // boundary trace pinning is exact only on the line
            if (g.cells_per_side < 2) return std::nullopt;
            // frozen W is x-independent by construction
            const Mat& a = spec.boundary_matrix;
            const Mat& b = spec.mean_gradient;
            double value = vol * s.w.evaluator(g.center, b) + scale * (a - b).norm() * vol;

            State st;
            st.values.assign(g.cell_count(), Vec(d, 0.0));
            st.grads.assign(g.cell_count(), b);
            Vec jump_vec = (g.side * (a - b)).col(0);
            int jump_facet = g.cells_per_side / 2;  // jump sits between cells jump_facet-1, jump_facet
            for (int c = 0; c < g.cell_count(); ++c) {
                Vec base = b.apply(g.cell_center(c) - g.center);
                double shift = c < jump_facet ? -0.5 : 0.5;
                st.values[c] = base + shift * jump_vec;
            }
            enforce_dependents(s, st);
            return make_exact(s, st, value, value);
        }
        case CellProblemKind::Surface: {
            double area = std::pow(g.side, N - 1);
            double value = scale * norm(s.jump_delta) * area;
            State st = canonical_start(s);  // datum extension: zero gradients, mid-plane jump
            return make_exact(s, st, value, value);
        }
        case CellProblemKind::Dirichlet: {
            if (spec.bulk.x_dependent || spec.surface.x_dependent) return std::nullopt;
            DatumInfo info = classify_datum(*spec.boundary_field);
            State st = canonical_start(s);  // identity competitor with U_i = B_i
            st.values = spec.boundary_field->values;
            st.grads = spec.boundary_field->gradients;
            if (info.affine) {
                double value;
                if (s.u_levels == 1)
                    value = vol * relaxed_bulk_closed_form(s.w, s.psi, g.center, info.xi,
                                                           spec.means[0]);
                else
                    value = vol * relaxed_bulk2_closed_form(s.w, s.psi, g.center, info.xi,
                                                            spec.means[0], spec.means[1]);
                return make_exact(s, st, value, value);
            }
            if (info.two_sided) {
                for (const auto& m : spec.means)
                    if (m.norm() != 0.0) return std::nullopt;
                Mat zero(d, N);
                double value = vol * s.w.evaluator(g.center, zero) +
                               scale * norm(info.delta) * std::pow(g.side, N - 1);
                return make_exact(s, st, value, value);
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace sdr::detail
