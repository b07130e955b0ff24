#include "cell/solve.hpp"

#include <algorithm>
#include <cmath>

#include "cell/detail.hpp"
#include "core/error.hpp"

namespace sdr {

bool closed_form_eligible(const BulkDensity& w, const SurfaceDensity& psi) {
    return w.convex && psi.norm_scale.has_value();
}

double relaxed_bulk_closed_form(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x,
                                const Mat& a, const Mat& b) {
    return w.evaluator(x, b) + *psi.norm_scale * (a - b).norm();
}

double relaxed_bulk2_closed_form(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x,
                                 const Mat& a, const Mat& b1, const Mat& b2) {
    double c = *psi.norm_scale;
    return w.evaluator(x, b2) + c * (b1 - b2).norm() + c * (a - b1).norm();
}

double relaxed_pair_energy(const SbvField& g, const std::vector<std::vector<Mat>>& gs,
                           const BulkDensity& w, const SurfaceDensity& psi) {
    if (!closed_form_eligible(w, psi))
        throw Error(ErrorKind::Argument,
                    "relaxed_pair_energy: needs convex W with psi = c|lambda|");
    if (gs.empty() || gs.size() > 2)
        throw Error(ErrorKind::Argument, "relaxed_pair_energy: one or two micro fields expected");
    const CubeGrid& grid = g.grid;
    for (const auto& level : gs)
        if (static_cast<int>(level.size()) != grid.cell_count())
            throw Error(ErrorKind::Argument, "relaxed_pair_energy: micro field count mismatch");
    double acc = 0.0;
    const double vol = grid.cell_volume();
    for (int c = 0; c < grid.cell_count(); ++c) {
        Vec x = grid.cell_center(c);
        acc += vol * (gs.size() == 1
                          ? relaxed_bulk_closed_form(w, psi, x, g.gradients[c], gs[0][c])
                          : relaxed_bulk2_closed_form(w, psi, x, g.gradients[c], gs[0][c], gs[1][c]));
    }
    double scale = *psi.norm_scale;
    for (const auto& jmp : jumps(g)) acc += scale * norm(jmp.jump) * jmp.area;
    return acc;
}

namespace detail {

namespace {

// boundary sides touched by a cell: list of (dir, sign)
std::vector<std::pair<int, double>> boundary_sides(const CubeGrid& g, int cell) {
    int i0, i1;
    g.cell_coords(cell, i0, i1);
    std::vector<std::pair<int, double>> out;
    if (i0 == 0) out.push_back({0, -1.0});
    if (i0 == g.cells_per_side - 1) out.push_back({0, +1.0});
    if (g.space_dim == 2) {
        if (i1 == 0) out.push_back({1, -1.0});
        if (i1 == g.cells_per_side - 1) out.push_back({1, +1.0});
    }
    return out;
}

bool in_collar(const CubeGrid& g, int cell, int width) {
    int i0, i1;
    g.cell_coords(cell, i0, i1);
    int n = g.cells_per_side;
    int dist = std::min(i0, n - 1 - i0);
    if (g.space_dim == 2) dist = std::min(dist, std::min(i1, n - 1 - i1));
    return dist < width;
}

BulkDensity make_recession_density(const BulkDensity& w, const std::vector<double>& ladder) {
    BulkDensity inf = w;
    inf.p = 1.0;
    BulkDensity base = w;
    std::vector<double> lad = ladder;
    if (w.recession_closed_form) {
        auto rec = w.recession_closed_form;
        inf.evaluator = [rec](const Vec& x, const Mat& m) {
            double n = m.norm();
            if (n == 0.0) return 0.0;
            return n * rec(x, (1.0 / n) * m);
        };
    } else {
        inf.evaluator = [base, lad](const Vec& x, const Mat& m) {
            return recession_value(base, x, m, lad);
        };
    }
    return inf;
}

}  // namespace

CellSetup build_setup(const CellProblemSpec& raw) {
    CellSetup s;
    s.spec = raw;
    CellProblemSpec& spec = s.spec;
    const CubeGrid& g = spec.grid;
    const int N = g.space_dim, d = g.target_dim;

    if (spec.p < 1.0) throw Error(ErrorKind::Argument, "cell problem: p must be >= 1");
    if (spec.bulk.space_dim != N || spec.bulk.target_dim != d || spec.surface.space_dim != N ||
        spec.surface.target_dim != d)
        throw Error(ErrorKind::Dimension, "cell problem: density dimensions do not match the grid");
    if (spec.collar_width < 1) throw Error(ErrorKind::Argument, "cell problem: collar must be >= 1 cell");

    // rotate to the axis-aligned frame; densities are conjugated, bulk data
    // transformed by the frame matrix, target-space data untouched
    Vec e1(N, 0.0);
    e1[0] = 1.0;
    if (g.normal != e1) {
        Mat rot = frame_rotation(g.normal);
        spec.bulk = rotate(spec.bulk, rot, g.center);
        spec.surface = rotate(spec.surface, rot, g.center);
        if (spec.kind == CellProblemKind::Bulk) {
            spec.boundary_matrix = mat_mul(spec.boundary_matrix, rot);
            spec.mean_gradient = mat_mul(spec.mean_gradient, rot);
        }
        for (auto& m : spec.means) m = mat_mul(m, rot);
        spec.grid.normal = e1;
        // the boundary field lives on the working-frame grid; relabel its
        // orientation along with the spec grid
        if (spec.boundary_field && spec.boundary_field->grid.normal != e1)
            spec.boundary_field->grid.normal = e1;
    }

    s.ladder = spec.recession_ladder.empty() ? default_recession_ladder() : spec.recession_ladder;

    const int n_cells = g.cell_count();
    s.cons.assign(n_cells, CellCon{});

    switch (spec.kind) {
        case CellProblemKind::Bulk: {
            const Mat& a = spec.boundary_matrix;
            if (a.rows != d || a.cols != N || spec.mean_gradient.rows != d ||
                spec.mean_gradient.cols != N)
                throw Error(ErrorKind::Dimension, "bulk cell problem: matrix shape mismatch");
            s.w = freeze_x(spec.bulk, g.center);
            s.psi = freeze_x(spec.surface, g.center);
            s.has_grad_mean = true;
            s.grad_mean_target = g.volume() * spec.mean_gradient;
            for (int c = 0; c < n_cells; ++c) {
                auto sides = boundary_sides(g, c);
                CellCon& con = s.cons[c];
                if (sides.empty()) continue;
                Vec rel = g.cell_center(c) - g.center;
                if (sides.size() >= 2) {
                    con.kind = ConKind::Pinned;
                    con.pinned_value = a.apply(rel);
                    con.pinned_gradient = a;
                    continue;
                }
                con.kind = ConKind::EdgeTrace;
                con.edge_dir = sides[0].first;
                con.edge_sign = sides[0].second;
                Vec edge_rel = rel;
                edge_rel[con.edge_dir] += con.edge_sign * g.cell_width() / 2.0;
                con.edge_value = a.apply(edge_rel);
                con.pinned_gradient = a;
                if (N == 2) con.col_free[1 - con.edge_dir] = false;
            }
            break;
        }
        case CellProblemKind::Surface: {
            if (static_cast<int>(spec.jump_lambda.size()) != d ||
                static_cast<int>(spec.jump_theta.size()) != d)
                throw Error(ErrorKind::Dimension, "surface cell problem: datum dimension mismatch");
            // translation normalization: only lambda - theta matters
            s.jump_delta = spec.jump_lambda - spec.jump_theta;
            if (g.cells_per_side % 2 != 0)
                throw Error(ErrorKind::Argument,
                            "surface cell problem: even n required (interface on the skeleton)");
            s.w = freeze_x(spec.bulk, g.center);
            s.psi = freeze_x(spec.surface, g.center);
            const bool p1 = spec.recession_branch();
            s.has_bulk_term = p1;
            s.grads_frozen_zero = !p1;
            if (p1) {
                s.bulk_is_recession = true;
                // diagnostic ladder spread along the canonical direction
                Mat dir(d, N);
                double dn = norm(s.jump_delta);
                for (int i = 0; i < d; ++i) dir.at(i, 0) = dn > 0 ? s.jump_delta[i] / dn : (i == 0);
                try {
                    s.recession_spread = recession_estimate(s.w, g.center, dir, s.ladder).spread;
                } catch (const Error&) {
                    throw Error(ErrorKind::Numeric,
                                "surface cell problem (p=1): recession undefined for W");
                }
                s.w = make_recession_density(s.w, s.ladder);
                s.has_grad_mean = true;
                s.grad_mean_target = Mat(d, N);  // zero-mean gradients
            }
            for (int c = 0; c < n_cells; ++c) {
                auto sides = boundary_sides(g, c);
                if (sides.empty()) continue;
                CellCon& con = s.cons[c];
                double rel0 = g.cell_center(c)[0] - g.center[0];
                Vec side_value = rel0 > 0.0 ? s.jump_delta : Vec(d, 0.0);
                if (!p1 || sides.size() >= 2) {
                    con.kind = ConKind::Pinned;
                    con.pinned_value = side_value;
                    con.pinned_gradient = Mat(d, N);
                    continue;
                }
                con.kind = ConKind::EdgeTrace;
                con.edge_dir = sides[0].first;
                con.edge_sign = sides[0].second;
                con.edge_value = side_value;
                con.pinned_gradient = Mat(d, N);
                if (N == 2) con.col_free[1 - con.edge_dir] = false;
            }
            if (s.grads_frozen_zero)
                for (auto& con : s.cons) con.col_free = {false, false};
            break;
        }
        case CellProblemKind::Dirichlet: {
            if (!spec.boundary_field)
                throw Error(ErrorKind::Argument, "dirichlet problem: boundary field required");
            SbvField gfield = *spec.boundary_field;
            if (!(gfield.grid == g)) {
                if (!gfield.grid.same_geometry(g) ||
                    g.cells_per_side % gfield.grid.cells_per_side != 0)
                    throw Error(ErrorKind::Argument,
                                "dirichlet problem: boundary field grid is not aligned with O");
                gfield = resample_to(gfield, g.cells_per_side);
                spec.boundary_field = gfield;
            }
            if (spec.means.empty() || spec.means.size() > 2)
                throw Error(ErrorKind::Argument, "dirichlet problem: one or two mean targets expected");
            for (const auto& m : spec.means)
                if (m.rows != d || m.cols != N)
                    throw Error(ErrorKind::Dimension, "dirichlet problem: mean target shape mismatch");
            s.dirichlet = true;
            s.u_levels = static_cast<int>(spec.means.size());
            for (const auto& m : spec.means) s.u_mean_targets.push_back(g.volume() * m);
            s.w = spec.bulk;
            s.psi = spec.surface;
            s.closed_form = closed_form_eligible(spec.bulk, spec.surface);
            if (!s.closed_form)
                throw Error(ErrorKind::Argument,
                            "dirichlet problem: relaxed integrand needs convex W with psi = "
                            "c|lambda| (tabulated densities are handled by the multilevel module)");
            for (int c = 0; c < n_cells; ++c) {
                if (!in_collar(g, c, spec.collar_width)) continue;
                CellCon& con = s.cons[c];
                con.kind = ConKind::Pinned;
                con.pinned_value = gfield.values[c];
                con.pinned_gradient = gfield.gradients[c];
            }
            break;
        }
    }
    return s;
}

void enforce_dependents(const CellSetup& s, State& st) {
    const CubeGrid& g = s.spec.grid;
    const double half = g.cell_width() / 2.0;
    for (int c = 0; c < g.cell_count(); ++c) {
        const CellCon& con = s.cons[c];
        if (con.kind == ConKind::Pinned) {
            st.values[c] = con.pinned_value;
            st.grads[c] = con.pinned_gradient;
        } else if (con.kind == ConKind::EdgeTrace) {
            // tangential columns stay pinned
            if (g.space_dim == 2) {
                int t = 1 - con.edge_dir;
                if (!con.col_free[t])
                    st.grads[c].set_col(t, con.pinned_gradient.col(t));
            }
            Vec v = con.edge_value;
            for (int i = 0; i < g.target_dim; ++i)
                v[i] -= con.edge_sign * half * st.grads[c].at(i, con.edge_dir);
            st.values[c] = v;
        }
    }
}

void project_means(const CellSetup& s, State& st) {
    const CubeGrid& g = s.spec.grid;
    const double vol = g.cell_volume();
    const int d = g.target_dim, N = g.space_dim;
    // pin prescribed gradients before measuring the residual
    enforce_dependents(s, st);
    if (s.has_grad_mean) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < N; ++j) {
                double sum = 0.0;
                int free_cells = 0;
                for (int c = 0; c < g.cell_count(); ++c) {
                    sum += st.grads[c].at(i, j) * vol;
                    const CellCon& con = s.cons[c];
                    bool is_free = con.kind != ConKind::Pinned && con.col_free[j] &&
                                   !s.grads_frozen_zero;
                    if (is_free) ++free_cells;
                }
                double residual = s.grad_mean_target.at(i, j) - sum;
                if (free_cells == 0) {
                    if (std::fabs(residual) > 1e-12 * std::max(1.0, std::fabs(s.grad_mean_target.at(i, j))))
                        throw Error(ErrorKind::Numeric,
                                    "cell problem: infeasible mean-gradient constraint "
                                    "(no free gradient components)");
                    continue;
                }
                double corr = residual / (free_cells * vol);
                for (int c = 0; c < g.cell_count(); ++c) {
                    const CellCon& con = s.cons[c];
                    if (con.kind != ConKind::Pinned && con.col_free[j] && !s.grads_frozen_zero)
                        st.grads[c].at(i, j) += corr;
                }
            }
    }
    for (int lvl = 0; lvl < s.u_levels; ++lvl) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < N; ++j) {
                double sum = 0.0;
                for (int c = 0; c < g.cell_count(); ++c) sum += st.aux[lvl][c].at(i, j) * vol;
                double corr = (s.u_mean_targets[lvl].at(i, j) - sum) / (g.cell_count() * vol);
                for (int c = 0; c < g.cell_count(); ++c) st.aux[lvl][c].at(i, j) += corr;
            }
    }
    enforce_dependents(s, st);
}

State canonical_start(const CellSetup& s) {
    const CubeGrid& g = s.spec.grid;
    const int d = g.target_dim, N = g.space_dim;
    State st;
    st.values.assign(g.cell_count(), Vec(d, 0.0));
    st.grads.assign(g.cell_count(), Mat(d, N));
    st.aux.assign(s.u_levels, std::vector<Mat>(g.cell_count(), Mat(d, N)));

    switch (s.spec.kind) {
        case CellProblemKind::Bulk: {
            const Mat& b = s.spec.mean_gradient;
            for (int c = 0; c < g.cell_count(); ++c) {
                st.grads[c] = b;
                st.values[c] = b.apply(g.cell_center(c) - g.center);
            }
            break;
        }
        case CellProblemKind::Surface: {
            for (int c = 0; c < g.cell_count(); ++c) {
                double rel0 = g.cell_center(c)[0] - g.center[0];
                st.values[c] = rel0 > 0.0 ? s.jump_delta : Vec(d, 0.0);
            }
            break;
        }
        case CellProblemKind::Dirichlet: {
            const SbvField& gf = *s.spec.boundary_field;
            st.values = gf.values;
            st.grads = gf.gradients;
            for (int lvl = 0; lvl < s.u_levels; ++lvl)
                st.aux[lvl].assign(g.cell_count(), s.spec.means[static_cast<std::size_t>(lvl)]);
            break;
        }
    }
    project_means(s, st);
    return st;
}

Vec grid_center(const CubeGrid& g) { return g.center; }

SbvField state_field(const CellSetup& s, const State& st) {
    return make_field(s.spec.grid, st.values, st.grads);
}

double objective(const CellSetup& s, const State& st) {
    const CubeGrid& g = s.spec.grid;
    const double vol = g.cell_volume();
    double acc = 0.0;
    if (s.dirichlet) {
        for (int c = 0; c < g.cell_count(); ++c) {
            Vec x = g.cell_center(c);
            acc += vol * (s.u_levels == 1
                              ? relaxed_bulk_closed_form(s.w, s.psi, x, st.grads[c], st.aux[0][c])
                              : relaxed_bulk2_closed_form(s.w, s.psi, x, st.grads[c], st.aux[0][c],
                                                          st.aux[1][c]));
        }
    } else if (s.has_bulk_term) {
        for (int c = 0; c < g.cell_count(); ++c)
            acc += vol * s.w.evaluator(g.cell_center(c), st.grads[c]);
    }
    const double area = g.facet_area();
    const double half = g.cell_width() / 2.0;
    for (const auto& f : g.interior_facets()) {
        Vec mid = g.cell_center(f.lower_cell);
        mid[f.dir] += half;
        Vec jump(g.target_dim);
        bool nonzero = false;
        for (int i = 0; i < g.target_dim; ++i) {
            double lo = st.values[f.lower_cell][i];
            double hi = st.values[f.upper_cell][i];
            for (int j = 0; j < g.space_dim; ++j) {
                double rel_lo = mid[j] - g.cell_center(f.lower_cell)[j];
                double rel_hi = mid[j] - g.cell_center(f.upper_cell)[j];
                lo += st.grads[f.lower_cell].at(i, j) * rel_lo;
                hi += st.grads[f.upper_cell].at(i, j) * rel_hi;
            }
            jump[i] = hi - lo;
            nonzero = nonzero || jump[i] != 0.0;
        }
        if (!nonzero) continue;
        Vec nu(g.space_dim, 0.0);
        nu[f.dir] = 1.0;
        acc += area * s.psi.evaluator(mid, jump, nu);
    }
    return acc;
}

}  // namespace detail

double objective_energy(const CellProblemSpec& spec, const SbvField& v,
                        const std::vector<std::vector<Mat>>& aux) {
    detail::CellSetup s = detail::build_setup(spec);
    detail::State st{v.values, v.gradients, aux};
    return detail::objective(s, st);
}

std::string check_admissible(const CellProblemSpec& spec, const SbvField& v,
                             const std::vector<std::vector<Mat>>& aux, double tol) {
    detail::CellSetup s = detail::build_setup(spec);
    const CubeGrid& g = s.spec.grid;
    const double half = g.cell_width() / 2.0;
    for (int c = 0; c < g.cell_count(); ++c) {
        const detail::CellCon& con = s.cons[c];
        if (con.kind == detail::ConKind::Pinned) {
            if (norm(v.values[c] - con.pinned_value) > tol) return "pinned value violated";
            if ((v.gradients[c] - con.pinned_gradient).norm() > tol) return "pinned gradient violated";
        } else if (con.kind == detail::ConKind::EdgeTrace) {
            Vec want = con.edge_value;
            for (int i = 0; i < g.target_dim; ++i)
                want[i] -= con.edge_sign * half * v.gradients[c].at(i, con.edge_dir);
            if (norm(v.values[c] - want) > tol) return "boundary trace violated";
            if (g.space_dim == 2) {
                int t = 1 - con.edge_dir;
                if (!con.col_free[t]) {
                    Vec got = v.gradients[c].col(t);
                    Vec want_col = con.pinned_gradient.col(t);
                    if (norm(got - want_col) > tol) return "tangential trace gradient violated";
                }
            }
        }
        if (s.grads_frozen_zero && v.gradients[c].norm() > tol) return "gradient must vanish";
    }
    if (s.has_grad_mean) {
        Mat sum(g.target_dim, g.space_dim);
        for (int c = 0; c < g.cell_count(); ++c) sum += g.cell_volume() * v.gradients[c];
        if ((sum - s.grad_mean_target).norm() > tol * std::max(1.0, s.grad_mean_target.norm()))
            return "mean gradient constraint violated";
    }
    for (int lvl = 0; lvl < s.u_levels; ++lvl) {
        if (static_cast<int>(aux.size()) <= lvl) return "missing auxiliary field";
        Mat sum(g.target_dim, g.space_dim);
        for (int c = 0; c < g.cell_count(); ++c) sum += g.cell_volume() * aux[lvl][c];
        if ((sum - s.u_mean_targets[lvl]).norm() > tol * std::max(1.0, s.u_mean_targets[lvl].norm()))
            return "auxiliary mean constraint violated";
    }
    return "";
}

GrowthSandwich growth_sandwich(const CellProblemSpec& spec, double value) {
    const CubeGrid& g = spec.grid;
    const BulkDensity& w = spec.bulk;
    const SurfaceDensity& psi = spec.surface;
    const double vol = g.volume();
    double w0 = w.evaluator(g.center, w.reference_matrix);
    double a0 = w.reference_matrix.norm();
    double upper_density = w0 + 3.0 * w.lipschitz_const * std::pow(2.0, w.p) * std::pow(1.0 + a0, w.p);
    double c_min = std::min(w.coercivity_const, psi.lower_const);
    GrowthSandwich sw;
    sw.constant = std::max({2.0 / c_min, w.coercivity_const,
                            2.0 * (upper_density + psi.upper_const * 4.0 * g.space_dim)});
    double load = 0.0;
    switch (spec.kind) {
        case CellProblemKind::Bulk:
            load = std::pow(spec.mean_gradient.norm(), spec.p) * vol + spec.boundary_matrix.norm() * vol;
            break;
        case CellProblemKind::Surface: {
            Vec delta = spec.jump_lambda - spec.jump_theta;
            load = norm(delta) * std::pow(g.side, g.space_dim - 1);
            break;
        }
        case CellProblemKind::Dirichlet: {
            for (std::size_t i = 0; i < spec.means.size(); ++i) {
                double power = (spec.means.size() == 2 && i == 0) ? 1.0 : spec.p;
                load += std::pow(spec.means[i].norm(), power) * vol;
            }
            const SbvField& gf = *spec.boundary_field;
            for (int c = 0; c < gf.cell_count(); ++c)
                load += gf.gradients[c].norm() * gf.grid.cell_volume();
            load += jump_total_variation(gf);
            break;
        }
    }
    sw.load = load;
    sw.lower = load / sw.constant - vol / w.coercivity_const;
    sw.upper = sw.constant * (vol + load);
    sw.ok = sw.lower <= value && value <= sw.upper;
    return sw;
}

namespace {

SolveResult finish_result(const CellProblemSpec& spec, const detail::CellSetup& s,
                          const detail::State& st, SolveDiagnostics diag) {
    SolveResult res;
    res.minimizer = detail::state_field(s, st);
    res.aux_fields = st.aux;
    res.value = detail::objective(s, st);
    diag.recession_spread = s.recession_spread;
    if (s.bulk_is_recession) diag.gap += s.recession_spread;
    res.diagnostics = diag;
    res.refinement_history = {{spec.grid.cells_per_side, res.value}};
    res.sandwich = growth_sandwich(spec, res.value);

    std::string bad = check_admissible(spec, res.minimizer, res.aux_fields, 1e-10);
    if (!bad.empty())
        throw Error(ErrorKind::Numeric, "cell problem: minimizer failed admissibility: " + bad);
    return res;
}

// certified lower bound by Jensen + subadditivity for eligible densities
// (valid for any admissible field; equals the exact value in 1D)
double convex_lower_bound(const detail::CellSetup& s) {
    const CellProblemSpec& spec = s.spec;
    const CubeGrid& g = spec.grid;
    double scale = *spec.surface.norm_scale;
    double vol = g.volume();
    switch (spec.kind) {
        case CellProblemKind::Bulk: {
            double wb = s.w.evaluator(g.center, spec.mean_gradient);
            return vol * wb + scale * (spec.boundary_matrix - spec.mean_gradient).norm() * vol;
        }
        case CellProblemKind::Surface:
            return scale * norm(s.jump_delta) * std::pow(g.side, g.space_dim - 1);
        case CellProblemKind::Dirichlet: {
            const SbvField& gf = *spec.boundary_field;
            // affine datum: closed-form relaxed value at the mean data
            double acc = 0.0;
            Mat mean_grad(g.target_dim, g.space_dim);
            for (int c = 0; c < gf.cell_count(); ++c) mean_grad += (1.0 / gf.cell_count()) * gf.gradients[c];
            if (spec.means.size() == 1)
                acc = vol * relaxed_bulk_closed_form(s.w, s.psi, g.center, mean_grad, spec.means[0]);
            else
                acc = vol * relaxed_bulk2_closed_form(s.w, s.psi, g.center, mean_grad, spec.means[0],
                                                      spec.means[1]);
            acc += scale * jump_total_variation(gf);
            return acc;
        }
    }
    return 0.0;
}

}  // namespace

SolveResult solve_cell_problem(const CellProblemSpec& raw_spec) {
    detail::CellSetup s = detail::build_setup(raw_spec);
    const CellProblemSpec& spec = s.spec;

    // degenerate data short-circuit to the trivial competitor
    bool degenerate = false;
    if (spec.kind == CellProblemKind::Surface && norm(s.jump_delta) == 0.0) degenerate = true;
    if (spec.kind == CellProblemKind::Bulk && spec.boundary_matrix == spec.mean_gradient)
        degenerate = true;
    if (degenerate) {
        detail::State st = detail::canonical_start(s);
        SolveDiagnostics diag;
        diag.certificate = "degenerate-trivial";
        diag.certified = closed_form_eligible(spec.bulk, spec.surface);
        SolveResult res = finish_result(spec, s, st, diag);
        if (diag.certified) res.diagnostics.lower_bound = res.value;
        return res;
    }

    if (!spec.force_general_path) {
        if (auto exact = detail::try_exact(s)) {
            SolveResult res = std::move(*exact);
            res.refinement_history = {{spec.grid.cells_per_side, res.value}};
            res.sandwich = growth_sandwich(spec, res.value);
            std::string bad = check_admissible(spec, res.minimizer, res.aux_fields, 1e-10);
            if (!bad.empty())
                throw Error(ErrorKind::Numeric, "exact path: minimizer failed admissibility: " + bad);
            double recomputed = detail::objective(s, {res.minimizer.values, res.minimizer.gradients,
                                                      res.aux_fields});
            if (std::fabs(recomputed - res.value) > 1e-10 * std::max(1.0, std::fabs(res.value)))
                throw Error(ErrorKind::Numeric, "exact path: value does not match minimizer energy");
            return res;
        }
    }

    detail::State start = detail::canonical_start(s);
    SolveDiagnostics diag;
    detail::State best = detail::run_search(s, start, diag);
    if (closed_form_eligible(spec.bulk, spec.surface)) {
        diag.lower_bound = convex_lower_bound(s);
        double val = detail::objective(s, best);
        diag.gap = val - diag.lower_bound;
        if (std::fabs(diag.gap) <= 1e-9 * std::max(1.0, std::fabs(val))) {
            diag.certified = true;
            diag.certificate = "jensen-subadditive";
        }
    }
    return finish_result(spec, s, best, diag);
}

SolveResult refine_ladder(const CellProblemSpec& spec, const std::vector<int>& n_ladder) {
    if (n_ladder.size() < 1) throw Error(ErrorKind::Argument, "refine_ladder: empty ladder");
    for (std::size_t i = 0; i + 1 < n_ladder.size(); ++i) {
        if (n_ladder[i + 1] <= n_ladder[i] || n_ladder[i + 1] % n_ladder[i] != 0)
            throw Error(ErrorKind::Argument,
                        "refine_ladder: entries must be strictly increasing and nested "
                        "(each divides the next)");
    }
    std::vector<std::pair<int, double>> history;
    SolveResult last;
    std::optional<SbvField> warm;
    for (int n : n_ladder) {
        CellProblemSpec sp = spec;
        sp.grid.cells_per_side = n;
        if (sp.kind == CellProblemKind::Dirichlet && sp.boundary_field) {
            // re-express the datum on the current grid
            sp.boundary_field = resample_to(*sp.boundary_field, n);
        }
        detail::CellSetup s = detail::build_setup(sp);
        SolveResult res;
        if (!sp.force_general_path) {
            if (auto exact = detail::try_exact(s)) {
                res = std::move(*exact);
                res.sandwich = growth_sandwich(sp, res.value);
            }
        }
        if (res.minimizer.values.empty()) {
            detail::State start = detail::canonical_start(s);
            SolveDiagnostics diag;
            detail::State warm_state;
            bool have_warm = false;
            if (warm && n % warm->grid.cells_per_side == 0) {
                SbvField wf = resample_to(*warm, n);
                warm_state = detail::State{wf.values, wf.gradients, start.aux};
                detail::project_means(s, warm_state);
                have_warm = true;
            }
            detail::State best = detail::run_search(s, start, diag);
            if (have_warm) {
                SolveDiagnostics diag2;
                detail::State best2 = detail::run_search(s, warm_state, diag2);
                if (detail::objective(s, best2) < detail::objective(s, best)) best = best2;
                diag.iterations += diag2.iterations;
            }
            res = finish_result(sp, s, best, diag);
        }
        history.push_back({n, res.value});
        warm = res.minimizer;
        last = std::move(res);
    }
    last.refinement_history = history;
    return last;
}

}  // namespace sdr
