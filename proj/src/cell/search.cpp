#include <algorithm>
#include <cmath>

#include "cell/detail.hpp"
#include "cell/solve.hpp"
#include "core/rng.hpp"

namespace sdr::detail {

namespace {

// scale used for perturbation amplitudes and line-search brackets; built
// from the problem data only (never from current values, so value-translated
// problems search translated iterates and land on translated minimizers)
double data_scale(const CellSetup& s) {
    double sc = 1.0;
    const CellProblemSpec& spec = s.spec;
    if (spec.kind == CellProblemKind::Bulk) {
        sc = std::max(sc, spec.boundary_matrix.norm());
        sc = std::max(sc, spec.mean_gradient.norm());
    } else if (spec.kind == CellProblemKind::Surface) {
        sc = std::max(sc, norm(s.jump_delta));
    } else {
        for (const auto& m : spec.means) sc = std::max(sc, m.norm());
        for (const auto& gm : spec.boundary_field->gradients) sc = std::max(sc, gm.norm());
    }
    return sc;
}

struct LocalEval {
    const CellSetup& s;
    const CubeGrid& g;
    std::vector<std::vector<int>> cell_facets;  // facet indices touching each cell
    std::vector<CubeGrid::Facet> facets;

    explicit LocalEval(const CellSetup& setup)
        : s(setup), g(setup.spec.grid), facets(g.interior_facets()) {
        cell_facets.assign(g.cell_count(), {});
        for (std::size_t fi = 0; fi < facets.size(); ++fi) {
            cell_facets[facets[fi].lower_cell].push_back(static_cast<int>(fi));
            cell_facets[facets[fi].upper_cell].push_back(static_cast<int>(fi));
        }
    }

    double bulk_term(const State& st, int c) const {
        const double vol = g.cell_volume();
        if (s.dirichlet) {
            Vec x = g.cell_center(c);
            return vol * (s.u_levels == 1
                              ? relaxed_bulk_closed_form(s.w, s.psi, x, st.grads[c], st.aux[0][c])
                              : relaxed_bulk2_closed_form(s.w, s.psi, x, st.grads[c], st.aux[0][c],
                                                          st.aux[1][c]));
        }
        if (!s.has_bulk_term) return 0.0;
        return vol * s.w.evaluator(g.cell_center(c), st.grads[c]);
    }

    double facet_term(const State& st, int fi) const {
        const auto& f = facets[fi];
        Vec mid = g.cell_center(f.lower_cell);
        mid[f.dir] += g.cell_width() / 2.0;
        Vec jump(g.target_dim);
        bool nonzero = false;
        for (int i = 0; i < g.target_dim; ++i) {
            double lo = st.values[f.lower_cell][i], hi = st.values[f.upper_cell][i];
            for (int j = 0; j < g.space_dim; ++j) {
                lo += st.grads[f.lower_cell].at(i, j) * (mid[j] - g.cell_center(f.lower_cell)[j]);
                hi += st.grads[f.upper_cell].at(i, j) * (mid[j] - g.cell_center(f.upper_cell)[j]);
            }
            jump[i] = hi - lo;
            nonzero = nonzero || jump[i] != 0.0;
        }
        if (!nonzero) return 0.0;
        Vec nu(g.space_dim, 0.0);
        nu[f.dir] = 1.0;
        return g.facet_area() * s.psi.evaluator(mid, jump, nu);
    }

    // objective restricted to a set of cells: their bulk terms + touching facets
    double local(const State& st, const std::vector<int>& cells) const {
        double acc = 0.0;
        std::vector<int> seen;
        for (int c : cells) {
            acc += bulk_term(st, c);
            for (int fi : cell_facets[c])
                if (std::find(seen.begin(), seen.end(), fi) == seen.end()) {
                    seen.push_back(fi);
                    acc += facet_term(st, fi);
                }
        }
        return acc;
    }
};

// refresh an EdgeTrace cell's dependent value after a gradient change
void refresh_dependent(const CellSetup& s, State& st, int c) {
    const CellCon& con = s.cons[c];
    if (con.kind != ConKind::EdgeTrace) return;
    const CubeGrid& g = s.spec.grid;
    Vec v = con.edge_value;
    for (int i = 0; i < g.target_dim; ++i)
        v[i] -= con.edge_sign * g.cell_width() / 2.0 * st.grads[c].at(i, con.edge_dir);
    st.values[c] = v;
}

// one full pass of neighbor-matching value moves; returns total improvement
double value_sweep(const CellSetup& s, const LocalEval& ev, State& st) {
    const CubeGrid& g = s.spec.grid;
    double improved = 0.0;
    for (int c = 0; c < g.cell_count(); ++c) {
        if (s.cons[c].kind != ConKind::Free) continue;
        double before = ev.local(st, {c});
        Vec best_v = st.values[c];
        double best = before;
        for (int fi : ev.cell_facets[c]) {
            const auto& f = ev.facets[fi];
            int nb = f.lower_cell == c ? f.upper_cell : f.lower_cell;
            Vec mid = g.cell_center(f.lower_cell);
            mid[f.dir] += g.cell_width() / 2.0;
            // value making the jump across this facet vanish
            Vec target(g.target_dim);
            for (int i = 0; i < g.target_dim; ++i) {
                double nb_tr = st.values[nb][i];
                double self_off = 0.0;
                for (int j = 0; j < g.space_dim; ++j) {
                    nb_tr += st.grads[nb].at(i, j) * (mid[j] - g.cell_center(nb)[j]);
                    self_off += st.grads[c].at(i, j) * (mid[j] - g.cell_center(c)[j]);
                }
                target[i] = nb_tr - self_off;
            }
            Vec saved = st.values[c];
            st.values[c] = target;
            double cand = ev.local(st, {c});
            if (cand < best) {
                best = cand;
                best_v = target;
            }
            st.values[c] = saved;
        }
        if (best < before) {
            st.values[c] = best_v;
            improved += before - best;
        }
    }
    return improved;
}

// paired line search on one free component of two cells' gradients (or aux
// matrices); volumes are uniform so pairing preserves the mean exactly
double paired_component_move(const CellSetup& s, const LocalEval& ev, State& st, int c1, int c2,
                             int level, int i, int j, double bracket) {
    auto get = [&](int c) -> double {
        return level < 0 ? st.grads[c].at(i, j) : st.aux[level][c].at(i, j);
    };
    auto set = [&](int c, double v) {
        if (level < 0) {
            st.grads[c].at(i, j) = v;
            refresh_dependent(s, st, c);
        } else {
            st.aux[level][c].at(i, j) = v;
        }
    };
    const double g1 = get(c1), g2 = get(c2);
    std::vector<int> cells = {c1, c2};
    double base = ev.local(st, cells);
    auto eval_at = [&](double t) {
        set(c1, g1 + t);
        set(c2, g2 - t);
        return ev.local(st, cells);
    };
    // coarse probe, then ternary refinement around the best point
    double best_t = 0.0, best = base;
    for (int k = -4; k <= 4; ++k) {
        if (k == 0) continue;
        double t = bracket * k / 4.0;
        double v = eval_at(t);
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    double lo = best_t - bracket / 4.0, hi = best_t + bracket / 4.0;
    for (int it = 0; it < 50; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (eval_at(m1) <= eval_at(m2))
            hi = m2;
        else
            lo = m1;
    }
    double t_ref = (lo + hi) / 2.0;
    double v_ref = eval_at(t_ref);
    if (v_ref < best) {
        best = v_ref;
        best_t = t_ref;
    }
    if (best < base) {
        eval_at(best_t);
        return base - best;
    }
    eval_at(0.0);
    return 0.0;
}

bool component_free(const CellSetup& s, int c, int j) {
    const CellCon& con = s.cons[c];
    return con.kind != ConKind::Pinned && con.col_free[j] && !s.grads_frozen_zero;
}

double gradient_sweep(const CellSetup& s, const LocalEval& ev, State& st, SplitMix& rng,
                      double bracket) {
    const CubeGrid& g = s.spec.grid;
    double improved = 0.0;
    const int d = g.target_dim, N = g.space_dim;
    for (const auto& f : g.interior_facets()) {
        int c1 = f.lower_cell, c2 = f.upper_cell;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < N; ++j)
                if (component_free(s, c1, j) && component_free(s, c2, j))
                    improved += paired_component_move(s, ev, st, c1, c2, -1, i, j, bracket);
    }
    // a few seeded long-range pairs break up local plateaus
    int extras = std::min(g.cell_count(), 8);
    for (int k = 0; k < extras; ++k) {
        int c1 = static_cast<int>(rng.next_below(g.cell_count()));
        int c2 = static_cast<int>(rng.next_below(g.cell_count()));
        if (c1 == c2) continue;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < N; ++j)
                if (component_free(s, c1, j) && component_free(s, c2, j))
                    improved += paired_component_move(s, ev, st, c1, c2, -1, i, j, bracket);
    }
    return improved;
}

double aux_sweep(const CellSetup& s, const LocalEval& ev, State& st, double bracket) {
    if (s.u_levels == 0) return 0.0;
    const CubeGrid& g = s.spec.grid;
    double improved = 0.0;
    const int d = g.target_dim, N = g.space_dim;
    for (int lvl = 0; lvl < s.u_levels; ++lvl)
        for (int c1 = 0; c1 + 1 < g.cell_count(); ++c1) {
            int c2 = c1 + 1;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < N; ++j)
                    improved += paired_component_move(s, ev, st, c1, c2, lvl, i, j, bracket);
        }
    return improved;
}

void perturb(const CellSetup& s, State& st, SplitMix& rng, double amp) {
    const CubeGrid& g = s.spec.grid;
    const int d = g.target_dim, N = g.space_dim;
    // additive block offset: translate one side of a random facet plane
    if (g.cells_per_side >= 2) {
        int dir = N == 2 ? static_cast<int>(rng.next_below(2)) : 0;
        int plane = 1 + static_cast<int>(rng.next_below(g.cells_per_side - 1));
        Vec offset(d);
        for (int i = 0; i < d; ++i) offset[i] = rng.next_in(-amp, amp);
        for (int c = 0; c < g.cell_count(); ++c) {
            if (s.cons[c].kind != ConKind::Free) continue;
            int i0, i1;
            g.cell_coords(c, i0, i1);
            int coord = dir == 0 ? i0 : i1;
            if (coord >= plane) st.values[c] = st.values[c] + offset;
        }
    }
    for (int c = 0; c < g.cell_count(); ++c) {
        if (s.cons[c].kind == ConKind::Free)
            for (int i = 0; i < d; ++i) st.values[c][i] += rng.next_in(-amp, amp) * 0.25;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < N; ++j) {
                if (component_free(s, c, j)) st.grads[c].at(i, j) += rng.next_in(-amp, amp);
                for (int lvl = 0; lvl < s.u_levels; ++lvl)
                    st.aux[lvl][c].at(i, j) += rng.next_in(-amp, amp);
            }
    }
    project_means(s, st);
}

}  // namespace

State run_search(const CellSetup& s, const State& start, SolveDiagnostics& diag) {
    LocalEval ev(s);
    const double sc = data_scale(s);
    const double bracket = 2.0 * sc;
    const SolveBudget& budget = s.spec.budget;

    State best = start;
    double best_obj = objective(s, best);
    std::string best_key;

    for (int r = 0; r < std::max(1, budget.restarts); ++r) {
        SplitMix rng(mix_seed(s.spec.seed, static_cast<std::uint64_t>(r)));
        State st = start;
        if (r > 0) perturb(s, st, rng, sc * (0.2 + 0.8 * r / budget.restarts));
        double obj = objective(s, st);
        int sweep = 0;
        for (; sweep < budget.iterations; ++sweep) {
            double gain = value_sweep(s, ev, st);
            gain += gradient_sweep(s, ev, st, rng, bracket);
            gain += aux_sweep(s, ev, st, bracket);
            double fresh = objective(s, st);
            obj = fresh;
            if (gain <= 1e-13 * std::max(1.0, std::fabs(obj))) break;
        }
        diag.iterations += sweep;
        if (sweep == budget.iterations) diag.budget_exhausted = true;
        ++diag.restarts_used;

        if (obj < best_obj) {
            best = st;
            best_obj = obj;
            best_key.clear();
        } else if (obj == best_obj) {
            // deterministic tie-break: lexicographically smallest serialization
            if (best_key.empty()) best_key = field_to_json(state_field(s, best));
            std::string key = field_to_json(state_field(s, st));
            if (key < best_key) {
                best = st;
                best_key = key;
            }
        }
    }
    return best;
}

}  // namespace sdr::detail
