#pragma once

#include <array>
#include <optional>

#include "cell/spec.hpp"

namespace sdr::detail {

// Per-cell admissibility structure after discretizing the boundary
// condition.
//
//  Free       no constraint.
//  EdgeTrace  the cell has one boundary facet; the trace of the affine map
//             on it must equal the datum there. The datum is affine along
//             the facet, so tangential gradient columns are pinned and the
//             value is a function of the free normal column:
//               v = edge_value - edge_sign * (w/2) * M e_dir.
//  Pinned     value and gradient fully prescribed (corner cells under trace
//             conditions, collar cells of dirichlet problems).
enum class ConKind { Free, EdgeTrace, Pinned };

struct CellCon {
    ConKind kind = ConKind::Free;
    int edge_dir = 0;
    double edge_sign = 1.0;
    Vec edge_value;      // datum at the boundary facet midpoint
    Vec pinned_value;
    Mat pinned_gradient;  // full matrix for Pinned; pinned tangential columns for EdgeTrace
    std::array<bool, 2> col_free{true, true};
};

// Normalized, frozen, constraint-annotated problem the solver paths share.
struct CellSetup {
    CellProblemSpec spec;     // axis-aligned frame, theta normalized away
    BulkDensity w;            // effective bulk density (frozen x for cell kinds)
    SurfaceDensity psi;       // effective surface density
    bool has_bulk_term = true;      // false for surface p > 1
    bool bulk_is_recession = false; // surface p = 1 uses W-infinity
    bool grads_frozen_zero = false; // surface p > 1
    bool dirichlet = false;
    bool closed_form = false;  // relaxed integrand in closed form (dirichlet)
    int u_levels = 0;
    std::vector<Mat> u_mean_targets;  // target integrals: B_i * vol
    bool has_grad_mean = false;
    Mat grad_mean_target;             // target integral of grad v
    std::vector<CellCon> cons;
    Vec jump_delta;                   // lambda - theta after normalization
    double recession_spread = 0.0;    // ladder spread of the p=1 recession term
    std::vector<double> ladder;

    double cell_volume() const { return spec.grid.cell_volume(); }
};

// Validates the spec, rotates to the axis-aligned frame, freezes x for cell
// kinds, normalizes the surface datum and builds the constraint table.
CellSetup build_setup(const CellProblemSpec& spec);

struct State {
    std::vector<Vec> values;
    std::vector<Mat> grads;
    std::vector<std::vector<Mat>> aux;  // U fields
};

// Recomputes EdgeTrace-dependent values from the gradients.
void enforce_dependents(const CellSetup& s, State& st);

// Projects gradients (and aux fields) onto the mean constraints by spreading
// the residual uniformly over free components. Throws when a constrained
// component has no free cells and the pinned part alone misses the target.
void project_means(const CellSetup& s, State& st);

// Canonical feasible competitor (start 0 of the search): the natural
// admissible field built from the data.
State canonical_start(const CellSetup& s);

SbvField state_field(const CellSetup& s, const State& st);

double objective(const CellSetup& s, const State& st);

// General path: seeded projected multi-start descent. Returns best state.
State run_search(const CellSetup& s, const State& start, SolveDiagnostics& diag);

// Exact path when eligible (convex W, psi = c|.|, supported geometry).
std::optional<SolveResult> try_exact(const CellSetup& s);

}  // namespace sdr::detail
