#pragma once

#include "cell/spec.hpp"

namespace sdr {

// Solves the cell problem. Dispatch: degenerate data short-circuit to the
// trivial competitor; the exact path handles N=1 (and gradient-free surface
// problems in N=2) for declared-convex W with psi = c|lambda|, certifying
// global optimality; everything else runs the seeded projected multi-start
// local search. The returned value always equals the energy of the returned
// admissible minimizer.
SolveResult solve_cell_problem(const CellProblemSpec& spec);

// Nested-grid refinement: solves at each n warm-starting from the previous
// minimizer, so values are non-increasing along the ladder. Each entry must
// divide the next. Returns the last solve with the full history attached.
SolveResult refine_ladder(const CellProblemSpec& spec, const std::vector<int>& n_ladder);

// Objective of the solve associated with a spec, evaluated on explicit
// fields. For bulk/surface kinds this is the (frozen-x) cell energy of v;
// for dirichlet it is the relaxed pair estimator on (v, U_1..U_L).
double objective_energy(const CellProblemSpec& spec, const SbvField& v,
                        const std::vector<std::vector<Mat>>& aux);

// Re-verifies admissibility of a field for the spec within tol (trace or
// collar equalities, mean constraints). Returns a message, empty when ok.
std::string check_admissible(const CellProblemSpec& spec, const SbvField& v,
                             const std::vector<std::vector<Mat>>& aux, double tol = 1e-10);

GrowthSandwich growth_sandwich(const CellProblemSpec& spec, double value);

// First-stage relaxed densities (the cell-formula values as functions of the
// data), closed form for declared-convex W with psi = c|lambda|:
//   bulk(x, A, B) = W(x,B) + c |A - B|        (single level)
//   bulk2(x, A, B1, B2) = W(x,B2) + c |B1 - B2| + c |A - B1|
//   surf(x, lam)  = c |lam|
// Used as the dirichlet objective and by the iterated relaxation. Returns
// false when the densities are not eligible for the closed form.
bool closed_form_eligible(const BulkDensity& w, const SurfaceDensity& psi);
double relaxed_bulk_closed_form(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x,
                                const Mat& a, const Mat& b);
double relaxed_bulk2_closed_form(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x,
                                 const Mat& a, const Mat& b1, const Mat& b2);

// Relaxed energy estimate of a deformation pair/tuple on the field's grid:
// sum of relaxed bulk density over cells + relaxed surface density over the
// jumps of g. Requires closed-form eligible densities.
double relaxed_pair_energy(const SbvField& g, const std::vector<std::vector<Mat>>& gs,
                           const BulkDensity& w, const SurfaceDensity& psi);

}  // namespace sdr
