#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "density/density.hpp"
#include "json.hpp"
#include "sbv/field.hpp"
#include "sbv/grid.hpp"

namespace sdr {

enum class CellProblemKind { Bulk, Surface, Dirichlet };

std::string kind_name(CellProblemKind k);
CellProblemKind kind_from_name(const std::string& s);

struct SolveBudget {
    int iterations = 60;  // descent sweeps per restart
    int restarts = 4;
};

// One constrained minimization instance.
//
// kind = Bulk     relaxed bulk density: boundary trace u = A(x - center) on
//                 the cube boundary, mean gradient constraint
//                 (1/vol) int grad u = B.
// kind = Surface  relaxed interfacial density: boundary trace equals the
//                 two-sided datum (lambda above the mid-plane, theta below,
//                 after translation normalization only the difference
//                 matters). p > 1 constrains gradients to zero; p = 1 adds
//                 the recession bulk term and a zero-mean gradient
//                 constraint.
// kind = Dirichlet  the Dirichlet-type functional of the global method:
//                 v = boundary_field on a collar of cells around the cube
//                 boundary, auxiliary per-cell matrix fields U_i with
//                 prescribed integral means; the objective is the relaxed
//                 pair estimator built from (W, psi).
struct CellProblemSpec {
    CellProblemKind kind = CellProblemKind::Bulk;
    BulkDensity bulk;
    SurfaceDensity surface;
    double p = 2.0;

    Mat boundary_matrix;  // A (bulk)
    Mat mean_gradient;    // B (bulk)

    Vec jump_lambda;  // lambda (surface)
    Vec jump_theta;   // theta (surface)

    std::optional<SbvField> boundary_field;  // g (dirichlet)
    std::vector<Mat> means;                  // mean values of U_i over O: (B) or (B1,B2)

    CubeGrid grid;
    int collar_width = 1;  // dirichlet collar, in cells
    SolveBudget budget;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    std::vector<double> recession_ladder;  // p = 1; default ladder when empty
    bool force_general_path = false;       // diagnostics: skip the exact path

    // delta_1(p): the p = 1 surface branch is active
    bool recession_branch() const { return p == 1.0; }
};

// Discrete growth sandwich around a solve value, with the constant derived
// from (c_W, C_W, c_psi, C_psi, W(x0,A0), |A0|, p, N):
//   load/C - vol/c_W  <=  value  <=  C (vol + load),
// where load = sum_i ||G_i||-terms + |Dg|(O) for the solve's data.
struct GrowthSandwich {
    double constant = 0.0;
    double load = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool ok = false;
};

struct SolveDiagnostics {
    int iterations = 0;
    int restarts_used = 0;
    bool certified = false;       // value provably equals the discrete minimum
    std::string certificate;      // "exact-path", "jensen-subadditive", ""
    bool budget_exhausted = false;
    double lower_bound = 0.0;     // certified lower bound when available
    double gap = 0.0;             // value - lower_bound (0 when exact)
    double recession_spread = 0.0;  // ladder spread folded into the p=1 gap
};

struct SolveResult {
    double value = 0.0;
    SbvField minimizer;
    std::vector<std::vector<Mat>> aux_fields;  // U_i per level (dirichlet)
    SolveDiagnostics diagnostics;
    std::vector<std::pair<int, double>> refinement_history;  // (n, value)
    GrowthSandwich sandwich;

    std::string to_json() const;
};

// JSON round trip for specs (densities are referenced by catalog name or DSL
// text plus declared constants).
std::string spec_to_json(const CellProblemSpec& spec);
CellProblemSpec spec_from_json(const std::string& json_text);

// Density (de)serialization shared with the run configs: either
// {"catalog": name} or {"formula": dsl, ...declared constants...}.
BulkDensity bulk_density_from_json(const nlohmann::json& j, int space_dim, int target_dim);
SurfaceDensity surface_density_from_json(const nlohmann::json& j, int space_dim, int target_dim);
nlohmann::json bulk_density_to_json(const BulkDensity& w);
nlohmann::json surface_density_to_json(const SurfaceDensity& psi);

}  // namespace sdr
