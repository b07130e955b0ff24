#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/linalg.hpp"
#include "density/expr.hpp"

namespace sdr {

// Modulus of continuity omega: [0,inf) -> [0,inf), nondecreasing, omega(0+)=0.
using Modulus = std::function<double(double)>;

// Parameters of the p=1 recession error model: the distance between the
// recession value and W(x,tA)/t on unit directions is at most C/t^alpha for
// t > L, with 0 < alpha < 1.
struct RecessionErrorModel {
    double C = 1.0;
    double L = 1.0;
    double alpha = 0.5;
};

// Bulk energy density W(x,A), energy per unit volume, with its declared
// growth/continuity constants. Immutable after construction; evaluators must
// be pure.
struct BulkDensity {
    std::function<double(const Vec&, const Mat&)> evaluator;
    int space_dim = 1;    // N
    int target_dim = 1;   // d
    double p = 2.0;       // growth exponent, >= 1
    double lipschitz_const = 1.0;  // C_W in the p-Lipschitz bound
    double coercivity_const = 1.0; // c_W in  c_W |A|^p - 1/c_W <= W
    Mat reference_matrix;          // A_0 with W(.,A_0) bounded
    Modulus declared_modulus;      // optional; empty when undeclared
    std::function<double(const Vec&, const Mat&)> recession_closed_form;  // optional
    std::optional<RecessionErrorModel> recession_error;                   // optional
    bool convex = false;           // declared; enables the exact solver path
    bool x_dependent = false;
    std::string formula;           // DSL text when built from the parser/catalog
    std::string name;              // catalog name, empty for ad hoc densities
};

// Interfacial energy density psi(x, lambda, nu), energy per unit area.
struct SurfaceDensity {
    std::function<double(const Vec&, const Vec&, const Vec&)> evaluator;
    int space_dim = 1;
    int target_dim = 1;
    double lower_const = 1.0;  // c_psi
    double upper_const = 1.0;  // C_psi
    Modulus declared_modulus;
    // Set when psi(x,lambda,nu) = scale * |lambda|; enables the exact path.
    std::optional<double> norm_scale;
    bool x_dependent = false;
    std::string formula;
    std::string name;
};

// W(x,A). Checks shapes and finiteness, then defers to the evaluator.
double eval_bulk(const BulkDensity& w, const Vec& x, const Mat& a);

// psi(x,lambda,nu). Requires |nu| = 1 within 1e-12.
double eval_surface(const SurfaceDensity& psi, const Vec& x, const Vec& lambda, const Vec& nu);

struct RecessionEstimate {
    double value = 0.0;   // largest ratio W(x,tA)/t over the ladder tail
    double spread = 0.0;  // max - min over the tail; error proxy
    bool exact = false;   // closed form was available
    double certified_bound = 0.0;  // C/t^alpha at the tail start, 0 when no model declared
};

// Estimates the recession value lim sup_t W(x,tA)/t along a geometric ladder.
// |a| must be 1 up to 1e-9 (callers normalize first). Throws when the ladder
// is shorter than 3 entries or the ratios diverge.
RecessionEstimate recession_estimate(const BulkDensity& w, const Vec& x, const Mat& a,
                                     const std::vector<double>& ladder);

// Default ladder used by the p=1 solver branch when none is configured.
std::vector<double> default_recession_ladder();

// 1-homogeneous extension: |M| * recession(direction M/|M|); 0 at M = 0.
double recession_value(const BulkDensity& w, const Vec& x, const Mat& m,
                       const std::vector<double>& ladder);

// --- density adapters -------------------------------------------------------

// Density with the spatial argument frozen at a point (cell problems evaluate
// W(x0, .) inside the unit cell).
BulkDensity freeze_x(const BulkDensity& w, const Vec& x0);
SurfaceDensity freeze_x(const SurfaceDensity& psi, const Vec& x0);

// Conjugation by the rotation taking e1 to nu: the solver always works on an
// axis-aligned grid and rotates the densities instead of the geometry.
// rot is the N x N matrix with columns (nu, nu_perp).
BulkDensity rotate(const BulkDensity& w, const Mat& rot, const Vec& center);
SurfaceDensity rotate(const SurfaceDensity& psi, const Mat& rot, const Vec& center);

// Rotation with first column nu (N = 1 or 2).
Mat frame_rotation(const Vec& nu);

// --- DSL wrappers ------------------------------------------------------------

enum class DensityKind { Bulk, Surface };

// Parses DSL text and wraps it as a density evaluator. Bulk expressions may
// reference x and A; surface expressions x, lambda and nu. Declared constants
// keep their defaults and can be adjusted by the caller afterwards.
BulkDensity parse_bulk_density(const std::string& text, int space_dim, int target_dim);
SurfaceDensity parse_surface_density(const std::string& text, int space_dim, int target_dim);

}  // namespace sdr
