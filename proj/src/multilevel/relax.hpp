#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "approx/approx.hpp"
#include "cell/spec.hpp"

namespace sdr {

// Bracketed estimate of a relaxed three-level energy. The upper end is the
// energy of an explicit admissible double-indexed family evaluated at a
// stabilized tail; the lower end is certified from convexity/coercivity and
// the growth constants. The reported value is the upper estimate.
struct RelaxationEstimate {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int budget_used = 0;
    std::string method;  // "direct" | "iterated"
    std::uint64_t seed = 0;
    std::string problem_id;  // hash of (deformation, densities); compare() checks it
    std::vector<std::pair<std::string, double>> family_values;  // per family tail energies
    std::string note;

    std::string to_json() const;
};

// Direct estimate: minimize the original energy over a library of admissible
// double-indexed families converging to (g, G1, G2).
RelaxationEstimate relax_direct(const MultiLevelDeformation& ml, const BulkDensity& w,
                                const SurfaceDensity& psi, int budget, std::uint64_t seed);

// Iterated estimate: first-stage relaxed densities (closed form when
// eligible, tabulated interpolation otherwise), then families for the pair
// (g, G1) with the constant second-stage field G2.
RelaxationEstimate relax_iterated(const MultiLevelDeformation& ml, const BulkDensity& w,
                                  const SurfaceDensity& psi, int budget, std::uint64_t seed);

struct ComparisonVerdict {
    bool pass = false;
    double gap = 0.0;  // distance between the raw brackets when disjoint
    double tol = 0.0;
    std::string to_json() const;
};

// Bracket-overlap test (never a point equality): pass iff the brackets
// intersect after tol inflation.
ComparisonVerdict compare(const RelaxationEstimate& a, const RelaxationEstimate& b, double tol);

// Identity hash so compare() can reject estimates of different problems.
std::string relaxation_problem_id(const MultiLevelDeformation& ml, const BulkDensity& w,
                                  const SurfaceDensity& psi);

// First-stage relaxed bulk density tabulated on an (a, b) lattice with
// bilinear interpolation (supported for d = N = 1; the closed form covers
// the eligible cases without tabulation). The uncertainty reported is the
// observed lattice modulus times the spacing, folded into bracket widths.
class DensityTable {
  public:
    DensityTable(const BulkDensity& w, const SurfaceDensity& psi, double p, double range,
                 int points_per_side, std::uint64_t seed);

    double bulk(double a, double b) const;
    double surf(double lam) const;
    double uncertainty() const { return uncertainty_; }
    double spacing() const { return spacing_; }
    // sampled growth screen on the tabulated values: coercivity-type bound
    // below the bulk table, linear bounds around the interfacial table
    bool growth_verified() const { return growth_verified_; }

  private:
    double range_;
    double spacing_;
    int points_;
    std::vector<double> bulk_values_;  // (points x points), a-major
    std::vector<double> surf_values_;
    double uncertainty_ = 0.0;
    bool growth_verified_ = false;
};

}  // namespace sdr
