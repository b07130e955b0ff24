#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "density/density.hpp"

namespace sdr {

enum class Verdict { Pass, Fail, Skipped };

std::string verdict_name(Verdict v);

// One row of a validation report. excess is the worst sampled value of
// lhs - rhs for the hypothesis inequality lhs <= rhs, relative to
// max(1,|rhs|); a fail carries the inputs achieving it.
struct HypothesisResult {
    std::string id;
    Verdict verdict = Verdict::Skipped;
    double worst_excess = 0.0;
    std::string witness;
};

struct ValidationReport {
    std::vector<HypothesisResult> results;
    long samples = 0;
    std::uint64_t seed = 0;
    double tolerance = 0.0;

    bool all_passed() const;
    const HypothesisResult* find(const std::string& id) const;
    std::string to_json() const;
};

// Sampled inputs live in these boxes. Hypotheses are universally quantified;
// a pass means "no violation found on the sample", never a proof.
struct SampleBox {
    double x_halfwidth = 0.5;        // spatial box around the origin
    double matrix_halfwidth = 10.0;  // per-entry range for matrices / jumps
    double scaling_max = 3.0;        // t range for 1-homogeneity checks
};

// Checks nonnegativity/finiteness, (W1*) p-Lipschitz growth, (W4) boundedness
// at the reference matrix and (W5) coercivity; (W2) and (W3) only when the
// modulus / error model are declared.
ValidationReport validate_bulk(const BulkDensity& w, std::uint64_t seed, long n_samples,
                               double tolerance = 1e-9, const SampleBox& box = {});

// Checks nonnegativity plus (psi1) symmetry, (psi2) linear growth bounds,
// (psi3) positive 1-homogeneity, (psi4) sub-additivity and, when a modulus is
// declared, (psi5).
ValidationReport validate_surface(const SurfaceDensity& psi, std::uint64_t seed, long n_samples,
                                  double tolerance = 1e-9, const SampleBox& box = {});

}  // namespace sdr
