#pragma once

#include <string>
#include <vector>

#include "density/density.hpp"

namespace sdr {

// Built-in densities. Formulas are DSL text; the listed constants are the
// declared hypothesis constants used by the validators and solvers.
struct CatalogEntry {
    std::string name;
    DensityKind kind;
    std::string formula;
    double p = 2.0;            // bulk only
    double lipschitz = 1.0;    // bulk C_W
    double coercivity = 1.0;   // bulk c_W
    bool convex = false;       // bulk
    bool has_recession_model = false;
    double lower = 1.0;        // surface c_psi
    double upper = 1.0;        // surface C_psi
    double norm_scale = 0.0;   // surface: psi = s*|lambda| when s > 0
};

const std::vector<CatalogEntry>& catalog_entries();

bool catalog_has(const std::string& name);
const CatalogEntry& catalog_entry(const std::string& name);

BulkDensity catalog_bulk(const std::string& name, int space_dim, int target_dim);
SurfaceDensity catalog_surface(const std::string& name, int space_dim, int target_dim);

// Listing of names, formulas and declared constants, for the CLI.
std::string catalog_json();

}  // namespace sdr
