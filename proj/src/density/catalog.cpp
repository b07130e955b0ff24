#include "density/catalog.hpp"

#include "core/error.hpp"
#include "json.hpp"

namespace sdr {

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> v;
        CatalogEntry quad;
        quad.name = "quadratic";
        quad.kind = DensityKind::Bulk;
        quad.formula = "normsq(A)";
        quad.p = 2.0;
        quad.lipschitz = 2.0;
        quad.coercivity = 1.0;
        quad.convex = true;
        v.push_back(quad);

        CatalogEntry ppow;
        ppow.name = "p-power";
        ppow.kind = DensityKind::Bulk;
        ppow.formula = "norm(A)^3";
        ppow.p = 3.0;
        ppow.lipschitz = 3.0;
        ppow.coercivity = 1.0;
        ppow.convex = true;
        v.push_back(ppow);

        CatalogEntry plin;
        plin.name = "perturbed-linear";
        plin.kind = DensityKind::Bulk;
        plin.formula = "sqrt(1 + normsq(A))";
        plin.p = 1.0;
        plin.lipschitz = 1.0;
        plin.coercivity = 1.0;
        plin.convex = true;
        plin.has_recession_model = true;
        v.push_back(plin);

        CatalogEntry njump;
        njump.name = "norm-jump";
        njump.kind = DensityKind::Surface;
        njump.formula = "norm(lambda)";
        njump.lower = 1.0;
        njump.upper = 1.0;
        njump.norm_scale = 1.0;
        v.push_back(njump);

        CatalogEntry aniso;
        aniso.name = "anisotropic";
        aniso.kind = DensityKind::Surface;
        aniso.formula = "abs(dot(lambda, nu))";
        aniso.lower = 1.0;  // declared, fails (psi2) lower by construction
        aniso.upper = 1.0;
        v.push_back(aniso);

        CatalogEntry scaled;
        scaled.name = "scaled-jump";
        scaled.kind = DensityKind::Surface;
        scaled.formula = "2 * norm(lambda)";
        scaled.lower = 2.0;
        scaled.upper = 2.0;
        scaled.norm_scale = 2.0;
        v.push_back(scaled);
        return v;
    }();
    return entries;
}

bool catalog_has(const std::string& name) {
    for (const auto& e : catalog_entries())
        if (e.name == name) return true;
    return false;
}

const CatalogEntry& catalog_entry(const std::string& name) {
    for (const auto& e : catalog_entries())
        if (e.name == name) return e;
    throw Error(ErrorKind::Argument, "unknown catalog density '" + name + "'");
}

BulkDensity catalog_bulk(const std::string& name, int space_dim, int target_dim) {
    const CatalogEntry& e = catalog_entry(name);
    if (e.kind != DensityKind::Bulk)
        throw Error(ErrorKind::Argument, "catalog density '" + name + "' is not a bulk density");
    BulkDensity w = parse_bulk_density(e.formula, space_dim, target_dim);
    w.name = e.name;
    w.p = e.p;
    w.lipschitz_const = e.lipschitz;
    w.coercivity_const = e.coercivity;
    w.convex = e.convex;
    if (e.has_recession_model) {
        w.recession_error = RecessionErrorModel{1.0, 1.0, 0.5};
        w.recession_closed_form = [](const Vec&, const Mat& a) { return a.norm(); };
    }
    return w;
}

SurfaceDensity catalog_surface(const std::string& name, int space_dim, int target_dim) {
    const CatalogEntry& e = catalog_entry(name);
    if (e.kind != DensityKind::Surface)
        throw Error(ErrorKind::Argument, "catalog density '" + name + "' is not a surface density");
    SurfaceDensity psi = parse_surface_density(e.formula, space_dim, target_dim);
    psi.name = e.name;
    psi.lower_const = e.lower;
    psi.upper_const = e.upper;
    if (e.norm_scale > 0.0) psi.norm_scale = e.norm_scale;
    // all catalog interfacial densities are x-independent; the zero modulus
    // is their tightest valid (psi5) declaration
    psi.declared_modulus = [](double) { return 0.0; };
    return psi;
}

std::string catalog_json() {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : catalog_entries()) {
        nlohmann::json j;
        j["name"] = e.name;
        j["kind"] = e.kind == DensityKind::Bulk ? "bulk" : "surface";
        j["formula"] = e.formula;
        if (e.kind == DensityKind::Bulk) {
            j["p"] = e.p;
            j["lipschitz"] = e.lipschitz;
            j["coercivity"] = e.coercivity;
            j["convex"] = e.convex;
        } else {
            j["lower"] = e.lower;
            j["upper"] = e.upper;
        }
        out.push_back(j);
    }
    return out.dump(2);
}

}  // namespace sdr
