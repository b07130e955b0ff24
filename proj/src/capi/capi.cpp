#include "sdrelax/sdrelax.h"

#include <cstring>
#include <string>

#include "cell/solve.hpp"
#include "core/error.hpp"
#include "density/catalog.hpp"
#include "density/validate.hpp"
#include "json.hpp"
#include "run/run.hpp"
#include "sbv/field.hpp"

namespace {

thread_local std::string g_last_error;

sdx_status status_of(const sdr::Error& e) {
    switch (e.kind()) {
        case sdr::ErrorKind::Argument: return SDX_ERR_ARGUMENT;
        case sdr::ErrorKind::Parse: return SDX_ERR_PARSE;
        case sdr::ErrorKind::Dimension: return SDX_ERR_DIMENSION;
        case sdr::ErrorKind::Numeric: return SDX_ERR_NUMERIC;
        case sdr::ErrorKind::Io: return SDX_ERR_IO;
    }
    return SDX_ERR_INTERNAL;
}

template <typename F>
sdx_status guarded(F&& f) {
    try {
        f();
        return SDX_OK;
    } catch (const sdr::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SDX_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SDX_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

sdx_status require(bool cond, const char* msg) {
    if (cond) return SDX_OK;
    g_last_error = msg;
    return SDX_ERR_ARGUMENT;
}

}  // namespace

struct sdx_density {
    bool is_bulk = true;
    sdr::BulkDensity bulk;
    sdr::SurfaceDensity surface;
};

struct sdx_field {
    sdr::SbvField field;
};

extern "C" {

const char* sdx_version(void) {
    static const std::string v = sdr::library_version();
    return v.c_str();
}

const char* sdx_last_error(void) { return g_last_error.c_str(); }

void sdx_free_string(char* s) { delete[] s; }

sdx_status sdx_catalog_json(char** json_out) {
    if (require(json_out != nullptr, "json_out is null")) return SDX_ERR_ARGUMENT;
    return guarded([&] { *json_out = dup_string(sdr::catalog_json()); });
}

sdx_status sdx_density_create(const char* spec_json, int space_dim, int target_dim,
                              sdx_density** out) {
    if (require(spec_json && out, "null argument")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spec_json);
        } catch (const nlohmann::json::exception& e) {
            throw sdr::Error(sdr::ErrorKind::Parse, std::string("density spec: ") + e.what());
        }
        auto holder = new sdx_density;
        try {
            std::string kind = j.value("kind", std::string("bulk"));
            if (kind == "bulk") {
                holder->is_bulk = true;
                holder->bulk = sdr::bulk_density_from_json(j, space_dim, target_dim);
            } else if (kind == "surface") {
                holder->is_bulk = false;
                holder->surface = sdr::surface_density_from_json(j, space_dim, target_dim);
            } else {
                throw sdr::Error(sdr::ErrorKind::Parse, "density spec: kind must be bulk or surface");
            }
        } catch (...) {
            delete holder;
            throw;
        }
        *out = holder;
    });
}

void sdx_density_free(sdx_density* density) { delete density; }

sdx_status sdx_density_eval_bulk(const sdx_density* density, const double* x, const double* matrix,
                                 double* value_out) {
    if (require(density && x && matrix && value_out, "null argument")) return SDX_ERR_ARGUMENT;
    if (require(density->is_bulk, "density is not a bulk density")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        const auto& w = density->bulk;
        sdr::Vec xv(x, x + w.space_dim);
        sdr::Mat a(w.target_dim, w.space_dim);
        std::memcpy(a.a.data(), matrix, a.a.size() * sizeof(double));
        *value_out = sdr::eval_bulk(w, xv, a);
    });
}

sdx_status sdx_density_eval_surface(const sdx_density* density, const double* x,
                                    const double* lambda, const double* nu, double* value_out) {
    if (require(density && x && lambda && nu && value_out, "null argument")) return SDX_ERR_ARGUMENT;
    if (require(!density->is_bulk, "density is not a surface density")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        const auto& psi = density->surface;
        sdr::Vec xv(x, x + psi.space_dim);
        sdr::Vec lam(lambda, lambda + psi.target_dim);
        sdr::Vec nv(nu, nu + psi.space_dim);
        *value_out = sdr::eval_surface(psi, xv, lam, nv);
    });
}

sdx_status sdx_density_recession(const sdx_density* density, const double* x,
                                 const double* direction, const double* ladder, int ladder_len,
                                 double* value_out, double* spread_out) {
    if (require(density && x && direction && ladder && value_out, "null argument"))
        return SDX_ERR_ARGUMENT;
    if (require(density->is_bulk, "density is not a bulk density")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        const auto& w = density->bulk;
        sdr::Vec xv(x, x + w.space_dim);
        sdr::Mat a(w.target_dim, w.space_dim);
        std::memcpy(a.a.data(), direction, a.a.size() * sizeof(double));
        std::vector<double> lad(ladder, ladder + ladder_len);
        sdr::RecessionEstimate est = sdr::recession_estimate(w, xv, a, lad);
        *value_out = est.value;
        if (spread_out) *spread_out = est.spread;
    });
}

sdx_status sdx_density_validate(const sdx_density* density, unsigned long long seed,
                                long n_samples, char** report_json_out) {
    if (require(density && report_json_out, "null argument")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        sdr::ValidationReport rep = density->is_bulk
                                        ? sdr::validate_bulk(density->bulk, seed, n_samples)
                                        : sdr::validate_surface(density->surface, seed, n_samples);
        *report_json_out = dup_string(rep.to_json());
    });
}

sdx_status sdx_field_parse(const char* json, sdx_field** out) {
    if (require(json && out, "null argument")) return SDX_ERR_ARGUMENT;
    return guarded([&] { *out = new sdx_field{sdr::field_from_json(json)}; });
}

sdx_status sdx_field_dump(const sdx_field* field, char** json_out) {
    if (require(field && json_out, "null argument")) return SDX_ERR_ARGUMENT;
    return guarded([&] { *json_out = dup_string(sdr::field_to_json(field->field)); });
}

void sdx_field_free(sdx_field* field) { delete field; }

sdx_status sdx_field_energy(const sdx_field* field, const sdx_density* bulk,
                            const sdx_density* surface, double* value_out) {
    if (require(field && bulk && surface && value_out, "null argument")) return SDX_ERR_ARGUMENT;
    if (require(bulk->is_bulk && !surface->is_bulk, "density kinds mismatched"))
        return SDX_ERR_ARGUMENT;
    return guarded([&] { *value_out = sdr::energy(field->field, bulk->bulk, surface->surface); });
}

sdx_status sdx_field_l1_distance(const sdx_field* a, const sdx_field* b, double* value_out) {
    if (require(a && b && value_out, "null argument")) return SDX_ERR_ARGUMENT;
    return guarded([&] { *value_out = sdr::l1_distance(a->field, b->field); });
}

sdx_status sdx_solve(const char* spec_json, char** result_json_out) {
    if (require(spec_json && result_json_out, "null argument")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        sdr::CellProblemSpec spec = sdr::spec_from_json(spec_json);
        sdr::SolveResult res = sdr::solve_cell_problem(spec);
        *result_json_out = dup_string(res.to_json());
    });
}

sdx_status sdx_run_config(const char* config_path, const char* expected_command,
                          const char* out_dir, long long seed_override,
                          char** manifest_json_out) {
    if (require(config_path != nullptr, "config_path is null")) return SDX_ERR_ARGUMENT;
    return guarded([&] {
        sdr::RunOutcome outcome =
            sdr::run_config_file(config_path, expected_command ? expected_command : "",
                                 out_dir ? out_dir : "", seed_override);
        if (manifest_json_out) *manifest_json_out = dup_string(outcome.manifest_json);
    });
}

}  // extern "C"
