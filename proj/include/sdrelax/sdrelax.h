/* sdrelax - relaxed energies of structured deformations on discrete SBV
 * fields: cell-problem solvers, blow-up density estimates, determining
 * sequences and batch runs.
 *
 * C interface of the shared library. All functions return sdx_status;
 * sdx_last_error() describes the most recent failure on the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * sdx_free_string(). Handles are opaque and released with their _free
 * function. Calls are thread-safe for distinct handles; handles themselves
 * are immutable after creation.
 */

#ifndef SDRELAX_H
#define SDRELAX_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdx_status {
    SDX_OK = 0,
    SDX_ERR_ARGUMENT = 1,  /* invalid parameter or inconsistent data */
    SDX_ERR_PARSE = 2,     /* DSL / JSON / config syntax */
    SDX_ERR_DIMENSION = 3, /* shape mismatch */
    SDX_ERR_NUMERIC = 4,   /* non-finite data, infeasible or failed solve */
    SDX_ERR_IO = 5,        /* file system */
    SDX_ERR_INTERNAL = 6
} sdx_status;

typedef struct sdx_density sdx_density; /* bulk or interfacial energy density */
typedef struct sdx_field sdx_field;     /* piecewise-affine field on a cube grid */

const char *sdx_version(void);
const char *sdx_last_error(void);
void sdx_free_string(char *s);

/* Catalog of built-in densities: names, DSL formulas, declared constants. */
sdx_status sdx_catalog_json(char **json_out);

/* Create a density from spec JSON:
 *   {"kind":"bulk","catalog":"quadratic"}
 *   {"kind":"surface","formula":"2 * norm(lambda)","lower":2,"upper":2}
 * space_dim is N (1 or 2), target_dim is d (>= 1). */
sdx_status sdx_density_create(const char *spec_json, int space_dim, int target_dim,
                              sdx_density **out);
void sdx_density_free(sdx_density *density);

/* W(x, A); the matrix is row-major d x N. */
sdx_status sdx_density_eval_bulk(const sdx_density *density, const double *x,
                                 const double *matrix, double *value_out);

/* psi(x, lambda, nu); nu must be unit length. */
sdx_status sdx_density_eval_surface(const sdx_density *density, const double *x,
                                    const double *lambda, const double *nu, double *value_out);

/* Recession value lim sup_t W(x, tA)/t along a geometric ladder; the
 * direction matrix must have unit Frobenius norm. spread_out may be NULL. */
sdx_status sdx_density_recession(const sdx_density *density, const double *x,
                                 const double *direction, const double *ladder, int ladder_len,
                                 double *value_out, double *spread_out);

/* Seeded hypothesis screen; returns the verdict report as JSON. */
sdx_status sdx_density_validate(const sdx_density *density, unsigned long long seed,
                                long n_samples, char **report_json_out);

/* Fields serialize as JSON with a grid header and flat cell arrays. */
sdx_status sdx_field_parse(const char *json, sdx_field **out);
sdx_status sdx_field_dump(const sdx_field *field, char **json_out);
void sdx_field_free(sdx_field *field);

sdx_status sdx_field_energy(const sdx_field *field, const sdx_density *bulk,
                            const sdx_density *surface, double *value_out);
sdx_status sdx_field_l1_distance(const sdx_field *a, const sdx_field *b, double *value_out);

/* Solve one cell problem from spec JSON (see the format documentation);
 * returns the result (value, diagnostics, minimizer field) as JSON. */
sdx_status sdx_solve(const char *spec_json, char **result_json_out);

/* Execute a run config file, writing CSV/JSON/manifest artifacts under
 * out_dir (NULL uses $SDRELAX_OUT, then "./out"). expected_command, when
 * non-NULL, must match the config's command. seed_override < 0 keeps the
 * config seed. manifest_json_out may be NULL. */
sdx_status sdx_run_config(const char *config_path, const char *expected_command,
                          const char *out_dir, long long seed_override,
                          char **manifest_json_out);

#ifdef __cplusplus
}
#endif

#endif /* SDRELAX_H */
