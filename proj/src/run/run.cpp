#include "run/run.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>

#include "cell/blowup.hpp"
#include "cell/solve.hpp"
#include "core/error.hpp"
#include "core/textio.hpp"
#include "density/catalog.hpp"
#include "density/validate.hpp"
#include "json.hpp"
#include "multilevel/relax.hpp"

namespace sdr {

std::string library_version() { return "sdrelax 0.1.0"; }

namespace {

using nlohmann::json;

Mat mat_from(const json& j, int rows, int cols, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw Error(ErrorKind::Parse, what + ": expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
            throw Error(ErrorKind::Parse, what + ": expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) m.at(i, c) = j[i][c].get<double>();
    }
    return m;
}

CubeGrid grid_from(const json& j) {
    int N = j.at("N").get<int>();
    Vec center = j.contains("center") ? j.at("center").get<Vec>() : Vec(N, 0.0);
    Vec nu;
    if (j.contains("nu")) {
        nu = j.at("nu").get<Vec>();
    } else {
        nu = Vec(N, 0.0);
        nu[0] = 1.0;
    }
    return make_grid(N, j.at("d").get<int>(), j.at("n").get<int>(), std::move(center),
                     j.value("side", 1.0), std::move(nu));
}

// CSV text with deterministic formatting
class Csv {
  public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) text_ += ",";
            text_ += header[i];
        }
        text_ += "\n";
    }
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) throw Error(ErrorKind::Argument, "csv: column count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ",";
            text_ += cells[i];
        }
        text_ += "\n";
    }
    const std::string& text() const { return text_; }

  private:
    std::size_t cols_;
    std::string text_;
};

std::string fd(double v) { return format_double(v); }

struct RunContext {
    json config;
    std::string config_hash;
    std::string command;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    std::string prefix;
    json results;  // full JSON output
    Csv csv{{"config_hash", "command", "kind", "n", "eps", "seed", "value"}};

    RunContext(json cfg, Csv csv_template) : config(std::move(cfg)), csv(std::move(csv_template)) {}

    std::vector<std::string> base_cells(const std::string& kind, int n, double eps, double value) const {
        return {config_hash, command, kind, std::to_string(n), fd(eps), std::to_string(seed), fd(value)};
    }
};

SolveBudget budget_from(const json& problem) {
    SolveBudget b;
    if (problem.contains("budget")) {
        b.iterations = problem.at("budget").value("iterations", b.iterations);
        b.restarts = problem.at("budget").value("restarts", b.restarts);
    }
    return b;
}

void append_solve_row(RunContext& ctx, const std::string& kind, int n, double eps,
                      const SolveResult& res) {
    auto cells = ctx.base_cells(kind, n, eps, res.value);
    cells.push_back(fd(res.diagnostics.lower_bound));
    cells.push_back(fd(res.diagnostics.gap));
    cells.push_back(res.diagnostics.certified ? "1" : "0");
    ctx.csv.row(cells);
}

void run_cell_command(RunContext& ctx, CellProblemKind kind) {
    const json& problem = ctx.config.at("problem");
    CellProblemSpec spec;
    spec.kind = kind;
    spec.grid = grid_from(problem);
    const int N = spec.grid.space_dim, d = spec.grid.target_dim;
    spec.bulk = bulk_density_from_json(ctx.config.at("bulk"), N, d);
    spec.surface = surface_density_from_json(ctx.config.at("surface"), N, d);
    spec.p = problem.value("p", 2.0);
    spec.collar_width = problem.value("collar", 1);
    spec.budget = budget_from(problem);
    spec.seed = ctx.seed;
    spec.tolerance = ctx.tolerance;
    spec.force_general_path = problem.value("force_general_path", false);
    switch (kind) {
        case CellProblemKind::Bulk:
            spec.boundary_matrix = mat_from(problem.at("A"), d, N, "A");
            spec.mean_gradient = mat_from(problem.at("B"), d, N, "B");
            break;
        case CellProblemKind::Surface:
            spec.jump_lambda = problem.at("lambda").get<Vec>();
            spec.jump_theta = problem.contains("theta") ? problem.at("theta").get<Vec>() : Vec(d, 0.0);
            break;
        case CellProblemKind::Dirichlet: {
            if (problem.contains("boundary_field")) {
                spec.boundary_field = field_from_json(problem.at("boundary_field").dump());
            } else if (problem.contains("affine")) {
                Mat a = mat_from(problem.at("affine").at("matrix"), d, N, "affine.matrix");
                Vec off = problem.at("affine").contains("offset")
                              ? problem.at("affine").at("offset").get<Vec>()
                              : Vec(d, 0.0);
                spec.boundary_field = affine_field(spec.grid, a, off);
            } else if (problem.contains("jump")) {
                Vec lam = problem.at("jump").at("lambda").get<Vec>();
                Vec th = problem.at("jump").contains("theta") ? problem.at("jump").at("theta").get<Vec>()
                                                              : Vec(d, 0.0);
                spec.boundary_field = jump_datum_field(spec.grid, lam, th);
            } else {
                throw Error(ErrorKind::Parse, "dirichlet: boundary_field, affine or jump required");
            }
            for (const auto& m : problem.at("means")) spec.means.push_back(mat_from(m, d, N, "means"));
            break;
        }
    }

    json solves = json::array();
    if (problem.contains("n_ladder")) {
        std::vector<int> ladder = problem.at("n_ladder").get<std::vector<int>>();
        SolveResult res = refine_ladder(spec, ladder);
        for (const auto& [n, value] : res.refinement_history) {
            SolveResult row_res = res;  // history rows share diagnostics of the final solve
            row_res.value = value;
            append_solve_row(ctx, kind_name(kind), n, spec.grid.side, row_res);
        }
        solves.push_back(json::parse(res.to_json()));
    } else {
        SolveResult res = solve_cell_problem(spec);
        append_solve_row(ctx, kind_name(kind), spec.grid.cells_per_side, spec.grid.side, res);
        solves.push_back(json::parse(res.to_json()));
    }
    ctx.results["solves"] = std::move(solves);
}

void run_blowup(RunContext& ctx) {
    const json& problem = ctx.config.at("problem");
    std::string mode = problem.at("mode").get<std::string>();
    int N = problem.at("N").get<int>();
    int d = problem.at("d").get<int>();
    BulkDensity w = bulk_density_from_json(ctx.config.at("bulk"), N, d);
    SurfaceDensity psi = surface_density_from_json(ctx.config.at("surface"), N, d);
    BlowupParams params;
    params.cells_per_side = problem.value("n", 8);
    params.collar_width = problem.value("collar", 1);
    params.seed = ctx.seed;
    params.p = problem.value("p", 2.0);
    params.tolerance = ctx.tolerance;
    params.force_general_path = problem.value("force_general_path", false);
    if (const char* env = std::getenv("SDRELAX_WORKERS"))
        params.workers = std::max(1, std::atoi(env));
    Domain omega;
    omega.center = problem.contains("omega") ? problem.at("omega").at("center").get<Vec>() : Vec(N, 0.0);
    omega.side = problem.contains("omega") ? problem.at("omega").at("side").get<double>() : 8.0;
    std::vector<double> eps_ladder = problem.at("eps_ladder").get<std::vector<double>>();
    Vec x0 = problem.contains("x0") ? problem.at("x0").get<Vec>() : Vec(N, 0.0);

    BlowupResult blow;
    if (mode == "bulk") {
        Vec a = problem.contains("a") ? problem.at("a").get<Vec>() : Vec(d, 0.0);
        Mat xi = mat_from(problem.at("xi"), d, N, "xi");
        std::vector<Mat> means;
        for (const auto& m : problem.at("means")) means.push_back(mat_from(m, d, N, "means"));
        blow = blowup_bulk(w, psi, x0, a, xi, means, eps_ladder, omega, params);
    } else if (mode == "surface") {
        Vec lam = problem.at("lambda").get<Vec>();
        Vec th = problem.contains("theta") ? problem.at("theta").get<Vec>() : Vec(d, 0.0);
        Vec nu;
        if (problem.contains("nu")) {
            nu = problem.at("nu").get<Vec>();
        } else {
            nu = Vec(N, 0.0);
            nu[0] = 1.0;
        }
        blow = blowup_surface(w, psi, x0, lam, th, nu, problem.value("levels", 1), eps_ladder, omega,
                              params);
    } else {
        throw Error(ErrorKind::Parse, "blowup: mode must be 'bulk' or 'surface'");
    }

    json rows = json::array();
    for (std::size_t i = 0; i < blow.epsilons.size(); ++i) {
        auto cells = ctx.base_cells("blowup-" + mode, params.cells_per_side, blow.epsilons[i],
                                    blow.values[i]);
        cells.push_back(fd(blow.ratios[i]));
        cells.push_back(fd(blow.estimate));
        ctx.csv.row(cells);
        rows.push_back({{"eps", blow.epsilons[i]}, {"value", blow.values[i]}, {"ratio", blow.ratios[i]}});
    }
    ctx.results["blowup"] = {{"mode", mode}, {"estimate", blow.estimate}, {"ladder", rows}};
}

SbvField field_from_problem(const json& problem, const CubeGrid& grid) {
    if (problem.contains("g_field")) return field_from_json(problem.at("g_field").dump());
    if (problem.contains("g_affine")) {
        Mat a = mat_from(problem.at("g_affine").at("matrix"), grid.target_dim, grid.space_dim,
                         "g_affine.matrix");
        Vec off = problem.at("g_affine").contains("offset")
                      ? problem.at("g_affine").at("offset").get<Vec>()
                      : Vec(grid.target_dim, 0.0);
        return affine_field(grid, a, off);
    }
    if (problem.contains("g_jump")) {
        Vec lam = problem.at("g_jump").at("lambda").get<Vec>();
        Vec th = problem.at("g_jump").contains("theta") ? problem.at("g_jump").at("theta").get<Vec>()
                                                        : Vec(grid.target_dim, 0.0);
        return jump_datum_field(grid, lam, th);
    }
    throw Error(ErrorKind::Parse, "expected g_field, g_affine or g_jump");
}

std::vector<Mat> constant_cells(const CubeGrid& grid, const Mat& m) {
    return std::vector<Mat>(grid.cell_count(), m);
}

void run_approx(RunContext& ctx) {
    const json& problem = ctx.config.at("problem");
    CubeGrid grid = grid_from(problem);
    const int N = grid.space_dim, d = grid.target_dim;
    SbvField g = field_from_problem(problem, grid);
    std::vector<int> ladder = problem.at("index_ladder").get<std::vector<int>>();
    int levels = problem.value("levels", 1);
    if (levels == 1) {
        Mat G = mat_from(problem.at("G"), d, N, "G");
        StructuredDeformation sd = make_structured(g, constant_cells(grid, G), problem.value("p", 2.0));
        json rows = json::array();
        for (int n : ladder) {
            SbvField u = build_determining_sequence(sd, n);
            SbvField g_on = resample_to(g, u.grid.cells_per_side);
            double err = l1_distance(u, g_on);
            auto cells = ctx.base_cells("approx-l1", n, grid.side, err);
            cells.push_back("-");
            ctx.csv.row(cells);
            rows.push_back({{"n", n}, {"l1_error", err}});
        }
        ctx.results["approx"] = {{"levels", 1}, {"ladder", rows}};
        return;
    }
    Mat G1 = mat_from(problem.at("G1"), d, N, "G1");
    Mat G2 = mat_from(problem.at("G2"), d, N, "G2");
    IntegrabilityMode mode =
        problem.value("mode", std::string("HSD")) == "SD" ? IntegrabilityMode::SD : IntegrabilityMode::HSD;
    MultiLevelDeformation ml = make_multilevel(g, constant_cells(grid, G1), constant_cells(grid, G2),
                                               problem.value("p", 2.0), mode);
    bool swapped = problem.value("order", std::string("normal")) == "swapped";
    ConvergenceReport rep = verify_hsd_convergence(multilevel_family(ml), ml, ladder,
                                                   problem.value("clause_tol", 1e-8), swapped);
    for (const auto& clause : rep.clauses) {
        auto cells = ctx.base_cells("clause-" + clause.clause, ladder.back(), grid.side,
                                    clause.discrepancies.empty() ? 0.0 : clause.discrepancies.back());
        cells.push_back(verdict_name(clause.verdict));
        ctx.csv.row(cells);
    }
    ctx.results["approx"] = json::parse(rep.to_json());
}

void run_multilevel(RunContext& ctx) {
    const json& problem = ctx.config.at("problem");
    CubeGrid grid = grid_from(problem);
    const int N = grid.space_dim, d = grid.target_dim;
    BulkDensity w = bulk_density_from_json(ctx.config.at("bulk"), N, d);
    SurfaceDensity psi = surface_density_from_json(ctx.config.at("surface"), N, d);
    SbvField g = field_from_problem(problem, grid);
    Mat G1 = mat_from(problem.at("G1"), d, N, "G1");
    Mat G2 = mat_from(problem.at("G2"), d, N, "G2");
    MultiLevelDeformation ml = make_multilevel(g, constant_cells(grid, G1), constant_cells(grid, G2),
                                               problem.value("p", 2.0));
    int budget = problem.value("budget", 4);
    RelaxationEstimate direct = relax_direct(ml, w, psi, budget, ctx.seed);
    RelaxationEstimate iterated = relax_iterated(ml, w, psi, budget, ctx.seed);
    ComparisonVerdict verdict = compare(direct, iterated, problem.value("compare_tol", 5e-2));

    for (const auto* est : {&direct, &iterated}) {
        auto cells = ctx.base_cells(est->method, grid.cells_per_side, grid.side, est->value);
        cells.push_back(fd(est->lower));
        cells.push_back(fd(est->upper));
        cells.push_back(verdict.pass ? "1" : "0");
        ctx.csv.row(cells);
    }
    ctx.results["multilevel"] = {{"direct", json::parse(direct.to_json())},
                                 {"iterated", json::parse(iterated.to_json())},
                                 {"compare", json::parse(verdict.to_json())}};
}

void run_validate(RunContext& ctx) {
    const json& problem = ctx.config.at("problem");
    int N = problem.value("N", 1);
    int d = problem.value("d", 1);
    long n_samples = problem.value("n_samples", 10000L);
    std::string target = problem.at("target").get<std::string>();
    ValidationReport rep;
    std::string name;
    if (target == "bulk") {
        BulkDensity w = bulk_density_from_json(ctx.config.at("bulk"), N, d);
        rep = validate_bulk(w, ctx.seed, n_samples, problem.value("check_tol", 1e-9));
        name = w.name.empty() ? w.formula : w.name;
    } else if (target == "surface") {
        SurfaceDensity psi = surface_density_from_json(ctx.config.at("surface"), N, d);
        rep = validate_surface(psi, ctx.seed, n_samples, problem.value("check_tol", 1e-9));
        name = psi.name.empty() ? psi.formula : psi.name;
    } else {
        throw Error(ErrorKind::Parse, "validate: target must be 'bulk' or 'surface'");
    }
    for (const auto& r : rep.results) {
        auto cells = ctx.base_cells("hyp-" + r.id, static_cast<int>(n_samples), 0.0, r.worst_excess);
        cells.push_back(verdict_name(r.verdict));
        ctx.csv.row(cells);
    }
    ctx.results["validate"] = {{"density", name}, {"report", json::parse(rep.to_json())}};
}

Csv csv_for(const std::string& command) {
    std::vector<std::string> header = {"config_hash", "command", "kind", "n", "eps", "seed", "value"};
    if (command == "relax-bulk" || command == "relax-surface" || command == "dirichlet") {
        header.insert(header.end(), {"lower_bound", "gap", "certified"});
    } else if (command == "blowup") {
        header.insert(header.end(), {"ratio", "estimate"});
    } else if (command == "approx") {
        // levels-2 clause rows carry a verdict column; level-1 rows are plain
        header.insert(header.end(), {"verdict"});
    } else if (command == "multilevel") {
        header.insert(header.end(), {"lower", "upper", "compare_pass"});
    } else if (command == "validate") {
        header.insert(header.end(), {"verdict"});
    }
    return Csv(header);
}

}  // namespace

RunOutcome run_config_text(const std::string& config_text, const std::string& expected_command,
                           const std::string& out_dir_arg, long long seed_override) {
    json cfg;
    try {
        cfg = json::parse(config_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
    }

    std::string command;
    try {
        command = cfg.at("command").get<std::string>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::Parse, "config: missing 'command'");
    }
    if (!expected_command.empty() && expected_command != command)
        throw Error(ErrorKind::Parse, "config command '" + command + "' does not match requested '" +
                                          expected_command + "'");

    RunContext ctx(cfg, csv_for(command));
    ctx.command = command;
    ctx.seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                                  : cfg.value("seed", 0ULL);
    ctx.tolerance = cfg.value("tolerance", 1e-9);
    ctx.prefix = cfg.value("out_prefix", command);
    // the hash covers the effective configuration, seed override included
    json hashed = cfg;
    hashed["seed"] = ctx.seed;
    ctx.config_hash = fnv1a_hex(hashed.dump());

    try {
        if (command == "relax-bulk")
            run_cell_command(ctx, CellProblemKind::Bulk);
        else if (command == "relax-surface")
            run_cell_command(ctx, CellProblemKind::Surface);
        else if (command == "dirichlet")
            run_cell_command(ctx, CellProblemKind::Dirichlet);
        else if (command == "blowup")
            run_blowup(ctx);
        else if (command == "approx")
            run_approx(ctx);
        else if (command == "multilevel")
            run_multilevel(ctx);
        else if (command == "validate")
            run_validate(ctx);
        else
            throw Error(ErrorKind::Parse, "config: unknown command '" + command + "'");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
    }

    std::string out_dir = out_dir_arg;
    if (out_dir.empty()) {
        const char* env = std::getenv("SDRELAX_OUT");
        out_dir = env && *env ? env : "out";
    }
    namespace fs = std::filesystem;
    fs::path base = fs::path(out_dir) / ctx.prefix;

    json manifest;
    manifest["config_hash"] = ctx.config_hash;
    manifest["seed"] = ctx.seed;
    manifest["version"] = library_version();
    manifest["command"] = command;
    const char* workers_env = std::getenv("SDRELAX_WORKERS");
    manifest["workers"] = workers_env && *workers_env ? std::atoi(workers_env) : 1;
    manifest["outputs"] = {ctx.prefix + ".csv", ctx.prefix + ".json", ctx.prefix + ".manifest.json"};

    ctx.results["config_hash"] = ctx.config_hash;
    ctx.results["command"] = command;
    ctx.results["seed"] = ctx.seed;

    RunOutcome outcome;
    outcome.manifest_json = manifest.dump(2);
    std::string csv_path = (fs::path(out_dir) / (ctx.prefix + ".csv")).string();
    std::string json_path = (fs::path(out_dir) / (ctx.prefix + ".json")).string();
    std::string manifest_path = (fs::path(out_dir) / (ctx.prefix + ".manifest.json")).string();
    write_file_atomic(csv_path, ctx.csv.text());
    write_file_atomic(json_path, ctx.results.dump(2));
    write_file_atomic(manifest_path, outcome.manifest_json);
    outcome.output_files = {csv_path, json_path, manifest_path};
    return outcome;
}

RunOutcome run_config_file(const std::string& config_path, const std::string& expected_command,
                           const std::string& out_dir, long long seed_override) {
    return run_config_text(read_file(config_path), expected_command, out_dir, seed_override);
}

}  // namespace sdr
