#include "cell/spec.hpp"

#include "core/error.hpp"
#include "core/textio.hpp"
#include "density/catalog.hpp"
#include "json.hpp"

namespace sdr {

std::string kind_name(CellProblemKind k) {
    switch (k) {
        case CellProblemKind::Bulk: return "bulk";
        case CellProblemKind::Surface: return "surface";
        case CellProblemKind::Dirichlet: return "dirichlet-general";
    }
    return "?";
}

CellProblemKind kind_from_name(const std::string& s) {
    if (s == "bulk") return CellProblemKind::Bulk;
    if (s == "surface") return CellProblemKind::Surface;
    if (s == "dirichlet-general" || s == "dirichlet") return CellProblemKind::Dirichlet;
    throw Error(ErrorKind::Parse, "unknown cell problem kind '" + s + "'");
}

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
        rows.push_back(row);
    }
    return rows;
}

Mat mat_from_json(const json& j, int rows, int cols, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw Error(ErrorKind::Parse, what + ": expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw Error(ErrorKind::Parse, what + ": expected " + std::to_string(cols) + " columns");
        for (int jj = 0; jj < cols; ++jj) m.at(i, jj) = row[jj].get<double>();
    }
    return m;
}

}  // namespace

// --- density (de)serialization shared with the run configs ------------------

BulkDensity bulk_density_from_json(const nlohmann::json& j, int space_dim, int target_dim) {
    if (j.contains("catalog")) return catalog_bulk(j.at("catalog").get<std::string>(), space_dim, target_dim);
    BulkDensity w = parse_bulk_density(j.at("formula").get<std::string>(), space_dim, target_dim);
    if (j.contains("p")) w.p = j.at("p").get<double>();
    if (j.contains("lipschitz")) w.lipschitz_const = j.at("lipschitz").get<double>();
    if (j.contains("coercivity")) w.coercivity_const = j.at("coercivity").get<double>();
    if (j.contains("convex")) w.convex = j.at("convex").get<bool>();
    if (j.contains("reference"))
        w.reference_matrix = mat_from_json(j.at("reference"), target_dim, space_dim, "reference");
    if (j.contains("recession_model")) {
        const auto& m = j.at("recession_model");
        w.recession_error = RecessionErrorModel{m.at("C").get<double>(), m.at("L").get<double>(),
                                                m.at("alpha").get<double>()};
    }
    if (w.p < 1.0) throw Error(ErrorKind::Argument, "bulk density: p must be >= 1");
    if (!(w.coercivity_const > 0.0))
        throw Error(ErrorKind::Argument, "bulk density: coercivity constant must be positive");
    return w;
}

SurfaceDensity surface_density_from_json(const nlohmann::json& j, int space_dim, int target_dim) {
    if (j.contains("catalog"))
        return catalog_surface(j.at("catalog").get<std::string>(), space_dim, target_dim);
    SurfaceDensity psi = parse_surface_density(j.at("formula").get<std::string>(), space_dim, target_dim);
    if (j.contains("lower")) psi.lower_const = j.at("lower").get<double>();
    if (j.contains("upper")) psi.upper_const = j.at("upper").get<double>();
    if (j.contains("norm_scale")) psi.norm_scale = j.at("norm_scale").get<double>();
    if (!(psi.lower_const > 0.0) || !(psi.upper_const > 0.0))
        throw Error(ErrorKind::Argument, "surface density: growth constants must be positive");
    return psi;
}

nlohmann::json bulk_density_to_json(const BulkDensity& w) {
    json j;
    if (!w.name.empty() && catalog_has(w.name)) {
        j["catalog"] = w.name;
        return j;
    }
    j["formula"] = w.formula;
    j["p"] = w.p;
    j["lipschitz"] = w.lipschitz_const;
    j["coercivity"] = w.coercivity_const;
    j["convex"] = w.convex;
    return j;
}

nlohmann::json surface_density_to_json(const SurfaceDensity& psi) {
    json j;
    if (!psi.name.empty() && catalog_has(psi.name)) {
        j["catalog"] = psi.name;
        return j;
    }
    j["formula"] = psi.formula;
    j["lower"] = psi.lower_const;
    j["upper"] = psi.upper_const;
    if (psi.norm_scale) j["norm_scale"] = *psi.norm_scale;
    return j;
}

std::string spec_to_json(const CellProblemSpec& spec) {
    json j;
    j["kind"] = kind_name(spec.kind);
    j["p"] = spec.p;
    j["bulk"] = bulk_density_to_json(spec.bulk);
    j["surface"] = surface_density_to_json(spec.surface);
    const CubeGrid& g = spec.grid;
    j["grid"] = {{"N", g.space_dim},   {"d", g.target_dim}, {"n", g.cells_per_side},
                 {"center", g.center}, {"side", g.side},    {"nu", g.normal}};
    switch (spec.kind) {
        case CellProblemKind::Bulk:
            j["A"] = mat_to_json(spec.boundary_matrix);
            j["B"] = mat_to_json(spec.mean_gradient);
            break;
        case CellProblemKind::Surface:
            j["lambda"] = spec.jump_lambda;
            j["theta"] = spec.jump_theta;
            break;
        case CellProblemKind::Dirichlet: {
            j["boundary_field"] = json::parse(field_to_json(*spec.boundary_field));
            json means = json::array();
            for (const auto& m : spec.means) means.push_back(mat_to_json(m));
            j["means"] = means;
            break;
        }
    }
    j["collar"] = spec.collar_width;
    j["budget"] = {{"iterations", spec.budget.iterations}, {"restarts", spec.budget.restarts}};
    j["seed"] = spec.seed;
    j["tolerance"] = spec.tolerance;
    if (!spec.recession_ladder.empty()) j["recession_ladder"] = spec.recession_ladder;
    if (spec.force_general_path) j["force_general_path"] = true;
    return j.dump(2);
}

CellProblemSpec spec_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("spec JSON: ") + e.what());
    }
    try {
        CellProblemSpec spec;
        spec.kind = kind_from_name(j.at("kind").get<std::string>());
        const auto& jg = j.at("grid");
        spec.grid = make_grid(jg.at("N").get<int>(), jg.at("d").get<int>(), jg.at("n").get<int>(),
                              jg.at("center").get<Vec>(), jg.at("side").get<double>(),
                              jg.at("nu").get<Vec>());
        const int N = spec.grid.space_dim, d = spec.grid.target_dim;
        spec.p = j.value("p", 2.0);
        spec.bulk = bulk_density_from_json(j.at("bulk"), N, d);
        spec.surface = surface_density_from_json(j.at("surface"), N, d);
        switch (spec.kind) {
            case CellProblemKind::Bulk:
                spec.boundary_matrix = mat_from_json(j.at("A"), d, N, "A");
                spec.mean_gradient = mat_from_json(j.at("B"), d, N, "B");
                break;
            case CellProblemKind::Surface:
                spec.jump_lambda = j.at("lambda").get<Vec>();
                spec.jump_theta = j.value("theta", Vec(d, 0.0));
                break;
            case CellProblemKind::Dirichlet: {
                spec.boundary_field = field_from_json(j.at("boundary_field").dump());
                for (const auto& m : j.at("means"))
                    spec.means.push_back(mat_from_json(m, d, N, "means"));
                break;
            }
        }
        spec.collar_width = j.value("collar", 1);
        if (j.contains("budget")) {
            spec.budget.iterations = j.at("budget").value("iterations", spec.budget.iterations);
            spec.budget.restarts = j.at("budget").value("restarts", spec.budget.restarts);
        }
        spec.seed = j.value("seed", 0ULL);
        spec.tolerance = j.value("tolerance", 1e-9);
        if (j.contains("recession_ladder"))
            spec.recession_ladder = j.at("recession_ladder").get<std::vector<double>>();
        spec.force_general_path = j.value("force_general_path", false);
        return spec;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("spec JSON: ") + e.what());
    }
}

std::string SolveResult::to_json() const {
    json j;
    j["value"] = value;
    j["certified"] = diagnostics.certified;
    j["certificate"] = diagnostics.certificate;
    j["lower_bound"] = diagnostics.lower_bound;
    j["gap"] = diagnostics.gap;
    j["iterations"] = diagnostics.iterations;
    j["restarts_used"] = diagnostics.restarts_used;
    j["budget_exhausted"] = diagnostics.budget_exhausted;
    j["recession_spread"] = diagnostics.recession_spread;
    json hist = json::array();
    for (const auto& [n, v] : refinement_history) hist.push_back({{"n", n}, {"value", v}});
    j["refinement_history"] = hist;
    j["sandwich"] = {{"constant", sandwich.constant},
                     {"load", sandwich.load},
                     {"lower", sandwich.lower},
                     {"upper", sandwich.upper},
                     {"ok", sandwich.ok}};
    j["minimizer"] = json::parse(field_to_json(minimizer));
    return j.dump(2);
}

}  // namespace sdr
