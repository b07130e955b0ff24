#include "cell/blowup.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace sdr {

bool Domain::contains_cube(const Vec& x0, double eps, const Vec& nu) const {
    // conservative test: the rotated cube sits inside the circumscribed ball
    // of diameter eps*sqrt(N), which must fit in the box
    (void)nu;
    double radius = eps * std::sqrt(static_cast<double>(x0.size())) / 2.0;
    for (std::size_t k = 0; k < x0.size(); ++k) {
        if (x0[k] - radius < center[k] - side / 2.0) return false;
        if (x0[k] + radius > center[k] + side / 2.0) return false;
    }
    return true;
}

namespace {

void check_ladder(const std::vector<double>& eps_ladder) {
    if (eps_ladder.size() < 3)
        throw Error(ErrorKind::Argument, "blow-up: ladder needs at least 3 entries");
    for (std::size_t i = 0; i + 1 < eps_ladder.size(); ++i)
        if (!(eps_ladder[i + 1] < eps_ladder[i]) || !(eps_ladder.back() > 0))
            throw Error(ErrorKind::Argument, "blow-up: ladder must be positive and decreasing");
}

BlowupResult run_ladder(std::vector<CellProblemSpec> specs, const std::vector<double>& eps_ladder,
                        int codim, int workers) {
    BlowupResult out;
    out.epsilons = eps_ladder;
    out.solves.resize(specs.size());
    parallel_for(static_cast<int>(specs.size()), workers,
                 [&](int i) { out.solves[i] = solve_cell_problem(specs[i]); });
    for (std::size_t i = 0; i < specs.size(); ++i) {
        double denom = std::pow(eps_ladder[i], specs[i].grid.space_dim - codim);
        out.values.push_back(out.solves[i].value);
        out.ratios.push_back(out.solves[i].value / denom);
    }
    std::size_t tail = out.ratios.size() / 2;
    out.estimate = out.ratios[tail];
    for (std::size_t i = tail; i < out.ratios.size(); ++i)
        out.estimate = std::max(out.estimate, out.ratios[i]);
    return out;
}

}  // namespace

BlowupResult blowup_bulk(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x0,
                         const Vec& a, const Mat& xi, const std::vector<Mat>& means,
                         const std::vector<double>& eps_ladder, const Domain& omega,
                         const BlowupParams& params) {
    check_ladder(eps_ladder);
    const int N = w.space_dim, d = w.target_dim;
    Vec e1(N, 0.0);
    e1[0] = 1.0;
    std::vector<CellProblemSpec> specs;
    for (double eps : eps_ladder) {
        if (!omega.contains_cube(x0, eps, e1))
            throw Error(ErrorKind::Argument, "blow-up: cube exits the domain");
        CellProblemSpec spec;
        spec.kind = CellProblemKind::Dirichlet;
        spec.bulk = w;
        spec.surface = psi;
        spec.p = params.p;
        spec.grid = make_grid(N, d, params.cells_per_side, x0, eps, e1);
        spec.boundary_field = affine_field(spec.grid, xi, a - xi.apply(x0));
        spec.means = means;
        spec.collar_width = params.collar_width;
        spec.budget = params.budget;
        spec.seed = params.seed;
        spec.tolerance = params.tolerance;
        spec.force_general_path = params.force_general_path;
        specs.push_back(std::move(spec));
    }
    return run_ladder(std::move(specs), eps_ladder, 0, params.workers);
}

BlowupResult blowup_surface(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x0,
                            const Vec& lambda, const Vec& theta, const Vec& nu, int levels,
                            const std::vector<double>& eps_ladder, const Domain& omega,
                            const BlowupParams& params) {
    check_ladder(eps_ladder);
    const int N = w.space_dim, d = w.target_dim;
    if (levels < 1 || levels > 2)
        throw Error(ErrorKind::Argument, "blow-up: levels must be 1 or 2");
    std::vector<CellProblemSpec> specs;
    for (double eps : eps_ladder) {
        if (!omega.contains_cube(x0, eps, nu))
            throw Error(ErrorKind::Argument, "blow-up: cube exits the domain");
        CellProblemSpec spec;
        spec.kind = CellProblemKind::Dirichlet;
        spec.bulk = w;
        spec.surface = psi;
        spec.p = params.p;
        spec.grid = make_grid(N, d, params.cells_per_side, x0, eps, nu);
        spec.boundary_field = jump_datum_field(spec.grid, lambda, theta);
        spec.means.assign(levels, Mat(d, N));
        spec.collar_width = params.collar_width;
        spec.budget = params.budget;
        spec.seed = params.seed;
        spec.tolerance = params.tolerance;
        spec.force_general_path = params.force_general_path;
        specs.push_back(std::move(spec));
    }
    return run_ladder(std::move(specs), eps_ladder, 1, params.workers);
}

}  // namespace sdr
