#pragma once

#include "cell/solve.hpp"

namespace sdr {

// Ladder of Dirichlet solves on shrinking cubes with the bulk or surface
// normalization. The estimate is the running maximum of the tail ratios,
// a computable stand-in for the lim sup.
struct BlowupResult {
    std::vector<double> epsilons;
    std::vector<double> values;  // m(.; Q(x0,eps))
    std::vector<double> ratios;  // values / eps^N or eps^{N-1}
    double estimate = 0.0;
    std::vector<SolveResult> solves;
};

// Domain the cubes must stay inside.
struct Domain {
    Vec center;
    double side = 2.0;
    bool contains_cube(const Vec& x0, double eps, const Vec& nu) const;
};

struct BlowupParams {
    int cells_per_side = 8;
    int collar_width = 1;
    std::uint64_t seed = 0;
    double p = 2.0;
    SolveBudget budget;
    double tolerance = 1e-9;
    bool force_general_path = false;
    int workers = 1;  // ladder entries are independent; results merge by index
};

// Bulk density estimate: m(a + xi(.-x0), B_1[,B_2]; Q(x0,eps)) / eps^N.
BlowupResult blowup_bulk(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x0,
                         const Vec& a, const Mat& xi, const std::vector<Mat>& means,
                         const std::vector<double>& eps_ladder, const Domain& omega,
                         const BlowupParams& params);

// Interfacial density estimate:
// m(v_{lambda,theta,nu}(.-x0), 0[,0]; Q_nu(x0,eps)) / eps^{N-1}.
BlowupResult blowup_surface(const BulkDensity& w, const SurfaceDensity& psi, const Vec& x0,
                            const Vec& lambda, const Vec& theta, const Vec& nu, int levels,
                            const std::vector<double>& eps_ladder, const Domain& omega,
                            const BlowupParams& params);

}  // namespace sdr
