// Test-only oracles, independent of the library's evaluation paths: plain
// Riemann quadrature for integrals and exhaustive enumeration for the small
// 1D cell problems.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// midpoint-rule quadrature on [a,b] with many points; accuracy ~ (b-a)/n^2
// for piecewise-smooth integrands, plenty below the test tolerances
inline double quad_1d(const std::function<double(double)>& f, double a, double b, int n = 200000) {
    double h = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += f(a + (i + 0.5) * h);
    return acc * h;
}

// minimum of (1/n) sum W(m_i) + psi_net(A - mean m) over all gradient
// vectors with entries in the quantized set and mean exactly B. Values are
// free, so the optimal jump cost for a subadditive 1-homogeneous psi is the
// cost of the net mismatch placed on a single facet.
struct BulkEnumeration {
    std::function<double(double)> bulk;      // W on scalars
    std::function<double(double)> jump_cost; // psi on a scalar jump
    std::vector<double> quantized;           // allowed per-cell gradients
    int cells = 8;

    // returns +inf when no quantized vector has mean exactly B
    double minimum(double boundary_a, double mean_b) const {
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> m(cells, 0.0);
        enumerate(0, 0.0, boundary_a, mean_b, m, best);
        return best;
    }

  private:
    void enumerate(int at, double partial_sum, double a, double b, std::vector<double>& m,
                   double& best) const {
        if (at == cells) {
            if (std::fabs(partial_sum / cells - b) > 1e-12) return;
            double cost = 0.0;
            for (double mi : m) cost += bulk(mi) / cells;
            cost += jump_cost(a - b);
            if (cost < best) best = cost;
            return;
        }
        // prune: remaining entries are bounded by the quantized range
        double lo = quantized.front(), hi = quantized.back();
        int left = cells - at;
        double need = b * cells - partial_sum;
        if (need < left * lo - 1e-9 || need > left * hi + 1e-9) return;
        for (double q : quantized) {
            m[at] = q;
            enumerate(at + 1, partial_sum + q, a, b, m, best);
        }
    }
};

// minimum over quantized interior values of a 1D jump chain with pinned end
// traces: sum psi(v_{k+1} - v_k)
inline double surface_enumeration(const std::function<double(double)>& jump_cost, double left,
                                  double right, const std::vector<double>& levels, int cells) {
    // dynamic programme over the chain, exact for the quantized class
    std::vector<double> cost(levels.size(), 0.0);
    for (std::size_t i = 0; i < levels.size(); ++i) cost[i] = jump_cost(levels[i] - left);
    for (int k = 2; k < cells - 1; ++k) {
        std::vector<double> next(levels.size(), std::numeric_limits<double>::infinity());
        for (std::size_t j = 0; j < levels.size(); ++j)
            for (std::size_t i = 0; i < levels.size(); ++i)
                next[j] = std::min(next[j], cost[i] + jump_cost(levels[j] - levels[i]));
        cost = next;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < levels.size(); ++i)
        best = std::min(best, cost[i] + jump_cost(right - levels[i]));
    return best;
}

// fit err ~ C n^rate by least squares in log-log
inline double fitted_rate(const std::vector<double>& ns, const std::vector<double>& errs) {
    double mx = 0, my = 0;
    int k = 0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (errs[i] <= 0) continue;
        xs.push_back(std::log(ns[i]));
        ys.push_back(std::log(errs[i]));
        mx += xs.back();
        my += ys.back();
        ++k;
    }
    if (k < 2) return 0.0;
    mx /= k;
    my /= k;
    double num = 0, den = 0;
    for (int i = 0; i < k; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

}  // namespace oracle
