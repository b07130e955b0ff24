#include "density/density.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace sdr {

double eval_bulk(const BulkDensity& w, const Vec& x, const Mat& a) {
    if (static_cast<int>(x.size()) != w.space_dim)
        throw Error(ErrorKind::Dimension, "eval_bulk: x has wrong dimension");
    if (a.rows != w.target_dim || a.cols != w.space_dim)
        throw Error(ErrorKind::Dimension, "eval_bulk: matrix has wrong shape");
    if (!all_finite(x) || !a.finite())
        throw Error(ErrorKind::Numeric, "eval_bulk: non-finite input");
    return w.evaluator(x, a);
}

double eval_surface(const SurfaceDensity& psi, const Vec& x, const Vec& lambda, const Vec& nu) {
    if (static_cast<int>(x.size()) != psi.space_dim)
        throw Error(ErrorKind::Dimension, "eval_surface: x has wrong dimension");
    if (static_cast<int>(lambda.size()) != psi.target_dim)
        throw Error(ErrorKind::Dimension, "eval_surface: jump vector has wrong dimension");
    if (static_cast<int>(nu.size()) != psi.space_dim)
        throw Error(ErrorKind::Dimension, "eval_surface: normal has wrong dimension");
    if (!all_finite(x) || !all_finite(lambda) || !all_finite(nu))
        throw Error(ErrorKind::Numeric, "eval_surface: non-finite input");
    if (std::fabs(norm(nu) - 1.0) > 1e-12)
        throw Error(ErrorKind::Argument, "eval_surface: normal is not unit length");
    return psi.evaluator(x, lambda, nu);
}

RecessionEstimate recession_estimate(const BulkDensity& w, const Vec& x, const Mat& a,
                                     const std::vector<double>& ladder) {
    if (ladder.size() < 3)
        throw Error(ErrorKind::Argument, "recession_estimate: ladder too short (<3 entries)");
    if (std::fabs(a.norm() - 1.0) > 1e-9)
        throw Error(ErrorKind::Argument, "recession_estimate: direction must have unit norm");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i - 1]) || !(ladder[0] > 0))
            throw Error(ErrorKind::Argument, "recession_estimate: ladder must be increasing and positive");
    if (w.recession_error && ladder.front() <= w.recession_error->L)
        throw Error(ErrorKind::Argument, "recession_estimate: ladder entries must exceed declared L");

    std::vector<double> ratios;
    ratios.reserve(ladder.size());
    for (double t : ladder) {
        Mat ta = t * a;
        ratios.push_back(eval_bulk(w, x, ta) / t);
    }

    // Superlinear growth makes the ratios blow up along the ladder; that is a
    // p > 1 density where the recession is not a finite direction.
    if (ratios.back() > 10.0 * std::max(1.0, ratios.front()) && ratios.back() > ratios[ratios.size() - 2])
        throw Error(ErrorKind::Numeric, "recession undefined/infinite direction");

    std::size_t tail_start = ladder.size() / 2;
    double lo = ratios[tail_start], hi = ratios[tail_start];
    for (std::size_t i = tail_start; i < ratios.size(); ++i) {
        lo = std::min(lo, ratios[i]);
        hi = std::max(hi, ratios[i]);
    }

    RecessionEstimate est;
    est.spread = hi - lo;
    if (w.recession_error)
        est.certified_bound = w.recession_error->C / std::pow(ladder[tail_start], w.recession_error->alpha);
    if (w.recession_closed_form) {
        est.value = w.recession_closed_form(x, a);
        est.exact = true;
        // spread now reports ladder agreement with the closed form
        est.spread = std::max(std::fabs(hi - est.value), std::fabs(lo - est.value));
    } else {
        est.value = hi;
    }
    return est;
}

std::vector<double> default_recession_ladder() { return {10.0, 100.0, 1000.0, 10000.0}; }

double recession_value(const BulkDensity& w, const Vec& x, const Mat& m,
                       const std::vector<double>& ladder) {
    double n = m.norm();
    if (n == 0.0) return 0.0;
    Mat dir = (1.0 / n) * m;
    return n * recession_estimate(w, x, dir, ladder).value;
}

BulkDensity freeze_x(const BulkDensity& w, const Vec& x0) {
    BulkDensity out = w;
    auto inner = w.evaluator;
    Vec frozen = x0;
    out.evaluator = [inner, frozen](const Vec&, const Mat& a) { return inner(frozen, a); };
    if (w.recession_closed_form) {
        auto rec = w.recession_closed_form;
        out.recession_closed_form = [rec, frozen](const Vec&, const Mat& a) { return rec(frozen, a); };
    }
    out.x_dependent = false;
    return out;
}

SurfaceDensity freeze_x(const SurfaceDensity& psi, const Vec& x0) {
    SurfaceDensity out = psi;
    auto inner = psi.evaluator;
    Vec frozen = x0;
    out.evaluator = [inner, frozen](const Vec&, const Vec& lam, const Vec& nu) {
        return inner(frozen, lam, nu);
    };
    out.x_dependent = false;
    return out;
}

Mat frame_rotation(const Vec& nu) {
    int n = static_cast<int>(nu.size());
    if (std::fabs(norm(nu) - 1.0) > 1e-12)
        throw Error(ErrorKind::Argument, "frame_rotation: normal is not unit length");
    if (n == 1) {
        Mat r(1, 1);
        r.at(0, 0) = nu[0];
        return r;
    }
    if (n == 2) {
        Mat r(2, 2);
        r.at(0, 0) = nu[0];
        r.at(1, 0) = nu[1];
        r.at(0, 1) = -nu[1];
        r.at(1, 1) = nu[0];
        return r;
    }
    throw Error(ErrorKind::Dimension, "frame_rotation: only N in {1,2} supported");
}

BulkDensity rotate(const BulkDensity& w, const Mat& rot, const Vec& center) {
    BulkDensity out = w;
    auto inner = w.evaluator;
    Mat rt = transpose(rot);
    Vec c = center;
    out.evaluator = [inner, rot, rt, c](const Vec& y, const Mat& a) {
        // physical point: c + R (y - c); physical gradient: A R^T
        Vec local = y - c;
        Vec x = c + rot.apply(local);
        return inner(x, mat_mul(a, rt));
    };
    out.recession_closed_form = nullptr;
    if (w.recession_closed_form) {
        auto rec = w.recession_closed_form;
        out.recession_closed_form = [rec, rot, rt, c](const Vec& y, const Mat& a) {
            Vec local = y - c;
            Vec x = c + rot.apply(local);
            return rec(x, mat_mul(a, rt));
        };
    }
    return out;
}

SurfaceDensity rotate(const SurfaceDensity& psi, const Mat& rot, const Vec& center) {
    SurfaceDensity out = psi;
    auto inner = psi.evaluator;
    Vec c = center;
    out.evaluator = [inner, rot, c](const Vec& y, const Vec& lam, const Vec& nu) {
        Vec local = y - c;
        Vec x = c + rot.apply(local);
        return inner(x, lam, rot.apply(nu));
    };
    return out;
}

namespace {

void check_vars(const ExprPtr& ast, DensityKind kind, const std::string& text) {
    std::vector<std::string> vars;
    ast->collect_vars(vars);
    for (const auto& v : vars) {
        bool ok = (v == "x") || (kind == DensityKind::Bulk ? v == "A" : (v == "lambda" || v == "nu"));
        if (!ok)
            throw Error(ErrorKind::Parse, "variable '" + v + "' not allowed in " +
                                              (kind == DensityKind::Bulk ? "bulk" : "surface") +
                                              " density '" + text + "'");
    }
}

bool uses_x(const ExprPtr& ast) {
    std::vector<std::string> vars;
    ast->collect_vars(vars);
    return std::find(vars.begin(), vars.end(), "x") != vars.end();
}

}  // namespace

BulkDensity parse_bulk_density(const std::string& text, int space_dim, int target_dim) {
    ExprPtr ast = parse_expression(text);
    check_vars(ast, DensityKind::Bulk, text);
    BulkDensity w;
    w.space_dim = space_dim;
    w.target_dim = target_dim;
    w.reference_matrix = Mat(target_dim, space_dim);
    w.formula = ast->print();
    w.x_dependent = uses_x(ast);
    w.evaluator = [ast](const Vec& x, const Mat& a) {
        ExprEnv env;
        env.x = &x;
        env.A = &a;
        return ast->eval_scalar(env);
    };
    return w;
}

SurfaceDensity parse_surface_density(const std::string& text, int space_dim, int target_dim) {
    ExprPtr ast = parse_expression(text);
    check_vars(ast, DensityKind::Surface, text);
    SurfaceDensity psi;
    psi.space_dim = space_dim;
    psi.target_dim = target_dim;
    psi.formula = ast->print();
    psi.x_dependent = uses_x(ast);
    psi.evaluator = [ast](const Vec& x, const Vec& lam, const Vec& nu) {
        ExprEnv env;
        env.x = &x;
        env.lambda = &lam;
        env.nu = &nu;
        return ast->eval_scalar(env);
    };
    return psi;
}

}  // namespace sdr
