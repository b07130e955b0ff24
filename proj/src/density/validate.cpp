#include "density/validate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/textio.hpp"
#include "json.hpp"

namespace sdr {

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Skipped: return "skipped";
    }
    return "?";
}

bool ValidationReport::all_passed() const {
    for (const auto& r : results)
        if (r.verdict == Verdict::Fail) return false;
    return true;
}

const HypothesisResult* ValidationReport::find(const std::string& id) const {
    for (const auto& r : results)
        if (r.id == id) return &r;
    return nullptr;
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["seed"] = seed;
    j["tolerance"] = tolerance;
    j["hypotheses"] = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json h;
        h["id"] = r.id;
        h["verdict"] = verdict_name(r.verdict);
        h["worst_excess"] = r.worst_excess;
        h["witness"] = r.witness;
        j["hypotheses"].push_back(h);
    }
    return j.dump(2);
}

namespace {

// Running worst case of one hypothesis inequality lhs <= rhs.
struct Tracker {
    std::string id;
    double tolerance;
    double worst = -1e300;
    std::string witness;
    bool broken = false;  // non-finite evaluation
    std::string broken_witness;

    Tracker(std::string id_, double tol) : id(std::move(id_)), tolerance(tol) {}

    void offer(double lhs, double rhs, const std::string& w) {
        if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
            if (!broken) {
                broken = true;
                broken_witness = w;
            }
            return;
        }
        double excess = (lhs - rhs) / std::max(1.0, std::fabs(rhs));
        if (excess > worst) {
            worst = excess;
            witness = w;
        }
    }

    HypothesisResult result() const {
        HypothesisResult r;
        r.id = id;
        if (broken) {
            r.verdict = Verdict::Fail;
            r.worst_excess = std::numeric_limits<double>::infinity();
            r.witness = broken_witness + " (non-finite evaluation)";
            return r;
        }
        r.worst_excess = worst <= -1e299 ? 0.0 : worst;
        r.verdict = r.worst_excess > tolerance ? Verdict::Fail : Verdict::Pass;
        r.witness = r.verdict == Verdict::Fail ? witness : "";
        return r;
    }
};

std::string render_vec(const char* name, const Vec& v) {
    std::string s = std::string(name) + "=[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_double(v[i]);
    }
    return s + "]";
}

std::string render_mat(const char* name, const Mat& m) {
    std::string s = std::string(name) + "=[";
    for (std::size_t i = 0; i < m.a.size(); ++i) {
        if (i) s += ",";
        s += format_double(m.a[i]);
    }
    return s + "]";
}

Vec unit_from(const std::vector<double>& u, std::size_t at, int n) {
    // map [0,1)^? to a unit vector; N<=2 so one angle suffices
    if (n == 1) return Vec{u[at] < 0.5 ? -1.0 : 1.0};
    double th = 2.0 * M_PI * u[at];
    return Vec{std::cos(th), std::sin(th)};
}

double safe_eval(const std::function<double(const Vec&, const Mat&)>& f, const Vec& x, const Mat& a) {
    try {
        return f(x, a);
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

double safe_eval(const std::function<double(const Vec&, const Vec&, const Vec&)>& f, const Vec& x,
                 const Vec& l, const Vec& n) {
    try {
        return f(x, l, n);
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

ValidationReport validate_bulk(const BulkDensity& w, std::uint64_t seed, long n_samples,
                               double tolerance, const SampleBox& box) {
    if (n_samples < 1) throw Error(ErrorKind::Argument, "validate_bulk: need n_samples >= 1");
    const int N = w.space_dim, d = w.target_dim;
    const int dim = N + 2 * d * N + 1;  // x, A1, A2, spare coordinate
    HaltonSampler sampler(dim, seed);

    Tracker nonneg("nonneg", tolerance);
    Tracker w1("W1", tolerance);
    Tracker w4("W4", tolerance);
    Tracker w5("W5", tolerance);
    Tracker w2("W2", tolerance);
    Tracker w3("W3", tolerance);
    bool has_w2 = static_cast<bool>(w.declared_modulus);
    bool has_w3 = w.recession_error.has_value() && w.p == 1.0;

    Vec prev_x(N, 0.0);
    for (long it = 0; it < n_samples; ++it) {
        std::vector<double> u = sampler.next();
        std::size_t at = 0;
        Vec x(N);
        for (int i = 0; i < N; ++i) x[i] = box.x_halfwidth * (2.0 * u[at++] - 1.0);
        Mat a1(d, N), a2(d, N);
        for (auto& e : a1.a) e = box.matrix_halfwidth * (2.0 * u[at++] - 1.0);
        for (auto& e : a2.a) e = box.matrix_halfwidth * (2.0 * u[at++] - 1.0);

        double va1 = safe_eval(w.evaluator, x, a1);
        double va2 = safe_eval(w.evaluator, x, a2);
        std::string wit = render_vec("x", x) + " " + render_mat("A1", a1) + " " + render_mat("A2", a2);

        nonneg.offer(-va1, 0.0, wit);
        nonneg.offer(-va2, 0.0, wit);

        double q = w.p - 1.0;
        double lip_rhs = w.lipschitz_const * (a1 - a2).norm() *
                         (1.0 + std::pow(a1.norm(), q) + std::pow(a2.norm(), q));
        w1.offer(std::fabs(va1 - va2), lip_rhs, wit);

        double at_a0 = safe_eval(w.evaluator, x, w.reference_matrix);
        w4.offer(std::isfinite(at_a0) ? 0.0 : std::numeric_limits<double>::infinity(), 0.0,
                 render_vec("x", x) + " A0");

        double coer_lhs = w.coercivity_const * std::pow(a1.norm(), w.p) - 1.0 / w.coercivity_const;
        w5.offer(coer_lhs, va1, wit);

        if (has_w2) {
            double vb = safe_eval(w.evaluator, prev_x, a1);
            double rhs = w.declared_modulus(norm(x - prev_x)) * (1.0 + std::pow(a1.norm(), w.p));
            w2.offer(std::fabs(va1 - vb), rhs, render_vec("x0", prev_x) + " " + wit);
        }
        if (has_w3 && a1.norm() > 0) {
            Mat dir = (1.0 / a1.norm()) * a1;
            const auto& em = *w.recession_error;
            try {
                RecessionEstimate est = recession_estimate(w, x, dir, default_recession_ladder());
                for (double t : {2.0 * em.L, 8.0 * em.L, 32.0 * em.L}) {
                    double ratio = safe_eval(w.evaluator, x, t * dir) / t;
                    w3.offer(std::fabs(est.value - ratio), em.C / std::pow(t, em.alpha),
                             wit + " t=" + format_double(t));
                }
            } catch (const Error&) {
                w3.offer(std::numeric_limits<double>::infinity(), 0.0, wit);
            }
        }
        prev_x = x;
    }

    ValidationReport rep;
    rep.samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tolerance;
    rep.results.push_back(nonneg.result());
    rep.results.push_back(w1.result());
    rep.results.push_back(w4.result());
    rep.results.push_back(w5.result());
    HypothesisResult r2 = has_w2 ? w2.result() : HypothesisResult{"W2", Verdict::Skipped, 0.0, ""};
    HypothesisResult r3 = has_w3 ? w3.result() : HypothesisResult{"W3", Verdict::Skipped, 0.0, ""};
    rep.results.push_back(r2);
    rep.results.push_back(r3);
    return rep;
}

ValidationReport validate_surface(const SurfaceDensity& psi, std::uint64_t seed, long n_samples,
                                  double tolerance, const SampleBox& box) {
    if (n_samples < 1) throw Error(ErrorKind::Argument, "validate_surface: need n_samples >= 1");
    const int N = psi.space_dim, d = psi.target_dim;
    const int dim = N + 2 * d + 3;  // x, lambda1, lambda2, angle, t, spare
    HaltonSampler sampler(dim, seed);

    Tracker nonneg("nonneg", tolerance);
    Tracker p1("psi1", tolerance);
    Tracker p2lo("psi2-lower", tolerance);
    Tracker p2hi("psi2-upper", tolerance);
    Tracker p3("psi3", tolerance);
    Tracker p4("psi4", tolerance);
    Tracker p5("psi5", tolerance);
    bool has_p5 = static_cast<bool>(psi.declared_modulus);

    Vec prev_x(N, 0.0);
    for (long it = 0; it < n_samples; ++it) {
        std::vector<double> u = sampler.next();
        std::size_t at = 0;
        Vec x(N);
        for (int i = 0; i < N; ++i) x[i] = box.x_halfwidth * (2.0 * u[at++] - 1.0);
        Vec l1(d), l2(d);
        for (int i = 0; i < d; ++i) l1[i] = box.matrix_halfwidth * (2.0 * u[at++] - 1.0);
        for (int i = 0; i < d; ++i) l2[i] = box.matrix_halfwidth * (2.0 * u[at++] - 1.0);
        Vec nu = unit_from(u, at, N);
        ++at;
        double t = box.scaling_max * u[at++];
        if (t <= 1e-3) t = 0.5;

        double v1 = safe_eval(psi.evaluator, x, l1, nu);
        std::string wit = render_vec("x", x) + " " + render_vec("lambda", l1) + " " + render_vec("nu", nu);

        nonneg.offer(-v1, 0.0, wit);

        Vec neg_l1 = -1.0 * l1, neg_nu = -1.0 * nu;
        p1.offer(std::fabs(v1 - safe_eval(psi.evaluator, x, neg_l1, neg_nu)), 0.0, wit);

        p2lo.offer(psi.lower_const * norm(l1), v1, wit);
        p2hi.offer(v1, psi.upper_const * norm(l1), wit);

        Vec tl = t * l1;
        p3.offer(std::fabs(safe_eval(psi.evaluator, x, tl, nu) - t * v1), 0.0,
                 wit + " t=" + format_double(t));

        Vec sum = l1 + l2;
        p4.offer(safe_eval(psi.evaluator, x, sum, nu),
                 v1 + safe_eval(psi.evaluator, x, l2, nu),
                 wit + " " + render_vec("lambda2", l2));

        if (has_p5) {
            double vb = safe_eval(psi.evaluator, prev_x, l1, nu);
            p5.offer(std::fabs(v1 - vb), psi.declared_modulus(norm(x - prev_x)) * norm(l1),
                     render_vec("x0", prev_x) + " " + wit);
        }
        prev_x = x;
    }

    ValidationReport rep;
    rep.samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tolerance;
    rep.results.push_back(nonneg.result());
    rep.results.push_back(p1.result());
    rep.results.push_back(p2lo.result());
    rep.results.push_back(p2hi.result());
    rep.results.push_back(p3.result());
    rep.results.push_back(p4.result());
    rep.results.push_back(has_p5 ? p5.result() : HypothesisResult{"psi5", Verdict::Skipped, 0.0, ""});
    return rep;
}

}  // namespace sdr
