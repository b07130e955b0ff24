#include "sbv/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "core/error.hpp"
#include "core/textio.hpp"
#include "json.hpp"

namespace sdr {

Vec SbvField::trace(int cell, const Vec& x) const {
    Vec local = x - grid.cell_center(cell);
    Vec out = values[cell];
    const Mat& m = gradients[cell];
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out[i] += m.at(i, j) * local[j];
    return out;
}

SbvField make_field(const CubeGrid& grid, std::vector<Vec> values, std::vector<Mat> gradients) {
    const int n_cells = grid.cell_count();
    if (static_cast<int>(values.size()) != n_cells || static_cast<int>(gradients.size()) != n_cells)
        throw Error(ErrorKind::Argument, "make_field: affine data count does not match cell count");
    for (int c = 0; c < n_cells; ++c) {
        if (static_cast<int>(values[c].size()) != grid.target_dim)
            throw Error(ErrorKind::Dimension, "make_field: value dimension mismatch");
        if (gradients[c].rows != grid.target_dim || gradients[c].cols != grid.space_dim)
            throw Error(ErrorKind::Dimension, "make_field: gradient shape mismatch");
        if (!all_finite(values[c]) || !gradients[c].finite())
            throw Error(ErrorKind::Numeric, "make_field: non-finite affine data");
    }
    return SbvField{grid, std::move(values), std::move(gradients)};
}

SbvField affine_field(const CubeGrid& grid, const Mat& a, const Vec& offset) {
    if (a.rows != grid.target_dim || a.cols != grid.space_dim)
        throw Error(ErrorKind::Dimension, "affine_field: matrix shape mismatch");
    std::vector<Vec> values;
    std::vector<Mat> grads(grid.cell_count(), a);
    values.reserve(grid.cell_count());
    for (int c = 0; c < grid.cell_count(); ++c) values.push_back(offset + a.apply(grid.cell_center(c)));
    return make_field(grid, std::move(values), std::move(grads));
}

SbvField jump_datum_field(const CubeGrid& grid, const Vec& lambda, const Vec& theta) {
    if (static_cast<int>(lambda.size()) != grid.target_dim ||
        static_cast<int>(theta.size()) != grid.target_dim)
        throw Error(ErrorKind::Dimension, "jump_datum_field: datum dimension mismatch");
    if (grid.cells_per_side % 2 != 0)
        throw Error(ErrorKind::Argument,
                    "jump_datum_field: interface must lie on the facet skeleton (even n required)");
    std::vector<Vec> values(grid.cell_count());
    std::vector<Mat> grads(grid.cell_count(), Mat(grid.target_dim, grid.space_dim));
    for (int c = 0; c < grid.cell_count(); ++c) {
        double rel = grid.cell_center(c)[0] - grid.center[0];
        values[c] = rel > 0.0 ? lambda : theta;
    }
    return make_field(grid, std::move(values), std::move(grads));
}

SbvField field_axpby(double alpha, const SbvField& f, double beta, const SbvField& g) {
    if (!(f.grid == g.grid)) throw Error(ErrorKind::Argument, "field_axpby: grid mismatch");
    std::vector<Vec> values(f.cell_count());
    std::vector<Mat> grads(f.cell_count());
    for (int c = 0; c < f.cell_count(); ++c) {
        values[c] = alpha * f.values[c] + beta * g.values[c];
        grads[c] = alpha * f.gradients[c] + beta * g.gradients[c];
    }
    return make_field(f.grid, std::move(values), std::move(grads));
}

std::vector<FacetJump> jumps(const SbvField& u, double zero_tol) {
    std::vector<FacetJump> out;
    const double area = u.grid.facet_area();
    for (const auto& f : u.grid.interior_facets()) {
        Vec mid = u.grid.facet_midpoint(f);
        Vec jump = u.trace(f.upper_cell, mid) - u.trace(f.lower_cell, mid);
        if (norm(jump) <= zero_tol) continue;
        Vec nu(u.grid.space_dim, 0.0);
        nu[f.dir] = 1.0;
        out.push_back({f, std::move(mid), std::move(jump), std::move(nu), area});
    }
    return out;
}

double jump_total_variation(const SbvField& u) {
    double s = 0.0;
    for (const auto& j : jumps(u)) s += norm(j.jump) * j.area;
    return s;
}

namespace {

bool facet_in_box(const CubeGrid& g, const CubeGrid::Facet& f, const CellBox& box) {
    int i0, i1;
    g.cell_coords(f.lower_cell, i0, i1);
    return box.contains(i0, i1);
}

bool cell_in_box(const CubeGrid& g, int cell, const CellBox& box) {
    int i0, i1;
    g.cell_coords(cell, i0, i1);
    return box.contains(i0, i1);
}

}  // namespace

Mat gradient_integral(const SbvField& u, const CellBox& box) {
    Mat acc(u.grid.target_dim, u.grid.space_dim);
    const double vol = u.grid.cell_volume();
    for (int c = 0; c < u.cell_count(); ++c)
        if (cell_in_box(u.grid, c, box)) acc += vol * u.gradients[c];
    return acc;
}

Mat gradient_integral(const SbvField& u) { return gradient_integral(u, full_box(u.grid)); }

Mat jump_tensor_integral(const SbvField& u, const CellBox& box) {
    Mat acc(u.grid.target_dim, u.grid.space_dim);
    const double area = u.grid.facet_area();
    for (const auto& f : u.grid.interior_facets()) {
        // only facets strictly inside the box enter the decomposition
        if (!cell_in_box(u.grid, f.lower_cell, box) || !cell_in_box(u.grid, f.upper_cell, box))
            continue;
        Vec mid = u.grid.facet_midpoint(f);
        Vec jump = u.trace(f.upper_cell, mid) - u.trace(f.lower_cell, mid);
        for (int i = 0; i < acc.rows; ++i) acc.at(i, f.dir) += jump[i] * area;
    }
    return acc;
}

Mat boundary_flux(const SbvField& u, const CellBox& box) {
    // outer boundary of the box, facet by facet; midpoint rule is exact for
    // per-cell affine traces
    const CubeGrid& g = u.grid;
    Mat acc(g.target_dim, g.space_dim);
    const double w = g.cell_width();
    const double area = g.facet_area();
    auto add = [&](int cell, int dir, double sign) {
        Vec mid = g.cell_center(cell);
        mid[dir] += sign * w / 2.0;
        Vec tr = u.trace(cell, mid);
        for (int i = 0; i < acc.rows; ++i) acc.at(i, dir) += sign * tr[i] * area;
    };
    if (g.space_dim == 1) {
        add(box.lo0, 0, -1.0);
        add(box.hi0 - 1, 0, +1.0);
        return acc;
    }
    for (int i1 = box.lo1; i1 < box.hi1; ++i1) {
        add(g.cell_index(box.lo0, i1), 0, -1.0);
        add(g.cell_index(box.hi0 - 1, i1), 0, +1.0);
    }
    for (int i0 = box.lo0; i0 < box.hi0; ++i0) {
        add(g.cell_index(i0, box.lo1), 1, -1.0);
        add(g.cell_index(i0, box.hi1 - 1), 1, +1.0);
    }
    return acc;
}

double energy_in_box(const SbvField& u, const BulkDensity& w, const SurfaceDensity& psi,
                     const CellBox& box) {
    const CubeGrid& g = u.grid;
    if (w.space_dim != g.space_dim || w.target_dim != g.target_dim || psi.space_dim != g.space_dim ||
        psi.target_dim != g.target_dim)
        throw Error(ErrorKind::Dimension, "energy: density/field dimension mismatch");
    double bulk = 0.0;
    const double vol = g.cell_volume();
    for (int c = 0; c < u.cell_count(); ++c)
        if (cell_in_box(g, c, box)) bulk += eval_bulk(w, g.cell_center(c), u.gradients[c]) * vol;
    double surf = 0.0;
    const double area = g.facet_area();
    for (const auto& f : g.interior_facets()) {
        if (!facet_in_box(g, f, box)) continue;
        Vec mid = g.facet_midpoint(f);
        Vec jump = u.trace(f.upper_cell, mid) - u.trace(f.lower_cell, mid);
        if (norm(jump) == 0.0) continue;
        Vec nu(g.space_dim, 0.0);
        nu[f.dir] = 1.0;
        surf += eval_surface(psi, mid, jump, nu) * area;
    }
    return bulk + surf;
}

double energy(const SbvField& u, const BulkDensity& w, const SurfaceDensity& psi) {
    return energy_in_box(u, w, psi, full_box(u.grid));
}

namespace {

// integral of |a + b t| over [lo,hi], scalar affine
double abs_affine_1d(double a, double b, double lo, double hi) {
    auto prim = [&](double t) { return a * t + 0.5 * b * t * t; };
    if (b == 0.0) return std::fabs(a) * (hi - lo);
    double t0 = -a / b;
    if (t0 <= lo || t0 >= hi) return std::fabs(prim(hi) - prim(lo));
    return std::fabs(prim(t0) - prim(lo)) + std::fabs(prim(hi) - prim(t0));
}

// integral of a linear function over a convex polygon, exact
double linear_over_polygon(const std::vector<std::array<double, 2>>& poly,
                           double a, double b0, double b1) {
    double acc = 0.0;
    auto f = [&](const std::array<double, 2>& p) { return a + b0 * p[0] + b1 * p[1]; };
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const auto &p0 = poly[0], &p1 = poly[i], &p2 = poly[i + 1];
        double area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        acc += std::fabs(area2) / 2.0 * (f(p0) + f(p1) + f(p2)) / 3.0;
    }
    return acc;
}

// clip polygon against halfplane f >= 0
std::vector<std::array<double, 2>> clip_halfplane(const std::vector<std::array<double, 2>>& poly,
                                                  double a, double b0, double b1) {
    std::vector<std::array<double, 2>> out;
    auto f = [&](const std::array<double, 2>& p) { return a + b0 * p[0] + b1 * p[1]; };
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto &p = poly[i], &q = poly[(i + 1) % n];
        double fp = f(p), fq = f(q);
        if (fp >= 0.0) out.push_back(p);
        if ((fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0)) {
            double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

// integral of |a + b . y| over the rectangle [-w0/2,w0/2]x[-w1/2,w1/2]
double abs_affine_rect(double a, double b0, double b1, double w0, double w1) {
    if (b0 == 0.0 && b1 == 0.0) return std::fabs(a) * w0 * w1;
    std::vector<std::array<double, 2>> rect = {
        {-w0 / 2, -w1 / 2}, {w0 / 2, -w1 / 2}, {w0 / 2, w1 / 2}, {-w0 / 2, w1 / 2}};
    double total = a * w0 * w1;  // odd parts vanish on the centered rectangle
    auto pos = clip_halfplane(rect, a, b0, b1);
    double pos_int = pos.size() >= 3 ? linear_over_polygon(pos, a, b0, b1) : 0.0;
    return 2.0 * pos_int - total;
}

const int kGaussN = 24;
struct GaussTable {
    double node[kGaussN];
    double weight[kGaussN];
    GaussTable() {
        // Newton iteration on Legendre polynomials; nodes on [-1,1]
        for (int i = 0; i < kGaussN; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (kGaussN + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= kGaussN; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = kGaussN * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            node[i] = x;
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= kGaussN; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = kGaussN * (x * p1 - p0) / (x * x - 1.0);
            weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

const GaussTable& gauss_table() {
    static GaussTable t;
    return t;
}

}  // namespace

double l1_distance(const SbvField& a, const SbvField& b) {
    if (!(a.grid == b.grid)) throw Error(ErrorKind::Argument, "l1_distance: grid mismatch");
    const CubeGrid& g = a.grid;
    const int d = g.target_dim;
    const double w = g.cell_width();
    double acc = 0.0;
    for (int c = 0; c < a.cell_count(); ++c) {
        Vec dv = a.values[c] - b.values[c];
        Mat dm = a.gradients[c] - b.gradients[c];
        if (d == 1) {
            if (g.space_dim == 1)
                acc += abs_affine_1d(dv[0], dm.at(0, 0), -w / 2, w / 2);
            else
                acc += abs_affine_rect(dv[0], dm.at(0, 0), dm.at(0, 1), w, w);
            continue;
        }
        // d > 1: |affine vector|, Gauss-Legendre per cell
        const GaussTable& gt = gauss_table();
        if (g.space_dim == 1) {
            double s = 0.0;
            for (int q = 0; q < kGaussN; ++q) {
                double t = gt.node[q] * w / 2;
                double ssq = 0.0;
                for (int i = 0; i < d; ++i) {
                    double e = dv[i] + dm.at(i, 0) * t;
                    ssq += e * e;
                }
                s += gt.weight[q] * std::sqrt(ssq);
            }
            acc += s * w / 2;
        } else {
            double s = 0.0;
            for (int q0 = 0; q0 < kGaussN; ++q0)
                for (int q1 = 0; q1 < kGaussN; ++q1) {
                    double t0 = gt.node[q0] * w / 2, t1 = gt.node[q1] * w / 2;
                    double ssq = 0.0;
                    for (int i = 0; i < d; ++i) {
                        double e = dv[i] + dm.at(i, 0) * t0 + dm.at(i, 1) * t1;
                        ssq += e * e;
                    }
                    s += gt.weight[q0] * gt.weight[q1] * std::sqrt(ssq);
                }
            acc += s * w * w / 4;
        }
    }
    return acc;
}

double l1_norm(const SbvField& a) {
    SbvField zero = a;
    for (auto& v : zero.values) v.assign(v.size(), 0.0);
    for (auto& m : zero.gradients) m = Mat(m.rows, m.cols);
    return l1_distance(a, zero);
}

namespace {

// block structure of the m-partition; returns the field refined when m is a
// multiple of n, and the block edge in cells
std::pair<SbvField, int> blocks_for(const SbvField& u, int m) {
    int n = u.grid.cells_per_side;
    if (m < 1) throw Error(ErrorKind::Argument, "piecewise constant: m must be >= 1");
    if (n % m == 0) return {u, n / m};
    if (m % n == 0) return {refine(u, m / n), 1};
    throw Error(ErrorKind::Argument, "piecewise constant: m must divide n or be a multiple of it");
}

}  // namespace

SbvField piecewise_constant_approx(const SbvField& u, int m) {
    auto [fine, edge] = blocks_for(u, m);
    const CubeGrid& g = fine.grid;
    SbvField out = fine;
    for (auto& grad : out.gradients) grad = Mat(g.target_dim, g.space_dim);
    const int blocks1 = g.space_dim == 2 ? m : 1;
    const int edge1 = g.space_dim == 2 ? edge : 1;
    for (int b1 = 0; b1 < blocks1; ++b1)
        for (int b0 = 0; b0 < m; ++b0) {
            Vec avg(g.target_dim, 0.0);
            int count = 0;
            for (int i1 = b1 * edge1; i1 < (b1 + 1) * edge1; ++i1)
                for (int i0 = b0 * edge; i0 < (b0 + 1) * edge; ++i0) {
                    avg = avg + fine.values[g.cell_index(i0, i1)];
                    ++count;
                }
            avg = (1.0 / count) * avg;
            for (int i1 = b1 * edge1; i1 < (b1 + 1) * edge1; ++i1)
                for (int i0 = b0 * edge; i0 < (b0 + 1) * edge; ++i0)
                    out.values[g.cell_index(i0, i1)] = avg;
        }
    return out;
}

SbvField block_corner_constant(const SbvField& u, int m) {
    auto [fine, edge] = blocks_for(u, m);
    const CubeGrid& g = fine.grid;
    SbvField out = fine;
    for (auto& grad : out.gradients) grad = Mat(g.target_dim, g.space_dim);
    const int blocks1 = g.space_dim == 2 ? m : 1;
    const int edge1 = g.space_dim == 2 ? edge : 1;
    for (int b1 = 0; b1 < blocks1; ++b1)
        for (int b0 = 0; b0 < m; ++b0) {
            int anchor = g.cell_index(b0 * edge, g.space_dim == 2 ? b1 * edge1 : 0);
            Vec corner_value = fine.trace(anchor, g.lower_corner(anchor));
            for (int i1 = b1 * edge1; i1 < (b1 + 1) * edge1; ++i1)
                for (int i0 = b0 * edge; i0 < (b0 + 1) * edge; ++i0)
                    out.values[g.cell_index(i0, i1)] = corner_value;
        }
    return out;
}

SbvField discrete_alberti(const CubeGrid& grid, const std::vector<Mat>& target_gradients) {
    if (static_cast<int>(target_gradients.size()) != grid.cell_count())
        throw Error(ErrorKind::Argument, "discrete_alberti: target count mismatch");
    std::vector<Vec> values(grid.cell_count(), Vec(grid.target_dim, 0.0));
    return make_field(grid, std::move(values), target_gradients);
}

double alberti_constant(const CubeGrid& grid) { return static_cast<double>(grid.space_dim); }

SbvField refine(const SbvField& u, int factor) {
    if (factor < 1) throw Error(ErrorKind::Argument, "refine: factor must be >= 1");
    if (factor == 1) return u;
    const CubeGrid& g = u.grid;
    CubeGrid fine = g;
    fine.cells_per_side = g.cells_per_side * factor;
    std::vector<Vec> values(fine.cell_count());
    std::vector<Mat> grads(fine.cell_count());
    for (int c = 0; c < fine.cell_count(); ++c) {
        int i0, i1;
        fine.cell_coords(c, i0, i1);
        int parent = g.cell_index(i0 / factor, g.space_dim == 2 ? i1 / factor : 0);
        values[c] = u.trace(parent, fine.cell_center(c));
        grads[c] = u.gradients[parent];
    }
    return make_field(fine, std::move(values), std::move(grads));
}

SbvField resample_to(const SbvField& u, int n_target) {
    int n = u.grid.cells_per_side;
    if (n_target % n != 0)
        throw Error(ErrorKind::Argument, "resample_to: target n must be a multiple of the field's n");
    return refine(u, n_target / n);
}

std::string MomentTest::label() const {
    if (kind == Kind::Monomial)
        return "mono(" + std::to_string(e0) + "," + std::to_string(e1) + ")";
    return "box(l" + std::to_string(level) + "," + std::to_string(j0) + "," + std::to_string(j1) + ")";
}

std::vector<MomentTest> standard_moment_tests(int space_dim) {
    std::vector<MomentTest> out;
    for (int e0 = 0; e0 <= 2; ++e0)
        for (int e1 = 0; e1 <= 2 - e0; ++e1) {
            if (space_dim == 1 && e1 > 0) continue;
            MomentTest t;
            t.kind = MomentTest::Kind::Monomial;
            t.e0 = e0;
            t.e1 = e1;
            out.push_back(t);
        }
    for (int level = 0; level <= 2; ++level) {
        int k = 1 << level;
        for (int j1 = 0; j1 < (space_dim == 2 ? k : 1); ++j1)
            for (int j0 = 0; j0 < k; ++j0) {
                MomentTest t;
                t.kind = MomentTest::Kind::DyadicBox;
                t.level = level;
                t.j0 = j0;
                t.j1 = j1;
                out.push_back(t);
            }
    }
    return out;
}

namespace {

double monomial_integral_1d(double a, double b, int e) {
    return (std::pow(b, e + 1) - std::pow(a, e + 1)) / (e + 1);
}

double overlap(double lo1, double hi1, double lo2, double hi2) {
    return std::max(0.0, std::min(hi1, hi2) - std::max(lo1, lo2));
}

}  // namespace

Mat moment_pairing(const CubeGrid& grid, const std::vector<Mat>& cell_field,
                   const MomentTest& test) {
    if (static_cast<int>(cell_field.size()) != grid.cell_count())
        throw Error(ErrorKind::Argument, "moment_pairing: field count mismatch");
    if (test.kind == MomentTest::Kind::Monomial && test.e0 + test.e1 > 2)
        throw Error(ErrorKind::Argument, "moment_pairing: unsupported monomial degree");
    if (test.kind == MomentTest::Kind::DyadicBox && (test.level < 0 || test.level > 2))
        throw Error(ErrorKind::Argument, "moment_pairing: unsupported dyadic level");
    Mat acc(grid.target_dim, grid.space_dim);
    const double w = grid.cell_width();
    Vec cube_lo = grid.cube_lower_corner();
    for (int c = 0; c < grid.cell_count(); ++c) {
        Vec lo = grid.lower_corner(c);
        double weight = 1.0;
        if (test.kind == MomentTest::Kind::Monomial) {
            weight = monomial_integral_1d(lo[0], lo[0] + w, test.e0);
            if (grid.space_dim == 2) weight *= monomial_integral_1d(lo[1], lo[1] + w, test.e1);
        } else {
            double bw = grid.side / (1 << test.level);
            double b0lo = cube_lo[0] + test.j0 * bw;
            weight = overlap(lo[0], lo[0] + w, b0lo, b0lo + bw);
            if (grid.space_dim == 2) {
                double b1lo = cube_lo[1] + test.j1 * bw;
                weight *= overlap(lo[1], lo[1] + w, b1lo, b1lo + bw);
            }
        }
        if (weight != 0.0) acc += weight * cell_field[c];
    }
    return acc;
}

std::string field_to_json(const SbvField& u) {
    nlohmann::json j;
    const CubeGrid& g = u.grid;
    j["grid"] = {{"N", g.space_dim},       {"d", g.target_dim}, {"n", g.cells_per_side},
                 {"center", g.center},     {"side", g.side},    {"nu", g.normal}};
    nlohmann::json values = nlohmann::json::array();
    nlohmann::json grads = nlohmann::json::array();
    for (int c = 0; c < u.cell_count(); ++c) {
        for (double v : u.values[c]) values.push_back(v);
        for (double e : u.gradients[c].a) grads.push_back(e);
    }
    j["values"] = std::move(values);
    j["gradients"] = std::move(grads);
    return j.dump();
}

SbvField field_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("field JSON: ") + e.what());
    }
    try {
        const auto& jg = j.at("grid");
        CubeGrid g = make_grid(jg.at("N").get<int>(), jg.at("d").get<int>(), jg.at("n").get<int>(),
                               jg.at("center").get<Vec>(), jg.at("side").get<double>(),
                               jg.at("nu").get<Vec>());
        std::vector<double> values = j.at("values").get<std::vector<double>>();
        std::vector<double> grads = j.at("gradients").get<std::vector<double>>();
        const int n_cells = g.cell_count(), d = g.target_dim, N = g.space_dim;
        if (static_cast<int>(values.size()) != n_cells * d ||
            static_cast<int>(grads.size()) != n_cells * d * N)
            throw Error(ErrorKind::Parse, "field JSON: flat array lengths do not match the grid");
        std::vector<Vec> vv(n_cells, Vec(d));
        std::vector<Mat> gg(n_cells, Mat(d, N));
        for (int c = 0; c < n_cells; ++c) {
            for (int i = 0; i < d; ++i) vv[c][i] = values[c * d + i];
            for (int i = 0; i < d * N; ++i) gg[c].a[i] = grads[c * d * N + i];
        }
        return make_field(g, std::move(vv), std::move(gg));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("field JSON: ") + e.what());
    }
}

}  // namespace sdr
