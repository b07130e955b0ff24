#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "core/error.hpp"

namespace sdr {

// Dense vector in R^d. Dimensions stay tiny (d <= 4 in practice), so a
// std::vector backing keeps the interface simple.
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::Dimension, "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(Vec a, const Vec& b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::Dimension, "vec+: size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::Dimension, "vec-: size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double t, Vec a) {
    for (auto& x : a) x *= t;
    return a;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

// Dense rows x cols matrix, row-major. Used for gradients in R^{d x N}.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}
    Mat(int r, int c, std::initializer_list<double> vals) : rows(r), cols(c), a(vals) {
        if (static_cast<int>(a.size()) != r * c)
            throw Error(ErrorKind::Dimension, "Mat: initializer size mismatch");
    }

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    Mat& operator+=(const Mat& o) {
        if (!same_shape(o)) throw Error(ErrorKind::Dimension, "Mat+=: shape mismatch");
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        if (!same_shape(o)) throw Error(ErrorKind::Dimension, "Mat-=: shape mismatch");
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat& operator*=(double t) {
        for (auto& x : a) x *= t;
        return *this;
    }

    friend Mat operator+(Mat m, const Mat& o) { return m += o; }
    friend Mat operator-(Mat m, const Mat& o) { return m -= o; }
    friend Mat operator*(double t, Mat m) { return m *= t; }

    // Frobenius norm, the matrix norm used throughout.
    double norm() const {
        double s = 0.0;
        for (double x : a) s += x * x;
        return std::sqrt(s);
    }

    bool finite() const {
        for (double x : a)
            if (!std::isfinite(x)) return false;
        return true;
    }

    // y = M x
    Vec apply(const Vec& x) const {
        if (static_cast<int>(x.size()) != cols)
            throw Error(ErrorKind::Dimension, "Mat::apply: size mismatch");
        Vec y(rows, 0.0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) y[i] += at(i, j) * x[j];
        return y;
    }

    Vec col(int j) const {
        Vec c(rows);
        for (int i = 0; i < rows; ++i) c[i] = at(i, j);
        return c;
    }
    void set_col(int j, const Vec& c) {
        for (int i = 0; i < rows; ++i) at(i, j) = c[i];
    }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

inline Mat outer(const Vec& u, const Vec& v) {
    Mat m(static_cast<int>(u.size()), static_cast<int>(v.size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = u[i] * v[j];
    return m;
}

// Product M R for an N x N frame rotation R.
inline Mat mat_mul(const Mat& m, const Mat& r) {
    if (m.cols != r.rows) throw Error(ErrorKind::Dimension, "mat_mul: shape mismatch");
    Mat out(m.rows, r.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < r.cols; ++j) {
            double s = 0.0;
            for (int k = 0; k < m.cols; ++k) s += m.at(i, k) * r.at(k, j);
            out.at(i, j) = s;
        }
    return out;
}

inline Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

}  // namespace sdr
