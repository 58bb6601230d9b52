#include "dense.hpp"

#include <cmath>
#include <stdexcept>

namespace lomaq {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void matvec(const Dense2D &w, std::span<const double> x, std::vector<double> &out) {
    out.assign(static_cast<size_t>(w.rows), 0.0);
    const double *row = w.data.data();
    for (int i = 0; i < w.rows; ++i, row += w.cols) {
        double s = 0.0;
        for (int j = 0; j < w.cols; ++j)
            s += row[j] * x[j];
        out[i] = s;
    }
}

void matvec_transpose(const Dense2D &w, std::span<const double> x, std::vector<double> &out) {
    out.assign(static_cast<size_t>(w.cols), 0.0);
    const double *row = w.data.data();
    for (int i = 0; i < w.rows; ++i, row += w.cols) {
        const double xi = x[i];
        for (int j = 0; j < w.cols; ++j)
            out[j] += row[j] * xi;
    }
}

void add_outer(Dense2D &a, std::span<const double> x, std::span<const double> y, double scale) {
    double *row = a.data.data();
    for (int i = 0; i < a.rows; ++i, row += a.cols) {
        const double xi = scale * x[i];
        for (int j = 0; j < a.cols; ++j)
            row[j] += xi * y[j];
    }
}

double quad_form(const Dense2D &a, std::span<const double> x) {
    double s = 0.0;
    const double *row = a.data.data();
    for (int i = 0; i < a.rows; ++i, row += a.cols) {
        double r = 0.0;
        for (int j = 0; j < a.cols; ++j)
            r += row[j] * x[j];
        s += x[i] * r;
    }
    return s;
}

Dense2D spd_inverse(const Dense2D &a) {
    if (a.rows != a.cols)
        throw std::runtime_error("spd_inverse: matrix not square");
    const int n = a.rows;
    // lower-triangular Cholesky factor
    Dense2D l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0)
                    throw std::runtime_error("spd_inverse: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    // invert by solving L L^T z = e_k column by column
    Dense2D inv(n, n);
    std::vector<double> y(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            double s = (i == k) ? 1.0 : 0.0;
            for (int j = 0; j < i; ++j)
                s -= l(i, j) * y[j];
            y[i] = s / l(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int j = i + 1; j < n; ++j)
                s -= l(j, i) * inv(j, k);
            inv(i, k) = s / l(i, i);
        }
    }
    return inv;
}

double symmetric_min_eigenvalue(const Dense2D &a) {
    if (a.rows != a.cols)
        throw std::runtime_error("symmetric_min_eigenvalue: matrix not square");
    const int n = a.rows;
    Dense2D m = a;
    // cyclic Jacobi rotations
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off += m(p, q) * m(p, q);
        if (off < 1e-24)
            break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(m(p, q)) < 1e-18)
                    continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    double lo = m(0, 0);
    for (int i = 1; i < n; ++i)
        lo = std::min(lo, m(i, i));
    return lo;
}

} // namespace lomaq
