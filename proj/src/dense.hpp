#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lomaq {

/// Row-major dense matrix of doubles.
struct Dense2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Dense2D() = default;
    Dense2D(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double &operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    static Dense2D identity(int n, double scale = 1.0) {
        Dense2D m(n, n);
        for (int i = 0; i < n; ++i)
            m(i, i) = scale;
        return m;
    }
};

double dot(std::span<const double> a, std::span<const double> b);

// out = W x
void matvec(const Dense2D &w, std::span<const double> x, std::vector<double> &out);

// out = W^T x
void matvec_transpose(const Dense2D &w, std::span<const double> x, std::vector<double> &out);

// a += scale * x y^T
void add_outer(Dense2D &a, std::span<const double> x, std::span<const double> y, double scale = 1.0);

// x^T A x for square A
double quad_form(const Dense2D &a, std::span<const double> x);

// Cholesky-based inverse of a symmetric positive definite matrix.
// Throws std::runtime_error if the factorization breaks down.
Dense2D spd_inverse(const Dense2D &a);

// Smallest eigenvalue of a symmetric matrix (Jacobi sweep; for test-sized d).
double symmetric_min_eigenvalue(const Dense2D &a);

} // namespace lomaq
