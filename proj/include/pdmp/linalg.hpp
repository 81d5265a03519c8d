// Small dense linear algebra helpers for the desk-scale dimensions used
// here (d <= 32): Cholesky factorization, SPD inversion, symmetric
// eigendecomposition, and spectral norms via power iteration.

#pragma once

#include <cstddef>
#include <vector>

namespace pdmp::linalg {

// Row-major square matrix.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(std::size_t n_) : n(n_), a(n_ * n_, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static Matrix identity(std::size_t n);
};

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

// Lower-triangular Cholesky factor of an SPD matrix; throws on failure.
Matrix cholesky(const Matrix& spd);

// Inverse of an SPD matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& spd);

// x = L y forward solve and L^T x = y backward solve with L lower-triangular.
std::vector<double> forward_solve(const Matrix& lower, const std::vector<double>& b);
std::vector<double> backward_solve_transposed(const Matrix& lower, const std::vector<double>& b);

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations:
// m = V diag(values) V^T, V orthogonal with eigenvectors in columns.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors;
};
EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tol = 1e-13);

// Symmetric p-th power (p may be fractional/negative) through the
// eigendecomposition; all eigenvalues must be positive.
Matrix symmetric_power(const Matrix& spd, double exponent);

// Largest eigenvalue magnitude of a symmetric matrix by power iteration to
// the requested relative tolerance.
double spectral_norm(const Matrix& symmetric, double rel_tol = 1e-10);

double max_abs_row_sum(const Matrix& m);

} // namespace pdmp::linalg
