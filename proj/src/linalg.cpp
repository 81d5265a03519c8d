#include "pdmp/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmp::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (x.size() != m.n) throw std::invalid_argument("matvec: size mismatch");
    std::vector<double> y(m.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Matrix cholesky(const Matrix& spd) {
    const std::size_t n = spd.n;
    Matrix L(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
                L(i, i) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return L;
}

std::vector<double> forward_solve(const Matrix& lower, const std::vector<double>& b) {
    const std::size_t n = lower.n;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * x[k];
        x[i] = s / lower(i, i);
    }
    return x;
}

std::vector<double> backward_solve_transposed(const Matrix& lower, const std::vector<double>& b) {
    const std::size_t n = lower.n;
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * x[k];
        x[ii] = s / lower(ii, ii);
    }
    return x;
}

Matrix spd_inverse(const Matrix& spd) {
    const Matrix L = cholesky(spd);
    const std::size_t n = spd.n;
    Matrix inv(n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto col = backward_solve_transposed(L, forward_solve(L, e));
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    // Symmetrize away round-off.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = inv(j, i) = m;
        }
    return inv;
}

EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tol) {
    const std::size_t n = symmetric.n;
    Matrix a = symmetric;
    Matrix v = Matrix::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    scale = std::max(scale, off_norm());
    if (scale == 0.0) scale = 1.0;

    for (int sweep = 0; sweep < 100 && off_norm() > tol * scale; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenDecomposition out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
    out.vectors = std::move(v);
    return out;
}

Matrix symmetric_power(const Matrix& spd, double exponent) {
    const auto eig = jacobi_eigen(spd);
    const std::size_t n = spd.n;
    std::vector<double> powered(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (eig.values[i] <= 0.0)
            throw std::runtime_error("symmetric_power: non-positive eigenvalue");
        powered[i] = std::pow(eig.values[i], exponent);
    }
    Matrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += eig.vectors(i, k) * powered[k] * eig.vectors(j, k);
            out(i, j) = s;
        }
    return out;
}

double spectral_norm(const Matrix& symmetric, double rel_tol) {
    const std::size_t n = symmetric.n;
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        auto y = matvec(symmetric, x);
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (auto& v : y) v /= norm;
        const double prev = lambda;
        lambda = norm;
        x = std::move(y);
        if (it > 2 && std::abs(lambda - prev) <= rel_tol * lambda) break;
    }
    return lambda;
}

double max_abs_row_sum(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

} // namespace pdmp::linalg
