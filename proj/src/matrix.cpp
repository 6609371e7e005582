#include "causalpanel/matrix.hpp"

#include "causalpanel/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace causalpanel {

namespace {

// Below this many multiply-adds the parallel region costs more than it saves.
constexpr std::size_t kParallelFlopThreshold = 1u << 16;

void check_mul_shapes(const Matrix& a, const Matrix& b, bool trans_a) {
    const std::size_t inner = trans_a ? a.rows() : a.cols();
    if (inner != b.rows())
        throw DimensionMismatch("matmul " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + (trans_a ? "^T" : "") + " * " +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const std::size_t k = a.cols();
    const std::size_t n = b.cols();
    const double* arow = a.data() + i * k;
    double* orow = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) orow[j] = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        const double av = arow[l];
        const double* brow = b.data() + l * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
}

// One output row of a^T * b: out(i, :) = sum_l a(l, i) * b(l, :).
inline void matmul_ta_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
    const std::size_t m = a.rows();
    const std::size_t n = b.cols();
    double* orow = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) orow[j] = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
        const double av = a(l, i);
        const double* brow = b.data() + l * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
}

} // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a, b, false);
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
    return out;
}

Matrix matmul_transposed_a(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a, b, true);
    Matrix out(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) matmul_ta_row(a, b, out, i);
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("hadamard on mismatched shapes");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("subtract on mismatched shapes");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    return out;
}

} // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a, b, false);
    Matrix out(a.rows(), b.cols());
    const std::size_t flops = a.rows() * a.cols() * b.cols();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (flops > kParallelFlopThreshold)
#endif
    for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
    (void)flops;
    return out;
}

Matrix matmul_transposed_a(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a, b, true);
    Matrix out(a.cols(), b.cols());
    const std::size_t flops = a.rows() * a.cols() * b.cols();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (flops > kParallelFlopThreshold)
#endif
    for (std::size_t i = 0; i < a.cols(); ++i) matmul_ta_row(a, b, out, i);
    (void)flops;
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("hadamard on mismatched shapes");
    Matrix out(a.rows(), a.cols());
    const std::size_t n = a.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > kParallelFlopThreshold)
#endif
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("subtract on mismatched shapes");
    Matrix out(a.rows(), a.cols());
    const std::size_t n = a.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > kParallelFlopThreshold)
#endif
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * s;
    return out;
}

double trace(const Matrix& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.rows() && i < a.cols(); ++i) t += a(i, i);
    return t;
}

double frobenius_norm_sq(const Matrix& a) {
    // Fixed-order serial reduction keeps the value thread-count independent.
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return s;
}

double one_norm(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) col += std::abs(a(i, j));
        if (col > best) best = col;
    }
    return best;
}

double max_abs(const Matrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = std::abs(a.data()[i]);
        if (v > best) best = v;
    }
    return best;
}

bool all_finite(const Matrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a.data()[i])) return false;
    return true;
}

Matrix lu_solve(Matrix a, Matrix b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n) throw DimensionMismatch("lu_solve shapes");

    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0) throw DimensionMismatch("lu_solve: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            a(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    // Back substitution. Exact division keeps clean cases (zero and strictly
    // triangular inputs to expm) bit-exact on the diagonal.
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double v = b(kk, j);
            for (std::size_t l = kk + 1; l < n; ++l) v -= a(kk, l) * b(l, j);
            b(kk, j) = v / a(kk, kk);
        }
    }
    return b;
}

Matrix expm(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("expm needs a square matrix");

    // Degree-13 Pade coefficients and its validity radius (Higham 2005).
    static const double b13[] = {64764752532480000.0,
                                 32382376266240000.0,
                                 7771770303897600.0,
                                 1187353796428800.0,
                                 129060195264000.0,
                                 10559470521600.0,
                                 670442572800.0,
                                 33522128640.0,
                                 1323241920.0,
                                 40840800.0,
                                 960960.0,
                                 16380.0,
                                 182.0,
                                 1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm = one_norm(a);
    int squarings = 0;
    Matrix scaled = a;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        scaled = scale(a, std::ldexp(1.0, -squarings));
    }

    const Matrix ident = Matrix::identity(n);
    const Matrix a2 = matmul(scaled, scaled);
    const Matrix a4 = matmul(a2, a2);
    const Matrix a6 = matmul(a4, a2);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    // V =    A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    auto combo = [&](double c6, double c4, double c2, double c0) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < m.size(); ++i)
            m.data()[i] = c6 * a6.data()[i] + c4 * a4.data()[i] + c2 * a2.data()[i] +
                          c0 * ident.data()[i];
        return m;
    };
    Matrix u = matmul(a6, combo(b13[13], b13[11], b13[9], 0.0));
    {
        const Matrix low = combo(b13[7], b13[5], b13[3], b13[1]);
        for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] += low.data()[i];
    }
    u = matmul(scaled, u);
    Matrix v = matmul(a6, combo(b13[12], b13[10], b13[8], 0.0));
    {
        const Matrix low = combo(b13[6], b13[4], b13[2], b13[0]);
        for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] += low.data()[i];
    }

    // r = (V - U)^{-1} (V + U)
    Matrix vmu = subtract(v, u);
    Matrix vpu(n, n);
    for (std::size_t i = 0; i < vpu.size(); ++i) vpu.data()[i] = v.data()[i] + u.data()[i];
    Matrix r = lu_solve(std::move(vmu), std::move(vpu));

    for (int s = 0; s < squarings; ++s) r = matmul(r, r);
    return r;
}

} // namespace causalpanel
