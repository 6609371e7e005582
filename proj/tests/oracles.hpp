#pragma once

// Independent reference implementations used only by tests. Each one checks a
// production path by a different route, so keep them free of library calls
// into the code they verify.

#include "causalpanel/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

using causalpanel::Matrix;

// Truncated Taylor series for exp(A); enough terms for the small norms the
// tests use.
inline Matrix expm_taylor(const Matrix& a, int terms = 50) {
    const std::size_t n = a.rows();
    Matrix sum = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= terms; ++k) {
        term = causalpanel::serial::matmul(term, a);
        for (std::size_t i = 0; i < term.size(); ++i)
            term.data()[i] /= static_cast<double>(k);
        for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += term.data()[i];
    }
    return sum;
}

// Central finite differences of a scalar function of a matrix.
inline Matrix central_difference_gradient(const std::function<double(const Matrix&)>& f,
                                          const Matrix& at, double step) {
    Matrix grad(at.rows(), at.cols());
    Matrix probe = at;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double saved = probe.data()[i];
        probe.data()[i] = saved + step;
        const double hi = f(probe);
        probe.data()[i] = saved - step;
        const double lo = f(probe);
        probe.data()[i] = saved;
        grad.data()[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

inline double max_relative_error(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(1.0, std::abs(a.data()[i]));
        const double err = std::abs(a.data()[i] - b.data()[i]) / denom;
        if (err > worst) worst = err;
    }
    return worst;
}

// O(P*N) AUROC by explicit pair counting; ties count one half.
inline double pair_count_auroc(const std::vector<double>& scores,
                               const std::vector<int>& labels) {
    double numerator = 0.0;
    double positives = 0.0;
    double negatives = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0) {
            positives += 1.0;
            continue;
        }
        negatives += 1.0;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j])
                numerator += 1.0;
            else if (scores[i] == scores[j])
                numerator += 0.5;
        }
    }
    return numerator / (positives * negatives);
}

// Ordinary least squares slope of y on x (no intercept handling: centered
// inputs expected where it matters).
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(x.size());
    const double my = sy / static_cast<double>(y.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(x.size());
    const double my = sy / static_cast<double>(y.size());
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        dx += (x[i] - mx) * (x[i] - mx);
        dy += (y[i] - my) * (y[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

} // namespace oracles
