#include "causalpanel/matrix.hpp"
#include "causalpanel/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace causalpanel;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * (rng.uniform() * 2.0 - 1.0);
    return m;
}

} // namespace

TEST_CASE("parallel kernels match the serial reference bitwise") {
    Rng rng(7);
    for (const auto& [m, k, n] :
         {std::array<std::size_t, 3>{3, 4, 5}, {40, 12, 12}, {200, 64, 33}, {1, 7, 1}}) {
        const Matrix a = random_matrix(m, k, rng);
        const Matrix b = random_matrix(k, n, rng);
        CHECK(matmul(a, b) == serial::matmul(a, b));
        const Matrix c = random_matrix(m, n, rng);
        CHECK(matmul_transposed_a(a, c) == serial::matmul_transposed_a(a, c));
        const Matrix d = random_matrix(m, k, rng);
        CHECK(hadamard(a, d) == serial::hadamard(a, d));
        CHECK(subtract(a, d) == serial::subtract(a, d));
    }
}

TEST_CASE("matmul simple values") {
    Matrix a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = 2;
    a(1, 0) = 3;
    a(1, 1) = 4;
    const Matrix b = matmul(a, a);
    CHECK(b(0, 0) == 7);
    CHECK(b(0, 1) == 10);
    CHECK(b(1, 0) == 15);
    CHECK(b(1, 1) == 22);
}

TEST_CASE("lu_solve recovers solutions") {
    Rng rng(11);
    const std::size_t n = 9;
    Matrix a = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 4.0; // keep it well conditioned
    const Matrix x_true = random_matrix(n, 3, rng);
    const Matrix b = matmul(a, x_true);
    const Matrix x = lu_solve(a, b);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(x.data()[i] == doctest::Approx(x_true.data()[i]).epsilon(1e-9));
}

TEST_CASE("expm of the zero matrix is the identity") {
    const Matrix e = expm(Matrix(4, 4));
    CHECK(e == Matrix::identity(4));
}

TEST_CASE("expm matches the Taylor oracle on random matrices") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        const Matrix a = random_matrix(n, n, rng, 1.5);
        const Matrix fast = expm(a);
        const Matrix slow = oracles::expm_taylor(a, 60);
        CHECK(oracles::max_relative_error(fast, slow) < 1e-12);
    }
}

TEST_CASE("expm handles norms beyond the scaling threshold") {
    Rng rng(31);
    const Matrix a = random_matrix(6, 6, rng, 3.0); // one-norm well above theta13
    const Matrix fast = expm(a);
    const Matrix slow = oracles::expm_taylor(a, 120);
    CHECK(oracles::max_relative_error(fast, slow) < 1e-10);
}
