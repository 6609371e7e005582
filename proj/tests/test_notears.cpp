#include "causalpanel/notears.hpp"

#include "causalpanel/errors.hpp"
#include "causalpanel/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace causalpanel;
using notears::acyclicity_h;
using notears::squared_loss;

namespace {

Matrix random_weights(std::size_t n, Rng& rng, double scale) {
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) w(i, j) = scale * (rng.uniform() * 2.0 - 1.0);
    return w;
}

std::vector<std::string> labels_for(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(i + 1));
    return out;
}

Matrix center_columns(Matrix x) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, c);
        mean /= static_cast<double>(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) x(r, c) -= mean;
    }
    return x;
}

} // namespace

TEST_CASE("acyclicity_h is zero for the zero matrix and triangular matrices") {
    CHECK(acyclicity_h(Matrix(5, 5)).value == 0.0);

    Rng rng(3);
    Matrix upper(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) upper(i, j) = rng.uniform(-2.0, 2.0);
    CHECK(std::abs(acyclicity_h(upper).value) < 1e-12);
}

TEST_CASE("acyclicity_h of the unit two-cycle equals 2 cosh(1) - 2") {
    Matrix w(2, 2);
    w(0, 1) = 1.0;
    w(1, 0) = 1.0;
    const double got = acyclicity_h(w).value;
    CHECK(got == doctest::Approx(2.0 * std::cosh(1.0) - 2.0).epsilon(1e-12));

    // Cross-check against the series oracle.
    const Matrix e = oracles::expm_taylor(hadamard(w, w), 50);
    const double want = e(0, 0) + e(1, 1) - 2.0;
    CHECK(std::abs(got - want) < 1e-9);
}

TEST_CASE("acyclicity_h is invariant under simultaneous row/column permutation") {
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 3);
        const Matrix w = random_weights(n, rng, 0.8);
        const auto perm = rng.permutation(static_cast<int>(n));
        Matrix p(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                p(static_cast<std::size_t>(perm[i]), static_cast<std::size_t>(perm[j])) =
                    w(i, j);
        CHECK(std::abs(acyclicity_h(w).value - acyclicity_h(p).value) < 1e-10);
    }
}

TEST_CASE("squared_loss value on simple fixtures") {
    Rng rng(5);
    Matrix x(10, 3);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);

    const auto at_zero = squared_loss(Matrix(3, 3), x);
    CHECK(at_zero.value ==
          doctest::Approx(frobenius_norm_sq(x) / (2.0 * 10.0)).epsilon(1e-14));

    // Second column exactly twice the first; w12 = 2 zeroes that residual.
    Matrix x2(8, 2);
    for (std::size_t r = 0; r < 8; ++r) {
        x2(r, 0) = rng.uniform(-1.0, 1.0);
        x2(r, 1) = 2.0 * x2(r, 0);
    }
    Matrix w(2, 2);
    w(0, 1) = 2.0;
    double col1_only = 0.0;
    for (std::size_t r = 0; r < 8; ++r) col1_only += x2(r, 0) * x2(r, 0);
    CHECK(squared_loss(w, x2).value == doctest::Approx(col1_only / (2.0 * 8.0)));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(29);
    const std::size_t n = 6, m = 40;
    Matrix x(m, n);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);

    for (int point = 0; point < 20; ++point) {
        const Matrix w = random_weights(n, rng, 0.7);

        const Matrix h_grad = acyclicity_h(w).gradient;
        const Matrix h_fd = oracles::central_difference_gradient(
            [](const Matrix& v) { return acyclicity_h(v).value; }, w, 1e-5);
        CHECK(oracles::max_relative_error(h_grad, h_fd) < 1e-6);

        const Matrix l_grad = squared_loss(w, x).gradient;
        const Matrix l_fd = oracles::central_difference_gradient(
            [&](const Matrix& v) { return squared_loss(v, x).value; }, w, 1e-5);
        CHECK(oracles::max_relative_error(l_grad, l_fd) < 1e-6);
    }
}

TEST_CASE("learn_structure recovers a two-variable regression direction") {
    // x2 = 2 x1 + eps. OLS in both directions confirms the asymmetry the
    // solver should find.
    Rng rng(41);
    const int m = 1000;
    Matrix x(static_cast<std::size_t>(m), 2);
    std::vector<double> col1(m), col2(m);
    for (int r = 0; r < m; ++r) {
        col1[static_cast<std::size_t>(r)] = rng.normal();
        col2[static_cast<std::size_t>(r)] = 2.0 * col1[static_cast<std::size_t>(r)] + rng.normal();
        x(static_cast<std::size_t>(r), 0) = col1[static_cast<std::size_t>(r)];
        x(static_cast<std::size_t>(r), 1) = col2[static_cast<std::size_t>(r)];
    }
    const double forward = oracles::ols_slope(col1, col2);
    const double backward = oracles::ols_slope(col2, col1);
    CHECK(forward == doctest::Approx(2.0).epsilon(0.1));
    CHECK(backward < 0.6); // the reverse regression shrinks toward 2/5

    notears::OptimizerOptions opts;
    opts.lambda1 = 0.01;
    const auto x_centered = center_columns(x);

    const auto res = notears::learn_structure(x_centered, labels_for(2), {}, opts);
    CHECK(res.converged);
    CHECK(res.w.values(0, 1) == doctest::Approx(2.0).epsilon(0.075));
    CHECK(std::abs(res.w.values(1, 0)) < opts.omega);

    SUBCASE("forbidding the true edge flips the discovered direction") {
        notears::EdgeConstraintMask mask;
        mask.forbidden.insert({0, 1});
        const auto blocked = notears::learn_structure(x_centered, labels_for(2), mask, opts);
        CHECK(blocked.w.values(0, 1) == 0.0);
        CHECK(std::abs(blocked.w.values(1, 0)) > opts.omega);
    }
}

TEST_CASE("learn_structure finds no edges in independent noise") {
    int clean_runs = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Matrix x(2000, 5);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

        if (seed == 1) {
            std::vector<double> a(2000), b(2000);
            for (std::size_t r = 0; r < 2000; ++r) {
                a[r] = x(r, 0);
                b[r] = x(r, 3);
            }
            CHECK(std::abs(oracles::pearson(a, b)) < 0.1);
        }

        notears::OptimizerOptions opts;
        opts.lambda1 = 0.1;
        const auto res = notears::learn_structure(center_columns(x), labels_for(5), {}, opts);
        const auto dag = notears::threshold_to_dag(res.w, opts.omega);
        if (dag.edges.empty()) ++clean_runs;
    }
    CHECK(clean_runs >= 9);
}

TEST_CASE("learn_structure trace is monotone: h shrinks or rho grows") {
    Rng rng(59);
    Matrix x(200, 4);
    for (std::size_t r = 0; r < 200; ++r) {
        const double a = rng.normal();
        const double b = 1.5 * a + rng.normal();
        const double c = -1.2 * b + rng.normal();
        const double d = 0.8 * a + 0.5 * c + rng.normal();
        x(r, 0) = a;
        x(r, 1) = b;
        x(r, 2) = c;
        x(r, 3) = d;
    }
    const auto res = notears::learn_structure(center_columns(x), labels_for(4), {},
                                              notears::OptimizerOptions{});
    REQUIRE(res.trace.size() >= 1);
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
        const bool h_down = res.trace[i].h < res.trace[i - 1].h;
        const bool rho_up = res.trace[i].rho > res.trace[i - 1].rho;
        CHECK((h_down || rho_up));
    }
}

TEST_CASE("learn_structure is deterministic") {
    Rng rng(73);
    Matrix x(300, 4);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto a = notears::learn_structure(x, labels_for(4), {}, {});
    const auto b = notears::learn_structure(x, labels_for(4), {}, {});
    CHECK(a.w.values == b.w.values);
}

TEST_CASE("masked entries stay exactly zero") {
    Rng rng(83);
    Matrix x(400, 4);
    for (std::size_t r = 0; r < 400; ++r) {
        const double a = rng.normal();
        const double b = 1.8 * a + rng.normal();
        x(r, 0) = a;
        x(r, 1) = b;
        x(r, 2) = 0.9 * b + rng.normal();
        x(r, 3) = rng.normal();
    }
    notears::EdgeConstraintMask mask;
    mask.forbidden.insert({0, 1});
    mask.forbidden.insert({2, 3});
    mask.forbidden.insert({3, 0});
    const auto res = notears::learn_structure(center_columns(x), labels_for(4), mask, {});
    for (const auto& [i, j] : mask.forbidden)
        CHECK(res.w.values(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == 0.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(res.w.values(i, i) == 0.0);
}

TEST_CASE("threshold_to_dag keeps strong edges and breaks cycles") {
    const std::vector<std::string> labels = labels_for(2);

    SUBCASE("simple threshold") {
        notears::WeightedAdjacency w{labels, Matrix(2, 2)};
        w.values(0, 1) = 0.5;
        w.values(1, 0) = 0.1;
        const auto dag = notears::threshold_to_dag(w, 0.3);
        REQUIRE(dag.edges.size() == 1);
        CHECK(dag.edges[0].from == 0);
        CHECK(dag.edges[0].to == 1);
    }

    SUBCASE("zero matrix gives no edges") {
        notears::WeightedAdjacency w{labels, Matrix(2, 2)};
        CHECK(notears::threshold_to_dag(w, 0.3).edges.empty());
    }

    SUBCASE("two-cycle resolved by deleting the weaker edge") {
        notears::WeightedAdjacency w{labels, Matrix(2, 2)};
        w.values(0, 1) = 0.6;
        w.values(1, 0) = 0.5;
        const auto dag = notears::threshold_to_dag(w, 0.3);
        REQUIRE(dag.edges.size() == 1);
        CHECK(dag.edges[0].from == 0);
        CHECK(dag.edges[0].to == 1);
        CHECK(notears::is_acyclic(dag));
    }

    SUBCASE("random thresholded graphs are always acyclic") {
        Rng rng(97);
        for (int trial = 0; trial < 25; ++trial) {
            const std::size_t n = 6;
            notears::WeightedAdjacency w{labels_for(n), random_weights(n, rng, 1.0)};
            CHECK(notears::is_acyclic(notears::threshold_to_dag(w, 0.4)));
        }
    }
}

TEST_CASE("is_acyclic on tiny graphs") {
    notears::DagStructure empty;
    empty.labels = labels_for(3);
    CHECK(notears::is_acyclic(empty));

    notears::DagStructure chain = empty;
    chain.edges.push_back({0, 1, 1.0});
    chain.edges.push_back({1, 2, 1.0});
    CHECK(notears::is_acyclic(chain));

    notears::DagStructure loop = empty;
    loop.edges.push_back({0, 1, 1.0});
    loop.edges.push_back({1, 0, 1.0});
    CHECK_FALSE(notears::is_acyclic(loop));
}

TEST_CASE("squared_loss rejects mismatched shapes") {
    CHECK_THROWS_AS(squared_loss(Matrix(3, 3), Matrix(10, 4)), DimensionMismatch);
}

TEST_CASE("default forbidden pairs cover attention-to-pandemic and exogenous targets") {
    const auto pairs = notears::default_forbidden_pairs();
    CHECK(pairs.size() == 2 * 6 + 4 * 11);
    bool has_tweets_to_deaths = false;
    bool has_infections_to_lockdown = false;
    for (const auto& [from, to] : pairs) {
        if (from == "tweets_pc" && to == "new_deaths_pc") has_tweets_to_deaths = true;
        if (from == "new_infections_pc" && to == "lockdown_announced")
            has_infections_to_lockdown = true;
    }
    CHECK(has_tweets_to_deaths);
    CHECK(has_infections_to_lockdown);
}
