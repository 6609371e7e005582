#include "causalpanel/eval.hpp"

#include "causalpanel/errors.hpp"
#include "causalpanel/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace causalpanel;

namespace {

std::vector<features::RowKey> block_keys(int countries, int days) {
    std::vector<features::RowKey> keys;
    for (int c = 0; c < countries; ++c)
        for (int d = 0; d < days; ++d)
            keys.emplace_back("C" + std::to_string(c + 1), "2020-01-" + std::to_string(22 + d));
    return keys;
}

// Chi-square upper quantile via the Wilson-Hilferty cube approximation.
double chi2_quantile(double df, double z) {
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

} // namespace

TEST_CASE("loco_split produces the study fold shape") {
    const auto folds = eval::loco_split(block_keys(12, 57));
    REQUIRE(folds.size() == 12);
    for (const auto& fold : folds) {
        CHECK(fold.train_rows.size() == 627);
        CHECK(fold.test_rows.size() == 57);
    }
}

TEST_CASE("loco_split partitions rows exactly") {
    const auto keys = block_keys(5, 7);
    const auto folds = eval::loco_split(keys);
    for (const auto& fold : folds) {
        std::set<int> all(fold.train_rows.begin(), fold.train_rows.end());
        for (int r : fold.test_rows) {
            CHECK(all.count(r) == 0);
            all.insert(r);
        }
        CHECK(all.size() == keys.size());
        for (int r : fold.test_rows)
            CHECK(keys[static_cast<std::size_t>(r)].first == fold.held_out_country);
        for (int r : fold.train_rows)
            CHECK(keys[static_cast<std::size_t>(r)].first != fold.held_out_country);
    }
}

TEST_CASE("loco_split on two countries and one country") {
    const auto folds = eval::loco_split(block_keys(2, 3));
    REQUIRE(folds.size() == 2);
    CHECK(folds[0].train_rows.size() == 3);
    CHECK(folds[0].test_rows.size() == 3);

    CHECK_THROWS_AS(eval::loco_split(block_keys(1, 5)), SingleCountry);
}

TEST_CASE("auroc on hand fixtures") {
    CHECK(eval::auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    CHECK(eval::auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    CHECK(eval::auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
    CHECK(eval::auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) ==
          oracles::pair_count_auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}));
}

TEST_CASE("auroc throws on single-class labels") {
    CHECK_THROWS_AS(eval::auroc({0.1, 0.2}, {1, 1}), DegenerateLabels);
    CHECK_THROWS_AS(eval::auroc({0.1, 0.2}, {0, 0}), DegenerateLabels);
}

TEST_CASE("auroc equals the pair-counting oracle exactly, ties included") {
    Rng rng(211);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + rng.uniform_int(0, 60);
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> labels(static_cast<std::size_t>(n));
        const bool coarse = trial % 2 == 0; // force ties half the time
        for (int i = 0; i < n; ++i) {
            scores[static_cast<std::size_t>(i)] =
                coarse ? static_cast<double>(rng.uniform_int(0, 4)) / 4.0 : rng.uniform();
            labels[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
        }
        bool has_pos = false, has_neg = false;
        for (int l : labels) (l ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) continue;
        CHECK(eval::auroc(scores, labels) == oracles::pair_count_auroc(scores, labels));
    }
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    Rng rng(223);
    std::vector<double> scores(40);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) {
        scores[i] = rng.uniform();
        labels[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const double base = eval::auroc(scores, labels);
    auto transformed = scores;
    for (double& s : transformed) s = std::exp(3.0 * s) + 7.0;
    CHECK(eval::auroc(transformed, labels) == base);
}

TEST_CASE("auroc complement identity for tie-free scores") {
    Rng rng(227);
    std::vector<double> scores(30);
    std::vector<int> labels(30), flipped(30);
    for (std::size_t i = 0; i < 30; ++i) {
        scores[i] = rng.uniform() + static_cast<double>(i) * 1e-9;
        labels[i] = rng.bernoulli(0.5) ? 1 : 0;
        flipped[i] = 1 - labels[i];
    }
    labels[0] = 1;
    labels[1] = 0;
    flipped[0] = 0;
    flipped[1] = 1;
    CHECK(eval::auroc(scores, labels) + eval::auroc(scores, flipped) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate_synthetic_sem") {
    SUBCASE("no edges gives independent columns") {
        notears::DagStructure spec;
        spec.labels = {"a", "b", "c"};
        const Matrix x = eval::generate_synthetic_sem(spec, 4000, 1.0, 5);
        std::vector<double> a(4000), b(4000);
        for (std::size_t r = 0; r < 4000; ++r) {
            a[r] = x(r, 0);
            b[r] = x(r, 2);
        }
        CHECK(std::abs(oracles::pearson(a, b)) < 0.05);
    }
    SUBCASE("chain weight is recovered by OLS") {
        notears::DagStructure spec;
        spec.labels = {"a", "b"};
        spec.edges.push_back({0, 1, 2.0});
        const Matrix x = eval::generate_synthetic_sem(spec, 10000, 0.1, 9);
        std::vector<double> a(10000), b(10000);
        for (std::size_t r = 0; r < 10000; ++r) {
            a[r] = x(r, 0);
            b[r] = x(r, 1);
        }
        CHECK(std::abs(oracles::ols_slope(a, b) - 2.0) < 0.02);
    }
    SUBCASE("same seed, same matrix") {
        notears::DagStructure spec;
        spec.labels = {"a", "b"};
        spec.edges.push_back({0, 1, 1.0});
        CHECK(eval::generate_synthetic_sem(spec, 100, 1.0, 77) ==
              eval::generate_synthetic_sem(spec, 100, 1.0, 77));
    }
    SUBCASE("cyclic spec is rejected") {
        notears::DagStructure spec;
        spec.labels = {"a", "b"};
        spec.edges.push_back({0, 1, 1.0});
        spec.edges.push_back({1, 0, 1.0});
        CHECK_THROWS_AS(eval::generate_synthetic_sem(spec, 10, 1.0, 1), CyclicSpec);
    }
}

TEST_CASE("paperlike generator shape and keys") {
    const auto table = eval::generate_paperlike_bn_data(3, 684, 12);
    CHECK(table.values.size() == 684);
    CHECK(table.columns.size() == 12);
    CHECK(table.row_keys.front().first == "C01");
    CHECK(table.row_keys.back().first == "C12");
    // Blocks of 57 consecutive days per country.
    CHECK(table.row_keys[0].second == "2020-01-22");
    CHECK(table.row_keys[56].second == "2020-03-18");
    CHECK(table.row_keys[57].first == "C02");

    CHECK_THROWS_AS(eval::generate_paperlike_bn_data(3, 100, 12), SingleCountry);
}

TEST_CASE("paperlike root frequencies approach the generator priors") {
    const auto table = eval::generate_paperlike_bn_data(11, 10000, 10);
    const auto& truth = eval::paperlike_ground_truth();
    for (const char* root : {"pct_over_65", "pct_single_households", "pct_twitter_users",
                             "new_infections_pc", "new_deaths_pc"}) {
        const int col = table.column_index(root);
        double high = 0.0;
        for (const auto& row : table.values) high += row[static_cast<std::size_t>(col)];
        const double freq = high / static_cast<double>(table.values.size());
        const auto& cpt = truth.cpts()[static_cast<std::size_t>(truth.var_index(root))];
        CHECK(std::abs(freq - cpt.table(0, 1)) < 0.03);
    }
}

TEST_CASE("paperlike target is independent of a non-ancestor given its parents") {
    // d-separation in the generator graph: conditioned on the four parents,
    // tweets_pc is independent of pct_single_households. Chi-square across
    // parent strata should not reject at the 1% level.
    const auto table = eval::generate_paperlike_bn_data(13, 10000, 10);
    const int target = table.column_index("tweets_pc");
    const int other = table.column_index("pct_single_households");
    const int parents[4] = {table.column_index("pct_twitter_users"),
                            table.column_index("new_infections_pc"),
                            table.column_index("new_deaths_pc"),
                            table.column_index("lockdown_announced")};

    double statistic = 0.0;
    int used_strata = 0;
    for (int stratum = 0; stratum < 16; ++stratum) {
        double counts[2][2] = {{0, 0}, {0, 0}};
        for (const auto& row : table.values) {
            int key = 0;
            for (int b = 0; b < 4; ++b)
                key = key * 2 + row[static_cast<std::size_t>(parents[b])];
            if (key != stratum) continue;
            counts[row[static_cast<std::size_t>(target)]]
                  [row[static_cast<std::size_t>(other)]] += 1.0;
        }
        const double total = counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
        if (total < 40) continue;
        const double r0 = counts[0][0] + counts[0][1];
        const double r1 = counts[1][0] + counts[1][1];
        const double c0 = counts[0][0] + counts[1][0];
        const double c1 = counts[0][1] + counts[1][1];
        bool ok = true;
        double chi = 0.0;
        for (int i = 0; i < 2 && ok; ++i) {
            for (int j = 0; j < 2 && ok; ++j) {
                const double expected = (i ? r1 : r0) * (j ? c1 : c0) / total;
                if (expected < 5.0) {
                    ok = false;
                    break;
                }
                const double observed = counts[i][j];
                chi += (observed - expected) * (observed - expected) / expected;
            }
        }
        if (!ok) continue;
        statistic += chi;
        ++used_strata;
    }
    REQUIRE(used_strata >= 4);
    CHECK(statistic < chi2_quantile(static_cast<double>(used_strata), 2.3263478740408408));
}

TEST_CASE("structural_hamming_distance counts reversals and differences") {
    notears::DagStructure a, b;
    a.labels = b.labels = {"x", "y", "z"};
    a.edges.push_back({0, 1, 1.0});
    a.edges.push_back({1, 2, 1.0});
    b.edges = a.edges;
    CHECK(eval::structural_hamming_distance(a, b) == 0);

    b.edges[0] = {1, 0, 1.0}; // reversal
    CHECK(eval::structural_hamming_distance(a, b) == 1);

    b.edges[0] = {0, 1, 1.0};
    b.edges.push_back({0, 2, 1.0}); // extra edge
    CHECK(eval::structural_hamming_distance(a, b) == 1);
}

TEST_CASE("run_query_battery reports priors and captures inconsistent evidence") {
    const auto& bn = eval::paperlike_ground_truth();

    eval::QuerySpec prior;
    prior.target = "new_deaths_pc";
    prior.state = "High";
    const auto report = eval::run_query_battery(bn, {prior});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].error.empty());
    CHECK(report.rows[0].probability == doctest::Approx(0.25));
    CHECK_FALSE(report.has_errors());
}

TEST_CASE("cross_validate on a coin-flip target stays near chance") {
    auto table = eval::generate_paperlike_bn_data(17, 684, 12);
    Rng rng(18);
    const int target_col = table.column_index("tweets_pc");
    for (auto& row : table.values)
        row[static_cast<std::size_t>(target_col)] = rng.bernoulli(0.5) ? 1 : 0;
    const auto matrix = eval::paperlike_numeric_embedding(table, 19);

    const auto mask = notears::EdgeConstraintMask::from_pairs(
        notears::default_forbidden_pairs(), matrix.columns);
    notears::OptimizerOptions opts;
    opts.lambda1 = 0.05;
    opts.omega = 0.15;
    const auto report = eval::cross_validate(matrix, mask, opts, 1.0, "tweets_pc", {});
    CHECK(report.average > 0.4);
    CHECK(report.average < 0.6);
}

TEST_CASE("fold artifacts never depend on test rows") {
    auto table = eval::generate_paperlike_bn_data(23, 120, 4);
    const auto matrix = eval::paperlike_numeric_embedding(table, 24);
    const auto folds = eval::loco_split(matrix.row_keys);

    notears::OptimizerOptions opts;
    opts.lambda1 = 0.05;
    opts.omega = 0.15;
    const eval::CvOptions cv;

    const auto baseline =
        eval::fit_fold(matrix, {}, opts, 1.0, "tweets_pc", cv, folds[1]);

    // Corrupt every test row of that fold.
    auto corrupted = matrix;
    Rng rng(25);
    for (int r : folds[1].test_rows)
        for (std::size_t c = 0; c < corrupted.values.cols(); ++c)
            corrupted.values(static_cast<std::size_t>(r), c) = rng.uniform(-5.0, 5.0);

    const auto perturbed =
        eval::fit_fold(corrupted, {}, opts, 1.0, "tweets_pc", cv, folds[1]);

    // Cutoffs, structure, and CPTs are unchanged.
    for (std::size_t c = 0; c < baseline.policy.rules.size(); ++c) {
        const auto& rule_a = baseline.policy.rules[c];
        const auto& rule_b = perturbed.policy.rules[c];
        CHECK(rule_a.cutoff.has_value() == rule_b.cutoff.has_value());
        if (rule_a.cutoff) CHECK(*rule_a.cutoff == *rule_b.cutoff);
    }
    REQUIRE(baseline.dag.edges.size() == perturbed.dag.edges.size());
    for (std::size_t e = 0; e < baseline.dag.edges.size(); ++e) {
        CHECK(baseline.dag.edges[e].from == perturbed.dag.edges[e].from);
        CHECK(baseline.dag.edges[e].to == perturbed.dag.edges[e].to);
    }
    for (std::size_t v = 0; v < baseline.bn.node_count(); ++v)
        CHECK(baseline.bn.cpts()[v].table == perturbed.bn.cpts()[v].table);

    // Sanity: corrupting a training row does change something.
    auto train_corrupted = matrix;
    for (std::size_t c = 0; c < train_corrupted.values.cols(); ++c)
        train_corrupted.values(static_cast<std::size_t>(folds[1].train_rows[0]), c) =
            rng.uniform(-5.0, 5.0);
    const auto shifted =
        eval::fit_fold(train_corrupted, {}, opts, 1.0, "tweets_pc", cv, folds[1]);
    bool any_difference = false;
    for (std::size_t c = 0; c < baseline.policy.rules.size() && !any_difference; ++c)
        if (baseline.policy.rules[c].cutoff && shifted.policy.rules[c].cutoff &&
            *baseline.policy.rules[c].cutoff != *shifted.policy.rules[c].cutoff)
            any_difference = true;
    for (std::size_t v = 0; v < baseline.bn.node_count() && !any_difference; ++v)
        if (!(baseline.bn.cpts()[v].table == shifted.bn.cpts()[v].table)) any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("cross_validate is deterministic and averages exactly") {
    const auto table = eval::generate_paperlike_bn_data(29, 180, 6);
    const auto matrix = eval::paperlike_numeric_embedding(table, 30);
    notears::OptimizerOptions opts;
    opts.lambda1 = 0.05;
    opts.omega = 0.15;

    const auto a = eval::cross_validate(matrix, {}, opts, 1.0, "tweets_pc", {});
    const auto b = eval::cross_validate(matrix, {}, opts, 1.0, "tweets_pc", {});
    REQUIRE(a.per_country.size() == b.per_country.size());
    for (std::size_t i = 0; i < a.per_country.size(); ++i) {
        CHECK(a.per_country[i].first == b.per_country[i].first);
        CHECK(a.per_country[i].second == b.per_country[i].second);
    }
    CHECK(a.average == b.average);

    double sum = 0.0;
    for (const auto& [c, auc] : a.per_country) sum += auc;
    CHECK(std::abs(a.average - sum / static_cast<double>(a.per_country.size())) < 1e-12);
}

TEST_CASE("fixed structure and global cutoffs are honored") {
    const auto table = eval::generate_paperlike_bn_data(31, 120, 4);
    const auto matrix = eval::paperlike_numeric_embedding(table, 32);

    eval::CvOptions cv;
    cv.fixed_structure = eval::paperlike_ground_truth().dag();
    cv.global_cutoffs = true;
    notears::OptimizerOptions opts;
    const auto report = eval::cross_validate(matrix, {}, opts, 1.0, "tweets_pc", cv);
    CHECK(report.global_cutoffs);
    CHECK(report.per_country.size() == 4);
    // With the true structure the fixture is comfortably above chance.
    CHECK(report.average > 0.6);
}
