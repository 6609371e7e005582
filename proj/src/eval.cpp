#include "causalpanel/eval.hpp"

#include "causalpanel/dates.hpp"
#include "causalpanel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <set>

namespace causalpanel::eval {

std::vector<Fold> loco_split(const std::vector<features::RowKey>& row_keys) {
    std::vector<std::string> countries;
    std::map<std::string, std::size_t> where;
    for (const auto& key : row_keys) {
        if (!where.count(key.first)) {
            where[key.first] = countries.size();
            countries.push_back(key.first);
        }
    }
    if (countries.size() < 2)
        throw SingleCountry(countries.empty() ? "no rows" : countries.front());

    std::vector<Fold> folds(countries.size());
    for (std::size_t f = 0; f < countries.size(); ++f)
        folds[f].held_out_country = countries[f];
    for (std::size_t r = 0; r < row_keys.size(); ++r) {
        const std::size_t owner = where[row_keys[r].first];
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (f == owner)
                folds[f].test_rows.push_back(static_cast<int>(r));
            else
                folds[f].train_rows.push_back(static_cast<int>(r));
        }
    }
    return folds;
}

std::vector<Fold> loco_split(const features::DiscreteObservationTable& table) {
    return loco_split(table.row_keys);
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DegenerateLabels("scores and labels differ in length");
    std::size_t positives = 0;
    for (int l : labels) positives += l != 0;
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0)
        throw DegenerateLabels(positives == 0 ? "no positive labels" : "no negative labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average rank within each tie group keeps the numerator a half-integer,
    // which is why this matches the pair-counting definition exactly.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
        i = j + 1;
    }

    const double p = static_cast<double>(positives);
    const double numerator = rank_sum_pos - 0.5 * p * (p + 1.0);
    return numerator / (p * static_cast<double>(negatives));
}

FoldModel fit_fold(const features::NumericFeatureMatrix& matrix,
                   const notears::EdgeConstraintMask& mask,
                   const notears::OptimizerOptions& opts, double alpha,
                   const std::string& target, const CvOptions& cv, const Fold& fold,
                   const features::DiscretizationPolicy* global_policy) {
    FoldModel out;

    const auto train = features::select_rows(matrix, fold.train_rows);
    const auto test = features::select_rows(matrix, fold.test_rows);

    out.policy = cv.global_cutoffs ? *global_policy : features::fit_discretization(train);
    const auto train_table = features::discretize(train, out.policy);
    const auto test_table = features::discretize(test, out.policy);

    if (cv.fixed_structure) {
        out.dag = *cv.fixed_structure;
    } else {
        const auto learned = notears::learn_structure(features::standardize(train).values,
                                                      matrix.columns, mask, opts);
        out.dag = notears::threshold_to_dag(learned.w, opts.omega);
    }

    out.bn = bayesnet::fit(out.dag, train_table, alpha);

    const int target_col = test_table.column_index(target);
    const std::string positive = test_table.levels[static_cast<std::size_t>(target_col)].back();
    const int positive_index =
        static_cast<int>(test_table.levels[static_cast<std::size_t>(target_col)].size()) - 1;

    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(fold.test_rows.size());
    labels.reserve(fold.test_rows.size());
    for (std::size_t r = 0; r < test_table.values.size(); ++r) {
        bayesnet::Evidence row;
        for (std::size_t c = 0; c < test_table.columns.size(); ++c) {
            if (test_table.columns[c] == target) continue;
            row[test_table.columns[c]] =
                test_table.levels[c][static_cast<std::size_t>(test_table.values[r][c])];
        }
        scores.push_back(bayesnet::predict_proba(out.bn, row, target).prob(positive));
        labels.push_back(
            test_table.values[r][static_cast<std::size_t>(target_col)] == positive_index ? 1
                                                                                         : 0);
    }

    try {
        out.auc = auroc(scores, labels);
    } catch (const DegenerateLabels& e) {
        out.degenerate = true;
        out.note = e.what();
    }
    return out;
}

CvReport cross_validate(const features::NumericFeatureMatrix& matrix,
                        const notears::EdgeConstraintMask& mask,
                        const notears::OptimizerOptions& opts, double alpha,
                        const std::string& target, const CvOptions& cv) {
    if (matrix.column_index(target) < 0)
        throw UnknownVariable("cross-validation target '" + target + "'");

    const auto folds = loco_split(matrix.row_keys);

    features::DiscretizationPolicy global_policy;
    if (cv.global_cutoffs) global_policy = features::fit_discretization(matrix);

    std::vector<FoldModel> outcomes(folds.size());
    std::vector<std::exception_ptr> errors(folds.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cv.parallel_folds)
#endif
    for (std::size_t f = 0; f < folds.size(); ++f) {
        try {
            outcomes[f] = fit_fold(matrix, mask, opts, alpha, target, cv, folds[f],
                                   cv.global_cutoffs ? &global_policy : nullptr);
        } catch (...) {
            errors[f] = std::current_exception();
        }
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    CvReport report;
    report.target_variable = target;
    report.global_cutoffs = cv.global_cutoffs;
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const FoldModel& out = outcomes[f];
        if (out.degenerate) {
            report.excluded.push_back(folds[f].held_out_country + ": " + out.note);
            continue;
        }
        report.per_country.emplace_back(folds[f].held_out_country, out.auc);
        sum += out.auc;
        ++included;
    }
    report.average = included ? sum / static_cast<double>(included) : 0.0;
    return report;
}

bool QueryReport::has_errors() const {
    for (const auto& row : rows)
        if (!row.error.empty()) return true;
    return false;
}

QueryReport run_query_battery(const bayesnet::BayesianNetwork& bn,
                              const std::vector<QuerySpec>& queries) {
    QueryReport report;
    report.rows.reserve(queries.size());
    for (const auto& spec : queries) {
        QueryResultRow row;
        row.spec = spec;
        try {
            row.probability = bayesnet::query(bn, spec.evidence, spec.target).prob(spec.state);
        } catch (const InconsistentEvidence&) {
            row.error = "InconsistentEvidence";
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

Matrix generate_synthetic_sem(const notears::DagStructure& spec, int m, double noise_sd,
                              std::uint64_t seed) {
    const auto order = notears::topological_order(spec);
    if (!order) throw CyclicSpec("SEM spec is not a DAG");
    const std::size_t n = spec.labels.size();

    Rng rng(seed);
    Matrix x(static_cast<std::size_t>(m), n, 0.0);
    for (int node : *order) {
        const std::size_t j = static_cast<std::size_t>(node);
        std::vector<std::pair<std::size_t, double>> incoming;
        for (const auto& e : spec.edges)
            if (e.to == node) incoming.emplace_back(static_cast<std::size_t>(e.from), e.weight);
        std::sort(incoming.begin(), incoming.end());
        for (std::size_t r = 0; r < static_cast<std::size_t>(m); ++r) {
            double v = noise_sd * rng.normal();
            for (const auto& [i, w] : incoming) v += w * x(r, i);
            x(r, j) = v;
        }
    }
    return x;
}

namespace {

// CPT helper for nodes whose probability of the upper level depends only on
// how many parents sit at their upper level.
Matrix count_table(std::size_t parent_count, const std::vector<double>& p_upper_by_count) {
    const std::size_t rows = std::size_t(1) << parent_count;
    Matrix t(rows, 2);
    for (std::size_t r = 0; r < rows; ++r) {
        int active = 0;
        for (std::size_t b = 0; b < parent_count; ++b)
            active += (r >> (parent_count - 1 - b)) & 1u;
        const double p = p_upper_by_count[static_cast<std::size_t>(active)];
        t(r, 0) = 1.0 - p;
        t(r, 1) = p;
    }
    return t;
}

Matrix root_table(double p_upper) {
    Matrix t(1, 2);
    t(0, 0) = 1.0 - p_upper;
    t(0, 1) = p_upper;
    return t;
}

bayesnet::BayesianNetwork build_paperlike_truth() {
    using features::kFeatureNames;
    std::vector<std::string> labels(kFeatureNames.begin(), kFeatureNames.end());
    std::vector<std::vector<std::string>> levels(labels.size(), {"Low", "High"});
    levels[9] = {"No", "Yes"};
    levels[11] = {"Negative", "Positive"};

    // Indices into the canonical feature order:
    //   0 total_infections_pc  1 new_infections_pc  2 pct_change_infections
    //   3 total_deaths_pc      4 new_deaths_pc      5 pct_change_deaths
    //   6 pct_over_65          7 pct_single_households  8 pct_twitter_users
    //   9 lockdown_announced  10 tweets_pc         11 avg_sentiment
    std::vector<bayesnet::Cpt> cpts(labels.size());

    cpts[1] = {{}, root_table(0.25)};
    cpts[4] = {{}, root_table(0.25)};
    cpts[6] = {{}, root_table(0.50)};
    cpts[7] = {{}, root_table(0.50)};
    cpts[8] = {{}, root_table(0.50)};

    // More single-person households pull total infections down; fresh
    // infections push them up. Rows are (new_infections, single_households).
    {
        Matrix t(4, 2);
        const double p[4] = {0.20, 0.10, 0.60, 0.35};
        for (std::size_t r = 0; r < 4; ++r) {
            t(r, 0) = 1.0 - p[r];
            t(r, 1) = p[r];
        }
        cpts[0] = {{1, 7}, std::move(t)};
    }
    cpts[2] = {{1}, count_table(1, {0.08, 0.80})};
    cpts[3] = {{4}, count_table(1, {0.12, 0.70})};
    {
        // Rows are (new_deaths, pct_over_65): older populations amplify the
        // death growth rate.
        Matrix t(4, 2);
        const double p[4] = {0.05, 0.15, 0.60, 0.85};
        for (std::size_t r = 0; r < 4; ++r) {
            t(r, 0) = 1.0 - p[r];
            t(r, 1) = p[r];
        }
        cpts[5] = {{4, 6}, std::move(t)};
    }
    cpts[9] = {{1}, count_table(1, {0.10, 0.55})};

    // The target: Twitter activity rises steeply with each active driver.
    cpts[10] = {{1, 4, 8, 9}, count_table(4, {0.02, 0.12, 0.50, 0.88, 0.98})};

    // Sentiment: more bad news and lockdowns mean a higher chance of the
    // Negative level (index 0).
    {
        const std::vector<double> p_negative = {0.08, 0.30, 0.55, 0.78, 0.92};
        Matrix t(16, 2);
        for (std::size_t r = 0; r < 16; ++r) {
            int active = 0;
            for (std::size_t b = 0; b < 4; ++b) active += (r >> (3 - b)) & 1u;
            t(r, 0) = p_negative[static_cast<std::size_t>(active)];
            t(r, 1) = 1.0 - t(r, 0);
        }
        cpts[11] = {{1, 3, 4, 9}, std::move(t)};
    }

    return bayesnet::BayesianNetwork(std::move(labels), std::move(levels), std::move(cpts));
}

} // namespace

const bayesnet::BayesianNetwork& paperlike_ground_truth() {
    static const bayesnet::BayesianNetwork bn = build_paperlike_truth();
    return bn;
}

features::DiscreteObservationTable generate_paperlike_bn_data(std::uint64_t seed, int rows,
                                                              int countries) {
    if (countries < 1 || rows < 1 || rows % countries != 0)
        throw SingleCountry("rows must be a positive multiple of the country count");

    const auto& bn = paperlike_ground_truth();
    const auto order = notears::topological_order(bn.dag());

    features::DiscreteObservationTable table;
    table.columns = bn.labels();
    table.levels = bn.levels();
    table.values.assign(static_cast<std::size_t>(rows),
                        std::vector<int>(table.columns.size(), 0));

    Rng rng(seed);
    for (auto& row : table.values) {
        for (int node : *order) {
            const auto& cpt = bn.cpts()[static_cast<std::size_t>(node)];
            std::size_t cpt_row = 0;
            for (int p : cpt.parents)
                cpt_row = cpt_row * bn.levels()[static_cast<std::size_t>(p)].size() +
                          static_cast<std::size_t>(row[static_cast<std::size_t>(p)]);
            const double u = rng.uniform();
            double acc = 0.0;
            int state = 0;
            for (std::size_t l = 0; l < bn.levels()[static_cast<std::size_t>(node)].size(); ++l) {
                acc += cpt.table(cpt_row, l);
                if (u < acc) {
                    state = static_cast<int>(l);
                    break;
                }
                state = static_cast<int>(l);
            }
            row[static_cast<std::size_t>(node)] = state;
        }
    }

    const int days = rows / countries;
    table.row_keys.reserve(static_cast<std::size_t>(rows));
    const long long day0 = dates::to_epoch_days("2020-01-22");
    for (int c = 0; c < countries; ++c) {
        char name[8];
        std::snprintf(name, sizeof(name), "C%02d", c + 1);
        for (int d = 0; d < days; ++d)
            table.row_keys.emplace_back(name, dates::from_epoch_days(day0 + d));
    }
    return table;
}

features::NumericFeatureMatrix paperlike_numeric_embedding(
    const features::DiscreteObservationTable& table, std::uint64_t seed) {
    const auto policy = features::default_policy(table.columns);

    features::NumericFeatureMatrix out;
    out.row_keys = table.row_keys;
    out.columns = table.columns;
    out.values = Matrix(table.values.size(), table.columns.size());

    Rng rng(seed);
    for (std::size_t r = 0; r < table.values.size(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const int level = table.values[r][c];
            double v = 0.0;
            switch (policy.rules[c].kind) {
                case features::RuleKind::PercentileCutoff:
                    // Clusters [0, 0.5] and [1.5, 2.0]: refit cutoffs land
                    // inside a cluster, so level recovery degrades gracefully.
                    v = (level == 1 ? 1.5 : 0.0) + 0.5 * rng.uniform();
                    break;
                case features::RuleKind::SignSplit:
                    v = (level == 1 ? 1.0 : -1.0) * (0.3 + 0.5 * rng.uniform());
                    break;
                case features::RuleKind::PassthroughBinary: v = level == 1 ? 1.0 : 0.0; break;
            }
            out.values(r, c) = v;
        }
    }
    return out;
}

notears::DagStructure random_er_dag(int n, double expected_degree, double wmin, double wmax,
                                    Rng& rng) {
    notears::DagStructure dag;
    dag.labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) dag.labels.push_back("x" + std::to_string(i + 1));

    const auto position = rng.permutation(n);
    const double p = n > 1 ? expected_degree / static_cast<double>(n - 1) : 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform() >= p) continue;
            const double magnitude = rng.uniform(wmin, wmax);
            const double w = rng.bernoulli(0.5) ? magnitude : -magnitude;
            if (position[i] < position[j])
                dag.edges.push_back({i, j, w});
            else
                dag.edges.push_back({j, i, w});
        }
    }
    return dag;
}

int structural_hamming_distance(const notears::DagStructure& a,
                                const notears::DagStructure& b) {
    std::set<std::pair<int, int>> ea, eb;
    for (const auto& e : a.edges) ea.emplace(e.from, e.to);
    for (const auto& e : b.edges) eb.emplace(e.from, e.to);

    int shd = 0;
    std::set<std::pair<int, int>> seen;
    auto visit = [&](const std::set<std::pair<int, int>>& lhs,
                     const std::set<std::pair<int, int>>& rhs) {
        for (const auto& [i, j] : lhs) {
            const auto key = std::minmax(i, j);
            if (seen.count({key.first, key.second})) continue;
            seen.insert({key.first, key.second});
            const bool l_fwd = lhs.count({i, j}) || lhs.count({j, i});
            const bool r_fwd = rhs.count({i, j}) || rhs.count({j, i});
            if (l_fwd && r_fwd) {
                // Both have an edge on this pair; count a reversal mismatch.
                const bool same = (lhs.count({i, j}) && rhs.count({i, j})) ||
                                  (lhs.count({j, i}) && rhs.count({j, i}));
                if (!same) ++shd;
            } else {
                ++shd;
            }
        }
    };
    visit(ea, eb);
    visit(eb, ea);
    return shd;
}

} // namespace causalpanel::eval
