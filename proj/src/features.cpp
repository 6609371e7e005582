#include "causalpanel/features.hpp"

#include "causalpanel/dates.hpp"
#include "causalpanel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace causalpanel::features {

FeatureFamily family_of(const std::string& feature) {
    static const std::set<std::string> pandemic = {"total_infections_pc",   "new_infections_pc",
                                                   "pct_change_infections", "total_deaths_pc",
                                                   "new_deaths_pc",         "pct_change_deaths"};
    static const std::set<std::string> country_static = {"pct_over_65", "pct_single_households",
                                                         "pct_twitter_users"};
    if (pandemic.count(feature)) return FeatureFamily::Pandemic;
    if (country_static.count(feature)) return FeatureFamily::CountryStatic;
    if (feature == "lockdown_announced") return FeatureFamily::Intervention;
    if (feature == "tweets_pc" || feature == "avg_sentiment") return FeatureFamily::Attention;
    return FeatureFamily::Other;
}

int NumericFeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

int DiscreteObservationTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

bool DiscretizationPolicy::fitted() const {
    for (const auto& rule : rules)
        if (rule.kind == RuleKind::PercentileCutoff && !rule.cutoff.has_value()) return false;
    return true;
}

NumericFeatureMatrix engineer(const ingest::RawPanel& panel) {
    NumericFeatureMatrix out;
    out.columns.assign(kFeatureNames.begin(), kFeatureNames.end());
    out.row_keys.reserve(panel.rows.size());
    out.values = Matrix(panel.rows.size(), out.columns.size());

    const std::size_t days =
        panel.countries.empty() ? 0 : panel.rows.size() / panel.countries.size();

    for (std::size_t c = 0; c < panel.countries.size(); ++c) {
        const std::size_t base = c * days;
        for (std::size_t d = 0; d < days; ++d) {
            const ingest::PanelRow& row = panel.rows[base + d];
            const double pop = static_cast<double>(row.population);

            // First day's new count is the first cumulative value.
            const std::int64_t prev_inf = d == 0 ? 0 : panel.rows[base + d - 1].cumulative_infections;
            const std::int64_t prev_dead = d == 0 ? 0 : panel.rows[base + d - 1].cumulative_deaths;
            const std::int64_t new_inf = row.cumulative_infections - prev_inf;
            const std::int64_t new_dead = row.cumulative_deaths - prev_dead;
            if (new_inf < 0 || new_dead < 0)
                throw NegativeNewCount(row.country + " at " + row.date);

            const double pct_inf =
                prev_inf == 0 ? 0.0
                              : 100.0 * static_cast<double>(new_inf) / static_cast<double>(prev_inf);
            const double pct_dead =
                prev_dead == 0
                    ? 0.0
                    : 100.0 * static_cast<double>(new_dead) / static_cast<double>(prev_dead);

            double lockdown = 0.0;
            if (row.lockdown_date) {
                const long long offset = dates::days_between(*row.lockdown_date, row.date);
                if (offset >= 0 && offset <= 2) lockdown = 1.0;
            }

            double* cells = out.values.data() + (base + d) * out.columns.size();
            cells[0] = static_cast<double>(row.cumulative_infections) / pop;
            cells[1] = static_cast<double>(new_inf) / pop;
            cells[2] = pct_inf;
            cells[3] = static_cast<double>(row.cumulative_deaths) / pop;
            cells[4] = static_cast<double>(new_dead) / pop;
            cells[5] = pct_dead;
            cells[6] = row.pct_over_65;
            cells[7] = row.pct_single_households;
            cells[8] = row.pct_twitter_users;
            cells[9] = lockdown;
            cells[10] = static_cast<double>(row.tweet_count) / pop;
            cells[11] = row.avg_sentiment;
            out.row_keys.emplace_back(row.country, row.date);
        }
    }
    return out;
}

DiscretizationPolicy default_policy(const std::vector<std::string>& columns) {
    DiscretizationPolicy policy;
    policy.columns = columns;
    for (const auto& name : columns) {
        ColumnRule rule;
        if (name == "avg_sentiment") {
            rule.kind = RuleKind::SignSplit;
        } else if (name == "lockdown_announced") {
            rule.kind = RuleKind::PassthroughBinary;
        } else {
            rule.kind = RuleKind::PercentileCutoff;
            const FeatureFamily fam = family_of(name);
            rule.q = (fam == FeatureFamily::Pandemic || fam == FeatureFamily::Attention) ? 0.75
                                                                                         : 0.5;
        }
        policy.rules.push_back(rule);
    }
    return policy;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyMatrix("percentile of empty column");
    if (!(q > 0.0 && q < 1.0)) throw ColumnMismatch("percentile q must lie in (0,1)");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

DiscretizationPolicy fit_discretization(const NumericFeatureMatrix& matrix,
                                        DiscretizationPolicy policy) {
    if (matrix.row_keys.empty()) throw EmptyMatrix("fit_discretization on empty matrix");
    if (policy.columns != matrix.columns)
        throw ColumnMismatch("policy columns do not match matrix columns");
    for (std::size_t c = 0; c < policy.rules.size(); ++c) {
        ColumnRule& rule = policy.rules[c];
        if (rule.kind != RuleKind::PercentileCutoff) continue;
        std::vector<double> column(matrix.values.rows());
        for (std::size_t r = 0; r < matrix.values.rows(); ++r) column[r] = matrix.values(r, c);
        rule.cutoff = percentile(std::move(column), rule.q);
    }
    return policy;
}

DiscretizationPolicy fit_discretization(const NumericFeatureMatrix& matrix) {
    return fit_discretization(matrix, default_policy(matrix.columns));
}

DiscreteObservationTable discretize(const NumericFeatureMatrix& matrix,
                                    const DiscretizationPolicy& policy) {
    if (policy.columns != matrix.columns)
        throw ColumnMismatch("policy fitted on different columns than the matrix");
    if (!policy.fitted()) throw ColumnMismatch("policy has unfitted percentile cutoffs");

    DiscreteObservationTable table;
    table.row_keys = matrix.row_keys;
    table.columns = matrix.columns;
    table.levels.resize(matrix.columns.size());
    table.values.assign(matrix.values.rows(), std::vector<int>(matrix.columns.size(), 0));

    for (std::size_t c = 0; c < policy.rules.size(); ++c) {
        const ColumnRule& rule = policy.rules[c];
        switch (rule.kind) {
            case RuleKind::PercentileCutoff: table.levels[c] = {"Low", "High"}; break;
            case RuleKind::SignSplit: table.levels[c] = {"Negative", "Positive"}; break;
            case RuleKind::PassthroughBinary: table.levels[c] = {"No", "Yes"}; break;
        }
        for (std::size_t r = 0; r < matrix.values.rows(); ++r) {
            const double v = matrix.values(r, c);
            int idx = 0;
            switch (rule.kind) {
                case RuleKind::PercentileCutoff: idx = v >= *rule.cutoff ? 1 : 0; break;
                case RuleKind::SignSplit: idx = v >= 0.0 ? 1 : 0; break;
                case RuleKind::PassthroughBinary: idx = v == 1.0 ? 1 : 0; break;
            }
            table.values[r][c] = idx;
        }
    }
    return table;
}

NumericFeatureMatrix standardize(const NumericFeatureMatrix& matrix) {
    if (matrix.row_keys.empty()) throw EmptyMatrix("standardize on empty matrix");
    NumericFeatureMatrix out = matrix;
    const std::size_t m = matrix.values.rows();
    for (std::size_t c = 0; c < matrix.values.cols(); ++c) {
        bool constant = true;
        for (std::size_t r = 1; r < m && constant; ++r)
            constant = matrix.values(r, c) == matrix.values(0, c);
        if (constant || m == 1) {
            for (std::size_t r = 0; r < m; ++r) out.values(r, c) = 0.0;
            continue;
        }
        double mean = 0.0;
        for (std::size_t r = 0; r < m; ++r) mean += matrix.values(r, c);
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double d = matrix.values(r, c) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(m - 1));
        for (std::size_t r = 0; r < m; ++r)
            out.values(r, c) = (matrix.values(r, c) - mean) / sd;
    }
    return out;
}

NumericFeatureMatrix select_rows(const NumericFeatureMatrix& matrix,
                                 const std::vector<int>& rows) {
    NumericFeatureMatrix out;
    out.columns = matrix.columns;
    out.row_keys.reserve(rows.size());
    out.values = Matrix(rows.size(), matrix.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = static_cast<std::size_t>(rows[i]);
        out.row_keys.push_back(matrix.row_keys[r]);
        for (std::size_t c = 0; c < matrix.values.cols(); ++c)
            out.values(i, c) = matrix.values(r, c);
    }
    return out;
}

} // namespace causalpanel::features
