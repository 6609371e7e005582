#pragma once

#include "causalpanel/ingest.hpp"
#include "causalpanel/matrix.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace causalpanel::features {

// Canonical per-day feature columns, in fixed order.
inline constexpr std::array<const char*, 12> kFeatureNames = {
    "total_infections_pc",   "new_infections_pc", "pct_change_infections",
    "total_deaths_pc",       "new_deaths_pc",     "pct_change_deaths",
    "pct_over_65",           "pct_single_households", "pct_twitter_users",
    "lockdown_announced",    "tweets_pc",         "avg_sentiment"};

enum class FeatureFamily { Pandemic, CountryStatic, Intervention, Attention, Other };

FeatureFamily family_of(const std::string& feature);

using RowKey = std::pair<std::string, std::string>; // (country, date)

struct NumericFeatureMatrix {
    std::vector<RowKey> row_keys;
    std::vector<std::string> columns;
    Matrix values; // row_keys.size() x columns.size()

    int column_index(const std::string& name) const;
};

enum class RuleKind { PercentileCutoff, SignSplit, PassthroughBinary };

struct ColumnRule {
    RuleKind kind = RuleKind::PercentileCutoff;
    double q = 0.5;                      // only for PercentileCutoff
    std::optional<double> cutoff;        // learned by fit_discretization
};

struct DiscretizationPolicy {
    std::vector<std::string> columns;
    std::vector<ColumnRule> rules; // aligned with columns

    bool fitted() const;
};

struct DiscreteObservationTable {
    std::vector<RowKey> row_keys;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> levels; // per column, ordered label set
    std::vector<std::vector<int>> values;         // rows x columns, level indices

    int column_index(const std::string& name) const;
};

// The twelve engineered columns: per-capita and day-over-day transforms of
// the raw counts, the 3-day lockdown window indicator, and pass-throughs.
NumericFeatureMatrix engineer(const ingest::RawPanel& panel);

// Rule set used by the pipeline: 75th-percentile cutoffs for pandemic counts
// and Twitter activity, median cutoffs for the static country attributes,
// sign split for sentiment, pass-through for the lockdown flag.
DiscretizationPolicy default_policy(const std::vector<std::string>& columns);

// Learns cutoffs pooled over all rows. Percentiles interpolate linearly
// between closest ranks.
DiscretizationPolicy fit_discretization(const NumericFeatureMatrix& matrix);
DiscretizationPolicy fit_discretization(const NumericFeatureMatrix& matrix,
                                        DiscretizationPolicy policy);

// value >= cutoff maps to the upper level (High / Yes / Positive).
DiscreteObservationTable discretize(const NumericFeatureMatrix& matrix,
                                    const DiscretizationPolicy& policy);

// Mean-centers each column and scales by the sample standard deviation;
// zero-variance columns stay centered at 0.
NumericFeatureMatrix standardize(const NumericFeatureMatrix& matrix);

// Linear interpolation between closest ranks, q in (0,1).
double percentile(std::vector<double> values, double q);

NumericFeatureMatrix select_rows(const NumericFeatureMatrix& matrix,
                                 const std::vector<int>& rows);

} // namespace causalpanel::features
