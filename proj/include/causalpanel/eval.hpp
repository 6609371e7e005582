#pragma once

#include "causalpanel/bayesnet.hpp"
#include "causalpanel/features.hpp"
#include "causalpanel/matrix.hpp"
#include "causalpanel/notears.hpp"
#include "causalpanel/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalpanel::eval {

struct Fold {
    std::string held_out_country;
    std::vector<int> train_rows;
    std::vector<int> test_rows;
};

// One fold per distinct country, in first-appearance order.
std::vector<Fold> loco_split(const std::vector<features::RowKey>& row_keys);
std::vector<Fold> loco_split(const features::DiscreteObservationTable& table);

// Mann-Whitney AUROC via average ranks; ties count half. Exact against pair
// counting because both numerators are sums of half-integers.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

struct CvOptions {
    bool global_cutoffs = false; // fit discretization on all rows (leaky variant)
    std::optional<notears::DagStructure> fixed_structure;
    bool parallel_folds = true;
};

struct CvReport {
    std::string target_variable;
    bool global_cutoffs = false;
    std::vector<std::pair<std::string, double>> per_country;
    std::vector<std::string> excluded; // single-class test folds, with reason
    double average = 0.0;
};

// Leave-one-country-out pipeline: cutoffs, structure, and CPTs are learned
// from the training rows of each fold only (unless CvOptions says otherwise).
CvReport cross_validate(const features::NumericFeatureMatrix& matrix,
                        const notears::EdgeConstraintMask& mask,
                        const notears::OptimizerOptions& opts, double alpha,
                        const std::string& target, const CvOptions& cv = {});

// Everything one fold learns plus its scored outcome. Exposed so the
// no-leakage property (test rows never influence the learned artifacts) is
// directly checkable.
struct FoldModel {
    features::DiscretizationPolicy policy;
    notears::DagStructure dag;
    bayesnet::BayesianNetwork bn;
    bool degenerate = false;
    std::string note;
    double auc = 0.0;
};

FoldModel fit_fold(const features::NumericFeatureMatrix& matrix,
                   const notears::EdgeConstraintMask& mask,
                   const notears::OptimizerOptions& opts, double alpha,
                   const std::string& target, const CvOptions& cv, const Fold& fold,
                   const features::DiscretizationPolicy* global_policy = nullptr);

struct QuerySpec {
    bayesnet::Evidence evidence;
    std::string target;
    std::string state;
};

struct QueryResultRow {
    QuerySpec spec;
    double probability = 0.0;
    std::string error; // empty on success, e.g. "InconsistentEvidence"
};

struct QueryReport {
    std::vector<QueryResultRow> rows;
    bool has_errors() const;
};

// Runs each query through exact inference. Inconsistent evidence is recorded
// per row; structural problems (unknown variables/levels) propagate.
QueryReport run_query_battery(const bayesnet::BayesianNetwork& bn,
                              const std::vector<QuerySpec>& queries);

// Linear SEM sampler: x_j = sum_i w_ij x_i + eps, eps ~ N(0, noise_sd^2),
// columns in node order, sampling in topological order.
Matrix generate_synthetic_sem(const notears::DagStructure& spec, int m, double noise_sd,
                              std::uint64_t seed);

// Ground-truth binary network shaped like the discovered study graph: the
// Twitter-activity node has parents {pct_twitter_users, new_infections_pc,
// new_deaths_pc, lockdown_announced}. CPTs are spelled out in eval.cpp.
const bayesnet::BayesianNetwork& paperlike_ground_truth();

// Ancestral samples from the ground-truth network, country keys assigned in
// blocks of rows/countries consecutive days starting 2020-01-22.
features::DiscreteObservationTable generate_paperlike_bn_data(std::uint64_t seed, int rows,
                                                              int countries);

// Numeric view of a discrete table for feeding the structure-learning path:
// well-separated value clusters per level, exact 0/1 for the lockdown flag,
// signed clusters for sentiment.
features::NumericFeatureMatrix paperlike_numeric_embedding(
    const features::DiscreteObservationTable& table, std::uint64_t seed);

// Random DAG on n nodes: each forward pair (under a random topological
// order) carries an edge with probability expected_degree/(n-1), weights
// uniform on +-[wmin, wmax].
notears::DagStructure random_er_dag(int n, double expected_degree, double wmin, double wmax,
                                    Rng& rng);

// Additions + deletions + reversals between edge sets.
int structural_hamming_distance(const notears::DagStructure& a,
                                const notears::DagStructure& b);

} // namespace causalpanel::eval
