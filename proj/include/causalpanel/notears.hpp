#pragma once

#include "causalpanel/matrix.hpp"

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace causalpanel::notears {

// Real-valued parameterization of a candidate graph: values(i, j) is the
// weight of edge i -> j. The diagonal is identically zero.
struct WeightedAdjacency {
    std::vector<std::string> labels;
    Matrix values;

    std::size_t size() const { return labels.size(); }
};

// Ordered pairs (i, j) whose weight is pinned to exactly zero during
// optimization. Self-loops are implicitly forbidden and not stored.
struct EdgeConstraintMask {
    std::set<std::pair<int, int>> forbidden;

    static EdgeConstraintMask from_json_file(const std::string& path,
                                             const std::vector<std::string>& labels);
    static EdgeConstraintMask from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                         const std::vector<std::string>& labels);
    void validate(std::size_t n) const;
};

struct OptimizerOptions {
    double lambda1 = 0.1;           // l1 coefficient on W
    double h_tol = 1e-8;            // accept when h(W) falls below this
    double rho_max = 1e16;          // penalty ceiling
    int max_outer_iterations = 100; // dual update steps
    double omega = 0.3;             // |w| threshold when extracting the DAG

    // Subproblem solver plumbing.
    int max_inner_iterations = 1000;
    int lbfgs_memory = 10;
    double pg_tol = 1e-6; // projected-gradient infinity norm
    double f_tol = 1e-10; // relative objective change
};

struct HResult {
    double value;
    Matrix gradient;
};

// h(W) = trace(exp(W o W)) - n, zero exactly when G(W) is acyclic.
// Gradient: exp(W o W)^T o 2W.
HResult acyclicity_h(const Matrix& w);

struct LossResult {
    double value;
    Matrix gradient;
};

// Least-squares score L(W) = 1/(2m) ||X - X W||_F^2 with gradient
// -1/m X^T (X - X W).
LossResult squared_loss(const Matrix& w, const Matrix& x);

struct OuterIteration {
    double rho;
    double alpha;
    double h;
    double objective;
};

struct LearnResult {
    WeightedAdjacency w;
    double h_final = 0.0;
    bool converged = false; // false = rho_max hit with h above tolerance
    std::vector<OuterIteration> trace;
};

// Augmented-Lagrangian outer loop around an l1-penalized least-squares
// subproblem, solved on the nonnegative split W = W+ - W- by projected
// L-BFGS. Deterministic: no randomness anywhere in the solver.
LearnResult learn_structure(const Matrix& x, const std::vector<std::string>& labels,
                            const EdgeConstraintMask& mask, const OptimizerOptions& opts);

struct DagEdge {
    int from;
    int to;
    double weight; // NaN when the edge carries no weight annotation

    bool has_weight() const { return !std::isnan(weight); }
};

struct DagStructure {
    std::vector<std::string> labels;
    std::vector<DagEdge> edges;

    bool has_edge(int from, int to) const;
    std::vector<int> parents_of(int node) const;
};

// Keeps edges with |w| > omega, then deletes the smallest-|weight| edge on
// any remaining cycle until the graph is acyclic.
DagStructure threshold_to_dag(const WeightedAdjacency& w, double omega);

bool is_acyclic(const DagStructure& g);

// Kahn's algorithm; nullopt when the graph has a cycle.
std::optional<std::vector<int>> topological_order(const DagStructure& g);

// The toolkit's built-in prohibition list for the canonical feature set:
// attention variables cannot cause same-day pandemic counts, and the static
// country attributes plus the lockdown indicator have no modeled causes.
std::vector<std::pair<std::string, std::string>> default_forbidden_pairs();

} // namespace causalpanel::notears
