#pragma once

#include "causalpanel/features.hpp"
#include "causalpanel/matrix.hpp"
#include "causalpanel/notears.hpp"

#include <map>
#include <string>
#include <vector>

namespace causalpanel::bayesnet {

// variable name -> level label; a variable appears at most once by type.
using Evidence = std::map<std::string, std::string>;

struct Cpt {
    std::vector<int> parents; // ascending node indices
    Matrix table;             // one row per full parent state, columns = child levels
};

struct Distribution {
    std::string variable;
    std::vector<std::string> levels;
    std::vector<double> probabilities;

    double prob(const std::string& level) const;
};

class BayesianNetwork {
  public:
    BayesianNetwork() = default;
    BayesianNetwork(std::vector<std::string> labels,
                    std::vector<std::vector<std::string>> levels, std::vector<Cpt> cpts);

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::vector<std::string>>& levels() const { return levels_; }
    const std::vector<Cpt>& cpts() const { return cpts_; }

    int var_index(const std::string& name) const; // throws UnknownVariable
    int level_index(int var, const std::string& label) const;
    std::size_t node_count() const { return labels_.size(); }

    notears::DagStructure dag() const;

  private:
    std::vector<std::string> labels_;
    std::vector<std::vector<std::string>> levels_;
    std::vector<Cpt> cpts_;
    std::map<std::string, int> index_;
};

// Maximum-likelihood CPTs with Laplace smoothing `alpha`; an unseen parent
// state under alpha = 0 falls back to the uniform row.
BayesianNetwork fit(const notears::DagStructure& dag,
                    const features::DiscreteObservationTable& data, double alpha);

// Exact posterior P(target | evidence) by variable elimination (min-degree
// order, name-lexicographic ties).
Distribution query(const BayesianNetwork& bn, const Evidence& evidence,
                   const std::string& target);

// Same, but with a caller-chosen elimination order (a permutation of the
// non-target, non-evidence variables). Exists so order invariance is testable.
Distribution query_with_order(const BayesianNetwork& bn, const Evidence& evidence,
                              const std::string& target, const std::vector<int>& order);

// Graph-mutilation semantics: intervened nodes lose their incoming edges and
// are clamped before conditioning on the remaining evidence.
Distribution do_query(const BayesianNetwork& bn, const Evidence& interventions,
                      const Evidence& evidence, const std::string& target);

// Reference semantics for query: full joint enumeration. Guarded to state
// spaces of at most 2^20 assignments.
Distribution joint_brute_force(const BayesianNetwork& bn, const Evidence& evidence,
                               const std::string& target);

// Scores one observation row: `row` must assign every variable except target.
Distribution predict_proba(const BayesianNetwork& bn, const Evidence& row,
                           const std::string& target);

std::string to_json_string(const BayesianNetwork& bn);
BayesianNetwork from_json_string(const std::string& text);
void save(const BayesianNetwork& bn, const std::string& path);
BayesianNetwork load(const std::string& path);

} // namespace causalpanel::bayesnet
