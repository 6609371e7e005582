#include "causalpanel/bayesnet.hpp"

#include "causalpanel/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace causalpanel::bayesnet {

namespace {

using json = nlohmann::ordered_json;

struct Factor {
    std::vector<int> vars; // ascending
    std::vector<int> cards;
    std::vector<double> values; // row-major over vars

    std::size_t size() const { return values.size(); }
};

std::size_t card_product(const std::vector<int>& cards) {
    std::size_t p = 1;
    for (int c : cards) p *= static_cast<std::size_t>(c);
    return p;
}

Factor factor_of_cpt(const BayesianNetwork& bn, int node) {
    const Cpt& cpt = bn.cpts()[node];
    std::vector<int> scope = cpt.parents;
    scope.push_back(node);
    std::sort(scope.begin(), scope.end());

    Factor f;
    f.vars = scope;
    for (int v : scope) f.cards.push_back(static_cast<int>(bn.levels()[v].size()));
    f.values.assign(card_product(f.cards), 0.0);

    // Walk every assignment of the scope and pull the matching CPT cell.
    std::vector<int> assign(scope.size(), 0);
    const int child_card = static_cast<int>(bn.levels()[node].size());
    for (std::size_t flat = 0; flat < f.values.size(); ++flat) {
        std::size_t row = 0;
        int child_state = 0;
        for (std::size_t k = 0; k < scope.size(); ++k) {
            if (scope[k] == node) child_state = assign[k];
        }
        for (int p : cpt.parents) {
            int state = 0;
            for (std::size_t k = 0; k < scope.size(); ++k)
                if (scope[k] == p) state = assign[k];
            row = row * static_cast<std::size_t>(bn.levels()[p].size()) +
                  static_cast<std::size_t>(state);
        }
        f.values[flat] = cpt.table(row, static_cast<std::size_t>(child_state));

        for (std::size_t k = scope.size(); k-- > 0;) {
            if (++assign[k] < f.cards[k]) break;
            assign[k] = 0;
        }
        (void)child_card;
    }
    return f;
}

Factor reduce(const Factor& f, int var, int level) {
    const auto it = std::find(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end()) return f;
    const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());

    Factor out;
    out.vars = f.vars;
    out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
    out.cards = f.cards;
    out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
    out.values.assign(card_product(out.cards), 0.0);

    std::vector<int> assign(out.vars.size(), 0);
    for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
        std::size_t src = 0;
        std::size_t k_out = 0;
        for (std::size_t k = 0; k < f.vars.size(); ++k) {
            const int state = (k == pos) ? level : assign[k_out++];
            src = src * static_cast<std::size_t>(f.cards[k]) + static_cast<std::size_t>(state);
        }
        out.values[flat] = f.values[src];
        for (std::size_t k = out.vars.size(); k-- > 0;) {
            if (++assign[k] < out.cards[k]) break;
            assign[k] = 0;
        }
    }
    return out;
}

Factor multiply(const Factor& a, const Factor& b) {
    Factor out;
    out.vars.reserve(a.vars.size() + b.vars.size());
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                   std::back_inserter(out.vars));
    std::map<int, int> card_of;
    for (std::size_t k = 0; k < a.vars.size(); ++k) card_of[a.vars[k]] = a.cards[k];
    for (std::size_t k = 0; k < b.vars.size(); ++k) card_of[b.vars[k]] = b.cards[k];
    for (int v : out.vars) out.cards.push_back(card_of[v]);
    out.values.assign(card_product(out.cards), 0.0);

    std::vector<int> assign(out.vars.size(), 0);
    auto flat_index = [&](const Factor& f) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < f.vars.size(); ++k) {
            const auto it = std::lower_bound(out.vars.begin(), out.vars.end(), f.vars[k]);
            const std::size_t pos = static_cast<std::size_t>(it - out.vars.begin());
            idx = idx * static_cast<std::size_t>(f.cards[k]) +
                  static_cast<std::size_t>(assign[pos]);
        }
        return idx;
    };
    for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
        out.values[flat] = a.values[flat_index(a)] * b.values[flat_index(b)];
        for (std::size_t k = out.vars.size(); k-- > 0;) {
            if (++assign[k] < out.cards[k]) break;
            assign[k] = 0;
        }
    }
    return out;
}

Factor sum_out(const Factor& f, int var) {
    const auto it = std::find(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end()) return f;
    const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());

    Factor out;
    out.vars = f.vars;
    out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
    out.cards = f.cards;
    out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
    out.values.assign(card_product(out.cards), 0.0);

    std::vector<int> assign(f.vars.size(), 0);
    for (std::size_t flat = 0; flat < f.values.size(); ++flat) {
        std::size_t dst = 0;
        for (std::size_t k = 0; k < f.vars.size(); ++k) {
            if (k == pos) continue;
            dst = dst * static_cast<std::size_t>(f.cards[k]) +
                  static_cast<std::size_t>(assign[k]);
        }
        out.values[dst] += f.values[flat];
        for (std::size_t k = f.vars.size(); k-- > 0;) {
            if (++assign[k] < f.cards[k]) break;
            assign[k] = 0;
        }
    }
    return out;
}

void validate_evidence(const BayesianNetwork& bn, const Evidence& evidence) {
    for (const auto& [var, level] : evidence) {
        const int v = bn.var_index(var);
        bn.level_index(v, level); // throws on bad label
    }
}

// Remaining eliminable variable with the fewest distinct co-occurring
// variables; ties broken by name.
int pick_min_degree(const BayesianNetwork& bn, const std::vector<Factor>& factors,
                    const std::set<int>& remaining) {
    int best = -1;
    std::size_t best_degree = 0;
    for (int v : remaining) {
        std::set<int> neighbors;
        for (const Factor& f : factors) {
            if (std::find(f.vars.begin(), f.vars.end(), v) == f.vars.end()) continue;
            for (int u : f.vars)
                if (u != v) neighbors.insert(u);
        }
        const std::size_t degree = neighbors.size();
        if (best < 0 || degree < best_degree ||
            (degree == best_degree && bn.labels()[v] < bn.labels()[best])) {
            best = v;
            best_degree = degree;
        }
    }
    return best;
}

Distribution eliminate(const BayesianNetwork& bn, const Evidence& evidence,
                       const std::string& target, const std::vector<int>* forced_order) {
    validate_evidence(bn, evidence);
    const int target_idx = bn.var_index(target);
    if (evidence.count(target)) throw UnknownVariable("target '" + target + "' is in evidence");

    std::vector<Factor> factors;
    factors.reserve(bn.node_count());
    for (std::size_t v = 0; v < bn.node_count(); ++v)
        factors.push_back(factor_of_cpt(bn, static_cast<int>(v)));
    for (const auto& [var, level] : evidence) {
        const int v = bn.var_index(var);
        const int l = bn.level_index(v, level);
        for (Factor& f : factors) f = reduce(f, v, l);
    }

    std::set<int> remaining;
    for (std::size_t v = 0; v < bn.node_count(); ++v) {
        const int vi = static_cast<int>(v);
        if (vi != target_idx && !evidence.count(bn.labels()[v])) remaining.insert(vi);
    }

    if (forced_order) {
        if (std::set<int>(forced_order->begin(), forced_order->end()) != remaining)
            throw UnknownVariable("elimination order is not a permutation of the eliminable set");
    }

    std::size_t order_pos = 0;
    while (!remaining.empty()) {
        const int v = forced_order ? (*forced_order)[order_pos++]
                                   : pick_min_degree(bn, factors, remaining);
        remaining.erase(v);

        Factor merged;
        merged.values = {1.0};
        bool any = false;
        std::vector<Factor> rest;
        for (Factor& f : factors) {
            if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end()) {
                merged = any ? multiply(merged, f) : std::move(f);
                any = true;
            } else {
                rest.push_back(std::move(f));
            }
        }
        if (any) rest.push_back(sum_out(merged, v));
        factors = std::move(rest);
    }

    Factor joint;
    joint.values = {1.0};
    for (const Factor& f : factors) joint = multiply(joint, f);

    Distribution dist;
    dist.variable = target;
    dist.levels = bn.levels()[static_cast<std::size_t>(target_idx)];
    dist.probabilities.assign(dist.levels.size(), 0.0);

    if (joint.vars.empty()) {
        // Target factor collapsed; cannot happen since the target's own CPT
        // always carries it, but keep the guard.
        throw UnknownVariable("target factor missing after elimination");
    }
    double z = 0.0;
    for (double v : joint.values) z += v;
    if (z == 0.0) throw InconsistentEvidence("while querying '" + target + "'");
    for (std::size_t l = 0; l < dist.probabilities.size(); ++l)
        dist.probabilities[l] = joint.values[l] / z;
    return dist;
}

} // namespace

double Distribution::prob(const std::string& level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == level) return probabilities[i];
    throw UnknownVariable("level '" + level + "' not in distribution of " + variable);
}

BayesianNetwork::BayesianNetwork(std::vector<std::string> labels,
                                 std::vector<std::vector<std::string>> levels,
                                 std::vector<Cpt> cpts)
    : labels_(std::move(labels)), levels_(std::move(levels)), cpts_(std::move(cpts)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) index_[labels_[i]] = static_cast<int>(i);
}

int BayesianNetwork::var_index(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw UnknownVariable("'" + name + "'");
    return it->second;
}

int BayesianNetwork::level_index(int var, const std::string& label) const {
    const auto& lv = levels_[static_cast<std::size_t>(var)];
    for (std::size_t i = 0; i < lv.size(); ++i)
        if (lv[i] == label) return static_cast<int>(i);
    throw UnknownVariable("level '" + label + "' invalid for variable '" +
                          labels_[static_cast<std::size_t>(var)] + "'");
}

notears::DagStructure BayesianNetwork::dag() const {
    notears::DagStructure g;
    g.labels = labels_;
    for (std::size_t v = 0; v < cpts_.size(); ++v)
        for (int p : cpts_[v].parents)
            g.edges.push_back({p, static_cast<int>(v), std::nan("")});
    return g;
}

BayesianNetwork fit(const notears::DagStructure& dag,
                    const features::DiscreteObservationTable& data, double alpha) {
    if (alpha < 0.0) throw UnknownVariable("smoothing alpha must be nonnegative");
    const std::size_t n = dag.labels.size();

    std::vector<int> data_col(n);
    for (std::size_t v = 0; v < n; ++v) {
        data_col[v] = data.column_index(dag.labels[v]);
        if (data_col[v] < 0) throw UnknownVariable("'" + dag.labels[v] + "' not in data columns");
    }

    std::vector<std::vector<std::string>> levels(n);
    for (std::size_t v = 0; v < n; ++v)
        levels[v] = data.levels[static_cast<std::size_t>(data_col[v])];

    std::vector<Cpt> cpts(n);
    for (std::size_t v = 0; v < n; ++v) {
        Cpt& cpt = cpts[v];
        cpt.parents = dag.parents_of(static_cast<int>(v));
        const std::size_t card = levels[v].size();
        std::size_t rows = 1;
        for (int p : cpt.parents) rows *= levels[static_cast<std::size_t>(p)].size();

        Matrix counts(rows, card, 0.0);
        for (const auto& obs : data.values) {
            std::size_t row = 0;
            for (int p : cpt.parents)
                row = row * levels[static_cast<std::size_t>(p)].size() +
                      static_cast<std::size_t>(obs[static_cast<std::size_t>(data_col[p])]);
            const int state = obs[static_cast<std::size_t>(data_col[v])];
            counts(row, static_cast<std::size_t>(state)) += 1.0;
        }

        cpt.table = Matrix(rows, card, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < card; ++c) total += counts(r, c);
            const double denom = total + alpha * static_cast<double>(card);
            if (denom == 0.0) {
                for (std::size_t c = 0; c < card; ++c)
                    cpt.table(r, c) = 1.0 / static_cast<double>(card);
            } else {
                for (std::size_t c = 0; c < card; ++c)
                    cpt.table(r, c) = (counts(r, c) + alpha) / denom;
            }
        }
    }
    return BayesianNetwork(dag.labels, std::move(levels), std::move(cpts));
}

Distribution query(const BayesianNetwork& bn, const Evidence& evidence,
                   const std::string& target) {
    return eliminate(bn, evidence, target, nullptr);
}

Distribution query_with_order(const BayesianNetwork& bn, const Evidence& evidence,
                              const std::string& target, const std::vector<int>& order) {
    return eliminate(bn, evidence, target, &order);
}

Distribution do_query(const BayesianNetwork& bn, const Evidence& interventions,
                      const Evidence& evidence, const std::string& target) {
    for (const auto& [var, level] : interventions) {
        if (evidence.count(var))
            throw UnknownVariable("'" + var + "' appears in both interventions and evidence");
        if (var == target) throw UnknownVariable("cannot intervene on the query target");
    }
    validate_evidence(bn, interventions);

    std::vector<Cpt> cpts = bn.cpts();
    for (const auto& [var, level] : interventions) {
        const int v = bn.var_index(var);
        const int l = bn.level_index(v, level);
        Cpt clamped;
        clamped.parents = {};
        clamped.table = Matrix(1, bn.levels()[static_cast<std::size_t>(v)].size(), 0.0);
        clamped.table(0, static_cast<std::size_t>(l)) = 1.0;
        cpts[static_cast<std::size_t>(v)] = std::move(clamped);
    }
    BayesianNetwork mutilated(bn.labels(), bn.levels(), std::move(cpts));

    Evidence combined = evidence;
    for (const auto& kv : interventions) combined.insert(kv);
    return query(mutilated, combined, target);
}

Distribution joint_brute_force(const BayesianNetwork& bn, const Evidence& evidence,
                               const std::string& target) {
    validate_evidence(bn, evidence);
    const int target_idx = bn.var_index(target);
    if (evidence.count(target)) throw UnknownVariable("target '" + target + "' is in evidence");

    const std::size_t n = bn.node_count();
    std::size_t states = 1;
    for (std::size_t v = 0; v < n; ++v) {
        states *= bn.levels()[v].size();
        if (states > (1u << 20))
            throw StateSpaceTooLarge(std::to_string(n) + " variables");
    }

    std::vector<int> fixed(n, -1);
    for (const auto& [var, level] : evidence) {
        const int v = bn.var_index(var);
        fixed[static_cast<std::size_t>(v)] = bn.level_index(v, level);
    }

    Distribution dist;
    dist.variable = target;
    dist.levels = bn.levels()[static_cast<std::size_t>(target_idx)];
    dist.probabilities.assign(dist.levels.size(), 0.0);

    std::vector<int> assign(n, 0);
    for (std::size_t flat = 0; flat < states; ++flat) {
        bool consistent = true;
        for (std::size_t v = 0; v < n && consistent; ++v)
            consistent = fixed[v] < 0 || assign[v] == fixed[v];
        if (consistent) {
            double p = 1.0;
            for (std::size_t v = 0; v < n; ++v) {
                const Cpt& cpt = bn.cpts()[v];
                std::size_t row = 0;
                for (int par : cpt.parents)
                    row = row * bn.levels()[static_cast<std::size_t>(par)].size() +
                          static_cast<std::size_t>(assign[static_cast<std::size_t>(par)]);
                p *= cpt.table(row, static_cast<std::size_t>(assign[v]));
            }
            dist.probabilities[static_cast<std::size_t>(assign[static_cast<std::size_t>(
                target_idx)])] += p;
        }
        for (std::size_t v = n; v-- > 0;) {
            if (++assign[v] < static_cast<int>(bn.levels()[v].size())) break;
            assign[v] = 0;
        }
    }

    double z = 0.0;
    for (double p : dist.probabilities) z += p;
    if (z == 0.0) throw InconsistentEvidence("while enumerating for '" + target + "'");
    for (double& p : dist.probabilities) p /= z;
    return dist;
}

Distribution predict_proba(const BayesianNetwork& bn, const Evidence& row,
                           const std::string& target) {
    bn.var_index(target);
    for (const auto& label : bn.labels()) {
        if (label == target) continue;
        if (!row.count(label)) throw IncompleteRow("missing '" + label + "'");
    }
    return query(bn, row, target);
}

std::string to_json_string(const BayesianNetwork& bn) {
    json doc;
    doc["variables"] = json::array();
    for (std::size_t v = 0; v < bn.node_count(); ++v) {
        json var;
        var["name"] = bn.labels()[v];
        var["levels"] = bn.levels()[v];
        doc["variables"].push_back(std::move(var));
    }
    doc["edges"] = json::array();
    for (std::size_t v = 0; v < bn.node_count(); ++v)
        for (int p : bn.cpts()[v].parents)
            doc["edges"].push_back({{"from", bn.labels()[static_cast<std::size_t>(p)]},
                                    {"to", bn.labels()[v]}});
    doc["cpts"] = json::array();
    for (std::size_t v = 0; v < bn.node_count(); ++v) {
        const Cpt& cpt = bn.cpts()[v];
        json entry;
        entry["child"] = bn.labels()[v];
        json parents = json::array();
        for (int p : cpt.parents) parents.push_back(bn.labels()[static_cast<std::size_t>(p)]);
        entry["parents"] = std::move(parents);
        json table = json::array();
        for (std::size_t r = 0; r < cpt.table.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < cpt.table.cols(); ++c) row.push_back(cpt.table(r, c));
            table.push_back(std::move(row));
        }
        entry["table"] = std::move(table);
        doc["cpts"].push_back(std::move(entry));
    }
    return doc.dump(2);
}

BayesianNetwork from_json_string(const std::string& text) {
    json doc = json::parse(text);
    std::vector<std::string> labels;
    std::vector<std::vector<std::string>> levels;
    for (const auto& var : doc.at("variables")) {
        labels.push_back(var.at("name").get<std::string>());
        levels.push_back(var.at("levels").get<std::vector<std::string>>());
    }
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);

    std::vector<Cpt> cpts(labels.size());
    std::set<std::pair<int, int>> cpt_edges;
    for (const auto& entry : doc.at("cpts")) {
        const int child = index.at(entry.at("child").get<std::string>());
        Cpt& cpt = cpts[static_cast<std::size_t>(child)];
        for (const auto& p : entry.at("parents")) {
            const int pi = index.at(p.get<std::string>());
            cpt.parents.push_back(pi);
            cpt_edges.emplace(pi, child);
        }
        const auto& table = entry.at("table");
        const std::size_t rows = table.size();
        const std::size_t cols = levels[static_cast<std::size_t>(child)].size();
        cpt.table = Matrix(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                cpt.table(r, c) = table[r][c].get<double>();
    }

    std::set<std::pair<int, int>> file_edges;
    for (const auto& e : doc.at("edges"))
        file_edges.emplace(index.at(e.at("from").get<std::string>()),
                           index.at(e.at("to").get<std::string>()));
    if (file_edges != cpt_edges)
        throw UnknownVariable("model file edges disagree with CPT parent lists");

    return BayesianNetwork(std::move(labels), std::move(levels), std::move(cpts));
}

void save(const BayesianNetwork& bn, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model '" + path + "'");
    out << to_json_string(bn) << "\n";
}

BayesianNetwork load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return from_json_string(text);
    } catch (const json::exception& e) {
        throw MalformedCsv("model file '" + path + "': " + e.what());
    }
}

} // namespace causalpanel::bayesnet
