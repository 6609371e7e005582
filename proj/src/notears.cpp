#include "causalpanel/notears.hpp"

#include "causalpanel/errors.hpp"
#include "causalpanel/features.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

namespace causalpanel::notears {

namespace {

using json = nlohmann::ordered_json;

// Nonnegative split of the weight matrix: theta = [w_plus; w_minus], each of
// length n*n, with W = w_plus - w_minus. The split keeps the l1 term smooth
// on the feasible orthant.
struct Subproblem {
    const Matrix& x;
    std::size_t n;
    double inv_m;
    double lambda1;
    double rho;
    double alpha; // Lagrange multiplier
    const std::vector<char>& masked; // n*n flags, diagonal included

    Matrix weights(const std::vector<double>& theta) const {
        Matrix w(n, n);
        const std::size_t nn = n * n;
        for (std::size_t i = 0; i < nn; ++i) w.data()[i] = theta[i] - theta[nn + i];
        return w;
    }

    double eval(const std::vector<double>& theta, std::vector<double>& grad) const {
        const Matrix w = weights(theta);

        const Matrix xw = matmul(x, w);
        const Matrix resid = subtract(x, xw);
        const double loss = 0.5 * inv_m * frobenius_norm_sq(resid);
        const Matrix loss_grad = scale(matmul_transposed_a(x, resid), -inv_m);

        const Matrix sq = hadamard(w, w);
        const Matrix e = expm(sq);
        const double h = trace(e) - static_cast<double>(n);
        const Matrix h_grad = hadamard(transpose(e), scale(w, 2.0));

        double l1 = 0.0;
        for (double t : theta) l1 += t;

        const double f = loss + 0.5 * rho * h * h + alpha * h + lambda1 * l1;

        const double hmul = rho * h + alpha;
        const std::size_t nn = n * n;
        grad.assign(2 * nn, 0.0);
        for (std::size_t i = 0; i < nn; ++i) {
            if (masked[i]) continue;
            const double g = loss_grad.data()[i] + hmul * h_grad.data()[i];
            grad[i] = g + lambda1;
            grad[nn + i] = -g + lambda1;
        }
        return f;
    }

    void project(std::vector<double>& theta) const {
        const std::size_t nn = n * n;
        for (std::size_t i = 0; i < nn; ++i) {
            if (masked[i]) {
                theta[i] = 0.0;
                theta[nn + i] = 0.0;
                continue;
            }
            if (theta[i] < 0.0) theta[i] = 0.0;
            if (theta[nn + i] < 0.0) theta[nn + i] = 0.0;
        }
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Projected L-BFGS with Armijo backtracking over the projected arc.
double solve_subproblem(const Subproblem& prob, std::vector<double>& theta,
                        const OptimizerOptions& opts) {
    const std::size_t dim = theta.size();
    prob.project(theta);

    std::vector<double> grad(dim), new_grad(dim);
    double f = prob.eval(theta, grad);

    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;

    std::vector<double> direction(dim), candidate(dim), step(dim);

    for (int iter = 0; iter < opts.max_inner_iterations; ++iter) {
        // Projected-gradient optimality measure.
        double pg = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double moved = theta[i] - grad[i];
            if (moved < 0.0) moved = 0.0;
            const double d = std::abs(moved - theta[i]);
            if (d > pg) pg = d;
        }
        if (pg <= opts.pg_tol) break;

        // Two-loop recursion for d = -H g.
        const std::size_t hist = s_hist.size();
        std::vector<double> q = grad;
        std::vector<double> coeff(hist, 0.0);
        for (std::size_t k = hist; k-- > 0;) {
            coeff[k] = rho_hist[k] * dot(s_hist[k], q);
            for (std::size_t i = 0; i < dim; ++i) q[i] -= coeff[k] * y_hist[k][i];
        }
        double gamma = 1.0;
        if (hist > 0) {
            const auto& s_last = s_hist.back();
            const auto& y_last = y_hist.back();
            gamma = dot(s_last, y_last) / dot(y_last, y_last);
        }
        for (std::size_t i = 0; i < dim; ++i) direction[i] = gamma * q[i];
        for (std::size_t k = 0; k < hist; ++k) {
            const double beta = rho_hist[k] * dot(y_hist[k], direction);
            for (std::size_t i = 0; i < dim; ++i)
                direction[i] += (coeff[k] - beta) * s_hist[k][i];
        }
        for (std::size_t i = 0; i < dim; ++i) direction[i] = -direction[i];

        // Backtracking Armijo line search along the projected arc; falls back
        // to steepest descent once if the quasi-Newton direction stalls.
        constexpr double c1 = 1e-4;
        bool accepted = false;
        double f_new = f;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1)
                for (std::size_t i = 0; i < dim; ++i) direction[i] = -grad[i];
            double alpha_step = 1.0;
            for (int halvings = 0; halvings < 60; ++halvings) {
                for (std::size_t i = 0; i < dim; ++i)
                    candidate[i] = theta[i] + alpha_step * direction[i];
                prob.project(candidate);
                for (std::size_t i = 0; i < dim; ++i) step[i] = candidate[i] - theta[i];
                const double decrease = dot(grad, step);
                f_new = prob.eval(candidate, new_grad);
                if (f_new <= f + c1 * decrease) {
                    accepted = true;
                    break;
                }
                alpha_step *= 0.5;
            }
        }
        if (!accepted) break;

        // Curvature update.
        std::vector<double> y(dim);
        for (std::size_t i = 0; i < dim; ++i) y[i] = new_grad[i] - grad[i];
        const double sy = dot(step, y);
        if (sy > 1e-10) {
            if (static_cast<int>(s_hist.size()) == opts.lbfgs_memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
            s_hist.push_back(step);
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }

        const double f_prev = f;
        theta = candidate;
        grad = new_grad;
        f = f_new;
        if (std::abs(f_prev - f) <= opts.f_tol * std::max({1.0, std::abs(f_prev), std::abs(f)}))
            break;
    }
    return f;
}

} // namespace

HResult acyclicity_h(const Matrix& w) {
    if (w.rows() != w.cols()) throw DimensionMismatch("acyclicity_h needs a square matrix");
    const Matrix e = expm(hadamard(w, w));
    HResult out;
    out.value = trace(e) - static_cast<double>(w.rows());
    out.gradient = hadamard(transpose(e), scale(w, 2.0));
    return out;
}

LossResult squared_loss(const Matrix& w, const Matrix& x) {
    if (w.rows() != w.cols() || x.cols() != w.rows())
        throw DimensionMismatch("squared_loss: X is " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + " but W is " +
                                std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    const double inv_m = 1.0 / static_cast<double>(x.rows());
    const Matrix resid = subtract(x, matmul(x, w));
    LossResult out;
    out.value = 0.5 * inv_m * frobenius_norm_sq(resid);
    out.gradient = scale(matmul_transposed_a(x, resid), -inv_m);
    return out;
}

void EdgeConstraintMask::validate(std::size_t n) const {
    for (const auto& [i, j] : forbidden) {
        if (i == j) throw DimensionMismatch("constraint mask contains a self-loop");
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n)
            throw DimensionMismatch("constraint mask index out of range");
    }
}

EdgeConstraintMask EdgeConstraintMask::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& labels) {
    auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        throw UnknownVariable("constraint label '" + name + "' is not a feature name");
    };
    EdgeConstraintMask mask;
    for (const auto& [from, to] : pairs) {
        const int i = index_of(from);
        const int j = index_of(to);
        if (i == j) throw DimensionMismatch("constraint mask contains a self-loop: " + from);
        mask.forbidden.emplace(i, j);
    }
    return mask;
}

EdgeConstraintMask EdgeConstraintMask::from_json_file(const std::string& path,
                                                      const std::vector<std::string>& labels) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open constraint file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedCsv("constraint file '" + path + "': " + e.what());
    }
    const json* list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("forbidden"))
            throw MalformedCsv("constraint file '" + path + "' object lacks 'forbidden'");
        list = &doc["forbidden"];
    }
    if (!list->is_array())
        throw MalformedCsv("constraint file '" + path + "' is not a list of pairs");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& item : *list) {
        if (!item.is_object() || !item.contains("from") || !item.contains("to"))
            throw MalformedCsv("constraint entry needs 'from' and 'to'");
        pairs.emplace_back(item["from"].get<std::string>(), item["to"].get<std::string>());
    }
    return from_pairs(pairs, labels);
}

LearnResult learn_structure(const Matrix& x, const std::vector<std::string>& labels,
                            const EdgeConstraintMask& mask, const OptimizerOptions& opts) {
    const std::size_t n = x.cols();
    if (labels.size() != n)
        throw DimensionMismatch("learn_structure: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(n) + " columns");
    if (x.rows() < 2) throw DimensionMismatch("learn_structure needs at least 2 samples");
    mask.validate(n);

    std::vector<char> masked(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) masked[i * n + i] = 1;
    for (const auto& [i, j] : mask.forbidden)
        masked[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = 1;

    std::vector<double> theta(2 * n * n, 0.0);
    double rho = 1.0;
    double alpha = 0.0;
    double h = std::numeric_limits<double>::infinity();

    LearnResult result;
    Matrix w(n, n);

    for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
        std::vector<double> theta_new;
        double h_new = std::numeric_limits<double>::infinity();
        double f_new = 0.0;
        while (true) {
            Subproblem prob{x, n, 1.0 / static_cast<double>(x.rows()),
                            opts.lambda1, rho, alpha, masked};
            theta_new = theta;
            f_new = solve_subproblem(prob, theta_new, opts);
            w = prob.weights(theta_new);
            h_new = acyclicity_h(w).value;
            if (h_new > 0.25 * h && rho < opts.rho_max)
                rho *= 10.0;
            else
                break;
        }
        theta = std::move(theta_new);
        h = h_new;
        result.trace.push_back({rho, alpha, h, f_new});
        alpha += rho * h;
        if (h <= opts.h_tol || rho >= opts.rho_max) break;
    }

    result.w.labels = labels;
    result.w.values = std::move(w);
    result.h_final = h;
    result.converged = h <= opts.h_tol;
    return result;
}

bool DagStructure::has_edge(int from, int to) const {
    for (const auto& e : edges)
        if (e.from == from && e.to == to) return true;
    return false;
}

std::vector<int> DagStructure::parents_of(int node) const {
    std::vector<int> out;
    for (const auto& e : edges)
        if (e.to == node) out.push_back(e.from);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Returns one directed cycle (as a list of edge indices into `edges`), or an
// empty list when the graph is acyclic. DFS order is fixed by node index so
// the extraction is deterministic.
std::vector<std::size_t> find_cycle(int n, const std::vector<DagEdge>& edges) {
    std::vector<std::vector<std::pair<int, std::size_t>>> adj(n);
    for (std::size_t k = 0; k < edges.size(); ++k)
        adj[edges[k].from].emplace_back(edges[k].to, k);
    for (auto& row : adj) std::sort(row.begin(), row.end());

    std::vector<int> color(n, 0); // 0 white, 1 gray, 2 black
    std::vector<std::size_t> via_edge(n, 0);
    std::vector<int> parent(n, -1);
    std::vector<std::size_t> cycle;

    std::function<bool(int)> dfs = [&](int u) {
        color[u] = 1;
        for (const auto& [v, k] : adj[u]) {
            if (color[v] == 1) {
                // Unwind u -> ... -> v plus the closing edge.
                cycle.push_back(k);
                int cur = u;
                while (cur != v) {
                    cycle.push_back(via_edge[cur]);
                    cur = parent[cur];
                }
                return true;
            }
            if (color[v] == 0) {
                parent[v] = u;
                via_edge[v] = k;
                if (dfs(v)) return true;
            }
        }
        color[u] = 2;
        return false;
    };
    for (int s = 0; s < n; ++s)
        if (color[s] == 0 && dfs(s)) return cycle;
    return {};
}

} // namespace

DagStructure threshold_to_dag(const WeightedAdjacency& w, double omega) {
    const int n = static_cast<int>(w.size());
    DagStructure dag;
    dag.labels = w.labels;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(w.values(i, j)) > omega)
                dag.edges.push_back({i, j, w.values(i, j)});

    while (true) {
        const auto cycle = find_cycle(n, dag.edges);
        if (cycle.empty()) break;
        std::size_t victim = cycle.front();
        for (std::size_t k : cycle) {
            const auto& cand = dag.edges[k];
            const auto& best = dag.edges[victim];
            const double ca = std::abs(cand.weight);
            const double ba = std::abs(best.weight);
            if (ca < ba || (ca == ba && std::pair(cand.from, cand.to) < std::pair(best.from, best.to)))
                victim = k;
        }
        dag.edges.erase(dag.edges.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    return dag;
}

std::optional<std::vector<int>> topological_order(const DagStructure& g) {
    const int n = static_cast<int>(g.labels.size());
    std::vector<int> indegree(n, 0);
    std::vector<std::vector<int>> children(n);
    for (const auto& e : g.edges) {
        ++indegree[e.to];
        children[e.from].push_back(e.to);
    }
    std::vector<int> order;
    order.reserve(n);
    std::vector<char> emitted(n, 0);
    for (int round = 0; round < n; ++round) {
        int pick = -1;
        for (int v = 0; v < n; ++v) {
            if (!emitted[v] && indegree[v] == 0) {
                pick = v;
                break;
            }
        }
        if (pick < 0) return std::nullopt;
        emitted[pick] = 1;
        order.push_back(pick);
        for (int c : children[pick]) --indegree[c];
    }
    return order;
}

bool is_acyclic(const DagStructure& g) { return topological_order(g).has_value(); }

std::vector<std::pair<std::string, std::string>> default_forbidden_pairs() {
    const std::vector<std::string> attention = {"tweets_pc", "avg_sentiment"};
    const std::vector<std::string> pandemic = {"total_infections_pc",   "new_infections_pc",
                                               "pct_change_infections", "total_deaths_pc",
                                               "new_deaths_pc",         "pct_change_deaths"};
    const std::vector<std::string> exogenous = {"pct_over_65", "pct_single_households",
                                                "pct_twitter_users", "lockdown_announced"};
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& src : attention)
        for (const auto& dst : pandemic) pairs.emplace_back(src, dst);
    for (const auto& dst : exogenous)
        for (const char* src : features::kFeatureNames)
            if (dst != src) pairs.emplace_back(src, dst);
    return pairs;
}

} // namespace causalpanel::notears
