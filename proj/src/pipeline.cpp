#include "causalpanel/pipeline.hpp"

#include "causalpanel/bayesnet.hpp"
#include "causalpanel/csv.hpp"
#include "causalpanel/dates.hpp"
#include "causalpanel/dot.hpp"
#include "causalpanel/errors.hpp"
#include "causalpanel/rng.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace causalpanel::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string out_path(const RunConfig& config, const std::string& name) {
    fs::create_directories(config.output_dir);
    return (fs::path(config.output_dir) / name).string();
}

std::string three_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct LearnArtifacts {
    features::NumericFeatureMatrix matrix;
    notears::LearnResult result;
    notears::DagStructure dag;
};

LearnArtifacts learn_from_inputs(const RunConfig& config) {
    LearnArtifacts art;
    const auto panel = load_inputs(config);
    art.matrix = features::engineer(panel);
    const auto mask = mask_for(config, art.matrix.columns);
    art.result = notears::learn_structure(features::standardize(art.matrix).values,
                                          art.matrix.columns, mask, optimizer_options(config));
    art.dag = notears::threshold_to_dag(art.result.w, config.omega);
    return art;
}

json weights_to_json(const notears::LearnResult& result, const RunConfig& config) {
    json doc;
    doc["labels"] = result.w.labels;
    json values = json::array();
    for (std::size_t i = 0; i < result.w.values.size(); ++i)
        values.push_back(result.w.values.data()[i]);
    doc["values"] = std::move(values);
    doc["omega"] = config.omega;
    doc["lambda1"] = config.lambda1;
    doc["h_final"] = result.h_final;
    doc["converged"] = result.converged;
    return doc;
}

json dag_to_json(const notears::DagStructure& dag) {
    json doc;
    doc["labels"] = dag.labels;
    json edges = json::array();
    for (const auto& e : dag.edges) {
        json entry;
        entry["from"] = dag.labels[static_cast<std::size_t>(e.from)];
        entry["to"] = dag.labels[static_cast<std::size_t>(e.to)];
        if (e.has_weight()) entry["weight"] = e.weight;
        edges.push_back(std::move(entry));
    }
    doc["edges"] = std::move(edges);
    return doc;
}

int report_error(const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
}

} // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw IoError("short write to '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

ingest::RawPanel load_inputs(const RunConfig& config) {
    validate(config);
    std::vector<ingest::EpidemicSeries> epidemic;
    if (config.epidemic_format == "jhu_wide") {
        if (config.epidemic_deaths_csv.empty())
            throw ConfigError("jhu_wide needs epidemic_deaths_csv alongside epidemic_csv");
        epidemic = ingest::load_epidemic_series_jhu(config.epidemic_csv,
                                                    config.epidemic_deaths_csv);
    } else {
        epidemic = ingest::load_epidemic_series_tidy(config.epidemic_csv);
    }
    const auto stats = ingest::load_country_stats(config.stats_csv);
    const auto attention = ingest::load_attention_series(config.attention_csv);
    return ingest::assemble_panel(epidemic, stats, attention, config.countries,
                                  config.date_start, config.date_end);
}

notears::EdgeConstraintMask mask_for(const RunConfig& config,
                                     const std::vector<std::string>& labels) {
    if (config.constraints == "none") return {};
    if (config.constraints.empty())
        return notears::EdgeConstraintMask::from_pairs(notears::default_forbidden_pairs(),
                                                       labels);
    return notears::EdgeConstraintMask::from_json_file(config.constraints, labels);
}

notears::OptimizerOptions optimizer_options(const RunConfig& config) {
    notears::OptimizerOptions opts;
    opts.lambda1 = config.lambda1;
    opts.h_tol = config.h_tol;
    opts.rho_max = config.rho_max;
    opts.max_outer_iterations = config.max_outer_iterations;
    opts.omega = config.omega;
    return opts;
}

notears::DagStructure load_dag_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read DAG file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedCsv("DAG file '" + path + "': " + e.what());
    }
    notears::DagStructure dag;
    dag.labels = doc.at("labels").get<std::vector<std::string>>();
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < dag.labels.size(); ++i)
        index[dag.labels[i]] = static_cast<int>(i);
    for (const auto& e : doc.at("edges")) {
        notears::DagEdge edge{index.at(e.at("from").get<std::string>()),
                              index.at(e.at("to").get<std::string>()),
                              std::nan("")};
        if (e.contains("weight")) edge.weight = e.at("weight").get<double>();
        dag.edges.push_back(edge);
    }
    if (!notears::is_acyclic(dag)) throw MalformedCsv("DAG file '" + path + "' has a cycle");
    return dag;
}

std::vector<eval::QuerySpec> load_battery(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read battery '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedCsv("battery '" + path + "': " + e.what());
    }
    if (!doc.is_array()) throw MalformedCsv("battery '" + path + "' must be a JSON list");
    std::vector<eval::QuerySpec> out;
    for (const auto& item : doc) {
        eval::QuerySpec spec;
        spec.target = item.at("target").get<std::string>();
        spec.state = item.at("state").get<std::string>();
        if (item.contains("evidence"))
            for (const auto& [var, level] : item.at("evidence").items())
                spec.evidence[var] = level.get<std::string>();
        out.push_back(std::move(spec));
    }
    return out;
}

int run_learn(const RunConfig& config) {
    try {
        const auto art = learn_from_inputs(config);
        write_file_atomic(out_path(config, "weights.json"),
                          weights_to_json(art.result, config).dump(2) + "\n");
        write_file_atomic(out_path(config, "graph.json"), dag_to_json(art.dag).dump(2) + "\n");
        write_file_atomic(out_path(config, "graph.dot"), to_dot(art.dag));
        if (!art.result.converged) {
            std::cerr << "warning: notears: solver stopped at rho_max with h = "
                      << csv::format_double(art.result.h_final) << "\n";
            return kExitDidNotConverge;
        }
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e);
    }
}

int run_fit(const RunConfig& config) {
    try {
        const auto panel = load_inputs(config);
        const auto matrix = features::engineer(panel);
        const auto policy = features::fit_discretization(matrix);
        const auto table = features::discretize(matrix, policy);

        bool converged = true;
        notears::DagStructure dag;
        if (!config.structure.empty()) {
            dag = load_dag_json(config.structure);
        } else {
            const auto mask = mask_for(config, matrix.columns);
            const auto result = notears::learn_structure(
                features::standardize(matrix).values, matrix.columns, mask,
                optimizer_options(config));
            converged = result.converged;
            dag = notears::threshold_to_dag(result.w, config.omega);
        }

        const auto bn = bayesnet::fit(dag, table, config.alpha);
        write_file_atomic(out_path(config, "model.json"), bayesnet::to_json_string(bn) + "\n");
        return converged ? kExitOk : kExitDidNotConverge;
    } catch (const Error& e) {
        return report_error(e);
    }
}

int run_query(const RunConfig& config, const std::string& model_path,
              const std::string& battery_path) {
    try {
        const auto bn = bayesnet::load(model_path);
        const auto battery = load_battery(battery_path);
        const auto report = eval::run_query_battery(bn, battery);

        std::string csv_text = "evidence,target,state,probability\n";
        json doc = json::array();
        for (const auto& row : report.rows) {
            std::string evidence;
            for (const auto& [var, level] : row.spec.evidence) {
                if (!evidence.empty()) evidence += ";";
                evidence += var + "=" + level;
            }
            const std::string prob =
                row.error.empty() ? three_decimals(row.probability) : "error:" + row.error;
            csv_text += csv::join_fields({evidence, row.spec.target, row.spec.state, prob}) + "\n";

            json entry;
            entry["evidence"] = json::object();
            for (const auto& [var, level] : row.spec.evidence) entry["evidence"][var] = level;
            entry["target"] = row.spec.target;
            entry["state"] = row.spec.state;
            if (row.error.empty())
                entry["probability"] = row.probability;
            else
                entry["error"] = row.error;
            doc.push_back(std::move(entry));
        }

        write_file_atomic(out_path(config, "query_report.csv"), csv_text);
        write_file_atomic(out_path(config, "query_report.json"), doc.dump(2) + "\n");
        std::cout << csv_text;
        return report.has_errors() ? kExitPartialQueryFailure : kExitOk;
    } catch (const Error& e) {
        return report_error(e);
    }
}

int run_crossval(const RunConfig& config) {
    try {
        const auto panel = load_inputs(config);
        const auto matrix = features::engineer(panel);
        const auto mask = mask_for(config, matrix.columns);

        eval::CvOptions cv;
        cv.global_cutoffs = config.global_cutoffs;
        if (!config.structure.empty()) cv.fixed_structure = load_dag_json(config.structure);

        const auto report = eval::cross_validate(matrix, mask, optimizer_options(config),
                                                 config.alpha, config.target, cv);

        std::string csv_text = "country,auroc\n";
        for (const auto& [country, auc] : report.per_country)
            csv_text += csv::join_fields({country, csv::format_double(auc)}) + "\n";
        csv_text += csv::join_fields({"average", csv::format_double(report.average)}) + "\n";

        json doc;
        doc["target"] = report.target_variable;
        doc["global_cutoffs"] = report.global_cutoffs;
        doc["per_country"] = json::object();
        for (const auto& [country, auc] : report.per_country) doc["per_country"][country] = auc;
        doc["excluded"] = report.excluded;
        doc["average"] = report.average;

        write_file_atomic(out_path(config, "crossval.csv"), csv_text);
        write_file_atomic(out_path(config, "crossval.json"), doc.dump(2) + "\n");
        for (const auto& note : report.excluded)
            std::cerr << "warning: eval: fold excluded, " << note << "\n";
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e);
    }
}

namespace {

// Synthesizes ingest-compatible fixture CSVs whose engineered features carry
// the ground-truth network's signal where the raw schemas can express it.
void simulate_paperlike(const RunConfig& config) {
    Rng rng(config.seed);
    const auto axis = dates::range_inclusive(config.date_start, config.date_end);

    ingest::RawPanel panel;
    panel.countries = config.countries;
    panel.date_start = config.date_start;
    panel.date_end = config.date_end;

    for (std::size_t c = 0; c < config.countries.size(); ++c) {
        const bool twitter_high = rng.bernoulli(0.5);
        ingest::CountryStats stats;
        stats.country = config.countries[c];
        stats.population = 8000000 + static_cast<std::int64_t>(c) * 700000;
        stats.pct_over_65 = rng.bernoulli(0.5) ? 0.22 : 0.15;
        stats.pct_single_households = rng.bernoulli(0.5) ? 0.42 : 0.28;
        stats.pct_twitter_users = twitter_high ? 0.12 : 0.04;
        long long lockdown_day = -1;
        if (rng.bernoulli(0.75)) {
            lockdown_day = rng.uniform_int(15, static_cast<int>(axis.size()) - 5);
            stats.lockdown_date = axis[static_cast<std::size_t>(lockdown_day)];
        }

        std::int64_t cum_inf = 0;
        std::int64_t cum_dead = 0;
        for (std::size_t d = 0; d < axis.size(); ++d) {
            const bool inf_high = rng.bernoulli(0.30);
            const bool dead_high = rng.bernoulli(0.30);
            const bool lockdown_on = lockdown_day >= 0 &&
                                     static_cast<long long>(d) >= lockdown_day &&
                                     static_cast<long long>(d) <= lockdown_day + 2;

            const int active = (twitter_high ? 1 : 0) + (inf_high ? 1 : 0) +
                               (dead_high ? 1 : 0) + (lockdown_on ? 1 : 0);
            static const double p_tweets[] = {0.02, 0.15, 0.50, 0.85, 0.98};
            static const double p_negative[] = {0.10, 0.35, 0.60, 0.82, 0.95};
            const bool tweets_high = rng.bernoulli(p_tweets[active]);
            const bool negative = rng.bernoulli(p_negative[active]);

            cum_inf += inf_high ? rng.uniform_int(300, 600) : rng.uniform_int(0, 60);
            cum_dead += dead_high ? rng.uniform_int(30, 80) : rng.uniform_int(0, 8);

            ingest::PanelRow row;
            row.country = stats.country;
            row.date = axis[d];
            row.cumulative_infections = cum_inf;
            row.cumulative_deaths = cum_dead;
            row.tweet_count = tweets_high ? rng.uniform_int(2000, 4000)
                                          : rng.uniform_int(100, 800);
            row.avg_sentiment = negative ? -rng.uniform(0.05, 0.6) : rng.uniform(0.05, 0.6);
            row.population = stats.population;
            row.pct_over_65 = stats.pct_over_65;
            row.pct_single_households = stats.pct_single_households;
            row.pct_twitter_users = stats.pct_twitter_users;
            row.lockdown_date = stats.lockdown_date;
            panel.rows.push_back(std::move(row));
        }
    }

    ingest::write_panel_tidy(panel, out_path(config, "sim_epidemic.csv"),
                             out_path(config, "sim_stats.csv"),
                             out_path(config, "sim_attention.csv"));
}

void simulate_sem(const RunConfig& config) {
    notears::DagStructure chain;
    for (int i = 0; i < config.sem_nodes; ++i) chain.labels.push_back("x" + std::to_string(i + 1));
    for (int i = 0; i + 1 < config.sem_nodes; ++i)
        chain.edges.push_back({i, i + 1, config.sem_weight});

    const Matrix x =
        eval::generate_synthetic_sem(chain, config.sem_rows, config.sem_noise_sd, config.seed);

    std::string text;
    for (std::size_t j = 0; j < chain.labels.size(); ++j) {
        if (j) text += ",";
        text += chain.labels[j];
    }
    text += "\n";
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (j) text += ",";
            text += csv::format_double(x(r, j));
        }
        text += "\n";
    }
    write_file_atomic(out_path(config, "sim_sem.csv"), text);
}

} // namespace

int run_simulate(const RunConfig& config, const std::string& kind) {
    try {
        validate(config);
        if (kind == "paperlike") {
            simulate_paperlike(config);
        } else if (kind == "sem") {
            simulate_sem(config);
        } else {
            throw ConfigError("simulate kind must be 'paperlike' or 'sem', got '" + kind + "'");
        }
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e);
    }
}

int run_features_dump(const RunConfig& config) {
    try {
        const auto panel = load_inputs(config);
        const auto matrix = features::engineer(panel);
        const auto policy = features::fit_discretization(matrix);
        const auto table = features::discretize(matrix, policy);

        std::string numeric = "country,date";
        for (const auto& col : matrix.columns) numeric += "," + col;
        numeric += "\n";
        for (std::size_t r = 0; r < matrix.values.rows(); ++r) {
            std::vector<std::string> fields = {matrix.row_keys[r].first,
                                               matrix.row_keys[r].second};
            for (std::size_t c = 0; c < matrix.values.cols(); ++c)
                fields.push_back(csv::format_double(matrix.values(r, c)));
            numeric += csv::join_fields(fields) + "\n";
        }

        std::string discrete = "country,date";
        for (const auto& col : table.columns) discrete += "," + col;
        discrete += "\n";
        for (std::size_t r = 0; r < table.values.size(); ++r) {
            std::vector<std::string> fields = {table.row_keys[r].first,
                                               table.row_keys[r].second};
            for (std::size_t c = 0; c < table.columns.size(); ++c)
                fields.push_back(table.levels[c][static_cast<std::size_t>(table.values[r][c])]);
            discrete += csv::join_fields(fields) + "\n";
        }

        write_file_atomic(out_path(config, "features_numeric.csv"), numeric);
        write_file_atomic(out_path(config, "features_discrete.csv"), discrete);
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e);
    }
}

int run_export_dot(const std::string& weights_json_path, const std::string& dot_path) {
    try {
        std::ifstream in(weights_json_path);
        if (!in) throw IoError("cannot read weights file '" + weights_json_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw MalformedCsv("weights file '" + weights_json_path + "': " + e.what());
        }
        notears::WeightedAdjacency w;
        w.labels = doc.at("labels").get<std::vector<std::string>>();
        const auto values = doc.at("values").get<std::vector<double>>();
        const std::size_t n = w.labels.size();
        if (values.size() != n * n)
            throw MalformedCsv("weights file has " + std::to_string(values.size()) +
                               " values for " + std::to_string(n) + " labels");
        w.values = Matrix(n, n);
        for (std::size_t i = 0; i < values.size(); ++i) w.values.data()[i] = values[i];
        const double omega = doc.at("omega").get<double>();

        write_file_atomic(dot_path, to_dot(notears::threshold_to_dag(w, omega)));
        return kExitOk;
    } catch (const Error& e) {
        return report_error(e);
    }
}

} // namespace causalpanel::cli
