#include "causalpanel/config.hpp"
#include "causalpanel/errors.hpp"
#include "causalpanel/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

using causalpanel::cli::RunConfig;

struct CommonArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value configuration file");
    auto track = [&args](const std::string& key) {
        return [&args, key](const std::string& value) {
            args.overrides.emplace_back(key, value);
        };
    };
    cmd->add_option_function<std::string>("--epidemic", track("epidemic_csv"),
                                          "epidemic CSV path");
    cmd->add_option_function<std::string>("--epidemic-format", track("epidemic_format"),
                                          "tidy or jhu_wide");
    cmd->add_option_function<std::string>("--epidemic-deaths", track("epidemic_deaths_csv"),
                                          "deaths wide CSV (jhu_wide only)");
    cmd->add_option_function<std::string>("--stats", track("stats_csv"), "country stats CSV");
    cmd->add_option_function<std::string>("--attention", track("attention_csv"),
                                          "attention CSV");
    cmd->add_option_function<std::string>("--countries", track("countries"),
                                          "comma-separated country list");
    cmd->add_option_function<std::string>("--date-start", track("date_start"), "ISO date");
    cmd->add_option_function<std::string>("--date-end", track("date_end"), "ISO date");
    cmd->add_option_function<std::string>("--lambda1", track("lambda1"), "l1 coefficient");
    cmd->add_option_function<std::string>("--omega", track("omega"), "edge threshold");
    cmd->add_option_function<std::string>("--alpha", track("alpha"), "CPT smoothing");
    cmd->add_option_function<std::string>("--h-tol", track("h_tol"), "acyclicity tolerance");
    cmd->add_option_function<std::string>("--seed", track("seed"), "run seed");
    cmd->add_option_function<std::string>("--constraints", track("constraints"),
                                          "constraint file, or 'none'");
    cmd->add_option_function<std::string>("--structure", track("structure"),
                                          "DAG JSON to reuse instead of learning");
    cmd->add_option_function<std::string>("--out", track("output_dir"), "output directory");
    cmd->add_option_function<std::string>("--target", track("target"), "prediction target");
    cmd->add_flag_callback("--global-cutoffs", [&args] {
        args.overrides.emplace_back("global_cutoffs", "true");
    });
}

RunConfig resolve(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) config = causalpanel::cli::load_config(args.config_path);
    for (const auto& [key, value] : args.overrides)
        causalpanel::cli::apply_override(config, key, value);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"causalpanel: causal structure discovery and Bayesian-network "
                 "queries over country-day panels"};
    app.require_subcommand(1);

    CommonArgs learn_args, fit_args, query_args, crossval_args, simulate_args, features_args;
    std::string model_path, battery_path, simulate_kind = "paperlike";
    std::string export_weights, export_out = "graph.dot";

    auto* learn = app.add_subcommand("learn", "learn a weighted adjacency and export the DAG");
    add_common(learn, learn_args);

    auto* fit = app.add_subcommand("fit", "fit Bayesian-network CPTs and write model.json");
    add_common(fit, fit_args);

    auto* query = app.add_subcommand("query", "answer a battery of probability queries");
    add_common(query, query_args);
    query->add_option("--model", model_path, "model.json path")->required();
    query->add_option("--battery", battery_path, "query battery JSON")->required();

    auto* crossval = app.add_subcommand("crossval", "leave-one-country-out AUROC report");
    add_common(crossval, crossval_args);

    auto* simulate = app.add_subcommand("simulate", "write synthetic fixture CSVs");
    add_common(simulate, simulate_args);
    simulate->add_option("--kind", simulate_kind, "paperlike or sem");

    auto* features = app.add_subcommand("features", "feature-matrix utilities");
    auto* features_dump =
        features->add_subcommand("dump", "write numeric and discrete feature tables");
    add_common(features_dump, features_args);

    auto* export_dot = app.add_subcommand("export-dot", "render a weights JSON as Graphviz");
    export_dot->add_option("--weights", export_weights, "weights.json path")->required();
    export_dot->add_option("--out", export_out, "output DOT path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (learn->parsed()) return causalpanel::cli::run_learn(resolve(learn_args));
        if (fit->parsed()) return causalpanel::cli::run_fit(resolve(fit_args));
        if (query->parsed())
            return causalpanel::cli::run_query(resolve(query_args), model_path, battery_path);
        if (crossval->parsed()) return causalpanel::cli::run_crossval(resolve(crossval_args));
        if (simulate->parsed())
            return causalpanel::cli::run_simulate(resolve(simulate_args), simulate_kind);
        if (features->parsed() && features_dump->parsed())
            return causalpanel::cli::run_features_dump(resolve(features_args));
        if (export_dot->parsed())
            return causalpanel::cli::run_export_dot(export_weights, export_out);
    } catch (const causalpanel::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return causalpanel::cli::kExitInputError;
    }
    std::cerr << app.help();
    return causalpanel::cli::kExitInputError;
}
