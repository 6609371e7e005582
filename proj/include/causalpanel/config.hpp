#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace causalpanel::cli {

// Run configuration: a key=value file (# comments allowed) whose entries can
// be overridden by command-line flags. All randomness flows from `seed`.
struct RunConfig {
    std::string epidemic_csv;
    std::string epidemic_format = "tidy"; // tidy | jhu_wide
    std::string epidemic_deaths_csv;      // second wide file for jhu_wide
    std::string stats_csv;
    std::string attention_csv;

    std::vector<std::string> countries = {
        "Italy",   "Spain",  "Germany",        "France",  "Switzerland", "United Kingdom",
        "Netherlands", "Norway", "Austria",    "Belgium", "Sweden",      "Denmark"};
    std::string date_start = "2020-01-22";
    std::string date_end = "2020-03-18";

    double lambda1 = 0.1;
    double omega = 0.3;
    double alpha = 1.0; // CPT smoothing
    double h_tol = 1e-8;
    double rho_max = 1e16;
    int max_outer_iterations = 100;
    std::uint64_t seed = 1;

    std::string constraints;  // path; "" = built-in default set, "none" = empty
    std::string structure;    // optional DAG JSON to reuse instead of learning
    std::string output_dir = "out";
    std::string target = "tweets_pc";
    bool global_cutoffs = false;

    // Simulation shape knobs.
    int sem_nodes = 5;
    double sem_weight = 1.5;
    int sem_rows = 1000;
    double sem_noise_sd = 1.0;
};

RunConfig load_config(const std::string& path);
void apply_override(RunConfig& config, const std::string& key, const std::string& value);
void validate(const RunConfig& config);

} // namespace causalpanel::cli
