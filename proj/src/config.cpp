#include "causalpanel/config.hpp"

#include "causalpanel/csv.hpp"
#include "causalpanel/dates.hpp"
#include "causalpanel/errors.hpp"

#include <fstream>

namespace causalpanel::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    const std::string last = trim(cur);
    if (!last.empty() || !out.empty()) out.push_back(last);
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + " must be a boolean, got '" + v + "'");
}

} // namespace

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "epidemic_csv") config.epidemic_csv = value;
    else if (key == "epidemic_format") config.epidemic_format = value;
    else if (key == "epidemic_deaths_csv") config.epidemic_deaths_csv = value;
    else if (key == "stats_csv") config.stats_csv = value;
    else if (key == "attention_csv") config.attention_csv = value;
    else if (key == "countries") config.countries = split_list(value);
    else if (key == "date_start") config.date_start = value;
    else if (key == "date_end") config.date_end = value;
    else if (key == "lambda1") config.lambda1 = csv::parse_double(value, key);
    else if (key == "omega") config.omega = csv::parse_double(value, key);
    else if (key == "alpha") config.alpha = csv::parse_double(value, key);
    else if (key == "h_tol") config.h_tol = csv::parse_double(value, key);
    else if (key == "rho_max") config.rho_max = csv::parse_double(value, key);
    else if (key == "max_outer_iterations")
        config.max_outer_iterations = static_cast<int>(csv::parse_int(value, key));
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(csv::parse_int(value, key));
    else if (key == "constraints") config.constraints = value;
    else if (key == "structure") config.structure = value;
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "target") config.target = value;
    else if (key == "global_cutoffs") config.global_cutoffs = parse_bool(value, key);
    else if (key == "sem_nodes") config.sem_nodes = static_cast<int>(csv::parse_int(value, key));
    else if (key == "sem_weight") config.sem_weight = csv::parse_double(value, key);
    else if (key == "sem_rows") config.sem_rows = static_cast<int>(csv::parse_int(value, key));
    else if (key == "sem_noise_sd") config.sem_noise_sd = csv::parse_double(value, key);
    else throw ConfigError("unknown key '" + key + "'");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    RunConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("'" + path + "' line " + std::to_string(lineno) +
                              ": expected key=value");
        apply_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

void validate(const RunConfig& config) {
    if (!dates::is_valid_iso(config.date_start) || !dates::is_valid_iso(config.date_end))
        throw ConfigError("date_start/date_end must be ISO dates");
    if (config.date_end < config.date_start)
        throw ConfigError("date_end precedes date_start");
    if (config.countries.empty()) throw ConfigError("countries list is empty");
    if (config.lambda1 < 0.0) throw ConfigError("lambda1 must be nonnegative");
    if (config.omega < 0.0) throw ConfigError("omega must be nonnegative");
    if (config.alpha < 0.0) throw ConfigError("alpha must be nonnegative");
    if (config.h_tol <= 0.0) throw ConfigError("h_tol must be positive");
    if (config.rho_max <= 0.0) throw ConfigError("rho_max must be positive");
    if (config.max_outer_iterations < 1)
        throw ConfigError("max_outer_iterations must be positive");
    if (config.epidemic_format != "tidy" && config.epidemic_format != "jhu_wide")
        throw ConfigError("epidemic_format must be tidy or jhu_wide");
}

} // namespace causalpanel::cli
