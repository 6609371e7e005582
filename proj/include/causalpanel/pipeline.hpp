#pragma once

#include "causalpanel/config.hpp"
#include "causalpanel/eval.hpp"
#include "causalpanel/features.hpp"
#include "causalpanel/ingest.hpp"
#include "causalpanel/notears.hpp"

#include <string>
#include <vector>

namespace causalpanel::cli {

// Exit codes shared by every subcommand:
//   0 success, 1 input/validation error, 2 solver non-convergence,
//   3 partial query failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitDidNotConverge = 2;
inline constexpr int kExitPartialQueryFailure = 3;

// Shared building blocks (also used by tests).
ingest::RawPanel load_inputs(const RunConfig& config);
notears::EdgeConstraintMask mask_for(const RunConfig& config,
                                     const std::vector<std::string>& labels);
notears::OptimizerOptions optimizer_options(const RunConfig& config);
notears::DagStructure load_dag_json(const std::string& path);
std::vector<eval::QuerySpec> load_battery(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

// Subcommand drivers. Each catches toolkit errors, reports them on stderr
// with the originating module, and maps them onto the exit-code contract.
int run_learn(const RunConfig& config);
int run_fit(const RunConfig& config);
int run_query(const RunConfig& config, const std::string& model_path,
              const std::string& battery_path);
int run_crossval(const RunConfig& config);
int run_simulate(const RunConfig& config, const std::string& kind);
int run_features_dump(const RunConfig& config);
int run_export_dot(const std::string& weights_json_path, const std::string& dot_path);

} // namespace causalpanel::cli
