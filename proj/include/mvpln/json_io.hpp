#pragma once

#include "mvpln/metrics.hpp"
#include "mvpln/simgen.hpp"
#include "mvpln/types.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace mvpln {

using json = nlohmann::json;

/// Throws config_error on any key of j not in allowed.
void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& what);

json matrix_to_json(const Matrix& M);     // nested row-major arrays
Matrix matrix_from_json(const json& j);

json model_fit_to_json(const ModelFit& fit);
ModelFit model_fit_from_json(const json& j);

/// Keys each config consumes from a flat run-config object. Other keys in
/// the object must belong to the other whitelists; anything unknown is
/// rejected by the CLI.
const std::set<std::string>& fit_config_keys();
const std::set<std::string>& sim_config_keys();

/// Reads the FitConfig fields present in j (missing fields keep defaults).
FitConfig fit_config_from_json(const json& j);
SimConfig sim_config_from_json(const json& j);

json fit_config_to_json(const FitConfig& cfg);
json sim_config_to_json(const SimConfig& cfg);

json replication_summary_to_json(const ReplicationSummary& summary,
                                 const SimConfig& sim_cfg, int n_reps);

void write_json_atomic(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace mvpln
