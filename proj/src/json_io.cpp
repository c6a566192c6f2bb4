#include "mvpln/json_io.hpp"

#include "mvpln/csv.hpp"

namespace mvpln {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& what) {
  if (!j.is_object()) throw config_error(what + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw config_error(what + ": unknown key '" + item.key() + "'");
  }
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw config_error("matrix JSON must be a non-empty array of arrays");
  const Index rows = Index(j.size());
  const Index cols = Index(j[0].size());
  Matrix M(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (Index(j[size_t(r)].size()) != cols)
      throw config_error("ragged matrix JSON");
    for (Index c = 0; c < cols; ++c)
      M(r, c) = j[size_t(r)][size_t(c)].get<double>();
  }
  return M;
}

json model_fit_to_json(const ModelFit& fit) {
  return json{{"lambda1", fit.lambda1},
              {"lambda2", fit.lambda2},
              {"b", matrix_to_json(fit.B)},
              {"omega", matrix_to_json(fit.Omega)}};
}

ModelFit model_fit_from_json(const json& j) {
  check_keys(j, {"lambda1", "lambda2", "b", "omega"}, "model fit");
  ModelFit fit;
  fit.lambda1 = j.at("lambda1").get<double>();
  fit.lambda2 = j.at("lambda2").get<double>();
  fit.B = matrix_from_json(j.at("b"));
  fit.Omega = matrix_from_json(j.at("omega"));
  fit.validate();
  return fit;
}

const std::set<std::string>& fit_config_keys() {
  static const std::set<std::string> keys{
      "lambda1_grid", "lambda2_grid", "gamma",          "m",
      "tau",          "burn_in",      "thinning",       "em_max_iter",
      "em_tol",       "mstep_max_iter", "mstep_tol",    "seed"};
  return keys;
}

const std::set<std::string>& sim_config_keys() {
  static const std::set<std::string> keys{
      "n",      "n_test", "p",       "q",    "mu_min",
      "mu_max", "sigma_x", "mu_b",   "sigma_b", "zeros_per_column",
      "psi",    "omega_scenario",    "band_width", "seed"};
  return keys;
}

FitConfig fit_config_from_json(const json& j) {
  FitConfig cfg;
  if (j.contains("lambda1_grid"))
    cfg.lambda1_grid = j.at("lambda1_grid").get<std::vector<double>>();
  if (j.contains("lambda2_grid"))
    cfg.lambda2_grid = j.at("lambda2_grid").get<std::vector<double>>();
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
  if (j.contains("m")) cfg.m = j.at("m").get<int>();
  if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
  if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<int>();
  if (j.contains("thinning")) cfg.thinning = j.at("thinning").get<int>();
  if (j.contains("em_max_iter")) cfg.em_max_iter = j.at("em_max_iter").get<int>();
  if (j.contains("em_tol")) cfg.em_tol = j.at("em_tol").get<double>();
  if (j.contains("mstep_max_iter"))
    cfg.mstep_max_iter = j.at("mstep_max_iter").get<int>();
  if (j.contains("mstep_tol")) cfg.mstep_tol = j.at("mstep_tol").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("n_test")) cfg.n_test = j.at("n_test").get<int>();
  if (j.contains("p")) cfg.p = j.at("p").get<int>();
  if (j.contains("q")) cfg.q = j.at("q").get<int>();
  if (j.contains("mu_min")) cfg.mu_min = j.at("mu_min").get<double>();
  if (j.contains("mu_max")) cfg.mu_max = j.at("mu_max").get<double>();
  if (j.contains("sigma_x")) cfg.sigma_x = j.at("sigma_x").get<double>();
  if (j.contains("mu_b")) cfg.mu_b = j.at("mu_b").get<double>();
  if (j.contains("sigma_b")) cfg.sigma_b = j.at("sigma_b").get<double>();
  if (j.contains("zeros_per_column"))
    cfg.zeros_per_column = j.at("zeros_per_column").get<int>();
  if (j.contains("psi")) cfg.psi = j.at("psi").get<double>();
  if (j.contains("omega_scenario"))
    cfg.omega_scenario =
        omega_scenario_from_string(j.at("omega_scenario").get<std::string>());
  if (j.contains("band_width")) cfg.band_width = j.at("band_width").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

json fit_config_to_json(const FitConfig& cfg) {
  return json{{"lambda1_grid", cfg.lambda1_grid},
              {"lambda2_grid", cfg.lambda2_grid},
              {"gamma", cfg.gamma},
              {"m", cfg.m},
              {"tau", cfg.tau},
              {"burn_in", cfg.burn_in},
              {"thinning", cfg.thinning},
              {"em_max_iter", cfg.em_max_iter},
              {"em_tol", cfg.em_tol},
              {"mstep_max_iter", cfg.mstep_max_iter},
              {"mstep_tol", cfg.mstep_tol},
              {"seed", cfg.seed}};
}

json sim_config_to_json(const SimConfig& cfg) {
  return json{{"n", cfg.n},
              {"n_test", cfg.n_test},
              {"p", cfg.p},
              {"q", cfg.q},
              {"mu_min", cfg.mu_min},
              {"mu_max", cfg.mu_max},
              {"sigma_x", cfg.sigma_x},
              {"mu_b", cfg.mu_b},
              {"sigma_b", cfg.sigma_b},
              {"zeros_per_column", cfg.zeros_per_column},
              {"psi", cfg.psi},
              {"omega_scenario", to_string(cfg.omega_scenario)},
              {"band_width", cfg.band_width},
              {"seed", cfg.seed}};
}

namespace {

json metric_summary_to_json(const MetricSummary& s) {
  return json{{"mean", s.mean}, {"se", s.se}, {"median", s.median},
              {"count", s.count}};
}

json method_summary(const std::vector<MetricsReport>& reports,
                    double convergence_rate, bool with_omega) {
  json out{{"convergence_rate", convergence_rate},
           {"est_error_b", metric_summary_to_json(summarize(reports, "est_error_b"))},
           {"rmse_avg", metric_summary_to_json(summarize(reports, "rmse_avg"))}};
  if (with_omega)
    out["est_error_omega"] =
        metric_summary_to_json(summarize(reports, "est_error_omega"));
  return out;
}

}  // namespace

json replication_summary_to_json(const ReplicationSummary& summary,
                                 const SimConfig& sim_cfg, int n_reps) {
  return json{
      {"scenario", to_string(sim_cfg.omega_scenario)},
      {"psi", sim_cfg.psi},
      {"n_reps", n_reps},
      {"mvpln",
       method_summary(summary.mvpln, summary.mvpln_convergence_rate, true)},
      {"glmnet", method_summary(summary.baseline,
                                summary.baseline_convergence_rate, false)}};
}

void write_json_atomic(const std::string& path, const json& j) {
  atomic_write_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error("JSON parse error in " + path + ": " + e.what());
  }
}

}  // namespace mvpln
