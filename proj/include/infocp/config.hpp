#pragma once

#include <string>
#include <vector>

#include "infocp/simulate.hpp"

namespace infocp {

// Experiment configs live in JSON: either a single experiment object or
// {"experiments": [...]}. Throws std::invalid_argument with a field path on
// schema errors.
std::vector<ExperimentConfig> parse_experiment_suite(const std::string& json_text);
std::vector<ExperimentConfig> load_experiment_suite(const std::string& path);

// Round-trip of the resolved configuration, written next to the report so a
// run is reproducible from its outputs alone.
std::string echo_config_json(const std::vector<ExperimentConfig>& suite);

// Tagged-union schema, e.g. {"kind":"exclude_interval","a":2.0,"b":4.0}.
InformativeSpec parse_informative_json(const std::string& json_text);

std::string outcome_to_json(const SelectionOutcome& outcome);

// Score configuration for the CLI `run` subcommand.
//
// Regression models are declared as predictor functions
//   {"task":"regression","kind":"locally_weighted",
//    "mu":{"kind":"linear","coef":[...],"intercept":0.0},
//    "sigma":{"kind":"constant","value":1.0}}
// Classification either fits the built-in classifier
//   {"task":"classification","kind":"fit_gaussian","K":3}
// or takes precomputed probability tables (CSV, header pi1..piK, rows
// parallel to the calibration/test files)
//   {"task":"classification","kind":"pi_table","K":3,
//    "pi_cal_csv":"...","pi_test_csv":"..."}.
struct RunScoreConfig {
  Task task = Task::kRegression;
  ScoreModel model = ScoreModel::locally_weighted(nullptr, nullptr);  // regression / fit_gaussian
  bool fit_gaussian = false;
  int K = 0;
  bool pi_table = false;
  std::string pi_cal_csv;
  std::string pi_test_csv;
};

RunScoreConfig load_score_config(const std::string& path);

// K-column probability table, header pi1..piK.
std::vector<std::vector<double>> load_pi_table(const std::string& path, int K);

}  // namespace infocp
