#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmftrack/corpus.hpp"
#include "cmftrack/model.hpp"
#include "cmftrack/tracker.hpp"

namespace cmft {

struct EvalOptions {
  bool final_only = false;     // score only the last turn of each dialog
  int reshuffle_splits = 0;    // when >= 2, also report a reshuffled-split std
  std::uint64_t seed = 1;      // drives the reshuffle only
  TrackerOptions tracker;
};

struct EvalReport {
  double joint_goal_accuracy = 0.0;
  std::map<std::string, double> per_slot_accuracy;
  long n_turns = 0;
  long n_dialogs = 0;
  bool final_only = false;
  int reshuffle_splits = 0;
  std::optional<double> joint_goal_std;

  nlohmann::json to_json() const;
};

// Fraction of turns where the prediction matches gold on every variable.
// Variables missing from an assignment are read as None.
double joint_goal_accuracy(const std::vector<Assignment>& predictions,
                           const std::vector<Assignment>& golds);

// Fraction of turns where one variable is correct. The variable must appear
// somewhere in the inputs.
double slot_accuracy(const std::vector<Assignment>& predictions,
                     const std::vector<Assignment>& golds,
                     const std::string& variable);

// Track every dialog, decode the argmax per turn and aggregate both metrics.
// Every turn must carry a gold state valid under the model's schema.
EvalReport evaluate_corpus(const FactorModel& model,
                           const std::vector<DialogLog>& logs,
                           EvalOptions options = {});

}  // namespace cmft
