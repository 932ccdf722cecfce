#include "cmftrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace cmft {

namespace {

const std::string& value_or_none(const Assignment& a, const std::string& variable) {
  static const std::string none = kNoneValue;
  auto it = a.find(variable);
  return it == a.end() ? none : it->second;
}

bool assignments_match(const Assignment& a, const Assignment& b) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  for (const std::string& k : keys) {
    if (value_or_none(a, k) != value_or_none(b, k)) return false;
  }
  return true;
}

void check_lengths(const std::vector<Assignment>& predictions,
                   const std::vector<Assignment>& golds) {
  if (predictions.size() != golds.size()) {
    throw DataError("prediction and gold lists differ in length");
  }
  if (predictions.empty()) {
    throw DataError("cannot score an empty turn list");
  }
}

}  // namespace

double joint_goal_accuracy(const std::vector<Assignment>& predictions,
                           const std::vector<Assignment>& golds) {
  check_lengths(predictions, golds);
  long correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (assignments_match(predictions[i], golds[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double slot_accuracy(const std::vector<Assignment>& predictions,
                     const std::vector<Assignment>& golds,
                     const std::string& variable) {
  check_lengths(predictions, golds);
  bool seen = false;
  for (const Assignment& a : predictions) seen = seen || a.count(variable) > 0;
  for (const Assignment& a : golds) seen = seen || a.count(variable) > 0;
  if (!seen) {
    throw DataError("variable '" + variable + "' appears in no assignment");
  }
  long correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (value_or_none(predictions[i], variable) == value_or_none(golds[i], variable)) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

EvalReport evaluate_corpus(const FactorModel& model,
                           const std::vector<DialogLog>& logs,
                           EvalOptions options) {
  if (logs.empty()) {
    throw DataError("cannot evaluate an empty corpus");
  }
  const StateSchema& schema = model.schema();

  // Scored (prediction, gold) pairs, grouped per dialog for the reshuffle.
  std::vector<Assignment> predictions;
  std::vector<Assignment> golds;
  std::vector<std::vector<bool>> dialog_matches(logs.size());

  for (size_t di = 0; di < logs.size(); ++di) {
    const DialogLog& dialog = logs[di];
    for (const Turn& turn : dialog.turns) {
      if (!turn.gold.has_value()) {
        throw DataError("dialog " + dialog.dialog_id +
                        " has a turn without a gold state");
      }
      for (const auto& [name, value] : *turn.gold) {
        schema.value_index(schema.variable_index(name), value);
      }
    }
    std::vector<BeliefState> beliefs = track_dialog(model, dialog, options.tracker);
    for (size_t t = 0; t < dialog.turns.size(); ++t) {
      if (options.final_only && t + 1 != dialog.turns.size()) continue;
      Assignment pred = decode_argmax(schema, beliefs[t].to_state_vector());
      const Assignment& gold = *dialog.turns[t].gold;
      dialog_matches[di].push_back(assignments_match(pred, gold));
      predictions.push_back(std::move(pred));
      golds.push_back(gold);
    }
  }

  EvalReport report;
  report.final_only = options.final_only;
  report.n_dialogs = static_cast<long>(logs.size());
  report.n_turns = static_cast<long>(predictions.size());
  report.joint_goal_accuracy = joint_goal_accuracy(predictions, golds);
  for (const VariableSpec& spec : schema.variables()) {
    report.per_slot_accuracy[spec.name] = slot_accuracy(predictions, golds, spec.name);
  }

  if (options.reshuffle_splits >= 2) {
    const int splits = options.reshuffle_splits;
    if (splits > static_cast<int>(logs.size())) {
      throw DataError("more reshuffle splits than dialogs");
    }
    std::vector<size_t> order(logs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(options.seed);
    std::shuffle(order.begin(), order.end(), gen);

    std::vector<double> split_accuracy;
    for (int s = 0; s < splits; ++s) {
      long correct = 0;
      long total = 0;
      for (size_t pos = s; pos < order.size(); pos += splits) {
        for (bool match : dialog_matches[order[pos]]) {
          correct += match ? 1 : 0;
          ++total;
        }
      }
      if (total == 0) {
        throw DataError("reshuffle split has no scored turns");
      }
      split_accuracy.push_back(static_cast<double>(correct) /
                               static_cast<double>(total));
    }
    double mean = std::accumulate(split_accuracy.begin(), split_accuracy.end(), 0.0) /
                  splits;
    double var = 0.0;
    for (double x : split_accuracy) var += (x - mean) * (x - mean);
    report.joint_goal_std = std::sqrt(var / (splits - 1));
    report.reshuffle_splits = splits;
  }

  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"joint_goal_accuracy", joint_goal_accuracy},
                      {"per_slot_accuracy", per_slot_accuracy},
                      {"n_turns", n_turns},
                      {"n_dialogs", n_dialogs},
                      {"final_only", final_only}};
  if (joint_goal_std.has_value()) {
    j["joint_goal_std"] = *joint_goal_std;
    j["reshuffle_splits"] = reshuffle_splits;
  }
  return j;
}

}  // namespace cmft
