#pragma once

#include <string>

#include <json.hpp>

#include "cmftrack/model.hpp"

namespace cmft {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // usage / validation failures
inline constexpr int kExitRuntime = 2;  // runtime / numerical failures

// Everything a subcommand needs; filled from a JSON config file and/or
// command-line flags (flags win). All randomness flows from `factor.seed`.
struct RunConfig {
  std::string corpus_path;
  std::string model_path;
  std::string schema_path;
  std::string out_path;
  std::string report_path;     // train: defaults to <model>.report.json
  std::string world_out_path;  // synth: defaults to <out>.world.json
  std::string world_in_path;   // synth: reuse an existing world

  FactorConfig factor;
  int min_count = 2;
  bool drop_system_tokens = false;
  bool hard_recurrence = false;
  bool full_projection = false;
  bool final_only = false;
  int reshuffle = 0;

  // synth corpus shape
  int n_dialogs = 100;
  int turns_per_dialog = 0;  // 0 -> one turn per variable
  int n_vars = 3;
  int values_per_var = 5;
  int indicators_per_value = 2;
  int noise_vocab_size = 40;
  int noise_words_per_turn = 2;
  double ambiguity = 0.0;

  // Overlay values from a config JSON object onto this struct.
  void apply_json(const nlohmann::json& j);
};

// Subcommand entry points. Diagnostics go to stderr; the return value is the
// process exit code.
int run_train(const RunConfig& config);
int run_track(const RunConfig& config);
int run_evaluate(const RunConfig& config);
int run_synth(const RunConfig& config);

}  // namespace cmft
