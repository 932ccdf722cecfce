#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmftrack/cli.hpp"
#include "cmftrack/errors.hpp"

namespace {

// --config is applied before CLI11 parses, so explicit flags override it.
int preload_config(int argc, char** argv, cmft::RunConfig& config) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const char* arg = argv[i];
    if (std::strcmp(arg, "--config") == 0 && i + 1 < argc)
      path = argv[i + 1];
    else if (std::strncmp(arg, "--config=", 9) == 0)
      path = arg + 9;
  }
  if (path.empty()) return cmft::kExitOk;
  try {
    std::ifstream in(path);
    if (!in) throw cmft::IoError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    config.apply_json(j);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cmft::kExitUsage;
  }
  return cmft::kExitOk;
}

void add_common_flags(CLI::App* cmd, cmft::RunConfig& config,
                      std::string& config_sink) {
  cmd->add_option("--config", config_sink,
                  "JSON file with defaults for any flag below")
      ->option_text("PATH");
  cmd->add_option("--seed", config.factor.seed, "random seed");
}

void add_tracker_flags(CLI::App* cmd, cmft::RunConfig& config) {
  cmd->add_flag("--hard-recurrence", config.hard_recurrence,
                "feed the argmax state forward instead of the belief");
  cmd->add_flag("--full-projection", config.full_projection,
                "project with all embedding rows instead of masking the next state");
}

}  // namespace

int main(int argc, char** argv) {
  cmft::RunConfig config;
  if (int rc = preload_config(argc, argv, config); rc != cmft::kExitOk) return rc;
  std::string config_sink;  // value already applied by preload_config

  CLI::App app{"dialog state tracking via collective matrix factorization"};
  app.require_subcommand(1);

  CLI::App* train = app.add_subcommand("train", "fit a model on an annotated corpus");
  add_common_flags(train, config, config_sink);
  train->add_option("--corpus", config.corpus_path, "training dialogs (JSON Lines)")
      ->option_text("PATH");
  train->add_option("--model", config.model_path, "output model archive")
      ->option_text("PATH");
  train->add_option("--schema", config.schema_path,
                    "schema JSON (inferred from gold annotations when omitted)")
      ->option_text("PATH");
  train->add_option("--report", config.report_path,
                    "train report path (default: <model>.report.json)")
      ->option_text("PATH");
  train->add_option("--k", config.factor.k, "latent dimension");
  train->add_option("--lambda-a", config.factor.lambda_a,
                    "ridge on transition embeddings");
  train->add_option("--lambda-b", config.factor.lambda_b,
                    "ridge on feature embeddings");
  train->add_option("--w-target", config.factor.w_target,
                    "column weight on the next-state block");
  train->add_option("--max-iters", config.factor.max_iters, "ALS iteration cap");
  train->add_option("--rel-tol", config.factor.rel_tol,
                    "relative loss change convergence threshold");
  train->add_option("--min-count", config.min_count,
                    "vocabulary frequency threshold");
  train->add_flag("--drop-system-tokens", config.drop_system_tokens,
                  "exclude system-side tokens from observations");

  CLI::App* track = app.add_subcommand("track", "emit per-turn beliefs for dialogs");
  add_common_flags(track, config, config_sink);
  track->add_option("--model", config.model_path, "model archive")->option_text("PATH");
  track->add_option("--corpus", config.corpus_path, "input dialogs (JSON Lines)")
      ->option_text("PATH");
  track->add_option("--out", config.out_path,
                    "output JSON Lines (stdout when omitted)")
      ->option_text("PATH");
  add_tracker_flags(track, config);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a model against gold annotations");
  add_common_flags(evaluate, config, config_sink);
  evaluate->add_option("--model", config.model_path, "model archive")
      ->option_text("PATH");
  evaluate->add_option("--corpus", config.corpus_path, "annotated dialogs (JSON Lines)")
      ->option_text("PATH");
  evaluate->add_option("--out", config.out_path, "also write the report here")
      ->option_text("PATH");
  evaluate->add_flag("--final-only", config.final_only,
                     "score only the last turn of each dialog");
  evaluate->add_option("--reshuffle", config.reshuffle,
                       "report a std over N reshuffled splits")
      ->option_text("N");
  add_tracker_flags(evaluate, config);

  CLI::App* synth =
      app.add_subcommand("synth", "generate an annotated corpus from a synthetic world");
  add_common_flags(synth, config, config_sink);
  synth->add_option("--out", config.out_path, "output corpus (JSON Lines)")
      ->option_text("PATH");
  synth->add_option("--world-out", config.world_out_path,
                    "world description path (default: <out>.world.json)")
      ->option_text("PATH");
  synth->add_option("--world-in", config.world_in_path,
                    "reuse an existing world description")
      ->option_text("PATH");
  synth->add_option("--n-dialogs", config.n_dialogs, "number of dialogs");
  synth->add_option("--turns", config.turns_per_dialog,
                    "turns per dialog (0: one per variable)");
  synth->add_option("--n-vars", config.n_vars, "number of slot variables");
  synth->add_option("--values-per-var", config.values_per_var,
                    "non-None values per variable");
  synth->add_option("--indicators-per-value", config.indicators_per_value,
                    "indicator words per value");
  synth->add_option("--noise-vocab", config.noise_vocab_size,
                    "size of the noise vocabulary");
  synth->add_option("--noise-per-turn", config.noise_words_per_turn,
                    "noise words per user utterance");
  synth->add_option("--ambiguity", config.ambiguity,
                    "fraction of values with a borrowed indicator, in [0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cmft::kExitOk : cmft::kExitUsage;
  }

  if (train->parsed()) return cmft::run_train(config);
  if (track->parsed()) return cmft::run_track(config);
  if (evaluate->parsed()) return cmft::run_evaluate(config);
  if (synth->parsed()) return cmft::run_synth(config);
  return cmft::kExitUsage;
}
