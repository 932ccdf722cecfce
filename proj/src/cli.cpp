#include "cmftrack/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmftrack/corpus.hpp"
#include "cmftrack/errors.hpp"
#include "cmftrack/eval.hpp"
#include "cmftrack/factorization.hpp"
#include "cmftrack/synth.hpp"
#include "cmftrack/tracker.hpp"

namespace cmft {
namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

// Exception -> exit code. Validation problems (bad input, bad files, bad
// schemas) exit 1; numerical and unexpected failures exit 2.
int guarded(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DataError(message);
}

// Belief probabilities rounded to microunits, with the rounding residual
// folded into the block argmax so every printed block sums to exactly 1.
json belief_to_json(const StateSchema& schema, const BeliefState& belief) {
  json out = json::object();
  for (int v = 0; v < schema.num_variables(); ++v) {
    const auto& spec = schema.variable(v);
    const Eigen::VectorXd& block = belief.blocks.at(v);
    std::vector<long long> micro(block.size());
    long long total = 0;
    int argmax = 0;
    for (int i = 0; i < block.size(); ++i) {
      micro[i] = std::llround(block[i] * 1e6);
      total += micro[i];
      if (block[i] > block[argmax]) argmax = i;
    }
    micro[argmax] += 1000000 - total;
    json dist = json::object();
    for (int i = 0; i < block.size(); ++i)
      dist[spec.values[i]] = static_cast<double>(micro[i]) / 1e6;
    out[spec.name] = std::move(dist);
  }
  return out;
}

TrackerOptions tracker_options(const RunConfig& config) {
  TrackerOptions opts;
  opts.hard_recurrence = config.hard_recurrence;
  opts.full_projection = config.full_projection;
  return opts;
}

}  // namespace

void RunConfig::apply_json(const json& j) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "corpus") corpus_path = value.get<std::string>();
    else if (key == "model") model_path = value.get<std::string>();
    else if (key == "schema") schema_path = value.get<std::string>();
    else if (key == "out") out_path = value.get<std::string>();
    else if (key == "report") report_path = value.get<std::string>();
    else if (key == "world_out") world_out_path = value.get<std::string>();
    else if (key == "world_in") world_in_path = value.get<std::string>();
    else if (key == "k") factor.k = value.get<int>();
    else if (key == "lambda_a") factor.lambda_a = value.get<double>();
    else if (key == "lambda_b") factor.lambda_b = value.get<double>();
    else if (key == "w_target") factor.w_target = value.get<double>();
    else if (key == "max_iters") factor.max_iters = value.get<int>();
    else if (key == "rel_tol") factor.rel_tol = value.get<double>();
    else if (key == "seed") factor.seed = value.get<std::uint64_t>();
    else if (key == "min_count") min_count = value.get<int>();
    else if (key == "drop_system_tokens") drop_system_tokens = value.get<bool>();
    else if (key == "hard_recurrence") hard_recurrence = value.get<bool>();
    else if (key == "full_projection") full_projection = value.get<bool>();
    else if (key == "final_only") final_only = value.get<bool>();
    else if (key == "reshuffle") reshuffle = value.get<int>();
    else if (key == "n_dialogs") n_dialogs = value.get<int>();
    else if (key == "turns_per_dialog") turns_per_dialog = value.get<int>();
    else if (key == "n_vars") n_vars = value.get<int>();
    else if (key == "values_per_var") values_per_var = value.get<int>();
    else if (key == "indicators_per_value") indicators_per_value = value.get<int>();
    else if (key == "noise_vocab_size") noise_vocab_size = value.get<int>();
    else if (key == "noise_words_per_turn") noise_words_per_turn = value.get<int>();
    else if (key == "ambiguity") ambiguity = value.get<double>();
    else throw SchemaError("unknown config key '" + key + "'");
  }
}

int run_train(const RunConfig& config) {
  return guarded([&] {
    require(!config.corpus_path.empty(), "train needs --corpus");
    require(!config.model_path.empty(), "train needs --model");
    auto logs = load_dialogs_file(config.corpus_path);
    StateSchema schema = config.schema_path.empty()
                             ? infer_schema(logs)
                             : StateSchema::from_json(read_json_file(config.schema_path));
    const bool include_system = !config.drop_system_tokens;
    Vocabulary vocab = Vocabulary::build(logs, config.min_count, include_system);
    TransitionMatrix m = assemble_transitions(logs, schema, vocab, include_system);
    std::cerr << "assembled " << m.n() << " transitions over " << m.d()
              << " columns (state width " << schema.state_width() << ", vocabulary "
              << vocab.size() << ")\n";
    auto [model, report] = fit(m, schema, vocab, config.factor, include_system,
                               &std::cerr);
    model.save(config.model_path);

    json rj = report.to_json();
    rj["rows"] = m.n();
    rj["columns"] = m.d();
    rj["state_width"] = schema.state_width();
    rj["vocab_size"] = vocab.size();
    rj["config"] = config.factor.to_json();
    const std::string report_path = config.report_path.empty()
                                        ? config.model_path + ".report.json"
                                        : config.report_path;
    write_text_file(report_path, rj.dump(2) + "\n");
    std::cerr << "model written to " << config.model_path << ", report to "
              << report_path << "\n";
  });
}

int run_track(const RunConfig& config) {
  return guarded([&] {
    require(!config.model_path.empty(), "track needs --model");
    require(!config.corpus_path.empty(), "track needs --corpus");
    FactorModel model = FactorModel::load(config.model_path);
    auto logs = load_dialogs_file(config.corpus_path);

    std::ostringstream lines;
    for (const auto& log : logs) {
      auto beliefs = track_dialog(model, log, tracker_options(config));
      for (std::size_t t = 0; t < beliefs.size(); ++t) {
        json line;
        line["dialog_id"] = log.dialog_id;
        line["turn"] = static_cast<int>(t);
        line["belief"] = belief_to_json(model.schema(), beliefs[t]);
        line["argmax"] = decode_argmax(model.schema(), beliefs[t].to_state_vector());
        lines << line.dump() << "\n";
      }
    }
    if (config.out_path.empty())
      std::cout << lines.str();
    else
      write_text_file(config.out_path, lines.str());
  });
}

int run_evaluate(const RunConfig& config) {
  return guarded([&] {
    require(!config.model_path.empty(), "evaluate needs --model");
    require(!config.corpus_path.empty(), "evaluate needs --corpus");
    FactorModel model = FactorModel::load(config.model_path);
    auto logs = load_dialogs_file(config.corpus_path);

    EvalOptions opts;
    opts.final_only = config.final_only;
    opts.reshuffle_splits = config.reshuffle;
    opts.seed = config.factor.seed;
    opts.tracker = tracker_options(config);
    EvalReport report = evaluate_corpus(model, logs, opts);

    const std::string text = report.to_json().dump(2) + "\n";
    std::cout << text;
    if (!config.out_path.empty()) write_text_file(config.out_path, text);
  });
}

int run_synth(const RunConfig& config) {
  return guarded([&] {
    require(!config.out_path.empty(), "synth needs --out");
    SyntheticWorld world;
    if (config.world_in_path.empty()) {
      WorldConfig wc;
      wc.seed = config.factor.seed;
      wc.n_vars = config.n_vars;
      wc.values_per_var = config.values_per_var;
      wc.indicators_per_value = config.indicators_per_value;
      wc.noise_vocab_size = config.noise_vocab_size;
      wc.ambiguity = config.ambiguity;
      world = generate_world(wc);
    } else {
      world = SyntheticWorld::from_json(read_json_file(config.world_in_path));
    }
    const int turns = config.turns_per_dialog > 0 ? config.turns_per_dialog
                                                  : world.schema.num_variables();
    auto logs = generate_corpus(world, config.n_dialogs, turns,
                                config.noise_words_per_turn, config.factor.seed);
    save_dialogs_file(logs, config.out_path);
    if (config.world_in_path.empty() || !config.world_out_path.empty()) {
      const std::string world_path = config.world_out_path.empty()
                                         ? config.out_path + ".world.json"
                                         : config.world_out_path;
      write_text_file(world_path, world.to_json().dump(2) + "\n");
      std::cerr << "world written to " << world_path << "\n";
    }
    std::cerr << config.n_dialogs << " dialogs written to " << config.out_path
              << "\n";
  });
}

}  // namespace cmft
