#include "cmftrack/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace cmft {

namespace {

std::string padded_token(int index, int width) {
  std::string digits = std::to_string(index);
  return "w" + std::string(width - std::min<int>(width, digits.size()), '0') + digits;
}

}  // namespace

SyntheticWorld generate_world(const WorldConfig& config) {
  if (config.n_vars < 1 || config.values_per_var < 1 ||
      config.indicators_per_value < 1 || config.noise_vocab_size < 1) {
    throw DataError("world counts must be >= 1");
  }
  if (config.ambiguity < 0.0 || config.ambiguity >= 1.0) {
    throw DataError("ambiguity must be in [0, 1)");
  }

  const int n_indicator_tokens =
      config.n_vars * config.values_per_var * config.indicators_per_value;
  const int total = n_indicator_tokens + config.noise_vocab_size;
  int width = 1;
  for (int x = total - 1; x >= 10; x /= 10) ++width;

  std::vector<std::string> pool;
  pool.reserve(total);
  for (int i = 0; i < total; ++i) pool.push_back(padded_token(i, width));
  std::mt19937_64 gen(config.seed);
  std::shuffle(pool.begin(), pool.end(), gen);

  SyntheticWorld world;
  world.seed = config.seed;
  std::vector<VariableSpec> specs;
  size_t next = 0;
  for (int v = 0; v < config.n_vars; ++v) {
    VariableSpec spec;
    spec.name = "var" + std::to_string(v);
    spec.values.push_back(kNoneValue);
    std::vector<std::vector<std::string>> per_value;
    for (int x = 0; x < config.values_per_var; ++x) {
      spec.values.push_back("v" + std::to_string(x + 1));
      std::vector<std::string> tokens;
      for (int i = 0; i < config.indicators_per_value; ++i) {
        tokens.push_back(pool[next++]);
      }
      per_value.push_back(std::move(tokens));
    }
    specs.push_back(std::move(spec));
    world.indicators.push_back(std::move(per_value));
    world.prompts.push_back("askvar" + std::to_string(v));
  }
  world.noise_vocab.assign(pool.begin() + next, pool.end());
  world.schema = StateSchema::build(std::move(specs));

  if (config.ambiguity > 0.0) {
    // Overwrite one indicator of selected pairs with a token from another
    // pair, so tests can study non-separable corpora.
    std::bernoulli_distribution flip(config.ambiguity);
    std::uniform_int_distribution<int> var_pick(0, config.n_vars - 1);
    std::uniform_int_distribution<int> val_pick(0, config.values_per_var - 1);
    std::uniform_int_distribution<int> ind_pick(0, config.indicators_per_value - 1);
    for (int v = 0; v < config.n_vars; ++v) {
      for (int x = 0; x < config.values_per_var; ++x) {
        if (!flip(gen)) continue;
        int ov = var_pick(gen);
        int ox = val_pick(gen);
        if (ov == v && ox == x) continue;
        world.indicators[v][x][ind_pick(gen)] = world.indicators[ov][ox][ind_pick(gen)];
      }
    }
  }
  return world;
}

std::vector<DialogLog> generate_corpus(const SyntheticWorld& world, int n_dialogs,
                                       int turns_per_dialog,
                                       int noise_words_per_turn,
                                       std::uint64_t seed) {
  if (n_dialogs < 1 || turns_per_dialog < 1 || noise_words_per_turn < 0) {
    throw DataError("corpus counts out of range");
  }
  const int n_vars = world.schema.num_variables();
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> noise_pick(
      0, static_cast<int>(world.noise_vocab.size()) - 1);

  std::vector<DialogLog> logs;
  logs.reserve(n_dialogs);
  for (int dlg = 0; dlg < n_dialogs; ++dlg) {
    DialogLog dialog;
    dialog.dialog_id = "synth-" + std::to_string(seed) + "-" + std::to_string(dlg);

    std::vector<int> goal(n_vars);  // non-None value index per variable
    for (int v = 0; v < n_vars; ++v) {
      int n_values = world.schema.block_size(v) - 1;
      goal[v] = std::uniform_int_distribution<int>(1, n_values)(gen);
    }

    Assignment revealed;
    for (int t = 0; t < turns_per_dialog; ++t) {
      int q = t % n_vars;
      Turn turn;
      turn.system = world.prompts[q];
      std::string utterance;
      for (const std::string& tok : world.indicators[q][goal[q] - 1]) {
        if (!utterance.empty()) utterance += ' ';
        utterance += tok;
      }
      for (int i = 0; i < noise_words_per_turn; ++i) {
        if (!utterance.empty()) utterance += ' ';
        utterance += world.noise_vocab[noise_pick(gen)];
      }
      turn.user = std::move(utterance);
      revealed[world.schema.variable(q).name] =
          world.schema.variable(q).values[goal[q]];
      turn.gold = revealed;
      dialog.turns.push_back(std::move(turn));
    }
    logs.push_back(std::move(dialog));
  }
  return logs;
}

nlohmann::json SyntheticWorld::to_json() const {
  nlohmann::json ind = nlohmann::json::object();
  for (int v = 0; v < schema.num_variables(); ++v) {
    nlohmann::json per_value = nlohmann::json::object();
    for (size_t x = 0; x < indicators[v].size(); ++x) {
      per_value[schema.variable(v).values[x + 1]] = indicators[v][x];
    }
    ind[schema.variable(v).name] = std::move(per_value);
  }
  return {{"seed", seed},
          {"schema", schema.to_json()},
          {"prompts", prompts},
          {"noise_vocab", noise_vocab},
          {"indicators", std::move(ind)}};
}

SyntheticWorld SyntheticWorld::from_json(const nlohmann::json& j) {
  SyntheticWorld world;
  world.seed = j.value("seed", std::uint64_t{0});
  world.schema = StateSchema::from_json(j.at("schema"));
  world.prompts = j.at("prompts").get<std::vector<std::string>>();
  world.noise_vocab = j.at("noise_vocab").get<std::vector<std::string>>();
  const nlohmann::json& ind = j.at("indicators");
  for (int v = 0; v < world.schema.num_variables(); ++v) {
    const VariableSpec& spec = world.schema.variable(v);
    std::vector<std::vector<std::string>> per_value;
    for (size_t x = 1; x < spec.values.size(); ++x) {
      per_value.push_back(
          ind.at(spec.name).at(spec.values[x]).get<std::vector<std::string>>());
    }
    world.indicators.push_back(std::move(per_value));
  }
  if (world.prompts.size() != static_cast<size_t>(world.schema.num_variables())) {
    throw DataError("world JSON prompt count does not match schema");
  }
  return world;
}

}  // namespace cmft
