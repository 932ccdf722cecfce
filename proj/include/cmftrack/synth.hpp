#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmftrack/corpus.hpp"
#include "cmftrack/schema.hpp"

namespace cmft {

struct WorldConfig {
  std::uint64_t seed = 1;
  int n_vars = 3;
  int values_per_var = 5;       // non-None values per variable
  int indicators_per_value = 2;
  int noise_vocab_size = 40;
  double ambiguity = 0.0;  // fraction of value pairs given an indicator
                           // borrowed from another pair
};

// Generative ground truth with a known word->value mapping, used as an
// independent oracle in end-to-end tests. At ambiguity 0 the indicator sets
// are pairwise disjoint and disjoint from the noise vocabulary.
struct SyntheticWorld {
  StateSchema schema;
  // indicators[var][value_idx - 1] -> tokens announcing that value
  std::vector<std::vector<std::vector<std::string>>> indicators;
  std::vector<std::string> prompts;  // system prompt token per variable
  std::vector<std::string> noise_vocab;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SyntheticWorld from_json(const nlohmann::json& j);
};

SyntheticWorld generate_world(const WorldConfig& config);

// One dialog per goal: turn t asks variable (t mod n_vars), the user answers
// with all indicator words of that variable's goal value plus noise tokens,
// and the gold state reveals variables incrementally.
std::vector<DialogLog> generate_corpus(const SyntheticWorld& world, int n_dialogs,
                                       int turns_per_dialog,
                                       int noise_words_per_turn,
                                       std::uint64_t seed);

}  // namespace cmft
