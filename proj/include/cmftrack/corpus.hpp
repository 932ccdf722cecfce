#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>
#include <json.hpp>

#include "cmftrack/schema.hpp"

namespace cmft {

// Token prefixes keeping system and user words in disjoint vocabulary columns.
inline constexpr const char* kUserTag = "usr:";
inline constexpr const char* kSystemTag = "sys:";

struct Turn {
  std::string system;
  std::string user;
  std::optional<Assignment> gold;  // required for training/eval corpora
};

struct DialogLog {
  std::string dialog_id;
  std::vector<Turn> turns;
};

// Lowercase, split on whitespace and punctuation, punctuation dropped.
std::vector<std::string> tokenize(std::string_view text);

// Speaker-tagged tokens of a turn, system tokens first.
std::vector<std::string> turn_tokens(const Turn& turn, bool include_system = true);

// Dense token -> column-index map over tokens seen at least min_count times,
// indexed in first-occurrence order.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const std::vector<DialogLog>& logs, int min_count,
                          bool include_system = true);

  int size() const { return static_cast<int>(tokens_.size()); }
  int min_count() const { return min_count_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  // Column index of a token, or -1 when out of vocabulary.
  int index_of(const std::string& token) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

  nlohmann::json to_json() const;  // {token: index}
  static Vocabulary from_json(const nlohmann::json& j, int min_count = 1);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int min_count_ = 1;
};

// Binary token-presence indicator for one turn.
struct ObservationVector {
  int dim = 0;
  std::vector<int> indices;  // sorted, unique
};

// Out-of-vocabulary tokens are silently dropped.
ObservationVector encode_observation(const Vocabulary& vocab, const Turn& turn,
                                     bool include_system = true);

// Sparse turn-transition rows laid out as [S_t | S_{t+1} | Z_t].
struct TransitionMatrix {
  enum class Block { StateT, StateNext, Observation };

  Eigen::SparseMatrix<double, Eigen::RowMajor> rows;
  int state_width = 0;
  int vocab_size = 0;

  int n() const { return static_cast<int>(rows.rows()); }
  int d() const { return static_cast<int>(rows.cols()); }
  Block column_block(int j) const;
};

// One row per turn; dialogs start from the all-None state and chain gold
// states forward (teacher forcing). Every turn must carry a gold state.
TransitionMatrix assemble_transitions(const std::vector<DialogLog>& logs,
                                      const StateSchema& schema,
                                      const Vocabulary& vocab,
                                      bool include_system = true);

// Schema from the gold annotations: variables and values in first-occurrence
// order, None prepended to every domain.
StateSchema infer_schema(const std::vector<DialogLog>& logs);

// JSON Lines dialog logs, one dialog per line:
//   {"dialog_id": str, "turns": [{"system": str, "user": str, "gold": {...}}]}
std::vector<DialogLog> load_dialogs(std::istream& in);
std::vector<DialogLog> load_dialogs_file(const std::string& path);
void save_dialogs(const std::vector<DialogLog>& logs, std::ostream& out);
void save_dialogs_file(const std::vector<DialogLog>& logs, const std::string& path);

}  // namespace cmft
