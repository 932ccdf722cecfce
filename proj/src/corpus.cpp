#include "cmftrack/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace cmft {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || std::ispunct(c)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> turn_tokens(const Turn& turn, bool include_system) {
  std::vector<std::string> tagged;
  if (include_system) {
    for (std::string& tok : tokenize(turn.system)) {
      tagged.push_back(kSystemTag + std::move(tok));
    }
  }
  for (std::string& tok : tokenize(turn.user)) {
    tagged.push_back(kUserTag + std::move(tok));
  }
  return tagged;
}

Vocabulary Vocabulary::build(const std::vector<DialogLog>& logs, int min_count,
                             bool include_system) {
  if (min_count < 1) {
    throw DataError("min_count must be >= 1");
  }
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> first_seen;
  for (const DialogLog& dialog : logs) {
    for (const Turn& turn : dialog.turns) {
      for (std::string& tok : turn_tokens(turn, include_system)) {
        auto [it, inserted] = counts.emplace(std::move(tok), 0);
        if (inserted) first_seen.push_back(it->first);
        ++it->second;
      }
    }
  }
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  for (std::string& tok : first_seen) {
    if (counts[tok] >= min_count) {
      vocab.index_.emplace(tok, static_cast<int>(vocab.tokens_.size()));
      vocab.tokens_.push_back(std::move(tok));
    }
  }
  if (vocab.tokens_.empty()) {
    throw DataError("corpus yields an empty vocabulary");
  }
  return vocab;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (size_t i = 0; i < tokens_.size(); ++i) {
    j[tokens_[i]] = static_cast<int>(i);
  }
  return j;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j, int min_count) {
  if (!j.is_object()) {
    throw DataError("vocabulary JSON must be an object of {token: index}");
  }
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.tokens_.resize(j.size());
  std::vector<bool> seen(j.size(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer()) {
      throw DataError("vocabulary index for '" + it.key() + "' is not an integer");
    }
    int idx = it.value().get<int>();
    if (idx < 0 || idx >= static_cast<int>(j.size()) || seen[idx]) {
      throw DataError("vocabulary indices must be dense 0..V-1");
    }
    seen[idx] = true;
    vocab.tokens_[idx] = it.key();
  }
  for (size_t i = 0; i < vocab.tokens_.size(); ++i) {
    vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i));
  }
  return vocab;
}

ObservationVector encode_observation(const Vocabulary& vocab, const Turn& turn,
                                     bool include_system) {
  ObservationVector obs;
  obs.dim = vocab.size();
  for (const std::string& tok : turn_tokens(turn, include_system)) {
    int idx = vocab.index_of(tok);
    if (idx >= 0) obs.indices.push_back(idx);
  }
  std::sort(obs.indices.begin(), obs.indices.end());
  obs.indices.erase(std::unique(obs.indices.begin(), obs.indices.end()),
                    obs.indices.end());
  return obs;
}

TransitionMatrix::Block TransitionMatrix::column_block(int j) const {
  if (j < 0 || j >= d()) {
    throw DataError("column index out of range");
  }
  if (j < state_width) return Block::StateT;
  if (j < 2 * state_width) return Block::StateNext;
  return Block::Observation;
}

TransitionMatrix assemble_transitions(const std::vector<DialogLog>& logs,
                                      const StateSchema& schema,
                                      const Vocabulary& vocab,
                                      bool include_system) {
  const int sw = schema.state_width();
  const int d = 2 * sw + vocab.size();
  std::vector<Eigen::Triplet<double>> triplets;
  int row = 0;
  for (const DialogLog& dialog : logs) {
    Assignment previous;  // all-None at the start of every dialog
    for (const Turn& turn : dialog.turns) {
      if (!turn.gold.has_value()) {
        throw DataError("dialog " + dialog.dialog_id +
                        " has a turn without a gold state");
      }
      StateVector s_t = encode_state(schema, previous);
      StateVector s_next = encode_state(schema, *turn.gold);
      ObservationVector z = encode_observation(vocab, turn, include_system);
      for (int i = 0; i < sw; ++i) {
        if (s_t[i] != 0.0) triplets.emplace_back(row, i, s_t[i]);
        if (s_next[i] != 0.0) triplets.emplace_back(row, sw + i, s_next[i]);
      }
      for (int idx : z.indices) {
        triplets.emplace_back(row, 2 * sw + idx, 1.0);
      }
      previous = *turn.gold;
      ++row;
    }
  }
  if (row == 0) {
    throw DataError("no turns in corpus");
  }
  TransitionMatrix m;
  m.state_width = sw;
  m.vocab_size = vocab.size();
  m.rows.resize(row, d);
  m.rows.setFromTriplets(triplets.begin(), triplets.end());
  m.rows.makeCompressed();
  return m;
}

namespace {

Turn turn_from_json(const nlohmann::json& j, const std::string& dialog_id) {
  if (!j.is_object()) {
    throw DataError("dialog " + dialog_id + ": turn entries must be objects");
  }
  Turn turn;
  if (j.contains("system")) turn.system = j["system"].get<std::string>();
  if (j.contains("user")) turn.user = j["user"].get<std::string>();
  if (j.contains("gold") && !j["gold"].is_null()) {
    if (!j["gold"].is_object()) {
      throw DataError("dialog " + dialog_id + ": 'gold' must be an object");
    }
    Assignment gold;
    for (auto it = j["gold"].begin(); it != j["gold"].end(); ++it) {
      gold[it.key()] = it.value().get<std::string>();
    }
    turn.gold = std::move(gold);
  }
  return turn;
}

}  // namespace

std::vector<DialogLog> load_dialogs(std::istream& in) {
  std::vector<DialogLog> logs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataError("line " + std::to_string(line_no) + ": invalid JSON");
    }
    DialogLog dialog;
    dialog.dialog_id = j.value("dialog_id", "dialog-" + std::to_string(line_no));
    if (!j.contains("turns") || !j["turns"].is_array() || j["turns"].empty()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": dialog needs a non-empty 'turns' array");
    }
    for (const nlohmann::json& tj : j["turns"]) {
      dialog.turns.push_back(turn_from_json(tj, dialog.dialog_id));
    }
    logs.push_back(std::move(dialog));
  }
  return logs;
}

std::vector<DialogLog> load_dialogs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open dialog file: " + path);
  }
  return load_dialogs(in);
}

void save_dialogs(const std::vector<DialogLog>& logs, std::ostream& out) {
  for (const DialogLog& dialog : logs) {
    nlohmann::json turns = nlohmann::json::array();
    for (const Turn& turn : dialog.turns) {
      nlohmann::json tj = {{"system", turn.system}, {"user", turn.user}};
      if (turn.gold.has_value()) {
        tj["gold"] = nlohmann::json(*turn.gold);
      }
      turns.push_back(std::move(tj));
    }
    nlohmann::json j = {{"dialog_id", dialog.dialog_id}, {"turns", std::move(turns)}};
    out << j.dump() << "\n";
  }
}

void save_dialogs_file(const std::vector<DialogLog>& logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write dialog file: " + path);
  }
  save_dialogs(logs, out);
}

StateSchema infer_schema(const std::vector<DialogLog>& logs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, std::set<std::string>> seen;
  for (const DialogLog& log : logs) {
    for (const Turn& turn : log.turns) {
      if (!turn.gold.has_value()) continue;
      for (const auto& [var, value] : *turn.gold) {
        if (values.find(var) == values.end()) {
          order.push_back(var);
          values[var] = {};
        }
        if (value != kNoneValue && seen[var].insert(value).second) {
          values[var].push_back(value);
        }
      }
    }
  }
  if (order.empty()) {
    throw DataError("cannot infer a schema: no gold annotations found");
  }
  std::vector<VariableSpec> specs;
  for (const std::string& var : order) {
    if (values[var].empty()) {
      throw DataError("cannot infer a domain for variable '" + var +
                      "': only None observed");
    }
    VariableSpec spec;
    spec.name = var;
    spec.values.push_back(kNoneValue);
    spec.values.insert(spec.values.end(), values[var].begin(), values[var].end());
    specs.push_back(std::move(spec));
  }
  return StateSchema::build(std::move(specs));
}

}  // namespace cmft
