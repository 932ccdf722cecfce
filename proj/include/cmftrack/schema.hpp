#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cmftrack/errors.hpp"

namespace cmft {

// Reserved value meaning "not observed yet"; always first in a domain.
inline constexpr const char* kNoneValue = "None";

struct VariableSpec {
  std::string name;
  std::vector<std::string> values;  // values[0] == kNoneValue
};

// Symbolic slot assignment; variables absent from the map are read as None.
using Assignment = std::map<std::string, std::string>;

// Flat score/state vector over the concatenated one-hot layout.
using StateVector = Eigen::VectorXd;

// Ordered slot variables with their one-hot column layout. Immutable after
// construction and safe to share across threads.
class StateSchema {
 public:
  StateSchema() = default;

  static StateSchema build(std::vector<VariableSpec> specs);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int state_width() const { return state_width_; }
  const std::vector<VariableSpec>& variables() const { return variables_; }
  const VariableSpec& variable(int v) const { return variables_.at(v); }
  int offset(int v) const { return offsets_.at(v); }
  int block_size(int v) const {
    return static_cast<int>(variables_.at(v).values.size());
  }

  // Index of a variable by name; throws SchemaError if unknown.
  int variable_index(const std::string& name) const;
  // Index of a value within a variable's domain; throws SchemaError if unknown.
  int value_index(int v, const std::string& value) const;

  bool operator==(const StateSchema& other) const;

  nlohmann::json to_json() const;
  static StateSchema from_json(const nlohmann::json& j);

 private:
  std::vector<VariableSpec> variables_;
  std::vector<int> offsets_;
  int state_width_ = 0;
  std::map<std::string, int> name_index_;
};

// One-hot encoding of a symbolic assignment. Unassigned variables encode as
// None. Unknown variables or values throw DataError.
StateVector encode_state(const StateSchema& schema, const Assignment& assignment);

// Per-variable argmax readout; ties break toward the lowest value index.
Assignment decode_argmax(const StateSchema& schema, const StateVector& scores);

// Per-variable probability distribution over values.
struct BeliefState {
  std::vector<Eigen::VectorXd> blocks;  // aligned with schema variable order

  // Concatenation of the blocks as a soft StateVector.
  StateVector to_state_vector() const;
};

// Clamp negative scores to zero, floor each entry by 1e-9 and renormalize per
// variable block. Throws DataError on dimension mismatch or non-finite input.
BeliefState normalize_scores(const StateSchema& schema, const StateVector& scores);

// True when every block is one-hot (exactly one entry 1, rest 0).
bool is_hard_state(const StateSchema& schema, const StateVector& state);
// True when every block sums to 1 within tol and entries are in [0, 1].
bool is_soft_state(const StateSchema& schema, const StateVector& state,
                   double tol = 1e-9);

}  // namespace cmft
