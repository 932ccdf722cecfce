#include "cmftrack/schema.hpp"

#include <cmath>
#include <set>

namespace cmft {

StateSchema StateSchema::build(std::vector<VariableSpec> specs) {
  if (specs.empty()) {
    throw SchemaError("schema needs at least one variable");
  }
  StateSchema schema;
  schema.variables_ = std::move(specs);
  schema.offsets_.reserve(schema.variables_.size());
  int offset = 0;
  for (size_t v = 0; v < schema.variables_.size(); ++v) {
    const VariableSpec& spec = schema.variables_[v];
    if (spec.name.empty()) {
      throw SchemaError("variable with empty name");
    }
    if (!schema.name_index_.emplace(spec.name, static_cast<int>(v)).second) {
      throw SchemaError("duplicate variable name: " + spec.name);
    }
    if (spec.values.size() < 2) {
      throw SchemaError("variable " + spec.name + " needs at least 2 values");
    }
    if (spec.values.front() != kNoneValue) {
      throw SchemaError("variable " + spec.name + " must list None first");
    }
    std::set<std::string> unique(spec.values.begin(), spec.values.end());
    if (unique.size() != spec.values.size()) {
      throw SchemaError("variable " + spec.name + " has duplicate values");
    }
    schema.offsets_.push_back(offset);
    offset += static_cast<int>(spec.values.size());
  }
  schema.state_width_ = offset;
  return schema;
}

int StateSchema::variable_index(const std::string& name) const {
  auto it = name_index_.find(name);
  if (it == name_index_.end()) {
    throw SchemaError("unknown variable: " + name);
  }
  return it->second;
}

int StateSchema::value_index(int v, const std::string& value) const {
  const VariableSpec& spec = variables_.at(v);
  for (size_t i = 0; i < spec.values.size(); ++i) {
    if (spec.values[i] == value) return static_cast<int>(i);
  }
  throw SchemaError("unknown value '" + value + "' for variable " + spec.name);
}

bool StateSchema::operator==(const StateSchema& other) const {
  if (variables_.size() != other.variables_.size()) return false;
  for (size_t v = 0; v < variables_.size(); ++v) {
    if (variables_[v].name != other.variables_[v].name) return false;
    if (variables_[v].values != other.variables_[v].values) return false;
  }
  return true;
}

nlohmann::json StateSchema::to_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (const VariableSpec& spec : variables_) {
    vars.push_back({{"name", spec.name}, {"values", spec.values}});
  }
  return {{"variables", vars}};
}

StateSchema StateSchema::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("variables") || !j["variables"].is_array()) {
    throw SchemaError("schema JSON must be an object with a 'variables' array");
  }
  std::vector<VariableSpec> specs;
  for (const nlohmann::json& var : j["variables"]) {
    if (!var.contains("name") || !var.contains("values")) {
      throw SchemaError("schema variable entries need 'name' and 'values'");
    }
    VariableSpec spec;
    spec.name = var["name"].get<std::string>();
    spec.values = var["values"].get<std::vector<std::string>>();
    specs.push_back(std::move(spec));
  }
  return build(std::move(specs));
}

StateVector encode_state(const StateSchema& schema, const Assignment& assignment) {
  for (const auto& [name, value] : assignment) {
    int v = schema.variable_index(name);  // throws on unknown variable
    schema.value_index(v, value);         // throws on unknown value
  }
  StateVector state = StateVector::Zero(schema.state_width());
  for (int v = 0; v < schema.num_variables(); ++v) {
    int value_idx = 0;  // None unless assigned
    auto it = assignment.find(schema.variable(v).name);
    if (it != assignment.end()) {
      value_idx = schema.value_index(v, it->second);
    }
    state[schema.offset(v) + value_idx] = 1.0;
  }
  return state;
}

Assignment decode_argmax(const StateSchema& schema, const StateVector& scores) {
  if (scores.size() != schema.state_width()) {
    throw DataError("score vector has dimension " + std::to_string(scores.size()) +
                    ", schema expects " + std::to_string(schema.state_width()));
  }
  Assignment out;
  for (int v = 0; v < schema.num_variables(); ++v) {
    int best = 0;
    double best_score = scores[schema.offset(v)];
    for (int i = 1; i < schema.block_size(v); ++i) {
      double s = scores[schema.offset(v) + i];
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    out[schema.variable(v).name] = schema.variable(v).values[best];
  }
  return out;
}

StateVector BeliefState::to_state_vector() const {
  int width = 0;
  for (const Eigen::VectorXd& block : blocks) width += static_cast<int>(block.size());
  StateVector state(width);
  int at = 0;
  for (const Eigen::VectorXd& block : blocks) {
    state.segment(at, block.size()) = block;
    at += static_cast<int>(block.size());
  }
  return state;
}

BeliefState normalize_scores(const StateSchema& schema, const StateVector& scores) {
  if (scores.size() != schema.state_width()) {
    throw DataError("score vector has dimension " + std::to_string(scores.size()) +
                    ", schema expects " + std::to_string(schema.state_width()));
  }
  if (!scores.allFinite()) {
    throw DataError("scores contain non-finite entries");
  }
  constexpr double kFloor = 1e-9;
  BeliefState belief;
  belief.blocks.reserve(schema.num_variables());
  for (int v = 0; v < schema.num_variables(); ++v) {
    Eigen::VectorXd block =
        scores.segment(schema.offset(v), schema.block_size(v));
    block = block.cwiseMax(0.0).array() + kFloor;
    belief.blocks.push_back(block / block.sum());
  }
  return belief;
}

bool is_hard_state(const StateSchema& schema, const StateVector& state) {
  if (state.size() != schema.state_width()) return false;
  for (int v = 0; v < schema.num_variables(); ++v) {
    int ones = 0;
    for (int i = 0; i < schema.block_size(v); ++i) {
      double x = state[schema.offset(v) + i];
      if (x == 1.0) {
        ++ones;
      } else if (x != 0.0) {
        return false;
      }
    }
    if (ones != 1) return false;
  }
  return true;
}

bool is_soft_state(const StateSchema& schema, const StateVector& state, double tol) {
  if (state.size() != schema.state_width()) return false;
  for (int v = 0; v < schema.num_variables(); ++v) {
    double sum = 0.0;
    for (int i = 0; i < schema.block_size(v); ++i) {
      double x = state[schema.offset(v) + i];
      if (x < 0.0 || x > 1.0 + tol) return false;
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace cmft
