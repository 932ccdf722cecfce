#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "cmftrack/corpus.hpp"
#include "cmftrack/errors.hpp"
#include "cmftrack/eval.hpp"
#include "cmftrack/factorization.hpp"
#include "cmftrack/model.hpp"
#include "cmftrack/schema.hpp"
#include "cmftrack/synth.hpp"
#include "cmftrack/tracker.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace cmft;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& obj) {
  const auto dumped =
      py::cast<std::string>(py::module_::import("json").attr("dumps")(obj));
  return nlohmann::json::parse(dumped);
}

py::dict belief_dict(const StateSchema& schema, const BeliefState& belief) {
  py::dict out;
  for (int v = 0; v < schema.num_variables(); ++v) {
    const VariableSpec& spec = schema.variable(v);
    py::dict dist;
    for (int i = 0; i < static_cast<int>(spec.values.size()); ++i) {
      dist[py::str(spec.values[i])] = belief.blocks.at(v)[i];
    }
    out[py::str(spec.name)] = dist;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_cmftrack, m) {
  m.doc() = "dialog state tracking via weighted collective matrix factorization";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  m.attr("NONE_VALUE") = kNoneValue;

  py::class_<VariableSpec>(m, "VariableSpec")
      .def(py::init([](std::string name, std::vector<std::string> values) {
             return VariableSpec{std::move(name), std::move(values)};
           }),
           "name"_a, "values"_a)
      .def_readwrite("name", &VariableSpec::name)
      .def_readwrite("values", &VariableSpec::values);

  py::class_<StateSchema>(m, "StateSchema")
      .def_static("build", &StateSchema::build, "specs"_a)
      .def_static("from_json",
                  [](const py::object& j) { return StateSchema::from_json(py_to_json(j)); },
                  "j"_a)
      .def("to_json", [](const StateSchema& s) { return json_to_py(s.to_json()); })
      .def("num_variables", &StateSchema::num_variables)
      .def("state_width", &StateSchema::state_width)
      .def("variables", &StateSchema::variables)
      .def("variable", &StateSchema::variable, "v"_a)
      .def("offset", &StateSchema::offset, "v"_a)
      .def("block_size", &StateSchema::block_size, "v"_a)
      .def("variable_index", &StateSchema::variable_index, "name"_a)
      .def("value_index", &StateSchema::value_index, "v"_a, "value"_a)
      .def("__eq__",
           [](const StateSchema& a, const StateSchema& b) { return a == b; });

  m.def("encode_state", &encode_state, "schema"_a, "assignment"_a);
  m.def("decode_argmax", &decode_argmax, "schema"_a, "scores"_a);
  m.def("normalize_scores", &normalize_scores, "schema"_a, "scores"_a);
  m.def("infer_schema", &infer_schema, "logs"_a);

  py::class_<BeliefState>(m, "BeliefState")
      .def_readonly("blocks", &BeliefState::blocks)
      .def("to_state_vector", &BeliefState::to_state_vector)
      .def("as_dict",
           [](const BeliefState& b, const StateSchema& schema) {
             return belief_dict(schema, b);
           },
           "schema"_a);

  m.def("tokenize",
        [](const std::string& text) { return tokenize(text); },
        "text"_a);

  py::class_<Turn>(m, "Turn")
      .def(py::init([](std::string system, std::string user,
                       std::optional<Assignment> gold) {
             return Turn{std::move(system), std::move(user), std::move(gold)};
           }),
           "system"_a = "", "user"_a = "", "gold"_a = py::none())
      .def_readwrite("system", &Turn::system)
      .def_readwrite("user", &Turn::user)
      .def_readwrite("gold", &Turn::gold);

  py::class_<DialogLog>(m, "DialogLog")
      .def(py::init([](std::string dialog_id, std::vector<Turn> turns) {
             return DialogLog{std::move(dialog_id), std::move(turns)};
           }),
           "dialog_id"_a = "", "turns"_a = std::vector<Turn>{})
      .def_readwrite("dialog_id", &DialogLog::dialog_id)
      .def_readwrite("turns", &DialogLog::turns);

  m.def("load_dialogs", &load_dialogs_file, "path"_a);
  m.def("save_dialogs", &save_dialogs_file, "logs"_a, "path"_a);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("build", &Vocabulary::build, "logs"_a, "min_count"_a = 2,
                  "include_system"_a = true)
      .def("size", &Vocabulary::size)
      .def("min_count", &Vocabulary::min_count)
      .def("tokens", &Vocabulary::tokens)
      .def("index_of", &Vocabulary::index_of, "token"_a)
      .def("to_json", [](const Vocabulary& v) { return json_to_py(v.to_json()); });

  py::class_<ObservationVector>(m, "ObservationVector")
      .def_readonly("dim", &ObservationVector::dim)
      .def_readonly("indices", &ObservationVector::indices);

  m.def("encode_observation", &encode_observation, "vocab"_a, "turn"_a,
        "include_system"_a = true);

  py::class_<TransitionMatrix>(m, "TransitionMatrix")
      .def_property_readonly(
          "rows",
          [](const TransitionMatrix& t) {
            return Eigen::SparseMatrix<double, Eigen::RowMajor>(t.rows);
          })
      .def_readonly("state_width", &TransitionMatrix::state_width)
      .def_readonly("vocab_size", &TransitionMatrix::vocab_size)
      .def("n", &TransitionMatrix::n)
      .def("d", &TransitionMatrix::d);

  m.def("assemble_transitions", &assemble_transitions, "logs"_a, "schema"_a,
        "vocab"_a, "include_system"_a = true);

  py::class_<FactorConfig>(m, "FactorConfig")
      .def(py::init<>())
      .def_readwrite("k", &FactorConfig::k)
      .def_readwrite("lambda_a", &FactorConfig::lambda_a)
      .def_readwrite("lambda_b", &FactorConfig::lambda_b)
      .def_readwrite("w_target", &FactorConfig::w_target)
      .def_readwrite("max_iters", &FactorConfig::max_iters)
      .def_readwrite("rel_tol", &FactorConfig::rel_tol)
      .def_readwrite("seed", &FactorConfig::seed)
      .def("validate", &FactorConfig::validate)
      .def("to_json", [](const FactorConfig& c) { return json_to_py(c.to_json()); });

  py::class_<FactorModel>(m, "FactorModel")
      .def_static("load", &FactorModel::load, "path"_a)
      .def("save", &FactorModel::save, "path"_a)
      .def("schema", &FactorModel::schema)
      .def("vocab", &FactorModel::vocab)
      .def("config", &FactorModel::config)
      .def("embeddings", &FactorModel::embeddings)
      .def("d", &FactorModel::d)
      .def("k", &FactorModel::k)
      .def("state_width", &FactorModel::state_width)
      .def("include_system_tokens", &FactorModel::include_system_tokens);

  m.def(
      "fit",
      [](const TransitionMatrix& tm, const StateSchema& schema,
         const Vocabulary& vocab, const FactorConfig& config, bool include_system,
         bool verbose) {
        auto [model, report] =
            fit(tm, schema, vocab, config, include_system,
                verbose ? &std::cerr : nullptr);
        return py::make_tuple(std::move(model), json_to_py(report.to_json()));
      },
      "transitions"_a, "schema"_a, "vocab"_a, "config"_a = FactorConfig{},
      "include_system"_a = true, "verbose"_a = false);

  m.def(
      "train_model",
      [](const std::vector<DialogLog>& logs, const FactorConfig& config,
         std::optional<StateSchema> schema, int min_count, bool include_system,
         bool verbose) {
        StateSchema s = schema.has_value() ? *schema : infer_schema(logs);
        Vocabulary vocab = Vocabulary::build(logs, min_count, include_system);
        TransitionMatrix tm = assemble_transitions(logs, s, vocab, include_system);
        auto [model, report] = fit(tm, s, vocab, config, include_system,
                                   verbose ? &std::cerr : nullptr);
        return py::make_tuple(std::move(model), json_to_py(report.to_json()));
      },
      "logs"_a, "config"_a = FactorConfig{}, "schema"_a = py::none(),
      "min_count"_a = 2, "include_system"_a = true, "verbose"_a = false);

  py::class_<TrackerOptions>(m, "TrackerOptions")
      .def(py::init<>())
      .def_readwrite("hard_recurrence", &TrackerOptions::hard_recurrence)
      .def_readwrite("full_projection", &TrackerOptions::full_projection);

  m.def("project_transition", &project_transition, "model"_a, "state"_a,
        "observation"_a, "full_projection"_a = false);
  m.def("predict_next_state", &predict_next_state, "model"_a, "embedding"_a);

  m.def("track_dialog", &track_dialog, "model"_a, "dialog"_a,
        "options"_a = TrackerOptions{});
  m.def(
      "track_dialog_dicts",
      [](const FactorModel& model, const DialogLog& dialog, TrackerOptions options) {
        py::list out;
        for (const BeliefState& b : track_dialog(model, dialog, options)) {
          out.append(belief_dict(model.schema(), b));
        }
        return out;
      },
      "model"_a, "dialog"_a, "options"_a = TrackerOptions{});

  py::class_<EvalOptions>(m, "EvalOptions")
      .def(py::init<>())
      .def_readwrite("final_only", &EvalOptions::final_only)
      .def_readwrite("reshuffle_splits", &EvalOptions::reshuffle_splits)
      .def_readwrite("seed", &EvalOptions::seed)
      .def_readwrite("tracker", &EvalOptions::tracker);

  m.def("joint_goal_accuracy", &joint_goal_accuracy, "predictions"_a, "golds"_a);
  m.def("slot_accuracy", &slot_accuracy, "predictions"_a, "golds"_a, "variable"_a);
  m.def(
      "evaluate_corpus",
      [](const FactorModel& model, const std::vector<DialogLog>& logs,
         EvalOptions options) {
        return json_to_py(evaluate_corpus(model, logs, options).to_json());
      },
      "model"_a, "logs"_a, "options"_a = EvalOptions{});

  py::class_<WorldConfig>(m, "WorldConfig")
      .def(py::init<>())
      .def_readwrite("seed", &WorldConfig::seed)
      .def_readwrite("n_vars", &WorldConfig::n_vars)
      .def_readwrite("values_per_var", &WorldConfig::values_per_var)
      .def_readwrite("indicators_per_value", &WorldConfig::indicators_per_value)
      .def_readwrite("noise_vocab_size", &WorldConfig::noise_vocab_size)
      .def_readwrite("ambiguity", &WorldConfig::ambiguity);

  py::class_<SyntheticWorld>(m, "SyntheticWorld")
      .def_readonly("schema", &SyntheticWorld::schema)
      .def_readonly("indicators", &SyntheticWorld::indicators)
      .def_readonly("prompts", &SyntheticWorld::prompts)
      .def_readonly("noise_vocab", &SyntheticWorld::noise_vocab)
      .def_readonly("seed", &SyntheticWorld::seed)
      .def("to_json", [](const SyntheticWorld& w) { return json_to_py(w.to_json()); })
      .def_static(
          "from_json",
          [](const py::object& j) { return SyntheticWorld::from_json(py_to_json(j)); },
          "j"_a);

  m.def("generate_world", &generate_world, "config"_a = WorldConfig{});
  m.def("generate_corpus", &generate_corpus, "world"_a, "n_dialogs"_a,
        "turns_per_dialog"_a, "noise_words_per_turn"_a = 2, "seed"_a = 1);
}
