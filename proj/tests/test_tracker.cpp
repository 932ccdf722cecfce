#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cmftrack/factorization.hpp"
#include "cmftrack/synth.hpp"
#include "cmftrack/tracker.hpp"

using namespace cmft;

namespace {

// A model with hand-placed embeddings over a 1-variable schema. The vocab is
// loaded from JSON so tiny sizes (even empty) are possible.
FactorModel hand_model(const StateSchema& schema, int vocab_size,
                       const Eigen::MatrixXd& embeddings) {
  nlohmann::json vocab_json = nlohmann::json::object();
  for (int i = 0; i < vocab_size; ++i) {
    vocab_json["tok" + std::to_string(i)] = i;
  }
  Vocabulary vocab = Vocabulary::from_json(vocab_json, 1);
  FactorConfig config;
  config.k = static_cast<int>(embeddings.cols());
  return FactorModel(schema, vocab, config, embeddings);
}

ObservationVector empty_obs(const FactorModel& model) {
  ObservationVector obs;
  obs.dim = model.vocab().size();
  return obs;
}

// Brute-force projection oracle with an explicit inverse over the observed
// rows only.
Eigen::VectorXd brute_force_projection(const FactorModel& model,
                                       const StateVector& state,
                                       const ObservationVector& obs, bool full) {
  const int sw = model.state_width();
  const int v = model.vocab().size();
  const Eigen::MatrixXd& e = model.embeddings();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(v);
  for (int idx : obs.indices) z[idx] = 1.0;

  Eigen::MatrixXd e_obs;
  Eigen::VectorXd m_obs;
  if (full) {
    e_obs = e;
    m_obs = Eigen::VectorXd::Zero(2 * sw + v);
    m_obs.head(sw) = state;
    m_obs.tail(v) = z;
  } else {
    e_obs.resize(sw + v, e.cols());
    e_obs.topRows(sw) = e.topRows(sw);
    e_obs.bottomRows(v) = e.bottomRows(v);
    m_obs.resize(sw + v);
    m_obs.head(sw) = state;
    m_obs.tail(v) = z;
  }
  Eigen::MatrixXd gram = e_obs.transpose() * e_obs;
  gram.diagonal().array() += kProjectionRidge;
  return gram.inverse() * (e_obs.transpose() * m_obs);
}

}  // namespace

TEST_CASE("projection through identity state factors") {
  StateSchema schema = StateSchema::build({{"v", {"None", "x"}}});  // width 2
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(5, 2);  // d = 2*2 + 1
  e.topRows(2) = Eigen::MatrixXd::Identity(2, 2);
  FactorModel model = hand_model(schema, 1, e);

  StateVector state(2);
  state << 0.3, 0.7;
  Eigen::VectorXd a = project_transition(model, state, empty_obs(model));
  CHECK(a[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(a[1] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("projection solves the observed normal equations") {
  // Observed rows [[2],[0]], target [4,9]: a = (2*4)/(2*2) = 2.
  StateSchema schema = StateSchema::build({{"v", {"None", "x"}}});
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 1);  // no vocabulary columns
  e(0, 0) = 2.0;
  FactorModel model = hand_model(schema, 0, e);

  StateVector state(2);
  state << 4, 9;
  Eigen::VectorXd a = project_transition(model, state, empty_obs(model));
  CHECK(a[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("projection of all-zero factors is the zero vector") {
  StateSchema schema = StateSchema::build({{"v", {"None", "x"}}});
  FactorModel model = hand_model(schema, 1, Eigen::MatrixXd::Zero(5, 2));
  StateVector state(2);
  state << 1, 0;
  Eigen::VectorXd a = project_transition(model, state, empty_obs(model));
  CHECK(a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection validates input dimensions") {
  StateSchema schema = StateSchema::build({{"v", {"None", "x"}}});
  FactorModel model = hand_model(schema, 1, Eigen::MatrixXd::Identity(5, 2));
  CHECK_THROWS_AS(project_transition(model, StateVector::Zero(3), empty_obs(model)),
                  DataError);
  ObservationVector wrong;
  wrong.dim = 7;
  CHECK_THROWS_AS(project_transition(model, StateVector::Zero(2), wrong), DataError);
}

TEST_CASE("next-state scores are inner products with the next-state rows") {
  StateSchema schema = StateSchema::build({{"v", {"None", "x", "y"}}});  // width 3
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(6, 1);
  e(3, 0) = 1;  // next-state block rows 3..5
  e(4, 0) = 0;
  e(5, 0) = 3;
  FactorModel model = hand_model(schema, 0, e);

  Eigen::VectorXd a(1);
  a << 2;
  Eigen::VectorXd scores = predict_next_state(model, a);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == 2.0);
  CHECK(scores[1] == 0.0);
  CHECK(scores[2] == 6.0);

  CHECK(predict_next_state(model, Eigen::VectorXd::Zero(1)).cwiseAbs().maxCoeff() ==
        0.0);
  Eigen::VectorXd doubled = predict_next_state(model, 2 * a);
  CHECK(doubled == 2 * scores);
  CHECK_THROWS_AS(predict_next_state(model, Eigen::VectorXd::Zero(2)), DataError);
}

TEST_CASE("projection matches the brute-force ridge minimizer") {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  StateSchema schema = StateSchema::build(
      {{"a", {"None", "x", "y"}}, {"b", {"None", "p", "q", "r"}}});  // width 7
  const int v = 5;
  const int d = 2 * schema.state_width() + v;

  for (int trial = 0; trial < 25; ++trial) {
    const int k = 2 + trial % 5;
    Eigen::MatrixXd e(d, k);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < k; ++j) e(i, j) = dist(gen);
    }
    FactorModel model = hand_model(schema, v, e);

    // Random soft state and random observed token subset.
    StateVector state(schema.state_width());
    for (int b = 0; b < schema.num_variables(); ++b) {
      Eigen::VectorXd block(schema.block_size(b));
      for (int i = 0; i < block.size(); ++i) block[i] = unit(gen) + 1e-3;
      state.segment(schema.offset(b), block.size()) = block / block.sum();
    }
    ObservationVector obs;
    obs.dim = v;
    for (int i = 0; i < v; ++i) {
      if (unit(gen) < 0.4) obs.indices.push_back(i);
    }

    for (bool full : {false, true}) {
      Eigen::VectorXd got = project_transition(model, state, obs, full);
      Eigen::VectorXd want = brute_force_projection(model, state, obs, full);
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("masked and full projection agree when the next-state rows are zero") {
  StateSchema schema = StateSchema::build({{"v", {"None", "x"}}});
  Eigen::MatrixXd e = Eigen::MatrixXd::Random(5, 2);
  e.middleRows(2, 2).setZero();
  FactorModel model = hand_model(schema, 1, e);
  StateVector state(2);
  state << 0.4, 0.6;
  ObservationVector obs;
  obs.dim = 1;
  obs.indices = {0};
  Eigen::VectorXd masked = project_transition(model, state, obs, false);
  Eigen::VectorXd full = project_transition(model, state, obs, true);
  CHECK((masked - full).cwiseAbs().maxCoeff() < 1e-10);
}

namespace {

FactorModel trained_toy_model(TrackerOptions* opts_out = nullptr) {
  // Tiny noiseless world, enough data to learn the indicator mapping.
  WorldConfig wc;
  wc.seed = 21;
  wc.n_vars = 2;
  wc.values_per_var = 3;
  wc.indicators_per_value = 1;
  wc.noise_vocab_size = 5;
  SyntheticWorld world = generate_world(wc);
  auto logs = generate_corpus(world, 60, 2, 0, 4);
  Vocabulary vocab = Vocabulary::build(logs, 1);
  TransitionMatrix m = assemble_transitions(logs, world.schema, vocab);
  FactorConfig config;
  config.k = 12;
  config.seed = 3;
  auto [model, report] = fit(m, world.schema, vocab, config);
  if (opts_out) *opts_out = TrackerOptions{};
  return model;
}

}  // namespace

TEST_CASE("sessions start from the all-None state and reset cleanly") {
  FactorModel model = trained_toy_model();
  TrackerSession session(model);
  CHECK(session.turn_count() == 0);
  CHECK(session.state() == encode_state(model.schema(), {}));

  Turn turn{"askvar0", "hello", std::nullopt};
  session.step(turn);
  CHECK(session.turn_count() == 1);
  session.reset();
  CHECK(session.turn_count() == 0);
  CHECK(session.state() == encode_state(model.schema(), {}));

  TrackerSession other(model);
  CHECK(other.state() == session.state());
}

TEST_CASE("steps are deterministic and never mutate the model") {
  FactorModel model = trained_toy_model();
  Eigen::MatrixXd before = model.embeddings();
  Turn t1{"askvar0", "w1 w2", std::nullopt};
  Turn t2{"askvar1", "w3", std::nullopt};

  TrackerSession s1(model);
  TrackerSession s2(model);
  for (const Turn& turn : {t1, t2}) {
    BeliefState b1 = s1.step(turn);
    BeliefState b2 = s2.step(turn);
    REQUIRE(b1.blocks.size() == b2.blocks.size());
    for (size_t v = 0; v < b1.blocks.size(); ++v) {
      CHECK(b1.blocks[v] == b2.blocks[v]);
    }
    CHECK(is_soft_state(model.schema(), b1.to_state_vector()));
  }
  CHECK(model.embeddings() == before);
}

TEST_CASE("belief blocks always sum to one") {
  FactorModel model = trained_toy_model();
  TrackerSession session(model);
  Turn oov{"", "zzz qqq", std::nullopt};  // all out of vocabulary
  for (int i = 0; i < 4; ++i) {
    BeliefState b = session.step(oov);
    for (const Eigen::VectorXd& block : b.blocks) {
      CHECK(std::abs(block.sum() - 1.0) <= 1e-9);
      CHECK(block.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("hard recurrence snaps the carried state to one-hot") {
  FactorModel model = trained_toy_model();
  TrackerOptions opts;
  opts.hard_recurrence = true;
  TrackerSession session(model, opts);
  session.step(Turn{"askvar0", "w1", std::nullopt});
  CHECK(is_hard_state(model.schema(), session.state()));

  TrackerSession soft(model);
  soft.step(Turn{"askvar0", "w1", std::nullopt});
  CHECK(!is_hard_state(model.schema(), soft.state()));
  CHECK(is_soft_state(model.schema(), soft.state()));
}

TEST_CASE("track_dialog yields one belief per turn") {
  FactorModel model = trained_toy_model();
  DialogLog dialog{"d", {Turn{"askvar0", "w1", std::nullopt}}};
  CHECK(track_dialog(model, dialog).size() == 1);
  dialog.turns.push_back(Turn{"askvar1", "w2", std::nullopt});
  dialog.turns.push_back(Turn{"askvar0", "w3", std::nullopt});
  CHECK(track_dialog(model, dialog).size() == 3);
}

TEST_CASE("tracker identifies planted indicators in a noiseless world") {
  WorldConfig wc;
  wc.seed = 31;
  wc.n_vars = 2;
  wc.values_per_var = 3;
  wc.indicators_per_value = 2;
  wc.noise_vocab_size = 6;
  SyntheticWorld world = generate_world(wc);
  auto train = generate_corpus(world, 80, 2, 0, 8);
  Vocabulary vocab = Vocabulary::build(train, 1);
  TransitionMatrix m = assemble_transitions(train, world.schema, vocab);
  FactorConfig config;
  config.k = 16;
  config.seed = 5;
  auto [model, report] = fit(m, world.schema, vocab, config);

  // A fresh dialog whose first turn names var0's value 2 by its indicators.
  std::string utterance = world.indicators[0][1][0] + " " + world.indicators[0][1][1];
  DialogLog dialog{"probe", {Turn{world.prompts[0], utterance, std::nullopt}}};
  std::vector<BeliefState> beliefs = track_dialog(model, dialog);
  Assignment got = decode_argmax(model.schema(), beliefs[0].to_state_vector());
  CHECK(got["var0"] == "v2");
}

TEST_CASE("scaling all embeddings leaves every argmax unchanged") {
  FactorModel model = trained_toy_model();
  FactorModel scaled(model.schema(), model.vocab(), model.config(),
                     3.0 * model.embeddings(), model.include_system_tokens());

  WorldConfig wc;
  wc.seed = 21;
  wc.n_vars = 2;
  wc.values_per_var = 3;
  wc.indicators_per_value = 1;
  wc.noise_vocab_size = 5;
  SyntheticWorld world = generate_world(wc);
  auto probes = generate_corpus(world, 10, 4, 1, 99);

  for (const DialogLog& dialog : probes) {
    auto b1 = track_dialog(model, dialog);
    auto b2 = track_dialog(scaled, dialog);
    REQUIRE(b1.size() == b2.size());
    for (size_t t = 0; t < b1.size(); ++t) {
      CHECK(decode_argmax(model.schema(), b1[t].to_state_vector()) ==
            decode_argmax(model.schema(), b2[t].to_state_vector()));
    }
  }
}
