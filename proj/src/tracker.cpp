#include "cmftrack/tracker.hpp"

namespace cmft {

TransitionEmbedding project_transition(const FactorModel& model,
                                       const StateVector& state,
                                       const ObservationVector& observation,
                                       bool full_projection) {
  const int sw = model.state_width();
  if (state.size() != sw) {
    throw DataError("state vector does not match the model's state width");
  }
  if (observation.dim != model.vocab().size()) {
    throw DataError("observation does not match the model's vocabulary");
  }

  // E_obs^T m_obs; the next-state entries of the target are unknown (zero),
  // so the right-hand side is the same in masked and full mode.
  const Eigen::MatrixXd& e = model.embeddings();
  Eigen::VectorXd rhs = e.topRows(sw).transpose() * state;
  for (int idx : observation.indices) {
    rhs += e.row(2 * sw + idx).transpose();
  }

  TransitionEmbedding a = model.projection_solver(full_projection).solve(rhs);
  if (!a.allFinite()) {
    throw NumericError("transition projection produced non-finite values");
  }
  return a;
}

Eigen::VectorXd predict_next_state(const FactorModel& model,
                                   const TransitionEmbedding& embedding) {
  if (embedding.size() != model.k()) {
    throw DataError("transition embedding does not match the model's latent size");
  }
  const int sw = model.state_width();
  return model.embeddings().middleRows(sw, sw) * embedding;
}

TrackerSession::TrackerSession(const FactorModel& model, TrackerOptions options)
    : model_(&model), options_(options) {
  reset();
}

void TrackerSession::reset() {
  state_ = encode_state(model_->schema(), {});
  turns_ = 0;
}

BeliefState TrackerSession::step(const Turn& turn) {
  ObservationVector z =
      encode_observation(model_->vocab(), turn, model_->include_system_tokens());
  TransitionEmbedding a =
      project_transition(*model_, state_, z, options_.full_projection);
  Eigen::VectorXd scores = predict_next_state(*model_, a);
  BeliefState belief = normalize_scores(model_->schema(), scores);

  if (options_.hard_recurrence) {
    state_ = encode_state(model_->schema(),
                          decode_argmax(model_->schema(), belief.to_state_vector()));
  } else {
    state_ = belief.to_state_vector();
  }
  ++turns_;
  return belief;
}

std::vector<BeliefState> track_dialog(const FactorModel& model,
                                      const DialogLog& dialog,
                                      TrackerOptions options) {
  TrackerSession session(model, options);
  std::vector<BeliefState> beliefs;
  beliefs.reserve(dialog.turns.size());
  for (const Turn& turn : dialog.turns) {
    beliefs.push_back(session.step(turn));
  }
  return beliefs;
}

}  // namespace cmft
