#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cmftrack/corpus.hpp"
#include "cmftrack/model.hpp"
#include "cmftrack/schema.hpp"

namespace cmft {

struct TrackerOptions {
  bool hard_recurrence = false;  // feed argmax one-hot forward instead of the belief
  bool full_projection = false;  // project with all embedding rows, zeros in the
                                 // next-state slots of the target
};

// Latent embedding of one turn transition.
using TransitionEmbedding = Eigen::VectorXd;

// Fold a partial transition into the latent space: the least-squares solution
// of the observed rows (current state + observation; next-state rows excluded
// unless full_projection) against their entries, ridged by kProjectionRidge.
TransitionEmbedding project_transition(const FactorModel& model,
                                       const StateVector& state,
                                       const ObservationVector& observation,
                                       bool full_projection = false);

// Scores for every next-state column: a . E_next^T.
Eigen::VectorXd predict_next_state(const FactorModel& model,
                                   const TransitionEmbedding& embedding);

// Turn-by-turn belief over one dialog. Sessions never mutate the model; many
// sessions may run concurrently against one model.
class TrackerSession {
 public:
  explicit TrackerSession(const FactorModel& model, TrackerOptions options = {});

  // Back to the all-None state, turn counter 0.
  void reset();

  // Consume one turn and return the belief over the next state. The belief
  // (or its argmax one-hot, under hard_recurrence) becomes the recurrent
  // state for the following turn.
  BeliefState step(const Turn& turn);

  const StateVector& state() const { return state_; }
  int turn_count() const { return turns_; }
  const TrackerOptions& options() const { return options_; }

 private:
  const FactorModel* model_;
  TrackerOptions options_;
  StateVector state_;
  int turns_ = 0;
};

// Reset, then step over the dialog's turns in order; one belief per turn.
std::vector<BeliefState> track_dialog(const FactorModel& model,
                                      const DialogLog& dialog,
                                      TrackerOptions options = {});

}  // namespace cmft
