#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cmftrack/corpus.hpp"
#include "cmftrack/model.hpp"

namespace cmft {

// Diagonal column weights for the [S_t | S_{t+1} | Z_t] layout: w_target on
// the S_{t+1} block, 1 elsewhere.
Eigen::VectorXd make_column_weights(int d, int state_width, double w_target);

// Gaussian init, entries ~ N(0, 1/k), filled row by row from a deterministic
// generator.
Eigen::MatrixXd init_embeddings(int d, int k, std::uint64_t seed);

// Solve G X = B for symmetric positive definite G via Cholesky.
// Throws NumericError when G is not SPD.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B);

// Half-step on the transition embeddings: each row minimizes
//   sum_j w_j (m_ij - a.e_j)^2 + lambda_a ||a||^2
// i.e. a_i = m_i W E (E^T W E + lambda_a I)^-1.
Eigen::MatrixXd update_transition_embeddings(const TransitionMatrix& m,
                                             const Eigen::MatrixXd& features,
                                             const Eigen::VectorXd& weights,
                                             double lambda_a);

// Half-step on the feature embeddings, unweighted ridge per column:
//   e_j = (A^T A + lambda_b I)^-1 A^T M[:,j].
Eigen::MatrixXd update_feature_embeddings(const TransitionMatrix& m,
                                          const Eigen::MatrixXd& transitions,
                                          double lambda_b);

// Objective value:
//   sum_ij w_j (m_ij - (A E^T)_ij)^2 + lambda_a ||A||_F^2 + lambda_b ||E||_F^2
double weighted_loss(const TransitionMatrix& m, const Eigen::MatrixXd& transitions,
                     const Eigen::MatrixXd& features, const Eigen::VectorXd& weights,
                     double lambda_a, double lambda_b);

struct TrainReport {
  std::vector<double> loss;  // objective after each full iteration
  int iterations = 0;
  bool converged = false;

  nlohmann::json to_json() const;
};

// Alternating least squares on the transition matrix. Deterministic for a
// fixed seed and input order; the transition embeddings are discarded and
// only the feature embeddings are kept in the model. Progress is logged to
// *log when given.
std::pair<FactorModel, TrainReport> fit(const TransitionMatrix& m,
                                        const StateSchema& schema,
                                        const Vocabulary& vocab,
                                        const FactorConfig& config,
                                        bool include_system_tokens = true,
                                        std::ostream* log = nullptr);

}  // namespace cmft
