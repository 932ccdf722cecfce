#include "cmftrack/factorization.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace cmft {

Eigen::VectorXd make_column_weights(int d, int state_width, double w_target) {
  if (state_width < 1 || d < 2 * state_width) {
    throw DataError("column layout narrower than two state blocks");
  }
  if (w_target < 1) {
    throw DataError("w_target must be >= 1");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(d);
  w.segment(state_width, state_width).setConstant(w_target);
  return w;
}

Eigen::MatrixXd init_embeddings(int d, int k, std::uint64_t seed) {
  if (d < 1 || k < 1) {
    throw DataError("embedding dimensions must be >= 1");
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
  Eigen::MatrixXd e(d, k);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < k; ++j) {
      e(i, j) = dist(gen);
    }
  }
  return e;
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B) {
  if (G.rows() != G.cols()) {
    throw NumericError("system matrix is not square");
  }
  if (B.rows() != G.rows()) {
    throw NumericError("right-hand side does not match system size");
  }
  double asym = (G - G.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (1.0 + G.cwiseAbs().maxCoeff())) {
    throw NumericError("system matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw NumericError("system matrix is not positive definite");
  }
  return llt.solve(B);
}

Eigen::MatrixXd update_transition_embeddings(const TransitionMatrix& m,
                                             const Eigen::MatrixXd& features,
                                             const Eigen::VectorXd& weights,
                                             double lambda_a) {
  const int d = m.d();
  const int k = static_cast<int>(features.cols());
  if (features.rows() != d) {
    throw DataError("feature matrix row count does not match transition columns");
  }
  if (weights.size() != d) {
    throw DataError("weight vector length does not match transition columns");
  }

  Eigen::MatrixXd gram = features.transpose() * weights.asDiagonal() * features;
  gram.diagonal().array() += lambda_a;

  // One right-hand side per row: (m_i W E)^T. Rows are sparse, so only the
  // nonzero columns of m_i contribute.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(k, m.n());
  for (int i = 0; i < m.n(); ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.rows, i);
         it; ++it) {
      rhs.col(i) += (it.value() * weights[it.col()]) *
                    features.row(it.col()).transpose();
    }
  }
  return solve_spd(gram, rhs).transpose();
}

Eigen::MatrixXd update_feature_embeddings(const TransitionMatrix& m,
                                          const Eigen::MatrixXd& transitions,
                                          double lambda_b) {
  if (transitions.rows() != m.n()) {
    throw DataError("transition embedding count does not match matrix rows");
  }
  Eigen::MatrixXd gram = transitions.transpose() * transitions;
  gram.diagonal().array() += lambda_b;
  Eigen::MatrixXd targets = m.rows.transpose() * transitions;  // d x k, = M^T A
  return solve_spd(gram, targets.transpose()).transpose();
}

double weighted_loss(const TransitionMatrix& m, const Eigen::MatrixXd& transitions,
                     const Eigen::MatrixXd& features, const Eigen::VectorXd& weights,
                     double lambda_a, double lambda_b) {
  if (transitions.rows() != m.n() || features.rows() != m.d() ||
      transitions.cols() != features.cols() || weights.size() != m.d()) {
    throw DataError("inconsistent shapes in loss evaluation");
  }
  if (!transitions.allFinite() || !features.allFinite() || !weights.allFinite()) {
    throw NumericError("non-finite inputs in loss evaluation");
  }

  // sum_ij w_j (m_ij - p_ij)^2 expanded around the sparse entries of M:
  //   sum w_j m_ij^2 - 2 sum w_j m_ij p_ij + sum_i a_i (E^T W E) a_i^T
  // which avoids forming the dense reconstruction.
  double m_sq = 0.0;
  double cross = 0.0;
  for (int i = 0; i < m.n(); ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.rows, i);
         it; ++it) {
      double w = weights[it.col()];
      m_sq += w * it.value() * it.value();
      cross += w * it.value() * transitions.row(i).dot(features.row(it.col()));
    }
  }
  Eigen::MatrixXd gram = features.transpose() * weights.asDiagonal() * features;
  double quad = ((transitions * gram).cwiseProduct(transitions)).sum();

  return m_sq - 2.0 * cross + quad + lambda_a * transitions.squaredNorm() +
         lambda_b * features.squaredNorm();
}

nlohmann::json TrainReport::to_json() const {
  return {{"loss", loss}, {"iterations", iterations}, {"converged", converged}};
}

std::pair<FactorModel, TrainReport> fit(const TransitionMatrix& m,
                                        const StateSchema& schema,
                                        const Vocabulary& vocab,
                                        const FactorConfig& config,
                                        bool include_system_tokens,
                                        std::ostream* log) {
  config.validate();
  if (m.n() < 1) throw DataError("transition matrix has no rows");
  if (m.state_width != schema.state_width() || m.vocab_size != vocab.size()) {
    throw DataError("transition matrix layout does not match schema/vocabulary");
  }

  const int d = m.d();
  Eigen::VectorXd weights = make_column_weights(d, m.state_width, config.w_target);
  Eigen::MatrixXd features = init_embeddings(d, config.k, config.seed);

  TrainReport report;
  Eigen::MatrixXd transitions;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    transitions = update_transition_embeddings(m, features, weights, config.lambda_a);
    features = update_feature_embeddings(m, transitions, config.lambda_b);
    double loss = weighted_loss(m, transitions, features, weights, config.lambda_a,
                                config.lambda_b);
    report.loss.push_back(loss);
    if (log) {
      (*log) << "iter " << (iter + 1) << " loss " << loss << "\n";
    }
    if (report.loss.size() >= 2) {
      double prev = report.loss[report.loss.size() - 2];
      double rel = std::abs(prev - loss) / std::max(std::abs(prev), 1e-300);
      if (rel < config.rel_tol) {
        report.converged = true;
        break;
      }
    }
  }
  report.iterations = static_cast<int>(report.loss.size());

  return {FactorModel(schema, vocab, config, std::move(features),
                      include_system_tokens),
          std::move(report)};
}

}  // namespace cmft
