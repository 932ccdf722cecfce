#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <json.hpp>

#include "cmftrack/corpus.hpp"
#include "cmftrack/schema.hpp"

namespace cmft {

// Ridge added to the projection Gram matrix so rank-deficient embeddings
// still yield a solvable system.
inline constexpr double kProjectionRidge = 1e-8;

struct FactorConfig {
  int k = 350;            // latent dimension
  double lambda_a = 0.1;  // ridge on transition embeddings
  double lambda_b = 0.1;  // ridge on feature embeddings
  double w_target = 5.0;  // column weight on the next-state block
  int max_iters = 50;
  double rel_tol = 1e-4;  // stop when relative loss change drops below this
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static FactorConfig from_json(const nlohmann::json& j);
};

// Trained factorization: the d x k feature-embedding matrix plus everything
// needed to encode inputs against it. Immutable and safe to share across
// threads; tracker sessions hold a reference.
class FactorModel {
 public:
  FactorModel(StateSchema schema, Vocabulary vocab, FactorConfig config,
              Eigen::MatrixXd embeddings, bool include_system_tokens = true);

  const StateSchema& schema() const { return schema_; }
  const Vocabulary& vocab() const { return vocab_; }
  const FactorConfig& config() const { return config_; }
  const Eigen::MatrixXd& embeddings() const { return embeddings_; }
  int d() const { return static_cast<int>(embeddings_.rows()); }
  int k() const { return static_cast<int>(embeddings_.cols()); }
  int state_width() const { return schema_.state_width(); }
  bool include_system_tokens() const { return include_system_tokens_; }

  // Diagonal column weights implied by the config (w_target on the
  // next-state block, 1 elsewhere).
  Eigen::VectorXd column_weights() const;

  // Cholesky factorization of the projection normal equations. The masked
  // solver (full = false) uses only the current-state and observation rows
  // of the embedding matrix; the full solver uses all rows.
  const Eigen::LLT<Eigen::MatrixXd>& projection_solver(bool full) const {
    return full ? full_solver_ : masked_solver_;
  }

  // Single-file archive: schema JSON, vocabulary JSON, config JSON and the
  // embedding block as little-endian float64, row major.
  void save(const std::string& path) const;
  static FactorModel load(const std::string& path);

 private:
  StateSchema schema_;
  Vocabulary vocab_;
  FactorConfig config_;
  Eigen::MatrixXd embeddings_;
  bool include_system_tokens_ = true;
  Eigen::LLT<Eigen::MatrixXd> masked_solver_;
  Eigen::LLT<Eigen::MatrixXd> full_solver_;
};

}  // namespace cmft
