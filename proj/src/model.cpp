#include "cmftrack/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cmftrack/factorization.hpp"

static_assert(std::endian::native == std::endian::little,
              "model archive I/O assumes a little-endian host");

namespace cmft {

void FactorConfig::validate() const {
  if (k < 1) throw DataError("k must be >= 1");
  if (lambda_a < 0 || lambda_b < 0) throw DataError("regularizers must be >= 0");
  if (w_target < 1) throw DataError("w_target must be >= 1");
  if (max_iters < 1) throw DataError("max_iters must be >= 1");
  if (!(rel_tol > 0)) throw DataError("rel_tol must be > 0");
}

nlohmann::json FactorConfig::to_json() const {
  return {{"k", k},
          {"lambda_a", lambda_a},
          {"lambda_b", lambda_b},
          {"w_target", w_target},
          {"max_iters", max_iters},
          {"rel_tol", rel_tol},
          {"seed", seed}};
}

FactorConfig FactorConfig::from_json(const nlohmann::json& j) {
  FactorConfig config;
  config.k = j.value("k", config.k);
  config.lambda_a = j.value("lambda_a", config.lambda_a);
  config.lambda_b = j.value("lambda_b", config.lambda_b);
  config.w_target = j.value("w_target", config.w_target);
  config.max_iters = j.value("max_iters", config.max_iters);
  config.rel_tol = j.value("rel_tol", config.rel_tol);
  config.seed = j.value("seed", config.seed);
  config.validate();
  return config;
}

FactorModel::FactorModel(StateSchema schema, Vocabulary vocab, FactorConfig config,
                         Eigen::MatrixXd embeddings, bool include_system_tokens)
    : schema_(std::move(schema)),
      vocab_(std::move(vocab)),
      config_(std::move(config)),
      embeddings_(std::move(embeddings)),
      include_system_tokens_(include_system_tokens) {
  config_.validate();
  const int sw = schema_.state_width();
  const int d = 2 * sw + vocab_.size();
  if (embeddings_.rows() != d) {
    throw DataError("embedding matrix has " + std::to_string(embeddings_.rows()) +
                    " rows, schema and vocabulary imply d = " + std::to_string(d));
  }
  if (embeddings_.cols() != config_.k) {
    throw DataError("embedding matrix width does not match config k");
  }
  if (!embeddings_.allFinite()) {
    throw NumericError("embedding matrix has non-finite entries");
  }

  const auto state_rows = embeddings_.topRows(sw);
  const auto obs_rows = embeddings_.bottomRows(d - 2 * sw);
  Eigen::MatrixXd masked = state_rows.transpose() * state_rows +
                           obs_rows.transpose() * obs_rows;
  masked.diagonal().array() += kProjectionRidge;
  masked_solver_.compute(masked);

  Eigen::MatrixXd full = embeddings_.transpose() * embeddings_;
  full.diagonal().array() += kProjectionRidge;
  full_solver_.compute(full);

  if (masked_solver_.info() != Eigen::Success ||
      full_solver_.info() != Eigen::Success) {
    throw NumericError("projection normal equations are not positive definite");
  }
}

Eigen::VectorXd FactorModel::column_weights() const {
  return make_column_weights(d(), state_width(), config_.w_target);
}

namespace {

constexpr char kMagic[8] = {'C', 'M', 'F', 'T', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_blob(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError("model file truncated");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError("model file truncated");
  return v;
}

std::string read_blob(std::istream& in, std::uint64_t max_len) {
  std::uint64_t len = read_u64(in);
  if (len > max_len) throw DataError("model file section is implausibly large");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("model file truncated");
  return s;
}

nlohmann::json parse_section(const std::string& text, const char* what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw DataError(std::string("model file has invalid ") + what + " JSON");
  }
  return j;
}

}  // namespace

void FactorModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kFormatVersion);
  write_blob(out, schema_.to_json().dump());
  write_blob(out, vocab_.to_json().dump());
  nlohmann::json config_json = config_.to_json();
  config_json["include_system_tokens"] = include_system_tokens_;
  config_json["min_count"] = vocab_.min_count();
  write_blob(out, config_json.dump());

  write_u64(out, static_cast<std::uint64_t>(embeddings_.rows()));
  write_u64(out, static_cast<std::uint64_t>(embeddings_.cols()));
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> block =
      embeddings_;
  out.write(reinterpret_cast<const char*>(block.data()),
            static_cast<std::streamsize>(sizeof(double) * block.size()));
  if (!out) throw IoError("failed while writing model file: " + path);
}

FactorModel FactorModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);

  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a cmftrack model file: " + path);
  }
  std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version));
  }

  constexpr std::uint64_t kMaxSection = 1ull << 30;
  nlohmann::json schema_json = parse_section(read_blob(in, kMaxSection), "schema");
  nlohmann::json vocab_json = parse_section(read_blob(in, kMaxSection), "vocabulary");
  nlohmann::json config_json = parse_section(read_blob(in, kMaxSection), "config");

  StateSchema schema = StateSchema::from_json(schema_json);
  FactorConfig config = FactorConfig::from_json(config_json);
  bool include_system = config_json.value("include_system_tokens", true);
  int min_count = config_json.value("min_count", 1);
  Vocabulary vocab = Vocabulary::from_json(vocab_json, min_count);

  std::uint64_t d = read_u64(in);
  std::uint64_t k = read_u64(in);
  if (d < 1 || k < 1 || d > (1ull << 32) || k > (1ull << 24)) {
    throw DataError("model file has implausible dimensions");
  }
  if (d != static_cast<std::uint64_t>(2 * schema.state_width() + vocab.size())) {
    throw DataError("model dimensions are inconsistent with its schema and vocabulary");
  }

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> block(
      static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
  in.read(reinterpret_cast<char*>(block.data()),
          static_cast<std::streamsize>(sizeof(double) * block.size()));
  if (!in) throw DataError("model file truncated");
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw DataError("model file has trailing bytes");
  }
  if (!block.allFinite()) {
    throw DataError("model embedding block has non-finite entries");
  }

  return FactorModel(std::move(schema), std::move(vocab), config,
                     Eigen::MatrixXd(block), include_system);
}

}  // namespace cmft
