#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cmftrack/factorization.hpp"
#include "cmftrack/model.hpp"

using namespace cmft;

namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "cmftrack-model-io";
  fs::create_directories(dir);
  return dir / name;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

StateSchema small_schema() {
  return StateSchema::build({{"Area", {"None", "north", "south"}},
                             {"Price", {"None", "cheap"}}});
}

Vocabulary small_vocab() {
  std::vector<DialogLog> logs = {
      {"d0", {Turn{"area", "north cheap food", std::nullopt}}}};
  return Vocabulary::build(logs, 1);  // 4 tokens
}

FactorModel small_model(std::uint64_t seed = 9, bool include_system = true) {
  StateSchema schema = small_schema();
  Vocabulary vocab = small_vocab();
  FactorConfig config;
  config.k = 4;
  config.seed = seed;
  const int d = 2 * schema.state_width() + vocab.size();
  return FactorModel(schema, vocab, config, init_embeddings(d, config.k, seed),
                     include_system);
}

}  // namespace

TEST_CASE("config validation") {
  FactorConfig config;
  CHECK_NOTHROW(config.validate());
  config.k = 0;
  CHECK_THROWS_AS(config.validate(), DataError);
  config = {};
  config.lambda_a = -1;
  CHECK_THROWS_AS(config.validate(), DataError);
  config = {};
  config.w_target = 0.5;
  CHECK_THROWS_AS(config.validate(), DataError);
  config = {};
  config.max_iters = 0;
  CHECK_THROWS_AS(config.validate(), DataError);
  config = {};
  config.rel_tol = 0;
  CHECK_THROWS_AS(config.validate(), DataError);
}

TEST_CASE("config JSON round trip keeps every field") {
  FactorConfig config;
  config.k = 12;
  config.lambda_a = 0.25;
  config.lambda_b = 0.75;
  config.w_target = 3.5;
  config.max_iters = 17;
  config.rel_tol = 1e-6;
  config.seed = 987654321;
  FactorConfig back = FactorConfig::from_json(config.to_json());
  CHECK(back.k == config.k);
  CHECK(back.lambda_a == config.lambda_a);
  CHECK(back.lambda_b == config.lambda_b);
  CHECK(back.w_target == config.w_target);
  CHECK(back.max_iters == config.max_iters);
  CHECK(back.rel_tol == config.rel_tol);
  CHECK(back.seed == config.seed);

  // Missing fields fall back to defaults; invalid values still fail.
  FactorConfig defaults = FactorConfig::from_json(nlohmann::json::object());
  CHECK(defaults.k == FactorConfig{}.k);
  CHECK_THROWS_AS(FactorConfig::from_json({{"k", 0}}), DataError);
}

TEST_CASE("model constructor validates shape and content") {
  StateSchema schema = small_schema();
  Vocabulary vocab = small_vocab();
  FactorConfig config;
  config.k = 4;
  const int d = 2 * schema.state_width() + vocab.size();

  CHECK_THROWS_AS(FactorModel(schema, vocab, config, init_embeddings(d - 1, 4, 1)),
                  DataError);
  CHECK_THROWS_AS(FactorModel(schema, vocab, config, init_embeddings(d, 3, 1)),
                  DataError);
  Eigen::MatrixXd bad = init_embeddings(d, 4, 1);
  bad(2, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FactorModel(schema, vocab, config, bad), NumericError);
}

TEST_CASE("column weights derive from the stored config") {
  FactorModel model = small_model();
  Eigen::VectorXd w = model.column_weights();
  const int sw = model.state_width();
  CHECK(w.size() == model.d());
  CHECK(w.head(sw).maxCoeff() == 1.0);
  CHECK(w.segment(sw, sw).minCoeff() == model.config().w_target);
  CHECK(w.tail(model.d() - 2 * sw).maxCoeff() == 1.0);
}

TEST_CASE("archive round trip preserves everything") {
  FactorModel model = small_model(9, false);
  fs::path path = temp_path("roundtrip.cmf");
  model.save(path.string());

  FactorModel back = FactorModel::load(path.string());
  CHECK(back.schema() == model.schema());
  CHECK(back.vocab() == model.vocab());
  CHECK(back.embeddings() == model.embeddings());
  CHECK(back.k() == model.k());
  CHECK(back.d() == model.d());
  CHECK(back.include_system_tokens() == false);
  CHECK(back.vocab().min_count() == model.vocab().min_count());
  CHECK(back.config().to_json() == model.config().to_json());
}

TEST_CASE("saving twice produces byte-identical archives") {
  FactorModel model = small_model();
  fs::path p1 = temp_path("bytes1.cmf");
  fs::path p2 = temp_path("bytes2.cmf");
  model.save(p1.string());
  model.save(p2.string());
  CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("loader rejects damaged archives") {
  FactorModel model = small_model();
  fs::path path = temp_path("damage.cmf");
  model.save(path.string());
  const std::string good = read_bytes(path);

  CHECK_THROWS_AS(FactorModel::load("/nonexistent/model.cmf"), IoError);

  fs::path bad = temp_path("bad.cmf");
  write_bytes(bad, "not a model at all");
  CHECK_THROWS_AS(FactorModel::load(bad.string()), DataError);

  std::string wrong_version = good;
  wrong_version[8] = 99;  // format version field
  write_bytes(bad, wrong_version);
  CHECK_THROWS_AS(FactorModel::load(bad.string()), DataError);

  write_bytes(bad, good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(FactorModel::load(bad.string()), DataError);

  write_bytes(bad, good + "x");
  CHECK_THROWS_AS(FactorModel::load(bad.string()), DataError);

  // Corrupt one byte inside the embedding block to a NaN pattern.
  std::string nan_block = good;
  for (size_t i = 0; i < 8; ++i) {
    nan_block[nan_block.size() - 8 + i] = static_cast<char>(0xff);
  }
  write_bytes(bad, nan_block);
  CHECK_THROWS_AS(FactorModel::load(bad.string()), DataError);
}

TEST_CASE("projection solvers are ready after construction") {
  FactorModel model = small_model();
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(model.k());
  Eigen::VectorXd masked = model.projection_solver(false).solve(rhs);
  Eigen::VectorXd full = model.projection_solver(true).solve(rhs);
  CHECK(masked.allFinite());
  CHECK(full.allFinite());
  CHECK(masked != full);  // different Gram matrices for this model
}
