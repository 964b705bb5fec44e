// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "vdib/config.hpp"
#include "vdib/errors.hpp"

using namespace vdib;

namespace {

RunConfig parse(const std::string& text, RunConfig base = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(base));
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults validate") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.model.k == 16);
  CHECK(c.model.steps == 20);
  CHECK(c.train.steps == 20);
  CHECK(c.train.epochs == 30);
  CHECK(c.train.channel.crossover() == 0.1);
  CHECK(c.data_seed() == c.train.seed);
}

TEST_CASE("parse a file") {
  const RunConfig c = parse(R"(# comment line
seed = 42
beta=0.01   # trailing comment
k = 8
T = 10
hidden = 64
classes = 3
ebn0_db = -2
ebn0_mapping = bpsk
optimizer = adam
eval_feedback = clean
ebn0_grid_db = -inf, -4, 0
timing = yes
out = runs/a
)");
  CHECK(c.train.seed == 42);
  CHECK(c.train.beta == 0.01);
  CHECK(c.model.k == 8);
  CHECK(c.model.steps == 10);
  CHECK(c.train.steps == 10);
  CHECK(c.model.hidden == 64);
  CHECK(c.model.classes == 3);
  CHECK(c.data.synthetic.classes == 3);
  CHECK(!c.train.channel.epsilon);
  CHECK(c.train.channel.ebn0_db == -2.0);
  CHECK(c.train.channel.crossover() == doctest::Approx(ebn0_to_epsilon_bpsk(db_to_linear(-2.0))).epsilon(1e-15));
  CHECK(c.train.optimizer == OptimizerKind::Adam);
  CHECK(c.train.eval_feedback == EvalFeedback::Clean);
  REQUIRE(c.ebn0_grid_db.size() == 3);
  CHECK(c.ebn0_grid_db[0] == -std::numeric_limits<double>::infinity());
  CHECK(c.ebn0_grid_db[2] == 0.0);
  CHECK(c.timing);
  CHECK(c.out_dir == "runs/a");
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("file errors carry line numbers") {
  CHECK(error_of("seed = 1\nbeta = 0.1\nseed = 2\n").find("line 3") != std::string::npos);
  CHECK(error_of("seed = 1\nbeta = 0.1\nseed = 2\n").find("duplicate") != std::string::npos);
  CHECK(error_of("\n\nnope = 3\n").find("line 3") != std::string::npos);
  CHECK(error_of("seed 4\n").find("line 1") != std::string::npos);
  CHECK(error_of("k = -1\n").find("line 1") != std::string::npos);
  CHECK(error_of("beta = 1e-3x\n").find("line 1") != std::string::npos);
  CHECK(error_of("timing = maybe\n").find("line 1") != std::string::npos);
  CHECK(error_of("optimizer = rmsprop\n").find("line 1") != std::string::npos);
  CHECK(error_of("ebn0_mapping = qpsk\n").find("line 1") != std::string::npos);
  CHECK(!error_of("epsilon = 0.1\nebn0_db = 0\n").empty());
}

TEST_CASE("overrides go through the same setter and win") {
  RunConfig c = parse("epsilon = 0.2\nseed = 3\n");
  apply_setting(c, "seed", "9");
  CHECK(c.train.seed == 9);
  apply_setting(c, "ebn0_db", "1.5");
  CHECK(!c.train.channel.epsilon);
  CHECK(c.train.channel.ebn0_db == 1.5);
  apply_setting(c, "epsilon", "0.05");
  CHECK(c.train.channel.epsilon == 0.05);
  CHECK(!c.train.channel.ebn0_db);
  apply_setting(c, "data_seed", "77");
  CHECK(c.data_seed() == 77);
  CHECK_THROWS_AS(apply_setting(c, "colour", "blue"), ConfigError);
}

TEST_CASE("every documented key is known and typed") {
  const auto& keys = config_keys();
  CHECK(keys.size() >= 40);
  const std::set<std::string> paths{"train_events", "test_events", "out", "checkpoint"};
  for (const auto& k : keys) {
    RunConfig c;
    if (paths.count(k)) {
      CHECK_NOTHROW(apply_setting(c, k, "some/file.txt"));
    } else {
      CHECK_THROWS_AS(apply_setting(c, k, "not-a-value-#"), ConfigError);
    }
  }
}

TEST_CASE("validation") {
  auto invalid = [](const std::string& key, const std::string& value) {
    RunConfig c;
    apply_setting(c, key, value);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  invalid("beta", "0");
  invalid("beta", "-1");
  invalid("epsilon", "0.7");
  invalid("ebn0_db", "nan");
  invalid("prior_rate", "1");
  invalid("batch_size", "0");
  invalid("T", "0");
  invalid("k", "0");
  invalid("classes", "1");
  invalid("init_rate", "0");
  invalid("tau_a", "0");
  invalid("window_b", "0");
  invalid("beta_grid", "0.1, 0");
  invalid("ebn0_grid_db", "0, inf");
  invalid("train_per_class", "0");
  invalid("train_events", "a.txt");
  invalid("width", "0");
  RunConfig ok;
  apply_setting(ok, "epsilon", "0.5");
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("parse_real_list") {
  CHECK(parse_real_list("1, 2.5,-3") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(parse_real_list(" -inf ,0") == std::vector<double>{-std::numeric_limits<double>::infinity(), 0.0});
  CHECK_THROWS_AS(parse_real_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_real_list("1;2"), ConfigError);
}
