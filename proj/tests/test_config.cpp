#include <string>

#include "doctest.h"

#include "dab/config.hpp"
#include "dab/errors.hpp"

using namespace dab;

TEST_SUITE("config") {

TEST_CASE("text format parses dotted keys and comments") {
  const std::string text = R"(# regression run
task = regression
mode = dab
latent_dim = 6
encoder_hidden = 50,25
k = 3
beta = 0.5
alpha = 2
gamma = 0.9

dataset.source = generator
dataset.generator = two-clusters
dataset.n_per_cluster = 15
)";
  RunConfig c = parse_run_config(text);
  CHECK(c.model.task == Task::Regression);
  CHECK(c.model.latent_dim == 6);
  CHECK(c.model.encoder_hidden == std::vector<std::size_t>{50, 25});
  CHECK(c.model.k == 3);
  CHECK(c.model.beta == 0.5);
  CHECK(c.model.alpha == 2.0);
  CHECK(c.model.gamma == 0.9);
  CHECK(c.data.generator == "two-clusters");
  CHECK(c.data.n_per_cluster == 15);
  // Untouched keys keep their defaults.
  CHECK(c.model.lr_theta == 1e-3);
  CHECK(c.model.init_gain == 1.0);
  CHECK(c.model.epochs == 1500);
}

TEST_CASE("json format parses the same schema") {
  const std::string text = R"({
  "task": "classification",
  "num_classes": 4,
  "k": 4,
  "beta": 0.01,
  "alpha": 1.0,
  "gamma": 0.9,
  "encoder_hidden": [32, 32],
  "dataset": {
    "source": "generator",
    "generator": "blobs",
    "centers": [[0, 0], [4, 4]],
    "ood_center": [9, 9],
    "ood_n": 10
  }
})";
  RunConfig c = parse_run_config(text);
  CHECK(c.model.task == Task::Classification);
  CHECK(c.model.num_classes == 4);
  CHECK(c.model.encoder_hidden == std::vector<std::size_t>{32, 32});
  CHECK(c.data.generator == "blobs");
  REQUIRE(c.data.blobs.centers.size() == 2);
  CHECK(c.data.blobs.centers[1] == std::vector<double>{4.0, 4.0});
  CHECK(c.data.blobs.ood_center == std::vector<double>{9.0, 9.0});
  CHECK(c.data.blobs.ood_n == 10);
}

TEST_CASE("text point lists parse with semicolon separators") {
  const std::string text = R"(task = classification
k = 2
dataset.generator = blobs
dataset.centers = -3,-3; 3,3
dataset.ood_center = 6.5,6.5
)";
  RunConfig c = parse_run_config(text);
  REQUIRE(c.data.blobs.centers.size() == 2);
  CHECK(c.data.blobs.centers[0] == std::vector<double>{-3.0, -3.0});
  CHECK(c.data.blobs.centers[1] == std::vector<double>{3.0, 3.0});
  CHECK(c.data.blobs.ood_center == std::vector<double>{6.5, 6.5});
}

TEST_CASE("canonical encodings are parse fixed points") {
  for (const auto& name : preset_names()) {
    RunConfig c = preset(name);
    CAPTURE(name);
    const std::string text = to_text(c);
    CHECK(to_text(parse_run_config(text)) == text);
    const std::string jtext = to_json(c);
    CHECK(to_text(parse_run_config(jtext)) == text);
  }
}

TEST_CASE("presets carry consistent semantics") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    CHECK_NOTHROW(validate(preset(name).model));
  }
  CHECK(preset("cubic-k1").model.k == 1);
  CHECK(preset("cubic-k1").model.beta == 1.0);
  CHECK(preset("cubic-k1").model.alpha == 5.0);
  CHECK(preset("cubic-k1").model.epochs == 1500);
  CHECK(preset("two-cluster-k2").model.k == 2);
  CHECK(preset("cifar10").model.k == 10);
  CHECK(preset("cifar10").model.num_classes == 10);
  CHECK(preset("imagenet-finetuned-ood").model.k == 1000);
  CHECK(preset("imagenet-finetuned-calibration").model.margin_enabled);
  CHECK_FALSE(preset("imagenet-finetuned-ood").model.margin_enabled);
  CHECK(preset("blob-ood").model.task == Task::Classification);
  CHECK(preset("blob-calibration-margin").model.margin_enabled);
  CHECK_THROWS_AS(preset("no-such-preset"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_run_config("betaa = 1\n"),
                       doctest::Contains("unknown key"), ConfigError);
}

TEST_CASE("all problems are reported together") {
  try {
    parse_run_config("beta = -1\nk = 0\nmystery = 3\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("beta") != std::string::npos);
    CHECK(what.find("k") != std::string::npos);
    CHECK(what.find("mystery") != std::string::npos);
    CHECK(what.find("3 problems") != std::string::npos);
  }
}

TEST_CASE("malformed inputs raise config errors") {
  CHECK_THROWS_AS(parse_run_config(""), ConfigError);
  CHECK_THROWS_AS(parse_run_config("   \n \t\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("beta 0.5\n"), ConfigError);        // no '='
  CHECK_THROWS_AS(parse_run_config("beta = 1\nbeta = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("beta = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("epochs = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("epochs = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("task = banana\n"), ConfigError);
}

TEST_CASE("semantic range checks") {
  CHECK_THROWS_AS(parse_run_config("gamma = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("gamma = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("latent_dim = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("k = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("lr_theta = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("init_gain = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("init_gain = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("alpha = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("mode = vib\nk = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("margin_enabled = true\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_run_config("task = classification\nnum_classes = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dataset.source = csv\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("dataset.generator = nope\n"), ConfigError);

  // Edge values that are legitimate.
  CHECK_NOTHROW(parse_run_config("beta = 0\n"));
  CHECK_NOTHROW(parse_run_config("epochs = 0\n"));
  CHECK_NOTHROW(parse_run_config("mode = vib\nk = 1\n"));
  CHECK_NOTHROW(
      parse_run_config("task = classification\nmargin_enabled = true\nu_lb = 10\n"));
}

TEST_CASE("validate guards configs assembled in code") {
  DabConfig c;
  CHECK_NOTHROW(validate(c));
  c.gamma = 2.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = DabConfig{};
  c.mode = TrainMode::Vib;
  c.k = 3;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = DabConfig{};
  c.margin_enabled = true;  // still a regression task
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("load_run_config distinguishes io from syntax problems") {
  CHECK_THROWS_AS(load_run_config("definitely_missing.cfg"), IoError);
}

}  // TEST_SUITE
