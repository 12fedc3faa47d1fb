#include <doctest.h>

#include "adpo/config.hpp"

using namespace adpo;

TEST_CASE("empty config resolves to the published defaults") {
  const ExperimentConfig cfg = parse_config_text("{}");
  CHECK(cfg.experiment == "grid");
  CHECK(cfg.train.epochs == 80);
  CHECK(cfg.train.batch_size == 32);
  CHECK(cfg.train.lr == 5e-4);
  CHECK(cfg.train.weight_decay == 1e-4);
  CHECK(cfg.train.adam_beta1 == 0.9);
  CHECK(cfg.train.adam_beta2 == 0.999);
  CHECK(cfg.train.n_train == 10000);
  CHECK(cfg.train.n_test == 1000);
  CHECK(cfg.train.world.group_size == 4);
  CHECK(cfg.train.world.context_dim == 8);
  CHECK(cfg.train.world.item_dim == 8);
  CHECK(cfg.train.scale == ModelScale::medium);
  CHECK(cfg.beta == 1.0);
  CHECK(cfg.beta_r == 1.0);
  CHECK(cfg.tau == 1.0);
  CHECK(cfg.seeds.size() == 10);
  CHECK(cfg.scenarios.size() == 12);
  CHECK(cfg.methods.size() == 8);
}

TEST_CASE("unknown keys are hard errors that name the key") {
  try {
    parse_config_text(R"({"learning_rte": 0.1})");
    FAIL("expected UnknownKeyError");
  } catch (const UnknownKeyError& e) {
    CHECK(std::string(e.what()).find("learning_rte") != std::string::npos);
  }
}

TEST_CASE("error classes are distinct and actionable") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigFileError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_text("[1,2]"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_text(R"({"epochs": 0})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"epochs": "many"})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"tau": 0.0})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"beta": -1.0})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"scale": "tiny"})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"seeds": []})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"seeds": [-1]})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"anchor": "sometimes"})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"experiment": "vibes"})"), ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"methods": ["dpo_plus"]})"),
                  ConfigValueError);
  CHECK_THROWS_AS(parse_config_text(R"({"scenarios": ["storm"]})"),
                  ConfigValueError);
}

TEST_CASE("seed lists: ranges, commas, arrays") {
  CHECK(parse_seed_list("0..9") ==
        std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(parse_seed_list("4..4") == std::vector<std::uint64_t>{4});
  CHECK(parse_seed_list("3,1,2") == std::vector<std::uint64_t>{3, 1, 2});
  CHECK_THROWS_AS(parse_seed_list("5..3"), ConfigValueError);
  CHECK_THROWS_AS(parse_seed_list("a..b"), ConfigValueError);

  const ExperimentConfig cfg = parse_config_text(R"({"seeds": "0..2"})");
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2});
  const ExperimentConfig cfg2 = parse_config_text(R"({"seeds": [0, 1, 2]})");
  CHECK(cfg2.seeds == cfg.seeds);
}

TEST_CASE("scenario and method selectors expand families and 'all'") {
  CHECK(expand_scenarios({"heavy_noise"}).size() == 3);
  CHECK(expand_scenarios({"all"}).size() == 12);
  CHECK(expand_scenarios({"clean", "dist_shift_heavy"}).size() == 2);
  CHECK(expand_methods({"all"}).size() == 8);
  CHECK(expand_methods({"std_soft", "adpo_list_kde"}).size() == 2);

  const ExperimentConfig cfg =
      parse_config_text(R"({"scenarios": "heavy_noise", "methods": "std_soft"})");
  CHECK(cfg.scenarios ==
        std::vector<std::string>{"heavy_noise_light", "heavy_noise_medium",
                                 "heavy_noise_heavy"});
  CHECK(cfg.methods == std::vector<std::string>{"std_soft"});
}

TEST_CASE("config emission round-trips exactly") {
  const std::string text = R"({
    "experiment": "temperature",
    "scenarios": ["heavy_noise_medium"],
    "methods": ["adpo_pair_soft", "adpo_list_kde"],
    "seeds": "0..4",
    "workers": 3,
    "output_dir": "runs/x",
    "strict": true,
    "epochs": 40,
    "batch_size": 16,
    "scale": "large",
    "learning_rate": 1e-3,
    "weight_decay": 0.0,
    "n_train": 500,
    "n_test": 100,
    "group_size": 6,
    "reward_std": 2.5,
    "beta": 2.0,
    "beta_r": 0.5,
    "tau": 4.0,
    "pretrain_steps": 10,
    "anchor": "dynamic",
    "update_period": 7
  })";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.train.world.group_size == 6);
  CHECK(cfg.train.world.reward_std == 2.5);
  CHECK(cfg.pretrain_steps == 10);
  CHECK(cfg.anchor_kind == "dynamic");
  const ExperimentConfig back = parse_config_text(emit_config(cfg));
  CHECK(back == cfg);
  CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("method specs pick up config-level overrides") {
  const ExperimentConfig cfg = parse_config_text(R"({
    "methods": ["adpo_pair_soft", "std_soft", "adpo_list_raw"],
    "beta_r": 2.0, "tau": 0.5, "pretrain_steps": 0, "anchor": "dynamic",
    "update_period": 10
  })");
  const auto specs = cfg.method_specs();
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].beta_r == 2.0);
  CHECK(specs[0].tau == 1.0);  // pairwise evaluation temperature stays pinned
  CHECK(specs[0].anchor.kind == AnchorKind::dynamic);
  CHECK(specs[0].anchor.pretrain_steps == 0);
  CHECK(specs[0].anchor.update_period == 10);
  CHECK(specs[1].anchor.kind == AnchorKind::none);  // std stays unanchored
  CHECK(specs[2].tau == 0.5);  // listwise tau follows the override
}
