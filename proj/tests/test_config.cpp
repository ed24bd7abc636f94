#include <doctest.h>

#include <json.hpp>

#include "selfi/config.hpp"
#include "selfi/errors.hpp"

using namespace selfi;
using nlohmann::json;

TEST_CASE("parse_run_config rejects unknown keys at every level") {
    CHECK_THROWS_AS(parse_run_config(json{{"trainn", json::object()}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"train", {{"lrr", 0.1}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"model", {{"gamma", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"benchmark", {{"n_methods", 2}}}}), ConfigError);
    CHECK_THROWS_AS(
        parse_run_config(json{{"benchmark",
                               {{"methods", json::array({{{"name", "transfer_a"},
                                                          {"strength", 1.0}}})}}}}),
        ConfigError);
}

TEST_CASE("parse_run_config validates values") {
    CHECK_THROWS_AS(parse_run_config(json{{"train", {{"lr", 0.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"train", {{"beta1", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"train", {{"batch_size", 0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"model", {{"alpha", -0.5}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"model", {{"mode", "bogus"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"n_seeds", 0}}), ConfigError);
    CHECK_THROWS_AS(
        parse_run_config(json{{"benchmark", {{"methods", json::array({{{"name", "nope"}}})}}}}),
        ConfigError);
}

TEST_CASE("config fields land where they should") {
    const json doc{
        {"benchmark",
         {{"seed", 5}, {"n_real_train", 64}, {"methods", json::array({{{"name", "weak_id"},
                                                                       {"id_noise", 9.0}}})}}},
        {"model", {{"mode", "identity_probe"}, {"alpha", 2.0}}},
        {"train", {{"lr", 0.5}, {"epochs", 3}, {"standardize", true}}},
        {"n_seeds", 2},
    };
    const RunConfig cfg = parse_run_config(doc);
    CHECK(cfg.benchmark.spec.seed == 5);
    CHECK(cfg.benchmark.n_real_train == 64);
    CHECK(cfg.benchmark.spec.methods[3].id_noise == 9.0);
    CHECK(cfg.train.model.mode == Mode::identity_probe);
    CHECK(cfg.train.model.alpha == 2.0);
    CHECK(cfg.train.lr == 0.5);
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.standardize);
    CHECK(cfg.n_seeds == 2);
    // model dims follow the benchmark widths
    CHECK(cfg.train.model.dims.d_id == cfg.benchmark.spec.d_id);
}

TEST_CASE("config hash is stable and sensitive") {
    const RunConfig a = default_run_config(0);
    const RunConfig b = default_run_config(0);
    CHECK(config_hash(a) == config_hash(b));

    RunConfig c = default_run_config(0);
    c.train.lr *= 2.0;
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("config JSON round-trips through the parser") {
    RunConfig cfg = default_run_config(3);
    cfg.train.epochs = 7;
    cfg.benchmark.n_fake_val = 99;
    cfg.benchmark.spec.methods[1].vis_noise = 0.75;
    const RunConfig back = parse_run_config(run_config_to_json(cfg));
    CHECK(config_hash(back) == config_hash(cfg));
}
