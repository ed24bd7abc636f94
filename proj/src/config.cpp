#include "selfi/config.hpp"

#include <cstdio>
#include <fstream>

#include "selfi/errors.hpp"

namespace selfi {

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
}

template <class T>
void read_into(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for \"" + std::string(key) + "\": " + e.what());
    }
}

void parse_benchmark(const json& j, BenchmarkConfig& out) {
    reject_unknown_keys(j,
                        {"seed", "d_id", "d_backbone", "n_identities", "id_within_noise",
                         "id_frame_jitter", "vis_video_scale", "group_size", "n_real_train",
                         "n_fake_train", "n_real_val", "n_fake_val", "n_real_test", "n_fake_test",
                         "methods"},
                        "benchmark");
    std::uint64_t seed = out.spec.seed;
    std::size_t d_id = out.spec.d_id;
    std::size_t d_backbone = out.spec.d_backbone;
    read_into(j, "seed", seed);
    read_into(j, "d_id", d_id);
    read_into(j, "d_backbone", d_backbone);
    if (d_id == 0 || d_backbone == 0) throw ConfigError("benchmark dims must be > 0");
    out.spec = default_benchmark(seed, d_id, d_backbone);
    read_into(j, "n_identities", out.spec.n_identities);
    read_into(j, "id_within_noise", out.spec.id_within_noise);
    read_into(j, "id_frame_jitter", out.spec.id_frame_jitter);
    read_into(j, "vis_video_scale", out.spec.vis_video_scale);
    read_into(j, "group_size", out.spec.group_size);
    read_into(j, "n_real_train", out.n_real_train);
    read_into(j, "n_fake_train", out.n_fake_train);
    read_into(j, "n_real_val", out.n_real_val);
    read_into(j, "n_fake_val", out.n_fake_val);
    read_into(j, "n_real_test", out.n_real_test);
    read_into(j, "n_fake_test", out.n_fake_test);

    if (j.contains("methods")) {
        for (const json& jm : j.at("methods")) {
            reject_unknown_keys(jm,
                                {"name", "category", "id_shift_strength", "id_noise",
                                 "vis_artifact_strength", "vis_noise"},
                                "benchmark.methods entry");
            if (!jm.contains("name")) {
                throw ConfigError("benchmark.methods entries need a \"name\"");
            }
            const std::string name = jm.at("name").get<std::string>();
            MethodSpec* target = nullptr;
            for (MethodSpec& m : out.spec.methods) {
                if (m.name == name) target = &m;
            }
            if (!target) throw ConfigError("unknown benchmark method \"" + name + "\"");
            if (jm.contains("category")) {
                target->category = category_from_string(jm.at("category").get<std::string>());
            }
            read_into(jm, "id_shift_strength", target->id_shift_strength);
            read_into(jm, "id_noise", target->id_noise);
            read_into(jm, "vis_artifact_strength", target->vis_artifact_strength);
            read_into(jm, "vis_noise", target->vis_noise);
        }
    }
}

void parse_model(const json& j, ModelConfig& out) {
    reject_unknown_keys(j, {"mode", "alpha", "beta", "d_id", "d_backbone", "h_rel"}, "model");
    if (j.contains("mode")) {
        try {
            out.mode = mode_from_string(j.at("mode").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    read_into(j, "alpha", out.alpha);
    read_into(j, "beta", out.beta);
    read_into(j, "d_id", out.dims.d_id);
    read_into(j, "d_backbone", out.dims.d_backbone);
    read_into(j, "h_rel", out.dims.h_rel);
    if (out.alpha < 0.0 || out.beta < 0.0) throw ConfigError("alpha/beta must be >= 0");
    if (out.dims.d_id == 0 || out.dims.d_backbone == 0 || out.dims.h_rel == 0) {
        throw ConfigError("model dims must be > 0");
    }
}

void parse_train(const json& j, TrainConfig& out) {
    reject_unknown_keys(j,
                        {"lr", "beta1", "beta2", "eps", "weight_decay", "batch_size", "epochs",
                         "seed", "standardize"},
                        "train");
    read_into(j, "lr", out.lr);
    read_into(j, "beta1", out.beta1);
    read_into(j, "beta2", out.beta2);
    read_into(j, "eps", out.eps);
    read_into(j, "weight_decay", out.weight_decay);
    read_into(j, "batch_size", out.batch_size);
    read_into(j, "epochs", out.epochs);
    read_into(j, "seed", out.seed);
    read_into(j, "standardize", out.standardize);
    if (!(out.lr > 0.0)) throw ConfigError("lr must be > 0");
    if (out.beta1 < 0.0 || out.beta1 >= 1.0 || out.beta2 < 0.0 || out.beta2 >= 1.0) {
        throw ConfigError("beta1/beta2 must lie in [0, 1)");
    }
    if (out.batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

}  // namespace

RunConfig default_run_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.benchmark.spec = default_benchmark(seed);
    cfg.train.seed = seed;
    cfg.train.model.dims.d_id = cfg.benchmark.spec.d_id;
    cfg.train.model.dims.d_backbone = cfg.benchmark.spec.d_backbone;
    cfg.train.model.dims.h_rel = 32;
    // Benchmark runs see only a few hundred optimizer steps; the stock
    // TrainConfig step size targets much longer schedules.
    cfg.train.lr = 0.02;
    return cfg;
}

RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    reject_unknown_keys(j, {"benchmark", "model", "train", "n_seeds"}, "run config");

    std::uint64_t base_seed = 0;
    if (j.contains("benchmark") && j.at("benchmark").contains("seed")) {
        base_seed = j.at("benchmark").at("seed").get<std::uint64_t>();
    }
    RunConfig cfg = default_run_config(base_seed);
    if (j.contains("benchmark")) parse_benchmark(j.at("benchmark"), cfg.benchmark);
    // Model widths follow the generator unless the model section overrides.
    cfg.train.model.dims.d_id = cfg.benchmark.spec.d_id;
    cfg.train.model.dims.d_backbone = cfg.benchmark.spec.d_backbone;
    if (j.contains("model")) parse_model(j.at("model"), cfg.train.model);
    if (j.contains("train")) parse_train(j.at("train"), cfg.train);
    read_into(j, "n_seeds", cfg.n_seeds);
    if (cfg.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json methods = nlohmann::json::array();
    for (const MethodSpec& m : cfg.benchmark.spec.methods) {
        methods.push_back({{"name", m.name},
                           {"category", to_string(m.category)},
                           {"id_shift_strength", m.id_shift_strength},
                           {"id_noise", m.id_noise},
                           {"vis_artifact_strength", m.vis_artifact_strength},
                           {"vis_noise", m.vis_noise}});
    }
    return nlohmann::json{
        {"benchmark",
         {{"seed", cfg.benchmark.spec.seed},
          {"d_id", cfg.benchmark.spec.d_id},
          {"d_backbone", cfg.benchmark.spec.d_backbone},
          {"n_identities", cfg.benchmark.spec.n_identities},
          {"id_within_noise", cfg.benchmark.spec.id_within_noise},
          {"id_frame_jitter", cfg.benchmark.spec.id_frame_jitter},
          {"vis_video_scale", cfg.benchmark.spec.vis_video_scale},
          {"group_size", cfg.benchmark.spec.group_size},
          {"n_real_train", cfg.benchmark.n_real_train},
          {"n_fake_train", cfg.benchmark.n_fake_train},
          {"n_real_val", cfg.benchmark.n_real_val},
          {"n_fake_val", cfg.benchmark.n_fake_val},
          {"n_real_test", cfg.benchmark.n_real_test},
          {"n_fake_test", cfg.benchmark.n_fake_test},
          {"methods", methods}}},
        {"model",
         {{"mode", to_string(cfg.train.model.mode)},
          {"alpha", cfg.train.model.alpha},
          {"beta", cfg.train.model.beta},
          {"d_id", cfg.train.model.dims.d_id},
          {"d_backbone", cfg.train.model.dims.d_backbone},
          {"h_rel", cfg.train.model.dims.h_rel}}},
        {"train",
         {{"lr", cfg.train.lr},
          {"beta1", cfg.train.beta1},
          {"beta2", cfg.train.beta2},
          {"eps", cfg.train.eps},
          {"weight_decay", cfg.train.weight_decay},
          {"batch_size", cfg.train.batch_size},
          {"epochs", cfg.train.epochs},
          {"seed", cfg.train.seed},
          {"standardize", cfg.train.standardize}}},
        {"n_seeds", cfg.n_seeds},
    };
}

std::string config_hash(const RunConfig& cfg) {
    const std::string dump = run_config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace selfi
