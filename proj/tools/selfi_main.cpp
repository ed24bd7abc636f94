#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfi/config.hpp"
#include "selfi/dataio.hpp"
#include "selfi/errors.hpp"
#include "selfi/experiments.hpp"
#include "selfi/grad.hpp"
#include "selfi/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace selfi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;
constexpr int kExitCheckFailure = 4;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::size_t threads = 0;  // 0: resolve from SELFI_THREADS, else 1
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration");
    cmd->add_option("--seed", opts.seed, "Override the configured seeds");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--threads", opts.threads, "Worker threads (default: SELFI_THREADS or 1)");
}

std::size_t resolve_threads(std::size_t flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("SELFI_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty()
                        ? default_run_config(opts.seed.value_or(0))
                        : load_run_config(opts.config_path);
    if (opts.seed) {
        // One flag pins both the generator and the training streams.
        const std::uint64_t s = *opts.seed;
        const BenchmarkSpec old = cfg.benchmark.spec;
        cfg.benchmark.spec = default_benchmark(s, old.d_id, old.d_backbone);
        cfg.benchmark.spec.n_identities = old.n_identities;
        cfg.benchmark.spec.id_within_noise = old.id_within_noise;
        cfg.benchmark.spec.id_frame_jitter = old.id_frame_jitter;
        cfg.benchmark.spec.vis_video_scale = old.vis_video_scale;
        cfg.benchmark.spec.group_size = old.group_size;
        for (std::size_t m = 0; m < old.methods.size(); ++m) {
            MethodSpec& dst = cfg.benchmark.spec.methods[m];
            const MethodSpec& src = old.methods[m];
            dst.category = src.category;
            dst.id_shift_strength = src.id_shift_strength;
            dst.id_noise = src.id_noise;
            dst.vis_artifact_strength = src.vis_artifact_strength;
            dst.vis_noise = src.vis_noise;
        }
        cfg.train.seed = s;
    }
    return cfg;
}

std::map<std::uint8_t, std::string> method_names(const BenchmarkSpec& spec) {
    std::map<std::uint8_t, std::string> names;
    for (const MethodSpec& m : spec.methods) names[m.tag] = m.name;
    return names;
}

struct WallClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    // Timing goes to stderr only: report files must be byte-reproducible.
    ~WallClock() {
        const auto elapsed = std::chrono::steady_clock::now() - start;
        std::cerr << "wall-clock: "
                  << std::chrono::duration<double>(elapsed).count() << " s\n";
    }
};

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const CommonOpts& opts) {
    WallClock clock;
    const RunConfig cfg = resolve_config(opts);
    const BenchmarkConfig& bench = cfg.benchmark;

    const auto degenerate = [](std::size_t n_real, std::size_t n_fake) {
        return n_real == 0 || n_fake == 0;
    };
    if (degenerate(bench.n_real_train, bench.n_fake_train) ||
        degenerate(bench.n_real_val, bench.n_fake_val) ||
        degenerate(bench.n_real_test, bench.n_fake_test)) {
        std::cerr << "warning: AUC-incompatible split (a split would hold a single class)\n";
        throw DataError("synth: refusing to generate single-class splits");
    }

    fs::create_directories(opts.out_dir);
    const struct {
        Split split;
        std::size_t n_real, n_fake;
    } splits[] = {
        {Split::train, bench.n_real_train, bench.n_fake_train},
        {Split::val, bench.n_real_val, bench.n_fake_val},
        {Split::test, bench.n_real_test, bench.n_fake_test},
    };

    for (const auto& sp : splits) {
        const EmbeddingDataset all = sample_dataset(bench.spec, sp.n_real, sp.n_fake, sp.split);
        for (const MethodSpec& m : bench.spec.methods) {
            const EmbeddingDataset subset = subset_by_method(all, m.tag);
            const fs::path path =
                fs::path(opts.out_dir) / (m.name + "_" + to_string(sp.split) + ".semb");
            write_dataset(subset, path);
            std::cout << path.string() << ": " << subset.size() << " samples (" << sp.n_real
                      << " real, " << sp.n_fake << " fake)\n";
        }
    }
    std::cout << "config hash: " << config_hash(cfg) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct LoadedData {
    EmbeddingDataset train, val, test;
};

LoadedData load_method_data(const std::string& data_dir, const std::string& method,
                            const BenchmarkSpec& spec, bool with_test = true) {
    const auto load_split = [&](const char* split) {
        if (method == "all") {
            std::vector<EmbeddingDataset> parts;
            for (const MethodSpec& m : spec.methods) {
                parts.push_back(read_dataset(fs::path(data_dir) /
                                             (m.name + "_" + split + ".semb")));
            }
            std::vector<const EmbeddingDataset*> ptrs;
            for (const EmbeddingDataset& p : parts) ptrs.push_back(&p);
            return concat_datasets(ptrs);
        }
        return read_dataset(fs::path(data_dir) / (method + "_" + split + ".semb"));
    };
    LoadedData data;
    data.train = load_split("train");
    data.val = load_split("val");
    if (with_test) data.test = load_split("test");
    return data;
}

int cmd_train(const CommonOpts& opts, const std::string& data_dir, const std::string& method) {
    WallClock clock;
    RunConfig cfg = resolve_config(opts);

    LoadedData data = load_method_data(data_dir, method, cfg.benchmark.spec, false);
    if (cfg.train.standardize) {
        const StandardizerStats stats = fit_standardizer(data.train);
        data.train = apply_standardizer(stats, data.train);
        data.val = apply_standardizer(stats, data.val);
    }

    const Checkpoint ck = train(data.train, data.val, cfg.train);

    fs::create_directories(opts.out_dir);
    const fs::path ckpt_path = fs::path(opts.out_dir) / "checkpoint.sckpt";
    write_checkpoint(ck, ckpt_path);
    write_text_file(fs::path(opts.out_dir) / "history.csv", history_to_csv(ck.history));

    std::cout << "trained " << to_string(cfg.train.model.mode) << " on " << method << ": best val AUC "
              << format_double(ck.best_val_auc) << " at epoch " << ck.epoch_of_best << "\n"
              << "checkpoint: " << ckpt_path.string() << "\n"
              << "config hash: " << config_hash(cfg) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const CommonOpts& opts, const std::string& ckpt_path, const std::string& data_dir,
             const std::string& method, const std::string& split) {
    WallClock clock;
    const RunConfig cfg = resolve_config(opts);
    const Checkpoint ck = read_checkpoint(ckpt_path);

    EmbeddingDataset ds;
    if (method == "all") {
        LoadedData data = load_method_data(data_dir, method, cfg.benchmark.spec);
        ds = split == "train" ? data.train : split == "val" ? data.val : data.test;
    } else {
        ds = read_dataset(fs::path(data_dir) / (method + "_" + split + ".semb"));
    }
    if (ds.d_id != ck.config.model.dims.d_id ||
        ds.d_backbone != ck.config.model.dims.d_backbone) {
        throw DataError("eval: checkpoint dims (" + std::to_string(ck.config.model.dims.d_id) +
                        ", " + std::to_string(ck.config.model.dims.d_backbone) +
                        ") do not match dataset dims (" + std::to_string(ds.d_id) + ", " +
                        std::to_string(ds.d_backbone) + ")");
    }
    if (ck.config.standardize) {
        // Stats are refit on the matching train split; fitting is
        // deterministic, so this reproduces the training-time transform.
        LoadedData data = load_method_data(data_dir, method, cfg.benchmark.spec, false);
        ds = apply_standardizer(fit_standardizer(data.train), ds);
    }

    const EvalResult eval =
        evaluate_dataset(ck.params, ck.config.model, ds, method_names(cfg.benchmark.spec));

    json report = eval_to_json(eval, ck.config.model);
    if (mode_has_relevance(ck.config.model.mode)) {
        std::map<std::string, std::string> categories;
        for (const MethodSpec& m : cfg.benchmark.spec.methods) {
            categories[m.name] = to_string(m.category);
        }
        json by_category;
        for (const auto& [cat, stats] : rho_by_category(eval, categories)) {
            by_category[cat] = {{"all", stats.all}, {"real", stats.real}, {"fake", stats.fake}};
        }
        report["mean_rho"]["by_category"] = by_category;
    }
    report["config_hash"] = config_hash(cfg);
    report["seeds"] = {ck.config.seed};
    report["n_samples"] = ds.size();
    report["method"] = method;
    report["split"] = split;

    fs::create_directories(opts.out_dir);
    write_text_file(fs::path(opts.out_dir) / "report.json", report.dump(2) + "\n");

    std::string csv = "metric,value\nframe_auc," + format_double(eval.frame_auc) +
                      "\naccuracy," + format_double(eval.acc) + "\n";
    if (eval.video_auc) csv += "video_auc," + format_double(*eval.video_auc) + "\n";
    write_text_file(fs::path(opts.out_dir) / "report.csv", csv);

    std::string scores = "index,method,label,group,score\n";
    const auto names = method_names(cfg.benchmark.spec);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const Sample& s = ds.samples[i];
        const auto it = names.find(s.method);
        scores += std::to_string(i) + "," +
                  (it != names.end() ? it->second : std::to_string(s.method)) + "," +
                  std::to_string(s.y) + "," + std::to_string(s.group) + "," +
                  format_double(eval.scores[i]) + "\n";
    }
    write_text_file(fs::path(opts.out_dir) / "scores.csv", scores);

    std::cout << "frame AUC " << format_double(eval.frame_auc) << ", accuracy "
              << format_double(eval.acc);
    if (eval.video_auc) std::cout << ", video AUC " << format_double(*eval.video_auc);
    std::cout << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

int cmd_grid(const CommonOpts& opts, bool svg) {
    WallClock clock;
    const RunConfig cfg = resolve_config(opts);
    if (cfg.benchmark.spec.methods.size() < 2) {
        throw ConfigError("grid: need at least 2 methods");
    }
    const GridResult grid = run_grid(cfg, resolve_threads(opts.threads));

    fs::create_directories(opts.out_dir);
    write_text_file(fs::path(opts.out_dir) / "grid.csv", grid_to_csv(grid));
    if (svg) write_text_file(fs::path(opts.out_dir) / "grid.svg", grid_to_svg(grid));

    std::cout << grid_to_csv(grid) << "config hash: " << config_hash(cfg) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

int cmd_ablate(const CommonOpts& opts, const std::string& aux_source) {
    WallClock clock;
    const RunConfig cfg = resolve_config(opts);
    AuxSource aux = AuxSource::identity;
    try {
        aux = aux_source_from_string(aux_source);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const AblationResult result = run_ablation(cfg, aux, resolve_threads(opts.threads));

    std::string csv = "seed,mode";
    for (const std::string& name : result.test_methods) csv += ",auc_" + name;
    csv += ",cross_mean\n";
    for (std::size_t k = 0; k < result.seeds.size(); ++k) {
        for (std::size_t mi = 0; mi < result.modes.size(); ++mi) {
            csv += std::to_string(result.seeds[k]) + "," + to_string(result.modes[mi]);
            for (double v : result.auc[k][mi]) csv += "," + format_double(v);
            csv += "," + format_double(result.cross_mean[k][mi]) + "\n";
        }
    }

    json medians;
    for (std::size_t mi = 0; mi < result.modes.size(); ++mi) {
        std::vector<double> per_seed;
        for (std::size_t k = 0; k < result.seeds.size(); ++k) {
            per_seed.push_back(result.cross_mean[k][mi]);
        }
        medians[to_string(result.modes[mi])] = median(per_seed);
    }
    json report{{"aux_source", to_string(aux)},
                {"config_hash", config_hash(cfg)},
                {"seeds", result.seeds},
                {"cross_mean_median", medians}};

    fs::create_directories(opts.out_dir);
    write_text_file(fs::path(opts.out_dir) / "ablate.csv", csv);
    write_text_file(fs::path(opts.out_dir) / "ablate.json", report.dump(2) + "\n");

    std::cout << csv << "medians: " << medians.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

int cmd_gradcheck(std::size_t d_id, std::size_t d_backbone, std::size_t h_rel,
                  std::size_t n_seeds, std::size_t n_samples, double tolerance) {
    WallClock clock;
    const Mode modes[] = {Mode::baseline_visual, Mode::identity_probe, Mode::faia_concat,
                          Mode::faia_iafm, Mode::full_selfi};
    bool all_pass = true;
    std::printf("%-16s %-6s %-6s %-14s %s\n", "mode", "seed", "check", "max_rel_err",
                "worst");
    for (const Mode mode : modes) {
        for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
            ModelConfig mc;
            mc.mode = mode;
            mc.dims = {d_id, d_backbone, h_rel};
            const GradCheckReport r = grad_check(mc, seed, tolerance, n_samples);
            all_pass = all_pass && r.pass;
            std::printf("%-16s %-6llu %-6s %-14.3e %s[%zu]\n", to_string(mode).c_str(),
                        static_cast<unsigned long long>(seed), r.pass ? "PASS" : "FAIL",
                        r.max_rel_err, r.worst_tensor.c_str(), r.worst_index);
        }
    }
    std::printf("%s\n", all_pass ? "gradcheck: all PASS" : "gradcheck: FAIL");
    return all_pass ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selective identity fusion for deepfake detection: synthetic benchmark, "
                 "training, and evaluation"};
    app.require_subcommand(1);

    CommonOpts synth_opts, train_opts, eval_opts, grid_opts, ablate_opts;

    CLI::App* synth = app.add_subcommand("synth", "Generate benchmark embedding datasets");
    add_common(synth, synth_opts);

    CLI::App* train_cmd = app.add_subcommand("train", "Train one model on dataset files");
    add_common(train_cmd, train_opts);
    std::string train_data = ".", train_method = "all";
    train_cmd->add_option("--data", train_data, "Directory holding <method>_<split>.semb files");
    train_cmd->add_option("--method", train_method, "Method name or 'all'");

    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    add_common(eval_cmd, eval_opts);
    std::string eval_ckpt, eval_data = ".", eval_method = "all", eval_split = "test";
    eval_cmd->add_option("--ckpt", eval_ckpt, "Checkpoint file")->required();
    eval_cmd->add_option("--data", eval_data, "Directory holding <method>_<split>.semb files");
    eval_cmd->add_option("--method", eval_method, "Method name or 'all'");
    eval_cmd->add_option("--split", eval_split, "train, val or test");

    CLI::App* grid = app.add_subcommand("grid", "Cross-manipulation AUC grid");
    add_common(grid, grid_opts);
    bool grid_svg = false;
    grid->add_flag("--svg", grid_svg, "Also write an SVG heatmap");

    CLI::App* ablate =
        app.add_subcommand("ablate", "Fusion-mode ablation scored on unseen methods");
    add_common(ablate, ablate_opts);
    std::string aux_source = "identity";
    ablate->add_option("--aux-source", aux_source, "identity, random or shuffled");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference check");
    std::size_t gc_d_id = 8, gc_d_backbone = 12, gc_h_rel = 4, gc_seeds = 5, gc_samples = 3;
    double gc_tolerance = 1e-5;
    gradcheck->add_option("--d-id", gc_d_id, "Identity width");
    gradcheck->add_option("--d-backbone", gc_d_backbone, "Visual width");
    gradcheck->add_option("--h-rel", gc_h_rel, "Relevance hidden width");
    gradcheck->add_option("--seeds", gc_seeds, "Seed count");
    gradcheck->add_option("--samples", gc_samples, "Samples per seed");
    gradcheck->add_option("--tolerance", gc_tolerance, "Max relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_opts);
        if (train_cmd->parsed()) return cmd_train(train_opts, train_data, train_method);
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_opts, eval_ckpt, eval_data, eval_method, eval_split);
        }
        if (grid->parsed()) return cmd_grid(grid_opts, grid_svg);
        if (ablate->parsed()) return cmd_ablate(ablate_opts, aux_source);
        if (gradcheck->parsed()) {
            return cmd_gradcheck(gc_d_id, gc_d_backbone, gc_h_rel, gc_seeds, gc_samples,
                                 gc_tolerance);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
