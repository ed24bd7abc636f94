#include "selfi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "selfi/errors.hpp"
#include "selfi/rng.hpp"

namespace selfi {

std::vector<MethodSplits> build_method_splits(const BenchmarkConfig& cfg) {
    const EmbeddingDataset train =
        sample_dataset(cfg.spec, cfg.n_real_train, cfg.n_fake_train, Split::train);
    const EmbeddingDataset val =
        sample_dataset(cfg.spec, cfg.n_real_val, cfg.n_fake_val, Split::val);
    const EmbeddingDataset test =
        sample_dataset(cfg.spec, cfg.n_real_test, cfg.n_fake_test, Split::test);

    std::vector<MethodSplits> out;
    for (const MethodSpec& m : cfg.spec.methods) {
        MethodSplits splits;
        splits.name = m.name;
        splits.tag = m.tag;
        splits.train = subset_by_method(train, m.tag);
        splits.val = subset_by_method(val, m.tag);
        splits.test = subset_by_method(test, m.tag);
        out.push_back(std::move(splits));
    }
    return out;
}

EmbeddingDataset mixed_split(const std::vector<MethodSplits>& methods, Split which) {
    std::vector<const EmbeddingDataset*> parts;
    for (const MethodSplits& m : methods) {
        switch (which) {
            case Split::train: parts.push_back(&m.train); break;
            case Split::val: parts.push_back(&m.val); break;
            case Split::test: parts.push_back(&m.test); break;
        }
    }
    return concat_datasets(parts);
}

EvalResult evaluate_dataset(const SelfiParams& params, const ModelConfig& cfg,
                            const EmbeddingDataset& ds,
                            const std::map<std::uint8_t, std::string>& method_names) {
    if (ds.empty()) throw DataError("evaluate_dataset: empty dataset");
    EvalResult result;
    result.scores.reserve(ds.size());

    const bool gated = mode_has_relevance(cfg.mode);
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
        double add(double v) {
            sum += v;
            ++n;
            return v;
        }
        double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
    };
    std::map<std::string, Acc> rho_all, rho_real, rho_fake;
    Acc rho_label_real, rho_label_fake;

    ScoredSet scored;
    scored.has_groups = ds.has_groups;
    for (const Sample& s : ds.samples) {
        const ForwardTrace t = forward_any(params, s, cfg);
        const double score = t.fake_score();
        result.scores.push_back(score);
        scored.scores.push_back(score);
        scored.labels.push_back(s.y);
        if (ds.has_groups) scored.groups.push_back(s.group);
        if (gated) {
            const double rho = *t.rho;
            auto it = method_names.find(s.method);
            const std::string name =
                it != method_names.end() ? it->second : "method_" + std::to_string(s.method);
            rho_all[name].add(rho);
            (s.y == 1 ? rho_fake[name] : rho_real[name]).add(rho);
            (s.y == 1 ? rho_label_fake : rho_label_real).add(rho);
        }
    }

    result.frame_auc = roc_auc(scored);
    result.acc = accuracy(scored);
    if (ds.has_groups) result.video_auc = video_auc(scored);
    if (gated) {
        for (const auto& [name, acc] : rho_all) {
            RhoStats stats;
            stats.all = acc.mean();
            stats.real = rho_real[name].mean();
            stats.fake = rho_fake[name].mean();
            stats.n_all = acc.n;
            stats.n_real = rho_real[name].n;
            stats.n_fake = rho_fake[name].n;
            result.rho_by_method[name] = stats;
        }
        result.rho_by_label["real"] = rho_label_real.mean();
        result.rho_by_label["fake"] = rho_label_fake.mean();
    }
    return result;
}

GridResult run_grid(const RunConfig& cfg, std::size_t threads) {
    const std::vector<MethodSplits> splits = build_method_splits(cfg.benchmark);
    if (splits.size() < 1) throw DataError("run_grid: no methods");
    return cross_grid(splits, cfg.train, threads);
}

namespace {

// Standardization (when enabled) is fitted on the training split only and
// applied to every split seen by that model.
struct PreparedData {
    EmbeddingDataset train, val, test;
};

PreparedData prepare(EmbeddingDataset train, EmbeddingDataset val, EmbeddingDataset test,
                     bool standardize) {
    PreparedData out{std::move(train), std::move(val), std::move(test)};
    if (standardize) {
        const StandardizerStats stats = fit_standardizer(out.train);
        out.train = apply_standardizer(stats, out.train);
        out.val = apply_standardizer(stats, out.val);
        out.test = apply_standardizer(stats, out.test);
    }
    return out;
}

}  // namespace

AblationResult run_ablation(const RunConfig& cfg, AuxSource aux, std::size_t threads) {
    AblationResult result;
    result.modes = {Mode::baseline_visual, Mode::faia_concat, Mode::faia_iafm, Mode::full_selfi};

    if (cfg.benchmark.spec.methods.size() < 2) {
        throw DataError("run_ablation: need >= 2 methods");
    }

    // Per-replication data: each seed re-derives the benchmark geometry and
    // sampling streams so the medians cover data noise too. Config strength
    // overrides apply to the training methods; unseen methods always come
    // from the derived defaults.
    struct SeedData {
        EmbeddingDataset train, val;               // mixed over training methods
        std::vector<EmbeddingDataset> unseen_test; // one per unseen method
    };
    std::vector<SeedData> data_by_seed;
    for (std::size_t k = 0; k < cfg.n_seeds; ++k) {
        const std::uint64_t bench_seed = derive_seed(cfg.benchmark.spec.seed, k, 0xbe);
        BenchmarkConfig bench = cfg.benchmark;
        const BenchmarkSpec fresh =
            default_benchmark(bench_seed, bench.spec.d_id, bench.spec.d_backbone);
        bench.spec.seed = bench_seed;
        for (std::size_t m = 0; m < bench.spec.methods.size(); ++m) {
            bench.spec.methods[m].id_shift_dir = fresh.methods[m].id_shift_dir;
            bench.spec.methods[m].vis_artifact_dir = fresh.methods[m].vis_artifact_dir;
        }
        bench.spec.unseen_methods = fresh.unseen_methods;

        SeedData data;
        const std::vector<MethodSplits> splits = build_method_splits(bench);
        data.train = mixed_split(splits, Split::train);
        data.val = mixed_split(splits, Split::val);

        BenchmarkConfig unseen = bench;
        unseen.spec = unseen_view(bench.spec);
        const EmbeddingDataset unseen_test = sample_dataset(
            unseen.spec, unseen.n_real_test, unseen.n_fake_test, Split::test);
        for (const MethodSpec& m : unseen.spec.methods) {
            data.unseen_test.push_back(subset_by_method(unseen_test, m.tag));
            if (k == 0) result.test_methods.push_back(m.name);
        }

        if (aux != AuxSource::identity) {
            const std::uint64_t swap_seed = derive_seed(bench_seed, 0x5a);
            data.train = aux_source_swap(data.train, aux, swap_seed);
            data.val = aux_source_swap(data.val, aux, derive_seed(swap_seed, 1));
            for (std::size_t m = 0; m < data.unseen_test.size(); ++m) {
                data.unseen_test[m] =
                    aux_source_swap(data.unseen_test[m], aux, derive_seed(swap_seed, 2 + m));
            }
        }
        data_by_seed.push_back(std::move(data));
        result.seeds.push_back(derive_seed(cfg.train.seed, k, 0x7a));
    }

    const std::size_t n_test = result.test_methods.size();
    result.auc.assign(cfg.n_seeds, std::vector<std::vector<double>>(
                                       result.modes.size(), std::vector<double>(n_test, 0.0)));
    result.cross_mean.assign(cfg.n_seeds, std::vector<double>(result.modes.size(), 0.0));

    struct Cell {
        std::size_t seed_idx, mode_idx;
    };
    std::vector<Cell> cells;
    for (std::size_t k = 0; k < cfg.n_seeds; ++k) {
        for (std::size_t mi = 0; mi < result.modes.size(); ++mi) cells.push_back({k, mi});
    }

    const auto run_cell = [&](const Cell& cell) {
        const SeedData& data = data_by_seed[cell.seed_idx];
        PreparedData prepared =
            prepare(data.train, data.val, EmbeddingDataset{}, cfg.train.standardize);

        TrainConfig tc = cfg.train;
        tc.model.mode = result.modes[cell.mode_idx];
        tc.seed = result.seeds[cell.seed_idx];  // modes share seeds
        const Checkpoint ck = train(prepared.train, prepared.val, tc);

        for (std::size_t m = 0; m < n_test; ++m) {
            EmbeddingDataset test = data.unseen_test[m];
            if (cfg.train.standardize) {
                test = apply_standardizer(fit_standardizer(data.train), test);
            }
            ScoredSet scored;
            scored.scores = score_dataset(ck.params, test, tc.model);
            for (const Sample& s : test.samples) scored.labels.push_back(s.y);
            result.auc[cell.seed_idx][cell.mode_idx][m] = roc_auc(scored);
        }
    };

    if (threads <= 1) {
        for (const Cell& c : cells) run_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        const std::size_t workers = std::min(threads, cells.size());
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next.fetch_add(1); i < cells.size();
                         i = next.fetch_add(1)) {
                        run_cell(cells[i]);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    for (std::size_t k = 0; k < cfg.n_seeds; ++k) {
        for (std::size_t mi = 0; mi < result.modes.size(); ++mi) {
            double sum = 0.0;
            for (double v : result.auc[k][mi]) sum += v;
            result.cross_mean[k][mi] = sum / static_cast<double>(n_test);
        }
    }
    return result;
}

MixedRun run_mixed(const RunConfig& cfg, std::uint64_t seed_override) {
    const std::vector<MethodSplits> splits = build_method_splits(cfg.benchmark);
    const PreparedData data =
        prepare(mixed_split(splits, Split::train), mixed_split(splits, Split::val),
                mixed_split(splits, Split::test), cfg.train.standardize);

    TrainConfig tc = cfg.train;
    tc.seed = seed_override;

    std::map<std::uint8_t, std::string> names;
    for (const MethodSpec& m : cfg.benchmark.spec.methods) names[m.tag] = m.name;

    MixedRun run{train(data.train, data.val, tc), {}};
    run.eval = evaluate_dataset(run.checkpoint.params, tc.model, data.test, names);
    return run;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::map<std::string, RhoStats> rho_by_category(
    const EvalResult& eval, const std::map<std::string, std::string>& method_to_category) {
    std::map<std::string, RhoStats> out;
    for (const auto& [method, stats] : eval.rho_by_method) {
        const auto it = method_to_category.find(method);
        if (it == method_to_category.end()) continue;
        RhoStats& acc = out[it->second];
        acc.all = (acc.all * static_cast<double>(acc.n_all) +
                   stats.all * static_cast<double>(stats.n_all)) /
                  static_cast<double>(acc.n_all + stats.n_all);
        acc.n_all += stats.n_all;
        if (acc.n_real + stats.n_real > 0) {
            acc.real = (acc.real * static_cast<double>(acc.n_real) +
                        stats.real * static_cast<double>(stats.n_real)) /
                       static_cast<double>(acc.n_real + stats.n_real);
        }
        acc.n_real += stats.n_real;
        if (acc.n_fake + stats.n_fake > 0) {
            acc.fake = (acc.fake * static_cast<double>(acc.n_fake) +
                        stats.fake * static_cast<double>(stats.n_fake)) /
                       static_cast<double>(acc.n_fake + stats.n_fake);
        }
        acc.n_fake += stats.n_fake;
    }
    return out;
}

nlohmann::json eval_to_json(const EvalResult& eval, const ModelConfig& cfg) {
    nlohmann::json j;
    j["frame_auc"] = eval.frame_auc;
    j["accuracy"] = eval.acc;
    if (eval.video_auc) j["video_auc"] = *eval.video_auc;
    if (mode_has_relevance(cfg.mode)) {
        nlohmann::json by_method;
        for (const auto& [name, stats] : eval.rho_by_method) {
            by_method[name] = {{"all", stats.all}, {"real", stats.real}, {"fake", stats.fake}};
        }
        j["mean_rho"] = {{"by_method", by_method}, {"by_label", eval.rho_by_label}};
    }
    return j;
}

}  // namespace selfi
