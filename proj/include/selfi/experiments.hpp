#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfi/config.hpp"
#include "selfi/metrics.hpp"
#include "selfi/optim.hpp"
#include "selfi/synthdata.hpp"

namespace selfi {

/// In-memory generation of every method's train/val/test split.
std::vector<MethodSplits> build_method_splits(const BenchmarkConfig& cfg);

/// Concatenation of one split across methods (group ids kept distinct).
EmbeddingDataset mixed_split(const std::vector<MethodSplits>& methods, Split which);

/// Per-method rho means, split by label.
struct RhoStats {
    double all = 0.0;
    double real = 0.0;
    double fake = 0.0;
    std::size_t n_all = 0;
    std::size_t n_real = 0;
    std::size_t n_fake = 0;
};

/// Evaluation of one parameter set on one dataset.
struct EvalResult {
    double frame_auc = 0.0;
    double acc = 0.0;
    std::optional<double> video_auc;
    std::map<std::string, RhoStats> rho_by_method;  // only for gated modes
    std::map<std::string, double> rho_by_label;     // "real" / "fake"
    std::vector<double> scores;                     // per sample, dataset order
};

EvalResult evaluate_dataset(const SelfiParams& params, const ModelConfig& cfg,
                            const EmbeddingDataset& ds,
                            const std::map<std::uint8_t, std::string>& method_names);

/// Grid over the config's benchmark: one training per method (cross_grid).
GridResult run_grid(const RunConfig& cfg, std::size_t threads = 1);

/// Generalization ablation over the four trainable fusion modes: every mode
/// trains on the mixed (all-methods) train split with shared seeds, then
/// scores the test split of each unseen method. "Cross-method AUC" is the
/// mean over those never-seen methods.
struct AblationResult {
    std::vector<Mode> modes;
    std::vector<std::string> test_methods;  // unseen, test-only
    std::vector<std::uint64_t> seeds;
    // auc[seed][mode][test_method]
    std::vector<std::vector<std::vector<double>>> auc;
    // cross_mean[seed][mode]: mean over test methods
    std::vector<std::vector<double>> cross_mean;
};

AblationResult run_ablation(const RunConfig& cfg, AuxSource aux, std::size_t threads = 1);

/// Train one model on the mixed (all-methods) train split and evaluate on
/// the mixed test split; the vehicle for gate-behavior runs.
struct MixedRun {
    Checkpoint checkpoint;
    EvalResult eval;
};

MixedRun run_mixed(const RunConfig& cfg, std::uint64_t seed_override);

double median(std::vector<double> values);

nlohmann::json eval_to_json(const EvalResult& eval, const ModelConfig& cfg);

/// Count-weighted rho rollup from methods to their behavior categories.
std::map<std::string, RhoStats> rho_by_category(
    const EvalResult& eval, const std::map<std::string, std::string>& method_to_category);

}  // namespace selfi
