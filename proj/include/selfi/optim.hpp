#pragma once

#include <cstdint>
#include <vector>

#include "selfi/dataio.hpp"
#include "selfi/model.hpp"

namespace selfi {

/// AdamW accumulators; shapes mirror the trainable tensors.
struct OptimState {
    TensorBundle m;
    TensorBundle v;
    std::uint64_t t = 0;
};

OptimState init_optim_state(const SelfiParams& p);

struct TrainConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-4;
    std::size_t batch_size = 64;
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
    bool standardize = false;  // opt-in train-split feature standardization
    ModelConfig model;
};

/// One decoupled-weight-decay Adam update, in place:
///   t += 1; m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2;
///   theta -= lr * (mhat / (sqrt(vhat) + eps) + weight_decay * theta)
/// Decay applies to weights and biases alike.
void adamw_step(SelfiParams& p, const Grads& g, OptimState& st, const TrainConfig& tc);

struct EpochStats {
    double train_loss = 0.0;  // mean of mini-batch mean losses
    double train_acc = 0.0;
    double val_auc = 0.0;
};

struct Checkpoint {
    SelfiParams params;
    TrainConfig config;  // echo, includes the ModelConfig
    double best_val_auc = 0.0;
    std::size_t epoch_of_best = 0;  // 1-based; 0 means "initialization" (epochs == 0)
    std::vector<EpochStats> history;
};

/// Mini-batch training with a seeded per-epoch shuffle and best-on-validation
/// selection (frame-level AUC). Deterministic given (data, tc). Throws
/// DataError on an empty train set or a single-class validation set.
Checkpoint train(const EmbeddingDataset& train_set, const EmbeddingDataset& val_set,
                 const TrainConfig& tc);

/// Fake-class scores of every sample under p.
std::vector<double> score_dataset(const SelfiParams& p, const EmbeddingDataset& ds,
                                  const ModelConfig& cfg);

}  // namespace selfi
