#include "selfi/optim.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "selfi/errors.hpp"
#include "selfi/grad.hpp"
#include "selfi/metrics.hpp"
#include "selfi/rng.hpp"

namespace selfi {

OptimState init_optim_state(const SelfiParams& p) {
    OptimState st;
    st.m = zero_like(p);
    st.v = zero_like(p);
    st.t = 0;
    return st;
}

void adamw_step(SelfiParams& p, const Grads& g, OptimState& st, const TrainConfig& tc) {
    st.t += 1;
    const double bc1 = 1.0 - std::pow(tc.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(tc.beta2, static_cast<double>(st.t));

    std::vector<std::vector<double>*> thetas, ms, vs;
    std::vector<const std::vector<double>*> grads;
    visit_tensors(p, [&](const char*, std::vector<double>& d, std::size_t, std::size_t) {
        thetas.push_back(&d);
    });
    visit_tensors(g, [&](const char*, const std::vector<double>& d, std::size_t, std::size_t) {
        grads.push_back(&d);
    });
    visit_tensors(st.m, [&](const char*, std::vector<double>& d, std::size_t, std::size_t) {
        ms.push_back(&d);
    });
    visit_tensors(st.v, [&](const char*, std::vector<double>& d, std::size_t, std::size_t) {
        vs.push_back(&d);
    });
    if (thetas.size() != grads.size()) {
        throw std::invalid_argument("adamw_step: gradient tensors do not match parameters");
    }

    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        std::vector<double>& theta = *thetas[ti];
        const std::vector<double>& grad = *grads[ti];
        std::vector<double>& m = *ms[ti];
        std::vector<double>& v = *vs[ti];
        if (theta.size() != grad.size()) {
            throw std::invalid_argument("adamw_step: gradient shape mismatch");
        }
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = tc.beta1 * m[i] + (1.0 - tc.beta1) * grad[i];
            v[i] = tc.beta2 * v[i] + (1.0 - tc.beta2) * grad[i] * grad[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= tc.lr * (mhat / (std::sqrt(vhat) + tc.eps) + tc.weight_decay * theta[i]);
        }
    }
}

std::vector<double> score_dataset(const SelfiParams& p, const EmbeddingDataset& ds,
                                  const ModelConfig& cfg) {
    std::vector<double> scores;
    scores.reserve(ds.size());
    for (const Sample& s : ds.samples) {
        scores.push_back(forward_any(p, s, cfg).fake_score());
    }
    return scores;
}

namespace {

double val_frame_auc(const SelfiParams& p, const EmbeddingDataset& val,
                     const ModelConfig& cfg) {
    ScoredSet scored;
    scored.scores = score_dataset(p, val, cfg);
    scored.labels.reserve(val.size());
    for (const Sample& s : val.samples) scored.labels.push_back(s.y);
    return roc_auc(scored);
}

void add_scaled(Grads& acc, const Grads& g, double scale) {
    std::vector<std::vector<double>*> a;
    std::vector<const std::vector<double>*> b;
    visit_tensors(acc, [&](const char*, std::vector<double>& d, std::size_t, std::size_t) {
        a.push_back(&d);
    });
    visit_tensors(g, [&](const char*, const std::vector<double>& d, std::size_t, std::size_t) {
        b.push_back(&d);
    });
    for (std::size_t ti = 0; ti < a.size(); ++ti) {
        for (std::size_t i = 0; i < a[ti]->size(); ++i) (*a[ti])[i] += scale * (*b[ti])[i];
    }
}

}  // namespace

Checkpoint train(const EmbeddingDataset& train_set, const EmbeddingDataset& val_set,
                 const TrainConfig& tc) {
    if (train_set.empty()) throw DataError("train: empty training set");
    if (val_set.empty()) throw DataError("train: empty validation set");
    const ModelConfig& mc = tc.model;
    if (train_set.d_id != mc.dims.d_id || train_set.d_backbone != mc.dims.d_backbone) {
        throw DataError("train: dataset dims (" + std::to_string(train_set.d_id) + ", " +
                        std::to_string(train_set.d_backbone) + ") do not match model dims (" +
                        std::to_string(mc.dims.d_id) + ", " + std::to_string(mc.dims.d_backbone) +
                        ")");
    }
    bool has_pos = false, has_neg = false;
    for (const Sample& s : val_set.samples) (s.y == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        throw DataError("train: validation set has a single class; AUC is undefined");
    }

    Checkpoint ck;
    ck.config = tc;
    ck.params = init_params(mc, tc.seed);

    SelfiParams best = ck.params;
    double best_auc = -1.0;
    std::size_t best_epoch = 0;

    if (tc.epochs == 0) {
        ck.best_val_auc = val_frame_auc(ck.params, val_set, mc);
        ck.epoch_of_best = 0;
        return ck;
    }

    OptimState st = init_optim_state(ck.params);
    Rng shuffle_rng(derive_seed(tc.seed, 0x5f1e));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t batch_count = 0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            const std::size_t end = std::min(order.size(), start + tc.batch_size);
            const double inv_n = 1.0 / static_cast<double>(end - start);

            Grads acc = zero_like(ck.params);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const Sample& s = train_set.samples[order[k]];
                const ForwardTrace t = forward_any(ck.params, s, mc);
                batch_loss += t.l_total;
                const int pred = t.fake_score() >= 0.5 ? 1 : 0;
                if (pred == s.y) ++correct;
                add_scaled(acc, backward(t, ck.params, s, mc), inv_n);
            }
            adamw_step(ck.params, acc, st, tc);
            loss_sum += batch_loss * inv_n;
            ++batch_count;
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(batch_count);
        stats.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
        stats.val_auc = val_frame_auc(ck.params, val_set, mc);
        ck.history.push_back(stats);

        if (stats.val_auc > best_auc) {
            best_auc = stats.val_auc;
            best = ck.params;
            best_epoch = epoch;
        }
    }

    ck.params = best;
    ck.best_val_auc = best_auc;
    ck.epoch_of_best = best_epoch;
    return ck;
}

}  // namespace selfi
