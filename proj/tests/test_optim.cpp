#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <cstring>

#include "selfi/errors.hpp"
#include "selfi/optim.hpp"
#include "selfi/rng.hpp"

using namespace selfi;

namespace {

bool params_bits_equal(const SelfiParams& a, const SelfiParams& b) {
    bool equal = true;
    std::vector<const std::vector<double>*> ta, tb;
    visit_tensors(a, [&](const char*, const std::vector<double>& d, std::size_t, std::size_t) {
        ta.push_back(&d);
    });
    visit_tensors(b, [&](const char*, const std::vector<double>& d, std::size_t, std::size_t) {
        tb.push_back(&d);
    });
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        equal = equal && ta[i]->size() == tb[i]->size() &&
                std::memcmp(ta[i]->data(), tb[i]->data(), ta[i]->size() * sizeof(double)) == 0;
    }
    return equal;
}

// Separable toy task: fakes shifted along the first identity coordinate.
EmbeddingDataset separable_dataset(std::size_t n, std::uint64_t seed) {
    EmbeddingDataset ds;
    ds.d_id = 8;
    ds.d_backbone = 6;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        s.y = static_cast<int>(i % 2);
        s.f_id.resize(ds.d_id);
        s.f_vis.resize(ds.d_backbone);
        for (double& v : s.f_id) v = 0.3 * rng.gauss();
        for (double& v : s.f_vis) v = rng.gauss();
        s.f_id[0] += s.y == 1 ? 2.0 : -2.0;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

TrainConfig probe_tc(std::uint64_t seed) {
    TrainConfig tc;
    tc.seed = seed;
    tc.lr = 0.05;
    tc.epochs = 10;
    tc.model.mode = Mode::identity_probe;
    tc.model.dims = {8, 6, 4};
    return tc;
}

}  // namespace

TEST_CASE("adamw_step: lr = 0 leaves parameters bitwise unchanged") {
    ModelConfig mc;
    mc.dims = {8, 12, 4};
    SelfiParams p = init_params(mc, 0);
    const SelfiParams before = p;
    OptimState st = init_optim_state(p);
    Grads g = zero_like(p);
    for (double& v : g.cls_w.data) v = 1.5;

    TrainConfig tc;
    tc.lr = 0.0;
    adamw_step(p, g, st, tc);
    CHECK(params_bits_equal(p, before));
    CHECK(st.t == 1);
}

TEST_CASE("adamw_step: zero gradient and zero decay leave parameters in place") {
    ModelConfig mc;
    mc.dims = {8, 12, 4};
    SelfiParams p = init_params(mc, 1);
    const SelfiParams before = p;
    OptimState st = init_optim_state(p);
    const Grads g = zero_like(p);

    TrainConfig tc;
    tc.weight_decay = 0.0;
    for (int i = 0; i < 5; ++i) adamw_step(p, g, st, tc);
    CHECK(params_bits_equal(p, before));
}

TEST_CASE("adamw_step single update matches the hand-evaluated formula") {
    // theta = 1, g = 1, defaults: m = 0.1, v = 0.001, mhat = 1, vhat = 1,
    // theta' = 1 - lr * (1 / (1 + eps) + wd).
    ModelConfig mc;
    mc.mode = Mode::identity_probe;
    mc.dims = {1, 1, 1};
    SelfiParams p = params_shell(mc);
    std::fill(p.cls_w.data.begin(), p.cls_w.data.end(), 0.0);
    p.cls_w.data[0] = 1.0;
    OptimState st = init_optim_state(p);
    Grads g = zero_like(p);
    g.cls_w.data[0] = 1.0;

    TrainConfig tc;  // defaults: lr 2e-4, b1 0.9, b2 0.999, eps 1e-8, wd 5e-4
    adamw_step(p, g, st, tc);

    const double m = 0.1, v = 0.001;
    const double mhat = m / (1.0 - 0.9);
    const double vhat = v / (1.0 - 0.999);
    const double expected = 1.0 - 2e-4 * (mhat / (std::sqrt(vhat) + 1e-8) + 5e-4 * 1.0);
    CHECK(p.cls_w.data[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adamw_step: 10 iterations on a scalar quadratic follow the recurrence") {
    ModelConfig mc;
    mc.mode = Mode::identity_probe;
    mc.dims = {1, 1, 1};
    SelfiParams p = params_shell(mc);
    std::fill(p.cls_w.data.begin(), p.cls_w.data.end(), 0.0);
    p.cls_w.data[0] = 1.0;
    OptimState st = init_optim_state(p);

    TrainConfig tc;
    tc.lr = 0.1;

    // Independent scalar evaluation of the same recurrence.
    double theta = 1.0, m = 0.0, v = 0.0;
    for (int step = 1; step <= 10; ++step) {
        const double grad = theta;  // d/dtheta of 0.5 theta^2
        Grads g = zero_like(p);
        g.cls_w.data[0] = p.cls_w.data[0];
        adamw_step(p, g, st, tc);

        m = 0.9 * m + 0.1 * grad;
        v = 0.999 * v + 0.001 * grad * grad;
        const double mhat = m / (1.0 - std::pow(0.9, step));
        const double vhat = v / (1.0 - std::pow(0.999, step));
        theta -= 0.1 * (mhat / (std::sqrt(vhat) + 1e-8) + 5e-4 * theta);

        CHECK(std::abs(p.cls_w.data[0] - theta) <= 1e-12);
    }
}

TEST_CASE("train is deterministic") {
    const EmbeddingDataset train_set = separable_dataset(128, 3);
    const EmbeddingDataset val_set = separable_dataset(64, 4);
    const TrainConfig tc = probe_tc(7);
    const Checkpoint a = train(train_set, val_set, tc);
    const Checkpoint b = train(train_set, val_set, tc);
    CHECK(params_bits_equal(a.params, b.params));
    CHECK(a.best_val_auc == b.best_val_auc);
    CHECK(a.epoch_of_best == b.epoch_of_best);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_loss == b.history[i].train_loss);
        CHECK(a.history[i].val_auc == b.history[i].val_auc);
    }
}

TEST_CASE("train learns a separable probe task") {
    const EmbeddingDataset train_set = separable_dataset(256, 5);
    const EmbeddingDataset val_set = separable_dataset(128, 6);
    const Checkpoint ck = train(train_set, val_set, probe_tc(8));

    REQUIRE(ck.history.size() == 10);
    CHECK(ck.history[1].train_loss < ck.history[0].train_loss);
    CHECK(ck.history[2].train_loss < ck.history[1].train_loss);
    CHECK(ck.history.back().train_acc >= 0.95);
    CHECK(ck.best_val_auc >= 0.99);
}

TEST_CASE("train: epochs = 0 returns the initialization") {
    const EmbeddingDataset train_set = separable_dataset(32, 9);
    const EmbeddingDataset val_set = separable_dataset(32, 10);
    TrainConfig tc = probe_tc(11);
    tc.epochs = 0;
    const Checkpoint ck = train(train_set, val_set, tc);
    CHECK(ck.history.empty());
    CHECK(ck.epoch_of_best == 0);
    CHECK(params_bits_equal(ck.params, init_params(tc.model, tc.seed)));
    CHECK(ck.best_val_auc >= 0.0);
    CHECK(ck.best_val_auc <= 1.0);
}

TEST_CASE("train rejects degenerate inputs") {
    const EmbeddingDataset train_set = separable_dataset(32, 12);
    EmbeddingDataset empty;
    empty.d_id = 8;
    empty.d_backbone = 6;
    CHECK_THROWS_AS(train(empty, train_set, probe_tc(0)), DataError);

    EmbeddingDataset single_class = separable_dataset(32, 13);
    for (Sample& s : single_class.samples) s.y = 1;
    CHECK_THROWS_AS(train(train_set, single_class, probe_tc(0)), DataError);

    EmbeddingDataset wrong_dims = separable_dataset(32, 14);
    wrong_dims.d_id = 5;
    CHECK_THROWS_AS(train(wrong_dims, train_set, probe_tc(0)), DataError);
}

TEST_CASE("best_val_auc equals the history maximum") {
    const EmbeddingDataset train_set = separable_dataset(128, 15);
    const EmbeddingDataset val_set = separable_dataset(64, 16);
    const Checkpoint ck = train(train_set, val_set, probe_tc(17));
    double best = 0.0;
    for (const EpochStats& e : ck.history) best = std::max(best, e.val_auc);
    CHECK(ck.best_val_auc == best);
    CHECK(ck.history[ck.epoch_of_best - 1].val_auc == best);
}

TEST_CASE("permuting the validation set leaves best_val_auc unchanged") {
    const EmbeddingDataset train_set = separable_dataset(128, 18);
    EmbeddingDataset val_set = separable_dataset(64, 19);
    const Checkpoint a = train(train_set, val_set, probe_tc(20));

    Rng rng(21);
    rng.shuffle(val_set.samples);
    const Checkpoint b = train(train_set, val_set, probe_tc(20));
    CHECK(std::abs(a.best_val_auc - b.best_val_auc) < 1e-12);
}

TEST_CASE("beta = 0 with zero decay freezes the guidance head through training") {
    EmbeddingDataset train_set = separable_dataset(96, 22);
    EmbeddingDataset val_set = separable_dataset(48, 23);

    TrainConfig tc;
    tc.seed = 24;
    tc.lr = 0.01;
    tc.epochs = 4;
    tc.weight_decay = 0.0;
    tc.model.mode = Mode::full_selfi;
    tc.model.beta = 0.0;
    tc.model.dims = {8, 6, 4};

    const SelfiParams init = init_params(tc.model, tc.seed);
    const Checkpoint ck = train(train_set, val_set, tc);
    CHECK(std::memcmp(ck.params.fag_w.data.data(), init.fag_w.data.data(),
                      init.fag_w.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(ck.params.fag_b.data(), init.fag_b.data(),
                      init.fag_b.size() * sizeof(double)) == 0);
    // The rest of the model did move.
    CHECK_FALSE(params_bits_equal(ck.params, init));
}
