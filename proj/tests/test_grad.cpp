#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "selfi/grad.hpp"
#include "selfi/rng.hpp"

using namespace selfi;

namespace {

ModelConfig check_cfg(Mode mode) {
    ModelConfig cfg;
    cfg.mode = mode;
    cfg.dims = {8, 12, 4};
    return cfg;
}

Sample random_sample(const Dims& dims, std::uint64_t seed, int y) {
    Rng rng(seed);
    Sample s;
    s.y = y;
    s.f_id.resize(dims.d_id);
    s.f_vis.resize(dims.d_backbone);
    for (double& v : s.f_id) v = rng.gauss();
    for (double& v : s.f_vis) v = rng.gauss();
    return s;
}

double grad_norm(const Grads& g) {
    double acc = 0.0;
    visit_tensors(g, [&](const char*, const std::vector<double>& data, std::size_t,
                         std::size_t) {
        for (double v : data) acc += v * v;
    });
    return std::sqrt(acc);
}

}  // namespace

// The oracle itself is validated on closed forms before it judges backward.
TEST_CASE("fd_gradient: constant loss gives zero") {
    ModelConfig cfg = check_cfg(Mode::identity_probe);
    const SelfiParams p = init_params(cfg, 0);
    const Grads g = fd_gradient([](const SelfiParams&) { return 3.5; }, p);
    visit_tensors(g, [&](const char*, const std::vector<double>& data, std::size_t,
                         std::size_t) {
        for (double v : data) CHECK(std::abs(v) < 1e-9);
    });
}

TEST_CASE("fd_gradient: quadratic in one coordinate") {
    ModelConfig cfg = check_cfg(Mode::identity_probe);
    SelfiParams p = init_params(cfg, 0);
    p.cls_w.data[0] = 3.0;
    const Grads g = fd_gradient(
        [](const SelfiParams& q) { return 0.5 * q.cls_w.data[0] * q.cls_w.data[0]; }, p);
    CHECK(g.cls_w.data[0] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(std::abs(g.cls_w.data[1]) < 1e-9);
    CHECK(std::abs(g.cls_b[0]) < 1e-9);
}

TEST_CASE("fd_gradient rejects nonpositive step") {
    ModelConfig cfg = check_cfg(Mode::identity_probe);
    const SelfiParams p = init_params(cfg, 0);
    CHECK_THROWS_AS(fd_gradient([](const SelfiParams&) { return 0.0; }, p, 0.0),
                    std::invalid_argument);
}

TEST_CASE("grad_check passes for every mode") {
    const Mode modes[] = {Mode::baseline_visual, Mode::identity_probe, Mode::faia_concat,
                          Mode::faia_iafm, Mode::full_selfi};
    for (const Mode mode : modes) {
        const GradCheckReport r = grad_check(check_cfg(mode), 0, 1e-5, 3);
        INFO("mode ", to_string(mode), " max_rel_err ", r.max_rel_err, " worst ",
             r.worst_tensor);
        CHECK(r.pass);
    }
}

TEST_CASE("grad_check: linear-softmax probe meets the tighter tolerance") {
    const GradCheckReport r = grad_check(check_cfg(Mode::identity_probe), 0, 1e-6, 3);
    CHECK(r.pass);
}

TEST_CASE("grad_check across seeds matches finite differences") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GradCheckReport r = grad_check(check_cfg(Mode::full_selfi), seed, 1e-5, 3);
        INFO("seed ", seed, " max_rel_err ", r.max_rel_err);
        CHECK(r.pass);
    }
}

TEST_CASE("grad_check with zero tolerance fails (harness sanity)") {
    CHECK_FALSE(grad_check(check_cfg(Mode::full_selfi), 0, 0.0, 1).pass);
}

TEST_CASE("beta = 0 detaches the guidance head") {
    ModelConfig cfg = check_cfg(Mode::full_selfi);
    cfg.beta = 0.0;
    const SelfiParams p = init_params(cfg, 1);
    const Sample s = random_sample(cfg.dims, 2, 1);
    const Grads g = backward(forward(p, s, cfg), p, s, cfg);
    for (double v : g.fag_w.data) CHECK(v == 0.0);
    for (double v : g.fag_b) CHECK(v == 0.0);
    // w_fi still learns through the classifier and gate paths.
    CHECK(grad_norm(g) > 0.0);
}

TEST_CASE("alpha = 0 detaches classifier and gate but not the guidance path") {
    ModelConfig cfg = check_cfg(Mode::full_selfi);
    cfg.alpha = 0.0;
    const SelfiParams p = init_params(cfg, 3);
    const Sample s = random_sample(cfg.dims, 4, 0);
    const Grads g = backward(forward(p, s, cfg), p, s, cfg);
    for (double v : g.cls_w.data) CHECK(v == 0.0);
    for (double v : g.cls_b) CHECK(v == 0.0);
    for (double v : g.rel_w1.data) CHECK(v == 0.0);
    for (double v : g.rel_w2.data) CHECK(v == 0.0);
    double wfi_norm = 0.0;
    for (double v : g.w_fi.data) wfi_norm += v * v;
    CHECK(wfi_norm > 0.0);
}

TEST_CASE("doubling alpha doubles the classifier gradient exactly") {
    ModelConfig cfg = check_cfg(Mode::full_selfi);
    const SelfiParams p = init_params(cfg, 5);
    const Sample s = random_sample(cfg.dims, 6, 1);
    cfg.alpha = 1.0;
    const Grads g1 = backward(forward(p, s, cfg), p, s, cfg);
    cfg.alpha = 2.0;
    const Grads g2 = backward(forward(p, s, cfg), p, s, cfg);
    for (std::size_t i = 0; i < g1.cls_w.size(); ++i) {
        CHECK(g2.cls_w.data[i] == 2.0 * g1.cls_w.data[i]);
    }
}

TEST_CASE("a small gradient step decreases the loss") {
    Rng rng(7);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ModelConfig cfg = check_cfg(Mode::full_selfi);
        SelfiParams p = init_params(cfg, rng.next_u64());
        const Sample s = random_sample(cfg.dims, rng.next_u64(), trial % 2);
        const ForwardTrace t = forward(p, s, cfg);
        const Grads g = backward(t, p, s, cfg);
        if (grad_norm(g) < 1e-10) continue;

        std::vector<std::vector<double>*> thetas;
        std::vector<const std::vector<double>*> grads;
        visit_tensors(p, [&](const char*, std::vector<double>& d, std::size_t, std::size_t) {
            thetas.push_back(&d);
        });
        visit_tensors(g, [&](const char*, const std::vector<double>& d, std::size_t,
                             std::size_t) { grads.push_back(&d); });
        for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
            for (std::size_t i = 0; i < thetas[ti]->size(); ++i) {
                (*thetas[ti])[i] -= 1e-4 * (*grads[ti])[i];
            }
        }
        CHECK(forward(p, s, cfg).l_total < t.l_total);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("fuse gradient w.r.t. rho is dot(f_fi - f_vis, upstream)") {
    Rng rng(8);
    const std::size_t n = 12;
    Vector f_fi(n), f_vis(n), upstream(n);
    for (double& v : f_fi) v = rng.gauss();
    for (double& v : f_vis) v = rng.gauss();
    for (double& v : upstream) v = rng.gauss();
    const double rho = 0.37;

    // Central differences over the isolated op.
    const double h = 1e-7;
    const auto loss = [&](double r) {
        const Vector fused = fuse(r, f_fi, f_vis);
        return dot(upstream, fused);
    };
    const double fd = (loss(rho + h) - loss(rho - h)) / (2.0 * h);

    Vector diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = f_fi[i] - f_vis[i];
    CHECK(fd == doctest::Approx(dot(diff, upstream)).epsilon(1e-6));
}
