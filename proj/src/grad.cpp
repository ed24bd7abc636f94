#include "selfi/grad.hpp"

#include <cmath>
#include <stdexcept>
#include <string_view>

#include "selfi/rng.hpp"

namespace selfi {

namespace {

// g += upstream * x^T
void accumulate_outer(Matrix& g, const Vector& upstream, const Vector& x) {
    for (std::size_t i = 0; i < g.rows; ++i) {
        double* row = g.data.data() + i * g.cols;
        const double u = upstream[i];
        for (std::size_t j = 0; j < g.cols; ++j) row[j] += u * x[j];
    }
}

// w^T * upstream
Vector matvec_transposed(const Matrix& w, const Vector& upstream) {
    Vector out(w.cols, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* row = w.data.data() + i * w.cols;
        const double u = upstream[i];
        for (std::size_t j = 0; j < w.cols; ++j) out[j] += row[j] * u;
    }
    return out;
}

// d cross_entropy / d logits = softmax(logits) - onehot(y), scaled.
Vector ce_logit_grad(const Vector& logits, int y, double scale) {
    Vector g = softmax2(logits);
    g[static_cast<std::size_t>(y)] -= 1.0;
    g[0] *= scale;
    g[1] *= scale;
    return g;
}

void add_to(Vector& acc, const Vector& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

}  // namespace

Grads backward(const ForwardTrace& t, const SelfiParams& p, const Sample& s,
               const ModelConfig& cfg) {
    Grads g = zero_like(p);
    const std::size_t db = cfg.dims.d_backbone;

    // Classifier head. Its input depends on the mode.
    const Vector* cls_in = nullptr;
    switch (cfg.mode) {
        case Mode::baseline_visual: cls_in = &s.f_vis; break;
        case Mode::identity_probe: cls_in = &s.f_id; break;
        default: cls_in = &t.f_fused; break;
    }
    if (t.cls_logits.size() != 2) {
        throw std::invalid_argument("backward: trace does not match config (missing cls_logits)");
    }
    const Vector gq = ce_logit_grad(t.cls_logits, s.y, cfg.alpha);
    accumulate_outer(g.cls_w, gq, *cls_in);
    g.cls_b = gq;

    if (cfg.mode == Mode::baseline_visual || cfg.mode == Mode::identity_probe) return g;

    // Gradient flowing into f_fi, accumulated across every path that
    // consumes it: fusion, the relevance predictor, and the guidance head.
    Vector gf(db, 0.0);

    if (cfg.mode == Mode::faia_concat) {
        const Vector gz = matvec_transposed(p.cls_w, gq);  // over [f_vis ; f_fi]
        for (std::size_t j = 0; j < db; ++j) gf[j] = gz[db + j];
    } else {
        // Gated fusion: z = f_vis + rho * (f_fi - f_vis).
        if (!t.rho || t.rel_hidden_pre.empty()) {
            throw std::invalid_argument("backward: trace does not match config (missing gate)");
        }
        const double rho = *t.rho;
        const Vector gz = matvec_transposed(p.cls_w, gq);
        double drho = 0.0;
        for (std::size_t j = 0; j < db; ++j) {
            drho += gz[j] * (t.f_fi[j] - s.f_vis[j]);
            gf[j] += rho * gz[j];
        }

        // Through the sigmoid gate into the relevance MLP.
        const double ds = drho * rho * (1.0 - rho);
        for (std::size_t j = 0; j < g.rel_w2.cols; ++j) {
            g.rel_w2.data[j] = ds * t.rel_hidden_post[j];
        }
        g.rel_b2[0] = ds;

        Vector gh_pre(t.rel_hidden_pre.size());
        for (std::size_t j = 0; j < gh_pre.size(); ++j) {
            const double gh = ds * p.rel_w2.data[j];
            gh_pre[j] = t.rel_hidden_pre[j] > 0.0 ? gh : 0.0;
        }
        const Vector joint = concat(s.f_vis, t.f_fi);
        accumulate_outer(g.rel_w1, gh_pre, joint);
        g.rel_b1 = gh_pre;

        const Vector gjoint = matvec_transposed(p.rel_w1, gh_pre);
        for (std::size_t j = 0; j < db; ++j) gf[j] += gjoint[db + j];

        if (mode_has_fag(cfg.mode)) {
            const Vector ga = ce_logit_grad(t.fag_logits, s.y, cfg.beta);
            accumulate_outer(g.fag_w, ga, t.f_fi);
            g.fag_b = ga;
            add_to(gf, matvec_transposed(p.fag_w, ga));
        }
    }

    accumulate_outer(g.w_fi, gf, s.f_id);
    return g;
}

Grads fd_gradient(const std::function<double(const SelfiParams&)>& loss_at,
                  const SelfiParams& p, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: h must be > 0");
    SelfiParams work = p;
    Grads g = zero_like(p);

    // Walk matching tensors of `work` and `g` in the fixed order.
    std::vector<std::vector<double>*> param_tensors;
    std::vector<std::vector<double>*> grad_tensors;
    visit_tensors(work, [&](const char*, std::vector<double>& data, std::size_t, std::size_t) {
        param_tensors.push_back(&data);
    });
    visit_tensors(g, [&](const char*, std::vector<double>& data, std::size_t, std::size_t) {
        grad_tensors.push_back(&data);
    });

    for (std::size_t ti = 0; ti < param_tensors.size(); ++ti) {
        std::vector<double>& theta = *param_tensors[ti];
        std::vector<double>& grad = *grad_tensors[ti];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + h;
            const double up = loss_at(work);
            theta[i] = saved - h;
            const double down = loss_at(work);
            theta[i] = saved;
            grad[i] = (up - down) / (2.0 * h);
        }
    }
    return g;
}

GradCheckReport grad_check(const ModelConfig& cfg, std::uint64_t seed, double tolerance,
                           std::size_t n_samples) {
    GradCheckReport report;
    report.tolerance = tolerance;

    SelfiParams p = init_params(cfg, seed);
    // Nudge biases off their zero init so the check runs at a generic point.
    Rng bias_rng(derive_seed(seed, 0xb1a5));
    visit_tensors(p, [&](const char* name, std::vector<double>& data, std::size_t, std::size_t) {
        const std::string_view n(name);
        if (n == "fag_b" || n == "rel_b1" || n == "rel_b2" || n == "cls_b") {
            for (double& v : data) v = 0.1 * bias_rng.gauss();
        }
    });

    Rng sample_rng(derive_seed(seed, 0x5a3b));
    const auto loss_at = [&](const SelfiParams& q, const Sample& s) {
        return forward_any(q, s, cfg).l_total;
    };

    for (std::size_t k = 0; k < n_samples; ++k) {
        Sample s;
        s.y = static_cast<int>(k % 2);
        // Redraw until every ReLU pre-activation is at least 1e-4 from the
        // kink (relevance modes only).
        bool ok = false;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
            s.f_id.assign(cfg.dims.d_id, 0.0);
            s.f_vis.assign(cfg.dims.d_backbone, 0.0);
            for (double& v : s.f_id) v = sample_rng.gauss();
            for (double& v : s.f_vis) v = sample_rng.gauss();
            ok = true;
            if (mode_has_relevance(cfg.mode)) {
                const ForwardTrace t = forward_any(p, s, cfg);
                for (double pre : t.rel_hidden_pre) {
                    if (std::abs(pre) < 1e-4) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if (!ok) throw std::runtime_error("grad_check: could not avoid the ReLU kink");

        const ForwardTrace t = forward_any(p, s, cfg);
        const Grads analytic = backward(t, p, s, cfg);
        // h = 1e-5 balances truncation against cancellation at these loss
        // magnitudes; perturbations stay an order below the kink margin.
        const Grads fd =
            fd_gradient([&](const SelfiParams& q) { return loss_at(q, s); }, p, 1e-5);

        std::vector<const std::vector<double>*> a_tensors, f_tensors;
        std::vector<const char*> names;
        visit_tensors(analytic,
                      [&](const char* name, const std::vector<double>& data, std::size_t,
                          std::size_t) {
                          a_tensors.push_back(&data);
                          names.push_back(name);
                      });
        visit_tensors(fd, [&](const char*, const std::vector<double>& data, std::size_t,
                              std::size_t) { f_tensors.push_back(&data); });

        for (std::size_t ti = 0; ti < a_tensors.size(); ++ti) {
            const std::vector<double>& a = *a_tensors[ti];
            const std::vector<double>& f = *f_tensors[ti];
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double denom = std::max(1e-8, std::abs(a[i]) + std::abs(f[i]));
                const double rel = std::abs(a[i] - f[i]) / denom;
                if (rel > report.max_rel_err) {
                    report.max_rel_err = rel;
                    report.worst_tensor = names[ti];
                    report.worst_index = i;
                }
            }
        }
        ++report.samples_checked;
    }

    report.pass = report.max_rel_err < tolerance;
    return report;
}

}  // namespace selfi
