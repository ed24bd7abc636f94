#include "selfi/model.hpp"

#include <cmath>
#include <stdexcept>

#include "selfi/rng.hpp"

namespace selfi {

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::baseline_visual: return "baseline_visual";
        case Mode::identity_probe: return "identity_probe";
        case Mode::faia_concat: return "faia_concat";
        case Mode::faia_iafm: return "faia_iafm";
        case Mode::full_selfi: return "full_selfi";
    }
    throw std::logic_error("to_string: bad Mode");
}

Mode mode_from_string(const std::string& name) {
    if (name == "baseline_visual") return Mode::baseline_visual;
    if (name == "identity_probe") return Mode::identity_probe;
    if (name == "faia_concat") return Mode::faia_concat;
    if (name == "faia_iafm") return Mode::faia_iafm;
    if (name == "full_selfi") return Mode::full_selfi;
    throw std::invalid_argument("unknown model mode: " + name);
}

bool mode_has_fag(Mode mode) {
    return mode == Mode::full_selfi;
}

bool mode_has_relevance(Mode mode) {
    return mode == Mode::faia_iafm || mode == Mode::full_selfi;
}

std::size_t parameter_count(const TensorBundle& b) {
    std::size_t n = 0;
    visit_tensors(b, [&](const char*, const std::vector<double>& data, std::size_t, std::size_t) {
        n += data.size();
    });
    return n;
}

Grads zero_like(const SelfiParams& p) {
    Grads g;
    static_cast<TensorBundle&>(g) = static_cast<const TensorBundle&>(p);
    visit_tensors(g, [](const char*, std::vector<double>& data, std::size_t, std::size_t) {
        std::fill(data.begin(), data.end(), 0.0);
    });
    return g;
}

namespace {

std::size_t cls_input_width(const ModelConfig& cfg) {
    switch (cfg.mode) {
        case Mode::identity_probe: return cfg.dims.d_id;
        case Mode::faia_concat: return 2 * cfg.dims.d_backbone;
        default: return cfg.dims.d_backbone;
    }
}

void fill_xavier_uniform(Matrix& m, Rng& rng) {
    // fan_in = cols, fan_out = rows
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    for (double& w : m.data) w = rng.uniform(-a, a);
}

}  // namespace

SelfiParams params_shell(const ModelConfig& cfg) {
    const Dims& d = cfg.dims;
    SelfiParams p;
    const bool has_proj = cfg.mode != Mode::baseline_visual && cfg.mode != Mode::identity_probe;
    if (has_proj) p.w_fi = Matrix(d.d_backbone, d.d_id);
    if (mode_has_fag(cfg.mode)) {
        p.fag_w = Matrix(2, d.d_backbone);
        p.fag_b = Vector(2, 0.0);
    }
    if (mode_has_relevance(cfg.mode)) {
        p.rel_w1 = Matrix(d.h_rel, 2 * d.d_backbone);
        p.rel_b1 = Vector(d.h_rel, 0.0);
        p.rel_w2 = Matrix(1, d.h_rel);
        p.rel_b2 = Vector(1, 0.0);
    }
    p.cls_w = Matrix(2, cls_input_width(cfg));
    p.cls_b = Vector(2, 0.0);
    return p;
}

SelfiParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    SelfiParams p = params_shell(cfg);

    // One stream, matrices drawn in the fixed tensor order; biases stay zero.
    Rng rng(seed);
    if (!p.w_fi.empty()) fill_xavier_uniform(p.w_fi, rng);
    if (!p.fag_w.empty()) fill_xavier_uniform(p.fag_w, rng);
    if (!p.rel_w1.empty()) fill_xavier_uniform(p.rel_w1, rng);
    if (!p.rel_w2.empty()) fill_xavier_uniform(p.rel_w2, rng);
    fill_xavier_uniform(p.cls_w, rng);
    return p;
}

Vector faia_project(const SelfiParams& p, const Vector& f_id) {
    return matvec(p.w_fi, f_id);
}

Vector fag_logits(const SelfiParams& p, const Vector& f_fi) {
    return affine(p.fag_w, p.fag_b, f_fi);
}

RelevanceResult relevance(const SelfiParams& p, const Vector& f_vis, const Vector& f_fi) {
    RelevanceResult r;
    const Vector joint = concat(f_vis, f_fi);
    r.hidden_pre = affine(p.rel_w1, p.rel_b1, joint);
    r.hidden_post = relu(r.hidden_pre);
    r.logit = affine(p.rel_w2, p.rel_b2, r.hidden_post)[0];
    r.rho = sigmoid(r.logit);
    return r;
}

Vector fuse(double rho, const Vector& f_fi, const Vector& f_vis) {
    if (f_fi.size() != f_vis.size()) {
        throw std::invalid_argument("fuse: width mismatch: " + std::to_string(f_fi.size()) +
                                    " vs " + std::to_string(f_vis.size()));
    }
    // Exact endpoints; the interior form keeps every coordinate inside
    // [min(f_fi, f_vis), max(f_fi, f_vis)] under monotone rounding.
    if (rho == 0.0) return f_vis;
    if (rho == 1.0) return f_fi;
    Vector out(f_vis.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = f_vis[i] + rho * (f_fi[i] - f_vis[i]);
    }
    return out;
}

namespace {

ForwardTrace forward_full(const SelfiParams& p, const Sample& s, const ModelConfig& cfg) {
    ForwardTrace t;
    t.f_fi = faia_project(p, s.f_id);
    t.fag_logits = fag_logits(p, t.f_fi);
    const RelevanceResult rel = relevance(p, s.f_vis, t.f_fi);
    t.rho = rel.rho;
    t.rel_logit = rel.logit;
    t.rel_hidden_pre = rel.hidden_pre;
    t.rel_hidden_post = rel.hidden_post;
    t.f_fused = fuse(rel.rho, t.f_fi, s.f_vis);
    t.cls_logits = affine(p.cls_w, p.cls_b, t.f_fused);
    t.l_cls = cross_entropy(t.cls_logits, s.y);
    t.l_fag = cross_entropy(t.fag_logits, s.y);
    t.l_total = cfg.alpha * t.l_cls + cfg.beta * *t.l_fag;
    return t;
}

}  // namespace

ForwardTrace forward(const SelfiParams& p, const Sample& s, const ModelConfig& cfg) {
    if (cfg.mode != Mode::full_selfi) {
        throw std::invalid_argument("forward: cfg.mode must be full_selfi, got " +
                                    to_string(cfg.mode));
    }
    return forward_full(p, s, cfg);
}

ForwardTrace forward_variant(const SelfiParams& p, const Sample& s, const ModelConfig& cfg) {
    ForwardTrace t;
    switch (cfg.mode) {
        case Mode::baseline_visual:
            t.cls_logits = affine(p.cls_w, p.cls_b, s.f_vis);
            break;
        case Mode::identity_probe:
            t.cls_logits = affine(p.cls_w, p.cls_b, s.f_id);
            break;
        case Mode::faia_concat: {
            t.f_fi = faia_project(p, s.f_id);
            t.f_fused = concat(s.f_vis, t.f_fi);
            t.cls_logits = affine(p.cls_w, p.cls_b, t.f_fused);
            break;
        }
        case Mode::faia_iafm: {
            t.f_fi = faia_project(p, s.f_id);
            const RelevanceResult rel = relevance(p, s.f_vis, t.f_fi);
            t.rho = rel.rho;
            t.rel_logit = rel.logit;
            t.rel_hidden_pre = rel.hidden_pre;
            t.rel_hidden_post = rel.hidden_post;
            t.f_fused = fuse(rel.rho, t.f_fi, s.f_vis);
            t.cls_logits = affine(p.cls_w, p.cls_b, t.f_fused);
            break;
        }
        case Mode::full_selfi:
            throw std::invalid_argument("forward_variant: use forward for full_selfi");
    }
    t.l_cls = cross_entropy(t.cls_logits, s.y);
    t.l_total = cfg.alpha * t.l_cls;
    return t;
}

ForwardTrace forward_any(const SelfiParams& p, const Sample& s, const ModelConfig& cfg) {
    return cfg.mode == Mode::full_selfi ? forward_full(p, s, cfg) : forward_variant(p, s, cfg);
}

}  // namespace selfi
