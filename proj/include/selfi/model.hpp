#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "selfi/linalg.hpp"

namespace selfi {

struct Dims {
    std::size_t d_id = 512;
    std::size_t d_backbone = 768;
    std::size_t h_rel = 256;
};

// The five trainable configurations: visual-only baseline, linear probe on
// raw identity embeddings, static concat fusion, gated fusion without the
// guidance loss, and the full model.
enum class Mode {
    baseline_visual,
    identity_probe,
    faia_concat,
    faia_iafm,
    full_selfi,
};

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
bool mode_has_fag(Mode mode);       // guidance head present
bool mode_has_relevance(Mode mode); // gated fusion present

struct ModelConfig {
    Mode mode = Mode::full_selfi;
    double alpha = 1.0;
    double beta = 1.0;
    Dims dims;
};

/// One observation: precomputed identity and visual embeddings plus label.
struct Sample {
    Vector f_id;
    Vector f_vis;
    int y = 0;  // 0 = real, 1 = fake
    std::uint8_t method = 0;
    std::uint32_t group = 0;
};

// All trainable tensors. Tensors a mode does not use stay empty and are
// skipped by visit_tensors, the optimizer, and checkpoint I/O.
struct TensorBundle {
    Matrix w_fi;    // d_backbone x d_id, no bias
    Matrix fag_w;   // 2 x d_backbone
    Vector fag_b;   // 2
    Matrix rel_w1;  // h_rel x 2*d_backbone
    Vector rel_b1;  // h_rel
    Matrix rel_w2;  // 1 x h_rel
    Vector rel_b2;  // 1
    Matrix cls_w;   // 2 x (input width, mode dependent)
    Vector cls_b;   // 2
};

struct SelfiParams : TensorBundle {};
struct Grads : TensorBundle {};

namespace detail {

// Uniform view of one tensor: matrices expose (rows, cols), vectors (len, 1).
template <class B, class F>
void visit_matrix(const char* name, B& m, F&& f) {
    f(name, m.data, m.rows, m.cols);
}
template <class B, class F>
void visit_vector(const char* name, B& v, F&& f) {
    f(name, v, v.size(), std::size_t{1});
}

}  // namespace detail

// Fixed order: w_fi, fag_w, fag_b, rel_w1, rel_b1, rel_w2, rel_b2, cls_w,
// cls_b. Empty tensors are skipped. This order is load-bearing for both
// parameter initialization and the checkpoint format.
template <class Bundle, class F>
void visit_tensors(Bundle& b, F&& f) {
    if (!b.w_fi.empty()) detail::visit_matrix("w_fi", b.w_fi, f);
    if (!b.fag_w.empty()) detail::visit_matrix("fag_w", b.fag_w, f);
    if (!b.fag_b.empty()) detail::visit_vector("fag_b", b.fag_b, f);
    if (!b.rel_w1.empty()) detail::visit_matrix("rel_w1", b.rel_w1, f);
    if (!b.rel_b1.empty()) detail::visit_vector("rel_b1", b.rel_b1, f);
    if (!b.rel_w2.empty()) detail::visit_matrix("rel_w2", b.rel_w2, f);
    if (!b.rel_b2.empty()) detail::visit_vector("rel_b2", b.rel_b2, f);
    if (!b.cls_w.empty()) detail::visit_matrix("cls_w", b.cls_w, f);
    if (!b.cls_b.empty()) detail::visit_vector("cls_b", b.cls_b, f);
}

/// Total number of trainable scalars.
std::size_t parameter_count(const TensorBundle& b);

/// Grads (or moments) with the same shapes as p, all zero.
Grads zero_like(const SelfiParams& p);

/// All-zero tensors of the shapes cfg.mode requires; tensors the mode does
/// not use stay empty.
SelfiParams params_shell(const ModelConfig& cfg);

/// Xavier-uniform weights, zero biases, fully determined by (cfg, seed).
SelfiParams init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Cached intermediates of one forward pass. Fields a mode does not compute
/// stay empty / nullopt.
struct ForwardTrace {
    Vector f_fi;
    std::optional<double> rho;
    Vector f_fused;
    Vector fag_logits;
    Vector cls_logits;
    Vector rel_hidden_pre;
    Vector rel_hidden_post;
    std::optional<double> rel_logit;
    double l_cls = 0.0;
    std::optional<double> l_fag;
    double l_total = 0.0;

    /// softmax(cls_logits)[1], the fake-class probability.
    double fake_score() const { return fake_probability(cls_logits); }
};

/// f_fi = w_fi * f_id (no bias, no activation).
Vector faia_project(const SelfiParams& p, const Vector& f_id);

/// Guidance-head logits over the projected identity feature.
Vector fag_logits(const SelfiParams& p, const Vector& f_fi);

struct RelevanceResult {
    double rho = 0.0;
    double logit = 0.0;
    Vector hidden_pre;
    Vector hidden_post;
};

/// rho = sigmoid(w2 . relu(w1 [f_vis ; f_fi] + b1) + b2). The concat order
/// is fixed to [f_vis ; f_fi].
RelevanceResult relevance(const SelfiParams& p, const Vector& f_vis, const Vector& f_fi);

/// rho * f_fi + (1 - rho) * f_vis. rho = 0 returns f_vis bit-exactly and
/// rho = 1 returns f_fi bit-exactly.
Vector fuse(double rho, const Vector& f_fi, const Vector& f_vis);

/// Full forward pass; requires cfg.mode == full_selfi.
ForwardTrace forward(const SelfiParams& p, const Sample& s, const ModelConfig& cfg);

/// Forward pass for the four reduced modes; requires cfg.mode != full_selfi.
ForwardTrace forward_variant(const SelfiParams& p, const Sample& s, const ModelConfig& cfg);

/// Dispatch on cfg.mode.
ForwardTrace forward_any(const SelfiParams& p, const Sample& s, const ModelConfig& cfg);

}  // namespace selfi
