#pragma once

#include <functional>
#include <string>

#include "selfi/model.hpp"

namespace selfi {

/// d l_total / d theta for every trainable tensor, hand-derived for each
/// mode. The trace must come from forward/forward_variant with the same
/// (p, s, cfg). ReLU uses subgradient 0 at exactly 0.
Grads backward(const ForwardTrace& trace, const SelfiParams& p, const Sample& s,
               const ModelConfig& cfg);

/// Central differences (loss(theta+h) - loss(theta-h)) / 2h per scalar.
/// Independent of backward; this is the oracle backward is checked against.
Grads fd_gradient(const std::function<double(const SelfiParams&)>& loss_at,
                  const SelfiParams& p, double h = 1e-6);

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    double tolerance = 0.0;
    std::size_t samples_checked = 0;
};

/// Compares backward against fd_gradient on a small random instance.
/// Relative error per scalar is |a - f| / max(1e-8, |a| + |f|); PASS iff the
/// max over all parameters and samples is below tolerance. Samples are
/// redrawn until no ReLU pre-activation lies within 1e-4 of 0.
GradCheckReport grad_check(const ModelConfig& cfg, std::uint64_t seed,
                           double tolerance = 1e-5, std::size_t n_samples = 3);

}  // namespace selfi
