#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfi/dataio.hpp"
#include "selfi/linalg.hpp"

namespace selfi {

struct TrainConfig;  // optim.hpp

/// Scores with labels, optionally grouped (one group per video).
struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::uint32_t> groups;
    bool has_groups = false;
};

/// Mann-Whitney ROC-AUC with midrank tie handling: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counted as 0.5. O(n log n). Throws DataError if a class is missing.
double roc_auc(const ScoredSet& s);

/// Fraction of samples where (score >= threshold) matches the label.
double accuracy(const ScoredSet& s, double threshold = 0.5);

/// Mean score per group, then roc_auc over the group means. Every group
/// must carry a uniform label.
double video_auc(const ScoredSet& s);

/// AUC table indexed by (train method, test method); diagonal is in-domain.
struct GridResult {
    std::vector<std::string> methods;
    Matrix auc;  // methods.size() x methods.size()
};

/// Trains one model per method (seed derived from tc.seed by fixed
/// arithmetic) and fills the frame-AUC grid over every method's test split.
/// Cells may be computed in up to `threads` worker threads.
GridResult cross_grid(const std::vector<MethodSplits>& by_method, const TrainConfig& tc,
                      std::size_t threads = 1);

}  // namespace selfi
