#include "selfi/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <thread>

#include "selfi/errors.hpp"
#include "selfi/optim.hpp"
#include "selfi/rng.hpp"

namespace selfi {

double roc_auc(const ScoredSet& s) {
    const std::size_t n = s.scores.size();
    if (s.labels.size() != n) throw DataError("roc_auc: scores/labels length mismatch");
    std::size_t n_pos = 0;
    for (int y : s.labels) {
        if (y != 0 && y != 1) throw DataError("roc_auc: labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DataError("roc_auc: need both classes, got " + std::to_string(n_pos) +
                        " positives / " + std::to_string(n_neg) + " negatives");
    }

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });

    // Midranks over tie groups; AUC = (R+ - n+(n+ + 1)/2) / (n+ n-).
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && s.scores[idx[j]] == s.scores[idx[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (s.labels[idx[k]] == 1) pos_rank_sum += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double accuracy(const ScoredSet& s, double threshold) {
    if (s.scores.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        const int pred = s.scores[i] >= threshold ? 1 : 0;
        if (pred == s.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(s.scores.size());
}

double video_auc(const ScoredSet& s) {
    if (!s.has_groups || s.groups.size() != s.scores.size()) {
        throw DataError("video_auc: groups missing");
    }
    struct Agg {
        double sum = 0.0;
        std::size_t count = 0;
        int label = -1;
    };
    std::map<std::uint32_t, Agg> by_group;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        Agg& a = by_group[s.groups[i]];
        if (a.label == -1) {
            a.label = s.labels[i];
        } else if (a.label != s.labels[i]) {
            throw DataError("video_auc: mixed labels within group " +
                            std::to_string(s.groups[i]));
        }
        a.sum += s.scores[i];
        a.count += 1;
    }
    ScoredSet grouped;
    for (const auto& [_, a] : by_group) {
        grouped.scores.push_back(a.count == 1 ? a.sum : a.sum / static_cast<double>(a.count));
        grouped.labels.push_back(a.label);
    }
    return roc_auc(grouped);
}

GridResult cross_grid(const std::vector<MethodSplits>& by_method, const TrainConfig& tc,
                      std::size_t threads) {
    if (by_method.empty()) throw DataError("cross_grid: no methods");
    const std::size_t n = by_method.size();
    GridResult grid;
    grid.auc = Matrix(n, n, 0.0);
    for (const MethodSplits& m : by_method) grid.methods.push_back(m.name);

    const auto run_row = [&](std::size_t row) {
        TrainConfig cell_tc = tc;
        cell_tc.seed = derive_seed(tc.seed, row);
        const Checkpoint ck = train(by_method[row].train, by_method[row].val, cell_tc);
        for (std::size_t col = 0; col < n; ++col) {
            ScoredSet scored;
            scored.scores = score_dataset(ck.params, by_method[col].test, cell_tc.model);
            for (const Sample& s : by_method[col].test.samples) scored.labels.push_back(s.y);
            grid.auc.at(row, col) = roc_auc(scored);
        }
    };

    if (threads <= 1 || n <= 1) {
        for (std::size_t row = 0; row < n; ++row) run_row(row);
        return grid;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(threads, n);
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t row = next.fetch_add(1); row < n; row = next.fetch_add(1)) {
                    run_row(row);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return grid;
}

}  // namespace selfi
