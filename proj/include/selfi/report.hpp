#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "selfi/metrics.hpp"
#include "selfi/optim.hpp"

namespace selfi {

/// Shortest round-trip decimal form ("%.17g" trimmed); keeps report files
/// byte-reproducible and numerically exact.
std::string format_double(double v);

/// Grid as CSV: header "train\test,<m0>,<m1>,..."; one row per train method.
std::string grid_to_csv(const GridResult& grid);

/// Fixed-layout heatmap; a two-color linear ramp anchored at AUC 0.5 and
/// 1.0, one labeled cell per entry, no timestamps.
std::string grid_to_svg(const GridResult& grid);

/// "epoch,train_loss,train_acc,val_auc" with one row per epoch run.
std::string history_to_csv(const std::vector<EpochStats>& history);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace selfi
