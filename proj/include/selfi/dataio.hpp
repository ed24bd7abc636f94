#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "selfi/model.hpp"

namespace selfi {

/// Ordered collection of samples sharing one (d_id, d_backbone).
/// `provenance` is an in-memory note (generator hash or source string);
/// the on-disk format does not carry it.
struct EmbeddingDataset {
    std::size_t d_id = 0;
    std::size_t d_backbone = 0;
    bool has_groups = false;
    std::vector<Sample> samples;
    std::string provenance;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

struct ReadOptions {
    // Refuse to allocate more than this many scalars from an unvalidated
    // header.
    std::uint64_t max_scalars = 100'000'000;
};

/// Binary `.semb` format. Round-trips are bit-exact; in-memory doubles are
/// narrowed to IEEE binary32 on write and widened on read.
void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& path);
EmbeddingDataset read_dataset(const std::filesystem::path& path, const ReadOptions& opts = {});

struct Checkpoint;  // optim.hpp

/// Binary `.sckpt` format: JSON header plus named tensor blocks.
void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path, const ReadOptions& opts = {});

/// Per-feature mean/std of f_id and f_vis, fitted on a training split.
/// Features with std below 1e-12 pass through unchanged when applied.
struct StandardizerStats {
    Vector id_mean, id_std;
    Vector vis_mean, vis_std;
};

StandardizerStats fit_standardizer(const EmbeddingDataset& train_split);
EmbeddingDataset apply_standardizer(const StandardizerStats& stats, const EmbeddingDataset& ds);

/// Train/val/test splits of one forgery method.
struct MethodSplits {
    std::string name;
    std::uint8_t tag = 0;
    EmbeddingDataset train, val, test;
};

/// Samples whose method tag matches.
EmbeddingDataset subset_by_method(const EmbeddingDataset& ds, std::uint8_t tag);

/// Concatenation; all parts must share dims and group-flag.
EmbeddingDataset concat_datasets(const std::vector<const EmbeddingDataset*>& parts);

}  // namespace selfi
