#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfi/dataio.hpp"
#include "selfi/linalg.hpp"

namespace selfi {

// The three identity-behavior categories the benchmark reproduces:
// cues that transfer across methods, cues tied to one method, and cues
// too weak to be useful.
enum class MethodCategory { transferable, method_specific, ineffective };

std::string to_string(MethodCategory c);
MethodCategory category_from_string(const std::string& name);

struct MethodSpec {
    std::string name;
    std::uint8_t tag = 0;
    MethodCategory category = MethodCategory::transferable;
    Vector id_shift_dir;   // unit, d_id
    double id_shift_strength = 0.0;
    double id_noise = 0.0;
    Vector vis_artifact_dir;  // unit, d_backbone
    double vis_artifact_strength = 0.0;
    double vis_noise = 0.0;
};

struct BenchmarkSpec {
    std::size_t d_id = 64;
    std::size_t d_backbone = 96;
    std::size_t n_identities = 16;      // per split
    double id_within_noise = 0.5;       // per-video spread inside an identity
    double id_frame_jitter = 0.1;       // per-frame spread inside a video
    double vis_video_scale = 0.9;       // video-latent std; frames fill to unit marginal
    std::size_t group_size = 8;         // frames per emulated video
    std::uint64_t seed = 0;
    std::vector<MethodSpec> methods;
    // Test-only methods for generalization runs: same shared artifact
    // structure, fresh method-specific geometry, never part of training.
    std::vector<MethodSpec> unseen_methods;
};

enum class Split { train, val, test };
std::string to_string(Split s);

/// Four methods: a transferable pair sharing (nearly) one identity-shift
/// direction, a method-specific one shifted along an orthogonal direction,
/// and an ineffective one with almost no shift but heavy identity noise.
/// Deterministic in seed. Strengths are calibrated so an identity probe
/// lands in the documented AUC bands.
BenchmarkSpec default_benchmark(std::uint64_t seed);
BenchmarkSpec default_benchmark(std::uint64_t seed, std::size_t d_id, std::size_t d_backbone);

/// One dataset holding, per method, n_real real and n_fake fake samples
/// (reals are drawn independently per method from one shared pipeline).
/// Samples come in groups of `group_size` consecutive frames sharing one
/// latent video draw. Pure function of (spec, counts, split).
EmbeddingDataset sample_dataset(const BenchmarkSpec& spec, std::size_t n_real_per_method,
                                std::size_t n_fake_per_method, Split split);

/// The spec with its methods replaced by the unseen test-only methods;
/// feeding this to sample_dataset yields generalization test sets.
BenchmarkSpec unseen_view(const BenchmarkSpec& spec);

enum class AuxSource { identity, random, shuffled };
std::string to_string(AuxSource s);
AuxSource aux_source_from_string(const std::string& name);

/// identity: unchanged. random: f_id replaced by seeded unit Gaussians.
/// shuffled: f_id permuted across samples (marginals kept, id-label link
/// broken).
EmbeddingDataset aux_source_swap(const EmbeddingDataset& ds, AuxSource source,
                                 std::uint64_t seed = 0);

}  // namespace selfi
