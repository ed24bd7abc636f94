#include "selfi/synthdata.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "selfi/errors.hpp"
#include "selfi/rng.hpp"

namespace selfi {

std::string to_string(MethodCategory c) {
    switch (c) {
        case MethodCategory::transferable: return "transferable";
        case MethodCategory::method_specific: return "method_specific";
        case MethodCategory::ineffective: return "ineffective";
    }
    throw std::logic_error("to_string: bad MethodCategory");
}

MethodCategory category_from_string(const std::string& name) {
    if (name == "transferable") return MethodCategory::transferable;
    if (name == "method_specific") return MethodCategory::method_specific;
    if (name == "ineffective") return MethodCategory::ineffective;
    throw std::invalid_argument("unknown method category: " + name);
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    throw std::logic_error("to_string: bad Split");
}

std::string to_string(AuxSource s) {
    switch (s) {
        case AuxSource::identity: return "identity";
        case AuxSource::random: return "random";
        case AuxSource::shuffled: return "shuffled";
    }
    throw std::logic_error("to_string: bad AuxSource");
}

AuxSource aux_source_from_string(const std::string& name) {
    if (name == "identity") return AuxSource::identity;
    if (name == "random") return AuxSource::random;
    if (name == "shuffled") return AuxSource::shuffled;
    throw std::invalid_argument("unknown aux source: " + name);
}

namespace {

Vector random_unit(Rng& rng, std::size_t dim) {
    Vector v(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (double& x : v) {
            x = rng.gauss();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

void subtract_projection(Vector& v, const Vector& onto) {
    const double d = dot(v, onto);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * onto[i];
}

void normalize(Vector& v) {
    const double n = std::sqrt(dot(v, v));
    for (double& x : v) x /= n;
}

Vector unit_orthogonal_to(Rng& rng, const std::vector<const Vector*>& basis, std::size_t dim) {
    Vector v = random_unit(rng, dim);
    for (const Vector* b : basis) subtract_projection(v, *b);
    normalize(v);
    return v;
}

}  // namespace

BenchmarkSpec default_benchmark(std::uint64_t seed) {
    return default_benchmark(seed, BenchmarkSpec{}.d_id, BenchmarkSpec{}.d_backbone);
}

BenchmarkSpec default_benchmark(std::uint64_t seed, std::size_t d_id, std::size_t d_backbone) {
    BenchmarkSpec spec;
    spec.seed = seed;
    spec.d_id = d_id;
    spec.d_backbone = d_backbone;

    Rng rng(derive_seed(seed, 0xd14));

    // Identity-shift directions: the transferable pair shares one direction
    // up to a small perturbation; the method-specific and ineffective ones
    // sit orthogonal to it.
    const Vector shared = random_unit(rng, spec.d_id);
    const Vector perp = unit_orthogonal_to(rng, {&shared}, spec.d_id);
    Vector dir_b(spec.d_id);
    for (std::size_t i = 0; i < spec.d_id; ++i) dir_b[i] = shared[i] + 0.30 * perp[i];
    normalize(dir_b);  // cos(shared, dir_b) ~ 0.958
    const Vector dir_c = unit_orthogonal_to(rng, {&shared, &perp}, spec.d_id);
    const Vector dir_d = unit_orthogonal_to(rng, {&shared, &perp, &dir_c}, spec.d_id);

    // Visual artifact directions: one component shared by all methods (the
    // generic forgery trace) plus an orthonormal method-specific component.
    const Vector vis_shared = random_unit(rng, spec.d_backbone);
    std::vector<Vector> vis_specific;
    vis_specific.reserve(4);
    std::vector<const Vector*> vis_basis{&vis_shared};
    for (int m = 0; m < 4; ++m) {
        vis_specific.push_back(unit_orthogonal_to(rng, vis_basis, spec.d_backbone));
        vis_basis.push_back(&vis_specific.back());
    }
    const auto mix_vis = [&](const Vector& specific, double shared_frac) {
        Vector v(spec.d_backbone);
        const double a = std::sqrt(shared_frac);
        const double b = std::sqrt(1.0 - shared_frac);
        for (std::size_t i = 0; i < spec.d_backbone; ++i) {
            v[i] = a * vis_shared[i] + b * specific[i];
        }
        return v;
    };

    // Strengths are calibration constants fixed after probing the generator;
    // they position the identity probe inside the documented AUC bands.
    const auto make = [](std::string name, std::uint8_t tag, MethodCategory cat, Vector id_dir,
                         double id_strength, double id_noise, Vector vis_dir, double vis_strength,
                         double vis_noise) {
        MethodSpec m;
        m.name = std::move(name);
        m.tag = tag;
        m.category = cat;
        m.id_shift_dir = std::move(id_dir);
        m.id_shift_strength = id_strength;
        m.id_noise = id_noise;
        m.vis_artifact_dir = std::move(vis_dir);
        m.vis_artifact_strength = vis_strength;
        m.vis_noise = vis_noise;
        return m;
    };

    spec.methods.push_back(make("transfer_a", 0, MethodCategory::transferable, shared, 3.4, 0.25,
                                mix_vis(vis_specific[0], 0.5), 1.5, 0.5));
    spec.methods.push_back(make("transfer_b", 1, MethodCategory::transferable, dir_b, 3.2, 0.25,
                                mix_vis(vis_specific[1], 0.5), 1.5, 0.5));
    spec.methods.push_back(make("specific", 2, MethodCategory::method_specific, dir_c, 3.0, 0.25,
                                mix_vis(vis_specific[2], 0.5), 1.6, 0.5));
    spec.methods.push_back(make("weak_id", 3, MethodCategory::ineffective, dir_d, 0.3, 2.0,
                                mix_vis(vis_specific[3], 0.5), 1.7, 0.5));

    // Unseen test-only methods, the analogue of cross-dataset targets: a
    // swap family whose identity shifts stay near the shared direction
    // (identity cues transfer) plus one heavy-noise method where they are
    // useless. Their visual artifacts lean more on fresh geometry, so
    // visual-only transfer is weaker than in-domain.
    std::vector<Vector> u_vis;
    u_vis.reserve(4);
    for (int m = 0; m < 4; ++m) {
        u_vis.push_back(unit_orthogonal_to(rng, vis_basis, spec.d_backbone));
        vis_basis.push_back(&u_vis.back());
    }
    const auto tilt = [&](double off_axis) {
        Vector fresh = unit_orthogonal_to(rng, {&shared}, spec.d_id);
        Vector v(spec.d_id);
        for (std::size_t i = 0; i < spec.d_id; ++i) {
            v[i] = shared[i] + off_axis * fresh[i];
        }
        normalize(v);
        return v;
    };
    const double unseen_vis_frac = 0.35;
    spec.unseen_methods.push_back(make("u_swap_a", 4, MethodCategory::transferable, tilt(0.40),
                                       3.4, 0.30, mix_vis(u_vis[0], unseen_vis_frac), 1.1, 0.5));
    spec.unseen_methods.push_back(make("u_swap_b", 5, MethodCategory::transferable, tilt(0.55),
                                       3.2, 0.35, mix_vis(u_vis[1], unseen_vis_frac), 1.1, 0.5));
    spec.unseen_methods.push_back(make("u_swap_c", 6, MethodCategory::transferable, tilt(0.70),
                                       3.0, 0.40, mix_vis(u_vis[2], unseen_vis_frac), 1.1, 0.5));
    // Anti-aligned identity artifacts: the embedding moves against the
    // familiar swap direction, so statically fused identity evidence
    // misleads while the gate can discount it.
    Vector inverted = unit_orthogonal_to(rng, {&shared}, spec.d_id);
    for (std::size_t i = 0; i < spec.d_id; ++i) {
        inverted[i] = 0.55 * inverted[i] - shared[i];
    }
    normalize(inverted);
    spec.unseen_methods.push_back(make("u_inverted", 7, MethodCategory::method_specific,
                                       inverted, 3.2, 0.30,
                                       mix_vis(u_vis[3], unseen_vis_frac), 1.5, 0.5));
    return spec;
}

BenchmarkSpec unseen_view(const BenchmarkSpec& spec) {
    if (spec.unseen_methods.empty()) {
        throw DataError("unseen_view: spec carries no unseen methods");
    }
    BenchmarkSpec out = spec;
    out.methods = spec.unseen_methods;
    out.unseen_methods.clear();
    return out;
}

namespace {

constexpr std::uint64_t split_salt(Split s) {
    switch (s) {
        case Split::train: return 1;
        case Split::val: return 2;
        case Split::test: return 3;
    }
    return 0;
}

void add_gauss(Vector& v, Rng& rng, double scale) {
    for (double& x : v) x += scale * rng.gauss();
}

}  // namespace

EmbeddingDataset sample_dataset(const BenchmarkSpec& spec, std::size_t n_real_per_method,
                                std::size_t n_fake_per_method, Split split) {
    if (spec.methods.empty()) throw DataError("sample_dataset: spec has no methods");
    if (n_real_per_method < 1 || n_fake_per_method < 1) {
        throw DataError("sample_dataset: counts must be >= 1");
    }

    EmbeddingDataset ds;
    ds.d_id = spec.d_id;
    ds.d_backbone = spec.d_backbone;
    ds.has_groups = true;
    ds.provenance = "synth:seed=" + std::to_string(spec.seed) + ":split=" + to_string(split);
    ds.samples.reserve(spec.methods.size() * (n_real_per_method + n_fake_per_method));

    const std::uint64_t salt = split_salt(split);

    // Identity cluster centers: fresh per split (unseen test identities),
    // shared by every method within the split (one real pipeline).
    Rng center_rng(derive_seed(spec.seed, salt, 0xce));
    std::vector<Vector> centers(spec.n_identities);
    for (Vector& c : centers) {
        c.assign(spec.d_id, 0.0);
        add_gauss(c, center_rng, 1.0);
    }

    const double vis_frame_scale =
        std::sqrt(std::max(0.0, 1.0 - spec.vis_video_scale * spec.vis_video_scale));
    std::uint32_t next_group = 0;

    const auto emit_block = [&](const MethodSpec& method, std::size_t count, bool fake,
                                Rng& rng) {
        std::size_t emitted = 0;
        while (emitted < count) {
            // One latent draw per video; frames jitter around it.
            const std::size_t identity = static_cast<std::size_t>(rng.next_u64() % centers.size());
            Vector id_latent = centers[identity];
            add_gauss(id_latent, rng, spec.id_within_noise);
            Vector vis_latent(spec.d_backbone, 0.0);
            add_gauss(vis_latent, rng, spec.vis_video_scale);

            const std::uint32_t group = next_group++;
            const std::size_t frames = std::min(spec.group_size, count - emitted);
            for (std::size_t f = 0; f < frames; ++f) {
                Sample s;
                s.method = method.tag;
                s.group = group;
                s.y = fake ? 1 : 0;
                s.f_id = id_latent;
                add_gauss(s.f_id, rng, spec.id_frame_jitter);
                s.f_vis = vis_latent;
                add_gauss(s.f_vis, rng, vis_frame_scale);
                if (fake) {
                    for (std::size_t i = 0; i < spec.d_id; ++i) {
                        s.f_id[i] += method.id_shift_strength * method.id_shift_dir[i];
                    }
                    add_gauss(s.f_id, rng, method.id_noise);
                    for (std::size_t i = 0; i < spec.d_backbone; ++i) {
                        s.f_vis[i] += method.vis_artifact_strength * method.vis_artifact_dir[i];
                    }
                    add_gauss(s.f_vis, rng, method.vis_noise);
                }
                ds.samples.push_back(std::move(s));
                ++emitted;
            }
        }
    };

    for (const MethodSpec& method : spec.methods) {
        Rng real_rng(derive_seed(spec.seed, salt, (std::uint64_t{method.tag} << 8) | 0x0));
        emit_block(method, n_real_per_method, false, real_rng);
        Rng fake_rng(derive_seed(spec.seed, salt, (std::uint64_t{method.tag} << 8) | 0x1));
        emit_block(method, n_fake_per_method, true, fake_rng);
    }
    return ds;
}

EmbeddingDataset aux_source_swap(const EmbeddingDataset& ds, AuxSource source,
                                 std::uint64_t seed) {
    if (source == AuxSource::identity) return ds;

    EmbeddingDataset out = ds;
    Rng rng(derive_seed(seed, 0xa5));
    if (source == AuxSource::random) {
        for (Sample& s : out.samples) {
            for (double& x : s.f_id) x = rng.gauss();
        }
        out.provenance += ":aux=random";
        return out;
    }

    // shuffled: permute the f_id rows across samples.
    std::vector<std::size_t> perm(out.samples.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        out.samples[i].f_id = ds.samples[perm[i]].f_id;
    }
    out.provenance += ":aux=shuffled";
    return out;
}

}  // namespace selfi
