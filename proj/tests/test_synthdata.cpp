#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "selfi/metrics.hpp"
#include "selfi/optim.hpp"
#include "selfi/rng.hpp"
#include "selfi/synthdata.hpp"

using namespace selfi;

namespace {

double cosine(const Vector& a, const Vector& b) {
    return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

bool datasets_bits_equal(const EmbeddingDataset& a, const EmbeddingDataset& b) {
    if (a.size() != b.size() || a.d_id != b.d_id || a.d_backbone != b.d_backbone) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Sample& x = a.samples[i];
        const Sample& y = b.samples[i];
        if (x.y != y.y || x.method != y.method || x.group != y.group) return false;
        if (std::memcmp(x.f_id.data(), y.f_id.data(), x.f_id.size() * sizeof(double)) != 0) {
            return false;
        }
        if (std::memcmp(x.f_vis.data(), y.f_vis.data(), x.f_vis.size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

TrainConfig fast_probe_tc(const BenchmarkSpec& spec, std::uint64_t seed) {
    TrainConfig tc;
    tc.seed = seed;
    tc.lr = 0.02;
    tc.epochs = 8;
    tc.model.mode = Mode::identity_probe;
    tc.model.dims = {spec.d_id, spec.d_backbone, 16};
    return tc;
}

double probe_auc(const EmbeddingDataset& train_set, const EmbeddingDataset& val_set,
                 const EmbeddingDataset& test_set, const TrainConfig& tc) {
    const Checkpoint ck = train(train_set, val_set, tc);
    ScoredSet scored;
    scored.scores = score_dataset(ck.params, test_set, tc.model);
    for (const Sample& s : test_set.samples) scored.labels.push_back(s.y);
    return roc_auc(scored);
}

}  // namespace

TEST_CASE("default_benchmark is deterministic in the seed") {
    const BenchmarkSpec a = default_benchmark(5);
    const BenchmarkSpec b = default_benchmark(5);
    REQUIRE(a.methods.size() == 4);
    for (std::size_t m = 0; m < 4; ++m) {
        CHECK(a.methods[m].name == b.methods[m].name);
        CHECK(a.methods[m].id_shift_strength == b.methods[m].id_shift_strength);
        CHECK(std::memcmp(a.methods[m].id_shift_dir.data(), b.methods[m].id_shift_dir.data(),
                          a.d_id * sizeof(double)) == 0);
    }
    const BenchmarkSpec c = default_benchmark(6);
    CHECK(std::memcmp(a.methods[0].id_shift_dir.data(), c.methods[0].id_shift_dir.data(),
                      a.d_id * sizeof(double)) != 0);
}

TEST_CASE("default_benchmark geometry matches the category constraints") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const BenchmarkSpec spec = default_benchmark(seed);
        const MethodSpec* transfer_a = nullptr;
        const MethodSpec* transfer_b = nullptr;
        const MethodSpec* specific = nullptr;
        const MethodSpec* weak = nullptr;
        for (const MethodSpec& m : spec.methods) {
            if (m.name == "transfer_a") transfer_a = &m;
            if (m.name == "transfer_b") transfer_b = &m;
            if (m.name == "specific") specific = &m;
            if (m.name == "weak_id") weak = &m;
        }
        REQUIRE(transfer_a);
        REQUIRE(transfer_b);
        REQUIRE(specific);
        REQUIRE(weak);

        CHECK(transfer_a->category == MethodCategory::transferable);
        CHECK(transfer_b->category == MethodCategory::transferable);
        CHECK(specific->category == MethodCategory::method_specific);
        CHECK(weak->category == MethodCategory::ineffective);

        // Unit directions.
        for (const MethodSpec& m : spec.methods) {
            CHECK(std::abs(dot(m.id_shift_dir, m.id_shift_dir) - 1.0) < 1e-9);
            CHECK(std::abs(dot(m.vis_artifact_dir, m.vis_artifact_dir) - 1.0) < 1e-9);
        }

        CHECK(cosine(transfer_a->id_shift_dir, transfer_b->id_shift_dir) >= 0.9);
        CHECK(std::abs(cosine(specific->id_shift_dir, transfer_a->id_shift_dir)) <= 0.1);
        CHECK(weak->id_shift_strength <= 0.5);
        CHECK(weak->id_noise >= transfer_a->id_noise);
    }
}

TEST_CASE("sample_dataset is a pure function of its inputs") {
    const BenchmarkSpec spec = default_benchmark(1);
    const EmbeddingDataset a = sample_dataset(spec, 24, 24, Split::train);
    const EmbeddingDataset b = sample_dataset(spec, 24, 24, Split::train);
    CHECK(datasets_bits_equal(a, b));

    const EmbeddingDataset c = sample_dataset(spec, 24, 24, Split::val);
    CHECK_FALSE(datasets_bits_equal(a, c));
}

TEST_CASE("sample_dataset: exact label counts and video-group structure") {
    const BenchmarkSpec spec = default_benchmark(2);
    const EmbeddingDataset ds = sample_dataset(spec, 21, 13, Split::test);
    REQUIRE(ds.size() == 4 * (21 + 13));
    CHECK(ds.has_groups);

    for (const MethodSpec& m : spec.methods) {
        std::size_t reals = 0, fakes = 0;
        for (const Sample& s : ds.samples) {
            if (s.method != m.tag) continue;
            (s.y == 1 ? fakes : reals) += 1;
        }
        CHECK(reals == 21);
        CHECK(fakes == 13);
    }

    // Groups are uniform in label and method, at most group_size large.
    std::map<std::uint32_t, std::size_t> group_sizes;
    std::map<std::uint32_t, std::pair<int, int>> group_ident;  // (label, method)
    for (const Sample& s : ds.samples) {
        group_sizes[s.group] += 1;
        const auto it = group_ident.find(s.group);
        if (it == group_ident.end()) {
            group_ident[s.group] = {s.y, s.method};
        } else {
            CHECK(it->second.first == s.y);
            CHECK(it->second.second == s.method);
        }
    }
    for (const auto& [g, size] : group_sizes) CHECK(size <= spec.group_size);
}

TEST_CASE("splits share no vectors") {
    const BenchmarkSpec spec = default_benchmark(3);
    const EmbeddingDataset train_set = sample_dataset(spec, 16, 16, Split::train);
    const EmbeddingDataset test_set = sample_dataset(spec, 16, 16, Split::test);
    std::set<std::string> train_rows;
    for (const Sample& s : train_set.samples) {
        train_rows.insert(std::string(reinterpret_cast<const char*>(s.f_id.data()),
                                      s.f_id.size() * sizeof(double)));
    }
    for (const Sample& s : test_set.samples) {
        CHECK(train_rows.count(std::string(reinterpret_cast<const char*>(s.f_id.data()),
                                           s.f_id.size() * sizeof(double))) == 0);
    }
}

TEST_CASE("zero identity signal drives the probe to chance") {
    BenchmarkSpec spec = default_benchmark(4);
    for (MethodSpec& m : spec.methods) {
        m.id_shift_strength = 0.0;
        m.id_noise = 0.0;
    }
    const EmbeddingDataset train_all = sample_dataset(spec, 250, 250, Split::train);
    const EmbeddingDataset val_all = sample_dataset(spec, 60, 60, Split::val);
    const EmbeddingDataset test_all = sample_dataset(spec, 250, 250, Split::test);
    const double auc =
        probe_auc(train_all, val_all, test_all, fast_probe_tc(spec, 0));
    CHECK(auc > 0.45);
    CHECK(auc < 0.55);
}

TEST_CASE("real samples are identically distributed across methods") {
    const BenchmarkSpec spec = default_benchmark(5);
    const EmbeddingDataset train_all = sample_dataset(spec, 500, 1, Split::train);
    const EmbeddingDataset test_all = sample_dataset(spec, 500, 1, Split::test);

    // Label real samples by "came from method 0 vs method 1".
    const auto relabel = [&](const EmbeddingDataset& src) {
        EmbeddingDataset out;
        out.d_id = src.d_id;
        out.d_backbone = src.d_backbone;
        for (const Sample& s : src.samples) {
            if (s.y == 1 || s.method > 1) continue;
            Sample copy = s;
            copy.y = s.method;  // method-0 reals vs method-1 reals
            out.samples.push_back(std::move(copy));
        }
        return out;
    };
    const EmbeddingDataset train_set = relabel(train_all);
    const EmbeddingDataset test_set = relabel(test_all);
    const double auc = probe_auc(train_set, train_set, test_set, fast_probe_tc(spec, 1));
    CHECK(auc > 0.45);
    CHECK(auc < 0.55);
}

TEST_CASE("transferable probe carries across the pair") {
    std::vector<double> in_domain, cross;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const BenchmarkSpec spec = default_benchmark(30 + seed);
        const EmbeddingDataset train_all = sample_dataset(spec, 320, 320, Split::train);
        const EmbeddingDataset val_all = sample_dataset(spec, 96, 96, Split::val);
        const EmbeddingDataset test_all = sample_dataset(spec, 256, 256, Split::test);

        const EmbeddingDataset train_a = subset_by_method(train_all, 0);
        const EmbeddingDataset val_a = subset_by_method(val_all, 0);
        const TrainConfig tc = fast_probe_tc(spec, seed);
        const Checkpoint ck = train(train_a, val_a, tc);

        const auto eval_on = [&](std::uint8_t tag) {
            const EmbeddingDataset subset = subset_by_method(test_all, tag);
            ScoredSet scored;
            scored.scores = score_dataset(ck.params, subset, tc.model);
            for (const Sample& s : subset.samples) scored.labels.push_back(s.y);
            return roc_auc(scored);
        };
        in_domain.push_back(eval_on(0));
        cross.push_back(eval_on(1));
    }
    std::sort(in_domain.begin(), in_domain.end());
    std::sort(cross.begin(), cross.end());
    CHECK(in_domain[1] - cross[1] <= 0.15);  // medians of 3 seeds
}

TEST_CASE("aux_source_swap") {
    const BenchmarkSpec spec = default_benchmark(6);
    const EmbeddingDataset ds = sample_dataset(spec, 40, 40, Split::train);

    SUBCASE("identity is bitwise identical") {
        CHECK(datasets_bits_equal(aux_source_swap(ds, AuxSource::identity), ds));
    }

    SUBCASE("random decorrelates from the original identities") {
        // Concentration at width 512: mean |cos| stays near 2/sqrt(2 pi d).
        BenchmarkSpec wide = default_benchmark(7, 512, 96);
        const EmbeddingDataset big = sample_dataset(wide, 50, 50, Split::train);
        const EmbeddingDataset swapped = aux_source_swap(big, AuxSource::random, 1);
        double mean_abs_cos = 0.0;
        for (std::size_t i = 0; i < big.size(); ++i) {
            mean_abs_cos += std::abs(cosine(big.samples[i].f_id, swapped.samples[i].f_id));
        }
        mean_abs_cos /= static_cast<double>(big.size());
        CHECK(mean_abs_cos <= 0.1);

        const EmbeddingDataset again = aux_source_swap(big, AuxSource::random, 1);
        CHECK(datasets_bits_equal(swapped, again));
    }

    SUBCASE("shuffled permutes the identity rows") {
        const EmbeddingDataset swapped = aux_source_swap(ds, AuxSource::shuffled, 2);
        const auto row_key = [](const Vector& v) {
            return std::string(reinterpret_cast<const char*>(v.data()),
                               v.size() * sizeof(double));
        };
        std::multiset<std::string> before, after;
        for (const Sample& s : ds.samples) before.insert(row_key(s.f_id));
        bool any_moved = false;
        for (std::size_t i = 0; i < swapped.size(); ++i) {
            after.insert(row_key(swapped.samples[i].f_id));
            any_moved = any_moved ||
                        row_key(swapped.samples[i].f_id) != row_key(ds.samples[i].f_id);
            // visual features and labels stay put
            CHECK(std::memcmp(swapped.samples[i].f_vis.data(), ds.samples[i].f_vis.data(),
                              ds.d_backbone * sizeof(double)) == 0);
            CHECK(swapped.samples[i].y == ds.samples[i].y);
        }
        CHECK(before == after);
        CHECK(any_moved);
    }
}
