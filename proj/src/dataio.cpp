#include "selfi/dataio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "selfi/errors.hpp"
#include "selfi/optim.hpp"

namespace selfi {

namespace {

using json = nlohmann::json;

constexpr char kDatasetMagic[8] = {'S', 'E', 'L', 'F', 'I', 'E', 'M', 'B'};
constexpr char kCheckpointMagic[8] = {'S', 'E', 'L', 'F', 'I', 'C', 'K', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

// All multi-byte integers little-endian; floats stored as IEEE binary32.
class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f32(double v) {
        const float f = static_cast<float>(v);
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, 4);
        u32(bits);
    }
    void bytes(const char* data, std::size_t n) { buf_.insert(buf_.end(), data, data + n); }

    void dump(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + path.string());
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw DataError("write failed: " + path.string());
    }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(const std::filesystem::path& path) : path_(path.string()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open for reading: " + path_);
        in.seekg(0, std::ios::end);
        buf_.resize(static_cast<std::size_t>(in.tellg()));
        in.seekg(0);
        in.read(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!in) throw DataError("read failed: " + path_);
    }

    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw DataError("truncated file: " + path_);
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= std::uint16_t(std::uint8_t(buf_[pos_++])) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf_[pos_++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf_[pos_++])) << (8 * i);
        return v;
    }
    double f32() {
        const std::uint32_t bits = u32();
        float f = 0.0f;
        std::memcpy(&f, &bits, 4);
        return static_cast<double>(f);
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == buf_.size(); }
    std::uint64_t remaining() const { return buf_.size() - pos_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

void check_magic(Reader& r, const char (&magic)[8], const char* kind) {
    const std::string got = r.str(8);
    if (std::memcmp(got.data(), magic, 8) != 0) {
        throw DataError(std::string("bad magic in ") + kind + " file: " + r.path());
    }
}

}  // namespace

void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& path) {
    Writer w;
    w.bytes(kDatasetMagic, 8);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(ds.d_id));
    w.u32(static_cast<std::uint32_t>(ds.d_backbone));
    w.u64(ds.samples.size());
    w.u32(ds.has_groups ? 1u : 0u);
    for (int i = 0; i < 12; ++i) w.u8(0);

    for (const Sample& s : ds.samples) {
        if (s.f_id.size() != ds.d_id || s.f_vis.size() != ds.d_backbone) {
            throw DataError("write_dataset: sample width does not match dataset dims");
        }
        w.u8(static_cast<std::uint8_t>(s.y));
        w.u8(s.method);
        w.u16(0);
        if (ds.has_groups) w.u32(s.group);
        for (double v : s.f_id) w.f32(v);
        for (double v : s.f_vis) w.f32(v);
    }
    w.dump(path);
}

EmbeddingDataset read_dataset(const std::filesystem::path& path, const ReadOptions& opts) {
    Reader r(path);
    check_magic(r, kDatasetMagic, "dataset");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw DataError("unsupported dataset version " + std::to_string(version) + " in " +
                        r.path());
    }
    EmbeddingDataset ds;
    ds.d_id = r.u32();
    ds.d_backbone = r.u32();
    if (ds.d_id == 0 || ds.d_backbone == 0) {
        throw DataError("dimension mismatch: zero embedding width in " + r.path());
    }
    const std::uint64_t count = r.u64();
    const std::uint32_t flags = r.u32();
    for (int i = 0; i < 12; ++i) r.u8();
    ds.has_groups = (flags & 1u) != 0;

    const std::uint64_t scalars = count * (ds.d_id + ds.d_backbone);
    if (scalars > opts.max_scalars) {
        throw DataError("dataset too large: " + std::to_string(scalars) +
                        " scalars exceeds cap of " + std::to_string(opts.max_scalars));
    }
    // Validate the declared count against the actual file size before any
    // allocation depends on it.
    const std::uint64_t record_bytes =
        4 + (ds.has_groups ? 4 : 0) + 4 * (ds.d_id + ds.d_backbone);
    if (count * record_bytes != r.remaining()) {
        throw DataError("truncated file: " + r.path() + " declares " + std::to_string(count) +
                        " records but holds " + std::to_string(r.remaining()) + " payload bytes");
    }

    ds.samples.resize(count);
    for (Sample& s : ds.samples) {
        const std::uint8_t label = r.u8();
        if (label > 1) throw DataError("bad label " + std::to_string(label) + " in " + r.path());
        s.y = label;
        s.method = r.u8();
        r.u16();  // pad
        s.group = ds.has_groups ? r.u32() : 0;
        s.f_id.resize(ds.d_id);
        for (double& v : s.f_id) v = r.f32();
        s.f_vis.resize(ds.d_backbone);
        for (double& v : s.f_vis) v = r.f32();
    }
    ds.provenance = "file:" + path.filename().string();
    return ds;
}

namespace {

json train_config_to_json(const TrainConfig& tc) {
    return json{
        {"lr", tc.lr},
        {"beta1", tc.beta1},
        {"beta2", tc.beta2},
        {"eps", tc.eps},
        {"weight_decay", tc.weight_decay},
        {"batch_size", tc.batch_size},
        {"epochs", tc.epochs},
        {"seed", tc.seed},
        {"standardize", tc.standardize},
        {"alpha", tc.model.alpha},
        {"beta", tc.model.beta},
    };
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig tc;
    tc.lr = j.at("lr").get<double>();
    tc.beta1 = j.at("beta1").get<double>();
    tc.beta2 = j.at("beta2").get<double>();
    tc.eps = j.at("eps").get<double>();
    tc.weight_decay = j.at("weight_decay").get<double>();
    tc.batch_size = j.at("batch_size").get<std::size_t>();
    tc.epochs = j.at("epochs").get<std::size_t>();
    tc.seed = j.at("seed").get<std::uint64_t>();
    tc.standardize = j.at("standardize").get<bool>();
    tc.model.alpha = j.at("alpha").get<double>();
    tc.model.beta = j.at("beta").get<double>();
    return tc;
}

}  // namespace

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    json header;
    header["dims"] = {{"d_id", ck.config.model.dims.d_id},
                      {"d_backbone", ck.config.model.dims.d_backbone},
                      {"h_rel", ck.config.model.dims.h_rel}};
    header["mode"] = to_string(ck.config.model.mode);
    header["hyperparameters"] = train_config_to_json(ck.config);
    header["best_val_auc"] = ck.best_val_auc;
    header["epoch_of_best"] = ck.epoch_of_best;
    json hist = json::array();
    for (const EpochStats& e : ck.history) {
        hist.push_back({{"train_loss", e.train_loss},
                        {"train_acc", e.train_acc},
                        {"val_auc", e.val_auc}});
    }
    header["history"] = hist;
    const std::string header_text = header.dump();

    Writer w;
    w.bytes(kCheckpointMagic, 8);
    w.u32(kFormatVersion);
    w.u64(header_text.size());
    w.bytes(header_text.data(), header_text.size());

    visit_tensors(ck.params, [&](const char* name, const std::vector<double>& data,
                                 std::size_t rows, std::size_t cols) {
        const std::string n(name);
        w.u32(static_cast<std::uint32_t>(n.size()));
        w.bytes(n.data(), n.size());
        w.u32(static_cast<std::uint32_t>(rows));
        w.u32(static_cast<std::uint32_t>(cols));
        for (double v : data) w.f32(v);
    });
    w.dump(path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const ReadOptions& opts) {
    Reader r(path);
    check_magic(r, kCheckpointMagic, "checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version) + " in " +
                        r.path());
    }
    const std::uint64_t header_len = r.u64();
    if (header_len > opts.max_scalars || header_len > r.remaining()) {
        throw DataError("truncated file: checkpoint header length exceeds " + r.path());
    }
    json header;
    try {
        header = json::parse(r.str(static_cast<std::size_t>(header_len)));
    } catch (const json::parse_error& e) {
        throw DataError("corrupt checkpoint header: " + std::string(e.what()));
    }

    Checkpoint ck;
    try {
        ck.config = train_config_from_json(header.at("hyperparameters"));
        ck.config.model.mode = mode_from_string(header.at("mode").get<std::string>());
        const json& dims = header.at("dims");
        ck.config.model.dims.d_id = dims.at("d_id").get<std::size_t>();
        ck.config.model.dims.d_backbone = dims.at("d_backbone").get<std::size_t>();
        ck.config.model.dims.h_rel = dims.at("h_rel").get<std::size_t>();
        ck.best_val_auc = header.at("best_val_auc").get<double>();
        ck.epoch_of_best = header.at("epoch_of_best").get<std::size_t>();
        for (const json& e : header.at("history")) {
            EpochStats stats;
            stats.train_loss = e.at("train_loss").get<double>();
            stats.train_acc = e.at("train_acc").get<double>();
            stats.val_auc = e.at("val_auc").get<double>();
            ck.history.push_back(stats);
        }
    } catch (const json::exception& e) {
        throw DataError("corrupt checkpoint header: " + std::string(e.what()));
    }

    // Expected tensor set and shapes follow from (mode, dims); read blocks
    // in the fixed order and validate.
    SelfiParams expected = params_shell(ck.config.model);
    visit_tensors(expected, [&](const char* name, std::vector<double>& data, std::size_t rows,
                                std::size_t cols) {
        const std::uint32_t name_len = r.u32();
        const std::string got_name = r.str(name_len);
        if (got_name != name) {
            throw DataError("checkpoint tensor order mismatch: expected " + std::string(name) +
                            ", got " + got_name);
        }
        const std::uint32_t got_rows = r.u32();
        const std::uint32_t got_cols = r.u32();
        if (got_rows != rows || got_cols != cols) {
            throw DataError("checkpoint shape mismatch for " + got_name + ": expected " +
                            std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                            std::to_string(got_rows) + "x" + std::to_string(got_cols));
        }
        for (double& v : data) v = r.f32();
    });
    if (!r.at_end()) throw DataError("trailing bytes in checkpoint: " + r.path());
    ck.params = expected;
    return ck;
}

StandardizerStats fit_standardizer(const EmbeddingDataset& train_split) {
    if (train_split.empty()) throw DataError("fit_standardizer: empty split");
    const double n = static_cast<double>(train_split.size());

    const auto fit = [&](std::size_t width, auto&& field) {
        Vector mean(width, 0.0), sd(width, 0.0);
        for (const Sample& s : train_split.samples) {
            const Vector& v = field(s);
            for (std::size_t i = 0; i < width; ++i) mean[i] += v[i];
        }
        for (double& m : mean) m /= n;
        for (const Sample& s : train_split.samples) {
            const Vector& v = field(s);
            for (std::size_t i = 0; i < width; ++i) {
                const double d = v[i] - mean[i];
                sd[i] += d * d;
            }
        }
        for (double& v : sd) v = std::sqrt(v / n);
        return std::pair<Vector, Vector>(std::move(mean), std::move(sd));
    };

    StandardizerStats stats;
    auto [im, is] = fit(train_split.d_id, [](const Sample& s) -> const Vector& { return s.f_id; });
    stats.id_mean = std::move(im);
    stats.id_std = std::move(is);
    auto [vm, vs] =
        fit(train_split.d_backbone, [](const Sample& s) -> const Vector& { return s.f_vis; });
    stats.vis_mean = std::move(vm);
    stats.vis_std = std::move(vs);
    return stats;
}

EmbeddingDataset apply_standardizer(const StandardizerStats& stats, const EmbeddingDataset& ds) {
    EmbeddingDataset out = ds;
    const auto apply = [](Vector& v, const Vector& mean, const Vector& sd) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (sd[i] >= 1e-12) v[i] = (v[i] - mean[i]) / sd[i];
        }
    };
    for (Sample& s : out.samples) {
        apply(s.f_id, stats.id_mean, stats.id_std);
        apply(s.f_vis, stats.vis_mean, stats.vis_std);
    }
    return out;
}

EmbeddingDataset subset_by_method(const EmbeddingDataset& ds, std::uint8_t tag) {
    EmbeddingDataset out;
    out.d_id = ds.d_id;
    out.d_backbone = ds.d_backbone;
    out.has_groups = ds.has_groups;
    out.provenance = ds.provenance + ":method=" + std::to_string(tag);
    for (const Sample& s : ds.samples) {
        if (s.method == tag) out.samples.push_back(s);
    }
    return out;
}

EmbeddingDataset concat_datasets(const std::vector<const EmbeddingDataset*>& parts) {
    if (parts.empty()) throw DataError("concat_datasets: nothing to concatenate");
    EmbeddingDataset out;
    out.d_id = parts[0]->d_id;
    out.d_backbone = parts[0]->d_backbone;
    out.has_groups = parts[0]->has_groups;
    out.provenance = "concat";
    std::uint32_t group_offset = 0;
    for (const EmbeddingDataset* p : parts) {
        if (p->d_id != out.d_id || p->d_backbone != out.d_backbone ||
            p->has_groups != out.has_groups) {
            throw DataError("concat_datasets: incompatible parts");
        }
        std::uint32_t max_group = 0;
        for (const Sample& s : p->samples) {
            Sample copy = s;
            copy.group += group_offset;
            max_group = std::max(max_group, copy.group);
            out.samples.push_back(std::move(copy));
        }
        group_offset = p->samples.empty() ? group_offset : max_group + 1;
    }
    return out;
}

}  // namespace selfi
