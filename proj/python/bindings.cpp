#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "selfi/config.hpp"
#include "selfi/dataio.hpp"
#include "selfi/errors.hpp"
#include "selfi/experiments.hpp"
#include "selfi/grad.hpp"
#include "selfi/metrics.hpp"
#include "selfi/model.hpp"
#include "selfi/optim.hpp"
#include "selfi/synthdata.hpp"

namespace py = pybind11;
using namespace selfi;

namespace {

ScoredSet make_scored(const std::vector<double>& scores, const std::vector<int>& labels,
                      const std::vector<std::uint32_t>& groups) {
    ScoredSet s;
    s.scores = scores;
    s.labels = labels;
    if (!groups.empty()) {
        s.groups = groups;
        s.has_groups = true;
    }
    return s;
}

}  // namespace

PYBIND11_MODULE(_selfi, m) {
    m.doc() = "Selective identity fusion for deepfake detection (C++ core)";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    py::class_<Dims>(m, "Dims")
        .def(py::init<>())
        .def(py::init([](std::size_t d_id, std::size_t d_backbone, std::size_t h_rel) {
                 return Dims{d_id, d_backbone, h_rel};
             }),
             py::arg("d_id"), py::arg("d_backbone"), py::arg("h_rel"))
        .def_readwrite("d_id", &Dims::d_id)
        .def_readwrite("d_backbone", &Dims::d_backbone)
        .def_readwrite("h_rel", &Dims::h_rel);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_property(
            "mode", [](const ModelConfig& c) { return to_string(c.mode); },
            [](ModelConfig& c, const std::string& s) { c.mode = mode_from_string(s); })
        .def_readwrite("alpha", &ModelConfig::alpha)
        .def_readwrite("beta", &ModelConfig::beta)
        .def_readwrite("dims", &ModelConfig::dims);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("beta1", &TrainConfig::beta1)
        .def_readwrite("beta2", &TrainConfig::beta2)
        .def_readwrite("eps", &TrainConfig::eps)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("standardize", &TrainConfig::standardize)
        .def_readwrite("model", &TrainConfig::model);

    py::class_<Sample>(m, "Sample")
        .def(py::init<>())
        .def_readwrite("f_id", &Sample::f_id)
        .def_readwrite("f_vis", &Sample::f_vis)
        .def_readwrite("y", &Sample::y)
        .def_readwrite("method", &Sample::method)
        .def_readwrite("group", &Sample::group);

    py::class_<EmbeddingDataset>(m, "EmbeddingDataset")
        .def(py::init<>())
        .def_readwrite("d_id", &EmbeddingDataset::d_id)
        .def_readwrite("d_backbone", &EmbeddingDataset::d_backbone)
        .def_readwrite("has_groups", &EmbeddingDataset::has_groups)
        .def_readwrite("samples", &EmbeddingDataset::samples)
        .def_readonly("provenance", &EmbeddingDataset::provenance)
        .def("__len__", &EmbeddingDataset::size)
        .def("labels",
             [](const EmbeddingDataset& ds) {
                 std::vector<int> ys;
                 for (const Sample& s : ds.samples) ys.push_back(s.y);
                 return ys;
             })
        .def("groups", [](const EmbeddingDataset& ds) {
            std::vector<std::uint32_t> gs;
            for (const Sample& s : ds.samples) gs.push_back(s.group);
            return gs;
        });

    py::class_<SelfiParams>(m, "SelfiParams")
        .def("parameter_count",
             [](const SelfiParams& p) { return parameter_count(p); })
        .def("tensors", [](const SelfiParams& p) {
            py::dict out;
            visit_tensors(p, [&](const char* name, const std::vector<double>& data,
                                 std::size_t rows, std::size_t cols) {
                out[name] = py::make_tuple(rows, cols, data);
            });
            return out;
        });

    py::class_<ForwardTrace>(m, "ForwardTrace")
        .def_readonly("f_fi", &ForwardTrace::f_fi)
        .def_readonly("rho", &ForwardTrace::rho)
        .def_readonly("f_fused", &ForwardTrace::f_fused)
        .def_readonly("fag_logits", &ForwardTrace::fag_logits)
        .def_readonly("cls_logits", &ForwardTrace::cls_logits)
        .def_readonly("l_cls", &ForwardTrace::l_cls)
        .def_readonly("l_fag", &ForwardTrace::l_fag)
        .def_readonly("l_total", &ForwardTrace::l_total)
        .def("fake_score", &ForwardTrace::fake_score);

    py::class_<EpochStats>(m, "EpochStats")
        .def_readonly("train_loss", &EpochStats::train_loss)
        .def_readonly("train_acc", &EpochStats::train_acc)
        .def_readonly("val_auc", &EpochStats::val_auc);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("params", &Checkpoint::params)
        .def_readonly("best_val_auc", &Checkpoint::best_val_auc)
        .def_readonly("epoch_of_best", &Checkpoint::epoch_of_best)
        .def_readonly("history", &Checkpoint::history)
        .def_readonly("config", &Checkpoint::config);

    py::class_<MethodSpec>(m, "MethodSpec")
        .def_readwrite("name", &MethodSpec::name)
        .def_readwrite("tag", &MethodSpec::tag)
        .def_property(
            "category", [](const MethodSpec& s) { return to_string(s.category); },
            [](MethodSpec& s, const std::string& c) { s.category = category_from_string(c); })
        .def_readwrite("id_shift_strength", &MethodSpec::id_shift_strength)
        .def_readwrite("id_noise", &MethodSpec::id_noise)
        .def_readwrite("vis_artifact_strength", &MethodSpec::vis_artifact_strength)
        .def_readwrite("vis_noise", &MethodSpec::vis_noise)
        .def_readonly("id_shift_dir", &MethodSpec::id_shift_dir)
        .def_readonly("vis_artifact_dir", &MethodSpec::vis_artifact_dir);

    py::class_<BenchmarkSpec>(m, "BenchmarkSpec")
        .def_readwrite("d_id", &BenchmarkSpec::d_id)
        .def_readwrite("d_backbone", &BenchmarkSpec::d_backbone)
        .def_readwrite("n_identities", &BenchmarkSpec::n_identities)
        .def_readwrite("group_size", &BenchmarkSpec::group_size)
        .def_readwrite("seed", &BenchmarkSpec::seed)
        .def_readwrite("methods", &BenchmarkSpec::methods);

    py::class_<GradCheckReport>(m, "GradCheckReport")
        .def_readonly("ok", &GradCheckReport::pass)
        .def_readonly("max_rel_err", &GradCheckReport::max_rel_err)
        .def_readonly("worst_tensor", &GradCheckReport::worst_tensor)
        .def_readonly("worst_index", &GradCheckReport::worst_index);

    // core ops
    m.def("sigmoid", &sigmoid, py::arg("z"));
    m.def("cross_entropy", &cross_entropy, py::arg("logits"), py::arg("label"));
    m.def("relu", &relu, py::arg("x"));
    m.def("fuse", &fuse, py::arg("rho"), py::arg("f_fi"), py::arg("f_vis"));
    m.def("init_params", &init_params, py::arg("config"), py::arg("seed"));
    m.def("forward", &forward_any, py::arg("params"), py::arg("sample"), py::arg("config"));
    m.def("grad_check", &grad_check, py::arg("config"), py::arg("seed"),
          py::arg("tolerance") = 1e-5, py::arg("n_samples") = 3);

    // metrics
    m.def(
        "roc_auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return roc_auc(make_scored(scores, labels, {}));
        },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "accuracy",
        [](const std::vector<double>& scores, const std::vector<int>& labels, double thr) {
            return accuracy(make_scored(scores, labels, {}), thr);
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
    m.def(
        "video_auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels,
           const std::vector<std::uint32_t>& groups) {
            return video_auc(make_scored(scores, labels, groups));
        },
        py::arg("scores"), py::arg("labels"), py::arg("groups"));

    // benchmark
    m.def("default_benchmark", py::overload_cast<std::uint64_t>(&default_benchmark),
          py::arg("seed"));
    m.def(
        "sample_dataset",
        [](const BenchmarkSpec& spec, std::size_t n_real, std::size_t n_fake,
           const std::string& split) {
            Split s = Split::train;
            if (split == "val") s = Split::val;
            else if (split == "test") s = Split::test;
            else if (split != "train") throw ConfigError("split must be train, val or test");
            return sample_dataset(spec, n_real, n_fake, s);
        },
        py::arg("spec"), py::arg("n_real_per_method"), py::arg("n_fake_per_method"),
        py::arg("split"));
    m.def(
        "aux_source_swap",
        [](const EmbeddingDataset& ds, const std::string& source, std::uint64_t seed) {
            return aux_source_swap(ds, aux_source_from_string(source), seed);
        },
        py::arg("dataset"), py::arg("source"), py::arg("seed") = 0);

    // training / scoring
    m.def("train", &train, py::arg("train_set"), py::arg("val_set"), py::arg("config"));
    m.def("score_dataset", &score_dataset, py::arg("params"), py::arg("dataset"),
          py::arg("config"));

    // experiment orchestration
    py::class_<BenchmarkConfig>(m, "BenchmarkConfig")
        .def(py::init<>())
        .def_readwrite("spec", &BenchmarkConfig::spec)
        .def_readwrite("n_real_train", &BenchmarkConfig::n_real_train)
        .def_readwrite("n_fake_train", &BenchmarkConfig::n_fake_train)
        .def_readwrite("n_real_val", &BenchmarkConfig::n_real_val)
        .def_readwrite("n_fake_val", &BenchmarkConfig::n_fake_val)
        .def_readwrite("n_real_test", &BenchmarkConfig::n_real_test)
        .def_readwrite("n_fake_test", &BenchmarkConfig::n_fake_test);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("benchmark", &RunConfig::benchmark)
        .def_readwrite("train", &RunConfig::train)
        .def_readwrite("n_seeds", &RunConfig::n_seeds);

    py::class_<RhoStats>(m, "RhoStats")
        .def_readonly("all", &RhoStats::all)
        .def_readonly("real", &RhoStats::real)
        .def_readonly("fake", &RhoStats::fake);

    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("frame_auc", &EvalResult::frame_auc)
        .def_readonly("acc", &EvalResult::acc)
        .def_readonly("video_auc", &EvalResult::video_auc)
        .def_readonly("rho_by_method", &EvalResult::rho_by_method)
        .def_readonly("rho_by_label", &EvalResult::rho_by_label)
        .def_readonly("scores", &EvalResult::scores);

    py::class_<GridResult>(m, "GridResult")
        .def_readonly("methods", &GridResult::methods)
        .def("auc", [](const GridResult& g) {
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < g.methods.size(); ++i) {
                std::vector<double> row;
                for (std::size_t j = 0; j < g.methods.size(); ++j) row.push_back(g.auc.at(i, j));
                rows.push_back(std::move(row));
            }
            return rows;
        });

    py::class_<AblationResult>(m, "AblationResult")
        .def_property_readonly("modes",
                               [](const AblationResult& r) {
                                   std::vector<std::string> names;
                                   for (Mode mode : r.modes) names.push_back(to_string(mode));
                                   return names;
                               })
        .def_readonly("test_methods", &AblationResult::test_methods)
        .def_readonly("seeds", &AblationResult::seeds)
        .def_readonly("auc", &AblationResult::auc)
        .def_readonly("cross_mean", &AblationResult::cross_mean);

    py::class_<MixedRun>(m, "MixedRun")
        .def_readonly("checkpoint", &MixedRun::checkpoint)
        .def_readonly("eval", &MixedRun::eval);

    m.def("default_run_config", &default_run_config, py::arg("seed") = 0);
    m.def("run_grid", &run_grid, py::arg("config"), py::arg("threads") = 1);
    m.def(
        "run_ablation",
        [](const RunConfig& cfg, const std::string& aux, std::size_t threads) {
            return run_ablation(cfg, aux_source_from_string(aux), threads);
        },
        py::arg("config"), py::arg("aux_source") = "identity", py::arg("threads") = 1);
    m.def("run_mixed", &run_mixed, py::arg("config"), py::arg("seed"));
    m.def("unseen_view", &unseen_view, py::arg("spec"));

    // file formats
    m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
    m.def(
        "read_dataset",
        [](const std::filesystem::path& path) { return read_dataset(path); },
        py::arg("path"));
    m.def("write_checkpoint", &write_checkpoint, py::arg("checkpoint"), py::arg("path"));
    m.def(
        "read_checkpoint",
        [](const std::filesystem::path& path) { return read_checkpoint(path); },
        py::arg("path"));
}
