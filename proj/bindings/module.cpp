// Python bindings for the core operations: synthetic data generation, model
// construction/inference/training, cost accounting, metrics and tensor-file
// round trips. Arrays cross the boundary as numpy float32/float64.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "predformer/checkpoint.hpp"
#include "predformer/config.hpp"
#include "predformer/cost.hpp"
#include "predformer/data.hpp"
#include "predformer/metrics.hpp"
#include "predformer/presets.hpp"
#include "predformer/tensor_file.hpp"
#include "predformer/train.hpp"

namespace py = pybind11;
using namespace predformer;

namespace {

template <typename T>
Tensor<T> tensor_from_array(const py::array_t<T, py::array::c_style | py::array::forcecast>& arr) {
    Shape shape(arr.ndim());
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[static_cast<size_t>(i)] = arr.shape(i);
    std::vector<T> data(arr.data(), arr.data() + arr.size());
    return Tensor<T>(std::move(shape), std::move(data));
}

template <typename T>
py::array_t<T> array_from_tensor(const Tensor<T>& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<T> arr(shape);
    std::copy(t.data().begin(), t.data().end(), arr.mutable_data());
    return arr;
}

ModelConfig config_from_kwargs(const std::string& variant, int64_t layers, int64_t t_in, int64_t t_out,
                               int64_t channels, int64_t height, int64_t width, int64_t patch, int64_t dim,
                               int64_t heads, int64_t hidden, const std::string& ffn, const std::string& pe,
                               bool final_norm, bool layer_skip, double attn_dropout, double ffn_dropout,
                               double drop_path) {
    ModelConfig cfg;
    auto kind = parse_variant(variant);
    if (!kind) throw ConfigError("unknown variant '" + variant + "'");
    cfg.variant = {*kind, layers, layer_skip};
    cfg.t_in = t_in;
    cfg.t_out = t_out;
    cfg.channels = channels;
    cfg.height = height;
    cfg.width = width;
    cfg.patch = patch;
    cfg.dim = dim;
    cfg.heads = heads;
    cfg.hidden = hidden;
    auto f = parse_ffn_kind(ffn);
    if (!f) throw ConfigError("ffn must be 'swiglu' or 'mlp'");
    cfg.ffn_kind = *f;
    auto p = parse_pe_kind(pe);
    if (!p) throw ConfigError("pe must be 'sinusoidal' or 'learnable'");
    cfg.pe_kind = *p;
    cfg.final_norm = final_norm;
    cfg.drop.attn_dropout = attn_dropout;
    cfg.drop.ffn_dropout = ffn_dropout;
    cfg.drop.drop_path_rate = drop_path;
    cfg.validate();
    return cfg;
}

// Model wrapper owning config, parameters and training state.
class PyModel {
public:
    PyModel(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {
        Rng init(derive_seed(seed, seed_stream::kInit));
        params_ = ModelParams<float>::init(cfg_, init);
    }

    py::array_t<float> predict_frames(const py::array_t<float, py::array::c_style | py::array::forcecast>& ctx) {
        Tensor<float> context = tensor_from_array<float>(ctx);
        return array_from_tensor(predict(cfg_, params_, context));
    }

    std::vector<double> fit(const py::array_t<float, py::array::c_style | py::array::forcecast>& sequences,
                            int64_t epochs, int64_t batch_size, double lr, const std::string& scheduler) {
        Tensor<float> frames = tensor_from_array<float>(sequences);
        SequenceBatch<float> data = make_sequence_batch(std::move(frames), cfg_.t_in, cfg_.t_out);
        TrainConfig tc;
        tc.epochs = epochs;
        tc.batch_size = batch_size;
        tc.lr_max = lr;
        tc.seed = seed_;
        auto s = parse_scheduler(scheduler);
        if (!s) throw ConfigError("scheduler must be 'onecycle' or 'cosine'");
        tc.scheduler = *s;
        TrainState<float> state =
            TrainState<float>::start(params_, tc, steps_per_epoch<float>(data.frames.dim(0), batch_size));
        std::vector<double> losses;
        for (int64_t e = 0; e < epochs; ++e) {
            EpochStats st = train_epoch(cfg_, params_, data, tc, state);
            losses.insert(losses.end(), st.losses.begin(), st.losses.end());
        }
        return losses;
    }

    int64_t param_count() const { return count_params(cfg_); }
    int64_t flops() const { return estimate_flops(cfg_); }
    std::string variant() const { return variant_name(cfg_.variant.kind); }
    int64_t blocks() const { return total_gtbs(cfg_.variant); }

private:
    ModelConfig cfg_;
    ModelParams<float> params_;
    uint64_t seed_;
};

}  // namespace

PYBIND11_MODULE(_predformer, m) {
    m.doc() = "Gated-transformer video prediction core";
    m.attr("__version__") = "1.0.0";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    m.def("variant_names", [] { return variant_names(); }, "Names of the nine encoder variants");
    m.def("preset_names", [] { return preset_names(); });

    m.def(
        "gen_moving_shapes",
        [](int64_t count, int64_t frames, int64_t height, int64_t width, int64_t objects, int64_t min_size,
           int64_t max_size, int64_t min_speed, int64_t max_speed, uint64_t seed) {
            ShapeSpec spec;
            spec.height = height;
            spec.width = width;
            spec.num_objects = objects;
            spec.min_size = min_size;
            spec.max_size = max_size;
            spec.min_speed = min_speed;
            spec.max_speed = max_speed;
            spec.seed = seed;
            return array_from_tensor(gen_moving_shapes<float>(spec, count, frames));
        },
        py::arg("count"), py::arg("frames") = 20, py::arg("height") = 32, py::arg("width") = 32,
        py::arg("objects") = 2, py::arg("min_size") = 6, py::arg("max_size") = 8, py::arg("min_speed") = 1,
        py::arg("max_speed") = 3, py::arg("seed") = 0,
        "Deterministic bouncing-shapes sequences [count, frames, 1, H, W]");

    m.def(
        "positional_encoding",
        [](int64_t t, int64_t n, int64_t d) { return array_from_tensor(positional_encoding<double>(t, n, d)); },
        py::arg("t"), py::arg("n"), py::arg("d"));

    m.def(
        "count_params",
        [](const std::string& preset, const std::string& variant) {
            auto kind = parse_variant(variant);
            if (!kind) throw ConfigError("unknown variant '" + variant + "'");
            return count_params(preset_config(preset, *kind));
        },
        py::arg("preset"), py::arg("variant"));
    m.def(
        "estimate_flops",
        [](const std::string& preset, const std::string& variant) {
            auto kind = parse_variant(variant);
            if (!kind) throw ConfigError("unknown variant '" + variant + "'");
            return estimate_flops(preset_config(preset, *kind));
        },
        py::arg("preset"), py::arg("variant"));

    m.def(
        "mse",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& b) {
            return pixel_metrics(tensor_from_array<float>(a), tensor_from_array<float>(b)).mse;
        },
        py::arg("pred"), py::arg("target"));
    m.def(
        "mae",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& b) {
            return pixel_metrics(tensor_from_array<float>(a), tensor_from_array<float>(b)).mae;
        },
        py::arg("pred"), py::arg("target"));
    m.def(
        "ssim",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& b) {
            return ssim(tensor_from_array<float>(a), tensor_from_array<float>(b));
        },
        py::arg("pred"), py::arg("target"));
    m.def(
        "psnr",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& b) {
            return psnr(tensor_from_array<float>(a), tensor_from_array<float>(b));
        },
        py::arg("pred"), py::arg("target"));

    m.def(
        "save_tensor",
        [](const std::string& path, const py::array& arr) {
            if (py::isinstance<py::array_t<double>>(arr)) {
                save_tensor(path, tensor_from_array<double>(arr.cast<py::array_t<double>>()));
            } else {
                save_tensor(path, tensor_from_array<float>(arr.cast<py::array_t<float>>()));
            }
        },
        py::arg("path"), py::arg("array"));
    m.def(
        "load_tensor",
        [](const std::string& path) -> py::object {
            LoadedTensor t = load_tensor(path);
            if (std::holds_alternative<Tensor<float>>(t)) {
                return array_from_tensor(std::get<Tensor<float>>(t));
            }
            return array_from_tensor(std::get<Tensor<double>>(t));
        },
        py::arg("path"));

    py::class_<PyModel>(m, "PredFormer")
        .def(py::init([](const std::string& variant, int64_t layers, int64_t t_in, int64_t t_out,
                         int64_t channels, int64_t height, int64_t width, int64_t patch, int64_t dim,
                         int64_t heads, int64_t hidden, const std::string& ffn, const std::string& pe,
                         bool final_norm, bool layer_skip, double attn_dropout, double ffn_dropout,
                         double drop_path, uint64_t seed) {
                 return PyModel(config_from_kwargs(variant, layers, t_in, t_out, channels, height, width, patch,
                                                   dim, heads, hidden, ffn, pe, final_norm, layer_skip,
                                                   attn_dropout, ffn_dropout, drop_path),
                                seed);
             }),
             py::arg("variant") = "binary_ts", py::arg("layers") = 2, py::arg("t_in") = 10,
             py::arg("t_out") = 10, py::arg("channels") = 1, py::arg("height") = 32, py::arg("width") = 32,
             py::arg("patch") = 8, py::arg("dim") = 128, py::arg("heads") = 4, py::arg("hidden") = 256,
             py::arg("ffn") = "swiglu", py::arg("pe") = "sinusoidal", py::arg("final_norm") = true,
             py::arg("layer_skip") = false, py::arg("attn_dropout") = 0.0, py::arg("ffn_dropout") = 0.0,
             py::arg("drop_path") = 0.0, py::arg("seed") = 0)
        .def("predict", &PyModel::predict_frames, py::arg("context"),
             "Eval-mode forward: [B,T,C,H,W] context -> [B,T',C,H,W] prediction")
        .def("fit", &PyModel::fit, py::arg("sequences"), py::arg("epochs") = 1, py::arg("batch_size") = 4,
             py::arg("lr") = 1e-3, py::arg("scheduler") = "onecycle",
             "Train on [N,T+T',C,H,W] sequences; returns the per-step loss trace")
        .def("param_count", &PyModel::param_count)
        .def("flops", &PyModel::flops)
        .def("blocks", &PyModel::blocks)
        .def_property_readonly("variant", &PyModel::variant);
}
