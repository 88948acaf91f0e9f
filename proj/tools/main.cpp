// predformer command-line tool: data generation, training, evaluation,
// cost/throughput benchmarking and gradient checking.
//
// Exit codes: 0 success, 1 check or validation failure, 2 usage error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "predformer/checkpoint.hpp"
#include "predformer/config.hpp"
#include "predformer/cost.hpp"
#include "predformer/data.hpp"
#include "predformer/gradcheck.hpp"
#include "predformer/metrics.hpp"
#include "predformer/presets.hpp"
#include "predformer/report.hpp"
#include "predformer/tensor_file.hpp"
#include "predformer/train.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace predformer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("PREDFORMER_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) omp_set_num_threads(std::min(cap, omp_get_max_threads()));
    }
#endif
}

std::string fingerprint(const ModelConfig& cfg) {
    KvDoc doc;
    model_config_to_kv(cfg, doc);
    uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (const auto& e : doc.entries()) {
        for (char c : e.first + "=" + e.second) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

VariantKind require_variant(const std::string& name) {
    auto kind = parse_variant(name);
    if (!kind) {
        std::string names;
        for (const auto& n : variant_names()) names += (names.empty() ? "" : ", ") + n;
        throw CLI::ValidationError("--variant", "unknown variant '" + name + "'; valid names: " + names);
    }
    return *kind;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

struct GenDataArgs {
    std::string out = "data";
    int64_t count = 64;
    int64_t val_count = 16;
    int64_t frames = 20;
    ShapeSpec spec;
    std::string kinds = "square,cross,disk";
    bool force = false;
};

std::vector<ObjectKind> parse_kinds(const std::string& csv) {
    std::vector<ObjectKind> kinds;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ',')) {
        auto k = parse_object_kind(item);
        if (!k) throw ConfigError("unknown object kind '" + item + "' (square, cross, disk)");
        kinds.push_back(*k);
    }
    if (kinds.empty()) throw ConfigError("object kind list is empty");
    return kinds;
}

int run_gen_data(GenDataArgs& args) {
    args.spec.kinds = parse_kinds(args.kinds);
    args.spec.validate();
    const fs::path out_dir(args.out);
    const fs::path train_path = out_dir / "train.pfts";
    const fs::path val_path = out_dir / "val.pfts";
    const fs::path manifest_path = out_dir / "manifest.txt";
    if (!args.force) {
        for (const auto& p : {train_path, val_path, manifest_path}) {
            if (fs::exists(p)) {
                std::cerr << "error: '" << p.string() << "' already exists (use --force to overwrite)\n";
                return kExitCheckFailure;
            }
        }
    }
    fs::create_directories(out_dir);

    Tensor<float> train = gen_moving_shapes<float>(args.spec, args.count, args.frames);
    ShapeSpec val_spec = args.spec;
    val_spec.seed = derive_seed(args.spec.seed, 1000);  // disjoint sequence stream
    Tensor<float> val = gen_moving_shapes<float>(val_spec, args.val_count, args.frames);
    save_tensor(train_path.string(), train);
    save_tensor(val_path.string(), val);

    std::ofstream mf(manifest_path);
    mf << "seed = " << args.spec.seed << "\n"
       << "canvas_height = " << args.spec.height << "\n"
       << "canvas_width = " << args.spec.width << "\n"
       << "objects = " << args.spec.num_objects << "\n"
       << "kinds = " << args.kinds << "\n"
       << "min_size = " << args.spec.min_size << "\n"
       << "max_size = " << args.spec.max_size << "\n"
       << "min_speed = " << args.spec.min_speed << "\n"
       << "max_speed = " << args.spec.max_speed << "\n"
       << "frames = " << args.frames << "\n"
       << "train_count = " << args.count << "\n"
       << "val_count = " << args.val_count << "\n"
       << "train_file = train.pfts\n"
       << "val_file = val.pfts\n";

    std::cout << "wrote " << train_path.string() << " " << shape_str(train.shape()) << "\n"
              << "wrote " << val_path.string() << " " << shape_str(val.shape()) << "\n"
              << "wrote " << manifest_path.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct CliOverrides {
    std::string config_path;
    std::string out;
    std::string resume;
    std::string data;
    std::string val;
    std::string variant;
    std::string scheduler;
    std::string ffn;
    std::string pe;
    int64_t layers = -1;
    int64_t dim = -1;
    int64_t heads = -1;
    int64_t hidden = -1;
    int64_t patch = -1;
    int64_t t_in = -1;
    int64_t t_out = -1;
    int64_t epochs = -1;
    int64_t batch_size = -1;
    int64_t checkpoint_every = -1;
    double lr = -1.0;
    uint64_t seed = 0;
    bool seed_set = false;
};

RunConfig merge_run_config(const CliOverrides& o) {
    RunConfig rc;
    rc.model = preset_config("mm-analog", VariantKind::BinaryTS);
    rc.model.variant.layers = 2;
    rc.train.batch_size = 4;
    if (!o.config_path.empty()) rc = RunConfig::from_file(o.config_path, rc);
    // flag overrides always win over config-file values
    if (o.seed_set) {
        rc.seed = o.seed;
        rc.train.seed = o.seed;
    }
    if (!o.out.empty()) rc.out_dir = o.out;
    if (!o.data.empty()) rc.train_data = o.data;
    if (!o.val.empty()) rc.val_data = o.val;
    if (!o.variant.empty()) rc.model.variant.kind = require_variant(o.variant);
    if (o.layers > 0) rc.model.variant.layers = o.layers;
    if (o.dim > 0) rc.model.dim = o.dim;
    if (o.heads > 0) rc.model.heads = o.heads;
    if (o.hidden > 0) rc.model.hidden = o.hidden;
    if (o.patch > 0) rc.model.patch = o.patch;
    if (o.t_in > 0) rc.model.t_in = o.t_in;
    if (o.t_out > 0) rc.model.t_out = o.t_out;
    if (o.epochs > 0) rc.train.epochs = o.epochs;
    if (o.batch_size > 0) rc.train.batch_size = o.batch_size;
    if (o.checkpoint_every >= 0) rc.checkpoint_every = o.checkpoint_every;
    if (o.lr > 0) rc.train.lr_max = o.lr;
    if (!o.scheduler.empty()) {
        auto s = parse_scheduler(o.scheduler);
        if (!s) throw CLI::ValidationError("--scheduler", "must be 'onecycle' or 'cosine'");
        rc.train.scheduler = *s;
    }
    if (!o.ffn.empty()) {
        auto f = parse_ffn_kind(o.ffn);
        if (!f) throw CLI::ValidationError("--ffn", "must be 'swiglu' or 'mlp'");
        rc.model.ffn_kind = *f;
    }
    if (!o.pe.empty()) {
        auto p = parse_pe_kind(o.pe);
        if (!p) throw CLI::ValidationError("--pe", "must be 'sinusoidal' or 'learnable'");
        rc.model.pe_kind = *p;
    }
    return rc;
}

// Loads a dataset file and validates it against the model geometry.
SequenceBatch<float> load_dataset(const std::string& path, const ModelConfig& model) {
    if (path.empty()) throw ConfigError("no dataset given (data.train in the config or --data)");
    if (!fs::exists(path)) throw ConfigError("dataset '" + path + "' does not exist");
    Tensor<float> frames = load_tensor_as<float>(path);
    if (frames.ndim() != 5) {
        throw ConfigError("dataset '" + path + "' must be [N,T,C,H,W], got " + shape_str(frames.shape()));
    }
    if (frames.dim(1) != model.t_in + model.t_out) {
        throw ConfigError("dataset has " + std::to_string(frames.dim(1)) +
                          " frames per sequence but the model wants " + std::to_string(model.t_in) + "+" +
                          std::to_string(model.t_out));
    }
    if (frames.dim(2) != model.channels || frames.dim(3) != model.height || frames.dim(4) != model.width) {
        throw ConfigError("dataset frames " + shape_str(frames.shape()) +
                          " do not match the configured geometry " + std::to_string(model.channels) + "x" +
                          std::to_string(model.height) + "x" + std::to_string(model.width));
    }
    return make_sequence_batch(std::move(frames), model.t_in, model.t_out);
}

void write_train_log(const fs::path& path, const std::vector<std::pair<double, double>>& history,
                     int64_t steps_per_epoch_count) {
    std::ofstream os(path);
    os << "step,epoch,loss,lr\n";
    os.precision(17);
    for (size_t i = 0; i < history.size(); ++i) {
        os << i << ',' << (static_cast<int64_t>(i) / steps_per_epoch_count) << ',' << history[i].first << ','
           << history[i].second << '\n';
    }
}

int run_train(const CliOverrides& o) {
    RunConfig rc = merge_run_config(o);
    if (rc.out_dir.empty()) rc.out_dir = "runs/train";

    ModelConfig model = rc.model;
    TrainConfig tcfg = rc.train;
    ModelParams<float> params = ModelParams<float>::zeros(model);
    TrainState<float> state;
    int64_t start_epoch = 0;

    if (!o.resume.empty()) {
        Checkpoint<float> ck = load_checkpoint<float>(o.resume);
        const bool explicit_model = !o.config_path.empty() || !o.variant.empty() || o.dim > 0 || o.layers > 0;
        if (explicit_model && !(ck.model == model)) {
            throw IoError(IoError::Code::ConfigMismatch,
                          "checkpoint model configuration does not match the requested one");
        }
        model = ck.model;
        tcfg = ck.train;
        params = std::move(ck.params);
        state = ck.restore_state();
        std::cout << "resumed from '" << o.resume << "' at step " << state.global_step << "\n";
    }

    SequenceBatch<float> data = load_dataset(rc.train_data, model);
    const int64_t spe = steps_per_epoch<float>(data.frames.dim(0), tcfg.batch_size);

    if (o.resume.empty()) {
        model.validate();
        tcfg.validate();
        Rng init(derive_seed(tcfg.seed, seed_stream::kInit));
        params = ModelParams<float>::init(model, init);
        state = TrainState<float>::start(params, tcfg, spe);
    } else {
        start_epoch = state.global_step / spe;
    }

    fs::create_directories(rc.out_dir);
    rc.model = model;
    rc.train = tcfg;
    std::ofstream(fs::path(rc.out_dir) / "effective_config.ini") << rc.serialize();

    std::cout << "training " << variant_name(model.variant.kind) << " x" << model.variant.layers << " layers ("
              << total_gtbs(model.variant) << " blocks, " << count_params(model) << " parameters) for "
              << tcfg.epochs << " epochs\n";

    for (int64_t epoch = start_epoch; epoch < tcfg.epochs; ++epoch) {
        EpochStats st = train_epoch(model, params, data, tcfg, state);
        std::cout << "epoch " << (epoch + 1) << "/" << tcfg.epochs << "  loss " << std::scientific
                  << std::setprecision(4) << st.mean_loss << "  lr " << st.lrs.back() << std::defaultfloat
                  << "  (" << std::setprecision(3) << st.seconds << "s)\n";
        if (rc.checkpoint_every > 0 && (epoch + 1) % rc.checkpoint_every == 0 && epoch + 1 < tcfg.epochs) {
            const fs::path ck_path =
                fs::path(rc.out_dir) / ("checkpoint_epoch" + std::to_string(epoch + 1) + ".pfck");
            save_checkpoint(ck_path.string(), Checkpoint<float>::capture(model, tcfg, params, state));
            std::cout << "checkpoint " << ck_path.string() << "\n";
        }
    }

    const fs::path final_path = fs::path(rc.out_dir) / "checkpoint_final.pfck";
    save_checkpoint(final_path.string(), Checkpoint<float>::capture(model, tcfg, params, state));
    write_train_log(fs::path(rc.out_dir) / "train_log.csv", state.history, spe);
    std::cout << "wrote " << final_path.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string out = "runs/eval";
    std::string format = "csv";
    int64_t batch_size = 16;
    bool dump_predictions = false;
};

int run_eval(const EvalArgs& args) {
    Checkpoint<float> ck = load_checkpoint<float>(args.checkpoint);
    ModelConfig model = ck.model;
    SequenceBatch<float> data = load_dataset(args.data, model);
    fs::create_directories(args.out);

    const int64_t n = data.frames.dim(0);
    Tensor<float> all_pred({n, model.t_out, model.channels, model.height, model.width});
    Tensor<float> all_target(all_pred.shape());
    const int64_t sample_sz = all_pred.numel() / n;

    int64_t batch_index = 0;
    for (int64_t lo = 0; lo < n; lo += args.batch_size, ++batch_index) {
        const int64_t hi = std::min<int64_t>(lo + args.batch_size, n);
        std::vector<int64_t> rows(static_cast<size_t>(hi - lo));
        std::iota(rows.begin(), rows.end(), lo);
        Tensor<float> batch = gather_rows(data.frames, rows);
        auto [ctx, tgt] = split_context_target(batch, data.t_in, data.t_out);
        Tensor<float> pred = predict(model, ck.params, ctx);
        std::copy(pred.data().begin(), pred.data().end(), all_pred.mut_data().begin() + lo * sample_sz);
        std::copy(tgt.data().begin(), tgt.data().end(), all_target.mut_data().begin() + lo * sample_sz);
        if (args.dump_predictions) {
            std::ostringstream name;
            name << "predictions_batch" << std::setw(4) << std::setfill('0') << batch_index << ".pfts";
            save_tensor((fs::path(args.out) / name.str()).string(), pred);
        }
    }

    MetricsReport report = evaluate_predictions(all_pred, all_target);
    report.run_id = fs::path(args.checkpoint).stem().string();
    report.variant = variant_name(model.variant.kind);
    report.layers = model.variant.layers;
    report.params = count_params(model);
    report.flops = estimate_flops(model);
    report.config_fingerprint = fingerprint(model);

    const bool jsonl = args.format == "jsonl";
    const fs::path report_path = fs::path(args.out) / (jsonl ? "report.jsonl" : "report.csv");
    emit_reports({report}, report_path.string(), jsonl ? ReportFormat::JsonLines : ReportFormat::Csv);
    emit_per_frame_csv(report, (fs::path(args.out) / "per_frame.csv").string());

    std::cout << "evaluated " << n << " sequences\n"
              << "mse  " << report.mse << "\nmae  " << report.mae << "\nrmse " << report.rmse << "\nssim "
              << report.ssim << "\npsnr " << report.psnr << "\n"
              << "wrote " << report_path.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string preset = "mm-analog";
    std::string variant = "binary_ts";
    std::string out;
    bool all_variants = false;
    bool skip_fps = false;
    int64_t batch = 1;
    int64_t warmup = 3;
    int64_t iters = 10;
    uint64_t seed = 0;
};

MetricsReport bench_one(const BenchArgs& args, VariantKind kind) {
    ModelConfig cfg = preset_config(args.preset, kind);
    MetricsReport row;
    row.run_id = args.preset;
    row.variant = variant_name(kind);
    row.layers = cfg.variant.layers;
    row.params = count_params(cfg);
    row.flops = estimate_flops(cfg);
    row.config_fingerprint = fingerprint(cfg);
    if (!args.skip_fps) {
        Rng init(derive_seed(args.seed, seed_stream::kInit));
        ModelParams<float> params = ModelParams<float>::init(cfg, init);
        row.fps = fps_bench(cfg, params, args.batch, args.warmup, args.iters).fps;
    }
    return row;
}

int run_bench(const BenchArgs& args) {
    std::vector<MetricsReport> rows;
    if (args.all_variants) {
        for (VariantKind kind : all_variants()) rows.push_back(bench_one(args, kind));
    } else {
        rows.push_back(bench_one(args, require_variant(args.variant)));
    }

    std::cout << std::left << std::setw(14) << "variant" << std::right << std::setw(8) << "layers" << std::setw(8)
              << "blocks" << std::setw(12) << "params(M)" << std::setw(12) << "flops(G)";
    if (!args.skip_fps) std::cout << std::setw(12) << "fps";
    std::cout << "\n";
    for (const auto& r : rows) {
        const auto kind = *parse_variant(r.variant);
        std::cout << std::left << std::setw(14) << r.variant << std::right << std::setw(8) << r.layers
                  << std::setw(8) << r.layers * gtbs_per_layer(kind) << std::setw(12) << std::fixed
                  << std::setprecision(2) << static_cast<double>(r.params) / 1e6 << std::setw(12)
                  << static_cast<double>(r.flops) / 1e9;
        if (!args.skip_fps) std::cout << std::setw(12) << std::setprecision(1) << r.fps;
        std::cout << std::defaultfloat << "\n";
    }
    if (!args.out.empty()) {
        const fs::path parent = fs::path(args.out).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        emit_reports(rows, args.out, ReportFormat::Csv);
        std::cout << "wrote " << args.out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

struct GradcheckArgs {
    double tol = 1e-4;
    double h = 1e-5;
    uint64_t seed = 0;
};

int run_gradcheck(const GradcheckArgs& args) {
    struct Entry {
        std::string name;
        GradCheckReport report;
    };
    std::vector<Entry> results;
    Rng rng(derive_seed(args.seed, seed_stream::kInit));
    DropSpec eval_drop;  // dropout disabled: gradcheck requires determinism

    auto weighted = [](Tape<double>& tp, const Value<double>& y, uint64_t wseed) {
        Rng wr(wseed);
        Tensor<double> w = random_uniform<double>(y.data.shape(), wr, -1.0, 1.0);
        return sum_all(tp, mul_mask(tp, y, w));
    };
    auto check = [&](const std::string& name, auto f, const Tensor<double>& x) {
        results.push_back({name, grad_check(f, x, args.h, args.tol)});
    };

    check(
        "softmax_lastdim",
        [&](Tape<double>& tp, const Value<double>& x) { return weighted(tp, softmax_lastdim(tp, x), 11); },
        random_uniform<double>({4, 7}, rng, -2.0, 2.0));

    {
        Tensor<double> gamma = random_uniform<double>({8}, rng, 0.5, 1.5);
        Tensor<double> beta = random_uniform<double>({8}, rng, -0.5, 0.5);
        check(
            "layer_norm",
            [&, gamma, beta](Tape<double>& tp, const Value<double>& x) {
                return weighted(tp, layer_norm(tp, x, Value<double>(gamma), Value<double>(beta), 1e-5), 12);
            },
            random_uniform<double>({5, 8}, rng, -2.0, 2.0));
    }

    check(
        "silu", [&](Tape<double>& tp, const Value<double>& x) { return weighted(tp, silu(tp, x), 13); },
        random_uniform<double>({3, 6}, rng, -2.0, 2.0));
    check(
        "gelu", [&](Tape<double>& tp, const Value<double>& x) { return weighted(tp, gelu(tp, x), 14); },
        random_uniform<double>({3, 6}, rng, -2.0, 2.0));

    {
        Tensor<double> rhs = random_uniform<double>({6, 4}, rng, -1.0, 1.0);
        check(
            "matmul",
            [&, rhs](Tape<double>& tp, const Value<double>& x) {
                return weighted(tp, matmul(tp, reshape(tp, x, {3, 6}), Value<double>(rhs)), 15);
            },
            random_uniform<double>({18}, rng, -1.0, 1.0));
    }

    {
        AttentionParams<double> ap = AttentionParams<double>::init(8, 2, rng);
        check(
            "mhsa",
            [&, ap](Tape<double>& tp, const Value<double>& x) {
                return weighted(tp, mhsa(tp, reshape(tp, x, {2, 3, 8}), ap, eval_drop, rng), 16);
            },
            random_uniform<double>({48}, rng, -1.0, 1.0));
    }
    {
        SwiGluParams<double> sp = SwiGluParams<double>::init(8, 12, rng);
        check(
            "swiglu_ffn",
            [&, sp](Tape<double>& tp, const Value<double>& x) {
                return weighted(tp, swiglu_ffn(tp, reshape(tp, x, {4, 8}), sp, eval_drop, rng), 17);
            },
            random_uniform<double>({32}, rng, -1.0, 1.0));
    }
    {
        MlpParams<double> mp = MlpParams<double>::init(8, 12, rng);
        check(
            "mlp_ffn",
            [&, mp](Tape<double>& tp, const Value<double>& x) {
                return weighted(tp, mlp_ffn(tp, reshape(tp, x, {4, 8}), mp, eval_drop, rng), 18);
            },
            random_uniform<double>({32}, rng, -1.0, 1.0));
    }
    {
        GtbParams<double> gp = GtbParams<double>::init(8, 2, 12, FfnKind::SwiGlu, rng);
        check(
            "gtb_forward",
            [&, gp](Tape<double>& tp, const Value<double>& x) {
                return weighted(tp, gtb_forward(tp, reshape(tp, x, {2, 3, 8}), gp, eval_drop, 0, 1, rng), 19);
            },
            random_uniform<double>({48}, rng, -1.0, 1.0));
    }

    // tiny end-to-end model: T=2, N=4 (8x8 frames, patch 4), D=8, Binary-TS
    {
        ModelConfig cfg;
        cfg.t_in = cfg.t_out = 2;
        cfg.channels = 1;
        cfg.height = cfg.width = 8;
        cfg.patch = 4;
        cfg.dim = 8;
        cfg.heads = 2;
        cfg.hidden = 16;
        cfg.variant = {VariantKind::BinaryTS, 1, false};
        ModelParams<double> params = ModelParams<double>::init(cfg, rng);
        Tensor<double> target = random_uniform<double>({1, 2, 1, 8, 8}, rng);
        auto model_f = [&](Tape<double>& tp, const Value<double>& x) {
            Value<double> frames = reshape(tp, x, {1, 2, 1, 8, 8});
            Rng drng(0);
            Value<double> pred = model_forward(tp, frames, cfg, params, Mode::Eval, drng);
            return mse_loss(tp, pred, Value<double>(target));
        };
        check("model_forward(input)", model_f, random_uniform<double>({128}, rng));

        // loss gradient wrt every parameter tensor
        Tensor<double> frames = random_uniform<double>({1, 2, 1, 8, 8}, rng);
        auto refs = collect_params(params);
        double max_err = 0.0;
        for (auto& ref : refs) {
            Tape<double> tape(true);
            Rng drng(0);
            Value<double> pred = model_forward(tape, Value<double>(frames), cfg, params, Mode::Eval, drng);
            Value<double> loss = mse_loss(tape, pred, Value<double>(target));
            tape.backward(loss);
            Tensor<double> analytic = tape.grad_of(*ref.tensor);
            auto w = ref.tensor->mut_data();
            for (size_t i = 0; i < w.size(); ++i) {
                const double orig = w[i];
                auto eval = [&](double v) {
                    w[i] = v;
                    Tape<double> t2(false);
                    Rng dr(0);
                    Value<double> p2 = model_forward(t2, Value<double>(frames), cfg, params, Mode::Eval, dr);
                    w[i] = orig;
                    return l2_loss(p2.data, target);
                };
                const double num = (eval(orig + args.h) - eval(orig - args.h)) / (2.0 * args.h);
                const double a = analytic.data()[i];
                const double denom = std::max({1.0, std::abs(a), std::abs(num)});
                max_err = std::max(max_err, std::abs(a - num) / denom);
            }
        }
        results.push_back({"model_forward(params)", {max_err, max_err <= args.tol, 0}});
    }

    bool all_pass = true;
    std::vector<std::string> offenders;
    for (const auto& e : results) {
        std::cout << (e.report.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(24) << e.name
                  << "max_rel_err " << std::scientific << std::setprecision(3) << e.report.max_rel_err
                  << std::defaultfloat << "\n";
        if (!e.report.pass) {
            all_pass = false;
            offenders.push_back(e.name);
        }
    }
    if (!all_pass) {
        std::cerr << "gradcheck failed for:";
        for (const auto& n : offenders) std::cerr << " " << n;
        std::cerr << "\n";
        return kExitCheckFailure;
    }
    std::cout << "all gradient checks passed at tol " << args.tol << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"PredFormer: gated-transformer video prediction"};
    app.require_subcommand(1);

    GenDataArgs gen_args;
    auto* gen = app.add_subcommand("gen-data", "Generate synthetic moving-shapes datasets");
    gen->add_option("--out", gen_args.out, "Output directory");
    gen->add_option("--count", gen_args.count, "Training sequences")->check(CLI::PositiveNumber);
    gen->add_option("--val-count", gen_args.val_count, "Validation sequences")->check(CLI::PositiveNumber);
    gen->add_option("--frames", gen_args.frames, "Frames per sequence")->check(CLI::PositiveNumber);
    gen->add_option("--height", gen_args.spec.height, "Canvas height");
    gen->add_option("--width", gen_args.spec.width, "Canvas width");
    gen->add_option("--objects", gen_args.spec.num_objects, "Objects per sequence");
    gen->add_option("--kinds", gen_args.kinds, "Comma list of square,cross,disk");
    gen->add_option("--min-size", gen_args.spec.min_size, "Min object size (px)");
    gen->add_option("--max-size", gen_args.spec.max_size, "Max object size (px)");
    gen->add_option("--min-speed", gen_args.spec.min_speed, "Min speed (px/frame)");
    gen->add_option("--max-speed", gen_args.spec.max_speed, "Max speed (px/frame)");
    gen->add_flag("--allow-zero-speed", gen_args.spec.allow_zero_speed, "Permit static objects (testing)");
    gen->add_option("--seed", gen_args.spec.seed, "Generator seed");
    gen->add_flag("--force", gen_args.force, "Overwrite existing outputs");

    CliOverrides tr;
    auto* train = app.add_subcommand("train", "Train a model");
    train->add_option("--config", tr.config_path, "key=value config file");
    train->add_option("--seed", tr.seed, "Root seed")->each([&tr](const std::string&) { tr.seed_set = true; });
    train->add_option("--out", tr.out, "Output directory");
    train->add_option("--resume", tr.resume, "Checkpoint to resume from");
    train->add_option("--data", tr.data, "Training dataset (.pfts)");
    train->add_option("--val", tr.val, "Validation dataset (.pfts)");
    train->add_option("--variant", tr.variant, "Encoder variant");
    train->add_option("--layers", tr.layers, "PredFormer layers");
    train->add_option("--dim", tr.dim, "Model dim");
    train->add_option("--heads", tr.heads, "Attention heads");
    train->add_option("--hidden", tr.hidden, "SwiGLU hidden width");
    train->add_option("--patch", tr.patch, "Patch size");
    train->add_option("--t-in", tr.t_in, "Context frames");
    train->add_option("--t-out", tr.t_out, "Target frames");
    train->add_option("--epochs", tr.epochs, "Training epochs");
    train->add_option("--batch-size", tr.batch_size, "Batch size");
    train->add_option("--lr", tr.lr, "Peak learning rate");
    train->add_option("--scheduler", tr.scheduler, "onecycle | cosine");
    train->add_option("--ffn", tr.ffn, "swiglu | mlp");
    train->add_option("--pe", tr.pe, "sinusoidal | learnable");
    train->add_option("--checkpoint-every", tr.checkpoint_every, "Epochs between checkpoints");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint (.pfck)")->required();
    eval_cmd->add_option("--data", ev.data, "Dataset (.pfts)")->required();
    eval_cmd->add_option("--out", ev.out, "Output directory");
    eval_cmd->add_option("--format", ev.format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    eval_cmd->add_option("--batch-size", ev.batch_size, "Evaluation batch size");
    eval_cmd->add_flag("--dump-predictions", ev.dump_predictions, "Write one .pfts per batch");

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "Parameter/FLOP accounting and throughput");
    bench->add_option("--preset", be.preset, "Configuration preset")->check(CLI::IsMember(preset_names()));
    bench->add_option("--variant", be.variant, "Encoder variant");
    bench->add_flag("--all-variants", be.all_variants, "Benchmark all nine variants");
    bench->add_flag("--skip-fps", be.skip_fps, "Cost accounting only (no timing)");
    bench->add_option("--batch", be.batch, "Benchmark batch size");
    bench->add_option("--warmup", be.warmup, "Warmup iterations (>= 3)");
    bench->add_option("--iters", be.iters, "Timed iterations (>= 10)");
    bench->add_option("--seed", be.seed, "Parameter init seed");
    bench->add_option("--out", be.out, "Write the table as CSV");

    GradcheckArgs gc;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient verification (f64)");
    gradcheck_cmd->add_option("--tol", gc.tol, "Tolerance on the relative error");
    gradcheck_cmd->add_option("--step", gc.h, "Central-difference step");
    gradcheck_cmd->add_option("--seed", gc.seed, "Input seed");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return run_gen_data(gen_args);
        if (train->parsed()) return run_train(tr);
        if (eval_cmd->parsed()) return run_eval(ev);
        if (bench->parsed()) return run_bench(be);
        if (gradcheck_cmd->parsed()) return run_gradcheck(gc);
        return kExitUsage;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}
