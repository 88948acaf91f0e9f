// Drives the installed CLI binary end to end. The test runner passes the
// binary location through the PREDFORMER_CLI environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "predformer/config.hpp"
#include "predformer/report.hpp"
#include "predformer/tensor_file.hpp"

using namespace predformer;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* env = std::getenv("PREDFORMER_CLI");
    REQUIRE(env != nullptr);
    return env;
}

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "pf_cli_out.txt";
    const std::string cmd = cli() + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    std::ifstream is(log);
    std::string output((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return {WEXITSTATUS(raw), output};
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("pf_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& tail) const { return (path / tail).string(); }
};

}  // namespace

TEST_CASE("cli pipeline: gen-data, train, eval, resume, bench") {
    TempDir tmp;

    // --- gen-data ---
    auto gen = run("gen-data --out " + (tmp / "data") + " --count 6 --val-count 2 --seed 11");
    CHECK(gen.exit_code == 0);
    CHECK(fs::exists(tmp / "data/train.pfts"));
    CHECK(fs::exists(tmp / "data/manifest.txt"));
    const std::string manifest = read_file(tmp / "data/manifest.txt");
    CHECK(manifest.find("train_count = 6") != std::string::npos);
    CHECK(manifest.find("seed = 11") != std::string::npos);

    // default spec: 32x32 canvas, 20 frames
    {
        Tensor<float> frames = load_tensor_as<float>(tmp / "data/train.pfts");
        CHECK(frames.shape() == Shape{6, 20, 1, 32, 32});
    }

    // refusing to overwrite without --force
    auto refuse = run("gen-data --out " + (tmp / "data") + " --seed 11");
    CHECK(refuse.exit_code == 1);
    CHECK(refuse.output.find("--force") != std::string::npos);

    // identical seeds give byte-identical files
    auto gen2 = run("gen-data --out " + (tmp / "data2") + " --count 6 --val-count 2 --seed 11");
    CHECK(gen2.exit_code == 0);
    CHECK(read_file(tmp / "data/train.pfts") == read_file(tmp / "data2/train.pfts"));

    // --- train ---
    const std::string train_flags = " --data " + (tmp / "data/train.pfts") +
                                    " --variant quad_tsst --layers 2 --dim 32 --heads 4 --hidden 64"
                                    " --patch 8 --epochs 4 --batch-size 3 --seed 21 --checkpoint-every 2";
    auto tr = run("train --out " + (tmp / "run") + train_flags);
    CHECK(tr.exit_code == 0);
    CHECK(tr.output.find("8 blocks") != std::string::npos);  // 2 quad layers = 8 GTBs
    CHECK(fs::exists(tmp / "run/checkpoint_final.pfck"));
    CHECK(fs::exists(tmp / "run/checkpoint_epoch2.pfck"));
    CHECK(fs::exists(tmp / "run/train_log.csv"));
    CHECK(fs::exists(tmp / "run/effective_config.ini"));

    // the echoed config reparses to the same effective settings
    {
        RunConfig echoed = RunConfig::from_file(tmp / "run/effective_config.ini");
        CHECK(echoed.model.dim == 32);
        CHECK(variant_name(echoed.model.variant.kind) == "quad_tsst");
        CHECK(echoed.train.epochs == 4);
    }

    // deterministic: same seed reproduces the loss log bitwise
    auto tr2 = run("train --out " + (tmp / "run_same") + train_flags);
    CHECK(tr2.exit_code == 0);
    CHECK(read_file(tmp / "run/train_log.csv") == read_file(tmp / "run_same/train_log.csv"));

    // --- resume from the mid-run checkpoint of the 4-epoch run ---
    auto resumed = run("train --out " + (tmp / "run_resumed") + " --data " + (tmp / "data/train.pfts") +
                       " --resume " + (tmp / "run/checkpoint_epoch2.pfck"));
    CHECK(resumed.exit_code == 0);
    const std::string full_log = read_file(tmp / "run/train_log.csv");
    const std::string res_log = read_file(tmp / "run_resumed/train_log.csv");
    // the resumed log contains the full history and ends identically
    CHECK(res_log == full_log);

    // mismatched resume config is rejected
    auto bad_resume = run("train --out " + (tmp / "run_bad") + " --data " + (tmp / "data/train.pfts") +
                          " --variant quad_tsst --layers 2 --dim 64 --heads 4 --hidden 64 --patch 8" +
                          " --epochs 4 --batch-size 3 --resume " + (tmp / "run/checkpoint_epoch2.pfck"));
    CHECK(bad_resume.exit_code == 1);

    // --- eval ---
    auto ev = run("eval --checkpoint " + (tmp / "run/checkpoint_final.pfck") + " --data " +
                  (tmp / "data/val.pfts") + " --out " + (tmp / "eval") + " --dump-predictions --format jsonl");
    CHECK(ev.exit_code == 0);
    CHECK(fs::exists(tmp / "eval/report.jsonl"));
    CHECK(fs::exists(tmp / "eval/per_frame.csv"));
    CHECK(fs::exists(tmp / "eval/predictions_batch0000.pfts"));
    {
        auto reports = parse_reports(tmp / "eval/report.jsonl", ReportFormat::JsonLines);
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].variant == "quad_tsst");
        CHECK(reports[0].rmse * reports[0].rmse == doctest::Approx(reports[0].mse).epsilon(1e-9));
    }

    // config/data mismatch: val data with the wrong geometry
    auto gen3 = run("gen-data --out " + (tmp / "data_small") + " --count 2 --val-count 1 --height 16 --width 16" +
                    " --max-size 6 --seed 3");
    CHECK(gen3.exit_code == 0);
    auto bad_eval = run("eval --checkpoint " + (tmp / "run/checkpoint_final.pfck") + " --data " +
                        (tmp / "data_small/val.pfts") + " --out " + (tmp / "eval_bad"));
    CHECK(bad_eval.exit_code == 1);

    // --- flag overrides beat config-file values ---
    {
        std::ofstream cf(tmp / "cfg.ini");
        cf << "[run]\nseed = 3\n[data]\ntrain = " << (tmp / "data/train.pfts")
           << "\n[model]\ndim = 32\nheads = 4\nhidden = 64\npatch = 8\nvariant = binary_ts\nlayers = 1\n"
           << "[train]\nepochs = 1\nbatch_size = 3\n";
        cf.close();
        auto ov = run("train --config " + (tmp / "cfg.ini") + " --out " + (tmp / "run_override") + " --dim 16");
        CHECK(ov.exit_code == 0);
        RunConfig eff = RunConfig::from_file(tmp / "run_override/effective_config.ini");
        CHECK(eff.model.dim == 16);  // the flag, not the file
        CHECK(eff.model.hidden == 64);
    }

    // --- bench (cost only, all variants) ---
    auto be = run("bench --preset moving-mnist --all-variants --skip-fps --out " + (tmp / "bench.csv"));
    CHECK(be.exit_code == 0);
    {
        auto rows = parse_reports(tmp / "bench.csv", ReportFormat::Csv);
        REQUIRE(rows.size() == 9);  // one row per variant
        for (const auto& r : rows) {
            CHECK(std::abs(static_cast<double>(r.params) / 1e6 - 25.3) / 25.3 < 0.02);
        }
    }
}

TEST_CASE("cli exit codes: usage errors are 2") {
    CHECK(run("").exit_code == 2);
    CHECK(run("definitely-not-a-command").exit_code == 2);
    auto bad_variant = run("train --variant binaryts --data nowhere.pfts");
    CHECK(bad_variant.exit_code == 2);
    for (const auto& name : variant_names()) {
        CHECK(bad_variant.output.find(name) != std::string::npos);
    }
    CHECK(run("--help").exit_code == 0);
}

TEST_CASE("cli gradcheck: tolerance sensitivity") {
    auto ok = run("gradcheck --seed 1");
    CHECK(ok.exit_code == 0);
    // one line per checked operation
    for (const char* op : {"softmax_lastdim", "layer_norm", "silu", "mhsa", "swiglu_ffn", "gtb_forward"}) {
        CHECK(ok.output.find(op) != std::string::npos);
    }
    // far below the float noise floor the same run must fail
    auto too_tight = run("gradcheck --seed 1 --tol 1e-12");
    CHECK(too_tight.exit_code == 1);
    CHECK(too_tight.output.find("FAIL") != std::string::npos);
}
