#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "predformer/cost.hpp"
#include "predformer/presets.hpp"

using namespace predformer;

namespace {

double rel_diff(double got, double want) { return std::abs(got - want) / want; }

constexpr double kG = 1e9;
constexpr double kM = 1e6;

}  // namespace

// Published parameter counts (millions), reproduced within 2%.
TEST_CASE("moving mnist parameters: 25.3M for every 24-block variant") {
    for (VariantKind kind : all_variants()) {
        ModelConfig cfg = preset_config("moving-mnist", kind);
        CHECK(total_gtbs(cfg.variant) == 24);
        CHECK(rel_diff(static_cast<double>(count_params(cfg)) / kM, 25.3) < 0.02);
    }
}

TEST_CASE("human3.6m parameters: 12.7M at 12 blocks") {
    ModelConfig cfg = preset_config("human36m", VariantKind::QuadTSST);
    CHECK(total_gtbs(cfg.variant) == 12);
    CHECK(rel_diff(static_cast<double>(count_params(cfg)) / kM, 12.7) < 0.02);
}

TEST_CASE("taxibj parameters: 8.4M at 8 blocks and 6.3M for the 6-block triplet") {
    ModelConfig cfg = preset_config("taxibj", VariantKind::BinaryST);
    CHECK(total_gtbs(cfg.variant) == 8);
    CHECK(rel_diff(static_cast<double>(count_params(cfg)) / kM, 8.4) < 0.02);

    ModelConfig tri = preset_config("taxibj", VariantKind::TripletSTS);
    CHECK(total_gtbs(tri.variant) == 6);
    CHECK(rel_diff(static_cast<double>(count_params(tri)) / kM, 6.3) < 0.02);
}

TEST_CASE("weatherbench parameters: 5.3M at 8 blocks and 4.0M for the 6-block triplet") {
    ModelConfig cfg = preset_config("weatherbench", VariantKind::FacTS);
    CHECK(total_gtbs(cfg.variant) == 8);
    CHECK(cfg.hidden == 512);
    CHECK(rel_diff(static_cast<double>(count_params(cfg)) / kM, 5.3) < 0.02);

    ModelConfig tri = preset_config("weatherbench", VariantKind::TripletTST);
    CHECK(total_gtbs(tri.variant) == 6);
    CHECK(rel_diff(static_cast<double>(count_params(tri)) / kM, 4.0) < 0.02);
}

// Published FLOP counts (G, MAC = 1 FLOP), reproduced within 5%.
TEST_CASE("moving mnist flops") {
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("moving-mnist", VariantKind::FullAttention))) / kG,
                   21.2) < 0.05);
    for (VariantKind kind : {VariantKind::FacST, VariantKind::FacTS, VariantKind::BinaryTS, VariantKind::BinaryST,
                             VariantKind::QuadTSST}) {
        CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("moving-mnist", kind))) / kG, 16.5) < 0.05);
    }
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("moving-mnist", VariantKind::TripletTST))) / kG,
                   16.4) < 0.05);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("moving-mnist", VariantKind::TripletSTS))) / kG,
                   16.5) < 0.05);
}

TEST_CASE("human3.6m flops") {
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("human36m", VariantKind::FullAttention))) / kG,
                   155.0) < 0.05);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("human36m", VariantKind::BinaryTS))) / kG,
                   65.0) < 0.05);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("human36m", VariantKind::TripletTST))) / kG,
                   60.8) < 0.05);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("human36m", VariantKind::TripletSTS))) / kG,
                   69.3) < 0.05);
}

TEST_CASE("taxibj flops") {
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("taxibj", VariantKind::FullAttention))) / kG,
                   2.4) < 0.05);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("taxibj", VariantKind::BinaryTS))) / kG, 2.2) <
          0.05);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("taxibj", VariantKind::TripletSTS))) / kG, 1.6) <
          0.05);
}

TEST_CASE("weatherbench flops") {
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("weatherbench", VariantKind::FullAttention))) / kG,
                   17.8) < 0.05);
    // table five puts the factorized variants at 8.5G (tolerance 10%)
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("weatherbench", VariantKind::FacST))) / kG,
                   8.5) < 0.10);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("weatherbench", VariantKind::FacTS))) / kG,
                   8.5) < 0.10);
    CHECK(rel_diff(static_cast<double>(estimate_flops(preset_config("weatherbench", VariantKind::BinaryTS))) / kG,
                   8.6) < 0.05);
}

TEST_CASE("full-attention minus factorized equals the analytic attention gap") {
    // With equal block counts, only the attention term differs:
    //   gap = blocks * D * (2 L_full^2 - T N^2 - N T^2)  (half the blocks
    //   spatial, half temporal in the factorized encoder)
    ModelConfig full = preset_config("moving-mnist", VariantKind::FullAttention);
    ModelConfig fac = preset_config("moving-mnist", VariantKind::FacTS);
    REQUIRE(total_gtbs(full.variant) == total_gtbs(fac.variant));
    const int64_t blocks = total_gtbs(full.variant);
    const int64_t t = full.t_in, n = full.patches_per_frame(), d = full.dim;
    const int64_t l_full = t * n;
    const int64_t expected_gap = blocks * d * (2 * l_full * l_full - t * n * n - n * t * t);
    CHECK(estimate_flops(full) - estimate_flops(fac) == expected_gap);
    CHECK(expected_gap > 0);  // strictly positive whenever T, N > 1
}

TEST_CASE("flop accounting per variant reflects the schedule") {
    // Triplet-TST (temporal-heavy) must cost less than Triplet-STS
    // (spatial-heavy) whenever N > T.
    const int64_t tst = estimate_flops(preset_config("moving-mnist", VariantKind::TripletTST));
    const int64_t sts = estimate_flops(preset_config("moving-mnist", VariantKind::TripletSTS));
    CHECK(tst < sts);
}

TEST_CASE("learnable PE and the MLP ablation change the parameter count") {
    ModelConfig cfg = preset_config("taxibj", VariantKind::BinaryTS);
    const int64_t base = count_params(cfg);
    ModelConfig learn = cfg;
    learn.pe_kind = PeKind::Learnable;
    CHECK(count_params(learn) == base + cfg.t_in * cfg.patches_per_frame() * cfg.dim);
    ModelConfig mlp = cfg;
    mlp.ffn_kind = FfnKind::Mlp;
    // parameter-matched within 1%
    CHECK(std::abs(static_cast<double>(count_params(mlp) - base)) / static_cast<double>(base) < 0.01);
}

TEST_CASE("mlp ablation flops stay parameter-matched") {
    ModelConfig cfg = preset_config("taxibj", VariantKind::BinaryTS);
    ModelConfig mlp = cfg;
    mlp.ffn_kind = FfnKind::Mlp;
    const double a = static_cast<double>(estimate_flops(cfg));
    const double b = static_cast<double>(estimate_flops(mlp));
    CHECK(std::abs(a - b) / a < 0.01);
}
