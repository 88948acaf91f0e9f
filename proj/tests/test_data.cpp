#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "predformer/data.hpp"
#include "predformer/tensor_file.hpp"

using namespace predformer;

namespace {

ShapeSpec small_spec(uint64_t seed = 7) {
    ShapeSpec s;
    s.height = 32;
    s.width = 32;
    s.num_objects = 2;
    s.min_size = 6;
    s.max_size = 8;
    s.min_speed = 1;
    s.max_speed = 3;
    s.seed = seed;
    return s;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

// Independent 1-D specular bounce oracle: unit steps with a pre-step flip
// when sitting on a wall and moving outward, plus a flip on arrival.
struct BounceWalker {
    int64_t pos, dir, limit;  // dir is +1/-1

    void step_units(int64_t units) {
        for (int64_t u = 0; u < units; ++u) {
            if ((pos == limit && dir > 0) || (pos == 0 && dir < 0)) dir = -dir;
            pos += dir;
            if (pos == 0 || pos == limit) dir = -dir;
        }
    }
};

}  // namespace

TEST_CASE("spec validation") {
    ShapeSpec s = small_spec();
    s.max_size = 16;  // not below half the canvas
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.min_speed = 0;  // zero speed needs the explicit flag
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.allow_zero_speed = true;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("zero speed produces identical frames") {
    ShapeSpec s = small_spec(3);
    s.allow_zero_speed = true;
    s.min_speed = s.max_speed = 0;
    Tensor<float> frames = gen_moving_shapes<float>(s, 2, 6);
    const int64_t fsz = 32 * 32;
    for (int64_t b = 0; b < 2; ++b) {
        for (int64_t f = 1; f < 6; ++f) {
            for (int64_t i = 0; i < fsz; ++i) {
                CHECK(frames.data()[(b * 6 + f) * fsz + i] == frames.data()[(b * 6) * fsz + i]);
            }
        }
    }
}

TEST_CASE("pixels are binary and in range") {
    Tensor<float> frames = gen_moving_shapes<float>(small_spec(11), 3, 8);
    int64_t ones = 0;
    for (float v : frames.data()) {
        CHECK((v == 0.0f || v == 1.0f));
        ones += v == 1.0f;
    }
    CHECK(ones > 0);
}

TEST_CASE("generation is a pure function of the spec") {
    Tensor<float> a = gen_moving_shapes<float>(small_spec(21), 4, 10);
    Tensor<float> b = gen_moving_shapes<float>(small_spec(21), 4, 10);
    CHECK(bitwise_equal(a, b));
    Tensor<float> c = gen_moving_shapes<float>(small_spec(22), 4, 10);
    CHECK(!bitwise_equal(a, c));
}

TEST_CASE("single object without wall contact translates rigidly") {
    // construct a deterministic single-object run far from the walls by
    // searching seeds for one that starts centered with velocity (1,0)
    ShapeSpec s = small_spec();
    s.num_objects = 1;
    s.kinds = {ObjectKind::Square};
    s.allow_zero_speed = true;  // velocity (1,0) needs a zero component
    s.min_speed = 0;
    s.max_speed = 1;
    bool found = false;
    for (uint64_t seed = 0; seed < 400 && !found; ++seed) {
        s.seed = seed;
        Tensor<float> frames = gen_moving_shapes<float>(s, 1, 3);
        // locate the object in frames 0 and 1 by bounding box
        auto bbox = [&](int64_t f) {
            int64_t x0 = 99, y0 = 99, x1 = -1, y1 = -1;
            for (int64_t r = 0; r < 32; ++r)
                for (int64_t c = 0; c < 32; ++c)
                    if (frames.at({0, f, 0, r, c}) == 1.0f) {
                        x0 = std::min(x0, c);
                        x1 = std::max(x1, c);
                        y0 = std::min(y0, r);
                        y1 = std::max(y1, r);
                    }
            return std::array<int64_t, 4>{x0, y0, x1, y1};
        };
        const auto b0 = bbox(0), b1 = bbox(1), b2 = bbox(2);
        const bool interior = b0[0] > 4 && b0[1] > 4 && b0[2] < 27 && b0[3] < 27;
        if (!interior) continue;
        if (b1[0] - b0[0] == 1 && b1[1] == b0[1] && b2[0] - b1[0] == 1 && b2[1] == b1[1]) {
            // pure rightward translation by one pixel per frame
            for (int64_t r = 0; r < 32; ++r)
                for (int64_t c = 1; c < 32; ++c)
                    CHECK(frames.at({0, 1, 0, r, c}) == frames.at({0, 0, 0, r, c - 1}));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("reflection matches the 1-D bounce oracle over 100 steps") {
    // vx = +2 object crossing the right wall reverses to vx = -2 with its
    // position mirrored; then the whole trajectory must track the walker.
    const int64_t limit = 24;  // canvas 32 minus object size 8
    int64_t pos = 20, vel = 2;
    BounceWalker walker{20, +1, limit};
    for (int step = 0; step < 100; ++step) {
        detail::reflect_axis(pos, vel, limit);
        walker.step_units(2);
        CHECK(pos == walker.pos);
    }
    // explicit crossing check: d = 1 from the wall, vx = +2
    pos = limit - 1;
    vel = 2;
    detail::reflect_axis(pos, vel, limit);
    CHECK(pos == limit - 1);  // mirrored one unit back
    CHECK(vel == -2);
}

TEST_CASE("every kind rasterizes within its bounding box") {
    for (ObjectKind kind : {ObjectKind::Square, ObjectKind::Cross, ObjectKind::Disk}) {
        ShapeSpec s = small_spec(5);
        s.num_objects = 1;
        s.kinds = {kind};
        Tensor<float> frames = gen_moving_shapes<float>(s, 1, 1);
        int64_t lit = 0;
        for (float v : frames.data()) lit += v == 1.0f;
        CHECK(lit >= 6);  // even the thinnest cross lights several pixels
        CHECK(lit <= 8 * 8);
    }
}

TEST_CASE("context/target split is a clean partition") {
    Tensor<float> frames = gen_moving_shapes<float>(small_spec(31), 3, 20);
    auto [ctx, tgt] = split_context_target(frames, 10, 10);
    CHECK(ctx.shape() == Shape{3, 10, 1, 32, 32});
    CHECK(tgt.shape() == Shape{3, 10, 1, 32, 32});
    // concatenating the halves reproduces the original bitwise
    const int64_t half = ctx.numel() / 3, fsz = 20 * 32 * 32;
    for (int64_t b = 0; b < 3; ++b) {
        CHECK(std::memcmp(frames.data().data() + b * fsz, ctx.data().data() + b * half,
                          sizeof(float) * static_cast<size_t>(half)) == 0);
        CHECK(std::memcmp(frames.data().data() + b * fsz + half, tgt.data().data() + b * half,
                          sizeof(float) * static_cast<size_t>(half)) == 0);
    }

    // 4-in/4-out on 8 frames, the short-horizon protocol
    Tensor<float> frames8 = gen_moving_shapes<float>(small_spec(33), 2, 8);
    auto [c2, t2] = split_context_target(frames8, 4, 4);
    CHECK(c2.shape() == Shape{2, 4, 1, 32, 32});
    CHECK(t2.shape() == Shape{2, 4, 1, 32, 32});
    CHECK_THROWS_AS((void)split_context_target(frames, 10, 4), ShapeError);
}

TEST_CASE("tensor file round trip is bitwise for both dtypes and ranks 1..5") {
    Rng rng(41);
    const auto path = temp_path("pf_roundtrip.pfts");
    for (int rank = 1; rank <= 5; ++rank) {
        Shape shape;
        for (int i = 0; i < rank; ++i) shape.push_back(2 + i % 3);
        Tensor<float> tf = random_uniform<float>(shape, rng);
        save_tensor(path.string(), tf);
        CHECK(bitwise_equal(load_tensor_as<float>(path.string()), tf));
        Tensor<double> td = random_uniform<double>(shape, rng);
        save_tensor(path.string(), td);
        CHECK(bitwise_equal(load_tensor_as<double>(path.string()), td));
    }
    std::filesystem::remove(path);
}

TEST_CASE("tensor file errors carry distinct codes") {
    const auto path = temp_path("pf_badfile.pfts");
    Rng rng(43);
    Tensor<float> t = random_uniform<float>({3, 4}, rng);
    save_tensor(path.string(), t);

    // truncated payload
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
    }
    try {
        (void)load_tensor_as<float>(path.string());
        FAIL("expected truncation error");
    } catch (const IoError& e) {
        CHECK(e.code() == IoError::Code::Truncated);
    }

    // bad magic
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write("NOPE\x01\x00\x00\x02", 8);
    }
    try {
        (void)load_tensor_as<float>(path.string());
        FAIL("expected magic error");
    } catch (const IoError& e) {
        CHECK(e.code() == IoError::Code::BadMagic);
    }

    // version mismatch
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write("PFTS\x09\x00\x00\x01\x02\x00\x00\x00", 12);
    }
    try {
        (void)load_tensor_as<float>(path.string());
        FAIL("expected version error");
    } catch (const IoError& e) {
        CHECK(e.code() == IoError::Code::VersionMismatch);
    }

    // zero-length axis violates the tensor invariant
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        const unsigned char hdr[] = {'P', 'F', 'T', 'S', 1, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0};
        out.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    }
    try {
        (void)load_tensor_as<float>(path.string());
        FAIL("expected header error");
    } catch (const IoError& e) {
        CHECK(e.code() == IoError::Code::BadHeader);
    }

    CHECK_THROWS_AS((void)load_tensor_as<float>("/nonexistent/dir/x.pfts"), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("dtype tag survives the variant loader") {
    const auto path = temp_path("pf_variant.pfts");
    Rng rng(47);
    save_tensor(path.string(), random_uniform<double>({2, 2}, rng));
    LoadedTensor loaded = load_tensor(path.string());
    CHECK(std::holds_alternative<Tensor<double>>(loaded));
    CHECK_THROWS_AS((void)load_tensor_as<float>(path.string()), IoError);
    std::filesystem::remove(path);
}
