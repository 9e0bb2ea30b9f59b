#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "probmotion/error.hpp"
#include "probmotion/fileio.hpp"
#include "probmotion/motion_data.hpp"
#include "probmotion/rng.hpp"

using namespace probmotion;

namespace {

SkeletonTopology topo2x2() {
    SkeletonTopology t;
    t.joint_names = {"root", "tip"};
    t.parents = {-1, 0};
    t.channels = 2;
    t.semantics = ChannelSemantics::cartesian;
    t.part_labels = {"a", "b"};
    return t;
}

MotionDataset tiny_dataset() {
    MotionDataset d;
    d.topology = topo2x2();
    Rng rng(77);
    for (int s = 0; s < 3; ++s) {
        MotionSequence seq;
        seq.id = "seq" + std::to_string(s);
        seq.fps = 25.0;
        seq.frames = Tensor(4, 4);
        for (auto& v : seq.frames.vec()) v = rng.normal(0.0, 2.0);
        d.sequences.push_back(std::move(seq));
    }
    // Values that stress round-trip printing.
    d.sequences[0].frames.at(0, 0) = 0.1;
    d.sequences[0].frames.at(0, 1) = 1.0 / 3.0;
    d.sequences[0].frames.at(0, 2) = -1e-17;
    d.sequences[0].frames.at(0, 3) = 12345678.87654321;
    return d;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/probmotion_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("motion file write then read reproduces frames bit-exactly") {
    TempFile f("roundtrip.json");
    const MotionDataset d = tiny_dataset();
    save_motion_file(d, f.path);
    const MotionDataset back = load_motion_file(f.path);

    CHECK(back.topology.joint_names == d.topology.joint_names);
    CHECK(back.topology.parents == d.topology.parents);
    CHECK(back.topology.channels == d.topology.channels);
    CHECK(back.topology.semantics == d.topology.semantics);
    CHECK(back.topology.part_labels == d.topology.part_labels);
    REQUIRE(back.sequences.size() == d.sequences.size());
    for (std::size_t s = 0; s < d.sequences.size(); ++s) {
        CHECK(back.sequences[s].id == d.sequences[s].id);
        CHECK(back.sequences[s].fps == d.sequences[s].fps);
        CHECK(bit_equal(back.sequences[s].frames, d.sequences[s].frames));
    }
}

TEST_CASE("motion file loader rejects malformed inputs") {
    TempFile f("malformed.json");
    auto expect_code = [&](const std::string& text, Errc code) {
        atomic_write_text(f.path, text);
        try {
            load_motion_file(f.path);
            FAIL("expected a throw for: ", text.substr(0, 60));
        } catch (const Error& e) {
            CHECK(e.code() == code);
        }
    };

    SUBCASE("missing file is an io error") {
        try {
            load_motion_file("/tmp/probmotion_definitely_missing.json");
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::io);
        }
    }
    SUBCASE("non-JSON text") { expect_code("not json {", Errc::format); }
    SUBCASE("wrong version") {
        expect_code(R"({"version":2,"topology":{},"sequences":[]})", Errc::format);
    }
    SUBCASE("unknown semantics") {
        expect_code(
            R"({"version":1,"topology":{"joint_names":["a","b"],"parents":[-1,0],
                "channels":2,"semantics":"euler","part_labels":["x","y"]},"sequences":[]})",
            Errc::format);
    }
    SUBCASE("frame width mismatch") {
        expect_code(
            R"({"version":1,"topology":{"joint_names":["a","b"],"parents":[-1,0],
                "channels":2,"semantics":"expmap","part_labels":["x","y"]},
                "sequences":[{"id":"s","fps":25,"frames":[[1,2,3]]}]})",
            Errc::format);
    }
    SUBCASE("non-finite entry") {
        expect_code(
            R"({"version":1,"topology":{"joint_names":["a","b"],"parents":[-1,0],
                "channels":2,"semantics":"expmap","part_labels":["x","y"]},
                "sequences":[{"id":"s","fps":25,"frames":[[1,2,3,null]]}]})",
            Errc::format);
    }
    SUBCASE("nonpositive fps") {
        expect_code(
            R"({"version":1,"topology":{"joint_names":["a","b"],"parents":[-1,0],
                "channels":2,"semantics":"expmap","part_labels":["x","y"]},
                "sequences":[{"id":"s","fps":0,"frames":[[1,2,3,4]]}]})",
            Errc::format);
    }
    SUBCASE("empty frames") {
        expect_code(
            R"({"version":1,"topology":{"joint_names":["a","b"],"parents":[-1,0],
                "channels":2,"semantics":"expmap","part_labels":["x","y"]},
                "sequences":[{"id":"s","fps":25,"frames":[]}]})",
            Errc::format);
    }
    SUBCASE("invalid topology (cycle) is a data error") {
        expect_code(
            R"({"version":1,"topology":{"joint_names":["a","b","c"],"parents":[-1,2,1],
                "channels":2,"semantics":"expmap","part_labels":["x","y","y"]},
                "sequences":[]})",
            Errc::data);
    }
}

TEST_CASE("normalization stats match a hand computation") {
    MotionSequence a;
    a.id = "a";
    a.fps = 25.0;
    a.frames = Tensor(2, 2, {1.0, 10.0, 3.0, 10.0});
    MotionSequence b;
    b.id = "b";
    b.fps = 25.0;
    b.frames = Tensor(2, 2, {5.0, 10.0, 7.0, 10.0});

    const NormStats stats = compute_norm_stats({&a, &b});
    REQUIRE(stats.mean.size() == 2);
    // Channel 0: values {1,3,5,7} -> mean 4, population var 5.
    CHECK(stats.mean[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(stats.stddev[0] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    // Channel 1 is constant: std floored, flagged.
    CHECK(stats.mean[1] == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(stats.stddev[1] == norm_std_floor);
    CHECK(stats.any_floored);

    // The constant channel normalizes to exactly 0 (x - mean == 0 first).
    const Tensor na = normalize_frames(a.frames, stats);
    CHECK(na.at(0, 1) == 0.0);
    CHECK(na.at(1, 1) == 0.0);
    CHECK(na.at(0, 0) == doctest::Approx((1.0 - 4.0) / std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("normalize/denormalize round-trips below 1e-12 on unit-scale data") {
    MotionDataset d;
    d.topology = topo2x2();
    Rng rng(310);
    for (int s = 0; s < 3; ++s) {
        MotionSequence seq;
        seq.id = "seq" + std::to_string(s);
        seq.fps = 25.0;
        seq.frames = Tensor(6, 4);
        for (auto& v : seq.frames.vec()) v = rng.normal(0.0, 2.0);
        d.sequences.push_back(std::move(seq));
    }
    std::vector<const MotionSequence*> split;
    for (const auto& s : d.sequences) split.push_back(&s);
    const NormStats stats = compute_norm_stats(split);
    CHECK_FALSE(stats.any_floored);

    for (const auto& s : d.sequences) {
        const MotionSequence back = denormalize(normalize(s, stats), stats);
        double max_err = 0.0;
        for (std::size_t i = 0; i < s.frames.size(); ++i)
            max_err = std::max(max_err, std::abs(back.frames[i] - s.frames[i]));
        CHECK(max_err < 1e-12);
        CHECK(back.id == s.id);
        CHECK(back.fps == s.fps);
    }
}

TEST_CASE("normalize/denormalize stays relatively accurate on extreme magnitudes") {
    const MotionDataset d = tiny_dataset();  // includes a 1.2e7 entry
    std::vector<const MotionSequence*> split;
    for (const auto& s : d.sequences) split.push_back(&s);
    const NormStats stats = compute_norm_stats(split);
    for (const auto& s : d.sequences) {
        const MotionSequence back = denormalize(normalize(s, stats), stats);
        for (std::size_t i = 0; i < s.frames.size(); ++i) {
            // Round-trip error is bounded by the channel's magnitude (the
            // denormalization adds the channel mean back), not the entry's.
            const std::size_t c = i % s.frames.cols();
            const double scale = std::max(1.0, std::abs(stats.mean[c]) + stats.stddev[c]);
            CHECK(std::abs(back.frames[i] - s.frames[i]) / scale < 1e-12);
        }
    }
}

TEST_CASE("stats fingerprint pins the split they were computed on") {
    const MotionDataset d = tiny_dataset();
    std::vector<const MotionSequence*> all, head;
    for (const auto& s : d.sequences) all.push_back(&s);
    head = {all[0]};

    const NormStats on_all = compute_norm_stats(all);
    const NormStats on_all_again = compute_norm_stats(all);
    const NormStats on_head = compute_norm_stats(head);
    CHECK(on_all.fingerprint == on_all_again.fingerprint);
    CHECK(on_all.fingerprint != on_head.fingerprint);
}

TEST_CASE("stats computation rejects empty splits and width mismatches") {
    CHECK_THROWS_AS(compute_norm_stats({}), Error);

    MotionSequence a;
    a.frames = Tensor(1, 2, {1.0, 2.0});
    MotionSequence b;
    b.frames = Tensor(1, 3, {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(compute_norm_stats({&a, &b}), Error);

    const NormStats stats = compute_norm_stats({&a});
    CHECK_THROWS_AS(normalize_frames(b.frames, stats), Error);
}
