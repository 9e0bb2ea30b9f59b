#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "probmotion/dynamics.hpp"
#include "probmotion/error.hpp"
#include "probmotion/eval.hpp"
#include "probmotion/model.hpp"
#include "probmotion/motion_data.hpp"
#include "probmotion/rng.hpp"
#include "probmotion/training.hpp"

using namespace probmotion;

namespace {

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

SkeletonTopology topo3() {
    SkeletonTopology t;
    t.joint_names = {"hip", "knee", "foot"};
    t.parents = {-1, 0, 1};
    t.channels = 2;
    t.semantics = ChannelSemantics::expmap;
    t.part_labels = {"a", "b", "a"};
    return t;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.t_obs = 4;
    cfg.k_pred = 3;
    cfg.layers = 2;
    cfg.hidden = 8;
    cfg.seed = 11;
    return cfg;
}

MotionDataset smooth_dataset(const SkeletonTopology& topo, std::size_t n_seqs,
                             std::size_t frames) {
    MotionDataset data;
    data.topology = topo;
    const std::size_t d = topo.pose_dim();
    for (std::size_t s = 0; s < n_seqs; ++s) {
        MotionSequence seq;
        seq.id = "seq" + std::to_string(s);
        seq.fps = 25.0;
        seq.frames = Tensor(frames, d);
        for (std::size_t t = 0; t < frames; ++t)
            for (std::size_t c = 0; c < d; ++c)
                seq.frames.at(t, c) =
                    std::sin(0.21 * static_cast<double>(t) + 0.7 * static_cast<double>(c) +
                             0.31 * static_cast<double>(s)) +
                    0.1 * static_cast<double>(c);
        data.sequences.push_back(std::move(seq));
    }
    return data;
}

Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

// --- independent metric recomputations (different algebra and traversal) ---

std::vector<double> row_vec(const Tensor& m, std::size_t r) {
    std::vector<double> v(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) v[c] = m.at(r, c);
    return v;
}

std::vector<double> flat_vec(const Tensor& m) {
    return std::vector<double>(m.vec().begin(), m.vec().end());
}

double vec_dist(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> sq(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sq[i] = (b[i] - a[i]) * (b[i] - a[i]);
    return std::sqrt(std::accumulate(sq.rbegin(), sq.rend(), 0.0));
}

double bf_seq_ade(const Tensor& sample, const Tensor& gt) {
    std::vector<double> per_frame;
    for (std::size_t t = 0; t < gt.rows(); ++t)
        per_frame.push_back(vec_dist(row_vec(sample, t), row_vec(gt, t)));
    return std::accumulate(per_frame.begin(), per_frame.end(), 0.0) /
           static_cast<double>(per_frame.size());
}

double bf_ade(const std::vector<Tensor>& samples, const Tensor& gt) {
    std::vector<double> scores;
    for (const Tensor& s : samples) scores.push_back(bf_seq_ade(s, gt));
    return *std::min_element(scores.begin(), scores.end());
}

double bf_fde(const std::vector<Tensor>& samples, const Tensor& gt) {
    std::vector<double> scores;
    const std::size_t last = gt.rows() - 1;
    for (const Tensor& s : samples)
        scores.push_back(vec_dist(row_vec(s, last), row_vec(gt, last)));
    return *std::min_element(scores.begin(), scores.end());
}

double bf_apd(const std::vector<Tensor>& samples) {
    std::vector<double> dists;
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = 0; j < samples.size(); ++j)
            if (j > i) dists.push_back(vec_dist(flat_vec(samples[i]), flat_vec(samples[j])));
    return std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
}

std::pair<double, double> bf_mm(const std::vector<Tensor>& samples,
                                const std::vector<const Tensor*>& pseudo) {
    std::vector<double> ades;
    std::vector<double> fdes;
    for (const Tensor* g : pseudo) {
        ades.push_back(bf_ade(samples, *g));
        fdes.push_back(bf_fde(samples, *g));
    }
    const double n = static_cast<double>(pseudo.size());
    return {std::accumulate(ades.begin(), ades.end(), 0.0) / n,
            std::accumulate(fdes.begin(), fdes.end(), 0.0) / n};
}

// Per-case stream derivation the harnesses commit to; pinned here so a reseed
// of the schedule shows up as a test failure.
std::uint64_t harness_case_seed(std::uint64_t seed, std::size_t index) {
    return Rng::derived(seed, 0xca5e0000ULL + index).next_u64();
}

Tensor permute_cols(const Tensor& m, const std::vector<std::size_t>& perm) {
    Tensor out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, perm[c]) = m.at(r, c);
    return out;
}

bool metrics_equal(const DiverseMetrics& a, const DiverseMetrics& b) {
    return a.apd == b.apd && a.ade == b.ade && a.fde == b.fde && a.mmade == b.mmade &&
           a.mmfde == b.mmfde;
}

// Six sequences sharing one observed window with futures offset along
// coordinate 0 by pairwise-distinct amounts, plus one far-away outlier.
MotionDataset calibration_dataset(const SkeletonTopology& topo, const ModelConfig& cfg) {
    MotionDataset data = smooth_dataset(topo, 1, cfg.t_obs + cfg.k_pred);
    const MotionSequence base = data.sequences[0];
    data.sequences.clear();
    const std::vector<double> offsets{0.0, 0.11, 0.25, 0.43, 0.66, 0.95};
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        MotionSequence seq = base;
        seq.id = "case" + std::to_string(s);
        for (std::size_t t = cfg.t_obs; t < seq.frames.rows(); ++t)
            seq.frames.at(t, 0) += offsets[s];
        data.sequences.push_back(std::move(seq));
    }
    MotionSequence outlier = base;
    outlier.id = "outlier";
    for (std::size_t i = 0; i < outlier.frames.size(); ++i) outlier.frames[i] += 10.0;
    data.sequences.push_back(std::move(outlier));
    return data;
}

}  // namespace

TEST_CASE("displacement metrics match hand examples") {
    const Tensor gt(2, 2, {0.0, 0.0, 0.0, 0.0});

    SUBCASE("perfect sample scores zero") {
        const std::vector<Tensor> samples{gt};
        CHECK(ade(samples, gt) == 0.0);
        CHECK(fde(samples, gt) == 0.0);
    }
    SUBCASE("constant offset gives its per-frame norm") {
        const std::vector<Tensor> samples{Tensor(2, 2, {3.0, 4.0, 3.0, 4.0})};
        CHECK(close(ade(samples, gt), 5.0, 1e-15));
        CHECK(close(fde(samples, gt), 5.0, 1e-15));
    }
    SUBCASE("minimum takes the best sample") {
        const std::vector<Tensor> samples{Tensor(2, 2, {3.0, 4.0, 3.0, 4.0}),
                                          Tensor(2, 2, {1.0, 0.0, 0.0, 1.0})};
        CHECK(close(ade(samples, gt), 1.0, 1e-15));
        CHECK(close(fde(samples, gt), 1.0, 1e-15));
        // A worse extra sample cannot raise the score.
        std::vector<Tensor> more = samples;
        more.push_back(Tensor::full(2, 2, 9.0));
        CHECK(ade(more, gt) == ade(samples, gt));
        CHECK(fde(more, gt) == fde(samples, gt));
    }
    SUBCASE("last frame drives fde alone") {
        const std::vector<Tensor> samples{Tensor(2, 2, {9.0, 9.0, 0.0, 2.0})};
        CHECK(close(fde(samples, gt), 2.0, 1e-15));
    }
    SUBCASE("shape and emptiness are rejected") {
        CHECK_THROWS_AS(ade({}, gt), Error);
        CHECK_THROWS_AS(fde({}, gt), Error);
        CHECK_THROWS_AS(ade({Tensor(1, 2)}, gt), Error);
        CHECK_THROWS_AS(ade({gt}, Tensor(0, 0)), Error);
    }
}

TEST_CASE("pairwise diversity matches hand examples") {
    SUBCASE("two flat sequences at distance three") {
        const std::vector<Tensor> samples{Tensor(1, 3, {0.0, 0.0, 0.0}),
                                          Tensor(1, 3, {3.0, 0.0, 0.0})};
        CHECK(close(apd(samples), 3.0, 1e-15));
    }
    SUBCASE("identical samples have zero spread") {
        const std::vector<Tensor> samples{Tensor::full(2, 2, 1.0), Tensor::full(2, 2, 1.0),
                                          Tensor::full(2, 2, 1.0)};
        CHECK(apd(samples) == 0.0);
    }
    SUBCASE("three samples average the three pair distances") {
        const std::vector<Tensor> samples{Tensor(1, 1, {0.0}), Tensor(1, 1, {1.0}),
                                          Tensor(1, 1, {3.0})};
        CHECK(close(apd(samples), (1.0 + 3.0 + 2.0) / 3.0, 1e-15));
    }
    SUBCASE("sample order is irrelevant") {
        Rng rng = Rng::derived(7, 0);
        std::vector<Tensor> samples;
        for (int i = 0; i < 4; ++i) samples.push_back(random_tensor(rng, 3, 4));
        const double forward = apd(samples);
        std::reverse(samples.begin(), samples.end());
        CHECK(close(apd(samples), forward, 1e-12));
    }
    SUBCASE("fewer than two samples is an error") {
        CHECK_THROWS_AS(apd({}), Error);
        CHECK_THROWS_AS(apd({Tensor(1, 1)}), Error);
    }
}

TEST_CASE("multimodal metrics average the per-target minima") {
    const Tensor g1(1, 2, {0.0, 0.0});
    const Tensor g2(1, 2, {4.0, 0.0});
    const std::vector<Tensor> samples{Tensor(1, 2, {1.0, 0.0})};

    SUBCASE("single pseudo target reduces to the plain metrics") {
        const auto [mmade, mmfde] = mm_metrics(samples, {&g1});
        CHECK(mmade == ade(samples, g1));
        CHECK(mmfde == fde(samples, g1));
    }
    SUBCASE("duplicating a target changes nothing") {
        const auto once = mm_metrics(samples, {&g1});
        const auto twice = mm_metrics(samples, {&g1, &g1});
        CHECK(once == twice);
    }
    SUBCASE("two targets average the two scores") {
        const auto [mmade, mmfde] = mm_metrics(samples, {&g1, &g2});
        CHECK(close(mmade, 0.5 * (1.0 + 3.0), 1e-15));
        CHECK(close(mmfde, 0.5 * (1.0 + 3.0), 1e-15));
    }
    SUBCASE("empty pseudo set is an error") {
        CHECK_THROWS_AS(mm_metrics(samples, {}), Error);
    }
}

TEST_CASE("metrics agree with brute-force recomputation on random inputs") {
    for (std::uint64_t trial = 0; trial < 24; ++trial) {
        Rng rng = Rng::derived(4242, trial);
        const std::size_t s_count = 1 + rng.below(4);
        const std::size_t k = 1 + rng.below(3);
        const std::size_t d = 1 + rng.below(6);
        const Tensor gt = random_tensor(rng, k, d);
        std::vector<Tensor> samples;
        for (std::size_t s = 0; s < s_count; ++s) samples.push_back(random_tensor(rng, k, d));

        CAPTURE(trial);
        CHECK(close(ade(samples, gt), bf_ade(samples, gt), 1e-12));
        CHECK(close(fde(samples, gt), bf_fde(samples, gt), 1e-12));
        if (s_count >= 2) CHECK(close(apd(samples), bf_apd(samples), 1e-12));

        std::vector<Tensor> extra;
        for (std::size_t g = 0; g < 1 + rng.below(3); ++g)
            extra.push_back(random_tensor(rng, k, d));
        std::vector<const Tensor*> pseudo;
        for (const Tensor& t : extra) pseudo.push_back(&t);
        const auto got = mm_metrics(samples, pseudo);
        const auto want = bf_mm(samples, pseudo);
        CHECK(close(got.first, want.first, 1e-12));
        CHECK(close(got.second, want.second, 1e-12));
    }
}

TEST_CASE("metrics are invariant under a rigid coordinate permutation") {
    Rng rng = Rng::derived(51, 3);
    const std::size_t k = 3;
    const std::size_t d = 6;
    const Tensor gt = random_tensor(rng, k, d);
    std::vector<Tensor> samples;
    for (int i = 0; i < 3; ++i) samples.push_back(random_tensor(rng, k, d));
    const std::vector<std::size_t> perm{4, 2, 0, 5, 1, 3};

    std::vector<Tensor> perm_samples;
    for (const Tensor& s : samples) perm_samples.push_back(permute_cols(s, perm));
    const Tensor perm_gt = permute_cols(gt, perm);

    CHECK(close(ade(samples, gt), ade(perm_samples, perm_gt), 1e-12));
    CHECK(close(fde(samples, gt), fde(perm_samples, perm_gt), 1e-12));
    CHECK(close(apd(samples), apd(perm_samples), 1e-12));
    const auto plain = mm_metrics(samples, {&gt});
    const auto turned = mm_metrics(perm_samples, {&perm_gt});
    CHECK(close(plain.first, turned.first, 1e-12));
    CHECK(close(plain.second, turned.second, 1e-12));
}

TEST_CASE("pseudo ground-truth grouping follows anchor distances") {
    SUBCASE("groups form at the threshold, self always included") {
        const std::vector<Tensor> anchors{Tensor(1, 1, {0.0}), Tensor(1, 1, {0.3}),
                                          Tensor(1, 1, {1.0})};
        const auto sets = pseudo_gt_sets(anchors, 0.5);
        REQUIRE(sets.size() == 3);
        CHECK(sets[0] == std::vector<std::size_t>{0, 1});
        CHECK(sets[1] == std::vector<std::size_t>{0, 1});
        CHECK(sets[2] == std::vector<std::size_t>{2});
    }
    SUBCASE("the boundary distance is included") {
        const std::vector<Tensor> anchors{Tensor(1, 1, {0.0}), Tensor(1, 1, {0.5})};
        const auto sets = pseudo_gt_sets(anchors, 0.5);
        CHECK(sets[0].size() == 2);
        CHECK(sets[1].size() == 2);
    }
    SUBCASE("bad thresholds and shapes are rejected") {
        const std::vector<Tensor> anchors{Tensor(1, 2)};
        CHECK_THROWS_AS(pseudo_gt_sets(anchors, 0.0), Error);
        CHECK_THROWS_AS(pseudo_gt_sets(anchors, -1.0), Error);
        CHECK_THROWS_AS(pseudo_gt_sets({Tensor(2, 2)}, 0.5), Error);
        CHECK_THROWS_AS(pseudo_gt_sets({Tensor(1, 2), Tensor(1, 3)}, 0.5), Error);
    }
}

TEST_CASE("angle error averages full-pose norms per horizon step") {
    const SkeletonTopology topo = topo3();
    const std::size_t d = topo.pose_dim();

    SUBCASE("single deviation shows up in its frame only") {
        Tensor gt(2, d);
        Tensor pred = gt;
        pred.at(0, 2) += 0.3;
        const auto mae = mae_angle(topo, {pred}, {gt});
        REQUIRE(mae.size() == 2);
        CHECK(close(mae[0], 0.3, 1e-15));
        CHECK(mae[1] == 0.0);
    }
    SUBCASE("two cases average") {
        Tensor gt(1, d);
        Tensor a = gt;
        a.at(0, 0) += 3.0;
        a.at(0, 1) += 4.0;  // norm 5
        Tensor b = gt;
        b.at(0, 5) += 1.0;  // norm 1
        const auto mae = mae_angle(topo, {a, b}, {gt, gt});
        CHECK(close(mae[0], 3.0, 1e-15));
    }
    SUBCASE("coordinate permutation leaves the norm unchanged") {
        Rng rng = Rng::derived(8, 1);
        const Tensor gt = random_tensor(rng, 2, d);
        const Tensor pred = random_tensor(rng, 2, d);
        const std::vector<std::size_t> perm{5, 3, 1, 0, 4, 2};
        const auto plain = mae_angle(topo, {pred}, {gt});
        const auto turned = mae_angle(topo, {permute_cols(pred, perm)}, {permute_cols(gt, perm)});
        for (std::size_t t = 0; t < plain.size(); ++t) CHECK(close(plain[t], turned[t], 1e-12));
    }
    SUBCASE("non-angle channels are rejected") {
        SkeletonTopology cart = topo;
        cart.semantics = ChannelSemantics::cartesian;
        CHECK_THROWS_AS(mae_angle(cart, {Tensor(1, d)}, {Tensor(1, d)}), Error);
    }
    SUBCASE("mismatched shapes are rejected") {
        CHECK_THROWS_AS(mae_angle(topo, {}, {}), Error);
        CHECK_THROWS_AS(mae_angle(topo, {Tensor(1, d)}, {Tensor(2, d)}), Error);
        CHECK_THROWS_AS(mae_angle(topo, {Tensor(1, d)}, {Tensor(1, d), Tensor(1, d)}), Error);
        CHECK_THROWS_AS(mae_angle(topo, {Tensor(1, d - 1)}, {Tensor(1, d - 1)}), Error);
    }
}

TEST_CASE("evaluation cases take the first long-enough window") {
    const SkeletonTopology topo = topo3();
    MotionDataset data = smooth_dataset(topo, 3, 7);
    data.sequences[1].frames = Tensor(5, topo.pose_dim());  // too short

    const auto cases = make_eval_cases(data, 4, 3);
    REQUIRE(cases.size() == 2);
    CHECK(cases[0].id == "seq0");
    CHECK(cases[1].id == "seq2");
    CHECK(cases[0].observed.frames.rows() == 4);
    CHECK(cases[0].future.rows() == 3);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t c = 0; c < topo.pose_dim(); ++c)
            CHECK(cases[0].observed.frames.at(t, c) == data.sequences[0].frames.at(t, c));
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t c = 0; c < topo.pose_dim(); ++c)
            CHECK(cases[0].future.at(t, c) == data.sequences[0].frames.at(4 + t, c));

    SUBCASE("no eligible sequence is an error") {
        CHECK_THROWS_AS(make_eval_cases(data, 10, 10), Error);
    }
    SUBCASE("degenerate windows are rejected") {
        CHECK_THROWS_AS(make_eval_cases(data, 0, 3), Error);
        CHECK_THROWS_AS(make_eval_cases(data, 4, 0), Error);
    }
}

TEST_CASE("diverse evaluation matches a step-by-step recomputation") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);
    const MotionDataset data = smooth_dataset(topo, 4, 8);

    DiverseEvalConfig dc;
    dc.samples = 3;
    dc.threshold = 2.0;
    dc.seed = 77;
    const DiverseEvalResult result = eval_diverse(model, data, dc);

    REQUIRE(result.cases == 4);
    REQUIRE(result.per_case.size() == 4);
    REQUIRE(result.ids.size() == 4);

    // Recompute every case with the library's forecaster but brute-force metrics.
    const auto cases = make_eval_cases(data, cfg.t_obs, cfg.k_pred);
    std::vector<Tensor> anchors;
    for (const EvalCase& ec : cases) {
        const std::size_t last = ec.observed.frames.rows() - 1;
        Tensor a(1, topo.pose_dim());
        for (std::size_t c = 0; c < topo.pose_dim(); ++c) a.at(0, c) = ec.observed.frames.at(last, c);
        anchors.push_back(normalize_frames(a, model.norm));
    }
    const auto sets = pseudo_gt_sets(anchors, dc.threshold);
    DiverseMetrics mean_acc;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        RolloutConfig rc;
        rc.horizon = cfg.k_pred;
        rc.samples = dc.samples;
        rc.seed = harness_case_seed(dc.seed, i);
        const ForecastBundle bundle = forecast(model, cases[i].observed, rc);
        std::vector<Tensor> frames;
        for (const ForecastSample& s : bundle.samples) frames.push_back(s.motion.frames);
        std::vector<const Tensor*> pseudo;
        for (std::size_t j : sets[i]) pseudo.push_back(&cases[j].future);

        CAPTURE(i);
        CHECK(close(result.per_case[i].apd, bf_apd(frames), 1e-12));
        CHECK(close(result.per_case[i].ade, bf_ade(frames, cases[i].future), 1e-12));
        CHECK(close(result.per_case[i].fde, bf_fde(frames, cases[i].future), 1e-12));
        const auto mm = bf_mm(frames, pseudo);
        CHECK(close(result.per_case[i].mmade, mm.first, 1e-12));
        CHECK(close(result.per_case[i].mmfde, mm.second, 1e-12));
        mean_acc.apd += result.per_case[i].apd;
        mean_acc.ade += result.per_case[i].ade;
        mean_acc.fde += result.per_case[i].fde;
    }
    CHECK(close(result.mean.apd, mean_acc.apd / 4.0, 1e-15));
    CHECK(close(result.mean.ade, mean_acc.ade / 4.0, 1e-15));
    CHECK(close(result.mean.fde, mean_acc.fde / 4.0, 1e-15));
}

TEST_CASE("diverse evaluation behaviors and guards") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);
    const MotionDataset data = smooth_dataset(topo, 4, 8);

    SUBCASE("reruns are identical") {
        DiverseEvalConfig dc;
        dc.samples = 3;
        const DiverseEvalResult a = eval_diverse(model, data, dc);
        const DiverseEvalResult b = eval_diverse(model, data, dc);
        REQUIRE(a.per_case.size() == b.per_case.size());
        CHECK(metrics_equal(a.mean, b.mean));
        for (std::size_t i = 0; i < a.per_case.size(); ++i)
            CHECK(metrics_equal(a.per_case[i], b.per_case[i]));
    }
    SUBCASE("a tiny threshold reduces multimodal metrics to the plain ones") {
        DiverseEvalConfig dc;
        dc.samples = 3;
        dc.threshold = 1e-9;
        const DiverseEvalResult r = eval_diverse(model, data, dc);
        for (const DiverseMetrics& m : r.per_case) {
            CHECK(m.mmade == m.ade);
            CHECK(m.mmfde == m.fde);
        }
    }
    SUBCASE("case cap keeps a prefix with unchanged per-case results") {
        DiverseEvalConfig dc;
        dc.samples = 3;
        const DiverseEvalResult full = eval_diverse(model, data, dc);
        dc.max_cases = 2;
        dc.threshold = 1e9;  // identical pseudo sets under truncation need a huge radius
        DiverseEvalConfig full_cfg = dc;
        full_cfg.max_cases = 0;
        const DiverseEvalResult wide = eval_diverse(model, data, full_cfg);
        const DiverseEvalResult capped = eval_diverse(model, data, dc);
        REQUIRE(capped.cases == 2);
        CHECK(capped.ids[0] == wide.ids[0]);
        CHECK(capped.per_case[0].ade == wide.per_case[0].ade);
        CHECK(full.cases == 4);
    }
    SUBCASE("poisson-disk strategy runs") {
        DiverseEvalConfig dc;
        dc.samples = 3;
        dc.strategy = SampleStrategy::poisson_disk;
        const DiverseEvalResult r = eval_diverse(model, data, dc);
        CHECK(r.cases == 4);
        for (const DiverseMetrics& m : r.per_case) CHECK(m.apd > 0.0);
    }
    SUBCASE("invalid configurations are rejected") {
        DiverseEvalConfig dc;
        dc.samples = 1;
        CHECK_THROWS_AS(eval_diverse(model, data, dc), Error);
        dc.samples = 3;
        dc.strategy = SampleStrategy::mean;
        CHECK_THROWS_AS(eval_diverse(model, data, dc), Error);
        dc.strategy = SampleStrategy::random;
        dc.beta = -1.0;
        CHECK_THROWS_AS(eval_diverse(model, data, dc), Error);
    }
    SUBCASE("foreign topology is rejected") {
        SkeletonTopology other = topo;
        other.part_labels = {"a", "a", "a"};
        const MotionDataset wrong = smooth_dataset(other, 2, 8);
        DiverseEvalConfig dc;
        CHECK_THROWS_AS(eval_diverse(model, wrong, dc), Error);
    }
}

TEST_CASE("deterministic evaluation equals angle error over mean rollouts") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);
    const MotionDataset data = smooth_dataset(topo, 3, 8);

    const DetEvalResult r = eval_deterministic(model, data);
    REQUIRE(r.cases == 3);
    REQUIRE(r.per_horizon.size() == cfg.k_pred);

    const auto cases = make_eval_cases(data, cfg.t_obs, cfg.k_pred);
    std::vector<Tensor> preds;
    std::vector<Tensor> gts;
    for (const EvalCase& ec : cases) {
        preds.push_back(rollout_mean(model, ec.observed, cfg.k_pred).motion.frames);
        gts.push_back(ec.future);
    }
    const auto want = mae_angle(topo, preds, gts);
    double overall = 0.0;
    for (std::size_t t = 0; t < want.size(); ++t) {
        CHECK(r.per_horizon[t] == want[t]);
        overall += want[t];
    }
    CHECK(close(r.overall, overall / static_cast<double>(want.size()), 1e-15));
}

TEST_CASE("mirror rank maps quantiles onto the ascending future order") {
    CHECK(mirror_rank(0.50, 51) == 0);
    CHECK(mirror_rank(0.45, 51) == 5);
    CHECK(mirror_rank(0.40, 51) == 10);
    CHECK(mirror_rank(0.25, 51) == 25);
    CHECK(mirror_rank(0.50, 1) == 0);
    CHECK(mirror_rank(0.01, 51) == 49);
    CHECK_THROWS_AS(mirror_rank(0.0, 51), Error);
    CHECK_THROWS_AS(mirror_rank(0.6, 51), Error);
    CHECK_THROWS_AS(mirror_rank(0.5, 0), Error);
}

TEST_CASE("quantile calibration matches a step-by-step recomputation") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);
    const MotionDataset data = calibration_dataset(topo, cfg);

    CalibrationConfig cc;
    cc.quantiles = {0.5, 0.25};
    cc.min_futures = 3;
    cc.seed = 5;
    const CalibrationReport report = empirical_quantile_eval(model, data, cc);

    CHECK(report.included == 6);
    CHECK(report.excluded == 1);
    CHECK_FALSE(report.insufficient);
    REQUIRE(report.ade_q.size() == 2);
    REQUIRE(report.fde_q.size() == 2);

    // Independent recomputation: the six clustered cases see the full cluster
    // as pseudo futures, ordered by distance to their own future.
    const auto cases = make_eval_cases(data, cfg.t_obs, cfg.k_pred);
    std::vector<double> want_ade(2, 0.0);
    std::vector<double> want_fde(2, 0.0);
    for (std::size_t i = 0; i < 6; ++i) {
        std::vector<std::size_t> order(6);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> dist(6);
        for (std::size_t j = 0; j < 6; ++j)
            dist[j] = vec_dist(flat_vec(cases[j].future), flat_vec(cases[i].future));
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
        });
        const std::uint64_t seed_i = harness_case_seed(cc.seed, i);
        for (std::size_t qi = 0; qi < cc.quantiles.size(); ++qi) {
            const double q = cc.quantiles[qi];
            const std::size_t rank =
                static_cast<std::size_t>(std::llround((1.0 - 2.0 * q) * 5.0));
            const Tensor& empirical = cases[order[rank]].future;
            const ForecastSample fs =
                sample_quantile_sequence(model, cases[i].observed, cfg.k_pred, q, seed_i);
            want_ade[qi] += bf_ade({fs.motion.frames}, empirical);
            want_fde[qi] += bf_fde({fs.motion.frames}, empirical);
        }
    }
    for (std::size_t qi = 0; qi < 2; ++qi) {
        CHECK(close(report.ade_q[qi], want_ade[qi] / 6.0, 1e-12));
        CHECK(close(report.fde_q[qi], want_fde[qi] / 6.0, 1e-12));
    }

    SUBCASE("the median quantile pairs the mean rollout with the own future") {
        // Rank 0 at q = 0.5 is each case's own future (self distance zero), and
        // the q = 0.5 rollout is exactly the mean rollout.
        double expect = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            const Tensor mean_frames = rollout_mean(model, cases[i].observed, cfg.k_pred).motion.frames;
            expect += bf_ade({mean_frames}, cases[i].future);
        }
        CHECK(close(report.ade_q[0], expect / 6.0, 1e-12));
    }
    SUBCASE("reruns are identical") {
        const CalibrationReport again = empirical_quantile_eval(model, data, cc);
        CHECK(again.ade_q == report.ade_q);
        CHECK(again.fde_q == report.fde_q);
    }
    SUBCASE("a high minimum empties the report instead of throwing") {
        CalibrationConfig strict = cc;
        strict.min_futures = 50;
        const CalibrationReport r = empirical_quantile_eval(model, data, strict);
        CHECK(r.insufficient);
        CHECK(r.included == 0);
        CHECK(r.excluded == 7);
        CHECK(r.ade_q.empty());
        CHECK(r.fde_q.empty());
    }
    SUBCASE("invalid configurations are rejected") {
        CalibrationConfig bad = cc;
        bad.quantiles = {};
        CHECK_THROWS_AS(empirical_quantile_eval(model, data, bad), Error);
        bad.quantiles = {0.7};
        CHECK_THROWS_AS(empirical_quantile_eval(model, data, bad), Error);
        bad = cc;
        bad.min_futures = 0;
        CHECK_THROWS_AS(empirical_quantile_eval(model, data, bad), Error);
    }
}

TEST_CASE("latent coverage is exact on futures the model itself produced") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);

    // Build sequences whose futures are the model's own mean rollouts, so the
    // true latents sit at the predicted means: every frame must be covered.
    MotionDataset data = smooth_dataset(topo, 3, cfg.t_obs);
    for (MotionSequence& seq : data.sequences) {
        const Rollout roll = rollout_mean(model, seq, cfg.k_pred);
        Tensor joined(cfg.t_obs + cfg.k_pred, topo.pose_dim());
        for (std::size_t t = 0; t < cfg.t_obs; ++t)
            for (std::size_t c = 0; c < topo.pose_dim(); ++c)
                joined.at(t, c) = seq.frames.at(t, c);
        for (std::size_t t = 0; t < cfg.k_pred; ++t)
            for (std::size_t c = 0; c < topo.pose_dim(); ++c)
                joined.at(cfg.t_obs + t, c) = roll.motion.frames.at(t, c);
        seq.frames = joined;
    }
    const CoverageReport r = latent_coverage(model, data, 0.8);
    CHECK(r.coverage == 1.0);
    CHECK(r.frames == 3 * cfg.k_pred);
    CHECK(r.cases == 3);
    CHECK(r.central_mass == 0.8);

    SUBCASE("ordinary data gives a deterministic fraction inside [0, 1]") {
        const MotionDataset plain = smooth_dataset(topo, 3, 8);
        const CoverageReport a = latent_coverage(model, plain, 0.8);
        const CoverageReport b = latent_coverage(model, plain, 0.8);
        CHECK(a.coverage == b.coverage);
        CHECK(a.coverage >= 0.0);
        CHECK(a.coverage <= 1.0);
    }
    SUBCASE("central mass must be a proper fraction") {
        CHECK_THROWS_AS(latent_coverage(model, data, 0.0), Error);
        CHECK_THROWS_AS(latent_coverage(model, data, 1.0), Error);
        CHECK_THROWS_AS(latent_coverage(model, data, -0.2), Error);
    }
}

TEST_CASE("median and percent-change helpers") {
    SUBCASE("odd and even medians") {
        DiverseMetrics a;
        a.ade = 3.0;
        DiverseMetrics b;
        b.ade = 1.0;
        DiverseMetrics c;
        c.ade = 2.0;
        CHECK(median_metrics({a, b, c}).ade == 2.0);
        DiverseMetrics d;
        d.ade = 10.0;
        CHECK(median_metrics({a, b, c, d}).ade == 2.5);
        CHECK_THROWS_AS(median_metrics({}), Error);
    }
    SUBCASE("percent change") {
        CHECK(percent_change(50.0, 45.0) == -10.0);
        CHECK(percent_change(4.0, 5.0) == 25.0);
        CHECK(percent_change(0.0, 5.0) == 0.0);
    }
}

TEST_CASE("sampling efficiency report compares strategies per seed") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);
    const MotionDataset data = smooth_dataset(topo, 3, 8);

    SamplingEfficiencyConfig sc;
    sc.s_small = 2;
    sc.s_large = 4;
    sc.seeds = {1, 2, 3};
    sc.threshold = 2.0;
    const SamplingEfficiencyReport r = sampling_efficiency_report(model, data, sc);

    CHECK(r.s_small == 2);
    CHECK(r.s_large == 4);
    REQUIRE(r.random_large.per_seed.size() == 3);
    REQUIRE(r.random_small.per_seed.size() == 3);
    REQUIRE(r.disk_small.per_seed.size() == 3);

    SUBCASE("per-seed entries equal standalone evaluations") {
        DiverseEvalConfig dc;
        dc.samples = 4;
        dc.threshold = 2.0;
        dc.seed = 2;
        const DiverseEvalResult solo = eval_diverse(model, data, dc);
        CHECK(metrics_equal(r.random_large.per_seed[1], solo.mean));
        dc.samples = 2;
        dc.strategy = SampleStrategy::poisson_disk;
        const DiverseEvalResult disk = eval_diverse(model, data, dc);
        CHECK(metrics_equal(r.disk_small.per_seed[1], disk.mean));
    }
    SUBCASE("medians and deltas are consistent with the helpers") {
        CHECK(metrics_equal(r.random_large.median, median_metrics(r.random_large.per_seed)));
        CHECK(metrics_equal(r.disk_small.median, median_metrics(r.disk_small.per_seed)));
        CHECK(r.disk_delta_pct.apd ==
              percent_change(r.random_large.median.apd, r.disk_small.median.apd));
        CHECK(r.random_delta_pct.ade ==
              percent_change(r.random_large.median.ade, r.random_small.median.ade));
    }
    SUBCASE("invalid configurations are rejected") {
        SamplingEfficiencyConfig bad = sc;
        bad.s_small = 4;
        CHECK_THROWS_AS(sampling_efficiency_report(model, data, bad), Error);
        bad = sc;
        bad.seeds = {};
        CHECK_THROWS_AS(sampling_efficiency_report(model, data, bad), Error);
        bad = sc;
        bad.s_small = 1;
        CHECK_THROWS_AS(sampling_efficiency_report(model, data, bad), Error);
    }
}

TEST_CASE("report emission is stable and machine-readable") {
    const SkeletonTopology topo = topo3();
    const ModelConfig cfg = tiny_config();
    const Model model = Model::create(topo, cfg);
    const MotionDataset data = smooth_dataset(topo, 3, 8);

    SUBCASE("diverse CSV and JSON") {
        DiverseEvalConfig dc;
        dc.samples = 3;
        const DiverseEvalResult r = eval_diverse(model, data, dc);
        const std::string csv = diverse_csv(r);
        CHECK(csv == diverse_csv(r));
        CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) ==
              r.cases + 1);
        CHECK(csv.rfind("case_id,apd,ade,fde,mmade,mmfde\n", 0) == 0);

        const nlohmann::json j = nlohmann::json::parse(diverse_json(r));
        CHECK(j["cases"] == r.cases);
        CHECK(j["mean"]["apd"] == r.mean.apd);
        CHECK(j["per_case"].size() == r.cases);
        CHECK(j["per_case"][0]["id"] == r.ids[0]);
        CHECK(j["per_case"][0]["ade"] == r.per_case[0].ade);
    }
    SUBCASE("deterministic CSV and JSON") {
        const DetEvalResult r = eval_deterministic(model, data);
        const std::string csv = det_csv(r);
        CHECK(csv.rfind("horizon,mae\n", 0) == 0);
        CHECK(csv.find("\n1,") != std::string::npos);
        const nlohmann::json j = nlohmann::json::parse(det_json(r));
        CHECK(j["overall"] == r.overall);
        CHECK(j["per_horizon"].size() == r.per_horizon.size());
    }
    SUBCASE("calibration CSV carries one row per quantile") {
        CalibrationReport r;
        r.quantiles = {0.5, 0.25};
        r.ade_q = {1.5, 2.5};
        r.fde_q = {1.0, 2.0};
        r.included = 6;
        const std::string csv = calibration_csv(r);
        CHECK(csv == "quantile,ade,fde\n0.5,1.5,1.0\n0.25,2.5,2.0\n");

        CoverageReport cov;
        cov.coverage = 0.75;
        cov.frames = 18;
        cov.cases = 6;
        const nlohmann::json j = nlohmann::json::parse(calibration_json(r, cov));
        CHECK(j["ade"][1] == 2.5);
        CHECK(j["coverage"]["coverage"] == 0.75);
        CHECK(j["insufficient"] == false);
    }
    SUBCASE("insufficient calibration emits only the header") {
        CalibrationReport r;
        r.quantiles = {0.5};
        r.insufficient = true;
        r.excluded = 4;
        CHECK(calibration_csv(r) == "quantile,ade,fde\n");
        const nlohmann::json j = nlohmann::json::parse(calibration_json(r, CoverageReport{}));
        CHECK(j["insufficient"] == true);
        CHECK(j["ade"].empty());
    }
    SUBCASE("sampling CSV and JSON") {
        SamplingEfficiencyConfig sc;
        sc.s_small = 2;
        sc.s_large = 3;
        sc.seeds = {1, 2};
        sc.threshold = 2.0;
        const SamplingEfficiencyReport r = sampling_efficiency_report(model, data, sc);
        const std::string csv = sampling_csv(r);
        CHECK(csv == sampling_csv(r));
        CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 1 + 3 * 2);
        CHECK(csv.find("poisson-disk,2,0,") != std::string::npos);
        CHECK(csv.find("random,3,1,") != std::string::npos);

        const nlohmann::json j = nlohmann::json::parse(sampling_json(r));
        CHECK(j["s_large"] == 3);
        CHECK(j["random_large"]["per_seed"].size() == 2);
        CHECK(j["disk_small"]["median"]["apd"] == r.disk_small.median.apd);
        CHECK(j["disk_delta_pct"]["ade"] == r.disk_delta_pct.ade);
    }
}
