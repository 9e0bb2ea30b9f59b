#include "probmotion/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "probmotion/error.hpp"
#include "probmotion/parallel.hpp"
#include "probmotion/rng.hpp"

namespace probmotion {

using nlohmann::json;

namespace {

// Signal shape constants. Amplitudes sum to at most 2.0 and the mode offset
// to 0.3, leaving 0.7 of headroom below the ±3 clamp — over twenty standard
// deviations at the default noise level. The mode offset and frequency shift
// are sized so that, with the branch hidden from the observation (default
// branch_frame), the irreducible across-mode-average error of a mode-blind
// predictor stays well inside half of an untrained model's error: large
// enough to separate modes cleanly, small enough that learning the shared
// signal still dominates the measurable error.
constexpr std::size_t sinusoids_per_channel = 2;
constexpr double amp_lo = 0.25, amp_hi = 1.0;       // per-sinusoid amplitude
constexpr double freq_lo = 0.08, freq_hi = 0.58;    // rad/frame
constexpr double mode_dir_amp = 0.3;                // direction offset scale
constexpr double mode_freq_shift = 0.08;            // max relative freq change
constexpr double ramp_frames = 5.0;                 // offset fade-in length
constexpr double channel_clamp = 3.0;

constexpr std::uint64_t base_stream_tag = 0xba5e0000ULL;

}  // namespace

void validate_synth_config(const SynthConfig& cfg) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) raise(Errc::config, msg);
    };
    check(cfg.joints >= 2, "joints must be >= 2 to form two chains");
    check(cfg.channels >= 1, "channels must be >= 1");
    check(cfg.n_sequences >= 1, "n_sequences must be >= 1");
    check(cfg.length >= 2, "length must be >= 2 frames");
    check(cfg.fps > 0.0, "fps must be positive");
    check(cfg.modes >= 1, "modes must be >= 1");
    check(cfg.branch_frame < cfg.length, "branch_frame must fall inside the sequence");
    check(cfg.noise_std >= 0.0, "noise_std must be nonnegative");
}

SynthConfig synth_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) raise(Errc::config, "config must be a JSON object");

    SynthConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "joints") cfg.joints = value.get<std::size_t>();
            else if (key == "channels") cfg.channels = value.get<std::size_t>();
            else if (key == "n_sequences") cfg.n_sequences = value.get<std::size_t>();
            else if (key == "length") cfg.length = value.get<std::size_t>();
            else if (key == "fps") cfg.fps = value.get<double>();
            else if (key == "modes") cfg.modes = value.get<std::size_t>();
            else if (key == "branch_frame") cfg.branch_frame = value.get<std::size_t>();
            else if (key == "noise_std") cfg.noise_std = value.get<double>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else raise(Errc::config, "unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        raise(Errc::config, std::string("bad config value: ") + e.what());
    }
    validate_synth_config(cfg);
    return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    json j{{"joints", cfg.joints},
           {"channels", cfg.channels},
           {"n_sequences", cfg.n_sequences},
           {"length", cfg.length},
           {"fps", cfg.fps},
           {"modes", cfg.modes},
           {"branch_frame", cfg.branch_frame},
           {"noise_std", cfg.noise_std},
           {"seed", cfg.seed}};
    return j.dump(2);
}

SkeletonTopology chain_pair_topology(std::size_t joints, std::size_t channels) {
    if (joints < 2) raise(Errc::config, "chain pair needs at least 2 joints");
    if (channels < 1) raise(Errc::config, "chain pair needs at least 1 channel");
    const std::size_t head = (joints + 1) / 2;

    SkeletonTopology topo;
    topo.channels = channels;
    topo.semantics = ChannelSemantics::expmap;
    for (std::size_t j = 0; j < joints; ++j) {
        topo.joint_names.push_back("j" + std::to_string(j));
        if (j == 0) topo.parents.push_back(-1);
        else if (j == head) topo.parents.push_back(0);
        else topo.parents.push_back(static_cast<int>(j - 1));
        topo.part_labels.push_back(j < head ? "core" : "limb");
    }
    require_valid_topology(topo);
    return topo;
}

std::size_t mode_of_id(const std::string& id) {
    const std::size_t pos = id.rfind("_m");
    if (pos == std::string::npos || pos + 2 >= id.size())
        raise(Errc::format, "sequence id '" + id + "' carries no mode suffix");
    std::size_t mode = 0;
    for (std::size_t i = pos + 2; i < id.size(); ++i) {
        const char c = id[i];
        if (c < '0' || c > '9')
            raise(Errc::format, "sequence id '" + id + "' carries no mode suffix");
        mode = mode * 10 + static_cast<std::size_t>(c - '0');
    }
    return mode;
}

MotionDataset generate_synthetic(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    const SkeletonTopology topo = chain_pair_topology(cfg.joints, cfg.channels);
    const std::size_t d = topo.pose_dim();
    const double b = static_cast<double>(cfg.branch_frame);

    // One shared base signal per file.
    Rng base(Rng::derived(cfg.seed, base_stream_tag));
    std::vector<std::array<double, sinusoids_per_channel>> amp(d), freq(d), phase(d);
    std::vector<double> dir_phase(d);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t s = 0; s < sinusoids_per_channel; ++s) {
            amp[c][s] = amp_lo + (amp_hi - amp_lo) * base.uniform01();
            freq[c][s] = freq_lo + (freq_hi - freq_lo) * base.uniform01();
            phase[c][s] = 2.0 * std::numbers::pi * base.uniform01();
        }
        dir_phase[c] = 2.0 * std::numbers::pi * base.uniform01();
    }

    // Mode direction offsets sit on a circle through every channel's random
    // pattern phase, so distinct modes separate in every part of the body;
    // frequency shifts spread evenly over [-max, max].
    std::vector<std::vector<double>> dir(cfg.modes, std::vector<double>(d));
    std::vector<double> freq_scale(cfg.modes);
    for (std::size_t k = 0; k < cfg.modes; ++k) {
        const double angle =
            2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(cfg.modes);
        for (std::size_t c = 0; c < d; ++c)
            dir[k][c] = mode_dir_amp * std::cos(angle + dir_phase[c]);
        freq_scale[k] =
            cfg.modes == 1
                ? 1.0
                : 1.0 + mode_freq_shift *
                            (2.0 * static_cast<double>(k) / static_cast<double>(cfg.modes - 1) -
                             1.0);
    }

    MotionDataset data;
    data.topology = topo;
    data.sequences.resize(cfg.n_sequences);
    parallel_for(cfg.n_sequences, [&](std::size_t i) {
        Rng rs = Rng::derived(cfg.seed, i);
        const std::size_t mode = rs.below(cfg.modes);

        MotionSequence& seq = data.sequences[i];
        char name[40];
        std::snprintf(name, sizeof name, "seq%05zu_m%zu", i, mode);
        seq.id = name;
        seq.fps = cfg.fps;
        seq.frames = Tensor(cfg.length, d);

        for (std::size_t t = 0; t < cfg.length; ++t) {
            const double tf = static_cast<double>(t);
            const double ramp = std::clamp((tf - b) / ramp_frames, 0.0, 1.0);
            for (std::size_t c = 0; c < d; ++c) {
                double v = 0.0;
                for (std::size_t s = 0; s < sinusoids_per_channel; ++s) {
                    // Phase-continuous branch: the argument advances at the
                    // base rate up to the branch frame, then at the mode's.
                    const double arg =
                        tf <= b ? freq[c][s] * tf
                                : freq[c][s] * b + freq[c][s] * freq_scale[mode] * (tf - b);
                    v += amp[c][s] * std::sin(arg + phase[c][s]);
                }
                v += ramp * dir[mode][c];
                if (cfg.noise_std > 0.0) v += rs.normal(0.0, cfg.noise_std);
                seq.frames.at(t, c) = std::clamp(v, -channel_clamp, channel_clamp);
            }
        }
    });
    return data;
}

}  // namespace probmotion
