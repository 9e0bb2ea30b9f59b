#pragma once

#include <cstdint>
#include <string>

#include "probmotion/motion_data.hpp"
#include "probmotion/skeleton.hpp"

// Seeded procedural generator of multimodal skeletal motion. Each generated
// file draws one set of base sinusoids (two per channel) from the seed; every
// sequence plays that shared signal up to the branch frame, then continues in
// one of `modes` futures chosen uniformly per sequence: a direction offset
// ramps in over a few frames and the sinusoid frequencies shift
// phase-continuously. Per-sequence Gaussian noise rides on top. The true mode
// is recorded as an "_m<k>" suffix on the sequence id, so calibration tests
// know the exact future distribution given a prefix (uniform over modes).
// Channel values are clamped to [-3, 3]; at default amplitudes the headroom
// is wide enough that the clamp never engages.

namespace probmotion {

struct SynthConfig {
    std::size_t joints = 8;  // laid out as two chains ("core", "limb") rooted at joint 0
    std::size_t channels = 3;
    std::size_t n_sequences = 500;
    std::size_t length = 45;  // frames per sequence (observed + horizon)
    double fps = 25.0;
    std::size_t modes = 2;
    // Last frame shared by every mode. The default equals the default
    // observation window's final frame (15 observed frames -> index 14), so
    // an observed prefix carries zero mode information and the conditional
    // future really is uniform over modes — the structure the calibration
    // and sampling-efficiency harnesses rely on. A smaller value leaks the
    // mode into the observation and collapses the future to one mode.
    std::size_t branch_frame = 14;
    double noise_std = 0.03;
    std::uint64_t seed = 1;
};

void validate_synth_config(const SynthConfig& cfg);

// Strict JSON parsing mirroring the model config: unknown keys are config
// errors, missing keys take the defaults above.
SynthConfig synth_config_from_json(const std::string& text);
std::string synth_config_to_json(const SynthConfig& cfg);

// Two chains hanging off joint 0: joints [0, ceil(J/2)) labeled "core",
// the rest a second chain rooted at 0 labeled "limb". J=8, C=3 gives the
// default skeleton.
SkeletonTopology chain_pair_topology(std::size_t joints, std::size_t channels);

// Deterministic per (config); sequences are generated in parallel from
// per-sequence derived RNG streams, so thread count cannot change output.
MotionDataset generate_synthetic(const SynthConfig& cfg);

// Ground-truth mode parsed from the "_m<k>" id suffix. Error(format) if the
// id carries none.
std::size_t mode_of_id(const std::string& id);

}  // namespace probmotion
