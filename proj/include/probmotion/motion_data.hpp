#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probmotion/skeleton.hpp"
#include "probmotion/tensor.hpp"

// Motion sequences, dataset file IO, and per-channel normalization.
//
// File format (UTF-8 JSON):
//   {"version": 1,
//    "topology": {"joint_names": [...], "parents": [...], "channels": C,
//                 "semantics": "expmap"|"cartesian", "part_labels": [...]},
//    "sequences": [{"id": str, "fps": number, "frames": [[J*C numbers], ...]}]}
// Numbers are serialized with round-trip precision, so write -> read
// reproduces frames bit-exactly.

namespace probmotion {

struct MotionSequence {
    std::string id;
    double fps = 0.0;
    Tensor frames;  // T x (J*C)
};

struct MotionDataset {
    SkeletonTopology topology;
    std::vector<MotionSequence> sequences;
};

MotionDataset load_motion_file(const std::string& path);
void save_motion_file(const MotionDataset& data, const std::string& path);

// Per-channel statistics computed on the training split only. The fingerprint
// covers the raw mean/std bytes so downstream artifacts can verify that no
// recomputation happened on another split.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // floored at 1e-6
    bool any_floored = false;
    std::uint64_t fingerprint = 0;
};

inline constexpr double norm_std_floor = 1e-6;

NormStats compute_norm_stats(const std::vector<const MotionSequence*>& train_split);

Tensor normalize_frames(const Tensor& frames, const NormStats& stats);
Tensor denormalize_frames(const Tensor& frames, const NormStats& stats);
MotionSequence normalize(const MotionSequence& seq, const NormStats& stats);
MotionSequence denormalize(const MotionSequence& seq, const NormStats& stats);

}  // namespace probmotion
