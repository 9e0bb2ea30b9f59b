#include "probmotion/motion_data.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "probmotion/error.hpp"
#include "probmotion/fileio.hpp"

namespace probmotion {

using nlohmann::json;

namespace {

json topology_to_json(const SkeletonTopology& t) {
    return json{{"joint_names", t.joint_names},
                {"parents", t.parents},
                {"channels", t.channels},
                {"semantics", semantics_name(t.semantics)},
                {"part_labels", t.part_labels}};
}

SkeletonTopology topology_from_json(const json& j) {
    SkeletonTopology t;
    try {
        t.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        t.parents = j.at("parents").get<std::vector<int>>();
        t.channels = j.at("channels").get<std::size_t>();
        t.semantics = semantics_from_name(j.at("semantics").get<std::string>());
        t.part_labels = j.at("part_labels").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        raise(Errc::format, std::string("bad topology object: ") + e.what());
    }
    return t;
}

}  // namespace

MotionDataset load_motion_file(const std::string& path) {
    const std::string text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::format, "'" + path + "' is not valid JSON: " + e.what());
    }

    MotionDataset data;
    try {
        if (!j.is_object() || !j.contains("version"))
            raise(Errc::format, "'" + path + "' is missing the version field");
        const int version = j.at("version").get<int>();
        if (version != 1)
            raise(Errc::format, "'" + path + "' has unsupported version " +
                                    std::to_string(version) + " (expected 1)");
        data.topology = topology_from_json(j.at("topology"));
        require_valid_topology(data.topology);

        const std::size_t width = data.topology.pose_dim();
        for (const auto& js : j.at("sequences")) {
            MotionSequence seq;
            seq.id = js.at("id").get<std::string>();
            seq.fps = js.at("fps").get<double>();
            if (!(seq.fps > 0.0))
                raise(Errc::format, "sequence '" + seq.id + "' has non-positive fps");
            const auto& frames = js.at("frames");
            if (!frames.is_array() || frames.empty())
                raise(Errc::format, "sequence '" + seq.id + "' has no frames");
            seq.frames = Tensor(frames.size(), width);
            std::size_t r = 0;
            for (const auto& row : frames) {
                if (!row.is_array() || row.size() != width)
                    raise(Errc::format, "sequence '" + seq.id + "' frame " + std::to_string(r) +
                                            " has width " + std::to_string(row.size()) +
                                            ", expected " + std::to_string(width));
                for (std::size_t c = 0; c < width; ++c) {
                    const double v = row[c].get<double>();
                    if (!std::isfinite(v))
                        raise(Errc::format, "sequence '" + seq.id + "' has a non-finite entry");
                    seq.frames.at(r, c) = v;
                }
                ++r;
            }
            data.sequences.push_back(std::move(seq));
        }
    } catch (const json::exception& e) {
        raise(Errc::format, "'" + path + "' does not match the motion schema: " + e.what());
    }
    return data;
}

void save_motion_file(const MotionDataset& data, const std::string& path) {
    require_valid_topology(data.topology);
    json j;
    j["version"] = 1;
    j["topology"] = topology_to_json(data.topology);
    j["sequences"] = json::array();
    for (const auto& seq : data.sequences) {
        if (seq.frames.cols() != data.topology.pose_dim())
            raise(Errc::shape, "sequence '" + seq.id + "' width " +
                                   std::to_string(seq.frames.cols()) +
                                   " does not match topology dim " +
                                   std::to_string(data.topology.pose_dim()));
        json js;
        js["id"] = seq.id;
        js["fps"] = seq.fps;
        json rows = json::array();
        for (std::size_t r = 0; r < seq.frames.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < seq.frames.cols(); ++c) row.push_back(seq.frames.at(r, c));
            rows.push_back(std::move(row));
        }
        js["frames"] = std::move(rows);
        j["sequences"].push_back(std::move(js));
    }
    atomic_write_text(path, j.dump());
}

NormStats compute_norm_stats(const std::vector<const MotionSequence*>& train_split) {
    if (train_split.empty()) raise(Errc::data, "cannot compute stats from an empty split");
    const std::size_t width = train_split[0]->frames.cols();

    NormStats stats;
    stats.mean.assign(width, 0.0);
    stats.stddev.assign(width, 0.0);

    std::size_t total_rows = 0;
    for (const auto* seq : train_split) {
        if (seq->frames.cols() != width)
            raise(Errc::shape, "sequences in the split disagree on pose width");
        total_rows += seq->frames.rows();
        for (std::size_t r = 0; r < seq->frames.rows(); ++r)
            for (std::size_t c = 0; c < width; ++c) stats.mean[c] += seq->frames.at(r, c);
    }
    for (auto& m : stats.mean) m /= static_cast<double>(total_rows);

    for (const auto* seq : train_split)
        for (std::size_t r = 0; r < seq->frames.rows(); ++r)
            for (std::size_t c = 0; c < width; ++c) {
                const double d = seq->frames.at(r, c) - stats.mean[c];
                stats.stddev[c] += d * d;
            }
    for (std::size_t c = 0; c < width; ++c) {
        double s = std::sqrt(stats.stddev[c] / static_cast<double>(total_rows));
        if (s < norm_std_floor) {
            s = norm_std_floor;
            stats.any_floored = true;
        }
        stats.stddev[c] = s;
    }
    if (stats.any_floored)
        std::fprintf(stderr, "warning: zero-variance channel floored to %g\n", norm_std_floor);

    std::uint64_t h = fnv1a64(stats.mean.data(), stats.mean.size() * sizeof(double));
    stats.fingerprint = fnv1a64(stats.stddev.data(), stats.stddev.size() * sizeof(double), h);
    return stats;
}

Tensor normalize_frames(const Tensor& frames, const NormStats& stats) {
    if (frames.cols() != stats.mean.size())
        raise(Errc::shape, "frames width " + std::to_string(frames.cols()) +
                               " does not match stats width " + std::to_string(stats.mean.size()));
    Tensor out(frames.rows(), frames.cols());
    for (std::size_t r = 0; r < frames.rows(); ++r)
        for (std::size_t c = 0; c < frames.cols(); ++c)
            out.at(r, c) = (frames.at(r, c) - stats.mean[c]) / stats.stddev[c];
    return out;
}

Tensor denormalize_frames(const Tensor& frames, const NormStats& stats) {
    if (frames.cols() != stats.mean.size())
        raise(Errc::shape, "frames width " + std::to_string(frames.cols()) +
                               " does not match stats width " + std::to_string(stats.mean.size()));
    Tensor out(frames.rows(), frames.cols());
    for (std::size_t r = 0; r < frames.rows(); ++r)
        for (std::size_t c = 0; c < frames.cols(); ++c)
            out.at(r, c) = frames.at(r, c) * stats.stddev[c] + stats.mean[c];
    return out;
}

MotionSequence normalize(const MotionSequence& seq, const NormStats& stats) {
    return MotionSequence{seq.id, seq.fps, normalize_frames(seq.frames, stats)};
}

MotionSequence denormalize(const MotionSequence& seq, const NormStats& stats) {
    return MotionSequence{seq.id, seq.fps, denormalize_frames(seq.frames, stats)};
}

}  // namespace probmotion
