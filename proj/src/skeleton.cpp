#include "probmotion/skeleton.hpp"

#include <algorithm>
#include <set>

#include "probmotion/error.hpp"

namespace probmotion {

const char* semantics_name(ChannelSemantics s) {
    return s == ChannelSemantics::expmap ? "expmap" : "cartesian";
}

ChannelSemantics semantics_from_name(const std::string& name) {
    if (name == "expmap") return ChannelSemantics::expmap;
    if (name == "cartesian") return ChannelSemantics::cartesian;
    raise(Errc::format, "unknown channel semantics '" + name + "'");
}

std::vector<std::string> validate_topology(const SkeletonTopology& t) {
    std::vector<std::string> errors;
    const std::size_t j = t.joint_names.size();

    if (j < 2) errors.push_back("needs >= 2 joints, got " + std::to_string(j));
    if (t.channels < 1) errors.push_back("needs >= 1 channel per joint");
    if (t.parents.size() != j)
        errors.push_back("parents has " + std::to_string(t.parents.size()) + " entries for " +
                         std::to_string(j) + " joints");
    if (t.part_labels.size() != j)
        errors.push_back("part_labels has " + std::to_string(t.part_labels.size()) +
                         " entries for " + std::to_string(j) + " joints");

    if (t.parents.size() == j) {
        for (std::size_t i = 0; i < j; ++i) {
            const int p = t.parents[i];
            if (p < -1 || p >= static_cast<int>(j))
                errors.push_back("joint " + std::to_string(i) + " has parent index " +
                                 std::to_string(p) + " out of range");
            else if (p == static_cast<int>(i))
                errors.push_back("joint " + std::to_string(i) + " is its own parent");
        }

        // Forest check: walking parent chains must never re-enter the walk.
        // state: 0 = unvisited, 1 = on the current walk, 2 = known good.
        std::vector<int> state(j, 0);
        for (std::size_t start = 0; start < j; ++start) {
            if (state[start] != 0) continue;
            std::vector<std::size_t> walk;
            std::size_t cur = start;
            bool bad = false;
            while (true) {
                if (state[cur] == 1) {
                    errors.push_back("cycle at joint " + std::to_string(cur));
                    bad = true;
                    break;
                }
                if (state[cur] == 2) break;
                state[cur] = 1;
                walk.push_back(cur);
                const int p = t.parents[cur];
                if (p < 0 || p >= static_cast<int>(j) || p == static_cast<int>(cur)) break;
                cur = static_cast<std::size_t>(p);
            }
            for (std::size_t w : walk) state[w] = 2;
            if (bad) break;  // one cycle report is enough
        }
    }

    if (t.part_labels.size() == j && j > 0) {
        std::set<std::string> labels(t.part_labels.begin(), t.part_labels.end());
        if (labels.size() < 2) errors.push_back("needs >= 2 distinct part labels");
    }

    return errors;
}

void require_valid_topology(const SkeletonTopology& t) {
    const auto errors = validate_topology(t);
    if (errors.empty()) return;
    std::string joined = "invalid topology:";
    for (const auto& e : errors) joined += " [" + e + "]";
    raise(Errc::data, joined);
}

std::vector<std::string> validate_partition(const SkeletonTopology& t, const PartPartition& p) {
    std::vector<std::string> errors;
    if (p.first.empty()) errors.push_back("first index set is empty");
    if (p.second.empty()) errors.push_back("second index set is empty");

    std::vector<int> seen(t.joints(), 0);
    auto mark = [&](const std::vector<std::size_t>& set, const char* name) {
        for (std::size_t idx : set) {
            if (idx >= t.joints()) {
                errors.push_back(std::string(name) + " contains joint " + std::to_string(idx) +
                                 " out of range");
                continue;
            }
            if (++seen[idx] > 1)
                errors.push_back("joint " + std::to_string(idx) + " appears twice");
        }
    };
    mark(p.first, "first");
    mark(p.second, "second");
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] == 0) errors.push_back("joint " + std::to_string(i) + " not covered");
    return errors;
}

Tensor build_cross_adjacency(const SkeletonTopology& t, const PartPartition& p) {
    const auto errors = validate_partition(t, p);
    if (!errors.empty()) {
        std::string joined = "invalid partition:";
        for (const auto& e : errors) joined += " [" + e + "]";
        raise(Errc::data, joined);
    }

    auto connected = [&](std::size_t a, std::size_t b) {
        return (t.parents[a] == static_cast<int>(b)) || (t.parents[b] == static_cast<int>(a));
    };

    Tensor adj(p.second.size(), p.first.size());
    for (std::size_t i = 0; i < p.second.size(); ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < p.first.size(); ++k) {
            const double e = connected(p.second[i], p.first[k]) ? 1.0 : 0.0;
            adj.at(i, k) = e;
            row_sum += e;
        }
        if (row_sum == 0.0) {
            const double u = 1.0 / static_cast<double>(p.first.size());
            for (std::size_t k = 0; k < p.first.size(); ++k) adj.at(i, k) = u;
        } else {
            for (std::size_t k = 0; k < p.first.size(); ++k) adj.at(i, k) /= row_sum;
        }
    }
    return adj;
}

std::vector<PartPartition> default_partition_schedule(const SkeletonTopology& t,
                                                      std::size_t layer_count) {
    require_valid_topology(t);

    // Scheme 0: split by part label (sorted label set, first half vs rest).
    std::set<std::string> label_set(t.part_labels.begin(), t.part_labels.end());
    std::vector<std::string> labels(label_set.begin(), label_set.end());
    std::set<std::string> low_labels(labels.begin(), labels.begin() + labels.size() / 2);
    PartPartition by_label;
    for (std::size_t i = 0; i < t.joints(); ++i) {
        if (low_labels.count(t.part_labels[i]))
            by_label.first.push_back(i);
        else
            by_label.second.push_back(i);
    }

    // Scheme 1: joint-index parity.
    PartPartition by_parity;
    for (std::size_t i = 0; i < t.joints(); ++i)
        (i % 2 == 0 ? by_parity.first : by_parity.second).push_back(i);

    std::vector<PartPartition> schedule;
    schedule.reserve(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l)
        schedule.push_back(((l / 2) % 2 == 0) ? by_label : by_parity);
    return schedule;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t topology_fingerprint(const SkeletonTopology& t) {
    std::string canon;
    for (const auto& n : t.joint_names) canon += n + '\x1f';
    canon += '\x1e';
    for (int p : t.parents) canon += std::to_string(p) + '\x1f';
    canon += '\x1e';
    canon += std::to_string(t.channels);
    canon += '\x1e';
    canon += semantics_name(t.semantics);
    canon += '\x1e';
    for (const auto& l : t.part_labels) canon += l + '\x1f';
    return fnv1a64(canon.data(), canon.size());
}

}  // namespace probmotion
