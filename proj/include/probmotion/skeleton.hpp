#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probmotion/tensor.hpp"

// Skeletal topology, body-part partitions, and the cross-adjacency used by
// the part-aware coupling layers.

namespace probmotion {

enum class ChannelSemantics { expmap, cartesian };

const char* semantics_name(ChannelSemantics s);
ChannelSemantics semantics_from_name(const std::string& name);  // Error(format) if unknown

struct SkeletonTopology {
    std::vector<std::string> joint_names;
    std::vector<int> parents;  // parent joint index, -1 for a root
    std::size_t channels = 0;  // values per joint
    ChannelSemantics semantics = ChannelSemantics::expmap;
    std::vector<std::string> part_labels;  // per-joint body-part label

    std::size_t joints() const { return joint_names.size(); }
    std::size_t pose_dim() const { return joints() * channels; }
};

// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate_topology(const SkeletonTopology& t);
// Raises Error(data) listing every violation.
void require_valid_topology(const SkeletonTopology& t);

// Two disjoint joint-index sets covering all joints.
struct PartPartition {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
};

std::vector<std::string> validate_partition(const SkeletonTopology& t, const PartPartition& p);

// Bipartite adjacency: entry (i, j) > 0 iff joint second[i] shares a skeletal
// edge with joint first[j]. Rows are L1-normalized; a row with no cross edges
// falls back to the uniform row 1/|first|.
Tensor build_cross_adjacency(const SkeletonTopology& t, const PartPartition& p);

// Per-layer partitions for a coupling stack: layers alternate between a
// label-based split (part_labels sorted, first half of the label set vs the
// rest) and a joint-index parity split, switching scheme every two layers so
// consecutive layers shift opposite halves of the same scheme.
std::vector<PartPartition> default_partition_schedule(const SkeletonTopology& t,
                                                      std::size_t layer_count);

// FNV-1a over raw bytes; used for topology/stats fingerprints and checkpoint
// checksums.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::uint64_t topology_fingerprint(const SkeletonTopology& t);

}  // namespace probmotion
