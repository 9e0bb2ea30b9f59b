#pragma once

#include <cstdint>
#include <vector>

#include "probmotion/rng.hpp"
#include "probmotion/tensor.hpp"

// Define-by-run reverse-mode tape. Each builder runs the eager forward
// operation immediately (through the shared tensor-op helpers, so taped and
// untaped forwards agree bit for bit), records the node, and returns its id.
// gradients() walks the tape once in reverse. Any non-finite forward value or
// gradient raises Error(numeric) — callers treat that as "abort this step",
// never as a crash.

namespace probmotion::ad {

using NodeId = std::uint32_t;

class Graph {
public:
    // Differentiable input; receives a gradient slot.
    NodeId leaf(Tensor value);
    // Non-differentiable input; gradient flow stops here.
    NodeId constant(Tensor value);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);   // elementwise
    NodeId div(NodeId a, NodeId b);   // elementwise
    NodeId neg(NodeId a);
    NodeId scale(NodeId a, double c);
    NodeId add_scalar(NodeId a, double c);
    NodeId max_scalar(NodeId a, double c);
    NodeId matmul(NodeId a, NodeId b);
    NodeId tanh(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId abs(NodeId a);
    NodeId concat_cols(NodeId a, NodeId b);
    NodeId slice_cols(NodeId a, std::size_t begin, std::size_t end);
    NodeId gather_rows(NodeId a, std::vector<std::size_t> idx);
    NodeId row_update_add(NodeId base, std::vector<std::size_t> idx, NodeId delta);
    NodeId gather_cols(NodeId a, std::vector<std::size_t> idx);
    NodeId assemble_cols(std::size_t cols, std::vector<std::vector<std::size_t>> idx,
                         std::vector<NodeId> parts);
    NodeId reshape(NodeId a, std::size_t rows, std::size_t cols);
    NodeId reduce_sum(NodeId a);
    NodeId reduce_mean(NodeId a);

    const Tensor& value(NodeId id) const;
    bool is_leaf(NodeId id) const;
    std::size_t node_count() const { return nodes_.size(); }

    // d value(output) / d value(leaf) for each requested leaf; output must be
    // 1x1. Leaves the tape untouched, so repeated calls agree bitwise.
    std::vector<Tensor> gradients(NodeId output, const std::vector<NodeId>& wrt) const;

    // Replace a leaf's value (same shape) and re-run every forward op in tape
    // order. Used by the finite-difference checkers.
    void set_leaf(NodeId id, const Tensor& value);
    void recompute();

private:
    enum class Op : std::uint8_t {
        leaf, constant, add, sub, mul, div, neg, scale, add_scalar, max_scalar,
        matmul, tanh, sigmoid, exp, log, abs, concat_cols, slice_cols,
        gather_rows, row_update_add, gather_cols, assemble_cols, reshape,
        reduce_sum, reduce_mean,
    };

    struct Node {
        Op op;
        Tensor value;
        NodeId a = 0;
        NodeId b = 0;
        std::vector<NodeId> ins;  // assemble_cols only
        double c = 0.0;
        std::size_t p0 = 0;
        std::size_t p1 = 0;
        std::vector<std::size_t> idx;
        std::vector<std::vector<std::size_t>> col_sets;
    };

    Tensor eval(const Node& node) const;
    NodeId push(Node node);
    const Node& at(NodeId id) const;

    std::vector<Node> nodes_;
};

struct FdEntry {
    NodeId leaf = 0;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    bool pass = true;
};

struct FdReport {
    std::vector<FdEntry> per_leaf;
    double tolerance = 0.0;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    bool pass = true;
};

// Central-difference check of gradients() over every coordinate of `leaves`
// (small graphs only). rel err = |ad - fd| / max(|ad|, |fd|, 1e-8).
FdReport finite_diff_check(Graph& g, NodeId output, const std::vector<NodeId>& leaves,
                           double tolerance, double h = 1e-5);

// Same check on `coords_per_leaf` randomly chosen coordinates per leaf —
// usable on large unrolled graphs.
FdReport finite_diff_spot_check(Graph& g, NodeId output, const std::vector<NodeId>& leaves,
                                std::size_t coords_per_leaf, Rng& rng, double tolerance,
                                double h = 1e-5);

}  // namespace probmotion::ad
