#pragma once

#include <string>
#include <vector>

#include "probmotion/autodiff.hpp"
#include "probmotion/skeleton.hpp"
#include "probmotion/tensor.hpp"

// Invertible pose <-> latent map: a stack of additive coupling layers (each
// shifts one body-part block by a function of the other, so inversion is
// exact subtraction) followed by an optional diagonal scaling layer, the only
// layer with a nonzero log-determinant.

namespace probmotion {

struct PtmConfig {
    std::size_t coupling_layers = 8;
    bool scaling_layer = true;
    // Coupling shift is linear by default; optionally squashed by tanh
    // (still exactly invertible — the shift depends only on passive rows).
    bool shift_tanh = false;
    std::string coupling = "gcn";  // "gcn" (part-aware) | "dense" (channel split)
};

struct CouplingLayer {
    // gcn: joint indices; dense: flat latent dims.
    std::vector<std::size_t> passive;
    std::vector<std::size_t> active;
    Tensor adjacency;  // gcn only: |active| x |passive|, rows L1-normalized
    Tensor weight;     // gcn: C x C; dense: |passive| x |active|; zero-init
};

class Ptm {
public:
    Ptm() = default;
    Ptm(const SkeletonTopology& topo, const PtmConfig& cfg);

    const PtmConfig& config() const { return cfg_; }
    std::size_t dim() const { return joints_ * channels_; }
    std::size_t layer_count() const { return layers_.size(); }

    // Frame-wise maps: rows of x / z are independent poses.
    Tensor forward(const Tensor& x) const;  // pose -> latent
    Tensor inverse(const Tensor& z) const;  // latent -> pose

    // log |d latent / d pose|; input-independent (coupling layers contribute
    // exactly zero, the scaling layer contributes sum(log_scales)).
    double log_det_forward() const;

    // Parameter registry (stable order: coupling weights, then log_scales).
    std::vector<Tensor*> param_ptrs();
    std::vector<const Tensor*> param_ptrs() const;
    std::vector<std::string> param_names() const;

    // Taped single-row maps mirroring forward()/inverse() op-for-op; `params`
    // are leaf ids aligned with param_ptrs().
    ad::NodeId forward_graph(ad::Graph& g, ad::NodeId x_row,
                             const std::vector<ad::NodeId>& params) const;
    ad::NodeId inverse_graph(ad::Graph& g, ad::NodeId z_row,
                             const std::vector<ad::NodeId>& params) const;
    // Taped log-det (1x1), differentiable w.r.t. log_scales.
    ad::NodeId log_det_graph(ad::Graph& g, const std::vector<ad::NodeId>& params) const;

private:
    Tensor map_row(const Tensor& row, bool forward_dir) const;

    std::size_t joints_ = 0;
    std::size_t channels_ = 0;
    PtmConfig cfg_;
    std::vector<CouplingLayer> layers_;
    Tensor log_scales_;  // 1 x dim when scaling_layer, else empty
};

// Log-density of z under the standard normal, summed over every entry (rows
// act as a batch, so the result is the total over rows).
double latent_log_likelihood(const Tensor& z);
ad::NodeId latent_log_likelihood_graph(ad::Graph& g, ad::NodeId z);

}  // namespace probmotion
