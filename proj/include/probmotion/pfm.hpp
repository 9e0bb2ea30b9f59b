#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "probmotion/autodiff.hpp"
#include "probmotion/skeleton.hpp"
#include "probmotion/tensor.hpp"

// Recurrent latent forecaster. Each body part owns a disjoint block of latent
// dims and runs its own GRU + affine head, emitting a factorized Gaussian
// (mean, per-dim std) over its block of the next frame; blocks never read
// each other's inputs, so parts predict separately and in parallel.

namespace probmotion {

struct PfmConfig {
    std::size_t hidden = 128;  // GRU width per part
    bool part_aware = true;    // false: one part owning every dim
    double sigma_floor = 1e-3;
};

struct LatentGaussian {
    Tensor mean;    // 1 x D
    Tensor stddev;  // 1 x D, every entry >= sigma_floor
};

struct PfmPart {
    std::string label;
    std::vector<std::size_t> dims;  // owned latent dims (joint-major)
    // GRU gates: reset, update, candidate. w_* act on the part's input
    // block, u_* on its hidden state.
    Tensor w_r, u_r, b_r;
    Tensor w_u, u_u, b_u;
    Tensor w_c, u_c, b_c;
    Tensor head_w, head_b;  // hidden -> (mean block, log-std block)
};

class Pfm {
public:
    Pfm() = default;
    Pfm(const SkeletonTopology& topo, const PfmConfig& cfg, std::uint64_t seed);

    const PfmConfig& config() const { return cfg_; }
    std::size_t dim() const { return dim_; }
    const std::vector<PfmPart>& parts() const { return parts_; }

    // All-zero hidden state, one row per part.
    std::vector<Tensor> init_state() const;

    // One recurrence step: absorb prev_latent into the hidden state.
    std::vector<Tensor> step(const Tensor& prev_latent,
                             const std::vector<Tensor>& hidden) const;

    // Distribution over the next frame implied by the current hidden state.
    LatentGaussian head_of_state(const std::vector<Tensor>& hidden) const;

    // step + head in one call.
    std::pair<LatentGaussian, std::vector<Tensor>> predict_step(
        const Tensor& prev_latent, const std::vector<Tensor>& hidden) const;

    // Hidden state after stepping through every row of `latents` (T x D).
    std::vector<Tensor> encode_history(const Tensor& latents) const;

    std::vector<Tensor*> param_ptrs();
    std::vector<const Tensor*> param_ptrs() const;
    std::vector<std::string> param_names() const;

    // Taped mirrors of the eager path; `params` align with param_ptrs().
    std::vector<ad::NodeId> init_state_graph(ad::Graph& g) const;
    std::vector<ad::NodeId> step_graph(ad::Graph& g, ad::NodeId prev_latent,
                                       const std::vector<ad::NodeId>& hidden,
                                       const std::vector<ad::NodeId>& params) const;
    struct GraphDist {
        ad::NodeId mean;
        ad::NodeId stddev;
    };
    GraphDist head_graph(ad::Graph& g, const std::vector<ad::NodeId>& hidden,
                         const std::vector<ad::NodeId>& params) const;

    static constexpr std::size_t tensors_per_part = 11;

private:
    PfmConfig cfg_;
    std::size_t dim_ = 0;
    std::vector<PfmPart> parts_;
};

}  // namespace probmotion
