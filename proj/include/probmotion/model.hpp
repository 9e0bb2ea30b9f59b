#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probmotion/motion_data.hpp"
#include "probmotion/pfm.hpp"
#include "probmotion/ptm.hpp"
#include "probmotion/skeleton.hpp"

// Model bundle: topology, config, the pose map, the forecaster, and the
// normalization stats the model was trained with.

namespace probmotion {

struct ModelConfig {
    std::size_t t_obs = 15;   // observed frames per window
    std::size_t k_pred = 30;  // forecast horizon
    std::size_t layers = 8;   // coupling layers
    std::size_t hidden = 128;
    double lr = 1e-3;
    std::size_t epochs = 40;
    std::size_t batch = 16;
    std::uint64_t seed = 1;
    double alpha = 0.1;      // latent likelihood weight
    double beta_loss = 1.0;  // pose reconstruction weight
    double gamma = 5.0;      // flow prior weight
    double clip_norm = 5.0;
    double sigma_floor = 1e-3;
    bool scaling_layer = true;
    bool part_aware_prediction = true;
    std::string coupling = "gcn";  // "gcn" | "dense"
    // Optional keys:
    bool shift_tanh = false;  // tanh on coupling shifts
    std::size_t stride = 0;   // training window stride; 0 means k_pred
};

// Strict JSON parsing: unknown keys are config errors, missing keys take the
// defaults above. Values are validated.
ModelConfig model_config_from_json(const std::string& text);
std::string model_config_to_json(const ModelConfig& cfg);
void validate_model_config(const ModelConfig& cfg);

struct Model {
    SkeletonTopology topology;
    std::uint64_t fingerprint = 0;
    ModelConfig cfg;
    Ptm ptm;
    Pfm pfm;
    NormStats norm;  // identity until training replaces it

    static Model create(const SkeletonTopology& topo, const ModelConfig& cfg);

    std::vector<Tensor*> param_ptrs();
    std::vector<const Tensor*> param_ptrs() const;
    std::vector<std::string> param_names() const;
};

}  // namespace probmotion
