#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probmotion/model.hpp"
#include "probmotion/motion_data.hpp"
#include "probmotion/pfm.hpp"
#include "probmotion/tensor.hpp"

// Autoregressive forecasting: encode the observed frames into the recurrent
// state, then alternate (predict next-latent distribution, choose a latent,
// feed it back) for the horizon, finally mapping chosen latents back to poses.
// Strategies differ only in how the latent is chosen from the distribution:
//   mean         z = mean                        (deterministic)
//   random       z = mean + beta * sigma . g     (g standard normal per dim)
//   quantile     z = mean + phi_inv(1-q) * sigma . s   (s: per-sequence signs)
//   poisson-disk random, but first-step g vectors are pairwise >= r apart.

namespace probmotion {

enum class SampleStrategy { mean, random, quantile, poisson_disk };

const char* strategy_name(SampleStrategy s);
SampleStrategy strategy_from_name(const std::string& name);  // Error(config)

struct RolloutConfig {
    std::size_t horizon = 30;  // frames to forecast
    double beta = 1.0;         // sampling scale on sigma
    SampleStrategy strategy = SampleStrategy::random;
    double q = 0.5;            // quantile strategy: (0, 0.5]
    std::size_t samples = 5;   // random / poisson-disk sample count
    double radius = -1.0;      // poisson-disk; negative picks the default
    std::size_t max_tries = 200;
    std::uint64_t seed = 1;
};

void validate_rollout_config(const RolloutConfig& cfg);  // Error(config)

// Minimum pairwise whitened distance used when radius is left negative:
// a fraction of sqrt(2 * dims), the typical distance between two standard
// normal vectors, so moderate sample counts fit without halving.
double default_disk_radius(std::size_t dims);

struct LatentTrace {
    std::vector<LatentGaussian> dists;  // predicted distribution per frame
    Tensor latents;                     // horizon x dims, the chosen latents
};

struct Rollout {
    MotionSequence motion;  // horizon frames in raw pose space
    LatentTrace trace;
};

struct ForecastSample {
    MotionSequence motion;
    double quantile = -1.0;  // tag; negative means untagged
    LatentTrace trace;
};

struct ForecastBundle {
    Rollout mean_rollout;
    std::vector<ForecastSample> samples;
    std::vector<std::string> warnings;   // e.g. disk-radius halvings
    double effective_radius = 0.0;       // radius after any halvings
};

// Deterministic rollout (noise scale zero each step).
Rollout rollout_mean(const Model& model, const MotionSequence& observed,
                     std::size_t horizon);

// S independent seeded rollouts; sample i uses the stream derived from
// (cfg.seed, i), so results never depend on execution order.
ForecastBundle rollout_sample(const Model& model, const MotionSequence& observed,
                              const RolloutConfig& cfg);

// One rollout holding the same per-dim quantile across every frame: a sign
// vector is drawn once per sequence, and every step offsets the mean by
// phi_inv(1-q) * sigma with those signs. q = 0.5 reproduces rollout_mean
// exactly.
ForecastSample sample_quantile_sequence(const Model& model, const MotionSequence& observed,
                                        std::size_t horizon, double q, std::uint64_t seed);

// Diverse set: candidate first-step whitened offsets (the standard-normal
// draws) are rejected until pairwise L2 >= radius; an exhausted try budget
// halves the radius and records a warning. Accepted heads continue as plain
// random rollouts.
ForecastBundle poisson_disk_latent_set(const Model& model, const MotionSequence& observed,
                                       const RolloutConfig& cfg);

// Unified dispatch on cfg.strategy (mean -> empty sample list).
ForecastBundle forecast(const Model& model, const MotionSequence& observed,
                        const RolloutConfig& cfg);

struct FrameQuantiles {
    Tensor per_dim;             // 1 x dims, Phi((z - mean) / sigma)
    double radius_quantile;     // chi-CDF of the whitened radius (dims dof):
                                // the central-region mass at that radius
};

FrameQuantiles frame_quantile(const LatentGaussian& dist, const Tensor& z);

}  // namespace probmotion
