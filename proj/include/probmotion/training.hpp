#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "probmotion/autodiff.hpp"
#include "probmotion/model.hpp"
#include "probmotion/motion_data.hpp"

// Training stack: the three losses, their taped unrolled-window form, the
// Adam optimizer with global-norm clipping, the epoch loop, and checkpoint
// serialization. All losses operate in normalized pose space; the recurrence
// is trained on its own mean predictions (no teacher forcing), matching how
// it runs at forecast time.

namespace probmotion {

struct LossWeights {
    double alpha = 0.1;      // latent likelihood term
    double beta_loss = 1.0;  // pose reconstruction term
    double gamma = 5.0;      // flow prior term
};

// Mean over frames of the per-frame summed Gaussian NLL (up to the constant):
// (1/K) * sum_t sum_i [log sigma_i + (z_i - mean_i)^2 / (2 sigma_i^2)].
double loss_h(const std::vector<LatentGaussian>& pred, const Tensor& target_latents);

// Mean absolute difference over all entries.
double loss_r(const Tensor& pred_poses, const Tensor& target_poses);

// Negative exact log-density of the poses under the flow prior, per frame:
// -latent_log_likelihood(forward(poses))/K - log_det_forward().
double loss_n(const Ptm& ptm, const Tensor& poses);

double total_loss(double h, double r, double n, const LossWeights& w);

// ---------------------------------------------------------------------------
// Batch construction

struct Window {
    std::size_t sequence = 0;  // index into the split
    std::size_t start = 0;     // first observed frame
};

// Sliding windows of t_obs + k_pred frames per sequence, advancing by
// `stride` frames. Sequences shorter than a full window contribute nothing.
std::vector<Window> extract_windows(const std::vector<const MotionSequence*>& seqs,
                                    std::size_t t_obs, std::size_t k_pred,
                                    std::size_t stride);

struct DatasetSplit {
    std::vector<const MotionSequence*> train;
    std::vector<const MotionSequence*> test;
};

// Deterministic split by position: every fifth sequence (0, 5, 10, ...) is
// held out for evaluation; the rest train. Normalization stats are computed
// on the train side only.
DatasetSplit split_train_test(const MotionDataset& data);

// ---------------------------------------------------------------------------
// Taped window loss

struct WindowLossNodes {
    ad::NodeId total = 0;
    ad::NodeId h = 0;
    ad::NodeId r = 0;
    ad::NodeId n = 0;
};

// Builds the full unrolled loss for one window on `g`: encode the observed
// frames through the pose map and the recurrence, then roll k_pred steps
// feeding back the predicted means, scoring each step against the mapped
// ground-truth latents (likelihood + prior) and the reconstructed poses (L1).
// `params` are leaf ids aligned with model.param_ptrs(); both frame blocks
// are already normalized.
WindowLossNodes build_window_loss(ad::Graph& g, const Model& model,
                                  const std::vector<ad::NodeId>& params,
                                  const Tensor& obs_norm, const Tensor& tgt_norm,
                                  const LossWeights& w);

// ---------------------------------------------------------------------------
// Optimizer

double global_grad_norm(const std::vector<Tensor>& grads);

class AdamOptimizer {
public:
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

    // Holds raw pointers into the model's parameter tensors; the model must
    // outlive the optimizer.
    AdamOptimizer(std::vector<Tensor*> params, double lr, double clip_norm);

    // One update from per-parameter gradients (taken by value so clipping can
    // rescale in place). Raises Error(numeric) on non-finite gradients before
    // touching the parameters.
    void step(std::vector<Tensor> grads);

    std::size_t steps_taken() const { return steps_; }

private:
    std::vector<Tensor*> params_;
    double lr_ = 0.0;
    double clip_ = 0.0;
    std::vector<Tensor> m_, v_;
    double b1t_ = 1.0, b2t_ = 1.0;
    std::size_t steps_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop

struct EpochLog {
    std::size_t epoch = 0;
    double total = 0.0;
    double h = 0.0;
    double r = 0.0;
    double n = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<EpochLog> log;           // one entry per completed epoch
    std::vector<std::string> warnings;   // non-fatal events (e.g. NaN abort)
};

// Trains `model` on the train side of `data` using the config the model was
// created with. Computes normalization stats from the train split, then runs
// epochs of shuffled window batches; one optimizer step per batch. A
// non-finite loss or gradient aborts training with the parameters rolled
// back to the last completed step and a warning recorded. Bit-reproducible
// given (seed, dataset, config).
TrainResult train(Model model, const MotionDataset& data);

// Convenience: create the model from (topo, cfg) and train it.
TrainResult train(const SkeletonTopology& topo, const MotionDataset& data,
                  const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout: u32 header length, JSON header (version, topology fingerprint,
// config echo, seed, normalization stats, parameter manifest), then one
// length-prefixed little-endian f64 array per parameter tensor in
// param_ptrs() order, then a trailing fnv1a64 checksum over everything
// before it. Loading distinguishes three failures: an unsupported version,
// a topology fingerprint that does not match `topo`, and a corrupt file
// (bad checksum, truncation, or a header/payload that contradicts itself).

inline constexpr std::uint32_t checkpoint_version = 1;

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path, const SkeletonTopology& topo);

// Header JSON of a checkpoint (checksum-validated, version not enforced) for
// inspection tooling.
std::string checkpoint_header_json(const std::string& path);

}  // namespace probmotion
