#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "probmotion/dynamics.hpp"
#include "probmotion/model.hpp"
#include "probmotion/motion_data.hpp"
#include "probmotion/tensor.hpp"

// Evaluation harnesses: diversity/accuracy metrics over sampled futures,
// deterministic per-horizon error, empirical quantile calibration against
// pseudo ground truths, latent coverage, and sampling-efficiency comparisons.

namespace probmotion {

// ---------------------------------------------------------------------------
// Core metrics. `samples` holds S motions of identical shape K x D; `gt` is
// the true future with the same shape. All distances are plain L2 in the
// space the tensors live in (callers pass raw poses).

// Average displacement error: min over samples of the mean per-frame L2
// distance to the ground truth.
double ade(const std::vector<Tensor>& samples, const Tensor& gt);

// Final displacement error: min over samples of the last-frame L2 distance.
double fde(const std::vector<Tensor>& samples, const Tensor& gt);

// Average pairwise distance: mean over unordered sample pairs of the L2
// distance between whole sequences flattened to K*D vectors. Needs S >= 2.
double apd(const std::vector<Tensor>& samples);

// Multimodal variants: for each pseudo ground truth, take the best (minimum)
// ADE / FDE over the samples, then average across the pseudo set. Returns
// {mmade, mmfde}; raises Error(data) on an empty pseudo set.
std::pair<double, double> mm_metrics(const std::vector<Tensor>& samples,
                                     const std::vector<const Tensor*>& pseudo_gt);

// Pseudo-ground-truth grouping: case j belongs to case i's set iff the L2
// distance between their anchor frames (1 x D, normalized last observed
// frames) is <= threshold. Every case matches itself.
std::vector<std::vector<std::size_t>> pseudo_gt_sets(const std::vector<Tensor>& anchors,
                                                     double threshold);

// Mean angle error per horizon step: for each t, the L2 norm of the full
// angle-vector difference, averaged over cases. Requires expmap semantics.
// `preds` and `gts` are per-case K x D tensors.
std::vector<double> mae_angle(const SkeletonTopology& topo,
                              const std::vector<Tensor>& preds,
                              const std::vector<Tensor>& gts);

// ---------------------------------------------------------------------------
// Shared case extraction: the first window of every sequence long enough to
// supply t_obs observed plus k_pred future frames. Raises Error(data) when no
// sequence qualifies.

struct EvalCase {
    std::string id;
    MotionSequence observed;  // t_obs frames
    Tensor future;            // k_pred x D, raw pose space
};

std::vector<EvalCase> make_eval_cases(const MotionDataset& data, std::size_t t_obs,
                                      std::size_t k_pred);

// ---------------------------------------------------------------------------
// Diversity / accuracy harness over sampled futures.

struct DiverseMetrics {
    double apd = 0.0;
    double ade = 0.0;
    double fde = 0.0;
    double mmade = 0.0;
    double mmfde = 0.0;
};

struct DiverseEvalConfig {
    std::size_t samples = 50;
    double beta = 1.0;
    SampleStrategy strategy = SampleStrategy::random;
    double disk_radius = -1.0;  // poisson-disk only; negative -> default
    double threshold = 0.5;     // pseudo-GT anchor distance, normalized units
    std::uint64_t seed = 1;
    std::size_t max_cases = 0;  // 0 -> all eligible cases
};

struct DiverseEvalResult {
    std::vector<std::string> ids;          // one per case
    std::vector<DiverseMetrics> per_case;  // parallel to ids
    DiverseMetrics mean;                   // average over cases
    std::size_t cases = 0;
};

// For each case: S seeded rollouts (per-case stream derived from cfg.seed),
// metrics in raw pose space, pseudo sets from normalized anchor frames.
DiverseEvalResult eval_diverse(const Model& model, const MotionDataset& test,
                               const DiverseEvalConfig& cfg);

// ---------------------------------------------------------------------------
// Deterministic harness: mean rollouts scored by per-horizon angle error.

struct DetEvalResult {
    std::vector<double> per_horizon;  // k_pred entries
    double overall = 0.0;             // mean of per_horizon
    std::size_t cases = 0;
};

DetEvalResult eval_deterministic(const Model& model, const MotionDataset& test);

// ---------------------------------------------------------------------------
// Calibration: empirical quantiles of each case's pseudo futures versus the
// model's quantile rollouts.

struct CalibrationConfig {
    std::vector<double> quantiles{0.50, 0.45, 0.40, 0.25};
    double threshold = 0.5;        // pseudo-GT anchor distance
    std::size_t min_futures = 50;  // cases with fewer pseudo futures are skipped
    std::uint64_t seed = 1;
};

struct CalibrationReport {
    std::vector<double> quantiles;
    std::vector<double> ade_q;  // per quantile, mean over included cases
    std::vector<double> fde_q;
    std::size_t included = 0;
    std::size_t excluded = 0;
    bool insufficient = false;  // no case had enough pseudo futures
};

// Pseudo futures are ordered by distance to the case's true future; the
// empirical q-quantile future sits at rank round((1 - 2q) * (n - 1)), so
// q = 0.5 is the closest future and smaller q reaches further out. The model
// side is the quantile rollout at the same q (one sign vector per case,
// shared across quantiles). Scores are ADE/FDE between the two.
CalibrationReport empirical_quantile_eval(const Model& model, const MotionDataset& test,
                                          const CalibrationConfig& cfg);

// Rank of the empirical q-quantile among n ascending-by-distance futures.
std::size_t mirror_rank(double q, std::size_t n);

// Fraction of forecast frames whose true latent falls inside the central
// `central_mass` region of the predicted per-frame distribution, measured
// along the deterministic (mean-fed) rollout.
struct CoverageReport {
    double central_mass = 0.8;
    double coverage = 0.0;
    std::size_t frames = 0;
    std::size_t cases = 0;
};

CoverageReport latent_coverage(const Model& model, const MotionDataset& test,
                               double central_mass = 0.8);

// ---------------------------------------------------------------------------
// Sampling efficiency: few diverse samples versus many random ones.

struct SamplingEfficiencyConfig {
    std::size_t s_small = 5;
    std::size_t s_large = 50;
    std::vector<std::uint64_t> seeds{1};
    double beta = 1.0;
    double disk_radius = -1.0;
    double threshold = 0.5;
    std::size_t max_cases = 0;
};

struct StrategyStats {
    std::vector<DiverseMetrics> per_seed;  // mean-over-cases metrics, one per seed
    DiverseMetrics median;                 // per-field median across seeds
};

struct SamplingEfficiencyReport {
    std::size_t s_small = 0;
    std::size_t s_large = 0;
    StrategyStats random_large;
    StrategyStats random_small;
    StrategyStats disk_small;
    DiverseMetrics random_delta_pct;  // 100 * (small - large) / large, medians
    DiverseMetrics disk_delta_pct;
};

SamplingEfficiencyReport sampling_efficiency_report(const Model& model,
                                                    const MotionDataset& test,
                                                    const SamplingEfficiencyConfig& cfg);

// Per-field median across runs (average of the two middles when even).
DiverseMetrics median_metrics(std::vector<DiverseMetrics> runs);
double percent_change(double from, double to);  // 100 * (to - from) / from

// ---------------------------------------------------------------------------
// Emission. CSV carries one row per case / quantile / seed; JSON carries the
// summary. Numbers are rendered with shortest round-trip formatting so the
// artifacts are bit-stable across reruns.

std::string diverse_csv(const DiverseEvalResult& r);
std::string diverse_json(const DiverseEvalResult& r);
std::string det_csv(const DetEvalResult& r);
std::string det_json(const DetEvalResult& r);
std::string calibration_csv(const CalibrationReport& r);
std::string calibration_json(const CalibrationReport& r, const CoverageReport& cov);
std::string sampling_csv(const SamplingEfficiencyReport& r);
std::string sampling_json(const SamplingEfficiencyReport& r);

}  // namespace probmotion
