#include "probmotion/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "probmotion/error.hpp"
#include "probmotion/gaussmath.hpp"
#include "probmotion/parallel.hpp"
#include "probmotion/rng.hpp"
#include "probmotion/tensor_ops.hpp"

namespace probmotion {

const char* strategy_name(SampleStrategy s) {
    switch (s) {
        case SampleStrategy::mean: return "mean";
        case SampleStrategy::random: return "random";
        case SampleStrategy::quantile: return "quantile";
        case SampleStrategy::poisson_disk: return "poisson-disk";
    }
    return "?";
}

SampleStrategy strategy_from_name(const std::string& name) {
    if (name == "mean") return SampleStrategy::mean;
    if (name == "random") return SampleStrategy::random;
    if (name == "quantile") return SampleStrategy::quantile;
    if (name == "poisson-disk") return SampleStrategy::poisson_disk;
    raise(Errc::config, "unknown sampling strategy '" + name + "'");
}

void validate_rollout_config(const RolloutConfig& cfg) {
    if (cfg.horizon < 1) raise(Errc::config, "horizon must be >= 1");
    if (!(cfg.beta >= 0.0)) raise(Errc::config, "beta must be nonnegative");
    if (cfg.strategy == SampleStrategy::quantile && !(cfg.q > 0.0 && cfg.q <= 0.5))
        raise(Errc::config, "quantile must lie in (0, 0.5]");
    if (cfg.samples < 1) raise(Errc::config, "sample count must be >= 1");
    if (cfg.max_tries < 1) raise(Errc::config, "max_tries must be >= 1");
    if (cfg.strategy == SampleStrategy::poisson_disk && cfg.radius >= 0.0 &&
        !std::isfinite(cfg.radius))
        raise(Errc::config, "disk radius must be finite");
}

double default_disk_radius(std::size_t dims) {
    return 0.9 * std::sqrt(2.0 * static_cast<double>(dims));
}

namespace {

// Observed raw poses -> recurrent state + first-frame distribution.
struct EncodedHistory {
    std::vector<Tensor> hidden;
    LatentGaussian first;
};

EncodedHistory encode_observed(const Model& model, const MotionSequence& observed) {
    if (observed.frames.rows() == 0) raise(Errc::data, "observed sequence has no frames");
    if (observed.frames.cols() != model.ptm.dim())
        raise(Errc::shape, "observed pose width " + std::to_string(observed.frames.cols()) +
                               " does not match model dim " + std::to_string(model.ptm.dim()));
    const Tensor z_obs = model.ptm.forward(normalize_frames(observed.frames, model.norm));
    EncodedHistory enc;
    enc.hidden = model.pfm.encode_history(z_obs);
    enc.first = model.pfm.head_of_state(enc.hidden);
    return enc;
}

// Runs one rollout from the shared encoded state. `pick` chooses the latent
// for step t given the predicted distribution (writing into its out row).
template <typename Pick>
LatentTrace roll(const Model& model, const EncodedHistory& enc, std::size_t horizon,
                 Pick&& pick) {
    const std::size_t d = model.ptm.dim();
    LatentTrace trace;
    trace.dists.reserve(horizon);
    trace.latents = Tensor(horizon, d);

    std::vector<Tensor> hidden = enc.hidden;
    LatentGaussian dist = enc.first;
    for (std::size_t t = 0; t < horizon; ++t) {
        trace.dists.push_back(dist);
        Tensor chosen(1, d);
        pick(t, dist, chosen);
        for (std::size_t c = 0; c < d; ++c) trace.latents.at(t, c) = chosen[c];
        if (t + 1 < horizon) {
            auto [next_dist, next_hidden] = model.pfm.predict_step(chosen, hidden);
            dist = std::move(next_dist);
            hidden = std::move(next_hidden);
        }
    }
    return trace;
}

MotionSequence trace_to_motion(const Model& model, const MotionSequence& observed,
                               const LatentTrace& trace, const std::string& suffix) {
    MotionSequence out;
    out.id = observed.id + suffix;
    out.fps = observed.fps;
    out.frames = denormalize_frames(model.ptm.inverse(trace.latents), model.norm);
    return out;
}

void pick_mean(const LatentGaussian& dist, Tensor& out) {
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = dist.mean[c];
}

// mean + beta * sigma . g with fresh standard-normal g. beta == 0 copies the
// mean outright so the result is bit-identical to the deterministic rollout
// (adding a signed zero could flip a -0.0 mean's sign bit).
void pick_random(const LatentGaussian& dist, double beta, Rng& rng, Tensor& out) {
    if (beta == 0.0) {
        pick_mean(dist, out);
        return;
    }
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = dist.mean[c] + beta * dist.stddev[c] * rng.normal();
}

}  // namespace

Rollout rollout_mean(const Model& model, const MotionSequence& observed,
                     std::size_t horizon) {
    if (horizon < 1) raise(Errc::config, "horizon must be >= 1");
    const EncodedHistory enc = encode_observed(model, observed);
    Rollout out;
    out.trace = roll(model, enc, horizon,
                     [](std::size_t, const LatentGaussian& dist, Tensor& chosen) {
                         pick_mean(dist, chosen);
                     });
    out.motion = trace_to_motion(model, observed, out.trace, "#mean");
    return out;
}

ForecastBundle rollout_sample(const Model& model, const MotionSequence& observed,
                              const RolloutConfig& cfg) {
    validate_rollout_config(cfg);
    const EncodedHistory enc = encode_observed(model, observed);

    ForecastBundle bundle;
    bundle.mean_rollout.trace =
        roll(model, enc, cfg.horizon,
             [](std::size_t, const LatentGaussian& dist, Tensor& chosen) {
                 pick_mean(dist, chosen);
             });
    bundle.mean_rollout.motion =
        trace_to_motion(model, observed, bundle.mean_rollout.trace, "#mean");

    bundle.samples.resize(cfg.samples);
    parallel_for(cfg.samples, [&](std::size_t i) {
        Rng rng = Rng::derived(cfg.seed, i);
        ForecastSample& sample = bundle.samples[i];
        sample.trace = roll(model, enc, cfg.horizon,
                            [&](std::size_t, const LatentGaussian& dist, Tensor& chosen) {
                                pick_random(dist, cfg.beta, rng, chosen);
                            });
        sample.motion =
            trace_to_motion(model, observed, sample.trace, "#s" + std::to_string(i));
    });
    return bundle;
}

ForecastSample sample_quantile_sequence(const Model& model, const MotionSequence& observed,
                                        std::size_t horizon, double q, std::uint64_t seed) {
    if (!(q > 0.0 && q <= 0.5)) raise(Errc::config, "quantile must lie in (0, 0.5]");
    if (horizon < 1) raise(Errc::config, "horizon must be >= 1");
    const EncodedHistory enc = encode_observed(model, observed);
    const std::size_t d = model.ptm.dim();

    // One sign vector for the whole sequence: the same per-dim quantile is
    // held at every frame.
    Rng rng = Rng::derived(seed, 0);
    std::vector<double> sign(d);
    for (auto& s : sign) s = (rng.next_u64() & 1) ? 1.0 : -1.0;
    const double magnitude = gauss::normal_quantile(1.0 - q);

    ForecastSample out;
    out.quantile = q;
    out.trace = roll(model, enc, horizon,
                     [&](std::size_t, const LatentGaussian& dist, Tensor& chosen) {
                         if (magnitude == 0.0) {  // q = 0.5: exactly the mean path
                             pick_mean(dist, chosen);
                             return;
                         }
                         for (std::size_t c = 0; c < d; ++c)
                             chosen[c] = dist.mean[c] + magnitude * dist.stddev[c] * sign[c];
                     });
    char tag[32];
    std::snprintf(tag, sizeof(tag), "#q%.4f", q);
    out.motion = trace_to_motion(model, observed, out.trace, tag);
    return out;
}

ForecastBundle poisson_disk_latent_set(const Model& model, const MotionSequence& observed,
                                       const RolloutConfig& cfg) {
    validate_rollout_config(cfg);
    const EncodedHistory enc = encode_observed(model, observed);
    const std::size_t d = model.ptm.dim();

    ForecastBundle bundle;
    bundle.mean_rollout.trace =
        roll(model, enc, cfg.horizon,
             [](std::size_t, const LatentGaussian& dist, Tensor& chosen) {
                 pick_mean(dist, chosen);
             });
    bundle.mean_rollout.motion =
        trace_to_motion(model, observed, bundle.mean_rollout.trace, "#mean");

    double radius = cfg.radius < 0.0 ? default_disk_radius(d) : cfg.radius;

    // Choose first-step whitened offsets (standard-normal draws g) that keep
    // every pair at least `radius` apart. Each sample first proposes the
    // draw its own stream would have used in a plain random rollout; only
    // proposals that violate the disk constraint are re-drawn (from a shared
    // replacement stream), so the diverse set differs from the plain random
    // set exactly where redundancy forced it to — with r = 0 the two
    // strategies produce identical trajectories sample for sample.
    Rng pick_rng = Rng::derived(cfg.seed, 0x9d15c);
    std::vector<std::vector<double>> heads(cfg.samples);
    const auto far_enough = [&](const std::vector<double>& g, std::size_t count) {
        for (std::size_t k = 0; k < count; ++k) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = g[c] - heads[k][c];
                sq += diff * diff;
            }
            if (std::sqrt(sq) < radius) return false;
        }
        return true;
    };
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        Rng own = Rng::derived(cfg.seed, i);
        std::vector<double> g(d);
        for (auto& v : g) v = own.normal();
        std::size_t tries = 0;
        while (!far_enough(g, i)) {
            if (++tries > cfg.max_tries) {
                radius *= 0.5;
                tries = 0;
                bundle.warnings.push_back("disk radius halved to " + std::to_string(radius) +
                                          " after " + std::to_string(cfg.max_tries) +
                                          " rejected candidates");
            }
            for (auto& v : g) v = pick_rng.normal();
        }
        heads[i] = std::move(g);
    }
    bundle.effective_radius = radius;

    bundle.samples.resize(cfg.samples);
    parallel_for(cfg.samples, [&](std::size_t i) {
        Rng rng = Rng::derived(cfg.seed, i);
        ForecastSample& sample = bundle.samples[i];
        sample.trace =
            roll(model, enc, cfg.horizon,
                 [&](std::size_t t, const LatentGaussian& dist, Tensor& chosen) {
                     if (t == 0) {
                         // Accepted head: mean + beta * sigma . g, beta == 0
                         // still records the mean (offset scale collapses).
                         // Burn the draws the head replaces so steps t >= 1
                         // consume the same stream positions as the plain
                         // random rollout for this (seed, i) — the two
                         // strategies then differ only in the first step,
                         // which keeps comparisons between them paired.
                         if (cfg.beta != 0.0)
                             for (std::size_t c = 0; c < d; ++c) rng.normal();
                         for (std::size_t c = 0; c < d; ++c)
                             chosen[c] = dist.mean[c] +
                                         cfg.beta * dist.stddev[c] * heads[i][c];
                     } else {
                         pick_random(dist, cfg.beta, rng, chosen);
                     }
                 });
        sample.motion =
            trace_to_motion(model, observed, sample.trace, "#pd" + std::to_string(i));
    });
    return bundle;
}

ForecastBundle forecast(const Model& model, const MotionSequence& observed,
                        const RolloutConfig& cfg) {
    validate_rollout_config(cfg);
    switch (cfg.strategy) {
        case SampleStrategy::mean: {
            ForecastBundle bundle;
            bundle.mean_rollout = rollout_mean(model, observed, cfg.horizon);
            return bundle;
        }
        case SampleStrategy::random:
            return rollout_sample(model, observed, cfg);
        case SampleStrategy::quantile: {
            ForecastBundle bundle;
            bundle.mean_rollout = rollout_mean(model, observed, cfg.horizon);
            bundle.samples.push_back(
                sample_quantile_sequence(model, observed, cfg.horizon, cfg.q, cfg.seed));
            return bundle;
        }
        case SampleStrategy::poisson_disk:
            return poisson_disk_latent_set(model, observed, cfg);
    }
    raise(Errc::config, "unhandled sampling strategy");
}

FrameQuantiles frame_quantile(const LatentGaussian& dist, const Tensor& z) {
    if (!dist.mean.same_shape(z))
        raise(Errc::shape, "latent shape " + z.shape_str() + " does not match distribution " +
                               dist.mean.shape_str());
    const std::size_t d = z.size();
    FrameQuantiles out;
    out.per_dim = Tensor(1, d);
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        const double sigma = dist.stddev[c];
        if (!(sigma > 0.0)) raise(Errc::numeric, "nonpositive stddev in frame quantile");
        const double w = (z[c] - dist.mean[c]) / sigma;
        out.per_dim[c] = gauss::normal_cdf(w);
        sq += w * w;
    }
    out.radius_quantile = gauss::chi_cdf(std::sqrt(sq), static_cast<double>(d));
    return out;
}

}  // namespace probmotion
