#include "probmotion/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "probmotion/error.hpp"
#include "probmotion/rng.hpp"
#include "probmotion/skeleton.hpp"

namespace probmotion {

namespace {

using nlohmann::json;

constexpr std::uint64_t case_stream_tag = 0xca5e0000ULL;

double frame_distance(const Tensor& a, const Tensor& b, std::size_t row) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double d = a.at(row, c) - b.at(row, c);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double flat_distance(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double sequence_ade(const Tensor& sample, const Tensor& gt) {
    double acc = 0.0;
    for (std::size_t t = 0; t < gt.rows(); ++t) acc += frame_distance(sample, gt, t);
    return acc / static_cast<double>(gt.rows());
}

void require_sample_set(const std::vector<Tensor>& samples, const Tensor& gt,
                        const char* what) {
    if (samples.empty()) raise(Errc::data, std::string(what) + " needs at least one sample");
    if (gt.rows() == 0 || gt.cols() == 0) raise(Errc::shape, std::string(what) + " ground truth is empty");
    for (const Tensor& s : samples) {
        if (!s.same_shape(gt)) {
            raise(Errc::shape, std::string(what) + " sample shape " + s.shape_str() +
                                   " does not match ground truth " + gt.shape_str());
        }
    }
}

Tensor row_of(const Tensor& m, std::size_t r) {
    Tensor out(1, m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) out.at(0, c) = m.at(r, c);
    return out;
}

Tensor block_rows(const Tensor& m, std::size_t first, std::size_t count) {
    Tensor out(count, m.cols());
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(first + r, c);
    return out;
}

void require_model_matches(const Model& model, const MotionDataset& data) {
    if (topology_fingerprint(data.topology) != model.fingerprint)
        raise(Errc::data, "dataset topology does not match the model");
}

std::uint64_t case_seed(std::uint64_t harness_seed, std::size_t index) {
    return Rng::derived(harness_seed, case_stream_tag + index).next_u64();
}

// Normalized last observed frame of each case, the anchor for pseudo-GT grouping.
std::vector<Tensor> case_anchors(const std::vector<EvalCase>& cases, const NormStats& norm) {
    std::vector<Tensor> anchors;
    anchors.reserve(cases.size());
    for (const EvalCase& ec : cases) {
        const Tensor last = row_of(ec.observed.frames, ec.observed.frames.rows() - 1);
        anchors.push_back(normalize_frames(last, norm));
    }
    return anchors;
}

json metrics_json(const DiverseMetrics& m) {
    return json{{"apd", m.apd}, {"ade", m.ade}, {"fde", m.fde},
                {"mmade", m.mmade}, {"mmfde", m.mmfde}};
}

std::string num(double v) { return json(v).dump(); }

void append_metrics_row(std::string& out, const DiverseMetrics& m) {
    out += num(m.apd);
    out += ',';
    out += num(m.ade);
    out += ',';
    out += num(m.fde);
    out += ',';
    out += num(m.mmade);
    out += ',';
    out += num(m.mmfde);
    out += '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Core metrics

double ade(const std::vector<Tensor>& samples, const Tensor& gt) {
    require_sample_set(samples, gt, "ade");
    double best = sequence_ade(samples[0], gt);
    for (std::size_t s = 1; s < samples.size(); ++s)
        best = std::min(best, sequence_ade(samples[s], gt));
    return best;
}

double fde(const std::vector<Tensor>& samples, const Tensor& gt) {
    require_sample_set(samples, gt, "fde");
    const std::size_t last = gt.rows() - 1;
    double best = frame_distance(samples[0], gt, last);
    for (std::size_t s = 1; s < samples.size(); ++s)
        best = std::min(best, frame_distance(samples[s], gt, last));
    return best;
}

double apd(const std::vector<Tensor>& samples) {
    if (samples.size() < 2) raise(Errc::data, "apd needs at least two samples");
    for (const Tensor& s : samples) {
        if (!s.same_shape(samples[0])) {
            raise(Errc::shape, "apd sample shape " + s.shape_str() + " does not match " +
                                   samples[0].shape_str());
        }
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j)
            acc += flat_distance(samples[i], samples[j]);
    const double pairs = 0.5 * static_cast<double>(samples.size()) *
                         static_cast<double>(samples.size() - 1);
    return acc / pairs;
}

std::pair<double, double> mm_metrics(const std::vector<Tensor>& samples,
                                     const std::vector<const Tensor*>& pseudo_gt) {
    if (pseudo_gt.empty()) raise(Errc::data, "multimodal metrics need at least one pseudo ground truth");
    double ade_acc = 0.0;
    double fde_acc = 0.0;
    for (const Tensor* gt : pseudo_gt) {
        ade_acc += ade(samples, *gt);
        fde_acc += fde(samples, *gt);
    }
    const double n = static_cast<double>(pseudo_gt.size());
    return {ade_acc / n, fde_acc / n};
}

std::vector<std::vector<std::size_t>> pseudo_gt_sets(const std::vector<Tensor>& anchors,
                                                     double threshold) {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        raise(Errc::config, "pseudo ground-truth threshold must be positive and finite");
    for (const Tensor& a : anchors) {
        if (a.rows() != 1 || !a.same_shape(anchors[0]))
            raise(Errc::shape, "anchor frames must all be single rows of equal width");
    }
    std::vector<std::vector<std::size_t>> sets(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (std::size_t j = 0; j < anchors.size(); ++j) {
            if (flat_distance(anchors[i], anchors[j]) <= threshold) sets[i].push_back(j);
        }
    }
    return sets;
}

std::vector<double> mae_angle(const SkeletonTopology& topo,
                              const std::vector<Tensor>& preds,
                              const std::vector<Tensor>& gts) {
    if (topo.semantics != ChannelSemantics::expmap)
        raise(Errc::data, "angle error is only defined for exponential-map channels");
    if (preds.empty() || preds.size() != gts.size())
        raise(Errc::shape, "angle error needs matching non-empty prediction and ground-truth lists");
    const std::size_t horizon = gts[0].rows();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!preds[i].same_shape(gts[i]) || gts[i].rows() != horizon ||
            gts[i].cols() != topo.pose_dim()) {
            raise(Errc::shape, "angle error tensors must share one horizon x pose-dim shape");
        }
    }
    std::vector<double> per_horizon(horizon, 0.0);
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t t = 0; t < horizon; ++t)
            per_horizon[t] += frame_distance(preds[i], gts[i], t);
    for (double& v : per_horizon) v /= static_cast<double>(preds.size());
    return per_horizon;
}

// ---------------------------------------------------------------------------
// Case extraction

std::vector<EvalCase> make_eval_cases(const MotionDataset& data, std::size_t t_obs,
                                      std::size_t k_pred) {
    if (t_obs == 0 || k_pred == 0)
        raise(Errc::config, "evaluation needs at least one observed and one future frame");
    std::vector<EvalCase> cases;
    for (const MotionSequence& seq : data.sequences) {
        if (seq.frames.rows() < t_obs + k_pred) continue;
        EvalCase ec;
        ec.id = seq.id;
        ec.observed = MotionSequence{seq.id, seq.fps, block_rows(seq.frames, 0, t_obs)};
        ec.future = block_rows(seq.frames, t_obs, k_pred);
        cases.push_back(std::move(ec));
    }
    if (cases.empty())
        raise(Errc::data, "no sequence is long enough for the requested window");
    return cases;
}

// ---------------------------------------------------------------------------
// Diversity / accuracy harness

DiverseEvalResult eval_diverse(const Model& model, const MotionDataset& test,
                               const DiverseEvalConfig& cfg) {
    if (cfg.samples < 2) raise(Errc::config, "diverse evaluation needs at least two samples");
    if (cfg.strategy != SampleStrategy::random && cfg.strategy != SampleStrategy::poisson_disk)
        raise(Errc::config, "diverse evaluation needs a multi-sample strategy");
    if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta))
        raise(Errc::config, "sampling scale must be finite and non-negative");
    require_model_matches(model, test);

    std::vector<EvalCase> cases = make_eval_cases(test, model.cfg.t_obs, model.cfg.k_pred);
    if (cfg.max_cases > 0 && cases.size() > cfg.max_cases) cases.resize(cfg.max_cases);

    const std::vector<Tensor> anchors = case_anchors(cases, model.norm);
    const std::vector<std::vector<std::size_t>> sets = pseudo_gt_sets(anchors, cfg.threshold);

    DiverseEvalResult out;
    out.cases = cases.size();
    out.ids.reserve(cases.size());
    out.per_case.reserve(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
        RolloutConfig rc;
        rc.horizon = model.cfg.k_pred;
        rc.beta = cfg.beta;
        rc.strategy = cfg.strategy;
        rc.samples = cfg.samples;
        rc.radius = cfg.disk_radius;
        rc.seed = case_seed(cfg.seed, i);
        const ForecastBundle bundle = forecast(model, cases[i].observed, rc);

        std::vector<Tensor> frames;
        frames.reserve(bundle.samples.size());
        for (const ForecastSample& s : bundle.samples) frames.push_back(s.motion.frames);

        std::vector<const Tensor*> pseudo;
        pseudo.reserve(sets[i].size());
        for (std::size_t j : sets[i]) pseudo.push_back(&cases[j].future);

        DiverseMetrics m;
        m.apd = apd(frames);
        m.ade = ade(frames, cases[i].future);
        m.fde = fde(frames, cases[i].future);
        std::tie(m.mmade, m.mmfde) = mm_metrics(frames, pseudo);
        out.ids.push_back(cases[i].id);
        out.per_case.push_back(m);

        out.mean.apd += m.apd;
        out.mean.ade += m.ade;
        out.mean.fde += m.fde;
        out.mean.mmade += m.mmade;
        out.mean.mmfde += m.mmfde;
    }
    const double n = static_cast<double>(cases.size());
    out.mean.apd /= n;
    out.mean.ade /= n;
    out.mean.fde /= n;
    out.mean.mmade /= n;
    out.mean.mmfde /= n;
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic harness

DetEvalResult eval_deterministic(const Model& model, const MotionDataset& test) {
    require_model_matches(model, test);
    const std::vector<EvalCase> cases = make_eval_cases(test, model.cfg.t_obs, model.cfg.k_pred);
    std::vector<Tensor> preds;
    std::vector<Tensor> gts;
    preds.reserve(cases.size());
    gts.reserve(cases.size());
    for (const EvalCase& ec : cases) {
        preds.push_back(rollout_mean(model, ec.observed, model.cfg.k_pred).motion.frames);
        gts.push_back(ec.future);
    }
    DetEvalResult out;
    out.per_horizon = mae_angle(test.topology, preds, gts);
    double acc = 0.0;
    for (double v : out.per_horizon) acc += v;
    out.overall = acc / static_cast<double>(out.per_horizon.size());
    out.cases = cases.size();
    return out;
}

// ---------------------------------------------------------------------------
// Calibration

std::size_t mirror_rank(double q, std::size_t n) {
    if (n == 0) raise(Errc::data, "quantile rank needs a non-empty future set");
    if (!(q > 0.0) || !(q <= 0.5))
        raise(Errc::config, "calibration quantiles must lie in (0, 0.5]");
    const double pos = (1.0 - 2.0 * q) * static_cast<double>(n - 1);
    const long long r = std::llround(pos);
    const long long hi = static_cast<long long>(n - 1);
    return static_cast<std::size_t>(std::clamp(r, 0LL, hi));
}

CalibrationReport empirical_quantile_eval(const Model& model, const MotionDataset& test,
                                          const CalibrationConfig& cfg) {
    if (cfg.quantiles.empty()) raise(Errc::config, "calibration needs at least one quantile");
    for (double q : cfg.quantiles)
        if (!(q > 0.0) || !(q <= 0.5))
            raise(Errc::config, "calibration quantiles must lie in (0, 0.5]");
    if (cfg.min_futures == 0)
        raise(Errc::config, "calibration needs a positive pseudo-future minimum");
    require_model_matches(model, test);

    const std::vector<EvalCase> cases = make_eval_cases(test, model.cfg.t_obs, model.cfg.k_pred);
    const std::vector<Tensor> anchors = case_anchors(cases, model.norm);
    const std::vector<std::vector<std::size_t>> sets = pseudo_gt_sets(anchors, cfg.threshold);

    CalibrationReport out;
    out.quantiles = cfg.quantiles;
    std::vector<double> ade_acc(cfg.quantiles.size(), 0.0);
    std::vector<double> fde_acc(cfg.quantiles.size(), 0.0);

    for (std::size_t i = 0; i < cases.size(); ++i) {
        const std::vector<std::size_t>& set = sets[i];
        if (set.size() < cfg.min_futures) {
            ++out.excluded;
            continue;
        }
        ++out.included;

        // Futures ordered by distance to the true future, nearest first.
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(set.size());
        for (std::size_t j : set)
            order.emplace_back(flat_distance(cases[j].future, cases[i].future), j);
        std::sort(order.begin(), order.end());

        const std::uint64_t seed_i = case_seed(cfg.seed, i);
        for (std::size_t qi = 0; qi < cfg.quantiles.size(); ++qi) {
            const double q = cfg.quantiles[qi];
            const Tensor& empirical = cases[order[mirror_rank(q, order.size())].second].future;
            const ForecastSample model_q =
                sample_quantile_sequence(model, cases[i].observed, model.cfg.k_pred, q, seed_i);
            const std::vector<Tensor> one{model_q.motion.frames};
            ade_acc[qi] += ade(one, empirical);
            fde_acc[qi] += fde(one, empirical);
        }
    }

    if (out.included == 0) {
        out.insufficient = true;
        return out;
    }
    out.ade_q.resize(cfg.quantiles.size());
    out.fde_q.resize(cfg.quantiles.size());
    for (std::size_t qi = 0; qi < cfg.quantiles.size(); ++qi) {
        out.ade_q[qi] = ade_acc[qi] / static_cast<double>(out.included);
        out.fde_q[qi] = fde_acc[qi] / static_cast<double>(out.included);
    }
    return out;
}

CoverageReport latent_coverage(const Model& model, const MotionDataset& test,
                               double central_mass) {
    if (!(central_mass > 0.0) || !(central_mass < 1.0))
        raise(Errc::config, "central mass must lie in (0, 1)");
    require_model_matches(model, test);
    const std::vector<EvalCase> cases = make_eval_cases(test, model.cfg.t_obs, model.cfg.k_pred);

    CoverageReport out;
    out.central_mass = central_mass;
    out.cases = cases.size();
    std::size_t covered = 0;
    for (const EvalCase& ec : cases) {
        const Rollout roll = rollout_mean(model, ec.observed, model.cfg.k_pred);
        const Tensor true_latents = model.ptm.forward(normalize_frames(ec.future, model.norm));
        for (std::size_t t = 0; t < roll.trace.dists.size(); ++t) {
            const FrameQuantiles fq =
                frame_quantile(roll.trace.dists[t], row_of(true_latents, t));
            if (fq.radius_quantile <= central_mass) ++covered;
            ++out.frames;
        }
    }
    out.coverage = static_cast<double>(covered) / static_cast<double>(out.frames);
    return out;
}

// ---------------------------------------------------------------------------
// Sampling efficiency

DiverseMetrics median_metrics(std::vector<DiverseMetrics> runs) {
    if (runs.empty()) raise(Errc::data, "median needs at least one run");
    const auto med = [&runs](double DiverseMetrics::* field) {
        std::vector<double> v;
        v.reserve(runs.size());
        for (const DiverseMetrics& m : runs) v.push_back(m.*field);
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    DiverseMetrics out;
    out.apd = med(&DiverseMetrics::apd);
    out.ade = med(&DiverseMetrics::ade);
    out.fde = med(&DiverseMetrics::fde);
    out.mmade = med(&DiverseMetrics::mmade);
    out.mmfde = med(&DiverseMetrics::mmfde);
    return out;
}

double percent_change(double from, double to) {
    if (from == 0.0) return 0.0;
    return 100.0 * (to - from) / from;
}

SamplingEfficiencyReport sampling_efficiency_report(const Model& model,
                                                    const MotionDataset& test,
                                                    const SamplingEfficiencyConfig& cfg) {
    if (cfg.s_small < 2 || cfg.s_large < 2)
        raise(Errc::config, "sampling comparison needs at least two samples per arm");
    if (cfg.s_small >= cfg.s_large)
        raise(Errc::config, "the small sample count must be below the large one");
    if (cfg.seeds.empty()) raise(Errc::config, "sampling comparison needs at least one seed");

    SamplingEfficiencyReport out;
    out.s_small = cfg.s_small;
    out.s_large = cfg.s_large;
    const auto run = [&](std::size_t samples, SampleStrategy strategy, std::uint64_t seed) {
        DiverseEvalConfig dc;
        dc.samples = samples;
        dc.beta = cfg.beta;
        dc.strategy = strategy;
        dc.disk_radius = cfg.disk_radius;
        dc.threshold = cfg.threshold;
        dc.seed = seed;
        dc.max_cases = cfg.max_cases;
        return eval_diverse(model, test, dc).mean;
    };
    for (std::uint64_t seed : cfg.seeds) {
        out.random_large.per_seed.push_back(run(cfg.s_large, SampleStrategy::random, seed));
        out.random_small.per_seed.push_back(run(cfg.s_small, SampleStrategy::random, seed));
        out.disk_small.per_seed.push_back(run(cfg.s_small, SampleStrategy::poisson_disk, seed));
    }
    out.random_large.median = median_metrics(out.random_large.per_seed);
    out.random_small.median = median_metrics(out.random_small.per_seed);
    out.disk_small.median = median_metrics(out.disk_small.per_seed);

    const auto deltas = [&](const DiverseMetrics& small) {
        DiverseMetrics d;
        d.apd = percent_change(out.random_large.median.apd, small.apd);
        d.ade = percent_change(out.random_large.median.ade, small.ade);
        d.fde = percent_change(out.random_large.median.fde, small.fde);
        d.mmade = percent_change(out.random_large.median.mmade, small.mmade);
        d.mmfde = percent_change(out.random_large.median.mmfde, small.mmfde);
        return d;
    };
    out.random_delta_pct = deltas(out.random_small.median);
    out.disk_delta_pct = deltas(out.disk_small.median);
    return out;
}

// ---------------------------------------------------------------------------
// Emission

std::string diverse_csv(const DiverseEvalResult& r) {
    std::string out = "case_id,apd,ade,fde,mmade,mmfde\n";
    for (std::size_t i = 0; i < r.per_case.size(); ++i) {
        out += r.ids[i];
        out += ',';
        append_metrics_row(out, r.per_case[i]);
    }
    return out;
}

std::string diverse_json(const DiverseEvalResult& r) {
    json per_case = json::array();
    for (std::size_t i = 0; i < r.per_case.size(); ++i) {
        json row = metrics_json(r.per_case[i]);
        row["id"] = r.ids[i];
        per_case.push_back(std::move(row));
    }
    json j{{"cases", r.cases}, {"mean", metrics_json(r.mean)}, {"per_case", std::move(per_case)}};
    return j.dump(2) + "\n";
}

std::string det_csv(const DetEvalResult& r) {
    std::string out = "horizon,mae\n";
    for (std::size_t t = 0; t < r.per_horizon.size(); ++t) {
        out += std::to_string(t + 1);
        out += ',';
        out += num(r.per_horizon[t]);
        out += '\n';
    }
    return out;
}

std::string det_json(const DetEvalResult& r) {
    json j{{"cases", r.cases}, {"overall", r.overall}, {"per_horizon", r.per_horizon}};
    return j.dump(2) + "\n";
}

std::string calibration_csv(const CalibrationReport& r) {
    std::string out = "quantile,ade,fde\n";
    if (r.insufficient) return out;
    for (std::size_t qi = 0; qi < r.quantiles.size(); ++qi) {
        out += num(r.quantiles[qi]);
        out += ',';
        out += num(r.ade_q[qi]);
        out += ',';
        out += num(r.fde_q[qi]);
        out += '\n';
    }
    return out;
}

std::string calibration_json(const CalibrationReport& r, const CoverageReport& cov) {
    json j{{"quantiles", r.quantiles},
           {"ade", r.ade_q},
           {"fde", r.fde_q},
           {"included", r.included},
           {"excluded", r.excluded},
           {"insufficient", r.insufficient},
           {"coverage", json{{"central_mass", cov.central_mass},
                             {"coverage", cov.coverage},
                             {"frames", cov.frames},
                             {"cases", cov.cases}}}};
    return j.dump(2) + "\n";
}

std::string sampling_csv(const SamplingEfficiencyReport& r) {
    std::string out = "strategy,samples,seed_index,apd,ade,fde,mmade,mmfde\n";
    const auto rows = [&](const char* name, std::size_t samples, const StrategyStats& st) {
        for (std::size_t i = 0; i < st.per_seed.size(); ++i) {
            out += name;
            out += ',';
            out += std::to_string(samples);
            out += ',';
            out += std::to_string(i);
            out += ',';
            append_metrics_row(out, st.per_seed[i]);
        }
    };
    rows("random", r.s_large, r.random_large);
    rows("random", r.s_small, r.random_small);
    rows("poisson-disk", r.s_small, r.disk_small);
    return out;
}

std::string sampling_json(const SamplingEfficiencyReport& r) {
    const auto stats_json = [](const StrategyStats& st) {
        json per_seed = json::array();
        for (const DiverseMetrics& m : st.per_seed) per_seed.push_back(metrics_json(m));
        return json{{"median", metrics_json(st.median)}, {"per_seed", std::move(per_seed)}};
    };
    json j{{"s_small", r.s_small},
           {"s_large", r.s_large},
           {"random_large", stats_json(r.random_large)},
           {"random_small", stats_json(r.random_small)},
           {"disk_small", stats_json(r.disk_small)},
           {"random_delta_pct", metrics_json(r.random_delta_pct)},
           {"disk_delta_pct", metrics_json(r.disk_delta_pct)}};
    return j.dump(2) + "\n";
}

}  // namespace probmotion
