// Command-line entry point: data generation, training, forecasting, and the
// evaluation harnesses, each leaving a run manifest that allows a bit-identical
// rerun of its artifacts.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "probmotion/dynamics.hpp"
#include "probmotion/error.hpp"
#include "probmotion/eval.hpp"
#include "probmotion/fileio.hpp"
#include "probmotion/model.hpp"
#include "probmotion/motion_data.hpp"
#include "probmotion/synthgen.hpp"
#include "probmotion/training.hpp"
#include "probmotion/version.hpp"

namespace {

using namespace probmotion;
using nlohmann::json;

constexpr int exit_usage = 1;
constexpr int exit_data = 2;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Run manifests. Each command records its resolved configuration plus every
// input and output path; rerunning the same command with the manifest's
// config object reproduces the artifacts byte for byte.

void write_manifest(const std::string& command, const json& config,
                    std::uint64_t seed, const json& inputs, const json& outputs,
                    const std::string& path) {
    json m{{"command", command},
           {"config", config},
           {"seed", seed},
           {"inputs", inputs},
           {"outputs", outputs},
           {"versions", json{{"probmotion", library_version},
                             {"checkpoint_format", checkpoint_version},
                             {"motion_format", motion_format_version}}}};
    atomic_write_text(path, m.dump(2) + "\n");
}

// Strict helpers for the CLI-side config files (commands whose knobs are not
// already covered by a library config struct).
json parse_config_object(const std::string& path) {
    json j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        raise(Errc::format, "'" + path + "' is not a JSON object");
    return j;
}

template <typename T>
void take(json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        raise(Errc::config, std::string("config key '") + key + "' has the wrong type");
    }
    j.erase(key);
}

void reject_leftovers(const json& j) {
    for (const auto& item : j.items())
        raise(Errc::config, "unknown config key '" + item.key() + "'");
}

// ---------------------------------------------------------------------------
// Shared loading steps.

Model load_model(const std::string& ckpt_path, const MotionDataset& data) {
    return load_checkpoint(ckpt_path, data.topology);
}

void print_metrics_line(const char* label, const DiverseMetrics& m) {
    std::cout << label << "  apd " << fmt(m.apd) << "  ade " << fmt(m.ade) << "  fde "
              << fmt(m.fde) << "  mmade " << fmt(m.mmade) << "  mmfde " << fmt(m.mmfde)
              << "\n";
}

// ---------------------------------------------------------------------------
// gen-data

void setup_gen_data(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen-data", "generate a synthetic motion dataset");
    struct Opts {
        std::string config, out;
        SynthConfig v;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--config", opts->config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output motion file")->required();
    auto* o_joints = cmd->add_option("--joints", opts->v.joints, "joint count");
    auto* o_channels = cmd->add_option("--channels", opts->v.channels, "channels per joint");
    auto* o_sequences = cmd->add_option("--sequences", opts->v.n_sequences, "sequence count");
    auto* o_length = cmd->add_option("--length", opts->v.length, "frames per sequence");
    auto* o_fps = cmd->add_option("--fps", opts->v.fps, "frame rate");
    auto* o_modes = cmd->add_option("--modes", opts->v.modes, "future mode count");
    auto* o_branch = cmd->add_option("--branch-frame", opts->v.branch_frame, "frame where modes diverge");
    auto* o_noise = cmd->add_option("--noise-std", opts->v.noise_std, "additive noise scale");
    auto* o_seed = cmd->add_option("--seed", opts->v.seed, "generator seed");

    cmd->callback([=]() {
        SynthConfig cfg;
        if (!opts->config.empty()) cfg = synth_config_from_json(read_text_file(opts->config));
        if (o_joints->count()) cfg.joints = opts->v.joints;
        if (o_channels->count()) cfg.channels = opts->v.channels;
        if (o_sequences->count()) cfg.n_sequences = opts->v.n_sequences;
        if (o_length->count()) cfg.length = opts->v.length;
        if (o_fps->count()) cfg.fps = opts->v.fps;
        if (o_modes->count()) cfg.modes = opts->v.modes;
        if (o_branch->count()) cfg.branch_frame = opts->v.branch_frame;
        if (o_noise->count()) cfg.noise_std = opts->v.noise_std;
        if (o_seed->count()) cfg.seed = opts->v.seed;

        const MotionDataset data = generate_synthetic(cfg);
        save_motion_file(data, opts->out);
        write_manifest("gen-data", json::parse(synth_config_to_json(cfg)), cfg.seed, json::object(),
                       json{{"data", opts->out}}, opts->out + ".manifest.json");
        std::cout << "generated " << data.sequences.size() << " sequences ("
                  << data.topology.joints() << " joints x " << data.topology.channels
                  << " channels, " << cfg.length << " frames, " << cfg.modes
                  << " modes) -> " << opts->out << "\n";
    });
}

// ---------------------------------------------------------------------------
// train

void setup_train(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "train a model on a motion dataset");
    struct Opts {
        std::string data, config, out;
        ModelConfig v;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--data", opts->data, "training motion file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", opts->config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output checkpoint file")->required();
    auto* o_tobs = cmd->add_option("--t-obs", opts->v.t_obs, "observed frames per window");
    auto* o_kpred = cmd->add_option("--k-pred", opts->v.k_pred, "forecast horizon");
    auto* o_layers = cmd->add_option("--layers", opts->v.layers, "coupling layers");
    auto* o_hidden = cmd->add_option("--hidden", opts->v.hidden, "recurrent width");
    auto* o_lr = cmd->add_option("--lr", opts->v.lr, "learning rate");
    auto* o_epochs = cmd->add_option("--epochs", opts->v.epochs, "training epochs");
    auto* o_batch = cmd->add_option("--batch", opts->v.batch, "batch size");
    auto* o_seed = cmd->add_option("--seed", opts->v.seed, "training seed");
    auto* o_alpha = cmd->add_option("--alpha", opts->v.alpha, "latent likelihood weight");
    auto* o_beta = cmd->add_option("--beta", opts->v.beta_loss, "pose reconstruction weight");
    auto* o_gamma = cmd->add_option("--gamma", opts->v.gamma, "flow prior weight");
    auto* o_clip = cmd->add_option("--clip-norm", opts->v.clip_norm, "gradient norm clip");
    auto* o_floor = cmd->add_option("--sigma-floor", opts->v.sigma_floor, "stddev floor");
    auto* o_scaling = cmd->add_option("--scaling-layer", opts->v.scaling_layer, "enable the scaling layer");
    auto* o_part = cmd->add_option("--part-aware", opts->v.part_aware_prediction,
                                   "per-part recurrent forecaster");
    auto* o_coupling = cmd->add_option("--coupling", opts->v.coupling, "gcn | dense");
    auto* o_shift = cmd->add_option("--shift-tanh", opts->v.shift_tanh, "tanh on coupling shifts");
    auto* o_stride = cmd->add_option("--stride", opts->v.stride, "window stride (0 = horizon)");

    cmd->callback([=]() {
        ModelConfig cfg;
        if (!opts->config.empty()) cfg = model_config_from_json(read_text_file(opts->config));
        if (o_tobs->count()) cfg.t_obs = opts->v.t_obs;
        if (o_kpred->count()) cfg.k_pred = opts->v.k_pred;
        if (o_layers->count()) cfg.layers = opts->v.layers;
        if (o_hidden->count()) cfg.hidden = opts->v.hidden;
        if (o_lr->count()) cfg.lr = opts->v.lr;
        if (o_epochs->count()) cfg.epochs = opts->v.epochs;
        if (o_batch->count()) cfg.batch = opts->v.batch;
        if (o_seed->count()) cfg.seed = opts->v.seed;
        if (o_alpha->count()) cfg.alpha = opts->v.alpha;
        if (o_beta->count()) cfg.beta_loss = opts->v.beta_loss;
        if (o_gamma->count()) cfg.gamma = opts->v.gamma;
        if (o_clip->count()) cfg.clip_norm = opts->v.clip_norm;
        if (o_floor->count()) cfg.sigma_floor = opts->v.sigma_floor;
        if (o_scaling->count()) cfg.scaling_layer = opts->v.scaling_layer;
        if (o_part->count()) cfg.part_aware_prediction = opts->v.part_aware_prediction;
        if (o_coupling->count()) cfg.coupling = opts->v.coupling;
        if (o_shift->count()) cfg.shift_tanh = opts->v.shift_tanh;
        if (o_stride->count()) cfg.stride = opts->v.stride;
        validate_model_config(cfg);

        const MotionDataset data = load_motion_file(opts->data);
        TrainResult result = train(data.topology, data, cfg);
        for (const EpochLog& log : result.log)
            std::cout << "epoch " << log.epoch << ": total " << fmt(log.total) << "  h "
                      << fmt(log.h) << "  r " << fmt(log.r) << "  n " << fmt(log.n) << "\n";
        for (const std::string& w : result.warnings) std::cout << "warning: " << w << "\n";
        save_checkpoint(result.model, opts->out);

        std::size_t scalars = 0;
        for (const Tensor* p : result.model.param_ptrs()) scalars += p->size();
        write_manifest("train", json::parse(model_config_to_json(cfg)), cfg.seed,
                       json{{"data", opts->data}}, json{{"checkpoint", opts->out}},
                       opts->out + ".manifest.json");
        std::cout << "trained " << scalars << " parameters over " << result.log.size()
                  << " epochs -> " << opts->out << "\n";
    });
}

// ---------------------------------------------------------------------------
// forecast

struct ForecastOpts {
    std::string id;
    std::string strategy = "mean";
    double q = 0.5;
    std::size_t samples = 5;
    double beta = 1.0;
    double radius = -1.0;
    std::size_t horizon = 0;  // 0 -> model horizon
    std::uint64_t seed = 1;
};

json forecast_opts_json(const ForecastOpts& o) {
    return json{{"id", o.id},         {"strategy", o.strategy}, {"q", o.q},
                {"samples", o.samples}, {"beta", o.beta},       {"radius", o.radius},
                {"horizon", o.horizon}, {"seed", o.seed}};
}

ForecastOpts forecast_opts_from_json(const std::string& path) {
    json j = parse_config_object(path);
    ForecastOpts o;
    take(j, "id", o.id);
    take(j, "strategy", o.strategy);
    take(j, "q", o.q);
    take(j, "samples", o.samples);
    take(j, "beta", o.beta);
    take(j, "radius", o.radius);
    take(j, "horizon", o.horizon);
    take(j, "seed", o.seed);
    reject_leftovers(j);
    return o;
}

void setup_forecast(CLI::App& app) {
    auto* cmd = app.add_subcommand("forecast", "roll out futures for one observed sequence");
    struct Opts {
        std::string ckpt, obs, config, out;
        ForecastOpts v;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--ckpt", opts->ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--obs", opts->obs, "motion file with the observed sequence")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", opts->config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output motion file")->required();
    auto* o_id = cmd->add_option("--id", opts->v.id, "sequence id (default: first)");
    auto* o_strategy = cmd->add_option("--strategy", opts->v.strategy,
                                       "mean | random | quantile | poisson-disk");
    auto* o_q = cmd->add_option("--q", opts->v.q, "quantile in (0, 0.5]");
    auto* o_samples = cmd->add_option("--samples", opts->v.samples, "sample count");
    auto* o_beta = cmd->add_option("--beta", opts->v.beta, "sampling scale");
    auto* o_radius = cmd->add_option("--radius", opts->v.radius, "diverse-sampling radius");
    auto* o_horizon = cmd->add_option("--horizon", opts->v.horizon, "frames to forecast");
    auto* o_seed = cmd->add_option("--seed", opts->v.seed, "sampling seed");

    cmd->callback([=]() {
        ForecastOpts o;
        if (!opts->config.empty()) o = forecast_opts_from_json(opts->config);
        if (o_id->count()) o.id = opts->v.id;
        if (o_strategy->count()) o.strategy = opts->v.strategy;
        if (o_q->count()) o.q = opts->v.q;
        if (o_samples->count()) o.samples = opts->v.samples;
        if (o_beta->count()) o.beta = opts->v.beta;
        if (o_radius->count()) o.radius = opts->v.radius;
        if (o_horizon->count()) o.horizon = opts->v.horizon;
        if (o_seed->count()) o.seed = opts->v.seed;

        const MotionDataset data = load_motion_file(opts->obs);
        const Model model = load_model(opts->ckpt, data);
        const MotionSequence* found = nullptr;
        if (o.id.empty() && !data.sequences.empty()) found = &data.sequences.front();
        for (const MotionSequence& seq : data.sequences)
            if (seq.id == o.id) found = &seq;
        if (found == nullptr) raise(Errc::data, "sequence id '" + o.id + "' is not in the file");
        if (found->frames.rows() < model.cfg.t_obs)
            raise(Errc::data, "sequence '" + found->id + "' is shorter than the observation window");
        MotionSequence observed;
        observed.id = found->id;
        observed.fps = found->fps;
        observed.frames = Tensor(model.cfg.t_obs, found->frames.cols());
        for (std::size_t t = 0; t < model.cfg.t_obs; ++t)
            for (std::size_t c = 0; c < found->frames.cols(); ++c)
                observed.frames.at(t, c) = found->frames.at(t, c);
        o.id = found->id;  // resolve the default for the manifest

        RolloutConfig rc;
        rc.horizon = o.horizon == 0 ? model.cfg.k_pred : o.horizon;
        rc.beta = o.beta;
        rc.strategy = strategy_from_name(o.strategy);
        rc.q = o.q;
        rc.samples = o.samples;
        rc.radius = o.radius;
        rc.seed = o.seed;
        const ForecastBundle bundle = forecast(model, observed, rc);

        MotionDataset out;
        out.topology = data.topology;
        out.sequences.push_back(bundle.mean_rollout.motion);
        for (const ForecastSample& s : bundle.samples) out.sequences.push_back(s.motion);
        save_motion_file(out, opts->out);
        for (const std::string& w : bundle.warnings) std::cout << "warning: " << w << "\n";
        write_manifest("forecast", forecast_opts_json(o), o.seed,
                       json{{"checkpoint", opts->ckpt}, {"observations", opts->obs}},
                       json{{"forecast", opts->out}}, opts->out + ".manifest.json");
        std::cout << "forecast '" << o.id << "' " << rc.horizon << " frames, strategy "
                  << o.strategy << ", " << bundle.samples.size() << " samples -> " << opts->out
                  << "\n";
    });
}

// ---------------------------------------------------------------------------
// eval-diverse

struct DiverseOpts {
    std::size_t samples = 50;
    double beta = 1.0;
    std::string strategy = "random";
    double radius = -1.0;
    double threshold = 0.5;
    std::uint64_t seed = 1;
    std::size_t max_cases = 0;
};

json diverse_opts_json(const DiverseOpts& o) {
    return json{{"samples", o.samples},     {"beta", o.beta}, {"strategy", o.strategy},
                {"radius", o.radius},       {"threshold", o.threshold},
                {"seed", o.seed},           {"max_cases", o.max_cases}};
}

DiverseOpts diverse_opts_from_json(const std::string& path) {
    json j = parse_config_object(path);
    DiverseOpts o;
    take(j, "samples", o.samples);
    take(j, "beta", o.beta);
    take(j, "strategy", o.strategy);
    take(j, "radius", o.radius);
    take(j, "threshold", o.threshold);
    take(j, "seed", o.seed);
    take(j, "max_cases", o.max_cases);
    reject_leftovers(j);
    return o;
}

void setup_eval_diverse(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-diverse", "diversity/accuracy metrics over sampled futures");
    struct Opts {
        std::string ckpt, data, config, out;
        DiverseOpts v;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--ckpt", opts->ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--data", opts->data, "evaluation motion file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", opts->config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output prefix (.csv/.json)")->required();
    auto* o_samples = cmd->add_option("--samples", opts->v.samples, "samples per case");
    auto* o_beta = cmd->add_option("--beta", opts->v.beta, "sampling scale");
    auto* o_strategy = cmd->add_option("--strategy", opts->v.strategy, "random | poisson-disk");
    auto* o_radius = cmd->add_option("--radius", opts->v.radius, "diverse-sampling radius");
    auto* o_threshold = cmd->add_option("--threshold", opts->v.threshold, "pseudo-GT anchor distance");
    auto* o_seed = cmd->add_option("--seed", opts->v.seed, "evaluation seed");
    auto* o_max = cmd->add_option("--max-cases", opts->v.max_cases, "cap on cases (0 = all)");

    cmd->callback([=]() {
        DiverseOpts o;
        if (!opts->config.empty()) o = diverse_opts_from_json(opts->config);
        if (o_samples->count()) o.samples = opts->v.samples;
        if (o_beta->count()) o.beta = opts->v.beta;
        if (o_strategy->count()) o.strategy = opts->v.strategy;
        if (o_radius->count()) o.radius = opts->v.radius;
        if (o_threshold->count()) o.threshold = opts->v.threshold;
        if (o_seed->count()) o.seed = opts->v.seed;
        if (o_max->count()) o.max_cases = opts->v.max_cases;

        const MotionDataset data = load_motion_file(opts->data);
        const Model model = load_model(opts->ckpt, data);
        DiverseEvalConfig dc;
        dc.samples = o.samples;
        dc.beta = o.beta;
        dc.strategy = strategy_from_name(o.strategy);
        dc.disk_radius = o.radius;
        dc.threshold = o.threshold;
        dc.seed = o.seed;
        dc.max_cases = o.max_cases;
        const DiverseEvalResult result = eval_diverse(model, data, dc);

        atomic_write_text(opts->out + ".csv", diverse_csv(result));
        atomic_write_text(opts->out + ".json", diverse_json(result));
        write_manifest("eval-diverse", diverse_opts_json(o), o.seed,
                       json{{"checkpoint", opts->ckpt}, {"data", opts->data}},
                       json{{"csv", opts->out + ".csv"}, {"json", opts->out + ".json"}},
                       opts->out + ".manifest.json");
        std::cout << result.cases << " cases, " << o.samples << " samples each ("
                  << o.strategy << ")\n";
        print_metrics_line("mean", result.mean);
        std::cout << "reports -> " << opts->out << ".csv, " << opts->out << ".json\n";
    });
}

// ---------------------------------------------------------------------------
// eval-det

void setup_eval_det(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-det", "per-horizon angle error of the mean rollout");
    struct Opts {
        std::string ckpt, data, out;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--ckpt", opts->ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--data", opts->data, "evaluation motion file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output prefix (.csv/.json)")->required();

    cmd->callback([=]() {
        const MotionDataset data = load_motion_file(opts->data);
        const Model model = load_model(opts->ckpt, data);
        const DetEvalResult result = eval_deterministic(model, data);
        atomic_write_text(opts->out + ".csv", det_csv(result));
        atomic_write_text(opts->out + ".json", det_json(result));
        write_manifest("eval-det", json::object(), model.cfg.seed,
                       json{{"checkpoint", opts->ckpt}, {"data", opts->data}},
                       json{{"csv", opts->out + ".csv"}, {"json", opts->out + ".json"}},
                       opts->out + ".manifest.json");
        std::cout << result.cases << " cases, horizon " << result.per_horizon.size()
                  << ": mean angle error " << fmt(result.overall) << "\n";
        std::cout << "reports -> " << opts->out << ".csv, " << opts->out << ".json\n";
    });
}

// ---------------------------------------------------------------------------
// eval-calib

struct CalibOpts {
    std::vector<double> quantiles{0.50, 0.45, 0.40, 0.25};
    double threshold = 0.5;
    std::size_t min_futures = 50;
    double central_mass = 0.8;
    std::uint64_t seed = 1;
};

json calib_opts_json(const CalibOpts& o) {
    return json{{"quantiles", o.quantiles},
                {"threshold", o.threshold},
                {"min_futures", o.min_futures},
                {"central_mass", o.central_mass},
                {"seed", o.seed}};
}

CalibOpts calib_opts_from_json(const std::string& path) {
    json j = parse_config_object(path);
    CalibOpts o;
    take(j, "quantiles", o.quantiles);
    take(j, "threshold", o.threshold);
    take(j, "min_futures", o.min_futures);
    take(j, "central_mass", o.central_mass);
    take(j, "seed", o.seed);
    reject_leftovers(j);
    return o;
}

void setup_eval_calib(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-calib",
                                   "quantile calibration against pseudo ground truths");
    struct Opts {
        std::string ckpt, data, config, out;
        CalibOpts v;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--ckpt", opts->ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--data", opts->data, "evaluation motion file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", opts->config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output prefix (.csv/.json)")->required();
    auto* o_q = cmd->add_option("--quantile", opts->v.quantiles, "quantiles to evaluate");
    auto* o_threshold = cmd->add_option("--threshold", opts->v.threshold, "pseudo-GT anchor distance");
    auto* o_min = cmd->add_option("--min-futures", opts->v.min_futures,
                                  "minimum pseudo futures per case");
    auto* o_mass = cmd->add_option("--central-mass", opts->v.central_mass,
                                   "coverage region mass in (0, 1)");
    auto* o_seed = cmd->add_option("--seed", opts->v.seed, "evaluation seed");

    cmd->callback([=]() {
        CalibOpts o;
        if (!opts->config.empty()) o = calib_opts_from_json(opts->config);
        if (o_q->count()) o.quantiles = opts->v.quantiles;
        if (o_threshold->count()) o.threshold = opts->v.threshold;
        if (o_min->count()) o.min_futures = opts->v.min_futures;
        if (o_mass->count()) o.central_mass = opts->v.central_mass;
        if (o_seed->count()) o.seed = opts->v.seed;

        const MotionDataset data = load_motion_file(opts->data);
        const Model model = load_model(opts->ckpt, data);
        CalibrationConfig cc;
        cc.quantiles = o.quantiles;
        cc.threshold = o.threshold;
        cc.min_futures = o.min_futures;
        cc.seed = o.seed;
        const CalibrationReport report = empirical_quantile_eval(model, data, cc);
        const CoverageReport cov = latent_coverage(model, data, o.central_mass);

        atomic_write_text(opts->out + ".csv", calibration_csv(report));
        atomic_write_text(opts->out + ".json", calibration_json(report, cov));
        write_manifest("eval-calib", calib_opts_json(o), o.seed,
                       json{{"checkpoint", opts->ckpt}, {"data", opts->data}},
                       json{{"csv", opts->out + ".csv"}, {"json", opts->out + ".json"}},
                       opts->out + ".manifest.json");
        std::cout << "latent coverage " << fmt(cov.coverage) << " at central mass "
                  << fmt(cov.central_mass) << " (" << cov.frames << " frames)\n";
        if (report.insufficient) {
            std::cout << "quantile calibration: insufficient data — no case had "
                      << o.min_futures << "+ pseudo futures (" << report.excluded
                      << " excluded)\n";
        } else {
            for (std::size_t i = 0; i < report.quantiles.size(); ++i)
                std::cout << "q " << fmt(report.quantiles[i]) << ": ade "
                          << fmt(report.ade_q[i]) << "  fde " << fmt(report.fde_q[i]) << "\n";
            std::cout << report.included << " cases included, " << report.excluded
                      << " excluded\n";
        }
        std::cout << "reports -> " << opts->out << ".csv, " << opts->out << ".json\n";
    });
}

// ---------------------------------------------------------------------------
// eval-sampling

struct SamplingOpts {
    std::size_t s_small = 5;
    std::size_t s_large = 50;
    std::uint64_t seed_base = 1;
    std::size_t seed_count = 5;
    double beta = 1.0;
    double radius = -1.0;
    double threshold = 0.5;
    std::size_t max_cases = 0;
};

json sampling_opts_json(const SamplingOpts& o) {
    return json{{"s_small", o.s_small},       {"s_large", o.s_large},
                {"seed_base", o.seed_base},   {"seed_count", o.seed_count},
                {"beta", o.beta},             {"radius", o.radius},
                {"threshold", o.threshold},   {"max_cases", o.max_cases}};
}

SamplingOpts sampling_opts_from_json(const std::string& path) {
    json j = parse_config_object(path);
    SamplingOpts o;
    take(j, "s_small", o.s_small);
    take(j, "s_large", o.s_large);
    take(j, "seed_base", o.seed_base);
    take(j, "seed_count", o.seed_count);
    take(j, "beta", o.beta);
    take(j, "radius", o.radius);
    take(j, "threshold", o.threshold);
    take(j, "max_cases", o.max_cases);
    reject_leftovers(j);
    return o;
}

void setup_eval_sampling(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-sampling",
                                   "few diverse samples versus many random ones");
    struct Opts {
        std::string ckpt, data, config, out;
        SamplingOpts v;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--ckpt", opts->ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--data", opts->data, "evaluation motion file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", opts->config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "output prefix (.csv/.json)")->required();
    auto* o_small = cmd->add_option("--s-small", opts->v.s_small, "small sample count");
    auto* o_large = cmd->add_option("--s-large", opts->v.s_large, "large sample count");
    auto* o_base = cmd->add_option("--seed", opts->v.seed_base, "first seed");
    auto* o_count = cmd->add_option("--seed-count", opts->v.seed_count, "number of seeds");
    auto* o_beta = cmd->add_option("--beta", opts->v.beta, "sampling scale");
    auto* o_radius = cmd->add_option("--radius", opts->v.radius, "diverse-sampling radius");
    auto* o_threshold = cmd->add_option("--threshold", opts->v.threshold, "pseudo-GT anchor distance");
    auto* o_max = cmd->add_option("--max-cases", opts->v.max_cases, "cap on cases (0 = all)");

    cmd->callback([=]() {
        SamplingOpts o;
        if (!opts->config.empty()) o = sampling_opts_from_json(opts->config);
        if (o_small->count()) o.s_small = opts->v.s_small;
        if (o_large->count()) o.s_large = opts->v.s_large;
        if (o_base->count()) o.seed_base = opts->v.seed_base;
        if (o_count->count()) o.seed_count = opts->v.seed_count;
        if (o_beta->count()) o.beta = opts->v.beta;
        if (o_radius->count()) o.radius = opts->v.radius;
        if (o_threshold->count()) o.threshold = opts->v.threshold;
        if (o_max->count()) o.max_cases = opts->v.max_cases;
        if (o.seed_count == 0) raise(Errc::config, "seed count must be positive");

        const MotionDataset data = load_motion_file(opts->data);
        const Model model = load_model(opts->ckpt, data);
        SamplingEfficiencyConfig sc;
        sc.s_small = o.s_small;
        sc.s_large = o.s_large;
        sc.seeds.clear();
        for (std::size_t i = 0; i < o.seed_count; ++i)
            sc.seeds.push_back(o.seed_base + static_cast<std::uint64_t>(i));
        sc.beta = o.beta;
        sc.disk_radius = o.radius;
        sc.threshold = o.threshold;
        sc.max_cases = o.max_cases;
        const SamplingEfficiencyReport report = sampling_efficiency_report(model, data, sc);

        atomic_write_text(opts->out + ".csv", sampling_csv(report));
        atomic_write_text(opts->out + ".json", sampling_json(report));
        write_manifest("eval-sampling", sampling_opts_json(o), o.seed_base,
                       json{{"checkpoint", opts->ckpt}, {"data", opts->data}},
                       json{{"csv", opts->out + ".csv"}, {"json", opts->out + ".json"}},
                       opts->out + ".manifest.json");
        std::cout << o.seed_count << " seeds, " << o.s_large << " vs " << o.s_small
                  << " samples\n";
        print_metrics_line("random large median", report.random_large.median);
        print_metrics_line("random small median", report.random_small.median);
        print_metrics_line("diverse small median", report.disk_small.median);
        std::cout << "diverse-vs-large deltas (%)  apd " << fmt(report.disk_delta_pct.apd)
                  << "  ade " << fmt(report.disk_delta_pct.ade) << "\n";
        std::cout << "reports -> " << opts->out << ".csv, " << opts->out << ".json\n";
    });
}

// ---------------------------------------------------------------------------
// inspect

void setup_inspect(CLI::App& app) {
    auto* cmd = app.add_subcommand("inspect", "print a checkpoint's header");
    struct Opts {
        std::string ckpt, out;
    };
    auto opts = std::make_shared<Opts>();
    cmd->add_option("--ckpt", opts->ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "optional path for the header as JSON");

    cmd->callback([=]() {
        const json header = json::parse(checkpoint_header_json(opts->ckpt));
        std::size_t tensors = 0;
        std::size_t scalars = 0;
        for (const json& entry : header.at("params")) {
            ++tensors;
            scalars += entry.at("rows").get<std::size_t>() * entry.at("cols").get<std::size_t>();
        }
        const json& cfg = header.at("config");
        char fp[32];
        std::snprintf(fp, sizeof(fp), "%016llx",
                      static_cast<unsigned long long>(
                          header.at("topology_fingerprint").get<std::uint64_t>()));
        std::cout << "checkpoint version: " << header.at("version").get<int>() << "\n"
                  << "topology fingerprint: " << fp << "\n"
                  << "parameters: " << tensors << " tensors, " << scalars << " scalars\n"
                  << "window: " << cfg.at("t_obs").get<std::size_t>() << " observed, "
                  << cfg.at("k_pred").get<std::size_t>() << " forecast\n"
                  << "coupling: " << cfg.at("coupling").get<std::string>() << " x "
                  << cfg.at("layers").get<std::size_t>()
                  << (cfg.at("scaling_layer").get<bool>() ? " + scaling layer" : "") << "\n"
                  << "hidden: " << cfg.at("hidden").get<std::size_t>() << ", part-aware: "
                  << (cfg.at("part_aware_prediction").get<bool>() ? "true" : "false") << "\n"
                  << "training seed: " << header.at("seed").get<std::uint64_t>() << "\n";
        if (!opts->out.empty()) {
            atomic_write_text(opts->out, header.dump(2) + "\n");
            write_manifest("inspect", json::object(), header.at("seed").get<std::uint64_t>(),
                           json{{"checkpoint", opts->ckpt}}, json{{"header", opts->out}},
                           opts->out + ".manifest.json");
            std::cout << "header -> " << opts->out << "\n";
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic 3D human motion forecasting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version);
    setup_gen_data(app);
    setup_train(app);
    setup_forecast(app);
    setup_eval_diverse(app);
    setup_eval_det(app);
    setup_eval_calib(app);
    setup_eval_sampling(app);
    setup_inspect(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    } catch (const probmotion::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    return 0;
}
