#include "probmotion/model.hpp"

#include <json.hpp>

#include "probmotion/error.hpp"

namespace probmotion {

using nlohmann::json;

void validate_model_config(const ModelConfig& cfg) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) raise(Errc::config, msg);
    };
    check(cfg.t_obs >= 1, "t_obs must be >= 1");
    check(cfg.k_pred >= 1, "k_pred must be >= 1");
    check(cfg.layers >= 1, "layers must be >= 1");
    check(cfg.hidden >= 1, "hidden must be >= 1");
    check(cfg.lr >= 0.0, "lr must be nonnegative");
    check(cfg.batch >= 1, "batch must be >= 1");
    check(cfg.alpha >= 0.0 && cfg.beta_loss >= 0.0 && cfg.gamma >= 0.0,
          "loss weights must be nonnegative");
    check(cfg.clip_norm > 0.0, "clip_norm must be positive");
    check(cfg.sigma_floor > 0.0, "sigma_floor must be positive");
    check(cfg.coupling == "gcn" || cfg.coupling == "dense",
          "coupling must be 'gcn' or 'dense'");
}

ModelConfig model_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) raise(Errc::config, "config must be a JSON object");

    ModelConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "t_obs") cfg.t_obs = value.get<std::size_t>();
            else if (key == "k_pred") cfg.k_pred = value.get<std::size_t>();
            else if (key == "layers") cfg.layers = value.get<std::size_t>();
            else if (key == "hidden") cfg.hidden = value.get<std::size_t>();
            else if (key == "lr") cfg.lr = value.get<double>();
            else if (key == "epochs") cfg.epochs = value.get<std::size_t>();
            else if (key == "batch") cfg.batch = value.get<std::size_t>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "beta_loss") cfg.beta_loss = value.get<double>();
            else if (key == "gamma") cfg.gamma = value.get<double>();
            else if (key == "clip_norm") cfg.clip_norm = value.get<double>();
            else if (key == "sigma_floor") cfg.sigma_floor = value.get<double>();
            else if (key == "scaling_layer") cfg.scaling_layer = value.get<bool>();
            else if (key == "part_aware_prediction")
                cfg.part_aware_prediction = value.get<bool>();
            else if (key == "coupling") cfg.coupling = value.get<std::string>();
            else if (key == "shift_tanh") cfg.shift_tanh = value.get<bool>();
            else if (key == "stride") cfg.stride = value.get<std::size_t>();
            else raise(Errc::config, "unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        raise(Errc::config, std::string("bad config value: ") + e.what());
    }
    validate_model_config(cfg);
    return cfg;
}

std::string model_config_to_json(const ModelConfig& cfg) {
    json j{{"t_obs", cfg.t_obs},
           {"k_pred", cfg.k_pred},
           {"layers", cfg.layers},
           {"hidden", cfg.hidden},
           {"lr", cfg.lr},
           {"epochs", cfg.epochs},
           {"batch", cfg.batch},
           {"seed", cfg.seed},
           {"alpha", cfg.alpha},
           {"beta_loss", cfg.beta_loss},
           {"gamma", cfg.gamma},
           {"clip_norm", cfg.clip_norm},
           {"sigma_floor", cfg.sigma_floor},
           {"scaling_layer", cfg.scaling_layer},
           {"part_aware_prediction", cfg.part_aware_prediction},
           {"coupling", cfg.coupling},
           {"shift_tanh", cfg.shift_tanh},
           {"stride", cfg.stride}};
    return j.dump(2);
}

Model Model::create(const SkeletonTopology& topo, const ModelConfig& cfg) {
    require_valid_topology(topo);
    validate_model_config(cfg);

    Model m;
    m.topology = topo;
    m.fingerprint = topology_fingerprint(topo);
    m.cfg = cfg;

    PtmConfig ptm_cfg;
    ptm_cfg.coupling_layers = cfg.layers;
    ptm_cfg.scaling_layer = cfg.scaling_layer;
    ptm_cfg.shift_tanh = cfg.shift_tanh;
    ptm_cfg.coupling = cfg.coupling;
    m.ptm = Ptm(topo, ptm_cfg);

    PfmConfig pfm_cfg;
    pfm_cfg.hidden = cfg.hidden;
    pfm_cfg.part_aware = cfg.part_aware_prediction;
    pfm_cfg.sigma_floor = cfg.sigma_floor;
    m.pfm = Pfm(topo, pfm_cfg, cfg.seed);

    // Identity normalization until training computes real stats.
    const std::size_t d = topo.pose_dim();
    m.norm.mean.assign(d, 0.0);
    m.norm.stddev.assign(d, 1.0);
    std::uint64_t h = fnv1a64(m.norm.mean.data(), d * sizeof(double));
    m.norm.fingerprint = fnv1a64(m.norm.stddev.data(), d * sizeof(double), h);
    return m;
}

std::vector<Tensor*> Model::param_ptrs() {
    std::vector<Tensor*> out = ptm.param_ptrs();
    for (Tensor* t : pfm.param_ptrs()) out.push_back(t);
    return out;
}

std::vector<const Tensor*> Model::param_ptrs() const {
    std::vector<const Tensor*> out = ptm.param_ptrs();
    for (const Tensor* t : pfm.param_ptrs()) out.push_back(t);
    return out;
}

std::vector<std::string> Model::param_names() const {
    std::vector<std::string> out = ptm.param_names();
    for (auto& n : pfm.param_names()) out.push_back(n);
    return out;
}

}  // namespace probmotion
