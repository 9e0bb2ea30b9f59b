#include "probmotion/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <utility>

#include <json.hpp>

#include "probmotion/error.hpp"
#include "probmotion/fileio.hpp"
#include "probmotion/rng.hpp"
#include "probmotion/skeleton.hpp"

namespace probmotion {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Losses (eager)

double loss_h(const std::vector<LatentGaussian>& pred, const Tensor& target_latents) {
    if (pred.empty()) raise(Errc::shape, "likelihood loss needs at least one frame");
    if (pred.size() != target_latents.rows())
        raise(Errc::shape, "predicted " + std::to_string(pred.size()) + " frames, got " +
                               std::to_string(target_latents.rows()) + " targets");
    double sum = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        const LatentGaussian& d = pred[t];
        if (d.mean.cols() != target_latents.cols() || d.mean.rows() != 1)
            raise(Errc::shape, "distribution width does not match target latents");
        for (std::size_t i = 0; i < d.mean.cols(); ++i) {
            const double s = d.stddev[i];
            const double diff = target_latents.at(t, i) - d.mean[i];
            sum += std::log(s) + diff * diff / (2.0 * s * s);
        }
    }
    return sum / static_cast<double>(pred.size());
}

double loss_r(const Tensor& pred_poses, const Tensor& target_poses) {
    if (!pred_poses.same_shape(target_poses))
        raise(Errc::shape, "reconstruction loss needs equal shapes");
    if (pred_poses.size() == 0) raise(Errc::shape, "reconstruction loss needs entries");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred_poses.size(); ++i)
        sum += std::abs(pred_poses[i] - target_poses[i]);
    return sum / static_cast<double>(pred_poses.size());
}

double loss_n(const Ptm& ptm, const Tensor& poses) {
    if (poses.rows() == 0) raise(Errc::shape, "prior loss needs at least one frame");
    const Tensor z = ptm.forward(poses);
    return -latent_log_likelihood(z) / static_cast<double>(poses.rows()) -
           ptm.log_det_forward();
}

double total_loss(double h, double r, double n, const LossWeights& w) {
    if (w.alpha < 0.0 || w.beta_loss < 0.0 || w.gamma < 0.0)
        raise(Errc::config, "loss weights must be nonnegative");
    return w.alpha * h + w.beta_loss * r + w.gamma * n;
}

// ---------------------------------------------------------------------------
// Batch construction

std::vector<Window> extract_windows(const std::vector<const MotionSequence*>& seqs,
                                    std::size_t t_obs, std::size_t k_pred,
                                    std::size_t stride) {
    if (t_obs == 0 || k_pred == 0) raise(Errc::config, "window needs t_obs and k_pred >= 1");
    if (stride == 0) raise(Errc::config, "window stride must be >= 1");
    const std::size_t len = t_obs + k_pred;
    std::vector<Window> out;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        const std::size_t frames = seqs[s]->frames.rows();
        if (frames < len) continue;
        for (std::size_t start = 0; start + len <= frames; start += stride)
            out.push_back(Window{s, start});
    }
    return out;
}

DatasetSplit split_train_test(const MotionDataset& data) {
    DatasetSplit split;
    for (std::size_t i = 0; i < data.sequences.size(); ++i) {
        (i % 5 == 0 ? split.test : split.train).push_back(&data.sequences[i]);
    }
    return split;
}

// ---------------------------------------------------------------------------
// Taped window loss

namespace {

Tensor row_of(const Tensor& m, std::size_t r) {
    Tensor out(1, m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] = m.at(r, c);
    return out;
}

}  // namespace

WindowLossNodes build_window_loss(ad::Graph& g, const Model& model,
                                  const std::vector<ad::NodeId>& params,
                                  const Tensor& obs_norm, const Tensor& tgt_norm,
                                  const LossWeights& w) {
    const std::size_t d = model.topology.pose_dim();
    if (obs_norm.rows() == 0 || tgt_norm.rows() == 0)
        raise(Errc::shape, "window loss needs observed and target frames");
    if (obs_norm.cols() != d || tgt_norm.cols() != d)
        raise(Errc::shape, "window frame width does not match the topology");
    if (params.size() != model.param_names().size())
        raise(Errc::config, "window loss param leaves do not match the model");

    const std::size_t n_ptm = model.ptm.param_names().size();
    const std::vector<ad::NodeId> pp(params.begin(),
                                     params.begin() + static_cast<std::ptrdiff_t>(n_ptm));
    const std::vector<ad::NodeId> fp(params.begin() + static_cast<std::ptrdiff_t>(n_ptm),
                                     params.end());

    // Absorb the observed frames.
    std::vector<ad::NodeId> hidden = model.pfm.init_state_graph(g);
    for (std::size_t t = 0; t < obs_norm.rows(); ++t) {
        ad::NodeId z = model.ptm.forward_graph(g, g.constant(row_of(obs_norm, t)), pp);
        hidden = model.pfm.step_graph(g, z, hidden, fp);
    }

    // Roll the horizon on the model's own means, scoring each step.
    const std::size_t k = tgt_norm.rows();
    ad::NodeId h_sum = 0, r_sum = 0, ll_sum = 0;
    for (std::size_t t = 0; t < k; ++t) {
        const Pfm::GraphDist dist = model.pfm.head_graph(g, hidden, fp);
        ad::NodeId x_t = g.constant(row_of(tgt_norm, t));
        ad::NodeId z_t = model.ptm.forward_graph(g, x_t, pp);

        ad::NodeId diff = g.sub(z_t, dist.mean);
        ad::NodeId var2 = g.scale(g.mul(dist.stddev, dist.stddev), 2.0);
        ad::NodeId frame_h =
            g.reduce_sum(g.add(g.log(dist.stddev), g.div(g.mul(diff, diff), var2)));

        ad::NodeId x_hat = model.ptm.inverse_graph(g, dist.mean, pp);
        ad::NodeId frame_r = g.reduce_sum(g.abs(g.sub(x_hat, x_t)));

        ad::NodeId frame_ll = latent_log_likelihood_graph(g, z_t);

        h_sum = (t == 0) ? frame_h : g.add(h_sum, frame_h);
        r_sum = (t == 0) ? frame_r : g.add(r_sum, frame_r);
        ll_sum = (t == 0) ? frame_ll : g.add(ll_sum, frame_ll);

        if (t + 1 < k) hidden = model.pfm.step_graph(g, dist.mean, hidden, fp);
    }

    const double kd = static_cast<double>(k);
    WindowLossNodes out;
    out.h = g.scale(h_sum, 1.0 / kd);
    out.r = g.scale(r_sum, 1.0 / (kd * static_cast<double>(d)));
    out.n = g.sub(g.scale(ll_sum, -1.0 / kd), model.ptm.log_det_graph(g, pp));
    out.total = g.add(g.add(g.scale(out.h, w.alpha), g.scale(out.r, w.beta_loss)),
                      g.scale(out.n, w.gamma));
    return out;
}

// ---------------------------------------------------------------------------
// Optimizer

double global_grad_norm(const std::vector<Tensor>& grads) {
    double ssq = 0.0;
    for (const Tensor& gt : grads)
        for (std::size_t i = 0; i < gt.size(); ++i) ssq += gt[i] * gt[i];
    return std::sqrt(ssq);
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor*> params, double lr, double clip_norm)
    : params_(std::move(params)), lr_(lr), clip_(clip_norm) {
    if (lr_ < 0.0) raise(Errc::config, "lr must be nonnegative");
    if (clip_ <= 0.0) raise(Errc::config, "clip_norm must be positive");
    for (const Tensor* p : params_) {
        m_.emplace_back(p->rows(), p->cols());
        v_.emplace_back(p->rows(), p->cols());
    }
}

void AdamOptimizer::step(std::vector<Tensor> grads) {
    if (grads.size() != params_.size())
        raise(Errc::shape, "optimizer got " + std::to_string(grads.size()) +
                               " gradients for " + std::to_string(params_.size()) +
                               " parameters");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!grads[i].same_shape(*params_[i]))
            raise(Errc::shape, "gradient shape mismatch at parameter " + std::to_string(i));

    const double norm = global_grad_norm(grads);
    if (!std::isfinite(norm)) raise(Errc::numeric, "non-finite gradient norm");
    if (norm > clip_) {
        const double f = clip_ / norm;
        for (Tensor& gt : grads)
            for (std::size_t i = 0; i < gt.size(); ++i) gt[i] *= f;
    }

    ++steps_;
    b1t_ *= beta1;
    b2t_ *= beta2;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = *params_[i];
        const Tensor& gt = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m_[i][j] = beta1 * m_[i][j] + (1.0 - beta1) * gt[j];
            v_[i][j] = beta2 * v_[i][j] + (1.0 - beta2) * gt[j] * gt[j];
            const double m_hat = m_[i][j] / (1.0 - b1t_);
            const double v_hat = v_[i][j] / (1.0 - b2t_);
            p[j] -= lr_ * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

// ---------------------------------------------------------------------------
// Training loop

TrainResult train(Model model, const MotionDataset& data) {
    validate_model_config(model.cfg);
    if (data.sequences.empty()) raise(Errc::data, "training dataset has no sequences");
    if (topology_fingerprint(data.topology) != model.fingerprint)
        raise(Errc::data, "dataset topology does not match the model");

    const DatasetSplit split = split_train_test(data);
    if (split.train.empty())
        raise(Errc::data, "training split is empty (need at least two sequences)");
    model.norm = compute_norm_stats(split.train);

    const ModelConfig& cfg = model.cfg;
    const std::size_t stride = cfg.stride == 0 ? cfg.k_pred : cfg.stride;
    std::vector<Window> windows = extract_windows(split.train, cfg.t_obs, cfg.k_pred, stride);
    if (windows.empty())
        raise(Errc::data, "no training windows: every sequence is shorter than " +
                              std::to_string(cfg.t_obs + cfg.k_pred) + " frames");

    // Normalize each training sequence once up front.
    std::vector<Tensor> norm_frames;
    norm_frames.reserve(split.train.size());
    for (const MotionSequence* seq : split.train)
        norm_frames.push_back(normalize_frames(seq->frames, model.norm));

    const LossWeights weights{cfg.alpha, cfg.beta_loss, cfg.gamma};
    std::vector<Tensor*> params = model.param_ptrs();
    AdamOptimizer opt(params, cfg.lr, cfg.clip_norm);

    TrainResult out;
    bool aborted = false;
    for (std::size_t epoch = 0; epoch < cfg.epochs && !aborted; ++epoch) {
        Rng shuffler = Rng::derived(cfg.seed, 0xe90c0000ULL + epoch);
        shuffler.shuffle(windows);

        double acc_total = 0.0, acc_h = 0.0, acc_r = 0.0, acc_n = 0.0;
        std::size_t seen = 0;
        for (std::size_t first = 0; first < windows.size(); first += cfg.batch) {
            const std::size_t last = std::min(first + cfg.batch, windows.size());
            const std::size_t bsz = last - first;

            std::vector<Tensor> snapshot;
            snapshot.reserve(params.size());
            for (const Tensor* p : params) snapshot.push_back(*p);

            try {
                ad::Graph g;
                std::vector<ad::NodeId> leaves;
                leaves.reserve(params.size());
                for (const Tensor* p : params) leaves.push_back(g.leaf(*p));

                ad::NodeId b_total = 0, b_h = 0, b_r = 0, b_n = 0;
                for (std::size_t wi = first; wi < last; ++wi) {
                    const Window& win = windows[wi];
                    const Tensor& frames = norm_frames[win.sequence];
                    Tensor obs(cfg.t_obs, frames.cols());
                    Tensor tgt(cfg.k_pred, frames.cols());
                    for (std::size_t t = 0; t < cfg.t_obs; ++t)
                        for (std::size_t c = 0; c < frames.cols(); ++c)
                            obs.at(t, c) = frames.at(win.start + t, c);
                    for (std::size_t t = 0; t < cfg.k_pred; ++t)
                        for (std::size_t c = 0; c < frames.cols(); ++c)
                            tgt.at(t, c) = frames.at(win.start + cfg.t_obs + t, c);

                    const WindowLossNodes wl =
                        build_window_loss(g, model, leaves, obs, tgt, weights);
                    b_total = (wi == first) ? wl.total : g.add(b_total, wl.total);
                    b_h = (wi == first) ? wl.h : g.add(b_h, wl.h);
                    b_r = (wi == first) ? wl.r : g.add(b_r, wl.r);
                    b_n = (wi == first) ? wl.n : g.add(b_n, wl.n);
                }
                ad::NodeId b_mean = g.scale(b_total, 1.0 / static_cast<double>(bsz));

                std::vector<Tensor> grads = g.gradients(b_mean, leaves);
                for (const Tensor& gt : grads)
                    if (!all_finite(gt)) raise(Errc::numeric, "non-finite gradient");
                opt.step(std::move(grads));

                acc_total += g.value(b_total)[0];
                acc_h += g.value(b_h)[0];
                acc_r += g.value(b_r)[0];
                acc_n += g.value(b_n)[0];
                seen += bsz;
            } catch (const Error& e) {
                if (e.code() != Errc::numeric) throw;
                for (std::size_t i = 0; i < params.size(); ++i) *params[i] = snapshot[i];
                out.warnings.push_back(
                    "training aborted at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(first / cfg.batch) + ": " + e.what() +
                    "; parameters rolled back to the last completed step");
                aborted = true;
                break;
            }
        }

        if (seen > 0) {
            const double n = static_cast<double>(seen);
            EpochLog log{epoch, acc_total / n, acc_h / n, acc_r / n, acc_n / n};
            if (!std::isfinite(log.total) || !std::isfinite(log.h) || !std::isfinite(log.r) ||
                !std::isfinite(log.n))
                raise(Errc::numeric, "non-finite epoch loss escaped the training guard");
            out.log.push_back(log);
        }
    }

    out.model = std::move(model);
    return out;
}

TrainResult train(const SkeletonTopology& topo, const MotionDataset& data,
                  const ModelConfig& cfg) {
    return train(Model::create(topo, cfg), data);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void put_u32(std::string& b, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) b.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f64(std::string& b, double d) { put_u64(b, std::bit_cast<std::uint64_t>(d)); }

[[noreturn]] void corrupt(const std::string& what) {
    raise(Errc::format, "corrupt checkpoint: " + what);
}

std::uint64_t get_u64_at(const std::string& b, std::size_t off) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[off + k])) << (8 * k);
    return v;
}

std::uint32_t get_u32(const std::string& b, std::size_t& off, std::size_t limit) {
    if (off + 4 > limit) corrupt("truncated");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + k])) << (8 * k);
    off += 4;
    return v;
}

std::uint64_t get_u64(const std::string& b, std::size_t& off, std::size_t limit) {
    if (off + 8 > limit) corrupt("truncated");
    const std::uint64_t v = get_u64_at(b, off);
    off += 8;
    return v;
}

// Reads the file, validates the trailing checksum, and returns (bytes,
// header-json, payload offset). Shared by load and inspection.
struct RawCheckpoint {
    std::string bytes;
    json header;
    std::size_t payload = 0;  // offset of the first tensor block
    std::size_t limit = 0;    // offset of the checksum
};

RawCheckpoint read_checkpoint_bytes(const std::string& path) {
    RawCheckpoint raw;
    raw.bytes = read_text_file(path);
    if (raw.bytes.size() < 12) corrupt("file too short");
    raw.limit = raw.bytes.size() - 8;
    const std::uint64_t stored = get_u64_at(raw.bytes, raw.limit);
    const std::uint64_t actual = fnv1a64(raw.bytes.data(), raw.limit);
    if (stored != actual) corrupt("checksum mismatch");

    std::size_t off = 0;
    const std::uint32_t hlen = get_u32(raw.bytes, off, raw.limit);
    if (off + hlen > raw.limit) corrupt("truncated header");
    raw.header = json::parse(raw.bytes.substr(off, hlen), nullptr, false);
    if (raw.header.is_discarded() || !raw.header.is_object()) corrupt("unreadable header");
    raw.payload = off + hlen;
    return raw;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    const std::vector<const Tensor*> params = model.param_ptrs();
    const std::vector<std::string> names = model.param_names();

    json manifest = json::array();
    for (std::size_t i = 0; i < params.size(); ++i)
        manifest.push_back({{"name", names[i]},
                            {"rows", params[i]->rows()},
                            {"cols", params[i]->cols()}});

    json header = {{"version", checkpoint_version},
                   {"topology_fingerprint", model.fingerprint},
                   {"config", json::parse(model_config_to_json(model.cfg))},
                   {"seed", model.cfg.seed},
                   {"norm",
                    {{"mean", model.norm.mean},
                     {"stddev", model.norm.stddev},
                     {"any_floored", model.norm.any_floored},
                     {"fingerprint", model.norm.fingerprint}}},
                   {"params", manifest}};
    const std::string header_text = header.dump();

    std::string bytes;
    put_u32(bytes, static_cast<std::uint32_t>(header_text.size()));
    bytes += header_text;
    for (const Tensor* p : params) {
        put_u64(bytes, p->size());
        for (std::size_t i = 0; i < p->size(); ++i) put_f64(bytes, (*p)[i]);
    }
    put_u64(bytes, fnv1a64(bytes.data(), bytes.size()));
    atomic_write_bytes(path, bytes);
}

Model load_checkpoint(const std::string& path, const SkeletonTopology& topo) {
    RawCheckpoint raw = read_checkpoint_bytes(path);

    std::uint64_t version = 0;
    std::uint64_t fingerprint = 0;
    ModelConfig cfg;
    NormStats norm;
    json manifest;
    try {
        version = raw.header.at("version").get<std::uint64_t>();
        if (version != checkpoint_version)
            raise(Errc::format, "checkpoint version " + std::to_string(version) +
                                    " is not supported (expected " +
                                    std::to_string(checkpoint_version) + ")");
        fingerprint = raw.header.at("topology_fingerprint").get<std::uint64_t>();
        if (fingerprint != topology_fingerprint(topo))
            raise(Errc::data, "checkpoint topology fingerprint mismatch: refusing to load");
        cfg = model_config_from_json(raw.header.at("config").dump());
        norm.mean = raw.header.at("norm").at("mean").get<std::vector<double>>();
        norm.stddev = raw.header.at("norm").at("stddev").get<std::vector<double>>();
        norm.any_floored = raw.header.at("norm").at("any_floored").get<bool>();
        norm.fingerprint = raw.header.at("norm").at("fingerprint").get<std::uint64_t>();
        manifest = raw.header.at("params");
    } catch (const json::exception& e) {
        corrupt(std::string("header field: ") + e.what());
    }

    Model model = Model::create(topo, cfg);
    const std::size_t d = topo.pose_dim();
    if (norm.mean.size() != d || norm.stddev.size() != d)
        corrupt("normalization width does not match the topology");
    for (double s : norm.stddev)
        if (!(s > 0.0)) corrupt("non-positive normalization std");
    model.norm = norm;

    std::vector<Tensor*> params = model.param_ptrs();
    const std::vector<std::string> names = model.param_names();
    if (!manifest.is_array() || manifest.size() != params.size())
        corrupt("parameter manifest does not match the config");

    std::size_t off = raw.payload;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const json& entry = manifest[i];
        try {
            if (entry.at("name").get<std::string>() != names[i] ||
                entry.at("rows").get<std::size_t>() != params[i]->rows() ||
                entry.at("cols").get<std::size_t>() != params[i]->cols())
                corrupt("parameter manifest entry " + std::to_string(i) +
                        " does not match the config");
        } catch (const json::exception& e) {
            corrupt(std::string("parameter manifest entry: ") + e.what());
        }
        const std::uint64_t count = get_u64(raw.bytes, off, raw.limit);
        if (count != params[i]->size()) corrupt("tensor length mismatch");
        if (off + 8 * count > raw.limit) corrupt("truncated tensor payload");
        for (std::size_t j = 0; j < count; ++j) {
            (*params[i])[j] = std::bit_cast<double>(get_u64_at(raw.bytes, off));
            off += 8;
        }
    }
    if (off != raw.limit) corrupt("trailing bytes after the last tensor");
    return model;
}

std::string checkpoint_header_json(const std::string& path) {
    return read_checkpoint_bytes(path).header.dump(2);
}

}  // namespace probmotion
