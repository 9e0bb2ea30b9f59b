#include "probmotion/pfm.hpp"

#include <cmath>
#include <set>

#include "probmotion/error.hpp"
#include "probmotion/rng.hpp"
#include "probmotion/tensor_ops.hpp"

namespace probmotion {
namespace {

Tensor uniform_init(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = (2.0 * rng.uniform01() - 1.0) * bound;
    return t;
}

}  // namespace

Pfm::Pfm(const SkeletonTopology& topo, const PfmConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), dim_(topo.pose_dim()) {
    require_valid_topology(topo);
    if (cfg.hidden == 0) raise(Errc::config, "hidden size must be positive");

    if (cfg.part_aware) {
        std::set<std::string> label_set(topo.part_labels.begin(), topo.part_labels.end());
        for (const auto& label : label_set) {
            PfmPart part;
            part.label = label;
            for (std::size_t j = 0; j < topo.joints(); ++j)
                if (topo.part_labels[j] == label)
                    for (std::size_t c = 0; c < topo.channels; ++c)
                        part.dims.push_back(j * topo.channels + c);
            parts_.push_back(std::move(part));
        }
    } else {
        PfmPart part;
        part.label = "all";
        for (std::size_t i = 0; i < dim_; ++i) part.dims.push_back(i);
        parts_.push_back(std::move(part));
    }

    const std::size_t h = cfg.hidden;
    for (std::size_t p = 0; p < parts_.size(); ++p) {
        PfmPart& part = parts_[p];
        const std::size_t d = part.dims.size();
        Rng rng = Rng::derived(seed, p);
        part.w_r = uniform_init(rng, d, h, d);
        part.u_r = uniform_init(rng, h, h, h);
        part.b_r = Tensor(1, h);
        part.w_u = uniform_init(rng, d, h, d);
        part.u_u = uniform_init(rng, h, h, h);
        part.b_u = Tensor(1, h);
        part.w_c = uniform_init(rng, d, h, d);
        part.u_c = uniform_init(rng, h, h, h);
        part.b_c = Tensor(1, h);
        part.head_w = uniform_init(rng, h, 2 * d, h);
        part.head_b = Tensor(1, 2 * d);
    }
}

std::vector<Tensor> Pfm::init_state() const {
    std::vector<Tensor> hidden;
    hidden.reserve(parts_.size());
    for (std::size_t p = 0; p < parts_.size(); ++p) hidden.emplace_back(1, cfg_.hidden);
    return hidden;
}

std::vector<Tensor> Pfm::step(const Tensor& prev_latent,
                              const std::vector<Tensor>& hidden) const {
    if (prev_latent.rows() != 1 || prev_latent.cols() != dim_)
        raise(Errc::shape, "latent input must be 1x" + std::to_string(dim_) + ", got " +
                               prev_latent.shape_str());
    if (hidden.size() != parts_.size())
        raise(Errc::shape, "hidden state count does not match part count");
    if (!all_finite(prev_latent)) raise(Errc::numeric, "non-finite latent input");

    const Tensor ones = Tensor::full(1, cfg_.hidden, 1.0);
    std::vector<Tensor> next;
    next.reserve(parts_.size());
    for (std::size_t p = 0; p < parts_.size(); ++p) {
        const PfmPart& part = parts_[p];
        const Tensor& h = hidden[p];
        Tensor x = tops::gather_cols(prev_latent, part.dims);
        Tensor r = tops::sigmoid(
            tops::add(tops::add(tops::matmul(x, part.w_r), tops::matmul(h, part.u_r)), part.b_r));
        Tensor u = tops::sigmoid(
            tops::add(tops::add(tops::matmul(x, part.w_u), tops::matmul(h, part.u_u)), part.b_u));
        Tensor c = tops::tanh(tops::add(
            tops::add(tops::matmul(x, part.w_c), tops::matmul(tops::mul(r, h), part.u_c)),
            part.b_c));
        Tensor hn = tops::add(tops::mul(tops::sub(ones, u), h), tops::mul(u, c));
        if (!all_finite(hn)) raise(Errc::numeric, "non-finite hidden state");
        next.push_back(std::move(hn));
    }
    return next;
}

LatentGaussian Pfm::head_of_state(const std::vector<Tensor>& hidden) const {
    if (hidden.size() != parts_.size())
        raise(Errc::shape, "hidden state count does not match part count");

    std::vector<std::vector<std::size_t>> idx;
    std::vector<Tensor> means, stds;
    for (std::size_t p = 0; p < parts_.size(); ++p) {
        const PfmPart& part = parts_[p];
        const std::size_t d = part.dims.size();
        Tensor o = tops::add(tops::matmul(hidden[p], part.head_w), part.head_b);
        means.push_back(tops::slice_cols(o, 0, d));
        stds.push_back(tops::max_scalar(tops::exp(tops::slice_cols(o, d, 2 * d)),
                                        cfg_.sigma_floor));
        idx.push_back(part.dims);
    }
    LatentGaussian out;
    out.mean = tops::assemble_cols(dim_, idx, means);
    out.stddev = tops::assemble_cols(dim_, idx, stds);
    if (!all_finite(out.mean) || !all_finite(out.stddev))
        raise(Errc::numeric, "non-finite forecast distribution");
    return out;
}

std::pair<LatentGaussian, std::vector<Tensor>> Pfm::predict_step(
    const Tensor& prev_latent, const std::vector<Tensor>& hidden) const {
    std::vector<Tensor> next = step(prev_latent, hidden);
    return {head_of_state(next), std::move(next)};
}

std::vector<Tensor> Pfm::encode_history(const Tensor& latents) const {
    if (latents.rows() == 0) raise(Errc::data, "cannot encode an empty history");
    std::vector<Tensor> hidden = init_state();
    for (std::size_t t = 0; t < latents.rows(); ++t)
        hidden = step(tops::gather_rows(latents, {t}), hidden);
    return hidden;
}

std::vector<Tensor*> Pfm::param_ptrs() {
    std::vector<Tensor*> out;
    for (auto& p : parts_)
        for (Tensor* t : {&p.w_r, &p.u_r, &p.b_r, &p.w_u, &p.u_u, &p.b_u, &p.w_c, &p.u_c,
                          &p.b_c, &p.head_w, &p.head_b})
            out.push_back(t);
    return out;
}

std::vector<const Tensor*> Pfm::param_ptrs() const {
    std::vector<const Tensor*> out;
    for (const auto& p : parts_)
        for (const Tensor* t : {&p.w_r, &p.u_r, &p.b_r, &p.w_u, &p.u_u, &p.b_u, &p.w_c, &p.u_c,
                                &p.b_c, &p.head_w, &p.head_b})
            out.push_back(t);
    return out;
}

std::vector<std::string> Pfm::param_names() const {
    static const char* const kNames[] = {"w_r", "u_r", "b_r", "w_u", "u_u", "b_u",
                                         "w_c", "u_c", "b_c", "head_w", "head_b"};
    std::vector<std::string> out;
    for (const auto& p : parts_)
        for (const char* n : kNames) out.push_back("pfm." + p.label + "." + n);
    return out;
}

std::vector<ad::NodeId> Pfm::init_state_graph(ad::Graph& g) const {
    std::vector<ad::NodeId> hidden;
    for (std::size_t p = 0; p < parts_.size(); ++p)
        hidden.push_back(g.constant(Tensor(1, cfg_.hidden)));
    return hidden;
}

std::vector<ad::NodeId> Pfm::step_graph(ad::Graph& g, ad::NodeId prev_latent,
                                        const std::vector<ad::NodeId>& hidden,
                                        const std::vector<ad::NodeId>& params) const {
    if (params.size() != parts_.size() * tensors_per_part)
        raise(Errc::config, "forecaster graph got " + std::to_string(params.size()) +
                                " params for " + std::to_string(parts_.size()) + " parts");
    std::vector<ad::NodeId> next;
    for (std::size_t p = 0; p < parts_.size(); ++p) {
        const PfmPart& part = parts_[p];
        const std::size_t base = p * tensors_per_part;
        const ad::NodeId w_r = params[base + 0], u_r = params[base + 1], b_r = params[base + 2];
        const ad::NodeId w_u = params[base + 3], u_u = params[base + 4], b_u = params[base + 5];
        const ad::NodeId w_c = params[base + 6], u_c = params[base + 7], b_c = params[base + 8];
        const ad::NodeId h = hidden[p];
        ad::NodeId ones = g.constant(Tensor::full(1, cfg_.hidden, 1.0));
        ad::NodeId x = g.gather_cols(prev_latent, part.dims);
        ad::NodeId r = g.sigmoid(g.add(g.add(g.matmul(x, w_r), g.matmul(h, u_r)), b_r));
        ad::NodeId u = g.sigmoid(g.add(g.add(g.matmul(x, w_u), g.matmul(h, u_u)), b_u));
        ad::NodeId c = g.tanh(
            g.add(g.add(g.matmul(x, w_c), g.matmul(g.mul(r, h), u_c)), b_c));
        next.push_back(g.add(g.mul(g.sub(ones, u), h), g.mul(u, c)));
    }
    return next;
}

Pfm::GraphDist Pfm::head_graph(ad::Graph& g, const std::vector<ad::NodeId>& hidden,
                               const std::vector<ad::NodeId>& params) const {
    std::vector<std::vector<std::size_t>> idx;
    std::vector<ad::NodeId> means, stds;
    for (std::size_t p = 0; p < parts_.size(); ++p) {
        const PfmPart& part = parts_[p];
        const std::size_t d = part.dims.size();
        const std::size_t base = p * tensors_per_part;
        ad::NodeId o = g.add(g.matmul(hidden[p], params[base + 9]), params[base + 10]);
        means.push_back(g.slice_cols(o, 0, d));
        stds.push_back(g.max_scalar(g.exp(g.slice_cols(o, d, 2 * d)), cfg_.sigma_floor));
        idx.push_back(part.dims);
    }
    GraphDist out;
    out.mean = g.assemble_cols(dim_, idx, means);
    out.stddev = g.assemble_cols(dim_, idx, stds);
    return out;
}

}  // namespace probmotion
