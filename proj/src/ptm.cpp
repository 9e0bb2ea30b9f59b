#include "probmotion/ptm.hpp"

#include "probmotion/error.hpp"
#include "probmotion/gaussmath.hpp"
#include "probmotion/kernels.hpp"
#include "probmotion/tensor_ops.hpp"

namespace probmotion {

Ptm::Ptm(const SkeletonTopology& topo, const PtmConfig& cfg)
    : joints_(topo.joints()), channels_(topo.channels), cfg_(cfg) {
    require_valid_topology(topo);
    if (cfg.coupling != "gcn" && cfg.coupling != "dense")
        raise(Errc::config, "unknown coupling kind '" + cfg.coupling + "'");

    const std::size_t d = dim();
    if (cfg.coupling == "gcn") {
        const auto schedule = default_partition_schedule(topo, cfg.coupling_layers);
        for (std::size_t l = 0; l < cfg.coupling_layers; ++l) {
            CouplingLayer layer;
            const PartPartition& p = schedule[l];
            // Alternate which half is shifted so every joint gets updated.
            layer.passive = (l % 2 == 0) ? p.first : p.second;
            layer.active = (l % 2 == 0) ? p.second : p.first;
            layer.adjacency =
                build_cross_adjacency(topo, PartPartition{layer.passive, layer.active});
            layer.weight = Tensor(channels_, channels_);  // zero: stack starts as identity
            layers_.push_back(std::move(layer));
        }
    } else {
        // Dense channel-split coupling on flat latent dims: halves, then
        // parity, alternating every two layers like the part-aware schedule.
        for (std::size_t l = 0; l < cfg.coupling_layers; ++l) {
            std::vector<std::size_t> lo, hi;
            if ((l / 2) % 2 == 0) {
                for (std::size_t i = 0; i < d; ++i) (i < d / 2 ? lo : hi).push_back(i);
            } else {
                for (std::size_t i = 0; i < d; ++i) (i % 2 == 0 ? lo : hi).push_back(i);
            }
            CouplingLayer layer;
            layer.passive = (l % 2 == 0) ? lo : hi;
            layer.active = (l % 2 == 0) ? hi : lo;
            layer.weight = Tensor(layer.passive.size(), layer.active.size());
            layers_.push_back(std::move(layer));
        }
    }
    if (cfg.scaling_layer) log_scales_ = Tensor(1, d);
}

namespace {

// The adjacency rows for an active set are built against the passive set; the
// shift for active rows is adjacency * passive_features * weight.
Tensor gcn_shift(const CouplingLayer& layer, const Tensor& h_joints, bool squash) {
    Tensor hp = tops::gather_rows(h_joints, layer.passive);
    Tensor shift = tops::matmul(tops::matmul(layer.adjacency, hp), layer.weight);
    if (squash) shift = tops::tanh(shift);
    return shift;
}

Tensor dense_shift(const CouplingLayer& layer, const Tensor& row, bool squash) {
    Tensor xp = tops::gather_cols(row, layer.passive);
    Tensor shift = tops::matmul(xp, layer.weight);
    if (squash) shift = tops::tanh(shift);
    return shift;
}

}  // namespace

Tensor Ptm::map_row(const Tensor& row, bool forward_dir) const {
    const std::size_t d = dim();
    Tensor cur = row;

    auto apply_coupling = [&](const CouplingLayer& layer, bool add) {
        if (cfg_.coupling == "gcn") {
            Tensor h = cur.reshaped(joints_, channels_);
            Tensor shift = gcn_shift(layer, h, cfg_.shift_tanh);
            if (!add) shift = tops::neg(shift);
            h = tops::row_update_add(h, layer.active, shift);
            cur = h.reshaped(1, d);
        } else {
            Tensor shift = dense_shift(layer, cur, cfg_.shift_tanh);
            if (!add) shift = tops::neg(shift);
            Tensor xa = tops::add(tops::gather_cols(cur, layer.active), shift);
            cur = tops::assemble_cols(d, {layer.passive, layer.active},
                                      {tops::gather_cols(cur, layer.passive), xa});
        }
    };

    if (forward_dir) {
        for (const auto& layer : layers_) apply_coupling(layer, true);
        if (cfg_.scaling_layer) cur = tops::mul(cur, tops::exp(log_scales_));
    } else {
        if (cfg_.scaling_layer) cur = tops::div(cur, tops::exp(log_scales_));
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
            apply_coupling(*it, false);
    }
    return cur;
}

Tensor Ptm::forward(const Tensor& x) const {
    if (x.cols() != dim())
        raise(Errc::shape, "pose width " + std::to_string(x.cols()) + " does not match " +
                               std::to_string(dim()));
    Tensor out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        Tensor row = tops::gather_rows(x, {r});
        row = map_row(row, true);
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = row[c];
    }
    if (!all_finite(out)) raise(Errc::numeric, "non-finite latent from pose map");
    return out;
}

Tensor Ptm::inverse(const Tensor& z) const {
    if (z.cols() != dim())
        raise(Errc::shape, "latent width " + std::to_string(z.cols()) + " does not match " +
                               std::to_string(dim()));
    Tensor out(z.rows(), z.cols());
    for (std::size_t r = 0; r < z.rows(); ++r) {
        Tensor row = tops::gather_rows(z, {r});
        row = map_row(row, false);
        for (std::size_t c = 0; c < z.cols(); ++c) out.at(r, c) = row[c];
    }
    if (!all_finite(out)) raise(Errc::numeric, "non-finite pose from latent map");
    return out;
}

double Ptm::log_det_forward() const {
    if (!cfg_.scaling_layer) return 0.0;
    return kernels::ops().sum(log_scales_.data(), log_scales_.size());
}

std::vector<Tensor*> Ptm::param_ptrs() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) out.push_back(&layer.weight);
    if (cfg_.scaling_layer) out.push_back(&log_scales_);
    return out;
}

std::vector<const Tensor*> Ptm::param_ptrs() const {
    std::vector<const Tensor*> out;
    for (const auto& layer : layers_) out.push_back(&layer.weight);
    if (cfg_.scaling_layer) out.push_back(&log_scales_);
    return out;
}

std::vector<std::string> Ptm::param_names() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < layers_.size(); ++l)
        out.push_back("ptm.coupling" + std::to_string(l) + ".weight");
    if (cfg_.scaling_layer) out.push_back("ptm.scaling.log_scales");
    return out;
}

ad::NodeId Ptm::forward_graph(ad::Graph& g, ad::NodeId x_row,
                              const std::vector<ad::NodeId>& params) const {
    const std::size_t expected = layers_.size() + (cfg_.scaling_layer ? 1 : 0);
    if (params.size() != expected)
        raise(Errc::config, "pose-map graph expects " + std::to_string(expected) +
                                " params, got " + std::to_string(params.size()));

    const std::size_t d = dim();
    ad::NodeId cur = x_row;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const CouplingLayer& layer = layers_[l];
        if (cfg_.coupling == "gcn") {
            ad::NodeId h = g.reshape(cur, joints_, channels_);
            ad::NodeId hp = g.gather_rows(h, layer.passive);
            ad::NodeId shift = g.matmul(g.matmul(g.constant(layer.adjacency), hp), params[l]);
            if (cfg_.shift_tanh) shift = g.tanh(shift);
            h = g.row_update_add(h, layer.active, shift);
            cur = g.reshape(h, 1, d);
        } else {
            ad::NodeId xp = g.gather_cols(cur, layer.passive);
            ad::NodeId shift = g.matmul(xp, params[l]);
            if (cfg_.shift_tanh) shift = g.tanh(shift);
            ad::NodeId xa = g.add(g.gather_cols(cur, layer.active), shift);
            cur = g.assemble_cols(d, {layer.passive, layer.active}, {xp, xa});
        }
    }
    if (cfg_.scaling_layer) cur = g.mul(cur, g.exp(params[layers_.size()]));
    return cur;
}

ad::NodeId Ptm::inverse_graph(ad::Graph& g, ad::NodeId z_row,
                              const std::vector<ad::NodeId>& params) const {
    const std::size_t expected = layers_.size() + (cfg_.scaling_layer ? 1 : 0);
    if (params.size() != expected)
        raise(Errc::config, "pose-map graph expects " + std::to_string(expected) +
                                " params, got " + std::to_string(params.size()));

    const std::size_t d = dim();
    ad::NodeId cur = z_row;
    if (cfg_.scaling_layer) cur = g.div(cur, g.exp(params[layers_.size()]));
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const CouplingLayer& layer = layers_[l];
        if (cfg_.coupling == "gcn") {
            ad::NodeId h = g.reshape(cur, joints_, channels_);
            ad::NodeId hp = g.gather_rows(h, layer.passive);
            ad::NodeId shift = g.matmul(g.matmul(g.constant(layer.adjacency), hp), params[l]);
            if (cfg_.shift_tanh) shift = g.tanh(shift);
            h = g.row_update_add(h, layer.active, g.neg(shift));
            cur = g.reshape(h, 1, d);
        } else {
            ad::NodeId xp = g.gather_cols(cur, layer.passive);
            ad::NodeId shift = g.matmul(xp, params[l]);
            if (cfg_.shift_tanh) shift = g.tanh(shift);
            ad::NodeId xa = g.sub(g.gather_cols(cur, layer.active), shift);
            cur = g.assemble_cols(d, {layer.passive, layer.active}, {xp, xa});
        }
    }
    return cur;
}

ad::NodeId Ptm::log_det_graph(ad::Graph& g, const std::vector<ad::NodeId>& params) const {
    if (!cfg_.scaling_layer) return g.constant(Tensor(1, 1));
    return g.reduce_sum(params[layers_.size()]);
}

double latent_log_likelihood(const Tensor& z) {
    Tensor ssq = tops::reduce_sum(tops::mul(z, z));
    return -0.5 * ssq[0] - 0.5 * static_cast<double>(z.size()) * gauss::ln_2pi;
}

ad::NodeId latent_log_likelihood_graph(ad::Graph& g, ad::NodeId z) {
    const std::size_t n = g.value(z).size();
    return g.add_scalar(g.scale(g.reduce_sum(g.mul(z, z)), -0.5),
                        -0.5 * static_cast<double>(n) * gauss::ln_2pi);
}

}  // namespace probmotion
