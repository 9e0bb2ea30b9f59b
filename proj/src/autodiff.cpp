#include "probmotion/autodiff.hpp"

#include <cmath>
#include <string>

#include "probmotion/error.hpp"
#include "probmotion/kernels.hpp"
#include "probmotion/tensor_ops.hpp"

namespace probmotion::ad {
namespace {

const char* op_name(int op);

void require_finite(const Tensor& t, int op) {
    if (!all_finite(t))
        raise(Errc::numeric, std::string("non-finite value produced by ") + op_name(op));
}

}  // namespace

const Graph::Node& Graph::at(NodeId id) const {
    if (id >= nodes_.size()) raise(Errc::shape, "node id out of range");
    return nodes_[id];
}

const Tensor& Graph::value(NodeId id) const { return at(id).value; }

bool Graph::is_leaf(NodeId id) const { return at(id).op == Op::leaf; }

NodeId Graph::push(Node node) {
    if (node.op != Op::leaf && node.op != Op::constant)
        require_finite(node.value, static_cast<int>(node.op));
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::leaf(Tensor value) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
    Node n;
    n.op = Op::constant;
    n.value = std::move(value);
    return push(std::move(n));
}

Tensor Graph::eval(const Node& n) const {
    switch (n.op) {
        case Op::leaf:
        case Op::constant: return n.value;
        case Op::add: return tops::add(value(n.a), value(n.b));
        case Op::sub: return tops::sub(value(n.a), value(n.b));
        case Op::mul: return tops::mul(value(n.a), value(n.b));
        case Op::div: return tops::div(value(n.a), value(n.b));
        case Op::neg: return tops::neg(value(n.a));
        case Op::scale: return tops::scale(value(n.a), n.c);
        case Op::add_scalar: return tops::add_scalar(value(n.a), n.c);
        case Op::max_scalar: return tops::max_scalar(value(n.a), n.c);
        case Op::matmul: return tops::matmul(value(n.a), value(n.b));
        case Op::tanh: return tops::tanh(value(n.a));
        case Op::sigmoid: return tops::sigmoid(value(n.a));
        case Op::exp: return tops::exp(value(n.a));
        case Op::log: return tops::log(value(n.a));
        case Op::abs: return tops::abs(value(n.a));
        case Op::concat_cols: return tops::concat_cols(value(n.a), value(n.b));
        case Op::slice_cols: return tops::slice_cols(value(n.a), n.p0, n.p1);
        case Op::gather_rows: return tops::gather_rows(value(n.a), n.idx);
        case Op::row_update_add: return tops::row_update_add(value(n.a), n.idx, value(n.b));
        case Op::gather_cols: return tops::gather_cols(value(n.a), n.idx);
        case Op::assemble_cols: {
            std::vector<Tensor> parts;
            parts.reserve(n.ins.size());
            for (NodeId id : n.ins) parts.push_back(value(id));
            return tops::assemble_cols(n.p0, n.col_sets, parts);
        }
        case Op::reshape: return value(n.a).reshaped(n.p0, n.p1);
        case Op::reduce_sum: return tops::reduce_sum(value(n.a));
        case Op::reduce_mean: return tops::reduce_mean(value(n.a));
    }
    raise(Errc::config, "unknown op");
}

#define PM_BINARY(NAME)                              \
    NodeId Graph::NAME(NodeId a, NodeId b) {         \
        Node n;                                      \
        n.op = Op::NAME;                             \
        n.a = a;                                     \
        n.b = b;                                     \
        (void)at(a);                                 \
        (void)at(b);                                 \
        n.value = eval(n);                           \
        return push(std::move(n));                   \
    }

#define PM_UNARY(NAME)                               \
    NodeId Graph::NAME(NodeId a) {                   \
        Node n;                                      \
        n.op = Op::NAME;                             \
        n.a = a;                                     \
        (void)at(a);                                 \
        n.value = eval(n);                           \
        return push(std::move(n));                   \
    }

PM_BINARY(add)
PM_BINARY(sub)
PM_BINARY(mul)
PM_BINARY(div)
PM_BINARY(matmul)
PM_BINARY(concat_cols)
PM_UNARY(neg)
PM_UNARY(tanh)
PM_UNARY(sigmoid)
PM_UNARY(exp)
PM_UNARY(log)
PM_UNARY(abs)
PM_UNARY(reduce_sum)
PM_UNARY(reduce_mean)

#undef PM_BINARY
#undef PM_UNARY

NodeId Graph::scale(NodeId a, double c) {
    Node n;
    n.op = Op::scale;
    n.a = a;
    n.c = c;
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::add_scalar(NodeId a, double c) {
    Node n;
    n.op = Op::add_scalar;
    n.a = a;
    n.c = c;
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::max_scalar(NodeId a, double c) {
    Node n;
    n.op = Op::max_scalar;
    n.a = a;
    n.c = c;
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::slice_cols(NodeId a, std::size_t begin, std::size_t end) {
    Node n;
    n.op = Op::slice_cols;
    n.a = a;
    n.p0 = begin;
    n.p1 = end;
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::gather_rows(NodeId a, std::vector<std::size_t> idx) {
    Node n;
    n.op = Op::gather_rows;
    n.a = a;
    n.idx = std::move(idx);
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::row_update_add(NodeId base, std::vector<std::size_t> idx, NodeId delta) {
    Node n;
    n.op = Op::row_update_add;
    n.a = base;
    n.b = delta;
    n.idx = std::move(idx);
    (void)at(base);
    (void)at(delta);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::gather_cols(NodeId a, std::vector<std::size_t> idx) {
    Node n;
    n.op = Op::gather_cols;
    n.a = a;
    n.idx = std::move(idx);
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::assemble_cols(std::size_t cols, std::vector<std::vector<std::size_t>> idx,
                            std::vector<NodeId> parts) {
    Node n;
    n.op = Op::assemble_cols;
    n.p0 = cols;
    n.col_sets = std::move(idx);
    n.ins = std::move(parts);
    for (NodeId id : n.ins) (void)at(id);
    n.value = eval(n);
    return push(std::move(n));
}

NodeId Graph::reshape(NodeId a, std::size_t rows, std::size_t cols) {
    Node n;
    n.op = Op::reshape;
    n.a = a;
    n.p0 = rows;
    n.p1 = cols;
    (void)at(a);
    n.value = eval(n);
    return push(std::move(n));
}

void Graph::set_leaf(NodeId id, const Tensor& value) {
    if (id >= nodes_.size() || nodes_[id].op != Op::leaf)
        raise(Errc::config, "set_leaf: node is not a leaf");
    if (!nodes_[id].value.same_shape(value))
        raise(Errc::shape, "set_leaf: shape " + value.shape_str() + " does not match " +
                               nodes_[id].value.shape_str());
    nodes_[id].value = value;
}

void Graph::recompute() {
    for (auto& n : nodes_) {
        if (n.op == Op::leaf || n.op == Op::constant) continue;
        n.value = eval(n);
        require_finite(n.value, static_cast<int>(n.op));
    }
}

namespace {

// Accumulate `delta` into the (possibly still unallocated) gradient slot.
void accum_grad(Tensor& slot, const Tensor& delta) {
    if (slot.empty() && delta.size() > 0) {
        slot = Tensor(delta.rows(), delta.cols());
    }
    if (!slot.same_shape(delta)) raise(Errc::shape, "gradient shape mismatch");
    kernels::ops().accum(delta.data(), slot.data(), slot.size());
}

Tensor sign_of(const Tensor& a) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] > 0.0 ? 1.0 : (a[i] < 0.0 ? -1.0 : 0.0);
    return out;
}

Tensor mask_above(const Tensor& a, double c) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > c ? 1.0 : 0.0;
    return out;
}

}  // namespace

std::vector<Tensor> Graph::gradients(NodeId output, const std::vector<NodeId>& wrt) const {
    const Node& out_node = at(output);
    if (out_node.value.rows() != 1 || out_node.value.cols() != 1)
        raise(Errc::shape, "gradients: output must be a 1x1 scalar, got " +
                               out_node.value.shape_str());

    std::vector<Tensor> grads(nodes_.size());
    grads[output] = Tensor::full(1, 1, 1.0);

    for (std::size_t i = output + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        const Tensor& g = grads[i];
        if (g.empty()) continue;
        switch (n.op) {
            case Op::leaf:
            case Op::constant: break;
            case Op::add:
                accum_grad(grads[n.a], g);
                accum_grad(grads[n.b], g);
                break;
            case Op::sub:
                accum_grad(grads[n.a], g);
                accum_grad(grads[n.b], tops::neg(g));
                break;
            case Op::mul:
                accum_grad(grads[n.a], tops::mul(g, value(n.b)));
                accum_grad(grads[n.b], tops::mul(g, value(n.a)));
                break;
            case Op::div: {
                accum_grad(grads[n.a], tops::div(g, value(n.b)));
                Tensor t = tops::div(tops::mul(g, n.value), value(n.b));
                accum_grad(grads[n.b], tops::neg(t));
                break;
            }
            case Op::neg:
                accum_grad(grads[n.a], tops::neg(g));
                break;
            case Op::scale:
                accum_grad(grads[n.a], tops::scale(g, n.c));
                break;
            case Op::add_scalar:
                accum_grad(grads[n.a], g);
                break;
            case Op::max_scalar:
                accum_grad(grads[n.a], tops::mul(g, mask_above(value(n.a), n.c)));
                break;
            case Op::matmul: {
                const Tensor& va = value(n.a);
                const Tensor& vb = value(n.b);
                Tensor ga(va.rows(), va.cols());
                kernels::ops().matmul_nt(g.data(), vb.data(), ga.data(), g.rows(), g.cols(),
                                         vb.rows());
                accum_grad(grads[n.a], ga);
                Tensor gb(vb.rows(), vb.cols());
                kernels::ops().matmul_tn(va.data(), g.data(), gb.data(), va.cols(), va.rows(),
                                         g.cols());
                accum_grad(grads[n.b], gb);
                break;
            }
            case Op::tanh: {
                Tensor d = tops::sub(Tensor::full(n.value.rows(), n.value.cols(), 1.0),
                                     tops::mul(n.value, n.value));
                accum_grad(grads[n.a], tops::mul(g, d));
                break;
            }
            case Op::sigmoid: {
                Tensor d = tops::mul(n.value,
                                     tops::sub(Tensor::full(n.value.rows(), n.value.cols(), 1.0),
                                               n.value));
                accum_grad(grads[n.a], tops::mul(g, d));
                break;
            }
            case Op::exp:
                accum_grad(grads[n.a], tops::mul(g, n.value));
                break;
            case Op::log:
                accum_grad(grads[n.a], tops::div(g, value(n.a)));
                break;
            case Op::abs:
                accum_grad(grads[n.a], tops::mul(g, sign_of(value(n.a))));
                break;
            case Op::concat_cols: {
                const std::size_t ca = value(n.a).cols();
                accum_grad(grads[n.a], tops::slice_cols(g, 0, ca));
                accum_grad(grads[n.b], tops::slice_cols(g, ca, g.cols()));
                break;
            }
            case Op::slice_cols: {
                const Tensor& va = value(n.a);
                Tensor ga(va.rows(), va.cols());
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c)
                        ga.at(r, n.p0 + c) = g.at(r, c);
                accum_grad(grads[n.a], ga);
                break;
            }
            case Op::gather_rows: {
                const Tensor& va = value(n.a);
                Tensor ga(va.rows(), va.cols());
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c)
                        ga.at(n.idx[r], c) = ga.at(n.idx[r], c) + g.at(r, c);
                accum_grad(grads[n.a], ga);
                break;
            }
            case Op::row_update_add:
                accum_grad(grads[n.a], g);
                accum_grad(grads[n.b], tops::gather_rows(g, n.idx));
                break;
            case Op::gather_cols: {
                const Tensor& va = value(n.a);
                Tensor ga(va.rows(), va.cols());
                for (std::size_t c = 0; c < n.idx.size(); ++c)
                    for (std::size_t r = 0; r < g.rows(); ++r)
                        ga.at(r, n.idx[c]) = ga.at(r, n.idx[c]) + g.at(r, c);
                accum_grad(grads[n.a], ga);
                break;
            }
            case Op::assemble_cols:
                for (std::size_t p = 0; p < n.ins.size(); ++p)
                    accum_grad(grads[n.ins[p]], tops::gather_cols(g, n.col_sets[p]));
                break;
            case Op::reshape: {
                const Tensor& va = value(n.a);
                accum_grad(grads[n.a], g.reshaped(va.rows(), va.cols()));
                break;
            }
            case Op::reduce_sum:
                accum_grad(grads[n.a],
                           Tensor::full(value(n.a).rows(), value(n.a).cols(), g[0]));
                break;
            case Op::reduce_mean:
                accum_grad(grads[n.a],
                           Tensor::full(value(n.a).rows(), value(n.a).cols(),
                                        g[0] / static_cast<double>(value(n.a).size())));
                break;
        }
    }

    std::vector<Tensor> result;
    result.reserve(wrt.size());
    for (NodeId id : wrt) {
        const Node& n = at(id);
        if (n.op != Op::leaf)
            raise(Errc::config, "gradients: requested node is not a leaf");
        Tensor gi = grads[id].empty() ? Tensor(n.value.rows(), n.value.cols())
                                      : std::move(grads[id]);
        if (!all_finite(gi)) raise(Errc::numeric, "non-finite gradient");
        result.push_back(std::move(gi));
    }
    return result;
}

namespace {

double central_difference(Graph& g, NodeId output, NodeId leaf_id, std::size_t coord,
                          double h) {
    Tensor v = g.value(leaf_id);
    const double x0 = v[coord];
    v[coord] = x0 + h;
    g.set_leaf(leaf_id, v);
    g.recompute();
    const double fp = g.value(output)[0];
    v[coord] = x0 - h;
    g.set_leaf(leaf_id, v);
    g.recompute();
    const double fm = g.value(output)[0];
    v[coord] = x0;
    g.set_leaf(leaf_id, v);
    g.recompute();
    return (fp - fm) / (2.0 * h);
}

double rel_err(double ad, double fd) {
    const double denom = std::max({std::fabs(ad), std::fabs(fd), 1e-8});
    return std::fabs(ad - fd) / denom;
}

FdReport check_coords(Graph& g, NodeId output, const std::vector<NodeId>& leaves,
                      const std::vector<std::vector<std::size_t>>& coords, double tolerance,
                      double h) {
    const std::vector<Tensor> ad = g.gradients(output, leaves);
    FdReport report;
    report.tolerance = tolerance;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        FdEntry entry;
        entry.leaf = leaves[li];
        for (std::size_t coord : coords[li]) {
            const double fd = central_difference(g, output, leaves[li], coord, h);
            entry.max_rel_err = std::max(entry.max_rel_err, rel_err(ad[li][coord], fd));
            ++entry.checked;
        }
        entry.pass = entry.max_rel_err < tolerance;
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.checked += entry.checked;
        report.pass = report.pass && entry.pass;
        report.per_leaf.push_back(entry);
    }
    return report;
}

}  // namespace

FdReport finite_diff_check(Graph& g, NodeId output, const std::vector<NodeId>& leaves,
                           double tolerance, double h) {
    std::vector<std::vector<std::size_t>> coords(leaves.size());
    for (std::size_t li = 0; li < leaves.size(); ++li)
        for (std::size_t i = 0; i < g.value(leaves[li]).size(); ++i) coords[li].push_back(i);
    return check_coords(g, output, leaves, coords, tolerance, h);
}

FdReport finite_diff_spot_check(Graph& g, NodeId output, const std::vector<NodeId>& leaves,
                                std::size_t coords_per_leaf, Rng& rng, double tolerance,
                                double h) {
    std::vector<std::vector<std::size_t>> coords(leaves.size());
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        const std::size_t n = g.value(leaves[li]).size();
        if (n == 0) continue;
        if (n <= coords_per_leaf) {
            for (std::size_t i = 0; i < n; ++i) coords[li].push_back(i);
        } else {
            for (std::size_t i = 0; i < coords_per_leaf; ++i)
                coords[li].push_back(static_cast<std::size_t>(rng.below(n)));
        }
    }
    return check_coords(g, output, leaves, coords, tolerance, h);
}

namespace {

const char* op_name(int op) {
    static const char* names[] = {
        "leaf",        "constant",    "add",        "sub",          "mul",
        "div",         "neg",         "scale",      "add_scalar",   "max_scalar",
        "matmul",      "tanh",        "sigmoid",    "exp",          "log",
        "abs",         "concat_cols", "slice_cols", "gather_rows",  "row_update_add",
        "gather_cols", "assemble_cols", "reshape",  "reduce_sum",   "reduce_mean",
    };
    if (op < 0 || op >= static_cast<int>(sizeof(names) / sizeof(names[0]))) return "op";
    return names[op];
}

}  // namespace

}  // namespace probmotion::ad
