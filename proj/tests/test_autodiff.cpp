#include <doctest.h>

#include <cmath>
#include <vector>

#include "probmotion/autodiff.hpp"
#include "probmotion/error.hpp"
#include "probmotion/rng.hpp"
#include "probmotion/tensor.hpp"

using namespace probmotion;
using ad::Graph;
using ad::NodeId;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double lo = -2.0,
                     double hi = 2.0) {
    Tensor t(r, c);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = lo + (hi - lo) * rng.uniform01();
    return t;
}

// Contract a (rows x cols) node to a scalar with a fixed random cotangent so
// every output coordinate influences the loss differently.
NodeId contract(Graph& g, NodeId x, Rng& rng) {
    const Tensor& v = g.value(x);
    return g.reduce_sum(g.mul(x, g.constant(random_tensor(rng, v.rows(), v.cols()))));
}

void expect_fd_pass(Graph& g, NodeId out, const std::vector<NodeId>& leaves,
                    double tol = 1e-6) {
    const ad::FdReport rep = ad::finite_diff_check(g, out, leaves, tol);
    CHECK(rep.checked > 0);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err < tol);
}

}  // namespace

TEST_CASE("x^2 gradient at x=3 is essentially exact") {
    Graph g;
    NodeId x = g.leaf(Tensor::full(1, 1, 3.0));
    NodeId y = g.mul(x, x);
    auto grads = g.gradients(y, {x});
    CHECK(grads[0][0] == 6.0);
    const ad::FdReport rep = ad::finite_diff_check(g, y, {x}, 1e-4);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err < 1e-8);
}

TEST_CASE("simple analytic derivatives") {
    Graph g;
    NodeId x = g.leaf(Tensor::full(1, 1, 0.0));
    NodeId s = g.sigmoid(x);
    CHECK(g.value(s)[0] == 0.5);
    CHECK(g.gradients(s, {x})[0][0] == 0.25);

    Graph g2;
    NodeId x2 = g2.leaf(Tensor::full(1, 1, 0.0));
    NodeId t = g2.tanh(x2);
    CHECK(g2.gradients(t, {x2})[0][0] == 1.0);
}

TEST_CASE("every primitive op passes a finite-difference check") {
    Rng rng(101);

    SUBCASE("add/sub/mul") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 3));
        NodeId b = g.leaf(random_tensor(rng, 2, 3));
        NodeId out = contract(g, g.mul(g.add(a, b), g.sub(a, b)), rng);
        expect_fd_pass(g, out, {a, b});
    }

    SUBCASE("div with denominator away from zero") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 3));
        NodeId b = g.leaf(random_tensor(rng, 2, 3, 0.5, 2.5));
        NodeId out = contract(g, g.div(a, b), rng);
        expect_fd_pass(g, out, {a, b});
    }

    SUBCASE("neg/scale/add_scalar") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 3, 2));
        NodeId out = contract(g, g.add_scalar(g.scale(g.neg(a), 1.3), -0.7), rng);
        expect_fd_pass(g, out, {a});
    }

    SUBCASE("max_scalar away from the kink") {
        Graph g;
        Tensor v = random_tensor(rng, 2, 4);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (std::fabs(v[i]) < 0.1) v[i] = 0.3;  // keep clear of the hinge at 0
        NodeId a = g.leaf(v);
        NodeId out = contract(g, g.max_scalar(a, 0.0), rng);
        expect_fd_pass(g, out, {a});
    }

    SUBCASE("matmul both operands") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 3, 3));
        NodeId w = g.leaf(random_tensor(rng, 3, 3));
        NodeId out = contract(g, g.matmul(a, w), rng);
        expect_fd_pass(g, out, {a, w});
    }

    SUBCASE("tanh/sigmoid/exp") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 3, -1.0, 1.0));
        NodeId out = contract(g, g.exp(g.sigmoid(g.tanh(a))), rng);
        expect_fd_pass(g, out, {a});
    }

    SUBCASE("log on positive inputs") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 3, 0.5, 3.0));
        NodeId out = contract(g, g.log(a), rng);
        expect_fd_pass(g, out, {a});
    }

    SUBCASE("abs away from zero") {
        Graph g;
        Tensor v = random_tensor(rng, 2, 3);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (std::fabs(v[i]) < 0.1) v[i] = -0.5;
        NodeId a = g.leaf(v);
        NodeId out = contract(g, g.abs(a), rng);
        expect_fd_pass(g, out, {a});
    }

    SUBCASE("concat and slice") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 3));
        NodeId b = g.leaf(random_tensor(rng, 2, 2));
        NodeId cat = g.concat_cols(a, b);
        NodeId out = contract(g, g.slice_cols(cat, 1, 4), rng);
        expect_fd_pass(g, out, {a, b});
    }

    SUBCASE("gather_rows with a duplicated row index") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 4, 3));
        NodeId out = contract(g, g.gather_rows(a, {2, 0, 2, 3}), rng);
        expect_fd_pass(g, out, {a});
    }

    SUBCASE("row_update_add") {
        Graph g;
        NodeId base = g.leaf(random_tensor(rng, 4, 3));
        NodeId delta = g.leaf(random_tensor(rng, 2, 3));
        NodeId out = contract(g, g.row_update_add(base, {3, 1}, delta), rng);
        expect_fd_pass(g, out, {base, delta});
    }

    SUBCASE("gather and assemble cols") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 5));
        NodeId left = g.gather_cols(a, {0, 2, 4});
        NodeId right = g.gather_cols(a, {1, 3});
        NodeId back = g.assemble_cols(5, {{0, 2, 4}, {1, 3}}, {left, right});
        NodeId out = contract(g, back, rng);
        expect_fd_pass(g, out, {a});
        // assembling the gathers reproduces the input exactly
        CHECK(bit_equal(g.value(back), g.value(a)));
    }

    SUBCASE("reshape and reductions") {
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 6));
        NodeId r = g.reshape(a, 3, 4);
        NodeId out = g.add(g.reduce_sum(g.mul(r, r)), g.reduce_mean(r));
        expect_fd_pass(g, out, {a});
    }
}

TEST_CASE("gradient through a recurrent-style chain") {
    Rng rng(202);
    Graph g;
    NodeId h = g.leaf(random_tensor(rng, 1, 4, -0.5, 0.5));
    NodeId w = g.leaf(random_tensor(rng, 4, 4, -0.5, 0.5));
    NodeId u = g.leaf(random_tensor(rng, 4, 4, -0.5, 0.5));
    NodeId x = g.constant(random_tensor(rng, 1, 4));
    NodeId state = h;
    for (int step = 0; step < 5; ++step) {
        NodeId gate = g.sigmoid(g.matmul(state, u));
        NodeId cand = g.tanh(g.add(g.matmul(state, w), g.matmul(x, w)));
        NodeId one_minus = g.sub(g.constant(Tensor::full(1, 4, 1.0)), gate);
        state = g.add(g.mul(one_minus, state), g.mul(gate, cand));
    }
    NodeId out = contract(g, state, rng);
    expect_fd_pass(g, out, {h, w, u}, 1e-5);
}

TEST_CASE("constants block gradient flow and cannot be differentiated") {
    Graph g;
    NodeId a = g.leaf(Tensor::full(1, 2, 1.5));
    NodeId c = g.constant(Tensor::full(1, 2, 2.0));
    NodeId out = g.reduce_sum(g.mul(a, c));
    auto grads = g.gradients(out, {a});
    CHECK(grads[0][0] == 2.0);
    CHECK(grads[0][1] == 2.0);
    CHECK_THROWS_AS(g.gradients(out, {c}), Error);
}

TEST_CASE("a leaf with no path to the output gets a zero gradient") {
    Graph g;
    NodeId a = g.leaf(Tensor::full(1, 2, 1.0));
    NodeId orphan = g.leaf(Tensor::full(3, 3, 4.0));
    NodeId out = g.reduce_sum(a);
    auto grads = g.gradients(out, {orphan});
    CHECK(grads[0].rows() == 3);
    CHECK(grads[0].cols() == 3);
    for (std::size_t i = 0; i < grads[0].size(); ++i) CHECK(grads[0][i] == 0.0);
}

TEST_CASE("gradients are pure: repeated calls agree bitwise") {
    Rng rng(303);
    Graph g;
    NodeId a = g.leaf(random_tensor(rng, 3, 3));
    NodeId w = g.leaf(random_tensor(rng, 3, 3));
    NodeId out = g.reduce_sum(g.tanh(g.matmul(a, w)));
    auto g1 = g.gradients(out, {a, w});
    auto g2 = g.gradients(out, {a, w});
    CHECK(bit_equal(g1[0], g2[0]));
    CHECK(bit_equal(g1[1], g2[1]));

    const Tensor before = g.value(out);
    g.recompute();
    CHECK(bit_equal(before, g.value(out)));
}

TEST_CASE("identically built graphs give identical gradients") {
    auto build = [](std::vector<Tensor>& grads_out) {
        Rng rng(404);
        Graph g;
        NodeId a = g.leaf(random_tensor(rng, 2, 4));
        NodeId w = g.leaf(random_tensor(rng, 4, 2));
        NodeId out = g.reduce_mean(g.sigmoid(g.matmul(a, w)));
        grads_out = g.gradients(out, {a, w});
    };
    std::vector<Tensor> first, second;
    build(first);
    build(second);
    CHECK(bit_equal(first[0], second[0]));
    CHECK(bit_equal(first[1], second[1]));
}

TEST_CASE("non-finite forward values raise a structured numeric error") {
    Graph g;
    NodeId a = g.leaf(Tensor::full(1, 2, 0.0));
    CHECK_THROWS_AS(g.log(a), Error);  // log(0) = -inf
    try {
        g.log(a);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::numeric);
    }

    // division by zero likewise
    NodeId z = g.leaf(Tensor::full(1, 2, 0.0));
    NodeId one = g.leaf(Tensor::full(1, 2, 1.0));
    CHECK_THROWS_AS(g.div(one, z), Error);
}

TEST_CASE("output of gradients must be scalar and shapes must line up") {
    Graph g;
    NodeId a = g.leaf(Tensor::full(2, 2, 1.0));
    CHECK_THROWS_AS(g.gradients(a, {a}), Error);  // 2x2 output
    CHECK_THROWS_AS(g.add(a, g.leaf(Tensor::full(1, 3, 1.0))), Error);
    CHECK_THROWS_AS(g.matmul(a, g.leaf(Tensor::full(3, 2, 1.0))), Error);
}

TEST_CASE("spot check samples the requested number of coordinates") {
    Rng rng(505);
    Graph g;
    NodeId a = g.leaf(random_tensor(rng, 8, 8));
    NodeId w = g.leaf(random_tensor(rng, 8, 8, -0.4, 0.4));
    NodeId out = g.reduce_sum(g.tanh(g.matmul(a, w)));
    Rng pick(1);
    const ad::FdReport rep = ad::finite_diff_spot_check(g, out, {a, w}, 10, pick, 1e-4);
    CHECK(rep.checked == 20);
    CHECK(rep.per_leaf.size() == 2);
    CHECK(rep.pass);
}
