#include <doctest.h>

#include <cmath>

#include "creepuq/graph.hpp"
#include "creepuq/mlp.hpp"
#include "creepuq/optim.hpp"
#include "creepuq/rng.hpp"
#include "oracles.hpp"

using namespace creepuq;

TEST_CASE("tensor shape/value consistency") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
}

TEST_CASE("single-layer identity map") {
    MlpArchitecture arch{{1, 1}};
    std::vector<double> params{1.0, 0.0};  // weight 1, bias 0
    Tensor x({1, 1}, {2.0});
    auto out = mlp_forward(arch, params, x);
    CHECK(out[0] == doctest::Approx(2.0));
}

TEST_CASE("relu clamps negatives") {
    Graph g;
    auto in = g.input({1});
    auto out = g.relu(in);
    g.set_values(in, {-3.0});
    g.forward();
    CHECK(g.value(out)[0] == 0.0);
}

TEST_CASE("hand forward pass widths [1,2,1]") {
    MlpArchitecture arch{{1, 2, 1}};
    // layer 0: W (1x2) = [1 1], b = [0 0]; layer 1: W (2x1) = [1 1]^T, b = [0]
    std::vector<double> params{1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0};
    Tensor x({1, 1}, {1.0});
    auto out = mlp_forward(arch, params, x);
    CHECK(out[0] == doctest::Approx(2.0));

    // Graph route agrees.
    Graph g;
    auto p = g.input({arch.parameter_count()});
    auto xin = g.input({1, 1});
    auto net = build_mlp_graph(g, arch, p, xin);
    g.set_values(p, params);
    g.set_values(xin, {1.0});
    g.forward();
    CHECK(g.value(net.output)[0] == doctest::Approx(2.0));
}

TEST_CASE("grad of theta squared") {
    Graph g;
    auto theta = g.input({1});
    auto loss = g.sum(g.mul(theta, theta));
    g.set_values(theta, {3.0});
    g.forward();
    g.backward(loss);
    CHECK(g.grad(theta)[0] == doctest::Approx(6.0));
}

TEST_CASE("grad of relu below zero is zero, and exactly zero at zero") {
    Graph g;
    auto theta = g.input({1});
    auto loss = g.sum(g.relu(theta));
    g.set_values(theta, {-1.0});
    g.forward();
    g.backward(loss);
    CHECK(g.grad(theta)[0] == 0.0);

    g.set_values(theta, {0.0});
    g.forward();
    g.backward(loss);
    CHECK(g.grad(theta)[0] == 0.0);  // subgradient pinned to 0
}

TEST_CASE("mlp gradient matches central differences") {
    MlpArchitecture arch{{3, 5, 1}};
    Rng rng(42);
    std::vector<double> params = init_mlp_params(arch, rng);
    std::size_t batch = 4;
    Tensor x({batch, 3});
    for (auto& v : x.values) v = rng.uniform(-1.0, 1.0);
    std::vector<double> y(batch);
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);

    Graph g;
    auto p = g.input({params.size()});
    auto xin = g.input({batch, 3});
    auto yin = g.input({batch, 1});
    auto net = build_mlp_graph(g, arch, p, xin);
    auto diff = g.sub(net.output, yin);
    auto loss = g.mean(g.mul(diff, diff));
    g.set_values(xin, x.values);
    g.set_values(yin, y);

    g.set_values(p, params);
    g.forward();
    g.backward(loss);
    std::vector<double> analytic = g.grad(p).values;

    auto f = [&](const std::vector<double>& pv) {
        g.set_values(p, pv);
        g.forward();
        return g.scalar_value(loss);
    };
    std::vector<double> numeric = oracles::finite_difference_gradient(f, params, 1e-5);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double denom = std::max(1.0, std::abs(numeric[i]));
        CHECK(std::abs(analytic[i] - numeric[i]) / denom < 1e-6);
    }
}

TEST_CASE("gradient linearity in loss combination") {
    Graph g;
    auto theta = g.input({3});
    auto l1 = g.sum(g.mul(theta, theta));
    auto l2 = g.sum(g.exp(theta));
    double a = 0.7, b = -1.3;
    auto combo = g.add(g.affine(l1, a, 0.0), g.affine(l2, b, 0.0));
    g.set_values(theta, {0.3, -0.8, 1.1});
    g.forward();

    g.backward(l1);
    auto g1 = g.grad(theta).values;
    g.backward(l2);
    auto g2 = g.grad(theta).values;
    g.backward(combo);
    auto gc = g.grad(theta).values;
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(gc[i] == doctest::Approx(a * g1[i] + b * g2[i]).epsilon(1e-12));
}

TEST_CASE("random mlp graphs vs finite differences") {
    Rng rng(777);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t depth = 1 + rng.index(3);
        std::vector<std::size_t> widths{1 + rng.index(4)};
        for (std::size_t l = 0; l < depth; ++l) widths.push_back(1 + rng.index(8));
        widths.push_back(1);
        MlpArchitecture arch{widths};
        std::vector<double> params = init_mlp_params(arch, rng);
        std::size_t batch = 1 + rng.index(5);
        Graph g;
        auto p = g.input({params.size()});
        auto xin = g.input({batch, widths.front()});
        auto yin = g.input({batch, 1});
        auto net = build_mlp_graph(g, arch, p, xin);
        auto diff = g.sub(net.output, yin);
        auto loss = g.mean(g.mul(diff, diff));
        std::vector<double> xv(batch * widths.front());
        for (auto& v : xv) v = rng.uniform(-1.0, 1.0);
        std::vector<double> yv(batch);
        for (auto& v : yv) v = rng.uniform(-1.0, 1.0);
        g.set_values(xin, xv);
        g.set_values(yin, yv);

        g.set_values(p, params);
        g.forward();
        g.backward(loss);
        std::vector<double> analytic = g.grad(p).values;
        auto f = [&](const std::vector<double>& pv) {
            g.set_values(p, pv);
            g.forward();
            return g.scalar_value(loss);
        };
        std::vector<double> numeric = oracles::finite_difference_gradient(f, params, 1e-5);
        for (std::size_t i = 0; i < params.size(); ++i) {
            double rel = std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i]));
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("non-finite forward is surfaced") {
    Graph g;
    auto in = g.input({1});
    auto out = g.sum(g.log(in));
    g.set_values(in, {-1.0});
    CHECK_FALSE(g.forward_finite(out));
    g.set_values(in, {2.0});
    CHECK(g.forward_finite(out));
}

TEST_CASE("backward requires scalar output") {
    Graph g;
    auto in = g.input({2});
    auto out = g.relu(in);
    g.set_values(in, {1.0, 2.0});
    g.forward();
    CHECK_THROWS_AS(g.backward(out), std::invalid_argument);
}

TEST_CASE("vanilla sgd step") {
    Optimizer opt({OptimizerKind::kSgd, 0.1, 0.0}, 1);
    std::vector<double> p{1.0};
    opt.step(p, {2.0});
    CHECK(p[0] == doctest::Approx(0.8));
}

TEST_CASE("zero gradients are a fixed point") {
    for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam,
                               OptimizerKind::kAdagrad, OptimizerKind::kRmsProp}) {
        OptimizerSpec spec;
        spec.kind = kind;
        spec.learning_rate = 0.05;
        spec.momentum = 0.0;
        Optimizer opt(spec, 3);
        std::vector<double> p{1.0, -2.0, 0.5};
        std::vector<double> before = p;
        opt.step(p, {0.0, 0.0, 0.0});
        opt.step(p, {0.0, 0.0, 0.0});
        CHECK(p == before);
    }
}

TEST_CASE("nesterov two-step regression value") {
    // v <- mu*v + g; p <- p - lr*(g + mu*v). mu=0.9, lr=0.1, g=1:
    // step 1: v=1, p = -0.1*(1+0.9) = -0.19
    // step 2: v=1.9, p = -0.19 - 0.1*(1+1.71) = -0.461
    Optimizer opt({OptimizerKind::kSgd, 0.1, 0.9}, 1);
    std::vector<double> p{0.0};
    opt.step(p, {1.0});
    CHECK(p[0] == doctest::Approx(-0.19).epsilon(1e-12));
    opt.step(p, {1.0});
    CHECK(p[0] == doctest::Approx(-0.461).epsilon(1e-12));
}

TEST_CASE("adam first step has magnitude about lr") {
    for (double g0 : {0.001, 0.5, 40.0}) {
        Optimizer opt({OptimizerKind::kAdam, 0.01}, 1);
        std::vector<double> p{0.0};
        opt.step(p, {g0});
        CHECK(std::abs(p[0]) == doctest::Approx(0.01).epsilon(1e-4));
        CHECK(p[0] < 0.0);
    }
}

TEST_CASE("adagrad accumulator arithmetic") {
    Optimizer opt({OptimizerKind::kAdagrad, 1.0}, 1);
    std::vector<double> p{0.0};
    opt.step(p, {1.0});
    CHECK(p[0] == doctest::Approx(-1.0).epsilon(1e-6));
    opt.step(p, {1.0});
    CHECK(p[0] == doctest::Approx(-1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("optimizer shape mismatch") {
    Optimizer opt({OptimizerKind::kAdam, 0.01}, 2);
    std::vector<double> p{0.0, 0.0};
    std::vector<double> g{1.0};
    CHECK_THROWS_AS(opt.step(p, g), std::invalid_argument);
}

TEST_CASE("slice scatters gradients back") {
    Graph g;
    auto in = g.input({4});
    auto a = g.slice(in, 0, {2});
    auto b = g.slice(in, 2, {2});
    auto loss = g.add(g.sum(g.mul(a, a)), g.affine(g.sum(b), 3.0, 0.0));
    g.set_values(in, {1.0, 2.0, 3.0, 4.0});
    g.forward();
    g.backward(loss);
    const auto& grad = g.grad(in);
    CHECK(grad[0] == doctest::Approx(2.0));
    CHECK(grad[1] == doctest::Approx(4.0));
    CHECK(grad[2] == doctest::Approx(3.0));
    CHECK(grad[3] == doctest::Approx(3.0));
}

TEST_CASE("broadcast add and mul with scalars and rows") {
    Graph g;
    auto m = g.input({2, 2});
    auto row = g.input({2});
    auto s = g.input({1});
    auto out = g.sum(g.mul(g.add(m, row), s));
    g.set_values(m, {1.0, 2.0, 3.0, 4.0});
    g.set_values(row, {10.0, 20.0});
    g.set_values(s, {2.0});
    g.forward();
    CHECK(g.scalar_value(out) == doctest::Approx(2.0 * (11 + 22 + 13 + 24)));
    g.backward(out);
    CHECK(g.grad(row)[0] == doctest::Approx(4.0));  // 2 rows x scale 2
    CHECK(g.grad(s)[0] == doctest::Approx(70.0));
    CHECK(g.grad(m)[1] == doctest::Approx(2.0));
}
