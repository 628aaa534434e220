#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "wuglab/nn.hpp"
#include "wuglab/optimizer.hpp"
#include "wuglab/rng.hpp"
#include "wuglab/tensor.hpp"

using namespace wuglab;

TEST_CASE("softmax_cross_entropy: uniform logits give ln V") {
    Tensor logits({10});
    logits.fill(0.7);
    const auto [loss, grad] = softmax_cross_entropy(logits, 3);
    CHECK(loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    double grad_sum = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad_sum += grad[i];
    }
    CHECK(grad_sum == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(grad[3] == doctest::Approx(0.1 - 1.0).epsilon(1e-12));
    CHECK(grad[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("softmax_cross_entropy: saturated target") {
    Tensor logits({6});
    logits[2] = 1e6;
    const auto [loss, grad] = softmax_cross_entropy(logits, 2);
    CHECK(loss <= 1e-12);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        CHECK(std::abs(grad[i]) <= 1e-10);
    }
}

TEST_CASE("softmax_cross_entropy: gradient matches finite differences") {
    Rng rng(42);
    Tensor logits({5});
    for (std::size_t i = 0; i < 5; ++i) {
        logits[i] = rng.normal(0.0, 2.0);
    }
    const auto [loss, grad] = softmax_cross_entropy(logits, 1);
    (void)loss;
    Gradients analytic;
    analytic.accumulate("logits", {5}) = grad;
    NamedTensors params;
    params.emplace("logits", logits);
    const double err = finite_diff_check(
        [](const NamedTensors& p) {
            return softmax_cross_entropy(p.at("logits"), 1).loss;
        },
        params, analytic, 1e-5);
    CHECK(err < 1e-6);
}

TEST_CASE("softmax_cross_entropy: contract violations") {
    Tensor logits({4});
    CHECK_THROWS_AS(softmax_cross_entropy(logits, 4), std::invalid_argument);
    logits[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(softmax_cross_entropy(logits, 0), std::invalid_argument);
}

TEST_CASE("optimizer_step: empty filter freezes everything bit-identically") {
    NamedTensors params;
    params.emplace("w", Tensor::of({1.0, -2.0, 3.5}));
    params.emplace("b", Tensor::of({0.25}));
    const NamedTensors before = params;
    Gradients grads;
    grads.accumulate("w", {3}) = Tensor::of({1.0, 1.0, 1.0});
    grads.accumulate("b", {1}) = Tensor::of({1.0});
    OptimizerState state = OptimizerState::adam(0.1);
    optimizer_step(params, grads, state, [](const std::string&) { return false; });
    CHECK(params == before);
}

TEST_CASE("optimizer_step: sgd arithmetic") {
    NamedTensors params;
    params.emplace("p", Tensor::of({1.0}));
    Gradients grads;
    grads.accumulate("p", {1}) = Tensor::of({2.0});
    OptimizerState state = OptimizerState::sgd(0.1);
    optimizer_step(params, grads, state, [](const std::string&) { return true; });
    CHECK(params.at("p")[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("optimizer_step: adam first step is a bias-corrected lr-sized move") {
    NamedTensors params;
    params.emplace("p", Tensor::of({0.5}));
    Gradients grads;
    grads.accumulate("p", {1}) = Tensor::of({1.0});
    OptimizerState state = OptimizerState::adam(1e-3);
    optimizer_step(params, grads, state, [](const std::string&) { return true; });
    // m_hat = v_hat = 1 after correction, so the step is lr/(1 + eps).
    CHECK(std::abs(params.at("p")[0] - (0.5 - 1e-3)) < 1e-9);
}

TEST_CASE("optimizer_step: shape mismatch is a contract violation") {
    NamedTensors params;
    params.emplace("p", Tensor::of({0.5, 0.5}));
    Gradients grads;
    grads.accumulate("p", {1}) = Tensor::of({1.0});
    OptimizerState state = OptimizerState::sgd(0.1);
    CHECK_THROWS_AS(
        optimizer_step(params, grads, state, [](const std::string&) { return true; }),
        std::invalid_argument);
}

TEST_CASE("finite_diff_check: exact for linear loss") {
    NamedTensors params;
    params.emplace("theta", Tensor::of({0.5, -1.25}));
    Gradients analytic;
    analytic.accumulate("theta", {2}) = Tensor::of({3.0, -2.0});
    const double err = finite_diff_check(
        [](const NamedTensors& p) {
            return 3.0 * p.at("theta")[0] - 2.0 * p.at("theta")[1];
        },
        params, analytic, 1e-5);
    CHECK(err <= 1e-10);
}

TEST_CASE("finite_diff_check: quadratic recovers the derivative") {
    NamedTensors params;
    params.emplace("theta", Tensor::of({3.0}));
    Gradients analytic;
    analytic.accumulate("theta", {1}) = Tensor::of({6.0});
    const double err = finite_diff_check(
        [](const NamedTensors& p) {
            const double t = p.at("theta")[0];
            return t * t;
        },
        params, analytic, 1e-5);
    CHECK(err <= 1e-9);
}

TEST_CASE("finite_diff_check: flags a wrong gradient") {
    NamedTensors params;
    params.emplace("theta", Tensor::of({3.0}));
    Gradients analytic;
    analytic.accumulate("theta", {1}) = Tensor::of({5.0});  // should be 6
    const double err = finite_diff_check(
        [](const NamedTensors& p) {
            const double t = p.at("theta")[0];
            return t * t;
        },
        params, analytic, 1e-5);
    CHECK(err > 0.1);
}

TEST_CASE("rng: determinism and distribution sanity") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng r(7);
    double sum = 0.0, sum_sq = 0.0;
    constexpr int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sum_sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.05);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.index_below(7) < 7);
    }
}
