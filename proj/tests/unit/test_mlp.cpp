#include <doctest.h>

#include <cmath>

#include "ocgfn/nn/adam.hpp"
#include "ocgfn/nn/checkpoint.hpp"
#include "ocgfn/nn/grad_check.hpp"
#include "ocgfn/nn/mlp.hpp"

using namespace ocgfn;
using namespace ocgfn::nn;

TEST_CASE("zero-weight net returns its bias vector") {
    Mlp net({3, 2}, Activation::relu, 1);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    net.params()[6] = 0.5; // b[0]
    net.params()[7] = -1.5;
    std::vector<double> out;
    net.forward(std::vector<double>{7.0, -2.0, 3.0}, out);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(-1.5));
}

TEST_CASE("identity-initialized linear layer passes its input through") {
    Mlp net({3, 3}, Activation::relu, 1);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    for (int i = 0; i < 3; ++i) net.params()[i * 3 + i] = 1.0;
    std::vector<double> out;
    std::vector<double> in{0.25, -4.0, 9.0};
    net.forward(in, out);
    for (int i = 0; i < 3; ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("single relu unit: w=2, b=1, input 3 gives 7") {
    // two layers so the activation actually applies between them
    Mlp net({1, 1, 1}, Activation::relu, 1);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    net.params()[0] = 2.0; // layer 1 weight
    net.params()[1] = 1.0; // layer 1 bias
    net.params()[2] = 1.0; // layer 2 weight (identity)
    std::vector<double> out;
    net.forward(std::vector<double>{3.0}, out);
    CHECK(out[0] == doctest::Approx(7.0));
}

TEST_CASE("forward is deterministic bit for bit") {
    Mlp net({5, 16, 4}, Activation::leaky_relu, 42);
    std::vector<double> in{0.1, -0.2, 0.3, 0.7, -0.9}, a, b;
    net.forward(in, a);
    net.forward(in, b);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("backward recovers simple analytic gradients") {
    // loss = w * x at x = 3
    Mlp lin({1, 1}, Activation::relu, 1);
    std::fill(lin.params().begin(), lin.params().end(), 0.0);
    lin.params()[0] = 1.0;
    Mlp::Cache cache;
    std::vector<double> out, grad(lin.params().size(), 0.0);
    lin.forward_cached(std::vector<double>{3.0}, cache, out);
    lin.backward(cache, std::vector<double>{1.0}, grad);
    CHECK(grad[0] == doctest::Approx(3.0)); // dL/dw
    CHECK(grad[1] == doctest::Approx(1.0)); // dL/db

    // loss = (w*x)^2 at w=1, x=3 -> dL/dw = 2*(w*x)*x = 18
    grad.assign(grad.size(), 0.0);
    lin.forward_cached(std::vector<double>{3.0}, cache, out);
    lin.backward(cache, std::vector<double>{2.0 * out[0]}, grad);
    CHECK(grad[0] == doctest::Approx(18.0));
}

TEST_CASE("leaky region propagates slope 0.01") {
    Mlp net({1, 1, 1}, Activation::leaky_relu, 1);
    std::fill(net.params().begin(), net.params().end(), 0.0);
    net.params()[0] = 1.0; // w1
    net.params()[2] = 1.0; // w2
    Mlp::Cache cache;
    std::vector<double> out, grad(net.params().size(), 0.0);
    net.forward_cached(std::vector<double>{-5.0}, cache, out);
    CHECK(out[0] == doctest::Approx(-0.05));
    net.backward(cache, std::vector<double>{1.0}, grad);
    CHECK(grad[0] == doctest::Approx(-5.0 * 0.01)); // through the kinked unit
}

TEST_CASE("first adam step moves a parameter by about -lr") {
    std::vector<double> params{0.0};
    std::vector<double> grads{1.0};
    AdamState st(0.001);
    adam_step(params, grads, st);
    CHECK(params[0] == doctest::Approx(-0.001).epsilon(1e-7));

    // second identical step keeps moving the same way
    adam_step(params, grads, st);
    CHECK(params[0] < -0.0019);
}

TEST_CASE("adam with zero gradients and zero moments leaves parameters put") {
    std::vector<double> params{1.5, -2.5};
    std::vector<double> grads{0.0, 0.0};
    AdamState st(0.1);
    adam_step(params, grads, st);
    CHECK(std::abs(params[0] - 1.5) < 1e-12);
    CHECK(std::abs(params[1] + 2.5) < 1e-12);
}

TEST_CASE("adam rejects non-finite gradients with the parameter name") {
    std::vector<double> params{0.0};
    std::vector<double> grads{std::nan("")};
    AdamState st;
    CHECK_THROWS_WITH_AS(adam_step(params, grads, st, "cond"),
                         doctest::Contains("cond"), std::runtime_error);
}

TEST_CASE("grad check: quadratic loss") {
    std::vector<double> params{3.0};
    std::vector<double> analytic{6.0};
    auto rep = grad_check(params, analytic, [&] { return params[0] * params[0]; });
    CHECK(rep.checked == 1);
    CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("grad check skips parameters sitting on a relu kink") {
    // f(w) = relu(w) has a kink at w = 0
    std::vector<double> params{0.0};
    std::vector<double> analytic{0.0};
    auto rep = grad_check(params, analytic, [&] { return std::max(params[0], 0.0); });
    CHECK(rep.skipped_nonsmooth == 1);
    CHECK(rep.checked == 0);
}

TEST_CASE("grad check on a random net against full backward") {
    Rng rng(5);
    Mlp net({6, 16, 16, 3}, Activation::leaky_relu, 99);
    std::vector<double> in(6);
    for (auto& x : in) x = rng.uniform(-1.0, 1.0);
    // loss = sum of squared outputs
    auto eval = [&] {
        std::vector<double> out;
        net.forward(in, out);
        double l = 0.0;
        for (double o : out) l += o * o;
        return l;
    };
    Mlp::Cache cache;
    std::vector<double> out, grad(net.params().size(), 0.0);
    net.forward_cached(in, cache, out);
    std::vector<double> dout(out.size());
    for (size_t i = 0; i < out.size(); ++i) dout[i] = 2.0 * out[i];
    net.backward(cache, dout, grad);
    auto rep = grad_check(net.params(), grad, eval);
    CHECK(rep.max_rel_err < 1e-5);
    CHECK(rep.checked > net.params().size() - 8);
}

TEST_CASE("checkpoint round trip is bit exact and validates shapes") {
    Mlp net({4, 8, 3}, Activation::relu, 7);
    AdamState opt(0.01);
    std::vector<double> grads(net.params().size(), 0.25);
    adam_step(net.params(), grads, opt);

    const std::string path = "test_ckpt.txt";
    {
        CheckpointWriter w(path);
        w.add_net("model", net, &opt);
        w.add_scalar("log_z", 1.25);
        w.finish();
    }
    Mlp loaded({4, 8, 3}, Activation::relu, 1234);
    AdamState lopt;
    CheckpointReader r(path);
    r.load_net("model", loaded, &lopt);
    for (size_t i = 0; i < net.params().size(); ++i)
        CHECK(loaded.params()[i] == net.params()[i]);
    CHECK(lopt.step == opt.step);
    CHECK(lopt.m[0] == opt.m[0]);
    CHECK(r.scalar("log_z") == 1.25);

    Mlp wrong({4, 9, 3}, Activation::relu, 1);
    CHECK_THROWS_AS(r.load_net("model", wrong), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("masked log softmax puts zero probability on illegal actions") {
    std::vector<double> logits{1.0, 2.0, 3.0, 4.0};
    std::vector<int> legal{1, 3};
    std::vector<double> log_p, p;
    masked_log_softmax(logits, legal, log_p, p);
    CHECK(p[0] == 0.0);
    CHECK(p[2] == 0.0);
    CHECK(log_p[0] == -std::numeric_limits<double>::infinity());
    CHECK(p[1] + p[3] == doctest::Approx(1.0));
    CHECK(p[3] / p[1] == doctest::Approx(std::exp(2.0)));
}
