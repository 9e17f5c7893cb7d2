#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tanhseed/adam.hpp"
#include "tanhseed/lbfgs.hpp"
#include "tanhseed/network.hpp"
#include "tanhseed/rng.hpp"
#include "tanhseed/train.hpp"

using namespace tanhseed;

TEST_CASE("architecture validation") {
    CHECK_THROWS_AS(NetworkArch({5}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkArch({5, 0, 3}), std::invalid_argument);
    NetworkArch ok({3, 8, 2});
    CHECK(ok.layers() == 2);
    CHECK(ok.input_dim() == 3);
    CHECK(ok.output_dim() == 2);
}

TEST_CASE("one-layer forward is a plain affine map") {
    NetworkArch arch({2, 3});
    Weights w;
    Mat wm(3, 2), bm(3, 1);
    double vals[] = {1, 2, 3, 4, 5, 6};
    for (int i = 0; i < 6; ++i) wm.data()[i] = vals[i];
    bm(0, 0) = 0.5, bm(1, 0) = -0.5, bm(2, 0) = 0.0;
    w.w.push_back(wm);
    w.b.push_back(bm);
    Mat x(2, 1);
    x(0, 0) = 1.0, x(1, 0) = -1.0;
    Mat out = forward(arch, w, x);
    CHECK(out(0, 0) == doctest::Approx(1 - 2 + 0.5));
    CHECK(out(1, 0) == doctest::Approx(3 - 4 - 0.5));
    CHECK(out(2, 0) == doctest::Approx(5 - 6 + 0.0));
}

TEST_CASE("hidden layers apply tanh, the head stays affine") {
    NetworkArch arch({1, 1, 1});
    Weights w;
    for (int l = 0; l < 2; ++l) {
        Mat wm(1, 1), bm(1, 1);
        wm(0, 0) = 2.0;
        bm(0, 0) = 0.25;
        w.w.push_back(wm);
        w.b.push_back(bm);
    }
    Mat x(1, 1);
    x(0, 0) = 0.3;
    Mat out = forward(arch, w, x);
    double hidden = std::tanh(2.0 * 0.3 + 0.25);
    CHECK(out(0, 0) == doctest::Approx(2.0 * hidden + 0.25).epsilon(1e-15));
    // one post-activation entry per layer: hidden tanh output, then head
    auto acts = forward_activations(arch, w, x);
    REQUIRE(acts.size() == 2);
    CHECK(acts[0](0, 0) == doctest::Approx(hidden).epsilon(1e-15));
    CHECK(acts[1](0, 0) == out(0, 0));
}

TEST_CASE("pack and unpack round-trip the parameters") {
    NetworkArch arch({4, 7, 3});
    Rng rng(17);
    Weights w = init_network(arch, InitScheme::xavier_normal(), rng);
    std::vector<double> flat = pack_params(w);
    CHECK(flat.size() == param_count(arch));
    CHECK(flat.size() == 7 * 4 + 7 + 3 * 7 + 3);
    Weights back = unpack_params(arch, flat);
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t i = 0; i < w.w[l].size(); ++i)
            CHECK(back.w[l].data()[i] == w.w[l].data()[i]);
        for (std::size_t i = 0; i < w.b[l].size(); ++i)
            CHECK(back.b[l].data()[i] == w.b[l].data()[i]);
    }
}

TEST_CASE("taped forward equals the plain forward") {
    NetworkArch arch({3, 10, 10, 2});
    Rng rng(23);
    Weights w = init_network(arch, InitScheme::mod_diag(), rng);
    Mat x(3, 5);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    Mat direct = forward(arch, w, x);
    Tape t;
    TapedNet net = make_taped(t, arch, w);
    Mat taped = t.val(forward_taped(t, net, t.leaf(x)));
    REQUIRE(taped.rows() == direct.rows());
    REQUIRE(taped.cols() == direct.cols());
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(taped.data()[i] == doctest::Approx(direct.data()[i]).epsilon(1e-14));
}

TEST_CASE("taped_params walks the pack order") {
    NetworkArch arch({2, 3, 2});
    Rng rng(31);
    Weights w = init_network(arch, InitScheme::xavier_uniform(), rng);
    Tape t;
    TapedNet net = make_taped(t, arch, w);
    auto params = taped_params(net);
    REQUIRE(params.size() == 4);  // w0 b0 w1 b1
    std::vector<double> flat = pack_params(w);
    std::size_t k = 0;
    for (const Value& p : params) {
        const Mat& m = t.val(p);
        for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.data()[i] == flat[k++]);
    }
    CHECK(k == flat.size());
}

TEST_CASE("adam's first step moves each coordinate by about lr") {
    AdamConfig cfg;
    cfg.lr = 0.01;
    AdamState st(3);
    std::vector<double> params = {1.0, -2.0, 0.5};
    std::vector<double> grads = {0.3, -400.0, 1e-3};
    adam_step(st, params, grads, cfg);
    // bias-corrected first step is lr * g / (|g| + eps) ~= lr * sign(g)
    CHECK(params[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
    CHECK(params[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
}

TEST_CASE("adam minimizes a separable quadratic") {
    AdamConfig cfg;
    cfg.lr = 0.05;
    std::vector<double> target = {3.0, -1.0, 0.25};
    std::vector<double> x = {0.0, 0.0, 0.0};
    AdamState st(3);
    std::vector<double> g(3);
    for (int it = 0; it < 2000; ++it) {
        for (int i = 0; i < 3; ++i) g[i] = 2.0 * (x[i] - target[i]);
        adam_step(st, x, g, cfg);
    }
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(target[i]).epsilon(1e-3));
}

TEST_CASE("adam rejects bad input") {
    AdamState st(2);
    std::vector<double> p = {0.0, 0.0}, g3 = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(adam_step(st, p, g3, AdamConfig{}), std::invalid_argument);
    std::vector<double> gn = {1.0, std::nan("")};
    CHECK_THROWS_WITH_AS(adam_step(st, p, gn, AdamConfig{}),
                         "adam_step: non-finite gradient at index 1", std::runtime_error);
}

namespace {

// convex quadratic f(x) = 1/2 x^T A x - b^T x with SPD A
struct Quadratic {
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    double operator()(std::span<const double> x, std::span<double> g) const {
        const std::size_t n = b.size();
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double Ax = 0.0;
            for (std::size_t j = 0; j < n; ++j) Ax += A[i][j] * x[j];
            g[i] = Ax - b[i];
            f += 0.5 * x[i] * Ax - b[i] * x[i];
        }
        return f;
    }
};

Quadratic random_spd_quadratic(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> M(n, std::vector<double>(n));
    for (auto& row : M)
        for (auto& v : row) v = rng.normal(0.0, 1.0);
    Quadratic q;
    q.A.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) q.A[i][j] += M[k][i] * M[k][j];
        q.A[i][i] += 0.5;  // keep it well conditioned
    }
    q.b.assign(n, 0.0);
    for (auto& v : q.b) v = rng.normal(0.0, 1.0);
    return q;
}

double rosenbrock(std::span<const double> x, std::span<double> g) {
    double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
}

}  // namespace

TEST_CASE("near-exact line searches solve a quadratic in at most dim steps") {
    // with exact line searches and full memory the two-loop recursion
    // reproduces conjugate directions, which finish an n-dim quadratic in
    // n iterations; a tight curvature constant gets within rounding of that
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const std::size_t n = 8;
        Quadratic q = random_spd_quadratic(n, seed);
        LbfgsOptions opts;
        opts.memory = n;
        opts.c2 = 1e-3;
        opts.grad_tol = 1e-8;
        opts.max_iter = 3 * n;
        Objective obj = [&](std::span<const double> x, std::span<double> g) { return q(x, g); };
        auto r = lbfgs_optimize(obj, std::vector<double>(n, 0.0), opts);
        CAPTURE(seed);
        CHECK(r.status == LbfgsStatus::GRAD_CONVERGED);
        CHECK(r.iterations <= n);
    }
}

TEST_CASE("lbfgs solves rosenbrock") {
    LbfgsOptions opts;
    opts.max_iter = 300;
    opts.grad_tol = 1e-10;
    auto r = lbfgs_optimize(rosenbrock, {-1.2, 1.0}, opts);
    CHECK(r.f <= 1e-12);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("lbfgs stops immediately at a minimum") {
    Quadratic q = random_spd_quadratic(4, 9);
    // solve A x = b by gradient descent to high accuracy first
    std::vector<double> x(4, 0.0), g(4);
    for (int it = 0; it < 200000; ++it) {
        q(x, g);
        for (int i = 0; i < 4; ++i) x[i] -= 0.02 * g[i];
    }
    LbfgsOptions opts;
    opts.grad_tol = 1e-6;
    Objective obj = [&](std::span<const double> xx, std::span<double> gg) { return q(xx, gg); };
    auto r = lbfgs_optimize(obj, x, opts);
    CHECK(r.status == LbfgsStatus::GRAD_CONVERGED);
    CHECK(r.iterations == 0);
}

TEST_CASE("lbfgs trace is monotone non-increasing and the callback sees every step") {
    LbfgsOptions opts;
    opts.max_iter = 120;
    std::size_t calls = 0;
    auto r = lbfgs_optimize(rosenbrock, {-1.2, 1.0}, opts,
                            [&](std::size_t k, std::span<const double> x, double f) {
                                CHECK(k == calls + 1);
                                CHECK(x.size() == 2);
                                CHECK(std::isfinite(f));
                                ++calls;
                            });
    CHECK(calls == r.iterations);
    REQUIRE(r.trace.size() == r.iterations + 1);  // f at x0 plus each step
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("softmax loss and accuracy helpers") {
    Mat logits(3, 2);
    // column 0: argmax row 2; column 1: tie between rows 0 and 1
    logits(0, 0) = 0.1, logits(1, 0) = 0.2, logits(2, 0) = 1.5;
    logits(0, 1) = 0.7, logits(1, 1) = 0.7, logits(2, 1) = -2.0;
    std::vector<int> labels = {2, 0};
    CHECK(accuracy(logits, labels) == 1.0);  // tie resolves to the lowest row
    std::vector<int> labels2 = {2, 1};
    CHECK(accuracy(logits, labels2) == 0.5);
    double want = 0.0;
    for (int c = 0; c < 2; ++c) {
        double lse = 0.0;
        for (int r = 0; r < 3; ++r) lse += std::exp(logits(r, c));
        want += std::log(lse) - logits(labels[c], c);
    }
    CHECK(softmax_ce_value(logits, labels) == doctest::Approx(want / 2.0).epsilon(1e-12));
}

namespace {

// two well-separated Gaussian blobs, trivially learnable
Dataset blob_dataset(std::size_t per_class, std::uint64_t seed) {
    Dataset ds;
    ds.num_classes = 2;
    ds.features = Mat(2 * per_class, 2);
    Rng rng(seed);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        int cls = i < per_class ? 0 : 1;
        double cx = cls == 0 ? -1.0 : 1.0;
        ds.features(i, 0) = cx + rng.normal(0.0, 0.25);
        ds.features(i, 1) = cx + rng.normal(0.0, 0.25);
        ds.labels.push_back(cls);
    }
    return ds;
}

}  // namespace

TEST_CASE("evaluate reports loss and accuracy over a dataset") {
    Dataset ds = blob_dataset(20, 3);
    NetworkArch arch({2, 2});
    Weights w;
    Mat wm(2, 2), bm(2, 1);
    // hand-built separator: class score = +/- (x0 + x1)
    wm(0, 0) = -1.0, wm(0, 1) = -1.0, wm(1, 0) = 1.0, wm(1, 1) = 1.0;
    bm(0, 0) = bm(1, 0) = 0.0;
    w.w.push_back(wm);
    w.b.push_back(bm);
    EvalMetrics m = evaluate(arch, w, ds);
    CHECK(m.acc == 1.0);
    CHECK(m.loss < 0.3);
    CHECK(m.loss > 0.0);
}

TEST_CASE("training a small classifier learns and is reproducible") {
    Dataset ds = blob_dataset(60, 8);
    NetworkArch arch({2, 16, 2});
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.batch_size = 16;
    cfg.lr = 5e-3;
    cfg.val_fraction = 0.2;
    cfg.seed = 4;
    TrainResult a = train_classifier(arch, InitScheme::mod_diag(), ds, cfg);
    REQUIRE(a.epochs.size() == 25);
    CHECK(a.best_val_acc >= 0.95);
    CHECK(a.best_epoch >= 1);
    // loss should clearly improve from the first epoch to the best one
    CHECK(a.epochs.back().train_loss < a.epochs.front().train_loss);

    TrainResult b = train_classifier(arch, InitScheme::mod_diag(), ds, cfg);
    for (std::size_t e = 0; e < a.epochs.size(); ++e) {
        CHECK(a.epochs[e].train_loss == b.epochs[e].train_loss);
        CHECK(a.epochs[e].val_loss == b.epochs[e].val_loss);
        CHECK(a.epochs[e].val_acc == b.epochs[e].val_acc);
    }
}

TEST_CASE("zero epochs returns initialized weights and no metrics") {
    Dataset ds = blob_dataset(10, 2);
    NetworkArch arch({2, 4, 2});
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 1;
    TrainResult r = train_classifier(arch, InitScheme::xavier_normal(), ds, cfg);
    CHECK(r.epochs.empty());
    CHECK(r.best_epoch == 0);
    CHECK(r.weights.w.size() == 2);
}

TEST_CASE("classifier training rejects unsupported optimizers and bad dims") {
    Dataset ds = blob_dataset(10, 2);
    TrainConfig cfg;
    cfg.optimizer = Optimizer::LBFGS;
    CHECK_THROWS_AS(train_classifier(NetworkArch({2, 4, 2}), InitScheme::mod_diag(), ds, cfg),
                    std::invalid_argument);
    TrainConfig ok;
    CHECK_THROWS_AS(train_classifier(NetworkArch({3, 4, 2}), InitScheme::mod_diag(), ds, ok),
                    std::invalid_argument);
}
