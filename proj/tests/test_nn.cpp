#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "g3/error.hpp"
#include "g3/nn.hpp"
#include "g3/rng.hpp"
#include "support/gradient_check.hpp"

using g3::BatchItem;
using g3::Error;
using g3::MlpConfig;
using g3::StateLayout;
using g3::SurrogateGenerator;

namespace {

double loss_of(const SurrogateGenerator& model, const std::vector<BatchItem>& batch) {
    double total = 0.0;
    for (const BatchItem& item : batch) {
        Eigen::VectorXd y = forward(model, item.x, item.t, item.n);
        total += (y - item.target).squaredNorm();
    }
    return total / static_cast<double>(batch.size());
}

std::vector<BatchItem> random_batch(const SurrogateGenerator& model, int n, int count,
                                    g3::Rng& rng) {
    std::vector<BatchItem> batch;
    const int d = model.feature_dim(n);
    for (int k = 0; k < count; ++k) {
        BatchItem item;
        item.n = n;
        item.t = rng.uniform();
        item.x = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
        item.target =
            Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
        batch.push_back(std::move(item));
    }
    return batch;
}

}  // namespace

TEST_CASE("state dimensions per layout") {
    CHECK(g3::state_dim(StateLayout::LowerTriangle, 4) == 6);
    CHECK(g3::state_dim(StateLayout::LowerTriangle, 2) == 1);
    CHECK(g3::state_dim(StateLayout::FullMatrix, 4) == 16);
}

TEST_CASE("flatten_lower basics") {
    Eigen::MatrixXd m2(2, 2);
    m2 << 0, 0.7, 0.7, 0;
    Eigen::VectorXd v = g3::flatten_lower(m2);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == 0.7);

    Eigen::MatrixXd k3 = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
    CHECK(g3::flatten_lower(k3).isApprox(Eigen::Vector3d(1, 1, 1)));
}

TEST_CASE("flatten_lower order is (1,0),(2,0),(2,1),(3,0),...") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    int code = 10;
    for (int i = 1; i < 4; ++i)
        for (int j = 0; j < i; ++j) {
            m(i, j) = code;
            m(j, i) = code;
            ++code;
        }
    Eigen::VectorXd v = g3::flatten_lower(m);
    REQUIRE(v.size() == 6);
    for (int k = 0; k < 6; ++k) CHECK(v[k] == 10 + k);
}

TEST_CASE("unflatten_lower round trip drops the diagonal") {
    g3::Rng rng(301);
    Eigen::MatrixXd x(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = i; j < 5; ++j) {
            double val = rng.normal();
            x(i, j) = val;
            x(j, i) = val;
        }
    Eigen::MatrixXd back = g3::unflatten_lower(g3::flatten_lower(x));
    Eigen::MatrixXd want = x;
    want.diagonal().setZero();
    CHECK((back - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("flatten_lower rejects asymmetric matrices") {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 0.5, 0;
    CHECK_THROWS_AS(g3::flatten_lower(m), Error);
}

TEST_CASE("full-matrix layout round trip") {
    g3::Rng rng(302);
    Eigen::MatrixXd x(3, 3);
    for (int i = 0; i < 9; ++i) x.data()[i] = rng.normal();
    Eigen::VectorXd v = g3::flatten_state(x, StateLayout::FullMatrix);
    REQUIRE(v.size() == 9);
    CHECK(v[1] == x(0, 1));  // row-major ordering
    Eigen::MatrixXd back = g3::unflatten_state(v, StateLayout::FullMatrix);
    CHECK((back - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero model maps everything to zero") {
    MlpConfig cfg{8, 4, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model{cfg, g3::MlpParameters::zeros(cfg)};
    Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 1.5);
    CHECK(forward(model, x, 0.3, 4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity-wired model without layer norm is a ReLU pass-through") {
    MlpConfig cfg{8, 4, 4, false, StateLayout::LowerTriangle};
    SurrogateGenerator model{cfg, g3::MlpParameters::zeros(cfg)};
    const int d = 6;
    model.params.w1.block(0, 0, d, d).setIdentity();
    model.params.w2.setIdentity();
    model.params.w3.setIdentity();
    model.params.w4.block(0, 0, d, d).setIdentity();

    Eigen::VectorXd x(d);
    x << 0.5, -1.2, 2.0, -0.3, 0.0, 4.0;
    Eigen::VectorXd y = forward(model, x, 0.9, 4);
    CHECK((y - x.cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("masked evaluation equals a fresh model built from the sub-blocks") {
    g3::Rng rng(303);
    MlpConfig big_cfg{12, 6, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator big = SurrogateGenerator::init(big_cfg, rng);

    const int n = 4;
    const int d = g3::state_dim(StateLayout::LowerTriangle, n);
    MlpConfig small_cfg{12, n, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator small{small_cfg, g3::MlpParameters::zeros(small_cfg)};
    small.params = big.params;
    small.params.w1.resize(12, d + 1);
    small.params.w1.leftCols(d) = big.params.w1.leftCols(d);
    small.params.w1.col(d) = big.params.w1.col(big.params.w1.cols() - 1);
    small.params.w4 = big.params.w4.topRows(d);
    small.params.b4 = big.params.b4.head(d);

    Eigen::VectorXd x =
        Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
    Eigen::VectorXd y_masked = forward(big, x, 0.4, n);
    Eigen::VectorXd y_small = forward(small, x, 0.4, n);
    CHECK((y_masked - y_small).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("outputs ignore inactive weight sub-blocks") {
    g3::Rng rng(304);
    MlpConfig cfg{10, 6, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
    const int n = 4;
    const int d = g3::state_dim(StateLayout::LowerTriangle, n);
    Eigen::VectorXd x =
        Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.normal(); });
    Eigen::VectorXd before = forward(model, x, 0.2, n);

    const int dmax = model.feature_dim();
    model.params.w1.block(0, d, 10, dmax - d).setConstant(123.0);
    model.params.w4.bottomRows(dmax - d).setConstant(-7.0);
    model.params.b4.tail(dmax - d).setConstant(9.0);
    Eigen::VectorXd after = forward(model, x, 0.2, n);
    CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("active node count above n_max is rejected") {
    g3::Rng rng(305);
    MlpConfig cfg{4, 4, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
    CHECK_THROWS_AS(forward(model, x, 0.1, 5), Error);
}

TEST_CASE("loss is zero with zero gradients when prediction equals target") {
    MlpConfig cfg{6, 4, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model{cfg, g3::MlpParameters::zeros(cfg)};
    BatchItem item;
    item.n = 4;
    item.t = 0.5;
    item.x = Eigen::VectorXd::Constant(6, 0.8);
    item.target = Eigen::VectorXd::Zero(6);
    auto [loss, grads] = loss_and_gradients(model, {item});
    CHECK(loss == 0.0);
    for (const auto& t : grads.tensors())
        for (long i = 0; i < t.size; ++i) CHECK(t.data[i] == 0.0);
}

TEST_CASE("scalar chain reduces to the 1-d linear-regression gradient") {
    MlpConfig cfg{1, 2, 4, false, StateLayout::LowerTriangle};
    SurrogateGenerator model{cfg, g3::MlpParameters::zeros(cfg)};
    const double w = 0.9, x = 0.7, y = 0.2;
    model.params.w1(0, 0) = w;
    model.params.w2(0, 0) = 1.0;
    model.params.w3(0, 0) = 1.0;
    model.params.w4(0, 0) = 1.0;

    BatchItem item;
    item.n = 2;
    item.t = 0.0;
    item.x = Eigen::VectorXd::Constant(1, x);
    item.target = Eigen::VectorXd::Constant(1, y);
    auto [loss, grads] = loss_and_gradients(model, {item});
    CHECK(loss == doctest::Approx((w * x - y) * (w * x - y)));
    CHECK(grads.w1(0, 0) == doctest::Approx(2.0 * x * (w * x - y)));
    CHECK(grads.w4(0, 0) == doctest::Approx(2.0 * (w * x - y) * (w * x)));
}

TEST_CASE("batch validation") {
    g3::Rng rng(306);
    MlpConfig cfg{4, 5, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
    CHECK_THROWS_AS(loss_and_gradients(model, {}), Error);

    auto batch = random_batch(model, 4, 2, rng);
    auto item5 = random_batch(model, 5, 1, rng);
    batch.push_back(item5[0]);
    CHECK_THROWS_AS(loss_and_gradients(model, batch), Error);
}

TEST_CASE("analytic gradients match central finite differences") {
    g3::Rng rng(307);
    int checked_configs = 0;
    const double h = 1e-5;
    for (int rep = 0; rep < 20; ++rep) {
        MlpConfig cfg;
        cfg.hidden_width = 2 + static_cast<int>(rng.uniform_int(15));  // <= 16
        cfg.n_max = 3 + static_cast<int>(rng.uniform_int(4));          // <= 6
        cfg.use_layer_norm = rep % 3 != 2;
        cfg.layout = rep % 4 == 3 ? StateLayout::FullMatrix : StateLayout::LowerTriangle;
        SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
        int n = cfg.n_max - static_cast<int>(rng.uniform_int(2));
        auto batch = testsupport::smooth_random_batch(
            model, n, 1 + static_cast<int>(rng.uniform_int(3)), rng);
        CHECK(testsupport::max_grad_rel_error(model, batch, h) <= 1e-4);
        ++checked_configs;
    }
    CHECK(checked_configs == 20);
}

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
    g3::Rng rng(308);
    MlpConfig cfg{4, 3, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
    SurrogateGenerator before = model;
    g3::AdamState state = g3::AdamState::init(cfg);
    adam_step(model, g3::MlpParameters::zeros(cfg), state, 1e-2);
    auto a = model.params.tensors();
    auto b = before.params.tensors();
    for (std::size_t k = 0; k < a.size(); ++k)
        for (long i = 0; i < a[k].size; ++i) CHECK(a[k].data[i] == b[k].data[i]);
}

TEST_CASE("first adam step moves against the gradient sign at learning-rate scale") {
    MlpConfig cfg{2, 3, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model{cfg, g3::MlpParameters::zeros(cfg)};
    g3::GradientBundle grads = g3::MlpParameters::zeros(cfg);
    grads.w1(0, 0) = 3.7;
    grads.w1(1, 1) = -0.04;
    g3::AdamState state = g3::AdamState::init(cfg);
    adam_step(model, grads, state, 1e-3);
    CHECK(model.params.w1(0, 0) == doctest::Approx(-1e-3).epsilon(1e-4));
    CHECK(model.params.w1(1, 1) == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(model.params.w1(0, 1) == 0.0);
}

TEST_CASE("two adam steps shrink a scalar quadratic") {
    MlpConfig cfg{1, 2, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model{cfg, g3::MlpParameters::zeros(cfg)};
    model.params.w1(0, 0) = 1.0;
    g3::AdamState state = g3::AdamState::init(cfg);
    double f0 = model.params.w1(0, 0) * model.params.w1(0, 0);
    for (int step = 0; step < 2; ++step) {
        g3::GradientBundle grads = g3::MlpParameters::zeros(cfg);
        grads.w1(0, 0) = 2.0 * model.params.w1(0, 0);
        adam_step(model, grads, state, 0.05);
    }
    double f2 = model.params.w1(0, 0) * model.params.w1(0, 0);
    CHECK(f2 < f0);
}

TEST_CASE("glorot init respects its bounds and sets unit gains") {
    g3::Rng rng(309);
    MlpConfig cfg{16, 5, 4, true, StateLayout::LowerTriangle};
    SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
    double limit1 = std::sqrt(6.0 / (model.input_dim() + 16));
    CHECK(model.params.w1.cwiseAbs().maxCoeff() <= limit1);
    CHECK(model.params.w1.cwiseAbs().maxCoeff() > 0.0);
    CHECK(model.params.b1.cwiseAbs().maxCoeff() == 0.0);
    CHECK((model.params.ln2_gain.array() == 1.0).all());
    CHECK((model.params.ln3_offset.array() == 0.0).all());
}

TEST_CASE("training steps are bit-deterministic for a fixed seed") {
    auto run = [] {
        g3::Rng rng(310);
        MlpConfig cfg{8, 4, 4, true, StateLayout::LowerTriangle};
        SurrogateGenerator model = SurrogateGenerator::init(cfg, rng);
        g3::AdamState state = g3::AdamState::init(cfg);
        auto batch = random_batch(model, 4, 3, rng);
        for (int i = 0; i < 5; ++i) {
            auto [loss, grads] = loss_and_gradients(model, batch);
            (void)loss;
            adam_step(model, grads, state, 1e-3);
        }
        return model;
    };
    SurrogateGenerator a = run();
    SurrogateGenerator b = run();
    auto av = a.params.tensors();
    auto bv = b.params.tensors();
    for (std::size_t k = 0; k < av.size(); ++k)
        for (long i = 0; i < av[k].size; ++i) CHECK(av[k].data[i] == bv[k].data[i]);
}
