#include "g3/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <doctest.h>

#include "g3/error.hpp"
#include "support/random_graphs.hpp"

using g3::DiffusionMode;
using g3::Error;
using g3::ErrorCode;
using g3::Graph;
using g3::LaplacianKind;
using g3::MlpConfig;
using g3::Rng;
using g3::StateLayout;
using g3::TrainConfig;

namespace {

std::vector<Graph> regular_graphs(int count, int n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Graph> out;
    for (int i = 0; i < count; ++i) out.push_back(testsupport::random_connected_graph(n, p, rng));
    return out;
}

}  // namespace

TEST_CASE("make_batches splits same-size graphs by the cap") {
    auto graphs = regular_graphs(5, 8, 0.5, 11);
    Rng rng(1);
    auto batches = g3::make_batches(graphs, 2, rng);
    REQUIRE(batches.size() == 3);
    std::vector<std::size_t> sizes;
    for (const auto& b : batches) sizes.push_back(b.size());
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{1, 2, 2});
}

TEST_CASE("make_batches never mixes node counts") {
    std::vector<Graph> graphs;
    {
        Rng rng(7);
        graphs.push_back(testsupport::random_connected_graph(8, 0.5, rng));
        graphs.push_back(testsupport::random_connected_graph(8, 0.5, rng));
        graphs.push_back(testsupport::random_connected_graph(12, 0.5, rng));
    }
    Rng rng(2);
    auto batches = g3::make_batches(graphs, 4, rng);
    REQUIRE(batches.size() == 2);
    for (const auto& b : batches) {
        int n = graphs[static_cast<std::size_t>(b.front())].node_count();
        for (int idx : b) CHECK(graphs[static_cast<std::size_t>(idx)].node_count() == n);
    }
}

TEST_CASE("make_batches covers every graph exactly once and shuffles") {
    auto graphs = regular_graphs(20, 6, 0.6, 3);
    Rng rng(4);
    auto batches = g3::make_batches(graphs, 3, rng);
    std::vector<int> seen;
    for (const auto& b : batches) seen.insert(seen.end(), b.begin(), b.end());
    REQUIRE(seen.size() == graphs.size());
    std::vector<int> sorted = seen;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    CHECK(seen != sorted);  // shuffled order for this seed

    Rng rng_a(4), rng_b(4);
    CHECK(g3::make_batches(graphs, 3, rng_a) == g3::make_batches(graphs, 3, rng_b));
}

TEST_CASE("make_batches rejects an empty list") {
    std::vector<Graph> none;
    Rng rng(0);
    CHECK_THROWS_AS(g3::make_batches(none, 2, rng), Error);
    try {
        g3::make_batches(none, 2, rng);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyDataset);
    }
}

TEST_CASE("train regression targets match the generator recomputed from the observed state") {
    auto graphs = regular_graphs(3, 6, 0.6, 21);
    MlpConfig mlp;
    mlp.hidden_width = 16;
    mlp.n_max = 6;
    TrainConfig cfg;
    cfg.batch_size_max = 2;
    cfg.epochs = 2;
    cfg.seed = 5;
    cfg.diffusion.T = 4.0;

    std::vector<Eigen::MatrixXd> laplacians;
    std::vector<std::unique_ptr<g3::HeatKernel>> kernels;
    for (const auto& g : graphs) {
        laplacians.push_back(g3::laplacian(g, LaplacianKind::Combinatorial));
        kernels.push_back(std::make_unique<g3::HeatKernel>(g3::spectral_decompose(laplacians.back())));
    }

    int observed = 0;
    auto observer = [&](const g3::TrainObservation& obs) {
        ++observed;
        auto gi = static_cast<std::size_t>(obs.graph_index);
        CHECK(obs.t_raw >= cfg.diffusion.tau);
        CHECK(obs.t_raw <= cfg.diffusion.T);
        CHECK(obs.s_rescaled == 1.0 - obs.t_raw / cfg.diffusion.T);

        Eigen::MatrixXd x = g3::diffuse(graphs[gi].adjacency(), *kernels[gi], obs.t_raw,
                                        DiffusionMode::Symmetric);
        CHECK((obs.state - x).cwiseAbs().maxCoeff() == 0.0);
        Eigen::MatrixXd target =
            g3::true_generator(laplacians[gi], obs.state, cfg.diffusion.T, DiffusionMode::Symmetric);
        CHECK((obs.target - target).cwiseAbs().maxCoeff() == 0.0);
    };

    g3::train(graphs, mlp, cfg, observer);
    CHECK(observed == 6);  // 3 graphs x 2 epochs
}

TEST_CASE("train lowers the loss on a single graph") {
    auto graphs = regular_graphs(1, 8, 0.5, 31);
    MlpConfig mlp;
    mlp.hidden_width = 64;
    mlp.n_max = 8;
    TrainConfig cfg;
    cfg.batch_size_max = 1;
    cfg.epochs = 200;
    cfg.lr0 = 1e-3;
    cfg.seed = 9;
    cfg.diffusion.T = 6.0;

    auto [model, report] = g3::train(graphs, mlp, cfg);
    REQUIRE(report.epoch_losses.size() == 200);
    CHECK(report.iterations == 200);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 20; ++i) {
        head += report.epoch_losses[static_cast<std::size_t>(i)];
        tail += report.epoch_losses[report.epoch_losses.size() - 1 - static_cast<std::size_t>(i)];
    }
    CHECK(tail < head);  // smoothed loss strictly decreased
    CHECK(model.params.all_finite());
}

TEST_CASE("train stops at the first loss evaluation when the target is huge") {
    auto graphs = regular_graphs(2, 6, 0.6, 41);
    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 6;
    TrainConfig cfg;
    cfg.batch_size_max = 2;
    cfg.epochs = 50;
    cfg.seed = 1;
    cfg.loss_target = 1e30;

    auto [model, report] = g3::train(graphs, mlp, cfg);
    CHECK(report.iterations == 0);  // no parameter step taken
    CHECK(report.epoch_losses.size() == 1);
}

TEST_CASE("train is deterministic for a fixed seed") {
    auto graphs = regular_graphs(4, 7, 0.5, 51);
    MlpConfig mlp;
    mlp.hidden_width = 12;
    mlp.n_max = 7;
    TrainConfig cfg;
    cfg.batch_size_max = 2;
    cfg.epochs = 5;
    cfg.seed = 77;

    auto [model_a, report_a] = g3::train(graphs, mlp, cfg);
    auto [model_b, report_b] = g3::train(graphs, mlp, cfg);
    CHECK(report_a.epoch_losses == report_b.epoch_losses);
    CHECK(report_a.iterations == report_b.iterations);
    auto ta = model_a.params.tensors();
    auto tb = model_b.params.tensors();
    for (std::size_t k = 0; k < ta.size(); ++k)
        for (long i = 0; i < ta[k].size; ++i) CHECK(ta[k].data[i] == tb[k].data[i]);
}

TEST_CASE("learning rate decays on a plateau and never drops below the floor") {
    auto graphs = regular_graphs(1, 6, 0.6, 61);
    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 6;
    TrainConfig cfg;
    cfg.batch_size_max = 1;
    cfg.epochs = 300;
    cfg.lr0 = 1e-10;  // effectively frozen parameters, so the loss cannot improve
    cfg.lr_min = 1e-12;
    cfg.patience = 2;
    cfg.seed = 13;

    auto [model, report] = g3::train(graphs, mlp, cfg);
    CHECK(report.final_lr < cfg.lr0);
    CHECK(report.final_lr >= cfg.lr_min);

    cfg.lr_min = cfg.lr0 * 0.995;  // one decay step lands on the floor
    auto [model2, report2] = g3::train(graphs, mlp, cfg);
    CHECK(report2.final_lr == cfg.lr_min);
}

TEST_CASE("train validates its configuration") {
    auto graphs = regular_graphs(1, 6, 0.6, 71);
    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 6;
    TrainConfig cfg;
    cfg.epochs = 1;

    SUBCASE("empty dataset") {
        std::vector<Graph> none;
        CHECK_THROWS_AS(g3::train(none, mlp, cfg), Error);
    }
    SUBCASE("node count above capacity") {
        mlp.n_max = 5;
        try {
            g3::train(graphs, mlp, cfg);
            FAIL("expected DimensionExceeded");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DimensionExceeded);
        }
    }
    SUBCASE("random-walk laplacian is rejected") {
        cfg.laplacian = LaplacianKind::RandomWalk;
        try {
            g3::train(graphs, mlp, cfg);
            FAIL("expected InvalidArgument");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidArgument);
        }
    }
    SUBCASE("asymmetric mode needs the full-matrix layout") {
        cfg.diffusion.mode = DiffusionMode::Asymmetric;
        try {
            g3::train(graphs, mlp, cfg);
            FAIL("expected InvalidArgument");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidArgument);
        }
    }
    SUBCASE("covariates must match the graph list") {
        cfg.diffusion.mode = DiffusionMode::Asymmetric;
        mlp.layout = StateLayout::FullMatrix;
        cfg.omega = 2.0;
        try {
            g3::train(graphs, mlp, cfg);
            FAIL("expected DimensionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DimensionMismatch);
        }
    }
}

TEST_CASE("covariate-augmented training diffuses L + omega z z^T") {
    Rng rng(81);
    std::vector<Graph> graphs{testsupport::random_connected_graph(6, 0.6, rng)};
    Eigen::VectorXd z(6);
    z << 1, 1, 1, -1, -1, -1;

    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 6;
    mlp.layout = StateLayout::FullMatrix;
    TrainConfig cfg;
    cfg.batch_size_max = 1;
    cfg.epochs = 1;
    cfg.seed = 3;
    cfg.diffusion.mode = DiffusionMode::Asymmetric;
    cfg.omega = 2.5;
    cfg.covariates = {z};

    Eigen::MatrixXd L = g3::laplacian(graphs[0], LaplacianKind::Combinatorial);
    g3::HeatKernel kernel(g3::spectral_decompose(L));
    Eigen::MatrixXd y0 = L + cfg.omega * z * z.transpose();

    int observed = 0;
    auto observer = [&](const g3::TrainObservation& obs) {
        ++observed;
        Eigen::MatrixXd x = g3::diffuse(y0, kernel, obs.t_raw, DiffusionMode::Asymmetric);
        CHECK((obs.state - x).cwiseAbs().maxCoeff() == 0.0);
        Eigen::MatrixXd target =
            g3::true_generator(L, obs.state, cfg.diffusion.T, DiffusionMode::Asymmetric);
        CHECK((obs.target - target).cwiseAbs().maxCoeff() == 0.0);
    };
    g3::train(graphs, mlp, cfg, observer);
    CHECK(observed == 1);
}
