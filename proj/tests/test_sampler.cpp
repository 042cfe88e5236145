#include "g3/sampler.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "g3/error.hpp"
#include "support/random_graphs.hpp"

using g3::DiffusionMode;
using g3::Error;
using g3::ErrorCode;
using g3::Graph;
using g3::MlpConfig;
using g3::Rng;
using g3::SampleConfig;
using g3::StateLayout;
using g3::SurrogateGenerator;

namespace {

Graph complete_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return Graph::from_edges(n, edges);
}

}  // namespace

TEST_CASE("symmetric base has total mass 2 n <d> and is symmetric") {
    Rng rng(3);
    int n = 8;
    double avg_degree = 5.0;
    Eigen::MatrixXd x0 = g3::sample_base_symmetric(n, 1.0, avg_degree, rng);
    CHECK((x0 - x0.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(x0.minCoeff() >= 0.0);
    CHECK(x0.sum() == doctest::Approx(2.0 * n * avg_degree).epsilon(1e-8));
}

TEST_CASE("symmetric base concentrates at 2<d>/n for huge alpha") {
    Rng rng(4);
    int n = 6;
    double avg_degree = 3.0;
    Eigen::MatrixXd x0 = g3::sample_base_symmetric(n, 1e6, avg_degree, rng);
    CHECK((x0.array() - 2.0 * avg_degree / n).abs().maxCoeff() < 1e-2);
}

TEST_CASE("symmetric base is reproducible from the seed") {
    Rng a(99), b(99);
    Eigen::MatrixXd xa = g3::sample_base_symmetric(5, 0.7, 2.0, a);
    Eigen::MatrixXd xb = g3::sample_base_symmetric(5, 0.7, 2.0, b);
    CHECK((xa - xb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("asymmetric base is rank one with log-normal column scales") {
    Rng rng(7);
    int n = 7;
    double mu = std::log(0.5);

    SUBCASE("zero variance pins every scale to e^mu") {
        Eigen::MatrixXd x0 = g3::sample_base_asymmetric(n, 1.0, mu, 0.0, rng);
        Eigen::VectorXd col_sums = x0.colwise().sum();
        for (int j = 0; j < n; ++j)
            CHECK(col_sums[j] == doctest::Approx(std::exp(mu)).epsilon(1e-10));
    }
    SUBCASE("column sums reproduce the scale vector") {
        Eigen::MatrixXd x0 = g3::sample_base_asymmetric(n, 1.0, mu, 0.25, rng);
        CHECK(x0.minCoeff() >= 0.0);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(x0);
        CHECK(svd.singularValues()[1] < 1e-10);
    }
}

TEST_CASE("conditional base follows the rank-one covariate formula") {
    Rng rng(11);
    int n = 6;
    double omega = 3.0;

    SUBCASE("all-ones covariates collapse to a scaled simplex column") {
        Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
        Rng twin(11);
        Eigen::VectorXd x = twin.dirichlet(n, 1.0);
        Eigen::MatrixXd x0 = g3::sample_base_conditional(z, omega, 1.0, rng);
        Eigen::MatrixXd expected = (omega * x.dot(z) / n) * (x * z.transpose());
        CHECK((x0 - expected).cwiseAbs().maxCoeff() == 0.0);
        for (int j = 1; j < n; ++j)
            CHECK((x0.col(j) - x0.col(0)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("zero covariates give the zero matrix") {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd x0 = g3::sample_base_conditional(z, omega, 1.0, rng);
        CHECK(x0.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("two-block sign pattern follows the covariate signs") {
        Eigen::VectorXd z(n);
        z << 1, 1, 1, -1, -1, -1;
        Eigen::MatrixXd x0 = g3::sample_base_conditional(z, omega, 1.0, rng);
        double lead = x0(0, 0);  // x~ entries are positive, so sign(x0_ij) = sign(s z_j)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double expected_sign = (lead > 0 ? 1.0 : -1.0) * (z[j] > 0 ? 1.0 : -1.0);
                CHECK(x0(i, j) * expected_sign > 0.0);
            }
    }
}

TEST_CASE("euler_sample with a zero model returns the projected base") {
    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 6;
    SurrogateGenerator model{mlp, g3::MlpParameters::zeros(mlp)};

    SampleConfig cfg;
    cfg.n = 6;
    cfg.M = 10;
    cfg.alpha = 0.5;
    cfg.avg_degree_scale = 4.0;

    Rng rng(21);
    Eigen::MatrixXd terminal = g3::euler_sample(model, cfg, rng);

    Rng twin(21);
    Eigen::MatrixXd base = g3::sample_base_symmetric(cfg.n, cfg.alpha, cfg.avg_degree_scale, twin);
    Eigen::MatrixXd expected = base.cwiseMax(cfg.clip_lo).cwiseMin(cfg.clip_hi);
    expected.diagonal().setZero();
    CHECK((terminal - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("euler_sample with M=1 is one clipped explicit step") {
    Rng init(5);
    MlpConfig mlp;
    mlp.hidden_width = 12;
    mlp.n_max = 5;
    SurrogateGenerator model = SurrogateGenerator::init(mlp, init);

    SampleConfig cfg;
    cfg.n = 5;
    cfg.M = 1;
    cfg.avg_degree_scale = 2.0;

    Rng rng(31);
    Eigen::MatrixXd terminal = g3::euler_sample(model, cfg, rng);

    Rng twin(31);
    Eigen::MatrixXd base = g3::sample_base_symmetric(cfg.n, cfg.alpha, cfg.avg_degree_scale, twin);
    Eigen::VectorXd x = g3::flatten_state(base, mlp.layout);
    Eigen::VectorXd stepped = x + g3::forward(model, x, 0.0, cfg.n);
    Eigen::MatrixXd expected =
        g3::unflatten_state(stepped.cwiseMax(cfg.clip_lo).cwiseMin(cfg.clip_hi), mlp.layout);
    CHECK((terminal - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric-mode terminal states are symmetric, zero-diagonal, and clipped") {
    Rng init(6);
    MlpConfig mlp;
    mlp.hidden_width = 16;
    mlp.n_max = 6;
    mlp.layout = StateLayout::FullMatrix;
    SurrogateGenerator model = SurrogateGenerator::init(mlp, init);

    SampleConfig cfg;
    cfg.n = 6;
    cfg.M = 7;
    cfg.avg_degree_scale = 3.0;

    Rng rng(41);
    Eigen::MatrixXd terminal = g3::euler_sample(model, cfg, rng);
    CHECK((terminal - terminal.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(terminal.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(terminal.minCoeff() >= cfg.clip_lo);
    CHECK(terminal.maxCoeff() <= cfg.clip_hi);
}

TEST_CASE("asymmetric sampling integrates the full-matrix state") {
    Rng init(8);
    MlpConfig mlp;
    mlp.hidden_width = 16;
    mlp.n_max = 5;
    mlp.layout = StateLayout::FullMatrix;
    SurrogateGenerator model = SurrogateGenerator::init(mlp, init);

    SampleConfig cfg;
    cfg.n = 5;
    cfg.M = 9;
    cfg.mode = DiffusionMode::Asymmetric;
    cfg.degree_log_mean = std::log(0.4);
    cfg.degree_log_var = 0.1;
    cfg.clip_lo = -2.0;
    cfg.clip_hi = 2.0;

    Rng rng(51);
    Eigen::MatrixXd terminal = g3::euler_sample(model, cfg, rng);
    CHECK(terminal.allFinite());
    CHECK(terminal.minCoeff() >= cfg.clip_lo);
    CHECK(terminal.maxCoeff() <= cfg.clip_hi);
}

TEST_CASE("batched sampling matches per-item substreams") {
    Rng init(9);
    MlpConfig mlp;
    mlp.hidden_width = 16;
    mlp.n_max = 6;
    SurrogateGenerator model = SurrogateGenerator::init(mlp, init);

    SampleConfig cfg;
    cfg.n = 6;
    cfg.M = 20;
    cfg.avg_degree_scale = 3.0;

    Rng root(61);
    auto batch = g3::euler_sample_many(model, cfg, 3, root);
    REQUIRE(batch.size() == 3);
    for (int i = 0; i < 3; ++i) {
        Rng item = root.substream("item", static_cast<std::uint64_t>(i));
        Eigen::MatrixXd single = g3::euler_sample(model, cfg, item);
        CHECK((batch[static_cast<std::size_t>(i)] - single).cwiseAbs().maxCoeff() < 1e-9);
    }

    Rng again(61);
    auto batch2 = g3::euler_sample_many(model, cfg, 3, again);
    for (std::size_t i = 0; i < batch.size(); ++i)
        CHECK((batch[i] - batch2[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("euler_sample aborts on non-finite dynamics") {
    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 4;
    SurrogateGenerator model{mlp, g3::MlpParameters::zeros(mlp)};
    model.params.w4(0, 0) = std::numeric_limits<double>::quiet_NaN();

    SampleConfig cfg;
    cfg.n = 4;
    cfg.M = 3;

    Rng rng(71);
    try {
        g3::euler_sample(model, cfg, rng);
        FAIL("expected NonFiniteState");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteState);
        CHECK(e.numerical_abort());
    }
}

TEST_CASE("euler_sample validates its configuration") {
    Rng init(10);
    MlpConfig mlp;
    mlp.hidden_width = 8;
    mlp.n_max = 4;
    SurrogateGenerator model = SurrogateGenerator::init(mlp, init);
    Rng rng(81);

    SampleConfig cfg;
    cfg.n = 6;  // beyond n_max
    try {
        g3::euler_sample(model, cfg, rng);
        FAIL("expected DimensionExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionExceeded);
    }

    cfg.n = 4;
    cfg.mode = DiffusionMode::Asymmetric;  // lower-triangle layout cannot hold it
    CHECK_THROWS_AS(g3::euler_sample(model, cfg, rng), Error);

    cfg.mode = DiffusionMode::Symmetric;
    cfg.clip_lo = 1.0;
    cfg.clip_hi = 0.0;
    CHECK_THROWS_AS(g3::euler_sample(model, cfg, rng), Error);
}

TEST_CASE("threshold_to_graph binarises the symmetrised matrix") {
    SUBCASE("dense constant matrix becomes complete") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 5, 0.9);
        Graph g = g3::threshold_to_graph(x, 0.5);
        CHECK(g.edge_count() == 10);
    }
    SUBCASE("zero matrix becomes empty") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 4);
        Graph g = g3::threshold_to_graph(x, 0.2);
        CHECK(g.edge_count() == 0);
    }
    SUBCASE("asymmetric entries are averaged before the cut") {
        Eigen::MatrixXd x(2, 2);
        x << 0, 1, 0, 0;
        Graph g = g3::threshold_to_graph(x, 0.4);
        CHECK(g.edge_count() == 1);
        CHECK(g.has_edge(0, 1));
        Graph h = g3::threshold_to_graph(x, 0.6);  // mean 0.5 falls below 0.6
        CHECK(h.edge_count() == 0);
    }
}

TEST_CASE("bernoulli_to_graph uses clamped entries as edge probabilities") {
    Rng rng(91);
    Eigen::MatrixXd sure = Eigen::MatrixXd::Constant(4, 4, 1.7);
    CHECK(g3::bernoulli_to_graph(sure, rng).edge_count() == 6);
    Eigen::MatrixXd never = Eigen::MatrixXd::Constant(4, 4, -0.3);
    CHECK(g3::bernoulli_to_graph(never, rng).edge_count() == 0);

    Eigen::MatrixXd coin = Eigen::MatrixXd::Constant(6, 6, 0.5);
    Rng a(13), b(13);
    Graph ga = g3::bernoulli_to_graph(coin, a);
    Graph gb = g3::bernoulli_to_graph(coin, b);
    CHECK(ga.edge_list() == gb.edge_list());
}

TEST_CASE("conditional_to_graph inverts the covariate augmentation") {
    Rng rng(101);
    Graph g = testsupport::random_connected_graph(8, 0.4, rng);
    Eigen::VectorXd z(8);
    z << 1, 1, 1, 1, -1, -1, -1, -1;
    double omega = 2.0;
    Eigen::MatrixXd x = omega * z * z.transpose() - g.adjacency();
    Graph recovered = g3::conditional_to_graph(x, z, omega);
    CHECK(recovered.edge_list() == g.edge_list());
}

TEST_CASE("estimate_threshold averages per-graph edge densities") {
    Graph k3 = complete_graph(3);
    CHECK(g3::estimate_threshold({k3}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    Graph empty4 = Graph::from_edges(4, {});
    CHECK(g3::estimate_threshold({empty4}) == 0.0);
    Graph empty3 = Graph::from_edges(3, {});
    CHECK(g3::estimate_threshold({k3, empty3}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(g3::estimate_threshold({}), Error);
}

TEST_CASE("estimate_avg_degree_scale follows the training-set formula") {
    Graph k3 = complete_graph(3);
    CHECK(g3::estimate_avg_degree_scale({k3}) == doctest::Approx(4.0).epsilon(1e-12));
    Graph p2 = Graph::from_edges(2, {{0, 1}});
    CHECK(g3::estimate_avg_degree_scale({p2}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g3::estimate_avg_degree_scale({k3, p2}) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("estimate_degree_log_stats pins the mean to log(<d>/n)") {
    Graph k3 = complete_graph(3);
    auto [mu, var] = g3::estimate_degree_log_stats({k3});
    CHECK(mu == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
    CHECK(var == 0.0);  // all degrees equal
}

TEST_CASE("true generator is permutation equivariant") {
    Rng rng(111);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = testsupport::random_connected_graph(7, 0.5, rng);
        Eigen::MatrixXd L = g3::laplacian(g, g3::LaplacianKind::Combinatorial);
        Eigen::MatrixXd x = testsupport::random_symmetric(7, rng);

        std::vector<int> perm(7);
        for (int i = 0; i < 7; ++i) perm[static_cast<std::size_t>(i)] = i;
        rng.shuffle(perm);
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(7, 7);
        for (int i = 0; i < 7; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;

        for (auto mode : {DiffusionMode::Symmetric, DiffusionMode::Asymmetric}) {
            Eigen::MatrixXd lhs =
                g3::true_generator(p * L * p.transpose(), p * x * p.transpose(), 4.0, mode);
            Eigen::MatrixXd rhs = p * g3::true_generator(L, x, 4.0, mode) * p.transpose();
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}
