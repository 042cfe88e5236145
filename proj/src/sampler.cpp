#include "g3/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "g3/error.hpp"

namespace g3 {

namespace {

void validate(const SurrogateGenerator& model, const SampleConfig& cfg) {
    if (cfg.n < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 2");
    if (cfg.M < 1) throw Error(ErrorCode::InvalidArgument, "need M >= 1");
    if (cfg.alpha <= 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    if (cfg.clip_lo >= cfg.clip_hi)
        throw Error(ErrorCode::InvalidArgument, "clip bounds must satisfy lo < hi");
    if (cfg.avg_degree_scale < 0.0)
        throw Error(ErrorCode::InvalidArgument, "avg_degree_scale must be nonnegative");
    if (cfg.degree_log_var < 0.0)
        throw Error(ErrorCode::InvalidArgument, "degree_log_var must be nonnegative");
    if (cfg.n > model.config.n_max)
        throw Error(ErrorCode::DimensionExceeded,
                    "n = " + std::to_string(cfg.n) + " exceeds model capacity n_max = " +
                        std::to_string(model.config.n_max));
    if (cfg.mode == DiffusionMode::Asymmetric && model.config.layout != StateLayout::FullMatrix)
        throw Error(ErrorCode::InvalidArgument,
                    "asymmetric sampling needs a full-matrix state layout");
    if (cfg.omega > 0.0) {
        if (cfg.mode != DiffusionMode::Asymmetric)
            throw Error(ErrorCode::InvalidArgument, "covariate base requires asymmetric mode");
        if (cfg.covariates.size() != cfg.n)
            throw Error(ErrorCode::DimensionMismatch, "covariate vector length must equal n");
    }
}

Eigen::MatrixXd draw_base(const SampleConfig& cfg, Rng& rng) {
    if (cfg.omega > 0.0) return sample_base_conditional(cfg.covariates, cfg.omega, cfg.alpha, rng);
    if (cfg.mode == DiffusionMode::Asymmetric)
        return sample_base_asymmetric(cfg.n, cfg.alpha, cfg.degree_log_mean, cfg.degree_log_var,
                                      rng);
    return sample_base_symmetric(cfg.n, cfg.alpha, cfg.avg_degree_scale, rng);
}

// All states advance in lockstep as columns of one feature matrix.
std::vector<Eigen::MatrixXd> integrate(const SurrogateGenerator& model, const SampleConfig& cfg,
                                       const std::vector<Eigen::MatrixXd>& bases) {
    const StateLayout layout = model.config.layout;
    const int d = state_dim(layout, cfg.n);
    const int k = static_cast<int>(bases.size());
    const double delta = 1.0 / cfg.M;
    const bool refold = cfg.mode == DiffusionMode::Symmetric && layout == StateLayout::FullMatrix;

    Eigen::MatrixXd xs(d, k);
    for (int i = 0; i < k; ++i) xs.col(i) = flatten_state(bases[static_cast<std::size_t>(i)], layout);
    Eigen::VectorXd ts(k);

    for (int m = 0; m < cfg.M; ++m) {
        ts.setConstant(static_cast<double>(m) / cfg.M);
        xs += delta * forward_batch(model, xs, ts, cfg.n);
        if (!xs.allFinite())
            throw Error(ErrorCode::NonFiniteState,
                        "state became non-finite at step " + std::to_string(m));
        xs = xs.cwiseMax(cfg.clip_lo).cwiseMin(cfg.clip_hi);
        if (refold) {
            for (int i = 0; i < k; ++i) {
                Eigen::MatrixXd z = unflatten_state(xs.col(i), layout);
                z = (0.5 * (z + z.transpose())).eval();
                z.diagonal().setZero();
                xs.col(i) = flatten_state(z, layout);
            }
        }
    }

    std::vector<Eigen::MatrixXd> out;
    out.reserve(bases.size());
    for (int i = 0; i < k; ++i) out.push_back(unflatten_state(xs.col(i), layout));
    return out;
}

}  // namespace

Eigen::MatrixXd sample_base_symmetric(int n, double alpha, double avg_degree, Rng& rng) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 2");
    if (alpha <= 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    if (avg_degree < 0.0) throw Error(ErrorCode::InvalidArgument, "avg_degree must be nonnegative");
    Eigen::MatrixXd aux(n, n);
    for (int j = 0; j < n; ++j) aux.col(j) = rng.dirichlet(n, alpha);
    return avg_degree * (aux + aux.transpose());
}

Eigen::MatrixXd sample_base_asymmetric(int n, double alpha, double degree_log_mean,
                                       double degree_log_var, Rng& rng) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 2");
    if (alpha <= 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    if (degree_log_var < 0.0)
        throw Error(ErrorCode::InvalidArgument, "degree_log_var must be nonnegative");
    Eigen::VectorXd x = rng.dirichlet(n, alpha);
    Eigen::VectorXd v(n);
    const double sd = std::sqrt(degree_log_var);
    for (int i = 0; i < n; ++i) v[i] = std::exp(degree_log_mean + sd * rng.normal());
    return x * v.transpose();
}

Eigen::MatrixXd sample_base_conditional(const Eigen::VectorXd& z, double omega_hat, double alpha,
                                        Rng& rng) {
    if (omega_hat <= 0.0) throw Error(ErrorCode::InvalidArgument, "omega_hat must be positive");
    if (alpha <= 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    const int n = static_cast<int>(z.size());
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need n >= 2");
    if (!z.allFinite()) throw Error(ErrorCode::InvalidArgument, "covariates must be finite");
    Eigen::VectorXd x = rng.dirichlet(n, alpha);
    return (omega_hat * x.dot(z) / n) * (x * z.transpose());
}

Eigen::MatrixXd euler_sample(const SurrogateGenerator& model, const SampleConfig& cfg, Rng& rng) {
    validate(model, cfg);
    std::vector<Eigen::MatrixXd> bases;
    bases.push_back(draw_base(cfg, rng));
    return integrate(model, cfg, bases).front();
}

std::vector<Eigen::MatrixXd> euler_sample_many(const SurrogateGenerator& model,
                                               const SampleConfig& cfg, int count, Rng& rng) {
    validate(model, cfg);
    if (count < 0) throw Error(ErrorCode::InvalidArgument, "count must be nonnegative");
    if (count == 0) return {};
    std::vector<Eigen::MatrixXd> bases;
    bases.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng item = rng.substream("item", static_cast<std::uint64_t>(i));
        bases.push_back(draw_base(cfg, item));
    }
    return integrate(model, cfg, bases);
}

Graph threshold_to_graph(const Eigen::MatrixXd& x, double c) {
    if (x.rows() != x.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
    if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd sym = 0.5 * (x + x.transpose());
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && sym(i, j) >= c) adj(i, j) = 1.0;
    return Graph::from_adjacency(adj);
}

Graph bernoulli_to_graph(const Eigen::MatrixXd& x, Rng& rng) {
    if (x.rows() != x.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd sym = 0.5 * (x + x.transpose());
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = std::clamp(sym(i, j), 0.0, 1.0);
            if (rng.uniform() < p) {
                adj(i, j) = 1.0;
                adj(j, i) = 1.0;
            }
        }
    return Graph::from_adjacency(adj);
}

Graph conditional_to_graph(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, double omega_hat) {
    if (x.rows() != x.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
    if (z.size() != x.rows())
        throw Error(ErrorCode::DimensionMismatch, "covariate vector length must match the matrix");
    if (omega_hat <= 0.0) throw Error(ErrorCode::InvalidArgument, "omega_hat must be positive");
    Eigen::MatrixXd recovered = omega_hat * z * z.transpose() - x;
    return threshold_to_graph(recovered, 0.5);
}

double estimate_threshold(const std::vector<Graph>& train_graphs) {
    if (train_graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no graphs");
    double acc = 0.0;
    for (const auto& g : train_graphs) {
        double n = g.node_count();
        acc += g.adjacency().cwiseAbs().sum() / (n * n);
    }
    return acc / static_cast<double>(train_graphs.size());
}

double estimate_avg_degree_scale(const std::vector<Graph>& train_graphs) {
    if (train_graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no graphs");
    double acc = 0.0;
    for (const auto& g : train_graphs)
        acc += 2.0 * g.adjacency().cwiseAbs().sum() / g.node_count();
    return acc / static_cast<double>(train_graphs.size());
}

std::pair<double, double> estimate_degree_log_stats(const std::vector<Graph>& train_graphs) {
    if (train_graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no graphs");
    double scale = estimate_avg_degree_scale(train_graphs);
    double mean_n = 0.0;
    for (const auto& g : train_graphs) mean_n += g.node_count();
    mean_n /= static_cast<double>(train_graphs.size());
    if (scale <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "degree scale is zero; log statistics undefined");
    double mu = std::log(scale / mean_n);

    std::vector<double> logs;
    for (const auto& g : train_graphs) {
        Eigen::VectorXd deg = g.degree_vector();
        for (int i = 0; i < deg.size(); ++i)
            if (deg[i] >= 1.0) logs.push_back(std::log(deg[i] / g.node_count()));
    }
    double var = 0.0;
    if (!logs.empty()) {
        double m = 0.0;
        for (double v : logs) m += v;
        m /= static_cast<double>(logs.size());
        for (double v : logs) var += (v - m) * (v - m);
        var /= static_cast<double>(logs.size());
    }
    return {mu, var};
}

}  // namespace g3
