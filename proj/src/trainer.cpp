#include "g3/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "g3/error.hpp"

namespace g3 {

namespace {

constexpr double kRelImprovement = 1e-6;

void validate(const std::vector<Graph>& graphs, const MlpConfig& mlp_cfg, const TrainConfig& cfg) {
    if (graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no training graphs");
    if (cfg.laplacian == LaplacianKind::RandomWalk)
        throw Error(ErrorCode::InvalidArgument,
                    "random-walk laplacian is not symmetric; train with combinatorial or "
                    "normalized");
    if (cfg.lr_decay <= 0.0 || cfg.lr_decay >= 1.0)
        throw Error(ErrorCode::InvalidArgument, "lr_decay must lie in (0, 1)");
    if (cfg.lr_min >= cfg.lr0)
        throw Error(ErrorCode::InvalidArgument, "lr_min must be below lr0");
    if (cfg.batch_size_max < 1 || cfg.epochs < 1 || cfg.patience < 1)
        throw Error(ErrorCode::InvalidArgument, "batch_size_max, epochs, patience must be >= 1");
    if (cfg.diffusion.mode == DiffusionMode::Asymmetric &&
        mlp_cfg.layout != StateLayout::FullMatrix)
        throw Error(ErrorCode::InvalidArgument,
                    "asymmetric diffusion produces nonsymmetric states; use the full-matrix "
                    "layout");
    if (cfg.omega > 0.0) {
        if (cfg.diffusion.mode != DiffusionMode::Asymmetric)
            throw Error(ErrorCode::InvalidArgument,
                        "covariate-augmented training requires asymmetric mode");
        if (cfg.covariates.size() != graphs.size())
            throw Error(ErrorCode::DimensionMismatch, "need one covariate vector per graph");
    }
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        if (graphs[i].node_count() > mlp_cfg.n_max)
            throw Error(ErrorCode::DimensionExceeded,
                        "graph " + std::to_string(i) + " has n = " +
                            std::to_string(graphs[i].node_count()) + " > n_max = " +
                            std::to_string(mlp_cfg.n_max));
        if (cfg.omega > 0.0 && cfg.covariates[i].size() != graphs[i].node_count())
            throw Error(ErrorCode::DimensionMismatch,
                        "covariate vector " + std::to_string(i) + " length does not match graph");
    }
}

struct GraphContext {
    Eigen::MatrixXd laplacian;
    Eigen::MatrixXd y0;
    SpectralDecomposition spectral;
};

std::vector<GraphContext> prepare(const std::vector<Graph>& graphs, const TrainConfig& cfg) {
    std::vector<GraphContext> out;
    out.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        GraphContext ctx;
        ctx.laplacian = laplacian(graphs[i], cfg.laplacian);
        ctx.y0 = cfg.omega > 0.0
                     ? (ctx.laplacian +
                        cfg.omega * cfg.covariates[i] * cfg.covariates[i].transpose())
                           .eval()
                     : graphs[i].adjacency();
        ctx.spectral = spectral_decompose(ctx.laplacian);
        out.push_back(std::move(ctx));
    }
    return out;
}

}  // namespace

std::vector<std::vector<int>> make_batches(const std::vector<Graph>& graphs, int batch_size_max,
                                           Rng& rng) {
    if (graphs.empty()) throw Error(ErrorCode::EmptyDataset, "no graphs to batch");
    if (batch_size_max < 1)
        throw Error(ErrorCode::InvalidArgument, "batch_size_max must be >= 1");
    std::vector<int> order(graphs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);

    // Group by node count in shuffled first-appearance order, then chunk.
    std::vector<int> sizes;
    std::map<int, std::vector<int>> by_size;
    for (int idx : order) {
        int n = graphs[idx].node_count();
        auto [it, inserted] = by_size.try_emplace(n);
        if (inserted) sizes.push_back(n);
        it->second.push_back(idx);
    }
    std::vector<std::vector<int>> batches;
    const auto cap = static_cast<std::size_t>(batch_size_max);
    for (int n : sizes) {
        const auto& bucket = by_size[n];
        for (std::size_t start = 0; start < bucket.size(); start += cap) {
            std::size_t stop = std::min(bucket.size(), start + cap);
            batches.emplace_back(bucket.begin() + static_cast<std::ptrdiff_t>(start),
                                 bucket.begin() + static_cast<std::ptrdiff_t>(stop));
        }
    }
    return batches;
}

std::pair<SurrogateGenerator, TrainReport> train(const std::vector<Graph>& graphs,
                                                 const MlpConfig& mlp_cfg, const TrainConfig& cfg,
                                                 const TrainObserver& observer) {
    validate(graphs, mlp_cfg, cfg);
    auto started = std::chrono::steady_clock::now();

    Rng root(cfg.seed);
    Rng init_rng = root.substream("init");
    Rng train_rng = root.substream("train");

    auto contexts = prepare(graphs, cfg);
    SurrogateGenerator model = SurrogateGenerator::init(mlp_cfg, init_rng);
    AdamState adam = AdamState::init(mlp_cfg);

    TrainReport report;
    double lr = cfg.lr0;
    double best = std::numeric_limits<double>::infinity();
    int stall = 0;
    bool stop = false;

    const double T = cfg.diffusion.T;
    const double tau = cfg.diffusion.tau;
    const DiffusionMode mode = cfg.diffusion.mode;

    for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
        auto batches = make_batches(graphs, cfg.batch_size_max, train_rng);
        double loss_sum = 0.0;
        long batch_count = 0;

        for (const auto& batch : batches) {
            std::vector<BatchItem> items;
            items.reserve(batch.size());
            for (int gi : batch) {
                const auto& ctx = contexts[static_cast<std::size_t>(gi)];
                double t_raw = train_rng.uniform(tau, T);
                double s = 1.0 - t_raw / T;
                Eigen::MatrixXd x = diffuse(ctx.y0, ctx.spectral, t_raw, mode);
                Eigen::MatrixXd target = true_generator(ctx.laplacian, x, T, mode);
                if (observer)
                    observer({epoch, report.iterations, gi, t_raw, s, x, target});
                items.push_back({flatten_state(x, mlp_cfg.layout), s,
                                 flatten_state(target, mlp_cfg.layout),
                                 graphs[static_cast<std::size_t>(gi)].node_count()});
            }

            auto [loss, grads] = loss_and_gradients(model, items);
            if (!std::isfinite(loss))
                throw Error(ErrorCode::NonFiniteLoss,
                            "loss diverged at epoch " + std::to_string(epoch) + ", iteration " +
                                std::to_string(report.iterations));
            loss_sum += loss;
            ++batch_count;

            if (cfg.loss_target > 0.0 && loss < cfg.loss_target) {
                stop = true;
                break;
            }

            adam_step(model, grads, adam, lr);
            ++report.iterations;

            if (loss < best * (1.0 - kRelImprovement)) {
                best = loss;
                stall = 0;
            } else if (++stall >= cfg.patience) {
                lr = std::max(lr * cfg.lr_decay, cfg.lr_min);
                stall = 0;
            }
        }
        if (batch_count > 0) report.epoch_losses.push_back(loss_sum / batch_count);
    }

    report.final_lr = lr;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), std::move(report)};
}

}  // namespace g3
