#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "g3/diffusion.hpp"
#include "g3/graph.hpp"
#include "g3/nn.hpp"
#include "g3/rng.hpp"

namespace g3 {

struct TrainConfig {
    int batch_size_max = 256;
    int epochs = 20;
    double lr0 = 1e-4;
    double lr_decay = 0.99;
    double lr_min = 1e-9;
    int patience = 10;        // iterations without relative improvement before a decay
    double loss_target = 0.0; // early-stop threshold; 0 disables
    std::uint64_t seed = 0;
    DiffusionConfig diffusion{};
    LaplacianKind laplacian = LaplacianKind::Combinatorial;

    // Covariate-augmented initial states L + omega z z^T (asymmetric mode only).
    // omega > 0 enables them; covariates then holds one z per training graph.
    double omega = 0.0;
    std::vector<Eigen::VectorXd> covariates{};
};

struct TrainReport {
    std::vector<double> epoch_losses;  // mean batch loss per epoch
    double final_lr = 0.0;
    double wall_seconds = 0.0;
    long iterations = 0;
};

// Every graph exactly once, each batch a single node count, batch size capped.
// Batch contents and order are shuffled by rng. Returns indices into graphs.
std::vector<std::vector<int>> make_batches(const std::vector<Graph>& graphs, int batch_size_max,
                                           Rng& rng);

// Hook for inspecting each sampled regression pair as training runs.
struct TrainObservation {
    int epoch = 0;
    long iteration = 0;  // global batch counter
    int graph_index = 0;
    double t_raw = 0.0;      // diffusion time in [tau, T]
    double s_rescaled = 0.0; // network time input, 1 - t_raw / T
    Eigen::MatrixXd state;
    Eigen::MatrixXd target;
};
using TrainObserver = std::function<void(const TrainObservation&)>;

// Generator-matching loop: per item draw t ~ Unif[tau, T], diffuse the initial
// state to X, regress the network at s = 1 - t/T onto the true generator at X,
// and take an Adam step per batch. The learning rate decays by lr_decay
// (floored at lr_min) whenever the best-seen loss fails to improve by a
// relative 1e-6 for `patience` consecutive iterations.
std::pair<SurrogateGenerator, TrainReport> train(const std::vector<Graph>& graphs,
                                                 const MlpConfig& mlp_cfg, const TrainConfig& cfg,
                                                 const TrainObserver& observer = nullptr);

}  // namespace g3
