#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "g3/diffusion.hpp"
#include "g3/graph.hpp"
#include "g3/nn.hpp"
#include "g3/rng.hpp"

namespace g3 {

struct SampleConfig {
    int n = 2;
    int M = 100;                    // Euler steps, delta = 1/M
    double alpha = 1.0;             // Dirichlet concentration
    double avg_degree_scale = 1.0;  // <d> estimated from the training set
    double threshold = 0.5;         // binarisation cutoff c
    DiffusionMode mode = DiffusionMode::Symmetric;
    double clip_lo = 0.0;
    double clip_hi = 1.0;
    std::uint64_t seed = 0;

    // Asymmetric base distribution: log-normal degree scales.
    double degree_log_mean = 0.0;
    double degree_log_var = 0.0;

    // Conditional generation: omega > 0 switches to the covariate base
    // (asymmetric mode only) and covariates must hold z of length n.
    double omega = 0.0;
    Eigen::VectorXd covariates{};
};

// <d> (X~ + X~^T) with the columns of X~ i.i.d. Dirichlet(alpha 1).
Eigen::MatrixXd sample_base_symmetric(int n, double alpha, double avg_degree, Rng& rng);

// Rank-1 x~ v^T with x~ ~ Dirichlet(alpha 1) and log v ~ N(mu, var) i.i.d.
Eigen::MatrixXd sample_base_asymmetric(int n, double alpha, double degree_log_mean,
                                       double degree_log_var, Rng& rng);

// Rank-1 n^-1 omega (x~ . z) x~ z^T.
Eigen::MatrixXd sample_base_conditional(const Eigen::VectorXd& z, double omega_hat, double alpha,
                                        Rng& rng);

// Draws the base state for cfg and integrates the learned reverse-time ODE:
// M explicit Euler steps of size 1/M with time input t_m = m/M, clipping to
// [clip_lo, clip_hi] after every step; symmetric mode also symmetrises and
// zeroes the diagonal each step. Returns the terminal real-valued matrix.
Eigen::MatrixXd euler_sample(const SurrogateGenerator& model, const SampleConfig& cfg, Rng& rng);

// `count` independent samples advanced in lockstep (one network evaluation per
// step over all states). Sample i draws its base from rng.substream("item", i),
// so the output list does not depend on how work is scheduled.
std::vector<Eigen::MatrixXd> euler_sample_many(const SurrogateGenerator& model,
                                               const SampleConfig& cfg, int count, Rng& rng);

// Symmetrise, zero the diagonal, keep edges where the entry >= c.
Graph threshold_to_graph(const Eigen::MatrixXd& x, double c);

// Stochastic variant: edge (i, j) drawn Bernoulli(clamp(entry, 0, 1)).
Graph bernoulli_to_graph(const Eigen::MatrixXd& x, Rng& rng);

// Covariate recovery: R = omega_hat z z^T - X approximates the adjacency
// matrix of a conditional sample; binarised at 1/2.
Graph conditional_to_graph(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, double omega_hat);

// Mean edge density (1/N) sum ||A||_1 / n^2 over the training graphs.
double estimate_threshold(const std::vector<Graph>& train_graphs);

// Base-distribution scale (1/N) sum (2/n) ||A||_1.
double estimate_avg_degree_scale(const std::vector<Graph>& train_graphs);

// (mu, var) of log(d_v / n) pooled over nodes with d_v >= 1, with
// mu = log(<d> / n) taken from the formula above rather than the pooled mean.
std::pair<double, double> estimate_degree_log_stats(const std::vector<Graph>& train_graphs);

}  // namespace g3
