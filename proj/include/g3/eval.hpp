#pragma once

#include <vector>

#include <Eigen/Dense>

#include "g3/graph.hpp"

namespace g3 {

// Per-node descriptors plus the normalized-Laplacian spectrum of the largest
// connected component.
struct GraphStatistics {
    Eigen::VectorXd degrees;
    Eigen::VectorXd clustering;
    std::vector<long> triangles;
    Eigen::MatrixXd orbits;  // n x 15
    Eigen::VectorXd spectrum;
};

// T_i: unordered adjacent neighbour pairs of node i.
std::vector<long> triangles_per_node(const Graph& g);

// c_i = 2 T_i / (d_i (d_i - 1)) where d_i >= 2, else 0.
Eigen::VectorXd clustering_coefficients(const Graph& g);

// Per-node counts over the 15 automorphism orbits of connected graphlets on
// 2-4 nodes: 0 edge endpoint; 1/2 path-3 end/middle; 3 triangle; 4/5 path-4
// end/middle; 6/7 claw leaf/center; 8 4-cycle; 9/10/11 paw pendant/rim/hub;
// 12/13 diamond rim/hub; 14 complete-4. Graphs above n = 512 are rejected.
Eigen::MatrixXd orbit_counts(const Graph& g);

// Ascending eigenvalues of I - D^-1/2 A D^-1/2, in [0, 2]. The graph must be
// connected (callers evaluate the largest connected component).
Eigen::VectorXd spectrum(const Graph& g);

GraphStatistics compute_statistics(const Graph& g);

struct MmdConfig {
    double sigma = 1.0;  // Gaussian kernel bandwidth
    int clustering_bins = 100;
    int spectrum_bins = 200;
    int triangle_bins = 40;  // zero bucket + sqrt(2)-spaced count buckets
};

// Biased V-statistic estimate of squared MMD under a Gaussian kernel,
// clamped at zero and returned as a square root. Exactly symmetric in its
// sample arguments.
double mmd(const std::vector<Eigen::VectorXd>& sample_p,
           const std::vector<Eigen::VectorXd>& sample_q, const MmdConfig& cfg);

// Fixed per-graph featurisations feeding mmd. Histograms are normalized to
// sum 1; orbit descriptors are log1p of the 15 per-orbit totals.
std::vector<Eigen::VectorXd> degree_features(const std::vector<Graph>& graphs, int n_max);
std::vector<Eigen::VectorXd> clustering_features(const std::vector<Graph>& graphs,
                                                 const MmdConfig& cfg);
std::vector<Eigen::VectorXd> triangle_features(const std::vector<Graph>& graphs,
                                               const MmdConfig& cfg);
std::vector<Eigen::VectorXd> orbit_features(const std::vector<Graph>& graphs);
std::vector<Eigen::VectorXd> spectrum_features(const std::vector<Graph>& graphs,
                                               const MmdConfig& cfg);

// Exact isomorphism by degree-refined backtracking; defined for n <= 16.
bool are_isomorphic(const Graph& a, const Graph& b);

// 1 - (#isomorphism classes) / N. Pairs with both sizes <= 16 are compared
// exactly; larger graphs by an invariant fingerprint (degree sequence,
// triangle multiset, combinatorial spectrum rounded to 1e-6).
double non_unique_fraction(const std::vector<Graph>& graphs);

struct EvalReport {
    double degree = 0.0;
    double clustering = 0.0;
    double orbit = 0.0;
    double spectrum = 0.0;
    double triangles = 0.0;
    double non_unique_fraction = 0.0;
};

EvalReport evaluate(const std::vector<Graph>& generated, const std::vector<Graph>& reference,
                    const MmdConfig& cfg);

}  // namespace g3
