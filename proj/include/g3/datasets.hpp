#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "g3/graph.hpp"
#include "g3/rng.hpp"

namespace g3 {

struct SbmSpec {
    int n = 32;
    double p_intra = 0.3;
    double p_inter = 0.05;
    int communities = 0;  // 0: drawn uniformly from {2, 3, 4, 5} per graph
    bool degree_corrected = false;
    double dc_beta_a = 1.0;
    double dc_beta_b = 1.0;
};

struct PlanarSpec {
    int n = 32;  // points sampled uniformly in the unit square
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct LabeledGraph {
    Graph graph;
    std::vector<int> labels;  // community index per node, contiguous blocks
};

// Stochastic block model with near-equal contiguous blocks; the degree-
// corrected variant multiplies each pair probability by theta_i theta_j with
// theta ~ Beta(a, b) i.i.d. per node, clipped to [0, 1].
Graph gen_sbm(const SbmSpec& spec, Rng& rng);
LabeledGraph gen_sbm_with_labels(const SbmSpec& spec, Rng& rng);

// Delaunay triangulation edge set by incremental insertion (Bowyer-Watson),
// strict circumcircle test. Exactly degenerate inputs (duplicate or fully
// cocircular points) raise DegenerateConfiguration.
std::vector<std::pair<int, int>> delaunay_edges(
    const std::vector<std::pair<double, double>>& points);

// Uniform points in the unit square joined by their Delaunay triangulation;
// redraws on degenerate or invalid configurations, giving up after 100.
Graph gen_planar(const PlanarSpec& spec, Rng& rng);

struct PlanarSample {
    Graph graph;
    std::vector<std::pair<double, double>> points;
};
PlanarSample gen_planar_with_points(const PlanarSpec& spec, Rng& rng);

// Deterministic shuffle by seed, first ceil(fraction N) graphs to train.
std::pair<std::vector<Graph>, std::vector<Graph>> split(const std::vector<Graph>& graphs,
                                                        const SplitSpec& spec);

}  // namespace g3
