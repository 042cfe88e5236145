#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace g3 {

enum class LaplacianKind { Combinatorial, RandomWalk, Normalized };

// Simple undirected graph: symmetric 0/1 adjacency, zero diagonal,
// 0-based contiguous node indices. Immutable after construction.
class Graph {
public:
    Graph() = default;

    static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);
    // Validates symmetry / binary entries / zero diagonal.
    static Graph from_adjacency(const Eigen::MatrixXd& adjacency);

    int node_count() const { return n_; }
    int edge_count() const;
    bool has_edge(int i, int j) const { return adj_(i, j) != 0.0; }
    const Eigen::MatrixXd& adjacency() const { return adj_; }

    Eigen::VectorXd degree_vector() const { return adj_.rowwise().sum(); }
    std::vector<std::pair<int, int>> edge_list() const;  // i < j, lexicographic

private:
    int n_ = 0;
    Eigen::MatrixXd adj_;
};

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // column k pairs with eigenvalues[k]
};

Eigen::MatrixXd laplacian(const Graph& g, LaplacianKind kind);

// Symmetric input only (tolerance 1e-10); the random-walk Laplacian is
// asymmetric and is rejected here. Its spectrum, when needed, comes from the
// similarity L_rw = D^{-1/2} L_N D^{1/2}.
SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& laplacian);

// Sorted node indices of the largest connected component; ties keep the
// component containing the smallest node index.
std::vector<int> largest_component_nodes(const Graph& g);

Graph largest_connected_component(const Graph& g);

bool is_connected(const Graph& g);

}  // namespace g3
