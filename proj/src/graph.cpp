#include "g3/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include <Eigen/Eigenvalues>

#include "g3/error.hpp"

namespace g3 {

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 0) throw Error(ErrorCode::InvalidGraph, "negative node count");
    Graph g;
    g.n_ = n;
    g.adj_ = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw Error(ErrorCode::InvalidGraph,
                        "edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
        if (i == j)
            throw Error(ErrorCode::InvalidGraph, "self-loop at node " + std::to_string(i));
        g.adj_(i, j) = 1.0;
        g.adj_(j, i) = 1.0;
    }
    return g;
}

Graph Graph::from_adjacency(const Eigen::MatrixXd& adjacency) {
    if (adjacency.rows() != adjacency.cols())
        throw Error(ErrorCode::InvalidGraph, "adjacency not square");
    const int n = static_cast<int>(adjacency.rows());
    for (int i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw Error(ErrorCode::InvalidGraph, "nonzero diagonal at node " + std::to_string(i));
        for (int j = 0; j < n; ++j) {
            double v = adjacency(i, j);
            if (v != 0.0 && v != 1.0)
                throw Error(ErrorCode::InvalidGraph, "entries must be 0 or 1");
            if (v != adjacency(j, i))
                throw Error(ErrorCode::InvalidGraph, "adjacency not symmetric");
        }
    }
    Graph g;
    g.n_ = n;
    g.adj_ = adjacency;
    return g;
}

int Graph::edge_count() const {
    return static_cast<int>(adj_.sum() / 2.0);
}

std::vector<std::pair<int, int>> Graph::edge_list() const {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (adj_(i, j) != 0.0) edges.emplace_back(i, j);
    return edges;
}

Eigen::MatrixXd laplacian(const Graph& g, LaplacianKind kind) {
    const int n = g.node_count();
    const Eigen::MatrixXd& a = g.adjacency();
    Eigen::VectorXd d = g.degree_vector();
    if (kind != LaplacianKind::Combinatorial) {
        for (int i = 0; i < n; ++i)
            if (d[i] == 0.0)
                throw Error(ErrorCode::IsolatedNode,
                            "node " + std::to_string(i) + " has degree 0");
    }
    switch (kind) {
        case LaplacianKind::Combinatorial: {
            Eigen::MatrixXd l = -a;
            l.diagonal() = d;
            return l;
        }
        case LaplacianKind::RandomWalk: {
            Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
            l -= d.cwiseInverse().asDiagonal() * a;
            return l;
        }
        case LaplacianKind::Normalized: {
            Eigen::VectorXd dinv_sqrt = d.cwiseSqrt().cwiseInverse();
            Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
            l -= dinv_sqrt.asDiagonal() * a * dinv_sqrt.asDiagonal();
            return l;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown laplacian kind");
}

SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& laplacian) {
    if (laplacian.rows() != laplacian.cols())
        throw Error(ErrorCode::NotSymmetric, "matrix not square");
    double asym = (laplacian - laplacian.transpose()).cwiseAbs().maxCoeff();
    if (laplacian.size() > 0 && asym > 1e-10)
        throw Error(ErrorCode::NotSymmetric,
                    "asymmetry " + std::to_string(asym) + " exceeds 1e-10");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
    return SpectralDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

std::vector<int> component_of(const Graph& g, int start, std::vector<char>& seen) {
    std::vector<int> comp;
    std::queue<int> frontier;
    frontier.push(start);
    seen[start] = 1;
    while (!frontier.empty()) {
        int u = frontier.front();
        frontier.pop();
        comp.push_back(u);
        for (int v = 0; v < g.node_count(); ++v) {
            if (!seen[v] && g.has_edge(u, v)) {
                seen[v] = 1;
                frontier.push(v);
            }
        }
    }
    return comp;
}

}  // namespace

std::vector<int> largest_component_nodes(const Graph& g) {
    const int n = g.node_count();
    std::vector<char> seen(n, 0);
    std::vector<int> best;
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<int> comp = component_of(g, s, seen);
        if (comp.size() > best.size()) best = std::move(comp);
        // Components are discovered in order of minimum node index, so a tie
        // keeps the earlier one.
    }
    std::sort(best.begin(), best.end());
    return best;
}

Graph largest_connected_component(const Graph& g) {
    if (g.node_count() == 0) return g;
    const std::vector<int> best = largest_component_nodes(g);
    const int m = static_cast<int>(best.size());
    Eigen::MatrixXd sub(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sub(i, j) = g.adjacency()(best[i], best[j]);
    return Graph::from_adjacency(sub);
}

bool is_connected(const Graph& g) {
    const int n = g.node_count();
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    return static_cast<int>(component_of(g, 0, seen).size()) == n;
}

}  // namespace g3
