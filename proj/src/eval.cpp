#include "g3/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "g3/error.hpp"

namespace g3 {

namespace {

constexpr int kOrbitGraphLimit = 512;

// Connectivity and per-position orbit labels for every 4-node edge mask.
// Mask bit order: (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
struct QuadClass {
    bool connected = false;
    std::array<int, 4> orbit{};
};

std::array<QuadClass, 64> build_quad_table() {
    std::array<QuadClass, 64> table{};
    constexpr int pair_u[6] = {0, 0, 0, 1, 1, 2};
    constexpr int pair_v[6] = {1, 2, 3, 2, 3, 3};
    for (int mask = 0; mask < 64; ++mask) {
        bool adj[4][4] = {};
        int deg[4] = {};
        int edges = 0;
        for (int b = 0; b < 6; ++b)
            if (mask & (1 << b)) {
                adj[pair_u[b]][pair_v[b]] = adj[pair_v[b]][pair_u[b]] = true;
                ++deg[pair_u[b]];
                ++deg[pair_v[b]];
                ++edges;
            }

        bool seen[4] = {true, false, false, false};
        int stack[4] = {0}, top = 1, visited = 1;
        while (top > 0) {
            int u = stack[--top];
            for (int v = 0; v < 4; ++v)
                if (adj[u][v] && !seen[v]) {
                    seen[v] = true;
                    stack[top++] = v;
                    ++visited;
                }
        }
        if (visited != 4) continue;

        QuadClass& qc = table[static_cast<std::size_t>(mask)];
        qc.connected = true;
        for (int p = 0; p < 4; ++p) {
            int d = deg[p];
            switch (edges) {
                case 3:  // trees: star or path
                    if (std::max({deg[0], deg[1], deg[2], deg[3]}) == 3)
                        qc.orbit[static_cast<std::size_t>(p)] = d == 3 ? 7 : 6;
                    else
                        qc.orbit[static_cast<std::size_t>(p)] = d == 2 ? 5 : 4;
                    break;
                case 4:  // cycle or paw
                    if (std::min({deg[0], deg[1], deg[2], deg[3]}) == 2)
                        qc.orbit[static_cast<std::size_t>(p)] = 8;
                    else
                        qc.orbit[static_cast<std::size_t>(p)] = d == 3 ? 11 : (d == 2 ? 10 : 9);
                    break;
                case 5:  // diamond
                    qc.orbit[static_cast<std::size_t>(p)] = d == 3 ? 13 : 12;
                    break;
                default:  // 6 edges
                    qc.orbit[static_cast<std::size_t>(p)] = 14;
                    break;
            }
        }
    }
    return table;
}

std::vector<std::vector<int>> neighbour_lists(const Graph& g) {
    const int n = g.node_count();
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(n));
    for (auto [u, v] : g.edge_list()) {
        nbr[static_cast<std::size_t>(u)].push_back(v);
        nbr[static_cast<std::size_t>(v)].push_back(u);
    }
    return nbr;
}

Eigen::VectorXd normalized_histogram(const std::vector<int>& bin_of_value, int bins) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(bins);
    for (int b : bin_of_value) h[b] += 1.0;
    double total = h.sum();
    if (total > 0.0) h /= total;
    return h;
}

// Kernel values summed in sorted order, making the result independent of
// argument order (the kernel itself is exactly symmetric).
double gram_mean(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b,
                 double sigma) {
    std::vector<double> values;
    values.reserve(a.size() * b.size());
    const double scale = -1.0 / (2.0 * sigma * sigma);
    for (const auto& x : a)
        for (const auto& y : b) {
            if (x.size() != y.size())
                throw Error(ErrorCode::DimensionMismatch, "descriptor lengths differ");
            values.push_back(std::exp(scale * (x - y).squaredNorm()));
        }
    std::sort(values.begin(), values.end());
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(a.size() * b.size());
}

struct Fingerprint {
    int n = 0;
    int m = 0;
    std::vector<long> degrees;
    std::vector<long> triangles;
    std::vector<long> spectrum_micro;  // combinatorial eigenvalues, 1e-6 grid

    bool operator==(const Fingerprint& other) const = default;
};

Fingerprint fingerprint(const Graph& g) {
    Fingerprint fp;
    fp.n = g.node_count();
    fp.m = g.edge_count();
    Eigen::VectorXd deg = g.degree_vector();
    for (int i = 0; i < deg.size(); ++i) fp.degrees.push_back(static_cast<long>(deg[i]));
    std::sort(fp.degrees.begin(), fp.degrees.end());
    fp.triangles = triangles_per_node(g);
    std::sort(fp.triangles.begin(), fp.triangles.end());
    Eigen::VectorXd eigs = spectral_decompose(laplacian(g, LaplacianKind::Combinatorial)).eigenvalues;
    for (int i = 0; i < eigs.size(); ++i)
        fp.spectrum_micro.push_back(std::llround(eigs[i] * 1e6));
    return fp;
}

bool extend_mapping(const Graph& a, const Graph& b, const std::vector<int>& order,
                    std::vector<int>& map_ab, std::vector<bool>& used, std::size_t depth) {
    if (depth == order.size()) return true;
    int u = order[depth];
    const int n = a.node_count();
    for (int v = 0; v < n; ++v) {
        if (used[static_cast<std::size_t>(v)]) continue;
        bool ok = true;
        for (std::size_t d = 0; d < depth && ok; ++d) {
            int pu = order[d];
            ok = a.has_edge(u, pu) == b.has_edge(v, map_ab[static_cast<std::size_t>(pu)]);
        }
        if (!ok) continue;
        map_ab[static_cast<std::size_t>(u)] = v;
        used[static_cast<std::size_t>(v)] = true;
        if (extend_mapping(a, b, order, map_ab, used, depth + 1)) return true;
        used[static_cast<std::size_t>(v)] = false;
    }
    return false;
}

}  // namespace

std::vector<long> triangles_per_node(const Graph& g) {
    const int n = g.node_count();
    auto nbr = neighbour_lists(g);
    std::vector<long> t(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const auto& ni = nbr[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < ni.size(); ++p)
            for (std::size_t q = p + 1; q < ni.size(); ++q)
                if (g.has_edge(ni[p], ni[q])) ++t[static_cast<std::size_t>(i)];
    }
    return t;
}

Eigen::VectorXd clustering_coefficients(const Graph& g) {
    const int n = g.node_count();
    Eigen::VectorXd deg = g.degree_vector();
    auto tri = triangles_per_node(g);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        double d = deg[i];
        if (d >= 2.0) c[i] = 2.0 * static_cast<double>(tri[static_cast<std::size_t>(i)]) /
                             (d * (d - 1.0));
    }
    return c;
}

Eigen::MatrixXd orbit_counts(const Graph& g) {
    const int n = g.node_count();
    if (n > kOrbitGraphLimit)
        throw Error(ErrorCode::TooLarge, "orbit counting is capped at n = " +
                                             std::to_string(kOrbitGraphLimit));
    static const std::array<QuadClass, 64> table = build_quad_table();

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, 15);
    std::vector<std::vector<char>> adj(static_cast<std::size_t>(n),
                                       std::vector<char>(static_cast<std::size_t>(n), 0));
    for (auto [u, v] : g.edge_list()) {
        adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
        adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
        counts(u, 0) += 1.0;
        counts(v, 0) += 1.0;
    }

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                int e = adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                        adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                        adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                if (e == 3) {
                    counts(i, 3) += 1.0;
                    counts(j, 3) += 1.0;
                    counts(k, 3) += 1.0;
                } else if (e == 2) {
                    // the middle node touches both others
                    if (!adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]) {
                        counts(i, 2) += 1.0;
                        counts(j, 1) += 1.0;
                        counts(k, 1) += 1.0;
                    } else if (!adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) {
                        counts(j, 2) += 1.0;
                        counts(i, 1) += 1.0;
                        counts(k, 1) += 1.0;
                    } else {
                        counts(k, 2) += 1.0;
                        counts(i, 1) += 1.0;
                        counts(j, 1) += 1.0;
                    }
                }
            }

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int l = k + 1; l < n; ++l) {
                    int mask = adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] |
                               (adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] << 1) |
                               (adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] << 2) |
                               (adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] << 3) |
                               (adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] << 4) |
                               (adj[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] << 5);
                    const QuadClass& qc = table[static_cast<std::size_t>(mask)];
                    if (!qc.connected) continue;
                    counts(i, qc.orbit[0]) += 1.0;
                    counts(j, qc.orbit[1]) += 1.0;
                    counts(k, qc.orbit[2]) += 1.0;
                    counts(l, qc.orbit[3]) += 1.0;
                }
    return counts;
}

Eigen::VectorXd spectrum(const Graph& g) {
    if (g.node_count() == 1) return Eigen::VectorXd::Zero(1);
    if (!is_connected(g))
        throw Error(ErrorCode::IsolatedNode,
                    "spectrum needs a connected graph; evaluate the largest component");
    return spectral_decompose(laplacian(g, LaplacianKind::Normalized)).eigenvalues;
}

GraphStatistics compute_statistics(const Graph& g) {
    GraphStatistics s;
    s.degrees = g.degree_vector();
    s.clustering = clustering_coefficients(g);
    s.triangles = triangles_per_node(g);
    s.orbits = orbit_counts(g);
    s.spectrum = spectrum(largest_connected_component(g));
    return s;
}

double mmd(const std::vector<Eigen::VectorXd>& sample_p,
           const std::vector<Eigen::VectorXd>& sample_q, const MmdConfig& cfg) {
    if (sample_p.empty() || sample_q.empty())
        throw Error(ErrorCode::EmptySample, "both samples must be nonempty");
    if (cfg.sigma <= 0.0) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    double pp = gram_mean(sample_p, sample_p, cfg.sigma);
    double qq = gram_mean(sample_q, sample_q, cfg.sigma);
    double pq = gram_mean(sample_p, sample_q, cfg.sigma);
    return std::sqrt(std::max(0.0, pp + qq - 2.0 * pq));
}

std::vector<Eigen::VectorXd> degree_features(const std::vector<Graph>& graphs, int n_max) {
    if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be positive");
    std::vector<Eigen::VectorXd> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        Eigen::VectorXd deg = g.degree_vector();
        std::vector<int> bins;
        bins.reserve(static_cast<std::size_t>(deg.size()));
        for (int i = 0; i < deg.size(); ++i)
            bins.push_back(std::min(n_max, static_cast<int>(deg[i])));
        out.push_back(normalized_histogram(bins, n_max + 1));
    }
    return out;
}

std::vector<Eigen::VectorXd> clustering_features(const std::vector<Graph>& graphs,
                                                 const MmdConfig& cfg) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        Eigen::VectorXd c = clustering_coefficients(g);
        std::vector<int> bins;
        bins.reserve(static_cast<std::size_t>(c.size()));
        for (int i = 0; i < c.size(); ++i)
            bins.push_back(std::min(cfg.clustering_bins - 1,
                                    static_cast<int>(c[i] * cfg.clustering_bins)));
        out.push_back(normalized_histogram(bins, cfg.clustering_bins));
    }
    return out;
}

std::vector<Eigen::VectorXd> triangle_features(const std::vector<Graph>& graphs,
                                               const MmdConfig& cfg) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        auto tri = triangles_per_node(g);
        std::vector<int> bins;
        bins.reserve(tri.size());
        for (long t : tri) {
            int b = 0;
            if (t >= 1)
                b = 1 + std::min(cfg.triangle_bins - 2,
                                 static_cast<int>(std::floor(2.0 * std::log2(static_cast<double>(t)))));
            bins.push_back(b);
        }
        out.push_back(normalized_histogram(bins, cfg.triangle_bins));
    }
    return out;
}

std::vector<Eigen::VectorXd> orbit_features(const std::vector<Graph>& graphs) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        Eigen::VectorXd totals = orbit_counts(g).colwise().sum();
        out.push_back(totals.array().log1p().matrix());
    }
    return out;
}

std::vector<Eigen::VectorXd> spectrum_features(const std::vector<Graph>& graphs,
                                               const MmdConfig& cfg) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) {
        Eigen::VectorXd eigs = spectrum(largest_connected_component(g));
        std::vector<int> bins;
        bins.reserve(static_cast<std::size_t>(eigs.size()));
        for (int i = 0; i < eigs.size(); ++i) {
            double lambda = std::clamp(eigs[i], 0.0, 2.0);
            bins.push_back(std::min(cfg.spectrum_bins - 1,
                                    static_cast<int>(lambda / 2.0 * cfg.spectrum_bins)));
        }
        out.push_back(normalized_histogram(bins, cfg.spectrum_bins));
    }
    return out;
}

bool are_isomorphic(const Graph& a, const Graph& b) {
    if (a.node_count() > 16 || b.node_count() > 16)
        throw Error(ErrorCode::TooLarge, "exact isomorphism is capped at n = 16");
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    const int n = a.node_count();
    if (n == 0) return true;

    Eigen::VectorXd da = a.degree_vector(), db = b.degree_vector();
    std::vector<long> sa, sb;
    for (int i = 0; i < n; ++i) {
        sa.push_back(static_cast<long>(da[i]));
        sb.push_back(static_cast<long>(db[i]));
    }
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int u, int v) { return da[u] > da[v] || (da[u] == da[v] && u < v); });

    std::vector<int> map_ab(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    return extend_mapping(a, b, order, map_ab, used, 0);
}

double non_unique_fraction(const std::vector<Graph>& graphs) {
    if (graphs.empty()) throw Error(ErrorCode::EmptySample, "no graphs");
    std::vector<const Graph*> reps;
    std::vector<Fingerprint> rep_prints;
    std::size_t classes = 0;
    for (const auto& g : graphs) {
        Fingerprint fp = fingerprint(g);
        bool matched = false;
        for (std::size_t r = 0; r < reps.size() && !matched; ++r) {
            if (g.node_count() <= 16 && reps[r]->node_count() <= 16)
                matched = are_isomorphic(g, *reps[r]);
            else
                matched = fp == rep_prints[r];
        }
        if (!matched) {
            reps.push_back(&g);
            rep_prints.push_back(std::move(fp));
            ++classes;
        }
    }
    return 1.0 - static_cast<double>(classes) / static_cast<double>(graphs.size());
}

EvalReport evaluate(const std::vector<Graph>& generated, const std::vector<Graph>& reference,
                    const MmdConfig& cfg) {
    if (generated.empty() || reference.empty())
        throw Error(ErrorCode::EmptySample, "both graph lists must be nonempty");
    int n_max = 1;
    for (const auto& g : generated) n_max = std::max(n_max, g.node_count());
    for (const auto& g : reference) n_max = std::max(n_max, g.node_count());

    EvalReport report;
    report.degree = mmd(degree_features(generated, n_max), degree_features(reference, n_max), cfg);
    report.clustering =
        mmd(clustering_features(generated, cfg), clustering_features(reference, cfg), cfg);
    report.orbit = mmd(orbit_features(generated), orbit_features(reference), cfg);
    report.spectrum =
        mmd(spectrum_features(generated, cfg), spectrum_features(reference, cfg), cfg);
    report.triangles =
        mmd(triangle_features(generated, cfg), triangle_features(reference, cfg), cfg);
    report.non_unique_fraction = non_unique_fraction(generated);
    return report;
}

}  // namespace g3
