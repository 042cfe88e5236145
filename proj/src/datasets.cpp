#include "g3/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "g3/error.hpp"

namespace g3 {

namespace {

using Point = std::pair<double, double>;

double orient2d(const Point& a, const Point& b, const Point& c) {
    return (b.first - a.first) * (c.second - a.second) -
           (b.second - a.second) * (c.first - a.first);
}

// Strictly inside the circumcircle of (a, b, c).
bool in_circumcircle(Point a, Point b, Point c, const Point& d) {
    if (orient2d(a, b, c) < 0.0) std::swap(b, c);
    double ax = a.first - d.first, ay = a.second - d.second;
    double bx = b.first - d.first, by = b.second - d.second;
    double cx = c.first - d.first, cy = c.second - d.second;
    double det = (ax * ax + ay * ay) * (bx * cy - by * cx) -
                 (bx * bx + by * by) * (ax * cy - ay * cx) +
                 (cx * cx + cy * cy) * (ax * by - ay * bx);
    return det > 0.0;
}

// Strict crossing of segments that share no endpoint; collinear overlaps count.
bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
    double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
    double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
    if (o1 * o2 < 0.0 && o3 * o4 < 0.0) return true;
    if (o1 == 0.0 && o2 == 0.0 && o3 == 0.0 && o4 == 0.0) {
        auto lo = [](double u, double v) { return std::min(u, v); };
        auto hi = [](double u, double v) { return std::max(u, v); };
        bool x_overlap = lo(a.first, b.first) < hi(c.first, d.first) &&
                         lo(c.first, d.first) < hi(a.first, b.first);
        bool y_overlap = lo(a.second, b.second) < hi(c.second, d.second) &&
                         lo(c.second, d.second) < hi(a.second, b.second);
        return x_overlap && y_overlap;
    }
    return false;
}

void validate_sbm(const SbmSpec& spec) {
    if (spec.n < 1) throw Error(ErrorCode::InvalidArgument, "need n >= 1");
    if (spec.p_intra < 0.0 || spec.p_intra > 1.0 || spec.p_inter < 0.0 || spec.p_inter > 1.0)
        throw Error(ErrorCode::InvalidArgument, "edge probabilities must lie in [0, 1]");
    if (spec.communities != 0 && (spec.communities < 2 || spec.communities > spec.n))
        throw Error(ErrorCode::InvalidArgument, "communities must be 0 (random) or in [2, n]");
    if (spec.degree_corrected && (spec.dc_beta_a <= 0.0 || spec.dc_beta_b <= 0.0))
        throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
}

}  // namespace

LabeledGraph gen_sbm_with_labels(const SbmSpec& spec, Rng& rng) {
    validate_sbm(spec);
    int k = spec.communities > 0
                ? spec.communities
                : 2 + static_cast<int>(rng.uniform_int(4));
    k = std::min(k, spec.n);

    // Near-equal contiguous blocks; the first n mod k blocks get the extra node.
    std::vector<int> labels(static_cast<std::size_t>(spec.n));
    int base = spec.n / k, extra = spec.n % k, node = 0;
    for (int b = 0; b < k; ++b) {
        int size = base + (b < extra ? 1 : 0);
        for (int s = 0; s < size; ++s) labels[static_cast<std::size_t>(node++)] = b;
    }

    std::vector<double> theta;
    if (spec.degree_corrected) {
        theta.resize(static_cast<std::size_t>(spec.n));
        for (auto& t : theta) {
            double ga = rng.gamma(spec.dc_beta_a);
            double gb = rng.gamma(spec.dc_beta_b);
            t = ga / (ga + gb);
        }
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < spec.n; ++i)
        for (int j = i + 1; j < spec.n; ++j) {
            double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                           ? spec.p_intra
                           : spec.p_inter;
            if (spec.degree_corrected)
                p = std::clamp(p * theta[static_cast<std::size_t>(i)] *
                                   theta[static_cast<std::size_t>(j)],
                               0.0, 1.0);
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    return {Graph::from_edges(spec.n, edges), std::move(labels)};
}

Graph gen_sbm(const SbmSpec& spec, Rng& rng) { return gen_sbm_with_labels(spec, rng).graph; }

std::vector<std::pair<int, int>> delaunay_edges(
    const std::vector<std::pair<double, double>>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 points");

    std::vector<Point> pts = points;
    pts.emplace_back(-1e3, -1e3);
    pts.emplace_back(1e3, -1e3);
    pts.emplace_back(0.0, 1e3);

    struct Tri {
        int a, b, c;
    };
    std::vector<Tri> tris{{n, n + 1, n + 2}};

    for (int p = 0; p < n; ++p) {
        std::vector<Tri> keep;
        std::map<std::pair<int, int>, int> boundary;
        for (const Tri& t : tris) {
            if (in_circumcircle(pts[static_cast<std::size_t>(t.a)],
                                pts[static_cast<std::size_t>(t.b)],
                                pts[static_cast<std::size_t>(t.c)],
                                pts[static_cast<std::size_t>(p)])) {
                auto bump = [&](int u, int v) { ++boundary[{std::min(u, v), std::max(u, v)}]; };
                bump(t.a, t.b);
                bump(t.b, t.c);
                bump(t.c, t.a);
            } else {
                keep.push_back(t);
            }
        }
        if (boundary.empty())
            throw Error(ErrorCode::DegenerateConfiguration,
                        "point " + std::to_string(p) + " lies on no open circumcircle");
        tris = std::move(keep);
        for (const auto& [edge, count] : boundary)
            if (count == 1) tris.push_back({edge.first, edge.second, p});
    }

    std::map<std::pair<int, int>, bool> seen;
    for (const Tri& t : tris) {
        auto add = [&](int u, int v) {
            if (u < n && v < n) seen[{std::min(u, v), std::max(u, v)}] = true;
        };
        add(t.a, t.b);
        add(t.b, t.c);
        add(t.c, t.a);
    }
    std::vector<std::pair<int, int>> edges;
    edges.reserve(seen.size());
    for (const auto& [edge, _] : seen) edges.push_back(edge);
    return edges;
}

PlanarSample gen_planar_with_points(const PlanarSpec& spec, Rng& rng) {
    if (spec.n < 3) throw Error(ErrorCode::InvalidArgument, "need n >= 3");
    const int limit = 100;
    for (int attempt = 0; attempt < limit; ++attempt) {
        std::vector<Point> pts(static_cast<std::size_t>(spec.n));
        for (auto& pt : pts) {
            pt.first = rng.uniform();
            pt.second = rng.uniform();
        }
        std::vector<std::pair<int, int>> edges;
        try {
            edges = delaunay_edges(pts);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::DegenerateConfiguration) continue;
            throw;
        }

        // A proper triangulation of points in general position: connected,
        // planar-bounded, and free of crossing segments.
        int m = static_cast<int>(edges.size());
        if (m < 2 * spec.n - 3 || m > 3 * spec.n - 6) continue;
        Graph g = Graph::from_edges(spec.n, edges);
        if (!is_connected(g)) continue;
        bool crossing = false;
        for (std::size_t e = 0; e < edges.size() && !crossing; ++e)
            for (std::size_t f = e + 1; f < edges.size() && !crossing; ++f) {
                auto [a, b] = edges[e];
                auto [c, d] = edges[f];
                if (a == c || a == d || b == c || b == d) continue;
                crossing = segments_cross(pts[static_cast<std::size_t>(a)],
                                          pts[static_cast<std::size_t>(b)],
                                          pts[static_cast<std::size_t>(c)],
                                          pts[static_cast<std::size_t>(d)]);
            }
        if (crossing) continue;
        return {std::move(g), std::move(pts)};
    }
    throw Error(ErrorCode::DegenerateConfiguration,
                "no valid point configuration after " + std::to_string(limit) + " draws");
}

Graph gen_planar(const PlanarSpec& spec, Rng& rng) {
    return gen_planar_with_points(spec, rng).graph;
}

std::pair<std::vector<Graph>, std::vector<Graph>> split(const std::vector<Graph>& graphs,
                                                        const SplitSpec& spec) {
    if (graphs.size() < 2)
        throw Error(ErrorCode::TooFewGraphs, "need at least 2 graphs to split");
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw Error(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");

    std::vector<int> order(graphs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(spec.seed);
    rng.shuffle(order);

    auto n_train = static_cast<std::size_t>(
        std::ceil(spec.train_fraction * static_cast<double>(graphs.size())));
    n_train = std::min(n_train, graphs.size());
    std::pair<std::vector<Graph>, std::vector<Graph>> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Graph& g = graphs[static_cast<std::size_t>(order[i])];
        (i < n_train ? out.first : out.second).push_back(g);
    }
    return out;
}

}  // namespace g3
