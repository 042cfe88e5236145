#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "g3/error.hpp"
#include "g3/graph_io.hpp"

using g3::Error;
using g3::Graph;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/g3_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("graph JSON round trip") {
    Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    std::string line = g3::graph_to_json_line(g);
    Graph back = g3::graph_from_json_line(line);
    CHECK(back.node_count() == 4);
    CHECK(back.adjacency() == g.adjacency());
}

TEST_CASE("reader rejects malformed lines") {
    CHECK_THROWS_AS(g3::graph_from_json_line("not json"), Error);
    CHECK_THROWS_AS(g3::graph_from_json_line(R"({"edges": []})"), Error);
    CHECK_THROWS_AS(g3::graph_from_json_line(R"({"n": 0, "edges": []})"), Error);
    CHECK_THROWS_AS(g3::graph_from_json_line(R"({"n": 3, "edges": [[0, 0]]})"), Error);
    CHECK_THROWS_AS(g3::graph_from_json_line(R"({"n": 3, "edges": [[0, 5]]})"), Error);
    CHECK_THROWS_AS(g3::graph_from_json_line(R"({"n": 3, "edges": [[0]]})"), Error);
}

TEST_CASE("file round trip preserves every graph") {
    TempFile f("graphs.jsonl");
    std::vector<Graph> graphs{
        Graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}),
        Graph::from_edges(2, {}),
        Graph::from_edges(5, {{0, 4}, {1, 2}}),
    };
    g3::write_graphs_jsonl(f.path, graphs);
    auto back = g3::read_graphs_jsonl(f.path);
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < graphs.size(); ++i)
        CHECK(back[i].adjacency() == graphs[i].adjacency());
}

TEST_CASE("reader reports the offending line") {
    TempFile f("bad.jsonl");
    {
        std::ofstream out(f.path);
        out << R"({"n": 2, "edges": [[0, 1]]})" << "\n";
        out << R"({"n": 2, "edges": [[0, 2]]})" << "\n";
    }
    try {
        g3::read_graphs_jsonl(f.path);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
}

TEST_CASE("missing file raises an io error") {
    CHECK_THROWS_AS(g3::read_graphs_jsonl("/tmp/g3_does_not_exist.jsonl"), Error);
}

TEST_CASE("covariate round trip") {
    TempFile f("covs.jsonl");
    std::vector<Eigen::VectorXd> zs;
    Eigen::VectorXd z(3);
    z << 1.0, -1.0, 1.0;
    zs.push_back(z);
    zs.push_back(-z);
    g3::write_covariates_jsonl(f.path, zs);
    auto back = g3::read_covariates_jsonl(f.path);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == zs[0]);
    CHECK(back[1] == zs[1]);
}
