#include "g3/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "g3/error.hpp"

namespace g3 {

using nlohmann::json;

std::string graph_to_json_line(const Graph& g) {
    json obj;
    obj["n"] = g.node_count();
    json edges = json::array();
    for (auto [i, j] : g.edge_list()) edges.push_back(json::array({i, j}));
    obj["edges"] = std::move(edges);
    return obj.dump();
}

Graph graph_from_json_line(const std::string& line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidGraph, std::string("bad JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("n") || !obj["n"].is_number_integer())
        throw Error(ErrorCode::InvalidGraph, "missing integer field \"n\"");
    int n = obj["n"].get<int>();
    if (n < 1) throw Error(ErrorCode::InvalidGraph, "node count must be positive");
    std::vector<std::pair<int, int>> edges;
    if (obj.contains("edges")) {
        if (!obj["edges"].is_array())
            throw Error(ErrorCode::InvalidGraph, "\"edges\" must be an array");
        for (const auto& e : obj["edges"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
                !e[1].is_number_integer())
                throw Error(ErrorCode::InvalidGraph, "each edge must be a pair of integers");
            int i = e[0].get<int>();
            int j = e[1].get<int>();
            if (i > j) std::swap(i, j);
            edges.emplace_back(i, j);
        }
    }
    return Graph::from_edges(n, edges);
}

std::vector<Graph> read_graphs_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<Graph> graphs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            graphs.push_back(graph_from_json_line(line));
        } catch (const Error& e) {
            throw Error(e.code(),
                        path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return graphs;
}

void write_graphs_jsonl(const std::string& path, const std::vector<Graph>& graphs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    for (const Graph& g : graphs) out << graph_to_json_line(g) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::vector<Eigen::VectorXd> read_covariates_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<Eigen::VectorXd> zs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::InvalidArgument,
                        path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("z") || !obj["z"].is_array())
            throw Error(ErrorCode::InvalidArgument,
                        path + ":" + std::to_string(line_no) + ": missing array field \"z\"");
        Eigen::VectorXd z(obj["z"].size());
        for (int i = 0; i < z.size(); ++i) z[i] = obj["z"][i].get<double>();
        zs.push_back(std::move(z));
    }
    return zs;
}

void write_covariates_jsonl(const std::string& path, const std::vector<Eigen::VectorXd>& zs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    for (const Eigen::VectorXd& z : zs) {
        json obj;
        json arr = json::array();
        for (int i = 0; i < z.size(); ++i) arr.push_back(z[i]);
        obj["z"] = std::move(arr);
        out << obj.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace g3
