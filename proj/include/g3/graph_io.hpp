#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "g3/graph.hpp"

namespace g3 {

// JSON Lines graph format: one object per line,
//   {"n": <int>, "edges": [[i, j], ...]}   with i < j.
// The reader rejects self-loops and out-of-range indices.

std::vector<Graph> read_graphs_jsonl(const std::string& path);
void write_graphs_jsonl(const std::string& path, const std::vector<Graph>& graphs);

std::string graph_to_json_line(const Graph& g);
Graph graph_from_json_line(const std::string& line);

// Covariate vectors for conditional runs: one {"z": [..]} object per line,
// aligned 1:1 with a graphs file.
std::vector<Eigen::VectorXd> read_covariates_jsonl(const std::string& path);
void write_covariates_jsonl(const std::string& path, const std::vector<Eigen::VectorXd>& zs);

}  // namespace g3
