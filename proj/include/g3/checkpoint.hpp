#pragma once

#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "g3/diffusion.hpp"
#include "g3/graph.hpp"
#include "g3/nn.hpp"

namespace g3 {

// Everything a sampler needs besides the weights: how the model was trained
// and the dataset statistics that parameterize base sampling / thresholding.
struct CheckpointMeta {
    LaplacianKind laplacian = LaplacianKind::Combinatorial;
    DiffusionConfig diffusion;
    nlohmann::json training = nlohmann::json::object();  // free-form run metadata
};

// File layout: "G3CKPT1\n", uint64 little-endian JSON header length, the JSON
// header, then each parameter tensor as row-major little-endian float64 in
// declaration order.
void save_checkpoint(const std::string& path, const SurrogateGenerator& model,
                     const CheckpointMeta& meta);

std::pair<SurrogateGenerator, CheckpointMeta> load_checkpoint(const std::string& path);

// Loads and additionally validates the stored architecture against an
// expected configuration.
std::pair<SurrogateGenerator, CheckpointMeta> load_checkpoint(const std::string& path,
                                                              const MlpConfig& expected);

const char* to_string(LaplacianKind kind);
LaplacianKind laplacian_kind_from_string(const std::string& s);
const char* to_string(DiffusionMode mode);
DiffusionMode diffusion_mode_from_string(const std::string& s);
const char* to_string(StateLayout layout);
StateLayout state_layout_from_string(const std::string& s);

}  // namespace g3
