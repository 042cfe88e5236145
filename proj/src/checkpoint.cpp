#include "g3/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "g3/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as native little-endian doubles");

namespace g3 {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'G', '3', 'C', 'K', 'P', 'T', '1', '\n'};

void write_row_major(std::ofstream& out, const Eigen::MatrixXd& m) {
    std::vector<double> buf(static_cast<std::size_t>(m.size()));
    std::size_t k = 0;
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) buf[k++] = m(i, j);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

void read_row_major(std::ifstream& in, Eigen::MatrixXd& m) {
    std::vector<double> buf(static_cast<std::size_t>(m.size()));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) throw Error(ErrorCode::IoError, "checkpoint truncated inside a tensor blob");
    std::size_t k = 0;
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) m(i, j) = buf[k++];
}

void write_vector(std::ofstream& out, const Eigen::VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_vector(std::ifstream& in, Eigen::VectorXd& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw Error(ErrorCode::IoError, "checkpoint truncated inside a tensor blob");
}

json config_to_json(const MlpConfig& cfg) {
    return json{{"hidden_width", cfg.hidden_width},
                {"n_max", cfg.n_max},
                {"layers", cfg.layers},
                {"use_layer_norm", cfg.use_layer_norm},
                {"layout", to_string(cfg.layout)}};
}

MlpConfig config_from_json(const json& j) {
    MlpConfig cfg;
    cfg.hidden_width = j.at("hidden_width").get<int>();
    cfg.n_max = j.at("n_max").get<int>();
    cfg.layers = j.at("layers").get<int>();
    cfg.use_layer_norm = j.at("use_layer_norm").get<bool>();
    cfg.layout = state_layout_from_string(j.at("layout").get<std::string>());
    return cfg;
}

}  // namespace

const char* to_string(LaplacianKind kind) {
    switch (kind) {
        case LaplacianKind::Combinatorial: return "combinatorial";
        case LaplacianKind::RandomWalk: return "random_walk";
        case LaplacianKind::Normalized: return "normalized";
    }
    return "combinatorial";
}

LaplacianKind laplacian_kind_from_string(const std::string& s) {
    if (s == "combinatorial") return LaplacianKind::Combinatorial;
    if (s == "random_walk") return LaplacianKind::RandomWalk;
    if (s == "normalized") return LaplacianKind::Normalized;
    throw Error(ErrorCode::InvalidArgument, "unknown laplacian kind: " + s);
}

const char* to_string(DiffusionMode mode) {
    return mode == DiffusionMode::Symmetric ? "symmetric" : "asymmetric";
}

DiffusionMode diffusion_mode_from_string(const std::string& s) {
    if (s == "symmetric") return DiffusionMode::Symmetric;
    if (s == "asymmetric") return DiffusionMode::Asymmetric;
    throw Error(ErrorCode::InvalidArgument, "unknown diffusion mode: " + s);
}

const char* to_string(StateLayout layout) {
    return layout == StateLayout::LowerTriangle ? "lower_triangle" : "full_matrix";
}

StateLayout state_layout_from_string(const std::string& s) {
    if (s == "lower_triangle") return StateLayout::LowerTriangle;
    if (s == "full_matrix") return StateLayout::FullMatrix;
    throw Error(ErrorCode::InvalidArgument, "unknown state layout: " + s);
}

void save_checkpoint(const std::string& path, const SurrogateGenerator& model,
                     const CheckpointMeta& meta) {
    json header{{"config", config_to_json(model.config)},
                {"laplacian", to_string(meta.laplacian)},
                {"diffusion",
                 {{"T", meta.diffusion.T},
                  {"tau", meta.diffusion.tau},
                  {"mode", to_string(meta.diffusion.mode)}}},
                {"training", meta.training}};
    std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    std::uint64_t len = header_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

    const MlpParameters& p = model.params;
    write_row_major(out, p.w1);
    write_vector(out, p.b1);
    write_row_major(out, p.w2);
    write_vector(out, p.b2);
    write_vector(out, p.ln2_gain);
    write_vector(out, p.ln2_offset);
    write_row_major(out, p.w3);
    write_vector(out, p.b3);
    write_vector(out, p.ln3_gain);
    write_vector(out, p.ln3_offset);
    write_row_major(out, p.w4);
    write_vector(out, p.b4);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::pair<SurrogateGenerator, CheckpointMeta> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(ErrorCode::InvalidArgument, path + " is not a checkpoint file");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len > (1ull << 30))
        throw Error(ErrorCode::InvalidArgument, "corrupt checkpoint header length");
    std::string header_text(len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(len));
    if (!in) throw Error(ErrorCode::IoError, "checkpoint truncated inside the header");

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("corrupt checkpoint header: ") + e.what());
    }

    MlpConfig cfg = config_from_json(header.at("config"));
    CheckpointMeta meta;
    meta.laplacian = laplacian_kind_from_string(header.at("laplacian").get<std::string>());
    meta.diffusion.T = header.at("diffusion").at("T").get<double>();
    meta.diffusion.tau = header.at("diffusion").at("tau").get<double>();
    meta.diffusion.mode =
        diffusion_mode_from_string(header.at("diffusion").at("mode").get<std::string>());
    if (header.contains("training")) meta.training = header.at("training");

    SurrogateGenerator model{cfg, MlpParameters::zeros(cfg)};
    MlpParameters& p = model.params;
    read_row_major(in, p.w1);
    read_vector(in, p.b1);
    read_row_major(in, p.w2);
    read_vector(in, p.b2);
    read_vector(in, p.ln2_gain);
    read_vector(in, p.ln2_offset);
    read_row_major(in, p.w3);
    read_vector(in, p.b3);
    read_vector(in, p.ln3_gain);
    read_vector(in, p.ln3_offset);
    read_row_major(in, p.w4);
    read_vector(in, p.b4);
    if (!p.all_finite())
        throw Error(ErrorCode::InvalidArgument, "checkpoint contains non-finite parameters");
    return {std::move(model), std::move(meta)};
}

std::pair<SurrogateGenerator, CheckpointMeta> load_checkpoint(const std::string& path,
                                                              const MlpConfig& expected) {
    auto loaded = load_checkpoint(path);
    const MlpConfig& got = loaded.first.config;
    if (got.hidden_width != expected.hidden_width || got.n_max != expected.n_max ||
        got.layers != expected.layers || got.use_layer_norm != expected.use_layer_norm ||
        got.layout != expected.layout)
        throw Error(ErrorCode::InvalidArgument,
                    "checkpoint architecture does not match the requested configuration");
    return loaded;
}

}  // namespace g3
