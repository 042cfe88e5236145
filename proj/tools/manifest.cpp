#include "manifest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "g3/error.hpp"

namespace g3::cli {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return nlohmann::json(v).dump();
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "rename " + tmp + " -> " + path + ": " + ec.message());
}

nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["version"] = kVersion;
    j["seed"] = m.seed;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    j["rerun"] = m.rerun;
    return j;
}

void write_manifests(const RunManifest& m) {
    const std::string text = manifest_to_json(m).dump(2) + "\n";
    for (const std::string& artifact : m.outputs)
        atomic_write_text(artifact + ".manifest.json", text);
}

void Resolved::arg(const std::string& flag, const std::string& v) {
    rerun_.push_back(flag);
    rerun_.push_back(v);
}

void Resolved::add(const std::string& flag, const std::string& v) {
    config_[key(flag)] = v;
    arg(flag, v);
}

void Resolved::add(const std::string& flag, double v) {
    config_[key(flag)] = v;
    arg(flag, format_double(v));
}

void Resolved::add(const std::string& flag, int v) {
    config_[key(flag)] = v;
    arg(flag, std::to_string(v));
}

void Resolved::add(const std::string& flag, std::uint64_t v) {
    config_[key(flag)] = v;
    arg(flag, std::to_string(v));
}

void Resolved::add(const std::string& flag, const std::vector<double>& v) {
    config_[key(flag)] = v;
    std::string joined;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) joined += ',';
        joined += format_double(v[i]);
    }
    arg(flag, joined);
}

void Resolved::add_switch(const std::string& flag, bool set) {
    config_[key(flag)] = set;
    if (set) rerun_.push_back(flag);
}

}  // namespace g3::cli
