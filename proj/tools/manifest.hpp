#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace g3::cli {

inline constexpr const char* kVersion = "g3-0.1.0";

// Shortest decimal form that parses back to the same double. NaN and
// infinities are spelled out ("nan", "inf", "-inf"); JSON would turn them
// into null.
std::string format_double(double v);

// Write-to-temporary-then-rename so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

// Sidecar describing one CLI invocation: enough to rerun it bit-identically.
struct RunManifest {
    std::string subcommand;
    nlohmann::json config = nlohmann::json::object();  // resolved key -> value
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    std::vector<std::string> rerun;  // normalized argv, binary name excluded
};

nlohmann::json manifest_to_json(const RunManifest& m);

// One "<artifact>.manifest.json" per output path, written atomically.
void write_manifests(const RunManifest& m);

// Accumulates the resolved configuration of a run and, in parallel, the
// normalized argv that reproduces it. Keys are the long flag names without
// the leading dashes.
class Resolved {
public:
    explicit Resolved(const std::string& subcommand) { rerun_.push_back(subcommand); }

    void add(const std::string& flag, const std::string& v);
    void add(const std::string& flag, const char* v) { add(flag, std::string(v)); }
    void add(const std::string& flag, double v);
    void add(const std::string& flag, int v);
    void add(const std::string& flag, std::uint64_t v);
    void add(const std::string& flag, const std::vector<double>& v);
    void add_switch(const std::string& flag, bool set);

    const nlohmann::json& config() const { return config_; }
    const std::vector<std::string>& rerun() const { return rerun_; }

private:
    std::string key(const std::string& flag) const { return flag.substr(2); }
    void arg(const std::string& flag, const std::string& v);

    nlohmann::json config_ = nlohmann::json::object();
    std::vector<std::string> rerun_;
};

}  // namespace g3::cli
