#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "g3/checkpoint.hpp"
#include "g3/datasets.hpp"
#include "g3/error.hpp"
#include "g3/eval.hpp"
#include "g3/graph.hpp"
#include "g3/graph_io.hpp"
#include "g3/nn.hpp"
#include "g3/rng.hpp"
#include "g3/sampler.hpp"
#include "g3/trainer.hpp"
#include "manifest.hpp"

namespace g3::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs a path-taking writer against "<path>.tmp", then renames into place.
void atomic_replace(const std::string& path,
                    const std::function<void(const std::string&)>& writer) {
    const std::string tmp = path + ".tmp";
    writer(tmp);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "rename " + tmp + " -> " + path + ": " + ec.message());
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, path + ": " + e.what());
    }
}

// Replaces disconnected graphs by their largest connected component; any
// per-graph covariate vectors are restricted to the kept nodes.
void reduce_to_components(std::vector<Graph>& graphs, std::vector<Eigen::VectorXd>& zs) {
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        if (is_connected(graphs[i])) continue;
        const std::vector<int> keep = largest_component_nodes(graphs[i]);
        if (i < zs.size()) {
            if (zs[i].size() != graphs[i].node_count())
                throw Error(ErrorCode::DimensionMismatch,
                            "covariate length " + std::to_string(zs[i].size()) +
                                " does not match graph " + std::to_string(i) + " with " +
                                std::to_string(graphs[i].node_count()) + " nodes");
            Eigen::VectorXd sub(static_cast<long>(keep.size()));
            for (std::size_t k = 0; k < keep.size(); ++k) sub[static_cast<long>(k)] = zs[i][keep[k]];
            zs[i] = std::move(sub);
        }
        graphs[i] = largest_connected_component(graphs[i]);
    }
}

int max_node_count(const std::vector<Graph>& graphs) {
    int n = 0;
    for (const Graph& g : graphs) n = std::max(n, g.node_count());
    return n;
}

int round_positive_int(double v, const std::string& what) {
    const long r = std::lround(v);
    if (r < 1 || std::abs(v - static_cast<double>(r)) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, what + " must be a positive integer, got " +
                                                    format_double(v));
    return static_cast<int>(r);
}

std::string trim(const std::string& s) {
    const std::size_t first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const std::size_t last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::pair<std::string, std::string>> parse_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::InvalidArgument,
                        path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty() || value.empty())
            throw Error(ErrorCode::InvalidArgument,
                        path + ":" + std::to_string(lineno) + ": expected key = value");
        items.emplace_back(key, value);
    }
    return items;
}

// Fills options the command line left untouched, so precedence stays
// defaults < config file < flags.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : parse_flat_config(path)) {
        CLI::Option* op = cmd->get_option_no_throw("--" + key);
        if (op == nullptr)
            throw Error(ErrorCode::InvalidArgument, path + ": unknown config key \"" + key + "\"");
        if (op->count() > 0) continue;
        op->add_result(value);
        op->run_callback();
    }
}

// ---------------------------------------------------------------- gen-data

struct GenDataOptions {
    std::string config_path;
    std::string kind;
    int n = 32;
    int count = 0;
    std::uint64_t seed = 0;
    std::string out;
    double p_intra = 0.3;
    double p_inter = 0.05;
    int communities = 0;
    double beta_a = 1.0;
    double beta_b = 1.0;
    std::string labels_out;
};

int run_gen_data(const GenDataOptions& o) {
    const auto t0 = Clock::now();
    if (!o.labels_out.empty()) {
        if (o.kind == "planar")
            throw Error(ErrorCode::InvalidArgument, "planar graphs carry no block labels");
        if (o.communities != 2)
            throw Error(ErrorCode::InvalidArgument,
                        "--labels-out encodes two-block membership; set --communities 2");
    }

    std::vector<Graph> graphs;
    std::vector<Eigen::VectorXd> zs;
    graphs.reserve(static_cast<std::size_t>(o.count));
    const Rng data_rng = Rng(o.seed).substream("data");
    for (int i = 0; i < o.count; ++i) {
        Rng item = data_rng.substream("item", static_cast<std::uint64_t>(i));
        if (o.kind == "planar") {
            graphs.push_back(gen_planar(PlanarSpec{o.n}, item));
            continue;
        }
        SbmSpec spec;
        spec.n = o.n;
        spec.p_intra = o.p_intra;
        spec.p_inter = o.p_inter;
        spec.communities = o.communities;
        spec.degree_corrected = o.kind == "dcsbm";
        spec.dc_beta_a = o.beta_a;
        spec.dc_beta_b = o.beta_b;
        LabeledGraph lg = gen_sbm_with_labels(spec, item);
        if (!o.labels_out.empty()) {
            Eigen::VectorXd z(lg.graph.node_count());
            for (long v = 0; v < z.size(); ++v) z[v] = lg.labels[static_cast<std::size_t>(v)] == 0 ? 1.0 : -1.0;
            zs.push_back(std::move(z));
        }
        graphs.push_back(std::move(lg.graph));
    }

    atomic_replace(o.out, [&](const std::string& p) { write_graphs_jsonl(p, graphs); });
    if (!o.labels_out.empty())
        atomic_replace(o.labels_out, [&](const std::string& p) { write_covariates_jsonl(p, zs); });

    Resolved r("gen-data");
    r.add("--kind", o.kind);
    r.add("--n", o.n);
    r.add("--count", o.count);
    if (o.kind != "planar") {
        r.add("--p-intra", o.p_intra);
        r.add("--p-inter", o.p_inter);
        r.add("--communities", o.communities);
    }
    if (o.kind == "dcsbm") {
        r.add("--beta-a", o.beta_a);
        r.add("--beta-b", o.beta_b);
    }
    r.add("--seed", o.seed);
    r.add("--out", o.out);
    if (!o.labels_out.empty()) r.add("--labels-out", o.labels_out);

    RunManifest m;
    m.subcommand = "gen-data";
    m.config = r.config();
    m.seed = o.seed;
    m.outputs.push_back(o.out);
    if (!o.labels_out.empty()) m.outputs.push_back(o.labels_out);
    m.wall_seconds = seconds_since(t0);
    m.rerun = r.rerun();
    write_manifests(m);

    std::cout << "wrote " << graphs.size() << " " << o.kind << " graphs to " << o.out << "\n";
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainOptions {
    std::string config_path;
    std::string data;
    std::string out;
    std::string covariates;
    std::string mode = "symmetric";
    bool mode_given = false;
    std::string laplacian = "combinatorial";
    double T = 6.0;
    double tau = 0.01;
    int hidden_width = 4096;
    int batch_size = 256;
    int epochs = 20;
    double lr0 = 1e-4;
    double lr_decay = 0.99;
    double lr_min = 1e-9;
    int patience = 10;
    double loss_target = 0.0;
    double alpha = 1.0;
    double omega = 0.0;
    std::uint64_t seed = 0;
};

int run_train(const TrainOptions& o) {
    const auto t0 = Clock::now();
    std::string mode_name = o.mode;
    if (o.omega > 0.0) {
        if (o.covariates.empty())
            throw Error(ErrorCode::InvalidArgument, "--omega needs --covariates");
        if (!o.mode_given)
            mode_name = "asymmetric";
        else if (mode_name != "asymmetric")
            throw Error(ErrorCode::InvalidArgument,
                        "covariate-augmented training requires --mode asymmetric");
    }
    const DiffusionMode mode = diffusion_mode_from_string(mode_name);

    std::vector<Graph> graphs = read_graphs_jsonl(o.data);
    std::vector<Eigen::VectorXd> zs;
    if (!o.covariates.empty()) {
        zs = read_covariates_jsonl(o.covariates);
        if (zs.size() != graphs.size())
            throw Error(ErrorCode::DimensionMismatch,
                        "covariates file has " + std::to_string(zs.size()) + " lines for " +
                            std::to_string(graphs.size()) + " graphs");
    }
    reduce_to_components(graphs, zs);

    MlpConfig mlp;
    mlp.hidden_width = o.hidden_width;
    mlp.n_max = max_node_count(graphs);
    mlp.layout = mode == DiffusionMode::Asymmetric ? StateLayout::FullMatrix
                                                   : StateLayout::LowerTriangle;

    TrainConfig tc;
    tc.batch_size_max = o.batch_size;
    tc.epochs = o.epochs;
    tc.lr0 = o.lr0;
    tc.lr_decay = o.lr_decay;
    tc.lr_min = o.lr_min;
    tc.patience = o.patience;
    tc.loss_target = o.loss_target;
    tc.seed = o.seed;
    tc.diffusion = DiffusionConfig{o.T, o.tau, mode};
    tc.laplacian = laplacian_kind_from_string(o.laplacian);
    tc.omega = o.omega;
    if (o.omega > 0.0) tc.covariates = zs;

    auto [model, report] = train(graphs, mlp, tc);

    double degree_log_mean = 0.0, degree_log_var = 0.0;
    const double avg_degree_scale = estimate_avg_degree_scale(graphs);
    if (avg_degree_scale > 0.0)
        std::tie(degree_log_mean, degree_log_var) = estimate_degree_log_stats(graphs);

    CheckpointMeta meta;
    meta.laplacian = tc.laplacian;
    meta.diffusion = tc.diffusion;
    meta.training = {
        {"alpha", o.alpha},
        {"avg_degree_scale", avg_degree_scale},
        {"threshold", estimate_threshold(graphs)},
        {"degree_log_mean", degree_log_mean},
        {"degree_log_var", degree_log_var},
        {"omega", o.omega},
        {"graphs", graphs.size()},
        {"epochs", o.epochs},
        {"iterations", report.iterations},
        {"final_lr", report.final_lr},
        {"final_loss", report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back()},
        {"seed", o.seed},
    };
    atomic_replace(o.out, [&](const std::string& p) { save_checkpoint(p, model, meta); });

    Resolved r("train");
    r.add("--data", o.data);
    r.add("--mode", mode_name);
    r.add("--laplacian", o.laplacian);
    r.add("--T", o.T);
    r.add("--tau", o.tau);
    r.add("--hidden-width", o.hidden_width);
    r.add("--batch-size", o.batch_size);
    r.add("--epochs", o.epochs);
    r.add("--lr0", o.lr0);
    r.add("--lr-decay", o.lr_decay);
    r.add("--lr-min", o.lr_min);
    r.add("--patience", o.patience);
    r.add("--loss-target", o.loss_target);
    r.add("--alpha", o.alpha);
    if (!o.covariates.empty()) {
        r.add("--covariates", o.covariates);
        r.add("--omega", o.omega);
    }
    r.add("--seed", o.seed);
    r.add("--out", o.out);

    RunManifest m;
    m.subcommand = "train";
    m.config = r.config();
    m.seed = o.seed;
    m.inputs.push_back(o.data);
    if (!o.covariates.empty()) m.inputs.push_back(o.covariates);
    m.outputs.push_back(o.out);
    m.wall_seconds = seconds_since(t0);
    m.rerun = r.rerun();
    write_manifests(m);

    std::cout << "trained on " << graphs.size() << " graphs, " << report.iterations
              << " iterations, final loss "
              << format_double(report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back())
              << ", wrote " << o.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- sample

struct SampleOptions {
    std::string config_path;
    std::string ckpt;
    std::string out;
    std::string conditional;
    int n = 0;
    int count = 0;
    int M = 100;
    double alpha = 0.0;
    bool alpha_given = false;
    double threshold = 0.0;
    bool threshold_given = false;
    double clip_lo = 0.0;
    bool clip_lo_given = false;
    double clip_hi = 0.0;
    bool clip_hi_given = false;
    bool bernoulli = false;
    std::uint64_t seed = 0;
};

int run_sample(const SampleOptions& o) {
    const auto t0 = Clock::now();
    auto [model, meta] = load_checkpoint(o.ckpt);
    const nlohmann::json& tr = meta.training;

    SampleConfig sc;
    sc.n = o.n;
    sc.M = o.M;
    sc.mode = meta.diffusion.mode;
    sc.alpha = o.alpha_given ? o.alpha : tr.value("alpha", 1.0);
    sc.avg_degree_scale = tr.value("avg_degree_scale", 1.0);
    sc.degree_log_mean = tr.value("degree_log_mean", 0.0);
    sc.degree_log_var = tr.value("degree_log_var", 0.0);
    sc.seed = o.seed;

    double omega_hat = 0.0;
    Eigen::VectorXd z;
    if (!o.conditional.empty()) {
        const nlohmann::json cj = read_json_file(o.conditional);
        if (!cj.contains("z") || !cj["z"].is_array())
            throw Error(ErrorCode::InvalidArgument,
                        o.conditional + " needs a \"z\" array of per-node covariates");
        const auto values = cj["z"].get<std::vector<double>>();
        z = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
        omega_hat = cj.value("omega", tr.value("omega", 0.0));
        if (omega_hat <= 0.0)
            throw Error(ErrorCode::InvalidArgument,
                        "conditional sampling needs omega > 0 (covariates file or checkpoint)");
        sc.omega = omega_hat;
        sc.covariates = z;
    }
    sc.clip_lo = o.clip_lo_given ? o.clip_lo : (omega_hat > 0.0 ? -(2.0 + omega_hat) : 0.0);
    sc.clip_hi = o.clip_hi_given ? o.clip_hi : (omega_hat > 0.0 ? o.n + omega_hat : 1.0);
    const double threshold = o.threshold_given ? o.threshold : tr.value("threshold", 0.5);

    const Rng sample_rng = Rng(o.seed).substream("sample");
    Rng draw_rng = sample_rng;
    const std::vector<Eigen::MatrixXd> states = euler_sample_many(model, sc, o.count, draw_rng);

    std::vector<Graph> graphs;
    graphs.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (omega_hat > 0.0) {
            graphs.push_back(conditional_to_graph(states[i], z, omega_hat));
        } else if (o.bernoulli) {
            Rng edge_rng = sample_rng.substream("binarise", i);
            graphs.push_back(bernoulli_to_graph(states[i], edge_rng));
        } else {
            graphs.push_back(threshold_to_graph(states[i], threshold));
        }
    }
    atomic_replace(o.out, [&](const std::string& p) { write_graphs_jsonl(p, graphs); });

    Resolved r("sample");
    r.add("--ckpt", o.ckpt);
    r.add("--n", o.n);
    r.add("--count", o.count);
    r.add("--M", o.M);
    r.add("--alpha", sc.alpha);
    if (!o.conditional.empty()) r.add("--conditional", o.conditional);
    if (omega_hat == 0.0 && !o.bernoulli) r.add("--threshold", threshold);
    r.add_switch("--bernoulli", o.bernoulli);
    r.add("--clip-lo", sc.clip_lo);
    r.add("--clip-hi", sc.clip_hi);
    r.add("--seed", o.seed);
    r.add("--out", o.out);

    RunManifest m;
    m.subcommand = "sample";
    m.config = r.config();
    m.seed = o.seed;
    m.inputs.push_back(o.ckpt);
    if (!o.conditional.empty()) m.inputs.push_back(o.conditional);
    m.outputs.push_back(o.out);
    m.wall_seconds = seconds_since(t0);
    m.rerun = r.rerun();
    write_manifests(m);

    std::cout << "sampled " << graphs.size() << " graphs (n=" << o.n << ", M=" << o.M
              << ") to " << o.out << "\n";
    return 0;
}

// --------------------------------------------------------------------- eval

struct EvalOptions {
    std::string generated;
    std::string reference;
    std::string out;
    std::string csv;
    double sigma = 1.0;
};

int run_eval(const EvalOptions& o) {
    const auto t0 = Clock::now();
    const std::vector<Graph> generated = read_graphs_jsonl(o.generated);
    const std::vector<Graph> reference = read_graphs_jsonl(o.reference);
    MmdConfig mc;
    mc.sigma = o.sigma;
    const EvalReport report = evaluate(generated, reference, mc);

    const nlohmann::json j = {
        {"clustering", report.clustering},
        {"degree", report.degree},
        {"orbit", report.orbit},
        {"spectrum", report.spectrum},
        {"triangles", report.triangles},
        {"non_unique_fraction", report.non_unique_fraction},
    };
    atomic_write_text(o.out, j.dump(2) + "\n");
    if (!o.csv.empty()) {
        std::ostringstream csv;
        csv << "metric,value\n";
        csv << "clustering," << format_double(report.clustering) << "\n";
        csv << "degree," << format_double(report.degree) << "\n";
        csv << "orbit," << format_double(report.orbit) << "\n";
        csv << "spectrum," << format_double(report.spectrum) << "\n";
        csv << "triangles," << format_double(report.triangles) << "\n";
        csv << "non_unique_fraction," << format_double(report.non_unique_fraction) << "\n";
        atomic_write_text(o.csv, csv.str());
    }

    Resolved r("eval");
    r.add("--generated", o.generated);
    r.add("--reference", o.reference);
    r.add("--sigma", o.sigma);
    r.add("--out", o.out);
    if (!o.csv.empty()) r.add("--csv", o.csv);

    RunManifest m;
    m.subcommand = "eval";
    m.config = r.config();
    m.inputs = {o.generated, o.reference};
    m.outputs.push_back(o.out);
    if (!o.csv.empty()) m.outputs.push_back(o.csv);
    m.wall_seconds = seconds_since(t0);
    m.rerun = r.rerun();
    write_manifests(m);

    std::cout << "degree=" << format_double(report.degree)
              << " clustering=" << format_double(report.clustering)
              << " orbit=" << format_double(report.orbit)
              << " spectrum=" << format_double(report.spectrum)
              << " triangles=" << format_double(report.triangles)
              << " non_unique=" << format_double(report.non_unique_fraction) << "\n";
    return 0;
}

// ------------------------------------------------------------------- import

struct ImportOptions {
    std::string edges;
    std::string out;
};

int run_import(const ImportOptions& o) {
    const auto t0 = Clock::now();
    const std::vector<Graph> graphs = read_graphs_jsonl(o.edges);
    atomic_replace(o.out, [&](const std::string& p) { write_graphs_jsonl(p, graphs); });

    Resolved r("import");
    r.add("--edges", o.edges);
    r.add("--out", o.out);

    RunManifest m;
    m.subcommand = "import";
    m.config = r.config();
    m.inputs.push_back(o.edges);
    m.outputs.push_back(o.out);
    m.wall_seconds = seconds_since(t0);
    m.rerun = r.rerun();
    write_manifests(m);

    std::cout << "imported " << graphs.size() << " graphs to " << o.out << "\n";
    return 0;
}

// -------------------------------------------------------------------- sweep

struct SweepOptions {
    std::string config_path;
    std::string data;
    std::string out;
    std::string param;
    std::vector<double> values;
    int seeds = 1;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    double T = 6.0;
    double tau = 0.01;
    int hidden_width = 4096;
    int batch_size = 256;
    int epochs = 20;
    double lr0 = 1e-4;
    double lr_decay = 0.99;
    double lr_min = 1e-9;
    int patience = 10;
    double loss_target = 0.0;
    double alpha = 1.0;
    int M = 100;
};

struct CellRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    EvalReport report;
    bool failed = false;
    std::string error;
};

CellRow run_sweep_cell(const std::vector<Graph>& all, const SweepOptions& o, double value,
                       std::uint64_t cell_seed) {
    CellRow row;
    row.value = value;
    row.seed = cell_seed;

    auto [train_graphs, test_graphs] = split(all, SplitSpec{o.train_fraction, cell_seed});
    if (test_graphs.empty())
        throw Error(ErrorCode::TooFewGraphs, "held-out split is empty");

    double T = o.T;
    double alpha = o.alpha;
    int hidden_width = o.hidden_width;
    int M = o.M;
    if (o.param == "T") {
        T = value;
    } else if (o.param == "alpha") {
        alpha = value;
    } else if (o.param == "w") {
        hidden_width = round_positive_int(value, "w");
    } else if (o.param == "N") {
        const int N = round_positive_int(value, "N");
        if (static_cast<std::size_t>(N) < train_graphs.size())
            train_graphs.resize(static_cast<std::size_t>(N));
    } else if (o.param == "M") {
        M = round_positive_int(value, "M");
    }

    MlpConfig mlp;
    mlp.hidden_width = hidden_width;
    mlp.n_max = max_node_count(train_graphs);

    TrainConfig tc;
    tc.batch_size_max = o.batch_size;
    tc.epochs = o.epochs;
    tc.lr0 = o.lr0;
    tc.lr_decay = o.lr_decay;
    tc.lr_min = o.lr_min;
    tc.patience = o.patience;
    tc.loss_target = o.loss_target;
    tc.seed = cell_seed;
    tc.diffusion = DiffusionConfig{T, o.tau, DiffusionMode::Symmetric};

    auto [model, report] = train(train_graphs, mlp, tc);

    SampleConfig sc;
    sc.n = mlp.n_max;
    sc.M = M;
    sc.alpha = alpha;
    sc.avg_degree_scale = estimate_avg_degree_scale(train_graphs);
    sc.seed = cell_seed;
    Rng sample_rng = Rng(cell_seed).substream("sample");
    const std::vector<Eigen::MatrixXd> states =
        euler_sample_many(model, sc, static_cast<int>(test_graphs.size()), sample_rng);

    const double threshold = estimate_threshold(train_graphs);
    std::vector<Graph> generated;
    generated.reserve(states.size());
    for (const Eigen::MatrixXd& x : states) generated.push_back(threshold_to_graph(x, threshold));

    row.report = evaluate(generated, test_graphs, MmdConfig{});
    return row;
}

int sweep_worker_count(int cells) {
    long threads = 1;
    if (const char* env = std::getenv("G3_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) threads = v;
    }
    return static_cast<int>(std::clamp(threads, 1L, static_cast<long>(std::max(1, cells))));
}

void append_csv_row(std::ostringstream& csv, const std::string& param, double value,
                    const std::string& seed_label, const EvalReport& r) {
    csv << param << "," << format_double(value) << "," << seed_label << ","
        << format_double(r.degree) << "," << format_double(r.clustering) << ","
        << format_double(r.orbit) << "," << format_double(r.spectrum) << ","
        << format_double(r.triangles) << "," << format_double(r.non_unique_fraction) << "\n";
}

int run_sweep(const SweepOptions& o) {
    const auto t0 = Clock::now();
    static const std::vector<std::string> kParams = {"T", "alpha", "w", "N", "M"};
    if (std::find(kParams.begin(), kParams.end(), o.param) == kParams.end())
        throw Error(ErrorCode::InvalidArgument, "--param must be one of T, alpha, w, N, M");
    if (o.values.empty()) throw Error(ErrorCode::InvalidArgument, "--values must be non-empty");
    if (o.seeds < 1) throw Error(ErrorCode::InvalidArgument, "--seeds must be at least 1");

    std::vector<Graph> graphs = read_graphs_jsonl(o.data);
    std::vector<Eigen::VectorXd> no_covariates;
    reduce_to_components(graphs, no_covariates);

    const int cells = static_cast<int>(o.values.size()) * o.seeds;
    std::vector<CellRow> rows(static_cast<std::size_t>(cells));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next.fetch_add(1); c < cells; c = next.fetch_add(1)) {
            const double value = o.values[static_cast<std::size_t>(c / o.seeds)];
            const std::uint64_t cell_seed = o.seed + static_cast<std::uint64_t>(c % o.seeds);
            try {
                rows[static_cast<std::size_t>(c)] = run_sweep_cell(graphs, o, value, cell_seed);
            } catch (const Error& e) {
                CellRow& row = rows[static_cast<std::size_t>(c)];
                row.value = value;
                row.seed = cell_seed;
                row.failed = true;
                row.error = e.what();
            } catch (const std::exception& e) {
                CellRow& row = rows[static_cast<std::size_t>(c)];
                row.value = value;
                row.seed = cell_seed;
                row.failed = true;
                row.error = e.what();
            }
        }
    };
    const int threads = sweep_worker_count(cells);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::ostringstream csv;
    csv << "param,value,seed,degree,clustering,orbit,spectrum,triangles,non_unique_fraction\n";
    for (std::size_t vi = 0; vi < o.values.size(); ++vi) {
        EvalReport mean;
        for (int si = 0; si < o.seeds; ++si) {
            const CellRow& row = rows[vi * static_cast<std::size_t>(o.seeds) +
                                      static_cast<std::size_t>(si)];
            const EvalReport r =
                row.failed ? EvalReport{nan, nan, nan, nan, nan, nan} : row.report;
            append_csv_row(csv, o.param, row.value, std::to_string(row.seed), r);
            mean.degree += r.degree / o.seeds;
            mean.clustering += r.clustering / o.seeds;
            mean.orbit += r.orbit / o.seeds;
            mean.spectrum += r.spectrum / o.seeds;
            mean.triangles += r.triangles / o.seeds;
            mean.non_unique_fraction += r.non_unique_fraction / o.seeds;
            if (row.failed)
                std::cerr << "E:SweepCell: value=" << format_double(row.value)
                          << " seed=" << row.seed << ": " << row.error << "\n";
        }
        append_csv_row(csv, o.param, o.values[vi], "mean", mean);
    }
    atomic_write_text(o.out, csv.str());

    Resolved r("sweep");
    r.add("--data", o.data);
    r.add("--param", o.param);
    r.add("--values", o.values);
    r.add("--seeds", o.seeds);
    r.add("--train-fraction", o.train_fraction);
    r.add("--T", o.T);
    r.add("--tau", o.tau);
    r.add("--hidden-width", o.hidden_width);
    r.add("--batch-size", o.batch_size);
    r.add("--epochs", o.epochs);
    r.add("--lr0", o.lr0);
    r.add("--lr-decay", o.lr_decay);
    r.add("--lr-min", o.lr_min);
    r.add("--patience", o.patience);
    r.add("--loss-target", o.loss_target);
    r.add("--alpha", o.alpha);
    r.add("--M", o.M);
    r.add("--seed", o.seed);
    r.add("--out", o.out);

    RunManifest m;
    m.subcommand = "sweep";
    m.config = r.config();
    m.seed = o.seed;
    m.inputs.push_back(o.data);
    m.outputs.push_back(o.out);
    m.wall_seconds = seconds_since(t0);
    m.rerun = r.rerun();
    write_manifests(m);

    std::cout << "swept " << o.param << " over " << o.values.size() << " values x " << o.seeds
              << " seeds to " << o.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- wiring

void add_train_like_options(CLI::App* cmd, double& T, double& tau, int& hidden_width,
                            int& batch_size, int& epochs, double& lr0, double& lr_decay,
                            double& lr_min, int& patience, double& loss_target, double& alpha) {
    cmd->add_option("--T", T, "maximum diffusion time");
    cmd->add_option("--tau", tau, "minimum diffusion time");
    cmd->add_option("--hidden-width,-w", hidden_width, "MLP hidden width");
    cmd->add_option("--batch-size", batch_size, "maximum training batch size");
    cmd->add_option("--epochs", epochs, "passes over the training set");
    cmd->add_option("--lr0", lr0, "initial Adam learning rate");
    cmd->add_option("--lr-decay", lr_decay, "plateau decay factor");
    cmd->add_option("--lr-min", lr_min, "learning-rate floor");
    cmd->add_option("--patience", patience, "plateau iterations before a decay");
    cmd->add_option("--loss-target", loss_target, "early-stop loss, 0 disables");
    cmd->add_option("--alpha", alpha, "Dirichlet concentration of the sampling base");
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"graph generation via heat-kernel diffusion and generator matching"};
    app.name("g3");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    int exit_code = 0;

    auto gen = std::make_shared<GenDataOptions>();
    {
        CLI::App* cmd = app.add_subcommand("gen-data", "generate a synthetic graph dataset");
        cmd->add_option("--config", gen->config_path, "flat key = value configuration file");
        cmd->add_option("--kind", gen->kind, "dataset family")
            ->required()
            ->check(CLI::IsMember({"sbm", "dcsbm", "planar"}));
        cmd->add_option("--n", gen->n, "nodes per graph");
        cmd->add_option("--count", gen->count, "number of graphs")
            ->required()
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--p-intra", gen->p_intra, "within-block edge probability");
        cmd->add_option("--p-inter", gen->p_inter, "between-block edge probability");
        cmd->add_option("--communities", gen->communities,
                        "number of blocks, 0 draws from {2..5} per graph");
        cmd->add_option("--beta-a", gen->beta_a, "degree-correction Beta shape a");
        cmd->add_option("--beta-b", gen->beta_b, "degree-correction Beta shape b");
        cmd->add_option("--labels-out", gen->labels_out,
                        "also write {\"z\": [...]} block covariates per graph");
        cmd->add_option("--seed", gen->seed, "random seed");
        cmd->add_option("--out", gen->out, "output JSONL path")->required();
        cmd->callback([cmd, gen, &exit_code] {
            apply_config_file(cmd, gen->config_path);
            exit_code = run_gen_data(*gen);
        });
    }

    auto tro = std::make_shared<TrainOptions>();
    {
        CLI::App* cmd = app.add_subcommand("train", "fit the generator surrogate to a dataset");
        cmd->add_option("--config", tro->config_path, "flat key = value configuration file");
        cmd->add_option("--data", tro->data, "training graphs JSONL")->required();
        CLI::Option* mode_opt =
            cmd->add_option("--mode", tro->mode, "diffusion mode")
                ->check(CLI::IsMember({"symmetric", "asymmetric"}));
        cmd->add_option("--laplacian", tro->laplacian, "Laplacian kind")
            ->check(CLI::IsMember({"combinatorial", "normalized"}));
        add_train_like_options(cmd, tro->T, tro->tau, tro->hidden_width, tro->batch_size,
                               tro->epochs, tro->lr0, tro->lr_decay, tro->lr_min, tro->patience,
                               tro->loss_target, tro->alpha);
        cmd->add_option("--covariates", tro->covariates, "per-graph {\"z\": [...]} JSONL");
        cmd->add_option("--omega", tro->omega, "covariate weight in L + omega z z^T");
        cmd->add_option("--seed", tro->seed, "random seed");
        cmd->add_option("--out", tro->out, "checkpoint path")->required();
        cmd->callback([cmd, tro, mode_opt, &exit_code] {
            apply_config_file(cmd, tro->config_path);
            tro->mode_given = mode_opt->count() > 0;
            exit_code = run_train(*tro);
        });
    }

    auto smo = std::make_shared<SampleOptions>();
    {
        CLI::App* cmd = app.add_subcommand("sample", "generate graphs from a checkpoint");
        cmd->add_option("--config", smo->config_path, "flat key = value configuration file");
        cmd->add_option("--ckpt", smo->ckpt, "checkpoint path")->required();
        cmd->add_option("--n", smo->n, "nodes per sample")->required();
        cmd->add_option("--count", smo->count, "number of samples")
            ->required()
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--M", smo->M, "Euler steps");
        CLI::Option* alpha_opt = cmd->add_option(
            "--alpha", smo->alpha, "Dirichlet concentration, default from the checkpoint");
        CLI::Option* thr_opt = cmd->add_option(
            "--threshold", smo->threshold, "edge cutoff, default from the checkpoint");
        CLI::Option* lo_opt = cmd->add_option("--clip-lo", smo->clip_lo, "state clip lower bound");
        CLI::Option* hi_opt = cmd->add_option("--clip-hi", smo->clip_hi, "state clip upper bound");
        cmd->add_flag("--bernoulli", smo->bernoulli,
                      "draw edges Bernoulli(entry) instead of thresholding");
        cmd->add_option("--conditional", smo->conditional,
                        "covariates file {\"z\": [...], \"omega\": <real>}");
        cmd->add_option("--seed", smo->seed, "random seed");
        cmd->add_option("--out", smo->out, "output JSONL path")->required();
        cmd->callback([cmd, smo, alpha_opt, thr_opt, lo_opt, hi_opt, &exit_code] {
            apply_config_file(cmd, smo->config_path);
            smo->alpha_given = alpha_opt->count() > 0;
            smo->threshold_given = thr_opt->count() > 0;
            smo->clip_lo_given = lo_opt->count() > 0;
            smo->clip_hi_given = hi_opt->count() > 0;
            exit_code = run_sample(*smo);
        });
    }

    auto evo = std::make_shared<EvalOptions>();
    {
        CLI::App* cmd = app.add_subcommand("eval", "compare two graph samples by kernel MMD");
        cmd->add_option("--generated", evo->generated, "generated graphs JSONL")->required();
        cmd->add_option("--reference", evo->reference, "reference graphs JSONL")->required();
        cmd->add_option("--sigma", evo->sigma, "Gaussian kernel bandwidth");
        cmd->add_option("--out", evo->out, "report JSON path")->required();
        cmd->add_option("--csv", evo->csv, "also write one metric per row");
        cmd->callback([evo, &exit_code] { exit_code = run_eval(*evo); });
    }

    auto imo = std::make_shared<ImportOptions>();
    {
        CLI::App* cmd = app.add_subcommand("import", "validate and normalize a graphs file");
        cmd->add_option("--edges", imo->edges, "input JSONL path")->required();
        cmd->add_option("--out", imo->out, "output JSONL path")->required();
        cmd->callback([imo, &exit_code] { exit_code = run_import(*imo); });
    }

    auto swo = std::make_shared<SweepOptions>();
    {
        CLI::App* cmd = app.add_subcommand(
            "sweep", "train / sample / evaluate across a parameter grid");
        cmd->add_option("--config", swo->config_path, "flat key = value configuration file");
        cmd->add_option("--data", swo->data, "graphs JSONL, split 80/20 per cell")->required();
        cmd->add_option("--param", swo->param, "swept parameter")
            ->required()
            ->check(CLI::IsMember({"T", "alpha", "w", "N", "M"}));
        cmd->add_option("--values", swo->values, "comma-separated values")
            ->required()
            ->delimiter(',');
        cmd->add_option("--seeds", swo->seeds, "seeds per value, {seed..seed+r-1}");
        cmd->add_option("--train-fraction", swo->train_fraction, "per-cell train share");
        add_train_like_options(cmd, swo->T, swo->tau, swo->hidden_width, swo->batch_size,
                               swo->epochs, swo->lr0, swo->lr_decay, swo->lr_min, swo->patience,
                               swo->loss_target, swo->alpha);
        cmd->add_option("--M", swo->M, "Euler steps");
        cmd->add_option("--seed", swo->seed, "first cell seed");
        cmd->add_option("--out", swo->out, "output CSV path")->required();
        cmd->callback([cmd, swo, &exit_code] {
            apply_config_file(cmd, swo->config_path);
            exit_code = run_sweep(*swo);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::string message = e.what();
        const std::string prefix = std::string(to_string(e.code())) + ": ";
        if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
        std::cerr << "E:" << to_string(e.code()) << ": " << message << "\n";
        return e.numerical_abort() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "E:Internal: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}

}  // namespace g3::cli
