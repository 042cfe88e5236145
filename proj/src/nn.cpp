#include "g3/nn.hpp"

#include <cmath>
#include <string>

#include "g3/error.hpp"

namespace g3 {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

int lower_dim_to_n(long len) {
    long n = static_cast<long>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(len))) / 2.0 + 0.5);
    if (n * (n - 1) / 2 != len)
        throw Error(ErrorCode::ShapeMismatch,
                    "length " + std::to_string(len) + " is not a triangular number");
    return static_cast<int>(n);
}

}  // namespace

int state_dim(StateLayout layout, int n) {
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative node count");
    return layout == StateLayout::LowerTriangle ? n * (n - 1) / 2 : n * n;
}

Eigen::VectorXd flatten_lower(const Eigen::MatrixXd& x) {
    if (x.rows() != x.cols())
        throw Error(ErrorCode::NotSymmetric, "matrix not square");
    if (x.size() > 0 && (x - x.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw Error(ErrorCode::NotSymmetric, "asymmetry exceeds 1e-8");
    const int n = static_cast<int>(x.rows());
    Eigen::VectorXd v(n * (n - 1) / 2);
    int k = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) v[k++] = x(i, j);
    return v;
}

Eigen::MatrixXd unflatten_lower(const Eigen::VectorXd& v) {
    const int n = lower_dim_to_n(v.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    int k = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            x(i, j) = v[k];
            x(j, i) = v[k];
            ++k;
        }
    return x;
}

Eigen::VectorXd flatten_state(const Eigen::MatrixXd& x, StateLayout layout) {
    if (layout == StateLayout::LowerTriangle) return flatten_lower(x);
    if (x.rows() != x.cols()) throw Error(ErrorCode::ShapeMismatch, "matrix not square");
    const int n = static_cast<int>(x.rows());
    Eigen::VectorXd v(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[i * n + j] = x(i, j);
    return v;
}

Eigen::MatrixXd unflatten_state(const Eigen::VectorXd& v, StateLayout layout) {
    if (layout == StateLayout::LowerTriangle) return unflatten_lower(v);
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
    if (static_cast<long>(n) * n != v.size())
        throw Error(ErrorCode::ShapeMismatch,
                    "length " + std::to_string(v.size()) + " is not a square number");
    Eigen::MatrixXd x(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = v[i * n + j];
    return x;
}

std::vector<MlpParameters::TensorView> MlpParameters::tensors() {
    return {
        {w1.data(), w1.size()},       {b1.data(), b1.size()},
        {w2.data(), w2.size()},       {b2.data(), b2.size()},
        {ln2_gain.data(), ln2_gain.size()}, {ln2_offset.data(), ln2_offset.size()},
        {w3.data(), w3.size()},       {b3.data(), b3.size()},
        {ln3_gain.data(), ln3_gain.size()}, {ln3_offset.data(), ln3_offset.size()},
        {w4.data(), w4.size()},       {b4.data(), b4.size()},
    };
}

std::vector<MlpParameters::TensorView> MlpParameters::tensors() const {
    return const_cast<MlpParameters*>(this)->tensors();
}

MlpParameters MlpParameters::zeros(const MlpConfig& cfg) {
    const int dim = state_dim(cfg.layout, cfg.n_max);
    const int din = dim + 1;
    const int w = cfg.hidden_width;
    MlpParameters p;
    p.w1 = Eigen::MatrixXd::Zero(w, din);
    p.b1 = Eigen::VectorXd::Zero(w);
    p.w2 = Eigen::MatrixXd::Zero(w, w);
    p.b2 = Eigen::VectorXd::Zero(w);
    p.ln2_gain = Eigen::VectorXd::Zero(w);
    p.ln2_offset = Eigen::VectorXd::Zero(w);
    p.w3 = Eigen::MatrixXd::Zero(w, w);
    p.b3 = Eigen::VectorXd::Zero(w);
    p.ln3_gain = Eigen::VectorXd::Zero(w);
    p.ln3_offset = Eigen::VectorXd::Zero(w);
    p.w4 = Eigen::MatrixXd::Zero(dim, w);
    p.b4 = Eigen::VectorXd::Zero(dim);
    return p;
}

bool MlpParameters::all_finite() const {
    for (const auto& t : tensors())
        for (long i = 0; i < t.size; ++i)
            if (!std::isfinite(t.data[i])) return false;
    return true;
}

SurrogateGenerator SurrogateGenerator::init(const MlpConfig& cfg, Rng& rng) {
    if (cfg.hidden_width < 1)
        throw Error(ErrorCode::InvalidArgument, "hidden width must be >= 1");
    if (cfg.n_max < 2) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 2");
    SurrogateGenerator model{cfg, MlpParameters::zeros(cfg)};
    auto glorot = [&rng](Eigen::MatrixXd& m, int fan_in, int fan_out) {
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (long k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-limit, limit);
    };
    const int din = model.input_dim();
    const int dout = model.feature_dim();
    const int w = cfg.hidden_width;
    glorot(model.params.w1, din, w);
    glorot(model.params.w2, w, w);
    glorot(model.params.w3, w, w);
    glorot(model.params.w4, w, dout);
    model.params.ln2_gain.setOnes();
    model.params.ln3_gain.setOnes();
    return model;
}

namespace {

struct LayerNormTrace {
    Eigen::MatrixXd x_hat;     // normalized pre-gain activations
    Eigen::VectorXd inv_std;   // per-column 1/sqrt(var + eps)
};

Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& z, const Eigen::VectorXd& gain,
                                   const Eigen::VectorXd& offset, LayerNormTrace& trace) {
    const auto rows = z.rows();
    const auto cols = z.cols();
    trace.x_hat.resize(rows, cols);
    trace.inv_std.resize(cols);
    Eigen::MatrixXd out(rows, cols);
    for (long j = 0; j < cols; ++j) {
        double mu = z.col(j).mean();
        double var = (z.col(j).array() - mu).square().mean();
        double inv = 1.0 / std::sqrt(var + kLnEps);
        trace.inv_std[j] = inv;
        trace.x_hat.col(j) = (z.col(j).array() - mu) * inv;
        out.col(j) = gain.array() * trace.x_hat.col(j).array() + offset.array();
    }
    return out;
}

Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dout, const Eigen::VectorXd& gain,
                                    const LayerNormTrace& trace, Eigen::VectorXd& dgain,
                                    Eigen::VectorXd& doffset) {
    const auto cols = dout.cols();
    dgain = (dout.array() * trace.x_hat.array()).rowwise().sum().matrix();
    doffset = dout.rowwise().sum();
    Eigen::MatrixXd dz(dout.rows(), cols);
    for (long j = 0; j < cols; ++j) {
        Eigen::ArrayXd g = dout.col(j).array() * gain.array();
        double g_mean = g.mean();
        double gx_mean = (g * trace.x_hat.col(j).array()).mean();
        dz.col(j) = (trace.inv_std[j] *
                     (g - g_mean - trace.x_hat.col(j).array() * gx_mean))
                        .matrix();
    }
    return dz;
}

struct ForwardTrace {
    Eigen::MatrixXd z1, h1, h2, h3;
    Eigen::MatrixXd act2, act3;  // post-norm pre-ReLU activations
    LayerNormTrace ln2, ln3;
    Eigen::MatrixXd y;
};

void check_active_size(const SurrogateGenerator& model, int n) {
    if (n > model.config.n_max)
        throw Error(ErrorCode::DimensionExceeded,
                    "active node count " + std::to_string(n) + " exceeds n_max " +
                        std::to_string(model.config.n_max));
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative node count");
}

ForwardTrace run_forward(const SurrogateGenerator& model, const Eigen::MatrixXd& xs,
                         const Eigen::VectorXd& ts, int n) {
    check_active_size(model, n);
    const int d = model.feature_dim(n);
    if (xs.rows() != d)
        throw Error(ErrorCode::ShapeMismatch,
                    "state rows " + std::to_string(xs.rows()) + ", expected " +
                        std::to_string(d));
    if (ts.size() != xs.cols())
        throw Error(ErrorCode::ShapeMismatch, "time vector length mismatch");

    const MlpParameters& p = model.params;
    ForwardTrace tr;

    tr.z1 = p.w1.leftCols(d) * xs;
    tr.z1.noalias() += p.w1.col(p.w1.cols() - 1) * ts.transpose();
    tr.z1.colwise() += p.b1;
    tr.h1 = tr.z1.cwiseMax(0.0);

    Eigen::MatrixXd z2 = p.w2 * tr.h1;
    z2.colwise() += p.b2;
    tr.act2 = model.config.use_layer_norm
                  ? layer_norm_forward(z2, p.ln2_gain, p.ln2_offset, tr.ln2)
                  : z2;
    tr.h2 = tr.act2.cwiseMax(0.0);

    Eigen::MatrixXd z3 = p.w3 * tr.h2;
    z3.colwise() += p.b3;
    tr.act3 = model.config.use_layer_norm
                  ? layer_norm_forward(z3, p.ln3_gain, p.ln3_offset, tr.ln3)
                  : z3;
    tr.h3 = tr.act3.cwiseMax(0.0);

    tr.y = p.w4.topRows(d) * tr.h3;
    tr.y.colwise() += p.b4.head(d);
    return tr;
}

}  // namespace

Eigen::VectorXd forward(const SurrogateGenerator& model, const Eigen::VectorXd& x, double t,
                        int n) {
    Eigen::VectorXd ts(1);
    ts[0] = t;
    return run_forward(model, x, ts, n).y.col(0);
}

Eigen::MatrixXd forward_batch(const SurrogateGenerator& model, const Eigen::MatrixXd& xs,
                              const Eigen::VectorXd& ts, int n) {
    return run_forward(model, xs, ts, n).y;
}

std::pair<double, GradientBundle> loss_and_gradients(const SurrogateGenerator& model,
                                                     const std::vector<BatchItem>& batch) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "no items");
    const int n = batch.front().n;
    for (const BatchItem& item : batch)
        if (item.n != n)
            throw Error(ErrorCode::MixedSizes, "batch mixes node counts " + std::to_string(n) +
                                                   " and " + std::to_string(item.n));
    const int d = model.feature_dim(n);
    const int b = static_cast<int>(batch.size());
    Eigen::MatrixXd xs(d, b);
    Eigen::MatrixXd targets(d, b);
    Eigen::VectorXd ts(b);
    for (int k = 0; k < b; ++k) {
        if (batch[k].x.size() != d || batch[k].target.size() != d)
            throw Error(ErrorCode::ShapeMismatch,
                        "item " + std::to_string(k) + " has wrong state/target length");
        xs.col(k) = batch[k].x;
        targets.col(k) = batch[k].target;
        ts[k] = batch[k].t;
    }

    ForwardTrace tr = run_forward(model, xs, ts, n);
    const MlpParameters& p = model.params;

    Eigen::MatrixXd diff = tr.y - targets;
    double loss = diff.squaredNorm() / b;

    GradientBundle g = MlpParameters::zeros(model.config);
    Eigen::MatrixXd dy = (2.0 / b) * diff;

    g.w4.topRows(d) = dy * tr.h3.transpose();
    g.b4.head(d) = dy.rowwise().sum();
    Eigen::MatrixXd dh3 = p.w4.topRows(d).transpose() * dy;

    Eigen::MatrixXd dact3 = (dh3.array() * (tr.act3.array() > 0.0).cast<double>()).matrix();
    Eigen::MatrixXd dz3 = model.config.use_layer_norm
                              ? layer_norm_backward(dact3, p.ln3_gain, tr.ln3, g.ln3_gain,
                                                    g.ln3_offset)
                              : dact3;
    g.w3 = dz3 * tr.h2.transpose();
    g.b3 = dz3.rowwise().sum();
    Eigen::MatrixXd dh2 = p.w3.transpose() * dz3;

    Eigen::MatrixXd dact2 = (dh2.array() * (tr.act2.array() > 0.0).cast<double>()).matrix();
    Eigen::MatrixXd dz2 = model.config.use_layer_norm
                              ? layer_norm_backward(dact2, p.ln2_gain, tr.ln2, g.ln2_gain,
                                                    g.ln2_offset)
                              : dact2;
    g.w2 = dz2 * tr.h1.transpose();
    g.b2 = dz2.rowwise().sum();
    Eigen::MatrixXd dh1 = p.w2.transpose() * dz2;

    Eigen::MatrixXd dz1 = (dh1.array() * (tr.z1.array() > 0.0).cast<double>()).matrix();
    g.w1.leftCols(d) = dz1 * xs.transpose();
    g.w1.col(g.w1.cols() - 1) = dz1 * ts;
    g.b1 = dz1.rowwise().sum();

    return {loss, std::move(g)};
}

AdamState AdamState::init(const MlpConfig& cfg) {
    return AdamState{MlpParameters::zeros(cfg), MlpParameters::zeros(cfg), 0};
}

void adam_step(SurrogateGenerator& model, const GradientBundle& grads, AdamState& state,
               double lr) {
    auto params = model.params.tensors();
    auto gs = grads.tensors();
    auto ms = state.m.tensors();
    auto vs = state.v.tensors();
    if (params.size() != gs.size())
        throw Error(ErrorCode::ShapeMismatch, "gradient bundle arity mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].size != gs[k].size || params[k].size != ms[k].size ||
            params[k].size != vs[k].size)
            throw Error(ErrorCode::ShapeMismatch,
                        "tensor " + std::to_string(k) + " size mismatch");
        Eigen::Map<Eigen::ArrayXd> pa(params[k].data, params[k].size);
        Eigen::Map<const Eigen::ArrayXd> ga(gs[k].data, gs[k].size);
        Eigen::Map<Eigen::ArrayXd> ma(ms[k].data, ms[k].size);
        Eigen::Map<Eigen::ArrayXd> va(vs[k].data, vs[k].size);
        ma = kAdamBeta1 * ma + (1.0 - kAdamBeta1) * ga;
        va = kAdamBeta2 * va + (1.0 - kAdamBeta2) * ga.square();
        pa -= lr * (ma / bc1) / ((va / bc2).sqrt() + kAdamEps);
    }
}

}  // namespace g3
