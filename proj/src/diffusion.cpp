#include "g3/diffusion.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "g3/error.hpp"

namespace g3 {

HeatKernel::HeatKernel(SpectralDecomposition spectral) : spectral_(std::move(spectral)) {}

const Eigen::MatrixXd& HeatKernel::at(double s) const {
    if (s < 0.0) throw Error(ErrorCode::NegativeTime, "diffusion time " + std::to_string(s));
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(s);
    if (it == cache_.end())
        it = cache_.emplace(s, heat_kernel_at(spectral_, s)).first;
    return it->second;
}

Eigen::MatrixXd heat_kernel_at(const SpectralDecomposition& spectral, double s) {
    if (s < 0.0) throw Error(ErrorCode::NegativeTime, "diffusion time " + std::to_string(s));
    Eigen::VectorXd decay = (-s * spectral.eigenvalues.array()).exp();
    return spectral.eigenvectors * decay.asDiagonal() * spectral.eigenvectors.transpose();
}

Eigen::MatrixXd diffuse(const Eigen::MatrixXd& y0, const HeatKernel& kernel, double s,
                        DiffusionMode mode) {
    if (y0.rows() != kernel.dim() || y0.cols() != kernel.dim())
        throw Error(ErrorCode::DimensionMismatch,
                    "state is " + std::to_string(y0.rows()) + "x" + std::to_string(y0.cols()) +
                        ", kernel dimension " + std::to_string(kernel.dim()));
    const Eigen::MatrixXd& h = kernel.at(s);
    if (mode == DiffusionMode::Symmetric) return h * y0 * h;
    return h * y0;
}

Eigen::MatrixXd diffuse(const Eigen::MatrixXd& y0, const SpectralDecomposition& spectral,
                        double s, DiffusionMode mode) {
    const auto dim = spectral.eigenvalues.size();
    if (y0.rows() != dim || y0.cols() != dim)
        throw Error(ErrorCode::DimensionMismatch,
                    "state is " + std::to_string(y0.rows()) + "x" + std::to_string(y0.cols()) +
                        ", kernel dimension " + std::to_string(dim));
    const Eigen::MatrixXd h = heat_kernel_at(spectral, s);
    if (mode == DiffusionMode::Symmetric) return h * y0 * h;
    return h * y0;
}

Eigen::MatrixXd true_generator(const Eigen::MatrixXd& laplacian, const Eigen::MatrixXd& x,
                               double T, DiffusionMode mode) {
    if (laplacian.rows() != laplacian.cols() || laplacian.rows() != x.rows() ||
        x.rows() != x.cols())
        throw Error(ErrorCode::DimensionMismatch, "generator operands must be square and equal");
    if (mode == DiffusionMode::Symmetric) return T * (laplacian * x + x * laplacian);
    return T * (laplacian * x);
}

DiffusionState rescaled_state(const Eigen::MatrixXd& y0, const HeatKernel& kernel, double t,
                              const DiffusionConfig& cfg) {
    if (t < 0.0 || t > 1.0)
        throw Error(ErrorCode::InvalidArgument, "rescaled time must lie in [0,1]");
    return DiffusionState{diffuse(y0, kernel, cfg.T * (1.0 - t), cfg.mode), t, cfg.mode};
}

Eigen::MatrixXd forward_limit(const Eigen::MatrixXd& y0, DiffusionMode mode) {
    if (y0.size() > 0 && y0.minCoeff() < 0.0)
        throw Error(ErrorCode::NegativeEntries, "limit formula assumes a nonnegative matrix");
    const auto n = y0.rows();
    if (mode == DiffusionMode::Symmetric) {
        double scale = y0.sum() / static_cast<double>(n * n);
        return Eigen::MatrixXd::Constant(n, n, scale);
    }
    Eigen::RowVectorXd col_means = y0.colwise().sum() / static_cast<double>(n);
    return Eigen::VectorXd::Ones(n) * col_means;
}

Eigen::MatrixXd rw_kernel_at(const Graph& g, long t, bool lazy) {
    if (t < 0) throw Error(ErrorCode::NegativeTime, "step count " + std::to_string(t));
    const int n = g.node_count();
    Eigen::VectorXd d = g.degree_vector();
    for (int i = 0; i < n; ++i)
        if (d[i] == 0.0)
            throw Error(ErrorCode::IsolatedNode, "node " + std::to_string(i) + " has degree 0");
    Eigen::MatrixXd step = d.cwiseInverse().asDiagonal() * g.adjacency();
    if (lazy) step = 0.5 * (Eigen::MatrixXd::Identity(n, n) + step);
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd base = std::move(step);
    long k = t;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

}  // namespace g3
