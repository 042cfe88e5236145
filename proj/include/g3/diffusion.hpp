#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include <Eigen/Dense>

#include "g3/graph.hpp"

namespace g3 {

enum class DiffusionMode { Symmetric, Asymmetric };

struct DiffusionConfig {
    double T = 6.0;      // max diffusion time
    double tau = 0.01;   // minimum diffusion time
    DiffusionMode mode = DiffusionMode::Symmetric;
};

// e^{-sL} evaluated spectrally as U diag(e^{-s lambda_i}) U^T, with a cache
// over s so one decomposition serves a whole training run. The cache is
// mutex-guarded; entries are node-stable so returned references stay valid.
class HeatKernel {
public:
    explicit HeatKernel(SpectralDecomposition spectral);

    const Eigen::MatrixXd& at(double s) const;
    int dim() const { return static_cast<int>(spectral_.eigenvalues.size()); }
    const SpectralDecomposition& spectral() const { return spectral_; }

private:
    SpectralDecomposition spectral_;
    mutable std::mutex mutex_;
    mutable std::map<double, Eigen::MatrixXd> cache_;
};

Eigen::MatrixXd heat_kernel_at(const SpectralDecomposition& spectral, double s);

// Symmetric: H_s Y0 H_s.  Asymmetric: H_s Y0.
Eigen::MatrixXd diffuse(const Eigen::MatrixXd& y0, const HeatKernel& kernel, double s,
                        DiffusionMode mode);

// Uncached variant for callers that evaluate at ever-new times, e.g. a
// training loop drawing random t per item; the HeatKernel cache would grow
// without bound there.
Eigen::MatrixXd diffuse(const Eigen::MatrixXd& y0, const SpectralDecomposition& spectral,
                        double s, DiffusionMode mode);

// Instantaneous rate of change of the reversed, time-rescaled process.
// Symmetric: T (L X + X L).  Asymmetric: T L X.
Eigen::MatrixXd true_generator(const Eigen::MatrixXd& laplacian, const Eigen::MatrixXd& x,
                               double T, DiffusionMode mode);

struct DiffusionState {
    Eigen::MatrixXd matrix;
    double t = 0.0;  // rescaled time in [0, 1]; t = 1 is the data end
    DiffusionMode mode = DiffusionMode::Symmetric;
};

// X_t := Y_{T(1-t)}
DiffusionState rescaled_state(const Eigen::MatrixXd& y0, const HeatKernel& kernel, double t,
                              const DiffusionConfig& cfg);

// s -> infinity limit of the forward process for entrywise nonnegative Y0.
// Symmetric: (1/n^2) ||Y0||_1 * ones.  Asymmetric: (1/n) ones^T-row-mixing, i.e.
// every row becomes the column-mean row of Y0.
Eigen::MatrixXd forward_limit(const Eigen::MatrixXd& y0, DiffusionMode mode);

// Discrete-time random-walk transition kernel (D^-1 A)^t, or the lazy variant
// (1/2 (I + D^-1 A))^t.
Eigen::MatrixXd rw_kernel_at(const Graph& g, long t, bool lazy);

}  // namespace g3
