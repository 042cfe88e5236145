#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "g3/rng.hpp"

namespace g3 {

// Feature layout of the flattened diffusion state. Symmetric states keep only
// the strict lower triangle; the asymmetric variants need the full matrix.
enum class StateLayout { LowerTriangle, FullMatrix };

int state_dim(StateLayout layout, int n);

// Strict lower triangle, row-major: (1,0), (2,0), (2,1), (3,0), ...
Eigen::VectorXd flatten_lower(const Eigen::MatrixXd& x);
Eigen::MatrixXd unflatten_lower(const Eigen::VectorXd& v);  // symmetric, zero diagonal

Eigen::VectorXd flatten_state(const Eigen::MatrixXd& x, StateLayout layout);
Eigen::MatrixXd unflatten_state(const Eigen::VectorXd& v, StateLayout layout);

struct MlpConfig {
    int hidden_width = 4096;
    int n_max = 2;
    int layers = 4;  // fixed architecture depth
    bool use_layer_norm = true;
    StateLayout layout = StateLayout::LowerTriangle;
};

// Parameter container shared by the model, gradient bundles, and Adam moments.
// Declaration order here is the serialization order.
struct MlpParameters {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
    Eigen::VectorXd ln2_gain, ln2_offset;
    Eigen::MatrixXd w3;
    Eigen::VectorXd b3;
    Eigen::VectorXd ln3_gain, ln3_offset;
    Eigen::MatrixXd w4;
    Eigen::VectorXd b4;

    struct TensorView {
        double* data;
        long size;
    };
    std::vector<TensorView> tensors();
    std::vector<TensorView> tensors() const;  // views are read-only by convention

    static MlpParameters zeros(const MlpConfig& cfg);
    bool all_finite() const;
};

using GradientBundle = MlpParameters;

struct SurrogateGenerator {
    MlpConfig config;
    MlpParameters params;

    // Glorot-uniform weights, zero biases, unit layer-norm gains.
    static SurrogateGenerator init(const MlpConfig& cfg, Rng& rng);

    int feature_dim() const { return state_dim(config.layout, config.n_max); }
    int feature_dim(int n) const { return state_dim(config.layout, n); }
    int input_dim() const { return feature_dim() + 1; }  // + scalar time
};

struct BatchItem {
    Eigen::VectorXd x;       // flattened state, length feature_dim(n)
    double t = 0.0;          // rescaled time in [0, 1]
    Eigen::VectorXd target;  // flattened generator target, same length as x
    int n = 0;               // active node count
};

Eigen::VectorXd forward(const SurrogateGenerator& model, const Eigen::VectorXd& x, double t,
                        int n);
// Columns are batch items; all share the active node count n.
Eigen::MatrixXd forward_batch(const SurrogateGenerator& model, const Eigen::MatrixXd& xs,
                              const Eigen::VectorXd& ts, int n);

// Mean over the batch of the squared Euclidean norm of (prediction - target),
// with exact analytic gradients for every parameter.
std::pair<double, GradientBundle> loss_and_gradients(const SurrogateGenerator& model,
                                                     const std::vector<BatchItem>& batch);

struct AdamState {
    MlpParameters m, v;
    long step = 0;

    static AdamState init(const MlpConfig& cfg);
};

void adam_step(SurrogateGenerator& model, const GradientBundle& grads, AdamState& state,
               double lr);

}  // namespace g3
