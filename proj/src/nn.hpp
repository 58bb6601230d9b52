#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dense.hpp"

namespace lomaq {

enum class Activation { Identity, Relu, LeakyRelu, Elu, Tanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string &name);

double activate(Activation a, double z);
// relu/leaky-relu use subgradient at z == 0: relu -> 0, leaky -> slope.
double activate_grad(Activation a, double z);
double activate_grad2(Activation a, double z);

struct Layer {
    Dense2D weight; // out x in
    std::vector<double> bias;
    Activation act = Activation::Identity;
};

/// Per-layer pre-activations and activations from one forward() call.
/// `stamp` ties the cache to the parameter state it was computed under.
struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;  // z_l
    std::vector<std::vector<double>> post; // h_l = act(z_l)
    uint64_t stamp = 0;
};

/// Gradient accumulator shaped like an Mlp's parameters.
struct MlpGrads {
    std::vector<Dense2D> w;
    std::vector<std::vector<double>> b;

    void zero();
    void scale(double s);
    void add(const MlpGrads &other, double s = 1.0);
};

/// Plain fully connected net. Weights init uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)),
/// biases init zero, both seeded through the supplied engine.
class Mlp {
public:
    Mlp() = default;
    Mlp(const std::vector<int> &dims, const std::vector<Activation> &acts, std::mt19937_64 &rng);

    int input_dim() const;
    int output_dim() const;
    size_t num_layers() const { return layers_.size(); }
    size_t num_params() const;

    const std::vector<Layer> &layers() const { return layers_; }
    Layer &layer(size_t l);

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> forward(std::span<const double> x, ForwardCache &cache) const;

    // Reverse-mode gradients of a scalar loss given dL/dy. Accumulates parameter
    // gradients into `grads` and returns dL/dx. Throws std::logic_error if the
    // cache is stale (parameters changed since the forward pass).
    std::vector<double> backward(const ForwardCache &cache, std::span<const double> dl_dy,
                                 MlpGrads &grads) const;

    // For scalar-output nets: g = df/dx at the cached point.
    std::vector<double> input_gradient(const ForwardCache &cache) const;

    // For scalar-output nets: accumulates into `grads` the parameter gradient of
    // s(theta) = dir . (df/dx), the directional input-gradient. This is what the
    // soft monotonicity penalty differentiates. Returns s.
    double input_gradient_param_backward(const ForwardCache &cache, std::span<const double> dir,
                                         MlpGrads &grads) const;

    // theta <- max(0, theta) on every weight matrix entry; biases untouched.
    void relu_project_weights();

    double min_weight() const;

    // Zero the final layer (weights and bias); output starts exactly at 0.
    void zero_last_layer();

    MlpGrads make_grads() const;

    uint64_t stamp() const { return stamp_; }
    void bump_stamp() { ++stamp_; }

private:
    void check_cache(const ForwardCache &cache) const;

    std::vector<Layer> layers_;
    uint64_t stamp_ = 1;
};

enum class OptimizerKind { RmsProp, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::RmsProp;
    double lr = 0.0005;
    double rms_decay = 0.99;
    double rms_eps = 1e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

/// Holds moment buffers for a fixed group of nets; call step() with one grads
/// struct per net, in registration order. Throws TrainingError on NaN gradients.
class Optimizer {
public:
    explicit Optimizer(const OptimizerConfig &cfg) : cfg_(cfg) {}

    void attach(Mlp &net);
    void step(const std::vector<const MlpGrads *> &grads);
    long step_count() const { return steps_; }
    const OptimizerConfig &config() const { return cfg_; }

private:
    struct Slot {
        Mlp *net = nullptr;
        std::vector<Dense2D> w_m1, w_m2;
        std::vector<std::vector<double>> b_m1, b_m2;
    };

    OptimizerConfig cfg_;
    std::vector<Slot> slots_;
    long steps_ = 0;
};

// Checkpoint format: versioned flat text, layer dims then row-major hexfloat
// values; round-trips bit exactly.
void save_params(const std::string &path,
                 const std::vector<std::pair<std::string, const Mlp *>> &nets);
std::vector<std::pair<std::string, Mlp>> load_params(const std::string &path);

} // namespace lomaq
