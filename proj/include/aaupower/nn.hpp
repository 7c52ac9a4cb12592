#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aaupower/dataset.hpp"
#include "aaupower/features.hpp"

namespace aau {

struct LayerDims {
    int n_i = 0;
    int l1 = 0;
    int l2 = 0;
    // output width is fixed at 2 (mu, sigma)

    static LayerDims paper(int n_i) { return {n_i, 40, 15}; }
    static LayerDims scaled(int n_i, double c);

    std::size_t param_count() const;
};

bool operator==(const LayerDims& a, const LayerDims& b);

struct Interval {
    double lo_w = 0.0;
    double hi_w = 0.0;
};

struct GaussianPrediction {
    double mu_norm = 0.0;
    double sigma_norm = 0.0;
    double mu_w = 0.0;
    double sigma_w = 0.0;

    Interval ci(double z) const { return {mu_w - z * sigma_w, mu_w + z * sigma_w}; }
};

/// Weights are row-major [out][in]. The encoder spec and output scaling ride
/// along so a persisted model reproduces predictions bit-identically.
struct ModelParams {
    LayerDims dims;
    std::string hidden_activation = "relu";
    std::vector<double> w1, b1, w2, b2, w3, b3;
    EncoderSpec encoder;
    double sigma_min = 1e-4; // normalized units; keeps NLL away from sigma=0
    double sigma_max = 0.25;
    double power_min_w = 0.0;
    double power_max_w = 1.0;
    std::uint64_t init_seed = 0;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 256;
    int max_epochs = 5000;
    int patience = 200; // epochs without val improvement before stopping
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    bool sigma_warmup = false; // first 10% of epochs: sigma frozen mid-range
};

struct TrainReport {
    std::vector<double> train_loss; // mean NLL per epoch
    std::vector<double> val_loss;
    int stopped_epoch = 0; // 1-based epoch at which training stopped
    double best_val_loss = 0.0;
    double wall_seconds = 0.0; // never persisted (reports must be rerun-stable)
};

/// Glorot-uniform weights, zero biases, deterministic per seed. Encoder and
/// output scaling are attached by the caller (or by train_model).
ModelParams init_params(const LayerDims& dims, std::uint64_t seed);

GaussianPrediction forward(const ModelParams& params, std::span<const double> x);

/// Gaussian negative log-likelihood up to the constant log(sqrt(2*pi)),
/// in normalized space: log(sigma) + (y - mu)^2 / (2 sigma^2).
double nll_loss(double y_bar_norm, const GaussianPrediction& pred);

struct Gradients {
    std::vector<double> w1, b1, w2, b2, w3, b3;

    void resize(const LayerDims& dims);
    void zero();
    void add(const Gradients& other);
    void scale(double factor);
};

/// Exact analytic gradient of nll_loss for one sample.
Gradients backward(const ModelParams& params, std::span<const double> x, double y_bar_norm);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    void resize(std::size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
};

/// Bias-corrected Adam update, t is the 1-based step count.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, int t,
               const TrainConfig& config);

/// Flat view over all trainable parameters (order: w1,b1,w2,b2,w3,b3).
/// Used by the optimizer and by the finite-difference tests.
std::vector<double*> param_view(ModelParams& params);
std::vector<double*> grad_view(Gradients& grads);

/// Summed gradient and NLL over the index subset. Samples are accumulated in
/// fixed-size chunks and chunk buffers are reduced in fixed order, so the
/// parallel kernel is bit-identical to the serial reference for any thread
/// count.
Gradients batch_gradient(const ModelParams& params, const Matrix& x,
                         const std::vector<double>& y, std::span<const int> indices,
                         double* loss_sum);
Gradients batch_gradient_serial(const ModelParams& params, const Matrix& x,
                                const std::vector<double>& y, std::span<const int> indices,
                                double* loss_sum);

std::vector<GaussianPrediction> predict_batch(const ModelParams& params, const Matrix& x);
std::vector<GaussianPrediction> predict_batch_serial(const ModelParams& params, const Matrix& x);

/// Mean NLL of the model over encoded rows (fixed-order reduction).
double mean_nll(const ModelParams& params, const Matrix& x, const std::vector<double>& y);

/// Mini-batch Adam training with per-epoch seeded shuffling and early
/// stopping on validation NLL; returns the best-validation snapshot.
/// Throws NumericError (with epoch and batch) if the loss goes non-finite.
std::pair<ModelParams, TrainReport> train(const Matrix& x_train, const std::vector<double>& y_train,
                                          const Matrix& x_val, const std::vector<double>& y_val,
                                          const LayerDims& dims, const TrainConfig& config);

/// Dataset-level convenience: fits nothing, encodes with the given spec,
/// trains, and embeds encoder + power scaling into the returned params.
std::pair<ModelParams, TrainReport> train_model(const Dataset& train, const Dataset& val,
                                                const EncoderSpec& encoder, const LayerDims& dims,
                                                const TrainConfig& config);

/// Single-document versioned model file (JSON); exact weight round-trip.
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

/// Tracks the best validation loss; stop after `patience` epochs without
/// improvement.
class EarlyStopper {
  public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    /// Returns true when `val` improves on the best seen so far.
    bool observe(int epoch, double val) {
        if (val < best_) {
            best_ = val;
            best_epoch_ = epoch;
            since_best_ = 0;
            return true;
        }
        ++since_best_;
        return false;
    }

    bool should_stop() const { return since_best_ >= patience_; }
    double best() const { return best_; }
    int best_epoch() const { return best_epoch_; }

  private:
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = 0;
    int since_best_ = 0;
};

} // namespace aau
