#pragma once

#include <atomic>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relprop/wordify.hpp"

namespace relprop {

struct DrmConfig {
    int hidden = 64;
    double dropout = 0.2;
    double lr = 0.01;
    int epochs = 10;
    int batch_size = 32;
    double elu_c = 1.0;
    std::uint64_t seed = 42;
};

// One hidden layer, ELU activation, single sigmoid output unit.
// W1 is input_dim x hidden (row-major), Wo is hidden.
struct DrmModel {
    int input_dim = 0;
    int hidden = 0;
    double elu_c = 1.0;
    double dropout = 0.0;
    std::vector<double> W1, b1, Wo;
    double bo = 0.0;
};

double elu(double x, double c);

// Scratch buffer for one densified batch plus live/peak allocation counters
// (doubles currently held / high-water mark across the process).
class DenseBatch {
  public:
    DenseBatch() = default;
    ~DenseBatch();
    DenseBatch(const DenseBatch&) = delete;
    DenseBatch& operator=(const DenseBatch&) = delete;

    void fill(const SparseBinaryMatrix& m, std::span<const std::size_t> row_ids);
    void release();

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& x() const { return x_; }

    static std::size_t live_doubles();
    static std::size_t peak_doubles();
    static void reset_peak();

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> x_;
    std::size_t counted_ = 0;

    static std::atomic<std::size_t> live_;
    static std::atomic<std::size_t> peak_;
    void count(std::size_t n);
};

struct DrmForward {
    std::vector<double> z1;      // pre-activation after dropout, rows x hidden
    std::vector<double> h;       // ELU(z1)
    std::vector<double> mask;    // inverted-dropout scale per unit (1/(1-p) or 0)
    std::vector<double> probs;   // rows
};

// Forward pass over a densified batch.  Dropout masks are drawn from `rng`
// only when `training` is true; otherwise the mask is identity.
void drm_forward(const DrmModel& model, const DenseBatch& batch, bool training,
                 std::mt19937_64& rng, DrmForward& out);

// Mean binary cross-entropy; probabilities clamped to [1e-12, 1 - 1e-12].
double bce_loss(std::span<const double> probs, std::span<const double> targets);

struct DrmGradients {
    std::vector<double> W1, b1, Wo;
    double bo = 0.0;
};

// Analytic gradients of the mean BCE over the batch, using the activations
// and dropout mask recorded by drm_forward.
void drm_backward(const DrmModel& model, const DenseBatch& batch, const DrmForward& fwd,
                  std::span<const double> targets, DrmGradients& out);

struct DrmTrainLog {
    std::vector<double> epoch_mean_loss;
    std::size_t batches = 0;
};

DrmModel drm_init(int input_dim, const DrmConfig& cfg);

// Mini-batch gradient descent on BCE.  Binary targets only; throws when
// labels contain a class index above 1.
DrmModel drm_train(const SparseBinaryMatrix& m, std::span<const int> labels,
                   const DrmConfig& cfg, DrmTrainLog* log = nullptr);

// P(class 1) per row, evaluation mode (no dropout).
std::vector<double> drm_scores(const DrmModel& model, const SparseBinaryMatrix& m,
                               std::span<const std::size_t> row_ids);
std::vector<double> drm_scores(const DrmModel& model, const SparseBinaryMatrix& m);

// Threshold at 0.5; probability exactly 0.5 predicts class 1.
int drm_predict_one(double prob);

}  // namespace relprop
