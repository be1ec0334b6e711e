#include "relprop/propdrm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace relprop {

double elu(double x, double c) { return x >= 0.0 ? x : c * std::expm1(x); }

namespace {

double elu_grad(double x, double c) { return x >= 0.0 ? 1.0 : c * std::exp(x); }

constexpr double kProbEps = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

}  // namespace

std::atomic<std::size_t> DenseBatch::live_{0};
std::atomic<std::size_t> DenseBatch::peak_{0};

DenseBatch::~DenseBatch() { count(0); }

void DenseBatch::count(std::size_t n) {
    if (n >= counted_) {
        std::size_t live = live_.fetch_add(n - counted_) + (n - counted_);
        std::size_t peak = peak_.load();
        while (live > peak && !peak_.compare_exchange_weak(peak, live)) {
        }
    } else {
        live_.fetch_sub(counted_ - n);
    }
    counted_ = n;
}

std::size_t DenseBatch::live_doubles() { return live_.load(); }
std::size_t DenseBatch::peak_doubles() { return peak_.load(); }
void DenseBatch::reset_peak() { peak_.store(live_.load()); }

void DenseBatch::fill(const SparseBinaryMatrix& m, std::span<const std::size_t> row_ids) {
    rows_ = row_ids.size();
    cols_ = m.n_cols;
    count(rows_ * cols_);
    x_.assign(rows_ * cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double* row = x_.data() + r * cols_;
        for (std::uint32_t c : m.row(row_ids[r])) row[c] = 1.0;
    }
}

void DenseBatch::release() {
    x_.clear();
    x_.shrink_to_fit();
    rows_ = cols_ = 0;
    count(0);
}

void drm_forward(const DrmModel& model, const DenseBatch& batch, bool training,
                 std::mt19937_64& rng, DrmForward& out) {
    std::size_t rows = batch.rows();
    std::size_t d = batch.cols();
    int h = model.hidden;
    if (d != static_cast<std::size_t>(model.input_dim))
        throw std::runtime_error("batch width does not match model input");

    out.z1.assign(rows * h, 0.0);
    out.h.resize(rows * h);
    out.mask.assign(rows * h, 1.0);
    out.probs.resize(rows);

    const double* x = batch.x().data();
    for (std::size_t r = 0; r < rows; ++r) {
        double* z = out.z1.data() + r * h;
        for (int j = 0; j < h; ++j) z[j] = model.b1[j];
        const double* xr = x + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            double xi = xr[i];
            const double* w = model.W1.data() + i * h;
            for (int j = 0; j < h; ++j) z[j] += xi * w[j];
        }
    }
    if (training && model.dropout > 0.0) {
        // Inverted dropout on the affine pre-activation: survivors are
        // scaled by 1/(1-p) so the expected pre-activation is unchanged.
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double keep_scale = 1.0 / (1.0 - model.dropout);
        for (std::size_t i = 0; i < rows * static_cast<std::size_t>(h); ++i) {
            out.mask[i] = uni(rng) < model.dropout ? 0.0 : keep_scale;
            out.z1[i] *= out.mask[i];
        }
    }
    for (std::size_t i = 0; i < rows * static_cast<std::size_t>(h); ++i) {
        out.h[i] = elu(out.z1[i], model.elu_c);
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const double* hr = out.h.data() + r * h;
        double logit = model.bo;
        for (int j = 0; j < h; ++j) logit += hr[j] * model.Wo[j];
        out.probs[r] = clamp_prob(1.0 / (1.0 + std::exp(-logit)));
    }
}

double bce_loss(std::span<const double> probs, std::span<const double> targets) {
    if (probs.size() != targets.size() || probs.empty())
        throw std::runtime_error("probs and targets must be non-empty and equal length");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double p = clamp_prob(probs[i]);
        sum += targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(probs.size());
}

void drm_backward(const DrmModel& model, const DenseBatch& batch, const DrmForward& fwd,
                  std::span<const double> targets, DrmGradients& out) {
    std::size_t rows = batch.rows();
    std::size_t d = batch.cols();
    int h = model.hidden;
    if (targets.size() != rows) throw std::runtime_error("targets do not match batch rows");

    out.W1.assign(model.W1.size(), 0.0);
    out.b1.assign(h, 0.0);
    out.Wo.assign(h, 0.0);
    out.bo = 0.0;

    // d loss / d logit for the mean BCE through the sigmoid.
    std::vector<double> dz(rows * h);
    for (std::size_t r = 0; r < rows; ++r) {
        double dlogit = (fwd.probs[r] - targets[r]) / static_cast<double>(rows);
        out.bo += dlogit;
        const double* hr = fwd.h.data() + r * h;
        const double* zr = fwd.z1.data() + r * h;
        const double* mr = fwd.mask.data() + r * h;
        double* dzr = dz.data() + r * h;
        for (int j = 0; j < h; ++j) {
            out.Wo[j] += hr[j] * dlogit;
            // Through ELU, then through the dropout scaling.
            dzr[j] = dlogit * model.Wo[j] * elu_grad(zr[j], model.elu_c) * mr[j];
            out.b1[j] += dzr[j];
        }
    }
    const double* x = batch.x().data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * d;
        const double* dzr = dz.data() + r * h;
        for (std::size_t i = 0; i < d; ++i) {
            double xi = xr[i];
            if (xi == 0.0) continue;  // zero inputs contribute nothing to dW1
            double* g = out.W1.data() + i * h;
            for (int j = 0; j < h; ++j) g[j] += xi * dzr[j];
        }
    }
}

DrmModel drm_init(int input_dim, const DrmConfig& cfg) {
    if (input_dim < 0 || cfg.hidden <= 0) throw std::runtime_error("bad layer dimensions");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
        throw std::runtime_error("dropout must be in [0, 1)");
    DrmModel model;
    model.input_dim = input_dim;
    model.hidden = cfg.hidden;
    model.elu_c = cfg.elu_c;
    model.dropout = cfg.dropout;
    std::mt19937_64 rng(cfg.seed);
    double lim1 = std::sqrt(6.0 / static_cast<double>(input_dim + cfg.hidden));
    std::uniform_real_distribution<double> u1(-lim1, lim1);
    model.W1.resize(static_cast<std::size_t>(input_dim) * cfg.hidden);
    for (double& w : model.W1) w = u1(rng);
    model.b1.assign(cfg.hidden, 0.0);
    double lim2 = std::sqrt(6.0 / static_cast<double>(cfg.hidden + 1));
    std::uniform_real_distribution<double> u2(-lim2, lim2);
    model.Wo.resize(cfg.hidden);
    for (double& w : model.Wo) w = u2(rng);
    model.bo = 0.0;
    return model;
}

DrmModel drm_train(const SparseBinaryMatrix& m, std::span<const int> labels,
                   const DrmConfig& cfg, DrmTrainLog* log) {
    if (m.n_rows != labels.size()) throw std::runtime_error("matrix and labels differ in length");
    for (int y : labels) {
        if (y < 0 || y > 1)
            throw std::runtime_error("only binary targets are supported by the neural model");
    }
    if (cfg.batch_size < 1) throw std::runtime_error("batch size must be positive");

    DrmModel model = drm_init(static_cast<int>(m.n_cols), cfg);
    std::mt19937_64 rng(cfg.seed + 1);  // shuffle/dropout stream

    std::size_t n = m.n_rows;
    int h = model.hidden;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    DenseBatch batch;
    DrmForward fwd;
    DrmGradients grads;
    std::vector<double> targets;
    std::vector<std::size_t> ids;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t end = std::min(n, start + cfg.batch_size);
            std::size_t rows = end - start;
            ids.assign(order.begin() + start, order.begin() + end);
            batch.fill(m, ids);
            targets.resize(rows);
            for (std::size_t r = 0; r < rows; ++r) targets[r] = labels[ids[r]];

            drm_forward(model, batch, true, rng, fwd);
            loss_sum += bce_loss(fwd.probs, targets) * static_cast<double>(rows);

            drm_backward(model, batch, fwd, targets, grads);
            for (std::size_t i = 0; i < model.W1.size(); ++i) {
                model.W1[i] -= cfg.lr * grads.W1[i];
            }
            for (int j = 0; j < h; ++j) {
                model.b1[j] -= cfg.lr * grads.b1[j];
                model.Wo[j] -= cfg.lr * grads.Wo[j];
            }
            model.bo -= cfg.lr * grads.bo;
            if (log) ++log->batches;
        }
        batch.release();
        if (log) log->epoch_mean_loss.push_back(n ? loss_sum / static_cast<double>(n) : 0.0);
    }
    return model;
}

std::vector<double> drm_scores(const DrmModel& model, const SparseBinaryMatrix& m,
                               std::span<const std::size_t> row_ids) {
    std::vector<double> scores;
    scores.reserve(row_ids.size());
    std::mt19937_64 rng(0);  // unused in evaluation mode
    DenseBatch batch;
    DrmForward fwd;
    const std::size_t step = 256;
    std::vector<std::size_t> ids;
    for (std::size_t start = 0; start < row_ids.size(); start += step) {
        std::size_t end = std::min(row_ids.size(), start + step);
        ids.assign(row_ids.begin() + start, row_ids.begin() + end);
        batch.fill(m, ids);
        drm_forward(model, batch, false, rng, fwd);
        scores.insert(scores.end(), fwd.probs.begin(), fwd.probs.end());
    }
    batch.release();
    return scores;
}

std::vector<double> drm_scores(const DrmModel& model, const SparseBinaryMatrix& m) {
    std::vector<std::size_t> ids(m.n_rows);
    std::iota(ids.begin(), ids.end(), 0);
    return drm_scores(model, m, ids);
}

int drm_predict_one(double prob) { return prob >= 0.5 ? 1 : 0; }

}  // namespace relprop
