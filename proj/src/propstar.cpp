#include "relprop/propstar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace relprop {

namespace {

double dot(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

// Per-coordinate gradient clipping keeps a single bad update from blowing up
// the embedding space.
double clip10(double g) { return std::clamp(g, -10.0, 10.0); }

StarModel init_with_rng(const ItemVocabulary& vocab, std::span<const std::string> class_labels,
                        const StarConfig& cfg, std::mt19937_64& rng) {
    if (cfg.dim <= 0) throw std::runtime_error("embedding dimension must be positive");
    StarModel model;
    model.dim = cfg.dim;
    model.items = vocab.items;
    model.labels.assign(class_labels.begin(), class_labels.end());
    double half = 1.0 / (2.0 * cfg.dim);
    std::uniform_real_distribution<double> uni(-half, half);
    model.item_vectors.resize(model.items.size() * cfg.dim);
    for (double& v : model.item_vectors) v = uni(rng);
    model.label_vectors.resize(model.labels.size() * cfg.dim);
    for (double& v : model.label_vectors) v = uni(rng);
    return model;
}

}  // namespace

BagEmbedding embed_bag(const StarModel& model, std::span<const std::uint32_t> features) {
    BagEmbedding out;
    out.e.assign(model.dim, 0.0);
    out.n_unique = features.size();
    if (features.empty()) return out;
    for (std::uint32_t f : features) {
        const double* v = model.item_vectors.data() + static_cast<std::size_t>(f) * model.dim;
        for (int i = 0; i < model.dim; ++i) out.e[i] += v[i];
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(features.size()));
    for (double& x : out.e) x *= scale;
    return out;
}

double pair_loss(const StarModel& model, const BagEmbedding& bag, int positive,
                 std::span<const int> negatives, double margin) {
    if (negatives.empty()) throw std::runtime_error("need at least one negative label");
    const double* pos = model.label_vectors.data() + static_cast<std::size_t>(positive) * model.dim;
    double s_pos = dot(bag.e.data(), pos, model.dim);
    double loss = 0.0;
    for (int n : negatives) {
        const double* neg = model.label_vectors.data() + static_cast<std::size_t>(n) * model.dim;
        loss += std::max(0.0, margin - s_pos + dot(bag.e.data(), neg, model.dim));
    }
    return loss / static_cast<double>(negatives.size());
}

StarModel star_init(const ItemVocabulary& vocab, std::span<const std::string> class_labels,
                    const StarConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return init_with_rng(vocab, class_labels, cfg, rng);
}

StarModel star_train(std::span<const std::vector<std::uint32_t>> features,
                     std::span<const int> labels, const ItemVocabulary& vocab,
                     std::span<const std::string> class_labels, const StarConfig& cfg,
                     StarTrainLog* log) {
    if (features.size() != labels.size())
        throw std::runtime_error("features and labels differ in length");
    int n_classes = static_cast<int>(class_labels.size());
    if (n_classes < 2) throw std::runtime_error("need at least two classes");
    for (int y : labels) {
        if (y < 0 || y >= n_classes) throw std::runtime_error("label out of range");
    }

    std::mt19937_64 rng(cfg.seed);
    StarModel model = init_with_rng(vocab, class_labels, cfg, rng);
    int d = model.dim;
    std::size_t n = features.size();
    int k = cfg.negatives;
    if (k < 1) throw std::runtime_error("need at least one negative sample");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> others(n_classes - 1);
    std::vector<int> negs(k);
    std::vector<double> e(d), grad_e(d);
    std::vector<double> class_w(n_classes);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const std::vector<std::uint32_t>& feats = features[idx];
            int pos = labels[idx];

            // Negatives come from the other classes: distinct when k allows,
            // with replacement otherwise.
            int oi = 0;
            for (int c = 0; c < n_classes; ++c) {
                if (c != pos) others[oi++] = c;
            }
            if (k <= n_classes - 1) {
                for (int j = 0; j < k; ++j) {
                    std::uniform_int_distribution<int> pick(j, n_classes - 2);
                    std::swap(others[j], others[pick(rng)]);
                    negs[j] = others[j];
                }
            } else {
                std::uniform_int_distribution<int> pick(0, n_classes - 2);
                for (int j = 0; j < k; ++j) negs[j] = others[pick(rng)];
            }

            // Bag embedding from current item vectors.
            std::fill(e.begin(), e.end(), 0.0);
            for (std::uint32_t f : feats) {
                const double* v = model.item_vectors.data() + static_cast<std::size_t>(f) * d;
                for (int i = 0; i < d; ++i) e[i] += v[i];
            }
            double scale =
                feats.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(feats.size()));
            for (double& x : e) x *= scale;

            double* pos_vec = model.label_vectors.data() + static_cast<std::size_t>(pos) * d;
            double s_pos = dot(e.data(), pos_vec, d);

            // Hinge terms; all gradients are taken against the pre-update
            // parameters, then applied in one step.
            std::fill(grad_e.begin(), grad_e.end(), 0.0);
            std::fill(class_w.begin(), class_w.end(), 0.0);
            double inv_k = 1.0 / static_cast<double>(k);
            int violations = 0;
            double loss = 0.0;
            for (int j = 0; j < k; ++j) {
                const double* neg_vec =
                    model.label_vectors.data() + static_cast<std::size_t>(negs[j]) * d;
                double term = cfg.margin - s_pos + dot(e.data(), neg_vec, d);
                if (term <= 0.0) continue;
                loss += term;
                ++violations;
                class_w[negs[j]] += inv_k;  // d loss / d neg_vec = e / k per violation
                for (int i = 0; i < d; ++i) grad_e[i] += inv_k * neg_vec[i];
            }
            loss_sum += loss * inv_k;
            if (violations > 0) {
                double w_pos = static_cast<double>(violations) * inv_k;
                for (int i = 0; i < d; ++i) grad_e[i] -= w_pos * pos_vec[i];
                for (int c = 0; c < n_classes; ++c) {
                    if (class_w[c] == 0.0) continue;
                    double* vec = model.label_vectors.data() + static_cast<std::size_t>(c) * d;
                    for (int i = 0; i < d; ++i) vec[i] -= cfg.lr * clip10(class_w[c] * e[i]);
                }
                for (int i = 0; i < d; ++i) pos_vec[i] -= cfg.lr * clip10(-w_pos * e[i]);
                // Spread d loss / d e over the unique items in the bag.
                for (std::uint32_t f : feats) {
                    double* v = model.item_vectors.data() + static_cast<std::size_t>(f) * d;
                    for (int i = 0; i < d; ++i) v[i] -= cfg.lr * clip10(grad_e[i] * scale);
                }
            }
        }
        if (log) log->epoch_mean_loss.push_back(n ? loss_sum / static_cast<double>(n) : 0.0);
    }
    return model;
}

std::vector<double> star_scores(const StarModel& model, std::span<const std::uint32_t> features) {
    BagEmbedding bag = embed_bag(model, features);
    std::vector<double> scores(model.labels.size(), 0.0);
    for (std::size_t c = 0; c < model.labels.size(); ++c) {
        scores[c] = dot(bag.e.data(), model.label_vectors.data() + c * model.dim, model.dim);
    }
    return scores;
}

int star_predict(const StarModel& model, std::span<const std::uint32_t> features) {
    std::vector<double> scores = star_scores(model, features);
    if (scores.empty()) throw std::runtime_error("model has no labels");
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) best = static_cast<int>(c);  // ties keep the lowest index
    }
    return best;
}

}  // namespace relprop
