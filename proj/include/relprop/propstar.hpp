#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relprop/wordify.hpp"

namespace relprop {

struct StarConfig {
    int dim = 32;
    int epochs = 5;
    double lr = 0.05;
    int negatives = 5;      // k
    double margin = 0.05;
    std::uint64_t seed = 42;
};

// Feature and label vectors in one space.  Row-major: item i occupies
// item_vectors[i*dim .. i*dim+dim).
struct StarModel {
    int dim = 0;
    std::vector<std::string> items;    // per feature index
    std::vector<std::string> labels;   // class index -> label text
    std::vector<double> item_vectors;
    std::vector<double> label_vectors;
};

struct BagEmbedding {
    std::vector<double> e;
    std::size_t n_unique = 0;
};

struct StarTrainLog {
    std::vector<double> epoch_mean_loss;
};

// e_M = sum of unique in-vocabulary item vectors / sqrt(#unique); zero vector
// when nothing is in vocabulary.
BagEmbedding embed_bag(const StarModel& model, std::span<const std::uint32_t> features);

// Margin ranking loss of one instance against one positive and k negatives.
double pair_loss(const StarModel& model, const BagEmbedding& bag, int positive,
                 std::span<const int> negatives, double margin);

// Uniform init in [-1/(2 dim), +1/(2 dim)] from the seeded generator.
StarModel star_init(const ItemVocabulary& vocab, std::span<const std::string> class_labels,
                    const StarConfig& cfg);

// SGD over instances (one positive/negative update per instance per epoch).
// `features` holds each training bag as sorted unique feature indices.
StarModel star_train(std::span<const std::vector<std::uint32_t>> features,
                     std::span<const int> labels, const ItemVocabulary& vocab,
                     std::span<const std::string> class_labels, const StarConfig& cfg,
                     StarTrainLog* log = nullptr);

// Dot-product score per class and argmax label (lowest index wins ties).
std::vector<double> star_scores(const StarModel& model, std::span<const std::uint32_t> features);
int star_predict(const StarModel& model, std::span<const std::uint32_t> features);

}  // namespace relprop
