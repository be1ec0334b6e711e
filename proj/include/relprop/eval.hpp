#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relprop/executor.hpp"
#include "relprop/propdrm.hpp"
#include "relprop/propstar.hpp"
#include "relprop/relstore.hpp"
#include "relprop/wordify.hpp"

namespace relprop {

struct FoldAssignment {
    std::vector<int> fold_of;  // per instance
    int k = 0;
    bool small_class_warning = false;  // some class has fewer members than k
};

// Stratified k-fold: instances of each class are shuffled with the seeded
// generator and dealt round-robin, so per-fold class counts differ by at
// most one.  Throws when k < 2 or k > number of instances.
FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

double accuracy(std::span<const int> predicted, std::span<const int> actual);

// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie).  Sort-based,
// O(n log n), exact under ties.  Throws when either class is absent.
double auc(std::span<const double> scores, std::span<const int> actual);

enum class Method { PropStar, PropDrm, Majority };

std::string method_name(Method m);

struct ExperimentConfig {
    std::string dataset;
    std::string config_id = "default";
    Method method = Method::PropStar;
    WordifyParams wordify;
    StarConfig star;
    DrmConfig drm;
    int folds = 10;
    int runs = 5;
    std::uint64_t seed = 42;
    int positive_class = 1;  // class treated as "positive" for AUC scores
};

struct FoldMetrics {
    int run = 0;
    int fold = 0;
    double accuracy = 0.0;
    double auc = 0.0;
};

struct MetricsReport {
    std::string dataset, method, config_id;
    int folds = 0, runs = 0;
    std::vector<FoldMetrics> per_fold;  // run-major, fold-minor
    double accuracy_mean = 0.0, accuracy_std = 0.0;
    double auc_mean = 0.0, auc_std = 0.0;
    bool small_class_warning = false;
};

// Invoked when fold `fold` of run `run` consumes instance `instance` while
// building the training vocabulary.
using LeakProbe = std::function<void(int run, int fold, std::size_t instance)>;

// Full protocol: wordify once, then per run (seed + run) assign folds and,
// per fold, rebuild the vocabulary from training bags only, train, and score
// the held-out fold.  Run r of method m uses seed + r for fold assignment
// and model init.
MetricsReport run_experiment(const RelationalDatabase& db, const ExperimentConfig& cfg,
                             const Executor& exec = {}, const LeakProbe& probe = nullptr);

// As above but on a pre-wordified corpus (wordify params already applied).
MetricsReport run_experiment(const WordifyResult& corpus, const ExperimentConfig& cfg,
                             const Executor& exec = {}, const LeakProbe& probe = nullptr);

// Mean and sample standard deviation (n-1 denominator; 0 when n < 2).
std::pair<double, double> mean_std(std::span<const double> xs);

}  // namespace relprop
