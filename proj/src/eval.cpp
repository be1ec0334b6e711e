#include "relprop/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

namespace relprop {

FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    std::size_t n = labels.size();
    if (k < 2) throw std::runtime_error("need at least two folds");
    if (static_cast<std::size_t>(k) > n)
        throw std::runtime_error("more folds than instances");
    int n_classes = 0;
    for (int y : labels) {
        if (y < 0) throw std::runtime_error("negative label");
        n_classes = std::max(n_classes, y + 1);
    }
    FoldAssignment out;
    out.k = k;
    out.fold_of.assign(n, -1);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> members;
    for (int c = 0; c < n_classes; ++c) {
        members.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        if (members.empty()) continue;
        if (members.size() < static_cast<std::size_t>(k)) out.small_class_warning = true;
        std::shuffle(members.begin(), members.end(), rng);
        // Round-robin deal, so per-fold class counts differ by at most one.
        for (std::size_t i = 0; i < members.size(); ++i) {
            out.fold_of[members[i]] = static_cast<int>(i % k);
        }
    }
    return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw std::runtime_error("predictions and labels must be non-empty and equal length");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == actual[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

double auc(std::span<const double> scores, std::span<const int> actual) {
    if (scores.size() != actual.size() || scores.empty())
        throw std::runtime_error("scores and labels must be non-empty and equal length");
    for (double s : scores) {
        // NaN breaks both the sort and the tie grouping below.
        if (std::isnan(s)) throw std::runtime_error("AUC needs non-NaN scores");
    }
    std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::uint64_t pos_total = 0, neg_total = 0;
    for (int y : actual) {
        if (y == 1) ++pos_total;
        else ++neg_total;
    }
    if (pos_total == 0 || neg_total == 0)
        throw std::runtime_error("AUC needs both classes present");
    // Accumulate pair outcomes in half-point units so ties stay exact:
    // a positive scores 2 against every lower negative and 1 per tied one.
    std::uint64_t halves = 0;
    std::uint64_t neg_below = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        std::uint64_t pos_here = 0, neg_here = 0;
        while (j < n && scores[idx[j]] == scores[idx[i]]) {
            if (actual[idx[j]] == 1) ++pos_here;
            else ++neg_here;
            ++j;
        }
        halves += pos_here * (2 * neg_below + neg_here);
        neg_below += neg_here;
        i = j;
    }
    return static_cast<double>(halves) /
           (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

std::string method_name(Method m) {
    switch (m) {
        case Method::PropStar: return "propstar";
        case Method::PropDrm: return "propdrm";
        default: return "majority";
    }
}

std::pair<double, double> mean_std(std::span<const double> xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

namespace {

struct FoldOutcome {
    double accuracy = 0.0;
    double auc = 0.0;
};

// Train on the training part of one fold and score the held-out part.
FoldOutcome run_fold(const WordifyResult& corpus, const ExperimentConfig& cfg,
                     std::span<const std::size_t> train_idx,
                     std::span<const std::size_t> test_idx, std::uint64_t run_seed,
                     const VocabObserver& observer) {
    std::vector<int> labels(corpus.bags.size());
    for (std::size_t i = 0; i < corpus.bags.size(); ++i) labels[i] = corpus.bags[i].label;

    // Vocabulary from training bags only; the observer sees which bags feed it.
    std::vector<InstanceBag> train_bags;  // shallow copies of item vectors
    train_bags.reserve(train_idx.size());
    for (std::size_t i : train_idx) train_bags.push_back(corpus.bags[i]);
    VocabObserver remap;
    if (observer) {
        remap = [&](std::size_t ordinal) { observer(train_idx[ordinal]); };
    }
    ItemVocabulary vocab = frequency_selection(train_bags, corpus.pool, cfg.wordify.budget,
                                               cfg.wordify.min_freq, remap);

    std::vector<int> train_labels, test_labels;
    for (std::size_t i : train_idx) train_labels.push_back(labels[i]);
    for (std::size_t i : test_idx) test_labels.push_back(labels[i]);

    int n_classes = static_cast<int>(corpus.class_labels.size());
    std::vector<int> predicted;
    std::vector<double> pos_scores;  // score for cfg.positive_class per test row

    switch (cfg.method) {
        case Method::Majority: {
            std::vector<std::size_t> counts(n_classes, 0);
            for (int y : train_labels) ++counts[y];
            int maj = 0;
            for (int c = 1; c < n_classes; ++c) {
                if (counts[c] > counts[maj]) maj = c;
            }
            double pos_rate = static_cast<double>(counts[cfg.positive_class]) /
                              static_cast<double>(train_labels.size());
            predicted.assign(test_idx.size(), maj);
            pos_scores.assign(test_idx.size(), pos_rate);
            break;
        }
        case Method::PropStar: {
            std::vector<std::vector<std::uint32_t>> train_feats;
            train_feats.reserve(train_idx.size());
            for (std::size_t i : train_idx)
                train_feats.push_back(bag_features(corpus.bags[i], vocab));
            StarConfig sc = cfg.star;
            sc.seed = run_seed;
            StarModel model =
                star_train(train_feats, train_labels, vocab, corpus.class_labels, sc);
            for (std::size_t i : test_idx) {
                std::vector<std::uint32_t> feats = bag_features(corpus.bags[i], vocab);
                std::vector<double> scores = star_scores(model, feats);
                int best = 0;
                for (std::size_t c = 1; c < scores.size(); ++c) {
                    if (scores[c] > scores[best]) best = static_cast<int>(c);
                }
                predicted.push_back(best);
                // Margin of the positive class over the strongest rival.
                double other = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < scores.size(); ++c) {
                    if (static_cast<int>(c) != cfg.positive_class)
                        other = std::max(other, scores[c]);
                }
                pos_scores.push_back(scores[cfg.positive_class] - other);
            }
            break;
        }
        default: {
            std::vector<InstanceBag> test_bags;
            for (std::size_t i : test_idx) test_bags.push_back(corpus.bags[i]);
            SparseBinaryMatrix train_m = to_sparse_matrix(train_bags, vocab);
            SparseBinaryMatrix test_m = to_sparse_matrix(test_bags, vocab);
            DrmConfig dc = cfg.drm;
            dc.seed = run_seed;
            DrmModel model = drm_train(train_m, train_labels, dc);
            std::vector<double> probs = drm_scores(model, test_m);
            for (double p : probs) {
                predicted.push_back(drm_predict_one(p));
                pos_scores.push_back(cfg.positive_class == 1 ? p : 1.0 - p);
            }
            break;
        }
    }

    FoldOutcome out;
    // A fold can come up empty when every class has fewer members than
    // folds; its metrics are NaN and the summary reflects that honestly.
    out.accuracy = test_labels.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : accuracy(predicted, test_labels);
    std::vector<int> is_pos(test_labels.size());
    for (std::size_t i = 0; i < test_labels.size(); ++i) {
        is_pos[i] = test_labels[i] == cfg.positive_class ? 1 : 0;
    }
    try {
        out.auc = auc(pos_scores, is_pos);
    } catch (const std::exception&) {
        // A fold can miss a class outright when a class has fewer members
        // than folds; the summary then reflects that honestly.
        out.auc = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace

MetricsReport run_experiment(const WordifyResult& corpus, const ExperimentConfig& cfg,
                             const Executor& exec, const LeakProbe& probe) {
    if (corpus.bags.empty()) throw std::runtime_error("no instances to evaluate");
    if (cfg.runs < 1) throw std::runtime_error("need at least one run");
    if (cfg.positive_class < 0 ||
        static_cast<std::size_t>(cfg.positive_class) >= corpus.class_labels.size())
        throw std::runtime_error("positive class out of range");
    std::vector<int> labels(corpus.bags.size());
    for (std::size_t i = 0; i < corpus.bags.size(); ++i) labels[i] = corpus.bags[i].label;

    MetricsReport report;
    report.dataset = cfg.dataset;
    report.method = method_name(cfg.method);
    report.config_id = cfg.config_id;
    report.folds = cfg.folds;
    report.runs = cfg.runs;
    report.per_fold.resize(static_cast<std::size_t>(cfg.runs) * cfg.folds);

    for (int run = 0; run < cfg.runs; ++run) {
        std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(run);
        FoldAssignment folds = stratified_kfold(labels, cfg.folds, run_seed);
        report.small_class_warning |= folds.small_class_warning;

        std::vector<std::vector<std::size_t>> train_sets(cfg.folds), test_sets(cfg.folds);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            for (int f = 0; f < cfg.folds; ++f) {
                (folds.fold_of[i] == f ? test_sets[f] : train_sets[f]).push_back(i);
            }
        }

        auto eval_fold = [&](int f) {
            VocabObserver observer;
            if (probe) {
                observer = [&probe, run, f](std::size_t instance) { probe(run, f, instance); };
            }
            FoldOutcome oc =
                run_fold(corpus, cfg, train_sets[f], test_sets[f], run_seed, observer);
            FoldMetrics& m = report.per_fold[static_cast<std::size_t>(run) * cfg.folds + f];
            m.run = run;
            m.fold = f;
            m.accuracy = oc.accuracy;
            m.auc = oc.auc;
        };
        if (exec.jobs > 1 && !probe) {
            Executor fold_exec{exec.jobs};
            fold_exec.for_chunks(static_cast<std::size_t>(cfg.folds),
                                 [&](std::size_t begin, std::size_t end, unsigned) {
                                     for (std::size_t f = begin; f < end; ++f)
                                         eval_fold(static_cast<int>(f));
                                 });
        } else {
            for (int f = 0; f < cfg.folds; ++f) eval_fold(f);
        }
    }

    std::vector<double> accs, aucs;
    for (const FoldMetrics& m : report.per_fold) {
        accs.push_back(m.accuracy);
        aucs.push_back(m.auc);
    }
    std::tie(report.accuracy_mean, report.accuracy_std) = mean_std(accs);
    std::tie(report.auc_mean, report.auc_std) = mean_std(aucs);
    return report;
}

MetricsReport run_experiment(const RelationalDatabase& db, const ExperimentConfig& cfg,
                             const Executor& exec, const LeakProbe& probe) {
    WordifyResult corpus = wordify_database(db, cfg.wordify, exec);
    return run_experiment(corpus, cfg, exec, probe);
}

}  // namespace relprop
