#include "relprop/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace relprop {

Attribution exact_shapley(const CoalitionEvaluator& ev) {
    std::size_t nf = ev.features.size();
    if (nf > 20)
        throw std::runtime_error(
            "exact Shapley enumeration is limited to 20 active features; "
            "use sampled_shapley for larger instances");
    Attribution out;
    out.features = ev.features;
    out.phi.assign(nf, 0.0);
    if (nf == 0) {
        out.f_empty = out.f_full = ev.f({});
        return out;
    }

    // Memoize the value of every coalition.
    std::size_t n_masks = std::size_t{1} << nf;
    std::vector<double> value(n_masks);
    std::vector<std::size_t> on;
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        on.clear();
        for (std::size_t i = 0; i < nf; ++i) {
            if (mask & (std::size_t{1} << i)) on.push_back(i);
        }
        value[mask] = ev.f(on);
    }
    out.f_empty = value[0];
    out.f_full = value[n_masks - 1];

    // w(s) = 1 / (|F| * C(|F|-1, s)): the classic Shapley kernel.
    std::vector<double> weight(nf);
    double binom = 1.0;  // C(nf-1, s), updated incrementally
    for (std::size_t s = 0; s < nf; ++s) {
        weight[s] = 1.0 / (static_cast<double>(nf) * binom);
        binom = binom * static_cast<double>(nf - 1 - s) / static_cast<double>(s + 1);
    }

    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        double w = weight[static_cast<std::size_t>(std::popcount(mask))];
        for (std::size_t i = 0; i < nf; ++i) {
            std::size_t bit = std::size_t{1} << i;
            if (mask & bit) continue;
            out.phi[i] += w * (value[mask | bit] - value[mask]);
        }
    }
    return out;
}

Attribution sampled_shapley(const CoalitionEvaluator& ev, std::size_t n_permutations,
                            std::uint64_t seed) {
    if (n_permutations == 0) throw std::runtime_error("need at least one permutation");
    std::size_t nf = ev.features.size();
    Attribution out;
    out.features = ev.features;
    out.phi.assign(nf, 0.0);
    out.f_empty = ev.f({});
    std::vector<std::size_t> all(nf);
    std::iota(all.begin(), all.end(), 0);
    out.f_full = ev.f(all);
    if (nf == 0) return out;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> perm(nf);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> coalition;
    for (std::size_t t = 0; t < n_permutations; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        coalition.clear();
        double prev = out.f_empty;
        for (std::size_t pos : perm) {
            coalition.push_back(pos);
            double cur = ev.f(coalition);
            out.phi[pos] += cur - prev;
            prev = cur;
        }
    }
    for (double& p : out.phi) p /= static_cast<double>(n_permutations);
    return out;
}

CoalitionEvaluator drm_evaluator(const DrmModel& model, std::span<const std::uint32_t> row) {
    CoalitionEvaluator ev;
    ev.features.assign(row.begin(), row.end());
    std::vector<std::uint32_t> features = ev.features;
    ev.f = [model, features](std::span<const std::size_t> on) {
        // Single-row forward pass with the off features ablated to zero.
        std::vector<double> x(model.input_dim, 0.0);
        for (std::size_t pos : on) x[features[pos]] = 1.0;
        int h = model.hidden;
        std::vector<double> z(h);
        for (int j = 0; j < h; ++j) z[j] = model.b1[j];
        for (int i = 0; i < model.input_dim; ++i) {
            if (x[i] == 0.0) continue;
            const double* w = model.W1.data() + static_cast<std::size_t>(i) * h;
            for (int j = 0; j < h; ++j) z[j] += w[j];
        }
        double logit = model.bo;
        for (int j = 0; j < h; ++j) logit += elu(z[j], model.elu_c) * model.Wo[j];
        double p = 1.0 / (1.0 + std::exp(-logit));
        return std::clamp(p, 1e-12, 1.0 - 1e-12);
    };
    return ev;
}

CoalitionEvaluator star_evaluator(const StarModel& model,
                                  std::span<const std::uint32_t> features, int positive_class) {
    if (positive_class < 0 || static_cast<std::size_t>(positive_class) >= model.labels.size())
        throw std::runtime_error("positive class out of range");
    CoalitionEvaluator ev;
    ev.features.assign(features.begin(), features.end());
    std::vector<std::uint32_t> feats = ev.features;
    ev.f = [model, feats, positive_class](std::span<const std::size_t> on) {
        // The coalition is a sub-bag: absent features simply leave the bag.
        std::vector<std::uint32_t> subset;
        subset.reserve(on.size());
        for (std::size_t pos : on) subset.push_back(feats[pos]);
        std::sort(subset.begin(), subset.end());
        BagEmbedding bag = embed_bag(model, subset);
        const double* label =
            model.label_vectors.data() + static_cast<std::size_t>(positive_class) * model.dim;
        double s = 0.0;
        for (int i = 0; i < model.dim; ++i) s += bag.e[i] * label[i];
        return s;
    };
    return ev;
}

std::vector<std::pair<std::uint32_t, double>> mean_abs_attribution(
    std::span<const Attribution> attributions) {
    // Mean |phi| per feature over the attributions in which it is active.
    std::map<std::uint32_t, std::pair<double, std::size_t>> acc;
    for (const Attribution& a : attributions) {
        for (std::size_t i = 0; i < a.features.size(); ++i) {
            auto& slot = acc[a.features[i]];
            slot.first += std::fabs(a.phi[i]);
            slot.second += 1;
        }
    }
    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(acc.size());
    for (const auto& [feature, sum_count] : acc) {
        out.emplace_back(feature, sum_count.first / static_cast<double>(sum_count.second));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

}  // namespace relprop
