// Acceptance gate: every shipping criterion in one binary, one line each.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <sys/resource.h>
#include <vector>

#include "relprop/eval.hpp"
#include "relprop/explain.hpp"
#include "relprop/exports.hpp"
#include "relprop/propdrm.hpp"
#include "relprop/propstar.hpp"
#include "relprop/relstore.hpp"
#include "relprop/wordify.hpp"

using namespace relprop;
using Clock = std::chrono::steady_clock;

namespace {

std::string data_file(const std::string& name) {
#ifdef RELPROP_DATA_DIR
    return std::string(RELPROP_DATA_DIR) + "/" + name;
#else
    return "data/" + name;
#endif
}

std::string out_dir() {
    const char* env = std::getenv("TMPDIR");
    std::string base = env && *env ? env : "/tmp";
    std::string dir = base + "/relprop-acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        ok = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void require(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

// ---- criterion 1: worked-example bags --------------------------------------

void golden_bags(Check& c) {
    RelationalDatabase db = parse_sql_file(data_file("appendix_a.sql"));
    designate_target(db, "train", "direction");
    Executor exec;
    WordifyParams params;
    WordifyResult corpus = wordify_database(db, params, exec);

    c.require(corpus.bags.size() == 2, "expected two instances");
    if (!c.ok) return;

    const std::vector<std::string> east{
        "car_shape_rectangle",
        "car_roof_none",
        "car_shape_rectangle__car_roof_none",
        "car_shape_rectangle",
        "car_roof_peaked",
        "car_shape_rectangle__car_roof_peaked",
    };
    const std::vector<std::string> west{
        "car_shape_rectangle",
        "car_roof_none",
        "car_shape_rectangle__car_roof_none",
        "car_shape_hexagon",
        "car_roof_flat",
        "car_shape_hexagon__car_roof_flat",
    };
    c.require(bag_strings(corpus.bags[0], corpus.pool) == east, "east bag differs");
    c.require(bag_strings(corpus.bags[1], corpus.pool) == west, "west bag differs");
    c.require(corpus.class_labels == std::vector<std::string>{"east", "west"},
              "class labels differ");
    c.require(corpus.bags[0].label == 0 && corpus.bags[1].label == 1, "labels differ");
}

// ---- criterion 2: analytic gradients ----------------------------------------

void gradient_check(Check& c) {
    std::mt19937_64 rng(20240915);
    double worst = 0.0;
    for (int config = 0; config < 100; ++config) {
        int input_dim = 1 + static_cast<int>(rng() % 20);
        DrmConfig cfg;
        cfg.hidden = 1 + static_cast<int>(rng() % 8);
        cfg.elu_c = (config % 3 == 0) ? 0.5 : 1.0;
        cfg.seed = 5000 + static_cast<std::uint64_t>(config);

        // Central differences are meaningless across the ELU kink (for
        // elu_c != 1 the derivative jumps at zero), so redraw until every
        // hidden pre-activation is safely away from it.
        DrmModel model;
        DenseBatch batch;
        std::vector<double> targets;
        std::mt19937_64 fwd_rng(0);
        DrmForward fwd;
        for (int attempt = 0;; ++attempt) {
            cfg.seed += static_cast<std::uint64_t>(attempt) * 977;
            model = drm_init(input_dim, cfg);

            std::size_t rows = 1 + rng() % 6;
            SparseBinaryMatrix m;
            m.n_rows = rows;
            m.n_cols = static_cast<std::size_t>(input_dim);
            m.offsets.push_back(0);
            targets.clear();
            for (std::size_t r = 0; r < rows; ++r) {
                std::size_t active = 0;
                for (int col = 0; col < input_dim; ++col) {
                    if (rng() % 2) {
                        m.cols.push_back(static_cast<std::uint32_t>(col));
                        ++active;
                    }
                }
                if (active == 0)  // an empty row would pin z1 = b1 = 0
                    m.cols.push_back(static_cast<std::uint32_t>(rng() % input_dim));
                m.offsets.push_back(m.cols.size());
                targets.push_back(static_cast<double>(rng() % 2));
            }

            std::vector<std::size_t> ids(rows);
            std::iota(ids.begin(), ids.end(), std::size_t{0});
            batch.fill(m, ids);
            drm_forward(model, batch, false, fwd_rng, fwd);
            double closest = 1e300;
            for (double z : fwd.z1) closest = std::min(closest, std::abs(z));
            if (closest > 1e-3) break;
            batch.release();
        }
        DrmGradients grads;
        drm_backward(model, batch, fwd, targets, grads);

        const double step = 1e-5;
        auto loss_at = [&]() {
            DrmForward f;
            drm_forward(model, batch, false, fwd_rng, f);
            return bce_loss(f.probs, targets);
        };
        auto probe = [&](double& p, double analytic) {
            double keep = p;
            p = keep + step;
            double up = loss_at();
            p = keep - step;
            double down = loss_at();
            p = keep;
            double numeric = (up - down) / (2 * step);
            double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        };
        for (std::size_t i = 0; i < model.W1.size(); ++i) probe(model.W1[i], grads.W1[i]);
        for (std::size_t i = 0; i < model.b1.size(); ++i) probe(model.b1[i], grads.b1[i]);
        for (std::size_t i = 0; i < model.Wo.size(); ++i) probe(model.Wo[i], grads.Wo[i]);
        probe(model.bo, grads.bo);
        batch.release();
    }
    std::ostringstream ss;
    ss << "max relative error " << worst;
    c.require(worst < 1e-4, ss.str());
}

// ---- criterion 3: auc equivalence -------------------------------------------

double brute_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double halves = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) halves += 2.0;
            else if (scores[i] == scores[j]) halves += 1.0;
        }
    }
    return halves / (2.0 * static_cast<double>(pairs));
}

void auc_equivalence(Check& c) {
    std::mt19937_64 rng(8675309);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 2 + rng() % 199;
        std::vector<double> scores;
        std::vector<int> labels;
        // Few distinct score values force heavy ties.
        std::size_t levels = 1 + rng() % 8;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(static_cast<double>(rng() % levels) /
                             static_cast<double>(levels));
            labels.push_back(static_cast<int>(rng() % 2));
        }
        labels[0] = 0;
        labels[n - 1] = 1;
        double fast = auc(scores, labels);
        double slow = brute_auc(scores, labels);
        if (fast != slow) {
            std::ostringstream ss;
            ss << "trial " << trial << ": sorted " << fast << " != brute " << slow;
            c.fail(ss.str());
            return;
        }
    }
}

// ---- criterion 4: shapley exactness -----------------------------------------

void shapley_exactness(Check& c) {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 1 + rng() % 12;

        // Half the trials: arbitrary tabulated games (efficiency only).
        // Other half: additive games with known ground-truth attributions.
        bool additive = trial % 2 == 0;
        std::vector<double> weights(n);
        for (double& w : weights)
            w = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        double base = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        std::vector<double> table(std::size_t{1} << n);
        for (double& t : table) t = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);

        CoalitionEvaluator ev;
        for (std::uint32_t i = 0; i < n; ++i) ev.features.push_back(i);
        ev.f = [&](std::span<const std::size_t> on) {
            if (additive) {
                double v = base;
                for (std::size_t p : on) v += weights[p];
                return v;
            }
            std::size_t mask = 0;
            for (std::size_t p : on) mask |= std::size_t{1} << p;
            return table[mask];
        };

        Attribution attr = exact_shapley(ev);
        double total = std::accumulate(attr.phi.begin(), attr.phi.end(), 0.0);
        double gap = std::abs(total - (attr.f_full - attr.f_empty));
        if (gap > 1e-9) {
            std::ostringstream ss;
            ss << "trial " << trial << ": efficiency gap " << gap;
            c.fail(ss.str());
            return;
        }
        if (additive) {
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(attr.phi[i] - weights[i]) > 1e-9) {
                    std::ostringstream ss;
                    ss << "trial " << trial << ": additive recovery off by "
                       << std::abs(attr.phi[i] - weights[i]);
                    c.fail(ss.str());
                    return;
                }
            }
        }
    }
}

// ---- criterion 5: separable synthetic ---------------------------------------

WordifyResult indicator_corpus() {
    // 100 instances, two classes; eight exclusive indicator items per class.
    WordifyResult corpus;
    corpus.class_labels = {"neg", "pos"};
    std::vector<std::uint32_t> ids;
    for (int f = 0; f < 16; ++f) ids.push_back(corpus.pool.intern("sig" + std::to_string(f)));
    for (int i = 0; i < 100; ++i) {
        int cls = i % 2;
        InstanceBag bag;
        bag.instance = std::to_string(i);
        bag.label = cls;
        for (int f = 0; f < 8; ++f)
            bag.items.push_back(ids[static_cast<std::size_t>(cls * 8 + f)]);
        corpus.bags.push_back(std::move(bag));
    }
    return corpus;
}

void separable_synthetic(Check& c) {
    WordifyResult corpus = indicator_corpus();
    ItemVocabulary vocab = frequency_selection(corpus.bags, corpus.pool, 10000, 1);
    std::vector<int> labels;
    for (const InstanceBag& bag : corpus.bags) labels.push_back(bag.label);
    std::vector<std::vector<std::uint32_t>> feats;
    for (const InstanceBag& bag : corpus.bags) feats.push_back(bag_features(bag, vocab));
    SparseBinaryMatrix matrix = to_sparse_matrix(corpus.bags, vocab);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        StarConfig scfg;  // default epochs
        scfg.dim = 8;
        scfg.seed = seed;
        StarModel star = star_train(feats, labels, vocab, corpus.class_labels, scfg);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < feats.size(); ++i)
            hits += star_predict(star, feats[i]) == labels[i];
        if (hits != feats.size()) {
            std::ostringstream ss;
            ss << "propstar seed " << seed << ": " << hits << "/100";
            c.fail(ss.str());
        }

        DrmConfig dcfg;  // default epochs
        dcfg.hidden = 16;
        dcfg.seed = seed;
        DrmModel drm = drm_train(matrix, labels, dcfg);
        std::vector<double> scores = drm_scores(drm, matrix);
        hits = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            hits += drm_predict_one(scores[i]) == labels[i];
        if (hits != scores.size()) {
            std::ostringstream ss;
            ss << "propdrm seed " << seed << ": " << hits << "/100";
            c.fail(ss.str());
        }
    }
}

// ---- criteria 6 and 7: bundled benchmark datasets ----------------------------

MetricsReport bench(const std::string& file, const std::string& table,
                    const std::string& attr, Method method, int folds, int runs) {
    RelationalDatabase db = parse_sql_file(data_file(file));
    validate(db);
    designate_target(db, table, attr);
    Executor exec;
    WordifyParams params;
    WordifyResult corpus = wordify_database(db, params, exec);
    ExperimentConfig cfg;
    cfg.dataset = file;
    cfg.method = method;
    cfg.folds = folds;
    cfg.runs = runs;
    cfg.positive_class = 1;
    return run_experiment(corpus, cfg, exec);
}

void mutagenesis_benchmark(Check& c) {
    MetricsReport star = bench("mutagenesis_188.sql", "molecule", "mutagenic",
                               Method::PropStar, 10, 5);
    {
        std::ostringstream ss;
        ss << "propstar acc " << star.accuracy_mean << " auc " << star.auc_mean;
        c.require(star.accuracy_mean >= 0.85 && star.auc_mean >= 0.80, ss.str());
    }
    MetricsReport drm = bench("mutagenesis_188.sql", "molecule", "mutagenic",
                              Method::PropDrm, 10, 5);
    {
        std::ostringstream ss;
        ss << "propdrm acc " << drm.accuracy_mean << " auc " << drm.auc_mean;
        c.require(drm.accuracy_mean >= 0.85 && drm.auc_mean >= 0.82, ss.str());
    }
}

void trains_benchmark(Check& c) {
    MetricsReport star =
        bench("trains.sql", "train", "direction", Method::PropStar, 10, 10);
    std::ostringstream ss;
    ss << "propstar acc " << star.accuracy_mean;
    c.require(star.accuracy_mean >= 0.60, ss.str());
}

// ---- criterion 8: scale and memory -------------------------------------------

std::string synth_scale_sql() {
    // Five tables, 100000 rows total: 10000 target rows and four satellite
    // tables of 22500 rows each.
    std::mt19937_64 rng(314159);
    std::ostringstream sql;
    sql << "CREATE TABLE subject (id INTEGER PRIMARY KEY, grp TEXT);\n";
    for (int t = 0; t < 4; ++t)
        sql << "CREATE TABLE sat" << t
            << " (id INTEGER PRIMARY KEY, subject_id INTEGER, a TEXT, x DOUBLE,"
               " k INTEGER);\n";
    const int subjects = 10000;
    const int per_sat = 22500;
    for (int batch = 0; batch < subjects; batch += 500) {
        sql << "INSERT INTO subject VALUES ";
        for (int i = batch; i < batch + 500; ++i)
            sql << (i > batch ? ", " : "") << "(" << i << ", '"
                << (i % 2 ? "on" : "off") << "')";
        sql << ";\n";
    }
    for (int t = 0; t < 4; ++t) {
        for (int batch = 0; batch < per_sat; batch += 500) {
            sql << "INSERT INTO sat" << t << " VALUES ";
            for (int i = batch; i < batch + 500; ++i) {
                int subject = static_cast<int>(rng() % subjects);
                sql << (i > batch ? ", " : "") << "(" << i << ", " << subject << ", 'v"
                    << (rng() % 12) << "', " << (static_cast<double>(rng() % 1000) / 10.0)
                    << ", " << (rng() % 50) << ")";
            }
            sql << ";\n";
        }
    }
    return sql.str();
}

void scale_run(Check& c) {
    RelationalDatabase db = parse_sql_dump(synth_scale_sql());
    std::size_t total_rows = 0;
    for (const Table& t : db.tables) total_rows += t.n_rows();
    c.require(db.tables.size() == 5, "expected five tables");
    c.require(total_rows == 100000, "expected 100000 rows");

    designate_target(db, "subject", "grp");
    Executor exec;
    WordifyParams params;
    WordifyResult corpus = wordify_database(db, params, exec);
    ItemVocabulary vocab =
        frequency_selection(corpus.bags, corpus.pool, params.budget, params.min_freq);
    SparseBinaryMatrix matrix = to_sparse_matrix(corpus.bags, vocab);

    c.require(corpus.bags.size() == 10000, "expected 10000 instances");
    c.require(matrix.nnz() <= corpus.bags.size() * params.max_items_per_instance,
              "nnz exceeds the per-instance cap");

    struct rusage usage;
    getrusage(RUSAGE_SELF, &usage);
    double rss_gb = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);
    std::ostringstream ss;
    ss << "peak rss " << rss_gb << " GB";
    c.require(rss_gb < 2.0, ss.str());
    if (c.ok) c.detail = ss.str();
}

// ---- criterion 9: bitwise-stable exports --------------------------------------

void export_stability(Check& c) {
    struct Spec {
        const char* file;
        const char* table;
        const char* attr;
    };
    const std::vector<Spec> datasets{
        {"appendix_a.sql", "train", "direction"},
        {"trains.sql", "train", "direction"},
        {"mutagenesis_188.sql", "molecule", "mutagenic"},
    };
    for (const Spec& spec : datasets) {
        std::vector<std::string> matrix_bytes, vocab_bytes, bag_bytes, emb_bytes;
        for (int rep = 0; rep < 3; ++rep) {
            RelationalDatabase db = parse_sql_file(data_file(spec.file));
            validate(db);
            designate_target(db, spec.table, spec.attr);
            Executor exec;
            WordifyParams params;
            WordifyResult corpus = wordify_database(db, params, exec);
            ItemVocabulary vocab =
                frequency_selection(corpus.bags, corpus.pool, params.budget, params.min_freq);
            SparseBinaryMatrix matrix = to_sparse_matrix(corpus.bags, vocab);
            std::vector<int> labels;
            for (const InstanceBag& bag : corpus.bags) labels.push_back(bag.label);
            std::vector<std::vector<std::uint32_t>> feats;
            for (const InstanceBag& bag : corpus.bags)
                feats.push_back(bag_features(bag, vocab));
            StarConfig scfg;
            StarModel star = star_train(feats, labels, vocab, corpus.class_labels, scfg);

            std::string base = out_dir() + "/" + spec.table + std::to_string(rep);
            write_sparse_matrix(matrix, base + ".matrix");
            write_vocabulary(vocab, base + ".vocab");
            write_bags(corpus.bags, corpus.pool, corpus.class_labels, base + ".bags");
            write_embeddings(star, base + ".emb");
            matrix_bytes.push_back(read_text_file(base + ".matrix"));
            vocab_bytes.push_back(read_text_file(base + ".vocab"));
            bag_bytes.push_back(read_text_file(base + ".bags"));
            emb_bytes.push_back(read_text_file(base + ".emb"));
        }
        for (int rep = 1; rep < 3; ++rep) {
            if (matrix_bytes[rep] != matrix_bytes[0]) c.fail(std::string(spec.file) + " matrix differs");
            if (vocab_bytes[rep] != vocab_bytes[0]) c.fail(std::string(spec.file) + " vocabulary differs");
            if (bag_bytes[rep] != bag_bytes[0]) c.fail(std::string(spec.file) + " bags differ");
            if (emb_bytes[rep] != emb_bytes[0]) c.fail(std::string(spec.file) + " embeddings differ");
        }
        if (!c.ok) return;
    }
}

// ---- criterion 10: no test-fold leakage ----------------------------------------

void leakage_probe(Check& c) {
    RelationalDatabase db = parse_sql_file(data_file("trains.sql"));
    validate(db);
    designate_target(db, "train", "direction");
    Executor exec;
    WordifyParams params;
    WordifyResult corpus = wordify_database(db, params, exec);
    std::vector<int> labels;
    for (const InstanceBag& bag : corpus.bags) labels.push_back(bag.label);

    ExperimentConfig cfg;
    cfg.dataset = "trains";
    cfg.method = Method::PropStar;
    cfg.folds = 5;
    cfg.runs = 2;
    cfg.star.epochs = 1;

    std::size_t probed = 0, violations = 0;
    run_experiment(corpus, cfg, exec, [&](int run, int fold, std::size_t instance) {
        ++probed;
        FoldAssignment fa = stratified_kfold(labels, cfg.folds,
                                             cfg.seed + static_cast<std::uint64_t>(run));
        if (fa.fold_of[instance] == fold) ++violations;
    });
    std::ostringstream ss;
    ss << probed << " vocabulary contributions, " << violations << " from test folds";
    c.require(probed > 0 && violations == 0, ss.str());
    if (c.ok) c.detail = ss.str();
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<void(Check&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "worked-example bags are exact", 1.0, golden_bags},
        {2, "analytic gradients match central differences", 30.0, gradient_check},
        {3, "sorted auc equals the quadratic reference", 10.0, auc_equivalence},
        {4, "exact shapley is efficient and recovers additive games", 60.0,
         shapley_exactness},
        {5, "both learners fit the separable synthetic", 30.0, separable_synthetic},
        {6, "mutagenesis benchmark clears the bar", 900.0, mutagenesis_benchmark},
        {7, "trains benchmark clears the bar", 120.0, trains_benchmark},
        {8, "hundred-thousand-row run fits time and memory", 300.0, scale_run},
        {9, "exports are bitwise stable across repetitions", 300.0, export_stability},
        {10, "training vocabularies never touch test folds", 60.0, leakage_probe},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& crit : criteria) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), crit.id) == wanted.end())
            continue;
        Check check;
        auto t0 = Clock::now();
        try {
            crit.fn(check);
        } catch (const std::exception& e) {
            check.fail(std::string("exception: ") + e.what());
        }
        double elapsed = seconds_since(t0);
        if (elapsed > crit.budget_seconds) {
            std::ostringstream ss;
            ss << "took " << elapsed << "s, budget " << crit.budget_seconds << "s";
            check.fail(ss.str());
        }
        std::printf("%s criterion %d: %s (%.2fs)%s%s\n", check.ok ? "PASS" : "FAIL",
                    crit.id, crit.name, elapsed, check.detail.empty() ? "" : " -- ",
                    check.detail.c_str());
        std::fflush(stdout);
        failures += check.ok ? 0 : 1;
    }
    return failures;
}
