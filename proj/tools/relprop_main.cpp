// relprop: propositionalize relational SQL dumps and learn from the result.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relprop/eval.hpp"
#include "relprop/explain.hpp"
#include "relprop/exports.hpp"
#include "relprop/propdrm.hpp"
#include "relprop/propstar.hpp"
#include "relprop/relstore.hpp"
#include "relprop/wordify.hpp"

namespace {

using namespace relprop;

// Usage and configuration problems exit with 2; runtime failures with 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string data;
    std::string target_table;
    std::string target_attribute;
    std::string method = "propstar";
    std::string out;
    std::string config;
    std::string instance;
    std::string model;
    int max_order = 2;
    std::size_t budget = 10000;
    std::size_t min_freq = 1;
    std::size_t max_items = 10000;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    int folds = 10;
    int runs = 5;
    std::size_t samples = 0;
    // Sweepable hyperparameters stay textual; evaluate accepts comma lists.
    std::string dim = "32";
    std::string epochs;  // empty: per-method default (5 propstar, 10 propdrm)
    std::string lr;      // empty: per-method default (0.05 propstar, 0.01 propdrm)
    std::string negatives = "5";
    std::string margin = "0.05";
    std::string hidden = "64";
    std::string dropout = "0.2";
    std::string batch_size = "32";
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (out.empty()) out.push_back("");
    return out;
}

int to_int(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + " '" + s + "'");
    }
}

double to_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + " '" + s + "'");
    }
}

// One grid point of hyperparameters, with per-method defaults resolved.
struct ResolvedConfig {
    StarConfig star;
    DrmConfig drm;
    std::string id = "default";
};

std::vector<ResolvedConfig> resolve_grid(const Options& opt, bool allow_lists) {
    auto values = [&](const std::string& s, const char* flag) {
        std::vector<std::string> vs = split_list(s);
        if (!allow_lists && vs.size() > 1)
            throw UsageError(std::string("--") + flag + " expects a single value here");
        return vs;
    };
    bool star = opt.method == "propstar";
    std::string epochs_def = star ? "5" : "10";
    std::string lr_def = star ? "0.05" : "0.01";

    struct Axis {
        std::string name;
        std::vector<std::string> values;
    };
    std::vector<Axis> axes;
    if (opt.method == "propstar") {
        axes = {{"dim", values(opt.dim, "dim")},
                {"epochs", values(opt.epochs.empty() ? epochs_def : opt.epochs, "epochs")},
                {"lr", values(opt.lr.empty() ? lr_def : opt.lr, "lr")},
                {"negatives", values(opt.negatives, "negatives")},
                {"margin", values(opt.margin, "margin")}};
    } else if (opt.method == "propdrm") {
        axes = {{"hidden", values(opt.hidden, "hidden")},
                {"dropout", values(opt.dropout, "dropout")},
                {"batch-size", values(opt.batch_size, "batch-size")},
                {"epochs", values(opt.epochs.empty() ? epochs_def : opt.epochs, "epochs")},
                {"lr", values(opt.lr.empty() ? lr_def : opt.lr, "lr")}};
    } else {
        ResolvedConfig rc;
        rc.star.seed = rc.drm.seed = opt.seed;
        return {rc};
    }

    std::vector<ResolvedConfig> grid;
    std::vector<std::size_t> pick(axes.size(), 0);
    bool swept = false;
    for (const Axis& a : axes) swept |= a.values.size() > 1;
    while (true) {
        ResolvedConfig rc;
        std::string id;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const std::string& v = axes[i].values[pick[i]];
            const std::string& name = axes[i].name;
            if (swept) {
                if (!id.empty()) id += ";";
                id += name + "=" + v;
            }
            if (name == "dim") rc.star.dim = to_int(v, "dim");
            else if (name == "negatives") rc.star.negatives = to_int(v, "negatives");
            else if (name == "margin") rc.star.margin = to_double(v, "margin");
            else if (name == "hidden") rc.drm.hidden = to_int(v, "hidden");
            else if (name == "dropout") rc.drm.dropout = to_double(v, "dropout");
            else if (name == "batch-size") rc.drm.batch_size = to_int(v, "batch-size");
            else if (name == "epochs") {
                rc.star.epochs = rc.drm.epochs = to_int(v, "epochs");
            } else if (name == "lr") {
                rc.star.lr = rc.drm.lr = to_double(v, "lr");
            }
        }
        if (swept) rc.id = id;
        rc.star.seed = rc.drm.seed = opt.seed;
        if (rc.star.dim < 1 || rc.drm.hidden < 1) throw UsageError("dimensions must be >= 1");
        if (rc.star.negatives < 1) throw UsageError("--negatives must be >= 1");
        if (rc.star.epochs < 0) throw UsageError("--epochs must be >= 0");
        if (rc.star.lr < 0 || rc.drm.lr < 0) throw UsageError("--lr must be >= 0");
        if (rc.star.margin < 0) throw UsageError("--margin must be >= 0");
        if (rc.drm.dropout < 0 || rc.drm.dropout >= 1)
            throw UsageError("--dropout must be in [0, 1)");
        if (rc.drm.batch_size < 1) throw UsageError("--batch-size must be >= 1");
        grid.push_back(std::move(rc));

        std::size_t i = 0;
        for (; i < axes.size(); ++i) {
            if (++pick[i] < axes[i].values.size()) break;
            pick[i] = 0;
        }
        if (i == axes.size()) break;
    }
    return grid;
}

WordifyParams wordify_params(const Options& opt) {
    WordifyParams p;
    if (opt.max_order < 0) throw UsageError("--max-order must be >= 0");
    p.max_order = opt.max_order;
    p.budget = opt.budget;
    p.min_freq = opt.min_freq;
    p.max_items_per_instance = opt.max_items;
    return p;
}

RelationalDatabase load_database(const Options& opt) {
    RelationalDatabase db = parse_sql_file(opt.data);
    ValidationReport report = validate(db);
    for (const ValidationIssue& issue : report.issues) {
        std::cerr << "warning: " << issue.table << ": " << issue.detail << "\n";
    }
    designate_target(db, opt.target_table, opt.target_attribute);
    return db;
}

void write_run_log(const Options& opt, const std::string& command,
                   const std::map<std::string, std::string>& extra) {
    std::map<std::string, std::string> kv;
    kv["command"] = command;
    kv["data"] = opt.data;
    kv["target-table"] = opt.target_table;
    kv["target-attribute"] = opt.target_attribute;
    kv["max-order"] = std::to_string(opt.max_order);
    kv["budget"] = std::to_string(opt.budget);
    kv["min-freq"] = std::to_string(opt.min_freq);
    kv["seed"] = std::to_string(opt.seed);
    kv["jobs"] = std::to_string(opt.jobs);
    kv["out"] = opt.out;
    for (const auto& [k, v] : extra) kv[k] = v;
    std::ostringstream log;
    for (const auto& [k, v] : kv) log << k << "=" << v << "\n";
    write_text_file(opt.out + "/run.log", log.str());
}

// Hyperparameters as resolved text, for the run log.
std::map<std::string, std::string> method_log(const Options& opt, const ResolvedConfig& rc) {
    std::map<std::string, std::string> kv;
    kv["method"] = opt.method;
    if (opt.method == "propstar") {
        kv["dim"] = std::to_string(rc.star.dim);
        kv["epochs"] = std::to_string(rc.star.epochs);
        kv["lr"] = format_double(rc.star.lr);
        kv["negatives"] = std::to_string(rc.star.negatives);
        kv["margin"] = format_double(rc.star.margin);
    } else if (opt.method == "propdrm") {
        kv["hidden"] = std::to_string(rc.drm.hidden);
        kv["dropout"] = format_double(rc.drm.dropout);
        kv["batch-size"] = std::to_string(rc.drm.batch_size);
        kv["epochs"] = std::to_string(rc.drm.epochs);
        kv["lr"] = format_double(rc.drm.lr);
    }
    return kv;
}

void ensure_out_dir(const Options& opt) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + opt.out + "'");
}

int positive_class_index(const std::vector<std::string>& class_labels) {
    return class_labels.size() == 2 ? 1 : 0;
}

// ---- subcommands -----------------------------------------------------------

int cmd_propositionalize(const Options& opt) {
    ensure_out_dir(opt);
    RelationalDatabase db = load_database(opt);
    WordifyParams params = wordify_params(opt);
    Executor exec{opt.jobs};
    WordifyResult corpus = wordify_database(db, params, exec);
    ItemVocabulary vocab =
        frequency_selection(corpus.bags, corpus.pool, params.budget, params.min_freq);
    SparseBinaryMatrix matrix = to_sparse_matrix(corpus.bags, vocab);

    write_sparse_matrix(matrix, opt.out + "/matrix.txt");
    write_vocabulary(vocab, opt.out + "/vocabulary.tsv");
    write_bags(corpus.bags, corpus.pool, corpus.class_labels, opt.out + "/bags.txt");
    write_run_log(opt, "propositionalize", {{"max-items", std::to_string(opt.max_items)}});

    std::cout << "instances=" << corpus.bags.size() << " vocabulary=" << vocab.size()
              << " nnz=" << matrix.nnz() << "\n";
    return 0;
}

int cmd_train(const Options& opt, bool export_only) {
    if (opt.method == "majority")
        throw UsageError("method 'majority' has no parameters to train");
    if (export_only && opt.method != "propstar")
        throw UsageError("only propstar checkpoints hold item embeddings");
    ensure_out_dir(opt);

    ResolvedConfig rc = resolve_grid(opt, false).front();
    if (export_only && !opt.model.empty()) {
        // Re-emit an existing checkpoint without training.
        StarModel model = read_embeddings(opt.model);
        write_embeddings(model, opt.out + "/embeddings.tsv");
        write_run_log(opt, "export-embeddings", {{"model", opt.model}});
        std::cout << "items=" << model.items.size() << " labels=" << model.labels.size()
                  << " dim=" << model.dim << "\n";
        return 0;
    }

    RelationalDatabase db = load_database(opt);
    WordifyParams params = wordify_params(opt);
    Executor exec{opt.jobs};
    WordifyResult corpus = wordify_database(db, params, exec);
    if (corpus.bags.empty()) throw std::runtime_error("no instances to train on");
    ItemVocabulary vocab =
        frequency_selection(corpus.bags, corpus.pool, params.budget, params.min_freq);
    std::vector<int> labels;
    for (const InstanceBag& bag : corpus.bags) labels.push_back(bag.label);

    std::map<std::string, std::string> extra = method_log(opt, rc);
    if (opt.method == "propstar") {
        std::vector<std::vector<std::uint32_t>> feats;
        feats.reserve(corpus.bags.size());
        for (const InstanceBag& bag : corpus.bags) feats.push_back(bag_features(bag, vocab));
        StarTrainLog log;
        StarModel model =
            star_train(feats, labels, vocab, corpus.class_labels, rc.star, &log);
        write_embeddings(model, opt.out + "/embeddings.tsv");
        if (!log.epoch_mean_loss.empty())
            std::cout << "final_epoch_loss=" << format_double(log.epoch_mean_loss.back())
                      << "\n";
        std::cout << "wrote " << opt.out << "/embeddings.tsv\n";
    } else {
        SparseBinaryMatrix matrix = to_sparse_matrix(corpus.bags, vocab);
        DrmTrainLog log;
        DrmModel model = drm_train(matrix, labels, rc.drm, &log);
        write_drm_checkpoint(model, opt.out + "/model.txt");
        if (!log.epoch_mean_loss.empty())
            std::cout << "final_epoch_loss=" << format_double(log.epoch_mean_loss.back())
                      << "\n";
        std::cout << "wrote " << opt.out << "/model.txt\n";
    }
    write_vocabulary(vocab, opt.out + "/vocabulary.tsv");
    write_run_log(opt, export_only ? "export-embeddings" : "train", extra);
    return 0;
}

int cmd_evaluate(const Options& opt) {
    ensure_out_dir(opt);
    if (opt.folds < 2) throw UsageError("--folds must be >= 2");
    if (opt.runs < 1) throw UsageError("--runs must be >= 1");
    RelationalDatabase db = load_database(opt);
    WordifyParams params = wordify_params(opt);
    Executor exec{opt.jobs};
    WordifyResult corpus = wordify_database(db, params, exec);

    std::vector<ResolvedConfig> grid = resolve_grid(opt, true);
    std::vector<MetricsReport> reports;
    for (const ResolvedConfig& rc : grid) {
        ExperimentConfig cfg;
        cfg.dataset = std::filesystem::path(opt.data).stem().string();
        cfg.config_id = rc.id;
        cfg.method = opt.method == "propstar"  ? Method::PropStar
                     : opt.method == "propdrm" ? Method::PropDrm
                                               : Method::Majority;
        cfg.wordify = params;
        cfg.star = rc.star;
        cfg.drm = rc.drm;
        cfg.folds = opt.folds;
        cfg.runs = opt.runs;
        cfg.seed = opt.seed;
        cfg.positive_class = positive_class_index(corpus.class_labels);
        MetricsReport report = run_experiment(corpus, cfg, exec);
        if (report.small_class_warning)
            std::cerr << "warning: some class has fewer members than folds\n";
        std::cout << report.dataset << " " << report.method << " " << report.config_id
                  << " accuracy=" << format_double(report.accuracy_mean)
                  << " auc=" << format_double(report.auc_mean) << "\n";
        reports.push_back(std::move(report));
    }
    write_fold_csv(reports, opt.out + "/folds.csv");
    write_summary_csv(reports, opt.out + "/summary.csv");
    std::map<std::string, std::string> extra = method_log(opt, grid.front());
    extra["folds"] = std::to_string(opt.folds);
    extra["runs"] = std::to_string(opt.runs);
    extra["configs"] = std::to_string(grid.size());
    write_run_log(opt, "evaluate", extra);
    return 0;
}

int cmd_explain(const Options& opt) {
    if (opt.method == "majority")
        throw UsageError("method 'majority' has no model to explain");
    ensure_out_dir(opt);
    ResolvedConfig rc = resolve_grid(opt, false).front();
    RelationalDatabase db = load_database(opt);
    WordifyParams params = wordify_params(opt);
    Executor exec{opt.jobs};
    WordifyResult corpus = wordify_database(db, params, exec);
    if (corpus.bags.empty()) throw std::runtime_error("no instances to explain");
    ItemVocabulary vocab =
        frequency_selection(corpus.bags, corpus.pool, params.budget, params.min_freq);
    std::vector<int> labels;
    for (const InstanceBag& bag : corpus.bags) labels.push_back(bag.label);
    int positive = positive_class_index(corpus.class_labels);

    // Fit the model on the full corpus, then attribute its score.
    StarModel star_model;
    DrmModel drm_model;
    SparseBinaryMatrix matrix;
    if (opt.method == "propstar") {
        std::vector<std::vector<std::uint32_t>> feats;
        for (const InstanceBag& bag : corpus.bags) feats.push_back(bag_features(bag, vocab));
        star_model = star_train(feats, labels, vocab, corpus.class_labels, rc.star);
    } else {
        matrix = to_sparse_matrix(corpus.bags, vocab);
        drm_model = drm_train(matrix, labels, rc.drm);
    }

    auto attribute_one = [&](const InstanceBag& bag) {
        std::vector<std::uint32_t> feats = bag_features(bag, vocab);
        CoalitionEvaluator ev = opt.method == "propstar"
                                    ? star_evaluator(star_model, feats, positive)
                                    : drm_evaluator(drm_model, feats);
        return opt.samples == 0 ? exact_shapley(ev)
                                : sampled_shapley(ev, opt.samples, opt.seed);
    };

    std::map<std::string, std::string> extra = method_log(opt, rc);
    extra["samples"] = std::to_string(opt.samples);
    if (!opt.instance.empty()) {
        const InstanceBag* bag = nullptr;
        for (const InstanceBag& b : corpus.bags) {
            if (b.instance == opt.instance) {
                bag = &b;
                break;
            }
        }
        if (!bag) throw std::runtime_error("no instance with key '" + opt.instance + "'");
        Attribution attr = attribute_one(*bag);
        write_attribution_csv(attr, vocab, opt.out + "/attribution.csv");
        extra["instance"] = opt.instance;
        write_run_log(opt, "explain", extra);
        std::cout << "instance=" << opt.instance << " features=" << attr.features.size()
                  << " f_full=" << format_double(attr.f_full) << "\n";
    } else {
        std::vector<Attribution> attrs;
        attrs.reserve(corpus.bags.size());
        for (const InstanceBag& bag : corpus.bags) attrs.push_back(attribute_one(bag));
        auto ranking = mean_abs_attribution(attrs);
        write_ranking_csv(ranking, vocab, opt.out + "/ranking.csv");
        write_run_log(opt, "explain", extra);
        std::cout << "instances=" << attrs.size() << " ranked_features=" << ranking.size()
                  << "\n";
    }
    return 0;
}

// ---- option wiring ----------------------------------------------------------

using SetterMap = std::map<std::string, std::function<void(const std::string&)>>;

// Flat key=value configuration file; command-line flags win over it.
void apply_config_file(const std::string& path, const SetterMap& setters,
                       const std::vector<std::string>& given) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed;
        for (char c : line) {
            if (c == '#') break;
            trimmed.push_back(c);
        }
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
            trimmed.pop_back();
        std::size_t start = 0;
        while (start < trimmed.size() &&
               std::isspace(static_cast<unsigned char>(trimmed[start])))
            ++start;
        trimmed = trimmed.substr(start);
        if (trimmed.empty()) continue;
        std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        std::string key = trimmed.substr(0, eq);
        std::string value = trimmed.substr(eq + 1);
        auto it = setters.find(key);
        if (it == setters.end())
            throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" +
                             key + "'");
        if (std::find(given.begin(), given.end(), key) != given.end()) continue;  // flag wins
        it->second(value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relational propositionalization and embedding toolkit"};
    app.require_subcommand(1);

    Options opt;
    std::map<const CLI::App*, SetterMap> setters_by_cmd;

    // All options are optional at parse time so a config file can supply
    // them; the mandatory ones are checked after the config is applied.
    auto add_common = [&](CLI::App* cmd, bool needs_method) {
        SetterMap& set = setters_by_cmd[cmd];
        cmd->add_option("--data", opt.data, "SQL dump file");
        set["data"] = [&](const std::string& v) { opt.data = v; };
        cmd->add_option("--target-table", opt.target_table, "table holding the instances");
        set["target-table"] = [&](const std::string& v) { opt.target_table = v; };
        cmd->add_option("--target-attribute", opt.target_attribute, "class attribute");
        set["target-attribute"] = [&](const std::string& v) { opt.target_attribute = v; };
        cmd->add_option("--max-order", opt.max_order, "FK hops from the target table");
        set["max-order"] = [&](const std::string& v) {
            opt.max_order = to_int(v, "max-order");
        };
        cmd->add_option("--budget", opt.budget, "vocabulary size cap");
        set["budget"] = [&](const std::string& v) {
            opt.budget = static_cast<std::size_t>(std::max(0, to_int(v, "budget")));
        };
        cmd->add_option("--min-freq", opt.min_freq, "minimum corpus frequency");
        set["min-freq"] = [&](const std::string& v) {
            opt.min_freq = static_cast<std::size_t>(std::max(0, to_int(v, "min-freq")));
        };
        cmd->add_option("--max-items", opt.max_items, "per-instance item cap");
        set["max-items"] = [&](const std::string& v) {
            opt.max_items = static_cast<std::size_t>(std::max(0, to_int(v, "max-items")));
        };
        cmd->add_option("--seed", opt.seed, "random seed");
        set["seed"] = [&](const std::string& v) {
            opt.seed = static_cast<std::uint64_t>(to_int(v, "seed"));
        };
        cmd->add_option("--jobs", opt.jobs, "worker threads");
        set["jobs"] = [&](const std::string& v) {
            int j = to_int(v, "jobs");
            if (j < 1) throw UsageError("--jobs must be >= 1");
            opt.jobs = static_cast<unsigned>(j);
        };
        cmd->add_option("--out", opt.out, "output directory");
        set["out"] = [&](const std::string& v) { opt.out = v; };
        cmd->add_option("--config", opt.config, "key=value configuration file");
        if (needs_method) {
            cmd->add_option("--method", opt.method, "learning method")
                ->check(CLI::IsMember({"propstar", "propdrm", "majority"}));
            set["method"] = [&](const std::string& v) {
                if (v != "propstar" && v != "propdrm" && v != "majority")
                    throw UsageError("unknown method '" + v + "'");
                opt.method = v;
            };
        }
    };
    auto add_hyper = [&](CLI::App* cmd) {
        SetterMap& set = setters_by_cmd[cmd];
        auto text = [&](const char* flag, std::string& slot, const char* help) {
            cmd->add_option(std::string("--") + flag, slot, help);
            set[flag] = [&slot](const std::string& v) { slot = v; };
        };
        text("dim", opt.dim, "embedding dimension");
        text("epochs", opt.epochs, "training epochs");
        text("lr", opt.lr, "learning rate");
        text("negatives", opt.negatives, "negative samples per update");
        text("margin", opt.margin, "ranking margin");
        text("hidden", opt.hidden, "hidden layer width");
        text("dropout", opt.dropout, "dropout probability");
        text("batch-size", opt.batch_size, "mini-batch size");
    };

    CLI::App* prop = app.add_subcommand("propositionalize",
                                        "Turn a SQL dump into bags, vocabulary and matrix");
    CLI::App* train = app.add_subcommand("train", "Fit a model on the full dataset");
    CLI::App* evaluate = app.add_subcommand("evaluate", "Cross-validated evaluation");
    CLI::App* explain = app.add_subcommand("explain", "Shapley attributions for instances");
    CLI::App* exporte = app.add_subcommand("export-embeddings",
                                           "Write item and label vectors as TSV");

    add_common(prop, false);
    for (CLI::App* cmd : {train, evaluate, explain, exporte}) {
        add_common(cmd, true);
        add_hyper(cmd);
    }
    evaluate->add_option("--folds", opt.folds, "cross-validation folds");
    setters_by_cmd[evaluate]["folds"] = [&](const std::string& v) {
        opt.folds = to_int(v, "folds");
    };
    evaluate->add_option("--runs", opt.runs, "repetitions");
    setters_by_cmd[evaluate]["runs"] = [&](const std::string& v) {
        opt.runs = to_int(v, "runs");
    };
    explain->add_option("--instance", opt.instance,
                        "instance key (omit to rank over all instances)");
    setters_by_cmd[explain]["instance"] = [&](const std::string& v) { opt.instance = v; };
    explain->add_option("--samples", opt.samples,
                        "Monte Carlo permutations (0 = exact enumeration)");
    setters_by_cmd[explain]["samples"] = [&](const std::string& v) {
        opt.samples = static_cast<std::size_t>(std::max(0, to_int(v, "samples")));
    };
    exporte->add_option("--model", opt.model, "existing embeddings TSV to re-emit");
    setters_by_cmd[exporte]["model"] = [&](const std::string& v) { opt.model = v; };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        if (!opt.config.empty()) {
            std::vector<std::string> given;
            for (const CLI::Option* o : cmd->get_options()) {
                std::string key = o->get_name();
                if (key.rfind("--", 0) == 0) key = key.substr(2);
                if (o->count() > 0) given.push_back(key);
            }
            apply_config_file(opt.config, setters_by_cmd[cmd], given);
        }
        if (opt.data.empty() && opt.model.empty()) throw UsageError("--data is required");
        if (opt.target_table.empty() && opt.model.empty())
            throw UsageError("--target-table is required");
        if (opt.target_attribute.empty() && opt.model.empty())
            throw UsageError("--target-attribute is required");
        if (opt.out.empty()) throw UsageError("--out is required");

        const std::string name = cmd->get_name();
        if (name == "propositionalize") return cmd_propositionalize(opt);
        if (name == "train") return cmd_train(opt, false);
        if (name == "evaluate") return cmd_evaluate(opt);
        if (name == "explain") return cmd_explain(opt);
        if (name == "export-embeddings") return cmd_train(opt, true);
        throw UsageError("unknown subcommand");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
