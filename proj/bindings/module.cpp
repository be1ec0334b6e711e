// Python bindings for the core pipeline: parse -> wordify -> learn -> explain.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relprop/eval.hpp"
#include "relprop/explain.hpp"
#include "relprop/exports.hpp"
#include "relprop/propdrm.hpp"
#include "relprop/propstar.hpp"
#include "relprop/relstore.hpp"
#include "relprop/value.hpp"
#include "relprop/wordify.hpp"

namespace py = pybind11;
using namespace relprop;

namespace {

WordifyParams make_params(int max_order, std::size_t budget, std::size_t min_freq, int bins,
                          std::size_t max_items) {
    WordifyParams p;
    p.max_order = max_order;
    p.budget = budget;
    p.min_freq = min_freq;
    p.bins = bins;
    p.max_items_per_instance = max_items;
    return p;
}

std::vector<std::vector<std::uint32_t>> corpus_features(const WordifyResult& corpus,
                                                        const ItemVocabulary& vocab) {
    std::vector<std::vector<std::uint32_t>> feats;
    feats.reserve(corpus.bags.size());
    for (const InstanceBag& bag : corpus.bags) feats.push_back(bag_features(bag, vocab));
    return feats;
}

Attribution run_shapley(const CoalitionEvaluator& ev, std::size_t samples,
                        std::uint64_t seed) {
    return samples == 0 ? exact_shapley(ev) : sampled_shapley(ev, samples, seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Relational propositionalization and embedding toolkit";

    py::class_<RelationalDatabase>(m, "Database")
        .def_property_readonly("tables",
                               [](const RelationalDatabase& db) {
                                   std::vector<std::string> names;
                                   for (const Table& t : db.tables) names.push_back(t.name);
                                   return names;
                               })
        .def_property_readonly(
            "class_labels",
            [](const RelationalDatabase& db) { return db.class_labels; })
        .def("row_count", [](const RelationalDatabase& db, const std::string& table) {
            const Table* t = db.find_table(table);
            if (!t) throw std::runtime_error("no table named '" + table + "'");
            return t->n_rows();
        });

    m.def("parse_sql", [](const std::string& text) { return parse_sql_dump(text); },
          py::arg("text"), "Parse a SQL dump given as a string");
    m.def("parse_sql_file", [](const std::string& path) { return parse_sql_file(path); },
          py::arg("path"));
    m.def("serialize_sql", &serialize_sql_dump, py::arg("db"));
    m.def(
        "validate",
        [](RelationalDatabase& db) {
            ValidationReport r = validate(db);
            std::vector<std::string> out;
            for (const ValidationIssue& i : r.issues) out.push_back(i.table + ": " + i.detail);
            return out;
        },
        py::arg("db"), "Drop invalid rows in place; returns issue descriptions");
    m.def("designate_target", &designate_target, py::arg("db"), py::arg("table"),
          py::arg("attribute"));
    m.def("canonical_component",
          [](const std::string& raw) { return canonical_component(raw); });

    py::class_<WordifyResult>(m, "Corpus")
        .def_property_readonly("class_labels",
                               [](const WordifyResult& c) { return c.class_labels; })
        .def_property_readonly("instances",
                               [](const WordifyResult& c) {
                                   std::vector<std::string> keys;
                                   for (const InstanceBag& b : c.bags)
                                       keys.push_back(b.instance);
                                   return keys;
                               })
        .def_property_readonly("labels",
                               [](const WordifyResult& c) {
                                   std::vector<int> ls;
                                   for (const InstanceBag& b : c.bags) ls.push_back(b.label);
                                   return ls;
                               })
        .def("__len__", [](const WordifyResult& c) { return c.bags.size(); })
        .def("bag", [](const WordifyResult& c, std::size_t i) {
            return bag_strings(c.bags.at(i), c.pool);
        });

    m.def(
        "wordify",
        [](const RelationalDatabase& db, int max_order, std::size_t budget,
           std::size_t min_freq, int bins, std::size_t max_items, unsigned jobs) {
            Executor exec{jobs};
            return wordify_database(db, make_params(max_order, budget, min_freq, bins, max_items),
                                    exec);
        },
        py::arg("db"), py::arg("max_order") = 2, py::arg("budget") = 10000,
        py::arg("min_freq") = 1, py::arg("bins") = 5, py::arg("max_items") = 10000,
        py::arg("jobs") = 1);

    py::class_<ItemVocabulary>(m, "Vocabulary")
        .def_property_readonly("items", [](const ItemVocabulary& v) { return v.items; })
        .def_property_readonly("freq", [](const ItemVocabulary& v) { return v.freq; })
        .def("__len__", [](const ItemVocabulary& v) { return v.size(); });

    m.def(
        "frequency_selection",
        [](const WordifyResult& corpus, std::size_t budget, std::size_t min_freq) {
            return frequency_selection(corpus.bags, corpus.pool, budget, min_freq);
        },
        py::arg("corpus"), py::arg("budget") = 10000, py::arg("min_freq") = 1);

    py::class_<SparseBinaryMatrix>(m, "SparseMatrix")
        .def_property_readonly("n_rows", [](const SparseBinaryMatrix& m_) { return m_.n_rows; })
        .def_property_readonly("n_cols", [](const SparseBinaryMatrix& m_) { return m_.n_cols; })
        .def_property_readonly("nnz", [](const SparseBinaryMatrix& m_) { return m_.nnz(); })
        .def("row", [](const SparseBinaryMatrix& m_, std::size_t r) {
            if (r >= m_.n_rows) throw py::index_error();
            auto span = m_.row(r);
            return std::vector<std::uint32_t>(span.begin(), span.end());
        });

    m.def(
        "to_sparse_matrix",
        [](const WordifyResult& corpus, const ItemVocabulary& vocab) {
            return to_sparse_matrix(corpus.bags, vocab);
        },
        py::arg("corpus"), py::arg("vocab"));

    py::class_<StarModel>(m, "StarModel")
        .def_property_readonly("dim", [](const StarModel& s) { return s.dim; })
        .def_property_readonly("items", [](const StarModel& s) { return s.items; })
        .def_property_readonly("labels", [](const StarModel& s) { return s.labels; })
        .def("item_vector",
             [](const StarModel& s, std::size_t i) {
                 if (i >= s.items.size()) throw py::index_error();
                 auto b = s.item_vectors.begin() + static_cast<std::ptrdiff_t>(i) * s.dim;
                 return std::vector<double>(b, b + s.dim);
             })
        .def("label_vector", [](const StarModel& s, std::size_t i) {
            if (i >= s.labels.size()) throw py::index_error();
            auto b = s.label_vectors.begin() + static_cast<std::ptrdiff_t>(i) * s.dim;
            return std::vector<double>(b, b + s.dim);
        });

    m.def(
        "star_train",
        [](const WordifyResult& corpus, const ItemVocabulary& vocab, int dim, int epochs,
           double lr, int negatives, double margin, std::uint64_t seed) {
            StarConfig cfg;
            cfg.dim = dim;
            cfg.epochs = epochs;
            cfg.lr = lr;
            cfg.negatives = negatives;
            cfg.margin = margin;
            cfg.seed = seed;
            std::vector<int> labels;
            for (const InstanceBag& b : corpus.bags) labels.push_back(b.label);
            return star_train(corpus_features(corpus, vocab), labels, vocab,
                              corpus.class_labels, cfg);
        },
        py::arg("corpus"), py::arg("vocab"), py::arg("dim") = 32, py::arg("epochs") = 5,
        py::arg("lr") = 0.05, py::arg("negatives") = 5, py::arg("margin") = 0.05,
        py::arg("seed") = 42);

    m.def(
        "star_scores",
        [](const StarModel& model, const WordifyResult& corpus, const ItemVocabulary& vocab,
           std::size_t index) {
            return star_scores(model, bag_features(corpus.bags.at(index), vocab));
        },
        py::arg("model"), py::arg("corpus"), py::arg("vocab"), py::arg("index"));
    m.def(
        "star_predict",
        [](const StarModel& model, const WordifyResult& corpus, const ItemVocabulary& vocab,
           std::size_t index) {
            return star_predict(model, bag_features(corpus.bags.at(index), vocab));
        },
        py::arg("model"), py::arg("corpus"), py::arg("vocab"), py::arg("index"));

    py::class_<DrmModel>(m, "DrmModel")
        .def_property_readonly("input_dim", [](const DrmModel& d) { return d.input_dim; })
        .def_property_readonly("hidden", [](const DrmModel& d) { return d.hidden; });

    m.def(
        "drm_train",
        [](const WordifyResult& corpus, const ItemVocabulary& vocab, int hidden,
           double dropout, double lr, int epochs, int batch_size, std::uint64_t seed) {
            DrmConfig cfg;
            cfg.hidden = hidden;
            cfg.dropout = dropout;
            cfg.lr = lr;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.seed = seed;
            std::vector<int> labels;
            for (const InstanceBag& b : corpus.bags) labels.push_back(b.label);
            return drm_train(to_sparse_matrix(corpus.bags, vocab), labels, cfg);
        },
        py::arg("corpus"), py::arg("vocab"), py::arg("hidden") = 64,
        py::arg("dropout") = 0.2, py::arg("lr") = 0.01, py::arg("epochs") = 10,
        py::arg("batch_size") = 32, py::arg("seed") = 42);

    m.def(
        "drm_scores",
        [](const DrmModel& model, const WordifyResult& corpus, const ItemVocabulary& vocab) {
            return drm_scores(model, to_sparse_matrix(corpus.bags, vocab));
        },
        py::arg("model"), py::arg("corpus"), py::arg("vocab"));

    m.def(
        "evaluate",
        [](const WordifyResult& corpus, const std::string& method, int folds, int runs,
           std::uint64_t seed, int dim, int epochs_star, double lr_star, int negatives,
           double margin, int hidden, double dropout, double lr_drm, int epochs_drm,
           int batch_size, unsigned jobs) {
            ExperimentConfig cfg;
            cfg.dataset = "corpus";
            cfg.method = method == "propstar"  ? Method::PropStar
                         : method == "propdrm" ? Method::PropDrm
                         : method == "majority"
                             ? Method::Majority
                             : throw std::runtime_error("unknown method '" + method + "'");
            cfg.folds = folds;
            cfg.runs = runs;
            cfg.seed = seed;
            cfg.star.dim = dim;
            cfg.star.epochs = epochs_star;
            cfg.star.lr = lr_star;
            cfg.star.negatives = negatives;
            cfg.star.margin = margin;
            cfg.drm.hidden = hidden;
            cfg.drm.dropout = dropout;
            cfg.drm.lr = lr_drm;
            cfg.drm.epochs = epochs_drm;
            cfg.drm.batch_size = batch_size;
            cfg.positive_class = corpus.class_labels.size() == 2 ? 1 : 0;
            Executor exec{jobs};
            MetricsReport r = run_experiment(corpus, cfg, exec);
            py::dict out;
            out["method"] = r.method;
            out["accuracy_mean"] = r.accuracy_mean;
            out["accuracy_std"] = r.accuracy_std;
            out["auc_mean"] = r.auc_mean;
            out["auc_std"] = r.auc_std;
            out["small_class_warning"] = r.small_class_warning;
            py::list folds_out;
            for (const FoldMetrics& f : r.per_fold)
                folds_out.append(py::make_tuple(f.run, f.fold, f.accuracy, f.auc));
            out["per_fold"] = folds_out;
            return out;
        },
        py::arg("corpus"), py::arg("method") = "propstar", py::arg("folds") = 10,
        py::arg("runs") = 5, py::arg("seed") = 42, py::arg("dim") = 32,
        py::arg("epochs_star") = 5, py::arg("lr_star") = 0.05, py::arg("negatives") = 5,
        py::arg("margin") = 0.05, py::arg("hidden") = 64, py::arg("dropout") = 0.2,
        py::arg("lr_drm") = 0.01, py::arg("epochs_drm") = 10, py::arg("batch_size") = 32,
        py::arg("jobs") = 1);

    py::class_<Attribution>(m, "Attribution")
        .def_property_readonly("features", [](const Attribution& a) { return a.features; })
        .def_property_readonly("phi", [](const Attribution& a) { return a.phi; })
        .def_property_readonly("f_empty", [](const Attribution& a) { return a.f_empty; })
        .def_property_readonly("f_full", [](const Attribution& a) { return a.f_full; });

    m.def(
        "star_shapley",
        [](const StarModel& model, const WordifyResult& corpus, const ItemVocabulary& vocab,
           std::size_t index, int positive, std::size_t samples, std::uint64_t seed) {
            auto feats = bag_features(corpus.bags.at(index), vocab);
            return run_shapley(star_evaluator(model, feats, positive), samples, seed);
        },
        py::arg("model"), py::arg("corpus"), py::arg("vocab"), py::arg("index"),
        py::arg("positive") = 1, py::arg("samples") = 0, py::arg("seed") = 42);
    m.def(
        "drm_shapley",
        [](const DrmModel& model, const WordifyResult& corpus, const ItemVocabulary& vocab,
           std::size_t index, std::size_t samples, std::uint64_t seed) {
            auto feats = bag_features(corpus.bags.at(index), vocab);
            return run_shapley(drm_evaluator(model, feats), samples, seed);
        },
        py::arg("model"), py::arg("corpus"), py::arg("vocab"), py::arg("index"),
        py::arg("samples") = 0, py::arg("seed") = 42);

    // File round-trips shared with the CLI.
    m.def("write_embeddings", &write_embeddings, py::arg("model"), py::arg("path"));
    m.def("read_embeddings", &read_embeddings, py::arg("path"));
    m.def("write_drm_checkpoint", &write_drm_checkpoint, py::arg("model"), py::arg("path"));
    m.def("read_drm_checkpoint", &read_drm_checkpoint, py::arg("path"));
    m.def(
        "write_sparse_matrix",
        [](const SparseBinaryMatrix& m_, const std::string& path) {
            write_sparse_matrix(m_, path);
        },
        py::arg("matrix"), py::arg("path"));
    m.def("read_sparse_matrix", &read_sparse_matrix, py::arg("path"));
}
