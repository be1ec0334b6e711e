#include "relprop/exports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relprop {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    return in;
}

[[noreturn]] void bad_file(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
}

void write_sparse_matrix(const SparseBinaryMatrix& m, const std::string& path) {
    std::ofstream out = open_out(path);
    out << m.n_rows << " " << m.n_cols << " " << m.nnz() << "\n";
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        for (std::uint32_t c : m.row(r)) {
            out << r << " " << c << " 1\n";
        }
    }
}

SparseBinaryMatrix read_sparse_matrix(const std::string& path) {
    std::ifstream in = open_in(path);
    SparseBinaryMatrix m;
    std::size_t nnz = 0;
    if (!(in >> m.n_rows >> m.n_cols >> nnz)) bad_file(path, "bad header");
    m.offsets.assign(m.n_rows + 1, 0);
    std::vector<std::pair<std::size_t, std::uint32_t>> cells;
    cells.reserve(nnz);
    for (std::size_t i = 0; i < nnz; ++i) {
        std::size_t r = 0;
        std::uint32_t c = 0;
        int one = 0;
        if (!(in >> r >> c >> one) || one != 1) bad_file(path, "bad triplet");
        if (r >= m.n_rows || c >= m.n_cols) bad_file(path, "triplet out of range");
        cells.emplace_back(r, c);
    }
    for (const auto& [r, c] : cells) ++m.offsets[r + 1];
    for (std::size_t r = 0; r < m.n_rows; ++r) m.offsets[r + 1] += m.offsets[r];
    m.cols.resize(cells.size());
    std::vector<std::size_t> cursor(m.offsets.begin(), m.offsets.end() - 1);
    for (const auto& [r, c] : cells) m.cols[cursor[r]++] = c;
    return m;
}

void write_vocabulary(const ItemVocabulary& vocab, const std::string& path) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < vocab.items.size(); ++i) {
        out << i << "\t" << vocab.items[i] << "\t" << vocab.freq[i] << "\n";
    }
}

void write_bags(std::span<const InstanceBag> bags, const ItemPool& pool,
                std::span<const std::string> class_labels, const std::string& path) {
    std::ofstream out = open_out(path);
    for (const InstanceBag& bag : bags) {
        for (std::uint32_t item : bag.items) out << pool.text(item) << " ";
        out << "__label__" << class_labels[bag.label] << "\n";
    }
}

WordifyResult read_bags(const std::string& path) {
    std::ifstream in = open_in(path);
    WordifyResult result;
    std::vector<std::string> label_texts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        InstanceBag bag;
        bag.instance = std::to_string(result.bags.size());
        std::istringstream ss(line);
        std::string tok, label;
        while (ss >> tok) {
            if (tok.rfind("__label__", 0) == 0) {
                label = tok.substr(9);
            } else {
                bag.items.push_back(result.pool.intern(tok));
            }
        }
        if (label.empty())
            bad_file(path, "line " + std::to_string(line_no) + " has no __label__");
        label_texts.push_back(label);
        result.bags.push_back(std::move(bag));
    }
    // Class indices follow the sorted text order, as during wordification.
    result.class_labels = label_texts;
    std::sort(result.class_labels.begin(), result.class_labels.end());
    result.class_labels.erase(
        std::unique(result.class_labels.begin(), result.class_labels.end()),
        result.class_labels.end());
    for (std::size_t i = 0; i < result.bags.size(); ++i) {
        auto it = std::lower_bound(result.class_labels.begin(), result.class_labels.end(),
                                   label_texts[i]);
        result.bags[i].label = static_cast<int>(it - result.class_labels.begin());
    }
    return result;
}

void write_embeddings(const StarModel& model, const std::string& path) {
    std::ofstream out = open_out(path);
    auto row = [&](const std::string& name, const double* v) {
        out << name;
        for (int i = 0; i < model.dim; ++i) out << "\t" << format_double(v[i]);
        out << "\n";
    };
    for (std::size_t i = 0; i < model.items.size(); ++i) {
        row(model.items[i], model.item_vectors.data() + i * model.dim);
    }
    for (std::size_t c = 0; c < model.labels.size(); ++c) {
        row("__label__" + model.labels[c], model.label_vectors.data() + c * model.dim);
    }
}

StarModel read_embeddings(const std::string& path) {
    std::ifstream in = open_in(path);
    StarModel model;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string name;
        if (!std::getline(ss, name, '\t')) bad_file(path, "bad row");
        std::vector<double> vec;
        std::string cell;
        while (std::getline(ss, cell, '\t')) vec.push_back(std::strtod(cell.c_str(), nullptr));
        if (model.dim == 0) model.dim = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != model.dim || model.dim == 0)
            bad_file(path, "inconsistent vector width");
        if (name.rfind("__label__", 0) == 0) {
            model.labels.push_back(name.substr(9));
            model.label_vectors.insert(model.label_vectors.end(), vec.begin(), vec.end());
        } else {
            if (!model.labels.empty()) bad_file(path, "item row after label rows");
            model.items.push_back(name);
            model.item_vectors.insert(model.item_vectors.end(), vec.begin(), vec.end());
        }
    }
    if (model.labels.empty()) bad_file(path, "no label rows");
    return model;
}

void write_drm_checkpoint(const DrmModel& model, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "drm-checkpoint 1\n";
    out << "dims " << model.input_dim << " " << model.hidden << "\n";
    out << "elu_c " << format_double(model.elu_c) << "\n";
    out << "dropout " << format_double(model.dropout) << "\n";
    out << "W1\n";
    for (int i = 0; i < model.input_dim; ++i) {
        const double* row = model.W1.data() + static_cast<std::size_t>(i) * model.hidden;
        for (int j = 0; j < model.hidden; ++j) {
            out << (j ? " " : "") << format_double(row[j]);
        }
        out << "\n";
    }
    out << "b1\n";
    for (int j = 0; j < model.hidden; ++j) out << (j ? " " : "") << format_double(model.b1[j]);
    out << "\nWo\n";
    for (int j = 0; j < model.hidden; ++j) out << (j ? " " : "") << format_double(model.Wo[j]);
    out << "\nbo " << format_double(model.bo) << "\n";
}

DrmModel read_drm_checkpoint(const std::string& path) {
    std::ifstream in = open_in(path);
    DrmModel model;
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "drm-checkpoint" || version != 1)
        bad_file(path, "not a version-1 checkpoint");
    if (!(in >> word >> model.input_dim >> model.hidden) || word != "dims")
        bad_file(path, "bad dims");
    if (!(in >> word >> model.elu_c) || word != "elu_c") bad_file(path, "bad elu_c");
    if (!(in >> word >> model.dropout) || word != "dropout") bad_file(path, "bad dropout");
    if (!(in >> word) || word != "W1") bad_file(path, "bad W1");
    model.W1.resize(static_cast<std::size_t>(model.input_dim) * model.hidden);
    for (double& v : model.W1) {
        if (!(in >> v)) bad_file(path, "truncated W1");
    }
    if (!(in >> word) || word != "b1") bad_file(path, "bad b1");
    model.b1.resize(model.hidden);
    for (double& v : model.b1) {
        if (!(in >> v)) bad_file(path, "truncated b1");
    }
    if (!(in >> word) || word != "Wo") bad_file(path, "bad Wo");
    model.Wo.resize(model.hidden);
    for (double& v : model.Wo) {
        if (!(in >> v)) bad_file(path, "truncated Wo");
    }
    if (!(in >> word >> model.bo) || word != "bo") bad_file(path, "bad bo");
    return model;
}

namespace {

std::string metric_text(double v) {
    return std::isnan(v) ? "nan" : format_double(v);
}

}  // namespace

void write_fold_csv(std::span<const MetricsReport> reports, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "dataset,method,config_id,run,fold,accuracy,auc\n";
    for (const MetricsReport& rep : reports) {
        for (const FoldMetrics& m : rep.per_fold) {
            out << rep.dataset << "," << rep.method << "," << rep.config_id << "," << m.run
                << "," << m.fold << "," << metric_text(m.accuracy) << ","
                << metric_text(m.auc) << "\n";
        }
    }
}

void write_summary_csv(std::span<const MetricsReport> reports, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "dataset,method,config_id,accuracy_mean,accuracy_std,auc_mean,auc_std\n";
    for (const MetricsReport& rep : reports) {
        out << rep.dataset << "," << rep.method << "," << rep.config_id << ","
            << metric_text(rep.accuracy_mean) << "," << metric_text(rep.accuracy_std) << ","
            << metric_text(rep.auc_mean) << "," << metric_text(rep.auc_std) << "\n";
    }
}

void write_attribution_csv(const Attribution& attr, const ItemVocabulary& vocab,
                           const std::string& path) {
    std::ofstream out = open_out(path);
    out << "feature,item,phi\n";
    for (std::size_t i = 0; i < attr.features.size(); ++i) {
        std::uint32_t f = attr.features[i];
        out << f << "," << (f < vocab.items.size() ? vocab.items[f] : "?") << ","
            << format_double(attr.phi[i]) << "\n";
    }
    out << "baseline,," << format_double(attr.f_empty) << "\n";
    out << "full,," << format_double(attr.f_full) << "\n";
}

void write_ranking_csv(std::span<const std::pair<std::uint32_t, double>> ranking,
                       const ItemVocabulary& vocab, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "feature,item,mean_abs_phi\n";
    for (const auto& [f, v] : ranking) {
        out << f << "," << (f < vocab.items.size() ? vocab.items[f] : "?") << ","
            << format_double(v) << "\n";
    }
}

}  // namespace relprop
