#pragma once

#include <span>
#include <string>
#include <vector>

#include "relprop/eval.hpp"
#include "relprop/explain.hpp"
#include "relprop/propdrm.hpp"
#include "relprop/propstar.hpp"
#include "relprop/wordify.hpp"

namespace relprop {

// All writers emit '\n' line endings and format doubles with %.17g so a
// rerun with identical inputs reproduces files byte for byte.

std::string format_double(double v);

// Sparse triplet text: "n_rows n_cols nnz" header, then "row col 1" lines in
// row-major order.
void write_sparse_matrix(const SparseBinaryMatrix& m, const std::string& path);
SparseBinaryMatrix read_sparse_matrix(const std::string& path);

// Tab-separated "index<TAB>item<TAB>frequency".
void write_vocabulary(const ItemVocabulary& vocab, const std::string& path);

// One instance per line: space-separated canonical items (generation order)
// followed by "__label__<class>".
void write_bags(std::span<const InstanceBag> bags, const ItemPool& pool,
                std::span<const std::string> class_labels, const std::string& path);
WordifyResult read_bags(const std::string& path);

// "item<TAB>v_1<TAB>...<TAB>v_d", item vectors first, then one row per class
// labelled "__label__<class>".
void write_embeddings(const StarModel& model, const std::string& path);
StarModel read_embeddings(const std::string& path);

// Versioned text checkpoint for the neural model.
void write_drm_checkpoint(const DrmModel& model, const std::string& path);
DrmModel read_drm_checkpoint(const std::string& path);

// Per-fold rows: dataset,method,config_id,run,fold,accuracy,auc.
void write_fold_csv(std::span<const MetricsReport> reports, const std::string& path);
// Aggregates: dataset,method,config_id,accuracy_mean,accuracy_std,auc_mean,auc_std.
void write_summary_csv(std::span<const MetricsReport> reports, const std::string& path);

// Attribution export: feature,item,phi per line, plus baseline/full rows.
void write_attribution_csv(const Attribution& attr, const ItemVocabulary& vocab,
                           const std::string& path);
void write_ranking_csv(std::span<const std::pair<std::uint32_t, double>> ranking,
                       const ItemVocabulary& vocab, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace relprop
