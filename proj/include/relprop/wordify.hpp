#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relprop/executor.hpp"
#include "relprop/relstore.hpp"

namespace relprop {

struct WordifyParams {
    int max_order = 2;                      // FK hops from the target table
    std::size_t max_items_per_instance = 10000;
    int bins = 5;                           // equal-width bins for numerics
    std::size_t budget = 10000;             // vocabulary size cap
    std::size_t min_freq = 1;               // minimum corpus-wide multiset count
};

// Interning pool mapping canonical item strings to dense ids.  Uses 64-bit
// hashes with full-string comparison on collision.
class ItemPool {
  public:
    std::uint32_t intern(std::string_view canon);
    const std::string& text(std::uint32_t id) const { return texts_[id]; }
    std::size_t size() const { return texts_.size(); }

  private:
    struct Slot {
        std::uint64_t hash;
        std::uint32_t id;
    };
    std::vector<std::string> texts_;
    std::unordered_map<std::uint64_t, std::vector<Slot>> buckets_;
};

// One bag per target-table row: the multiset of item ids in generation order.
struct InstanceBag {
    std::string instance;          // text form of the primary key (or row ordinal)
    std::vector<std::uint32_t> items;
    int label = -1;                // index into db.class_labels
};

struct WordifyResult {
    ItemPool pool;
    std::vector<InstanceBag> bags;  // target-table row order
    std::vector<std::string> class_labels;
};

// Per-column rendering of values to canonical item components.  Text columns
// pass through canonicalization; numeric columns are discretized to
// equal-width bins computed over the full column, except integer columns
// with at most 20 distinct values, which stay categorical.
class ColumnCodec {
  public:
    ColumnCodec() = default;
    ColumnCodec(const RelationalDatabase& db, int bins);

    // Empty result means "emit no item" (nulls only; codecs cover all data columns).
    bool render(int table, int col, const Value& v, std::string& out) const;

  private:
    enum class Mode { Skip, Text, CategoricalInt, BinnedReal, BinnedInt };
    struct ColInfo {
        Mode mode = Mode::Skip;
        double lo = 0.0, hi = 0.0;
        int bins = 1;
    };
    std::vector<std::vector<ColInfo>> cols_;  // [table][col]
};

// Propositionalize every instance (one bag per target-table row).
WordifyResult wordify_database(const RelationalDatabase& db, const WordifyParams& params,
                               const Executor& exec = {});

// Single-instance variant; items are interned into `pool`.
InstanceBag wordify_instance(const RelationalDatabase& db, const JoinIndex& join,
                             const ColumnCodec& codec, std::size_t target_row,
                             const WordifyParams& params, ItemPool& pool);

// Convenience overload addressing the instance by primary-key value.
InstanceBag wordify_instance(const RelationalDatabase& db, const Value& instance_key,
                             const WordifyParams& params, ItemPool& pool);

// Observer invoked once per bag whose counts enter vocabulary construction,
// with the bag's position in the span passed to frequency_selection.
using VocabObserver = std::function<void(std::size_t bag_ordinal)>;

struct ItemVocabulary {
    std::vector<std::string> items;        // feature index -> canonical string
    std::vector<std::uint64_t> freq;       // corpus-wide multiset counts
    std::vector<std::int32_t> feature_of;  // pool id -> feature index or -1

    std::size_t size() const { return items.size(); }
    std::int32_t feature(std::uint32_t pool_id) const {
        return pool_id < feature_of.size() ? feature_of[pool_id] : -1;
    }
};

// Keep the `budget` most frequent items with corpus frequency >= min_freq.
// Frequencies count multiset occurrences; ties break by ascending
// lexicographic order of the canonical string.
ItemVocabulary frequency_selection(std::span<const InstanceBag> bags, const ItemPool& pool,
                                   std::size_t budget, std::size_t min_freq,
                                   const VocabObserver& observer = nullptr);

// Binary CSR indicator matrix: rows follow `bags`, columns follow the
// vocabulary; duplicate items set a cell once.
struct SparseBinaryMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> offsets;   // size n_rows + 1
    std::vector<std::uint32_t> cols;    // ascending within each row

    std::size_t nnz() const { return cols.size(); }
    std::span<const std::uint32_t> row(std::size_t r) const {
        return {cols.data() + offsets[r], cols.data() + offsets[r + 1]};
    }
};

SparseBinaryMatrix to_sparse_matrix(std::span<const InstanceBag> bags,
                                    const ItemVocabulary& vocab);

// Sorted unique feature indices of one bag under `vocab`.
std::vector<std::uint32_t> bag_features(const InstanceBag& bag, const ItemVocabulary& vocab);

// Canonical strings of a bag in generation order (for inspection and tests).
std::vector<std::string> bag_strings(const InstanceBag& bag, const ItemPool& pool);

}  // namespace relprop
