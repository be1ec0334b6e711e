#include "relprop/wordify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace relprop {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::uint32_t ItemPool::intern(std::string_view canon) {
    std::uint64_t h = fnv1a(canon);
    auto& bucket = buckets_[h];
    for (const Slot& s : bucket) {
        // Same 64-bit hash: fall back to full string comparison.
        if (texts_[s.id] == canon) return s.id;
    }
    std::uint32_t id = static_cast<std::uint32_t>(texts_.size());
    texts_.emplace_back(canon);
    bucket.push_back({h, id});
    return id;
}

ColumnCodec::ColumnCodec(const RelationalDatabase& db, int bins) {
    cols_.resize(db.tables.size());
    for (std::size_t t = 0; t < db.tables.size(); ++t) {
        const Table& table = db.tables[t];
        cols_[t].resize(table.columns.size());
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const ColumnSpec& col = table.columns[c];
            ColInfo& info = cols_[t][c];
            if (col.role != ColumnRole::Data) continue;  // keys and target stay Skip
            if (col.type == ColumnType::Text) {
                info.mode = Mode::Text;
                continue;
            }
            // Numeric column: range over all non-null values, and for
            // integers the distinct count decides categorical vs binned.
            double lo = 0.0, hi = 0.0;
            bool any = false;
            std::set<std::int64_t> distinct;
            bool small_domain = col.type == ColumnType::Integer;
            for (const auto& row : table.rows) {
                const Value& v = row[c];
                if (is_null(v)) continue;
                double x = col.type == ColumnType::Integer
                               ? static_cast<double>(std::get<std::int64_t>(v))
                               : std::get<double>(v);
                if (!any) {
                    lo = hi = x;
                    any = true;
                } else {
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
                if (small_domain) {
                    distinct.insert(std::get<std::int64_t>(v));
                    if (distinct.size() > 20) small_domain = false;
                }
            }
            if (!any) continue;  // all null: nothing to emit
            if (small_domain) {
                info.mode = Mode::CategoricalInt;
            } else {
                info.mode = col.type == ColumnType::Integer ? Mode::BinnedInt : Mode::BinnedReal;
                info.lo = lo;
                info.hi = hi;
                info.bins = std::max(1, bins);
            }
        }
    }
}

bool ColumnCodec::render(int table, int col, const Value& v, std::string& out) const {
    if (is_null(v)) return false;
    const ColInfo& info = cols_[table][col];
    switch (info.mode) {
        case Mode::Skip:
            return false;
        case Mode::Text:
            out = canonical_component(std::get<std::string>(v));
            return true;
        case Mode::CategoricalInt:
            out = std::to_string(std::get<std::int64_t>(v));
            return true;
        default: {
            double x = info.mode == Mode::BinnedInt
                           ? static_cast<double>(std::get<std::int64_t>(v))
                           : std::get<double>(v);
            int k = 0;
            if (info.hi > info.lo) {
                k = static_cast<int>((x - info.lo) / (info.hi - info.lo) * info.bins);
                k = std::clamp(k, 0, info.bins - 1);
            }
            out = "bin" + std::to_string(k);
            return true;
        }
    }
}

namespace {

// Item emission for one joined row: singleton items for every non-null data
// column in declared order, then all same-row pairs.  A size-2 conjunct is
// normalized to descending lexicographic order of its halves, which keeps
// the string independent of column order.
class RowEmitter {
  public:
    RowEmitter(const RelationalDatabase& db, const ColumnCodec& codec) : db_(&db), codec_(&codec) {
        prefixes_.resize(db.tables.size());
        for (std::size_t t = 0; t < db.tables.size(); ++t) {
            const Table& table = db.tables[t];
            prefixes_[t].resize(table.columns.size());
            std::string tname = canonical_component(table.name);
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                prefixes_[t][c] = tname + "_" + canonical_component(table.columns[c].name) + "_";
            }
        }
    }

    // Returns false when the per-instance cap was hit.
    bool emit(int table, std::size_t row, std::size_t cap, ItemPool& pool,
              std::vector<std::uint32_t>& items) {
        const Table& t = db_->tables[table];
        scratch_.clear();
        std::string rendered;
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (t.columns[c].role != ColumnRole::Data) continue;
            if (!codec_->render(table, static_cast<int>(c), t.rows[row][c], rendered)) continue;
            scratch_.push_back(prefixes_[table][c] + rendered);
        }
        for (const std::string& item : scratch_) {
            if (items.size() >= cap) return false;
            items.push_back(pool.intern(item));
        }
        for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
            for (std::size_t j = i + 1; j < scratch_.size(); ++j) {
                if (items.size() >= cap) return false;
                const std::string& a = scratch_[i];
                const std::string& b = scratch_[j];
                const std::string& first = a > b ? a : b;
                const std::string& second = a > b ? b : a;
                items.push_back(pool.intern(first + "__" + second));
            }
        }
        return true;
    }

  private:
    const RelationalDatabase* db_;
    const ColumnCodec* codec_;
    std::vector<std::vector<std::string>> prefixes_;
    std::vector<std::string> scratch_;
};

int label_index(const RelationalDatabase& db, const Value& v) {
    std::string text = value_text(v);
    auto it = std::lower_bound(db.class_labels.begin(), db.class_labels.end(), text);
    if (it == db.class_labels.end() || *it != text)
        throw std::runtime_error("target value '" + text + "' not among class labels");
    return static_cast<int>(it - db.class_labels.begin());
}

InstanceBag wordify_row(const RelationalDatabase& db, const JoinIndex& join, RowEmitter& emitter,
                        std::size_t target_row, const WordifyParams& params, ItemPool& pool) {
    int tt = db.target_table_index();
    const Table& target = db.tables[tt];
    InstanceBag bag;
    bag.instance = target.pk_col >= 0 ? value_text(target.rows[target_row][target.pk_col])
                                      : std::to_string(target_row);
    bag.label = label_index(db, target.rows[target_row][db.target_col_index()]);
    std::size_t cap = params.max_items_per_instance;
    std::vector<std::size_t> rows;
    if (emitter.emit(tt, target_row, cap, pool, bag.items)) {
        for (int t : join.neighborhood()) {
            rows.clear();
            join.rows_for(target_row, t, rows);
            bool ok = true;
            for (std::size_t r : rows) {
                if (!emitter.emit(t, r, cap, pool, bag.items)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
    }
    return bag;
}

}  // namespace

InstanceBag wordify_instance(const RelationalDatabase& db, const JoinIndex& join,
                             const ColumnCodec& codec, std::size_t target_row,
                             const WordifyParams& params, ItemPool& pool) {
    RowEmitter emitter(db, codec);
    return wordify_row(db, join, emitter, target_row, params, pool);
}

InstanceBag wordify_instance(const RelationalDatabase& db, const Value& instance_key,
                             const WordifyParams& params, ItemPool& pool) {
    if (!db.target) throw std::runtime_error("no target designated");
    int tt = db.target_table_index();
    const Table& target = db.tables[tt];
    if (target.pk_col < 0) throw std::runtime_error("target table has no primary key");
    std::string key = value_text(instance_key);
    for (std::size_t r = 0; r < target.rows.size(); ++r) {
        if (value_text(target.rows[r][target.pk_col]) == key) {
            JoinIndex join(db, params.max_order);
            ColumnCodec codec(db, params.bins);
            return wordify_instance(db, join, codec, r, params, pool);
        }
    }
    throw std::runtime_error("no instance with key '" + key + "'");
}

WordifyResult wordify_database(const RelationalDatabase& db, const WordifyParams& params,
                               const Executor& exec) {
    if (!db.target) throw std::runtime_error("no target designated");
    int tt = db.target_table_index();
    const Table& target = db.tables[tt];
    WordifyResult result;
    result.class_labels = db.class_labels;
    std::size_t n = target.rows.size();
    if (n == 0) return result;
    if (target.pk_col < 0) throw std::runtime_error("target table has no primary key");

    JoinIndex join(db, params.max_order);
    ColumnCodec codec(db, params.bins);

    // Each worker fills a contiguous chunk with its own pool; chunks are
    // merged in instance order, so item ids are independent of the worker
    // count (first-occurrence order over instances).
    unsigned workers = std::max(1u, exec.jobs);
    std::size_t n_chunks = std::min<std::size_t>(workers, n);
    struct Chunk {
        ItemPool pool;
        std::vector<InstanceBag> bags;
        std::size_t begin = 0;
    };
    std::vector<Chunk> chunks(n_chunks);
    exec.for_chunks(n, [&](std::size_t begin, std::size_t end, unsigned w) {
        Chunk& chunk = chunks[w];
        chunk.begin = begin;
        chunk.bags.reserve(end - begin);
        RowEmitter emitter(db, codec);
        for (std::size_t r = begin; r < end; ++r) {
            chunk.bags.push_back(wordify_row(db, join, emitter, r, params, chunk.pool));
        }
    });

    result.bags.resize(n);
    std::vector<std::uint32_t> remap;
    for (Chunk& chunk : chunks) {
        remap.assign(chunk.pool.size(), 0);
        for (std::uint32_t id = 0; id < chunk.pool.size(); ++id) {
            remap[id] = result.pool.intern(chunk.pool.text(id));
        }
        for (std::size_t i = 0; i < chunk.bags.size(); ++i) {
            InstanceBag& bag = chunk.bags[i];
            for (std::uint32_t& item : bag.items) item = remap[item];
            result.bags[chunk.begin + i] = std::move(bag);
        }
    }
    return result;
}

ItemVocabulary frequency_selection(std::span<const InstanceBag> bags, const ItemPool& pool,
                                   std::size_t budget, std::size_t min_freq,
                                   const VocabObserver& observer) {
    std::vector<std::uint64_t> counts(pool.size(), 0);
    for (std::size_t b = 0; b < bags.size(); ++b) {
        if (observer) observer(b);
        for (std::uint32_t item : bags[b].items) ++counts[item];
    }
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t id = 0; id < counts.size(); ++id) {
        if (counts[id] >= std::max<std::uint64_t>(min_freq, 1)) candidates.push_back(id);
    }
    std::sort(candidates.begin(), candidates.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return pool.text(a) < pool.text(b);
    });
    if (candidates.size() > budget) candidates.resize(budget);

    ItemVocabulary vocab;
    vocab.items.reserve(candidates.size());
    vocab.freq.reserve(candidates.size());
    vocab.feature_of.assign(pool.size(), -1);
    for (std::uint32_t id : candidates) {
        vocab.feature_of[id] = static_cast<std::int32_t>(vocab.items.size());
        vocab.items.push_back(pool.text(id));
        vocab.freq.push_back(counts[id]);
    }
    return vocab;
}

std::vector<std::uint32_t> bag_features(const InstanceBag& bag, const ItemVocabulary& vocab) {
    std::vector<std::uint32_t> features;
    features.reserve(bag.items.size());
    for (std::uint32_t item : bag.items) {
        std::int32_t f = vocab.feature(item);
        if (f >= 0) features.push_back(static_cast<std::uint32_t>(f));
    }
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());
    return features;
}

SparseBinaryMatrix to_sparse_matrix(std::span<const InstanceBag> bags,
                                    const ItemVocabulary& vocab) {
    SparseBinaryMatrix m;
    m.n_rows = bags.size();
    m.n_cols = vocab.size();
    m.offsets.reserve(bags.size() + 1);
    m.offsets.push_back(0);
    for (const InstanceBag& bag : bags) {
        std::vector<std::uint32_t> row = bag_features(bag, vocab);
        m.cols.insert(m.cols.end(), row.begin(), row.end());
        m.offsets.push_back(m.cols.size());
    }
    return m;
}

std::vector<std::string> bag_strings(const InstanceBag& bag, const ItemPool& pool) {
    std::vector<std::string> out;
    out.reserve(bag.items.size());
    for (std::uint32_t item : bag.items) out.push_back(pool.text(item));
    return out;
}

}  // namespace relprop
