#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relprop/value.hpp"

namespace relprop {

enum class ColumnType { Integer, Real, Text };
enum class ColumnRole { PrimaryKey, ForeignKey, Data, TargetClass };

struct ColumnSpec {
    std::string name;
    ColumnType type = ColumnType::Text;
    ColumnRole role = ColumnRole::Data;
    std::string fk_table;  // referenced table when role == ForeignKey
};

struct Table {
    std::string name;
    std::vector<ColumnSpec> columns;
    std::vector<std::vector<Value>> rows;
    int pk_col = -1;

    std::size_t n_rows() const { return rows.size(); }
    int column_index(std::string_view col) const;
};

// Directed foreign-key edge: child.columns[child_col] references parent's
// primary key.
struct FkEdge {
    int child_table = -1;
    int child_col = -1;
    int parent_table = -1;
};

struct TargetSpec {
    std::string table;
    std::string attribute;
};

struct RelationalDatabase {
    std::vector<Table> tables;  // in ingestion order
    std::vector<FkEdge> fk_graph;
    std::optional<TargetSpec> target;
    // Distinct non-null target values, sorted by text form; the class index
    // of a value is its position in this list.
    std::vector<std::string> class_labels;

    int table_index(std::string_view name) const;
    const Table* find_table(std::string_view name) const;
    Table* find_table(std::string_view name);
    int target_table_index() const;
    int target_col_index() const;
};

struct ParseOptions {
    // When no FOREIGN KEY clause is present, recognize "<table>_id" columns
    // and columns named exactly like another table's primary key.
    bool infer_fk_by_naming = true;
};

// Parse a SQL dump (CREATE TABLE + INSERT INTO statements).  Throws
// std::runtime_error with a line number on malformed input.
RelationalDatabase parse_sql_dump(std::string_view text, const ParseOptions& opts = {});
RelationalDatabase parse_sql_file(const std::string& path, const ParseOptions& opts = {});

// Serialize back to a dump that parses to an equivalent database.
std::string serialize_sql_dump(const RelationalDatabase& db);

struct ValidationIssue {
    enum Kind { DanglingFk, NullPrimaryKey, EmptyTable } kind;
    std::string table;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    std::size_t rows_dropped = 0;
};

// Check referential integrity.  Rows whose foreign key references a missing
// row are dropped (repeatedly, until a fixpoint) and reported.
ValidationReport validate(RelationalDatabase& db);

// Mark <table>.<attribute> as the class attribute and freeze class_labels.
// Throws when the attribute is missing, is a key column, has null values, or
// has fewer than two distinct values in a non-empty table.
void designate_target(RelationalDatabase& db, const std::string& table,
                      const std::string& attribute);

// Tables reachable from `table` over foreign-key edges in either direction,
// up to `max_order` hops, excluding `table` itself.  Breadth-first: nearer
// tables first, ties by table name.
std::vector<std::string> fk_neighborhood(const RelationalDatabase& db,
                                         const std::string& table, int max_order);

// Precomputed join paths and per-edge row indices for instance-centric
// retrieval.  A path is a sequence of foreign-key edges walked in either
// direction that never revisits a table; two paths are distinct when their
// edge sequences differ.
class JoinIndex {
  public:
    JoinIndex(const RelationalDatabase& db, int max_order);

    // Table indices reachable from the target table, breadth-first order.
    const std::vector<int>& neighborhood() const { return neighborhood_; }

    // Row indices of `table_idx` joined to the given target-table row, once
    // per (path, witness chain); appended to `out` in deterministic order.
    void rows_for(std::size_t target_row, int table_idx,
                  std::vector<std::size_t>& out) const;

  private:
    struct Step {
        int edge = -1;      // index into db.fk_graph
        bool forward;       // true: child -> parent, false: parent -> child
        int to_table = -1;  // table reached after the step
    };
    struct Path {
        std::vector<Step> steps;
    };

    const RelationalDatabase* db_;
    int target_table_ = -1;
    std::vector<int> neighborhood_;
    std::vector<std::vector<Path>> paths_by_table_;  // indexed by table idx
    // Per edge: child row -> parent row (or npos), and parent row -> child rows.
    std::vector<std::vector<std::size_t>> child_to_parent_;
    std::vector<std::vector<std::vector<std::size_t>>> parent_to_children_;

    void walk(std::size_t target_row, const Path& path,
              std::vector<std::size_t>& out) const;
};

// Multiset of row indices of `table` joined to the instance whose target-table
// primary key equals `instance_key`.  Convenience wrapper over JoinIndex.
std::vector<std::size_t> rows_for_instance(const RelationalDatabase& db,
                                           const std::string& table,
                                           const Value& instance_key, int max_order);

}  // namespace relprop
