#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "relprop/relstore.hpp"

using namespace relprop;

namespace {

// Check that `fn` throws a runtime_error whose message contains `needle`.
template <typename Fn>
void throws_containing(Fn&& fn, const std::string& needle) {
    bool threw = false;
    try {
        fn();
    } catch (const std::runtime_error& e) {
        threw = true;
        INFO("message: " << e.what());
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
    CHECK(threw);
}

const char* kTrainsSql = R"(
-- toy train set
CREATE TABLE trains (
  id INTEGER PRIMARY KEY,
  direction VARCHAR(8)
);
CREATE TABLE cars (
  car_id INTEGER PRIMARY KEY,
  train_id INTEGER,
  shape VARCHAR(16),
  roof VARCHAR(16),
  wheels INTEGER,
  FOREIGN KEY (train_id) REFERENCES trains(id)
);
INSERT INTO trains VALUES (1, 'east'), (2, 'west');
INSERT INTO cars VALUES (10, 1, 'rectangle', 'none', 2);
INSERT INTO cars VALUES (11, 1, 'rectangle', 'peaked', 3);
INSERT INTO cars VALUES (20, 2, 'hexagon', 'flat', 2);
)";

}  // namespace

TEST_SUITE("relstore") {

TEST_CASE("create table records names, types, and the primary key") {
    RelationalDatabase db = parse_sql_dump(kTrainsSql);
    REQUIRE(db.tables.size() == 2);
    const Table& trains = db.tables[0];
    CHECK(trains.name == "trains");
    REQUIRE(trains.columns.size() == 2);
    CHECK(trains.columns[0].name == "id");
    CHECK(trains.columns[0].type == ColumnType::Integer);
    CHECK(trains.columns[0].role == ColumnRole::PrimaryKey);
    CHECK(trains.columns[1].type == ColumnType::Text);
    CHECK(trains.pk_col == 0);

    const Table& cars = db.tables[1];
    CHECK(cars.pk_col == 0);
    CHECK(cars.columns[1].role == ColumnRole::ForeignKey);
    CHECK(cars.columns[1].fk_table == "trains");
}

TEST_CASE("insert stores typed values in declaration order") {
    RelationalDatabase db = parse_sql_dump(kTrainsSql);
    const Table& trains = db.tables[0];
    REQUIRE(trains.n_rows() == 2);
    CHECK(std::get<std::int64_t>(trains.rows[0][0]) == 1);
    CHECK(std::get<std::string>(trains.rows[0][1]) == "east");
    CHECK(std::get<std::string>(trains.rows[1][1]) == "west");
    CHECK(db.tables[1].n_rows() == 3);
}

TEST_CASE("insert with a column list reorders and fills gaps with null") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, b TEXT, c DOUBLE);\n"
        "INSERT INTO t (c, a) VALUES (2.5, 7);\n");
    const Table& t = db.tables[0];
    REQUIRE(t.n_rows() == 1);
    CHECK(std::get<std::int64_t>(t.rows[0][0]) == 7);
    CHECK(is_null(t.rows[0][1]));
    CHECK(std::get<double>(t.rows[0][2]) == 2.5);
}

TEST_CASE("numeric literals accept signs and exponents") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, x DOUBLE PRECISION, y REAL);\n"
        "INSERT INTO t VALUES (-3, -1.5e-2, 4);\n");
    const Table& t = db.tables[0];
    CHECK(std::get<std::int64_t>(t.rows[0][0]) == -3);
    CHECK(std::get<double>(t.rows[0][1]) == -1.5e-2);
    CHECK(std::get<double>(t.rows[0][2]) == 4.0);  // int literal widens to real
}

TEST_CASE("comments, quoted identifiers, and escaped quotes parse") {
    RelationalDatabase db = parse_sql_dump(
        "/* header\n comment */\n"
        "CREATE TABLE `weird` (\n"
        "  \"id\" INTEGER PRIMARY KEY, -- trailing comment\n"
        "  note TEXT\n"
        ");\n"
        "INSERT INTO weird VALUES (1, 'it''s fine');\n");
    REQUIRE(db.tables.size() == 1);
    CHECK(db.tables[0].name == "weird");
    CHECK(std::get<std::string>(db.tables[0].rows[0][1]) == "it's fine");
}

TEST_CASE("unknown statements are skipped") {
    RelationalDatabase db = parse_sql_dump(
        "SET NAMES utf8;\n"
        "BEGIN;\n"
        "CREATE TABLE t (a INTEGER PRIMARY KEY);\n"
        "DROP INDEX foo;\n"
        "INSERT INTO t VALUES (1);\n"
        "COMMIT;\n");
    REQUIRE(db.tables.size() == 1);
    CHECK(db.tables[0].n_rows() == 1);
}

TEST_CASE("table constraints other than keys are ignored") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (\n"
        "  a INTEGER,\n"
        "  b TEXT,\n"
        "  PRIMARY KEY (a),\n"
        "  UNIQUE (b),\n"
        "  KEY idx_b (b),\n"
        "  CHECK (a > 0)\n"
        ");\n");
    CHECK(db.tables[0].pk_col == 0);
    CHECK(db.tables[0].columns.size() == 2);
}

TEST_CASE("constraint-named foreign keys resolve") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE p (id INTEGER PRIMARY KEY);\n"
        "CREATE TABLE c (id INTEGER PRIMARY KEY, pref INTEGER,\n"
        "  CONSTRAINT fk_pref FOREIGN KEY (pref) REFERENCES p (id));\n");
    REQUIRE(db.fk_graph.size() == 1);
    CHECK(db.fk_graph[0].child_table == 1);
    CHECK(db.fk_graph[0].parent_table == 0);
    CHECK(db.tables[1].columns[1].role == ColumnRole::ForeignKey);
}

TEST_CASE("parse errors carry line numbers") {
    // Unsupported column type.
    throws_containing(
        [] { parse_sql_dump("CREATE TABLE t (\n a BLOB\n);\n"); }, "line 2");
    // Integer literal with a decimal point.
    throws_containing(
        [] {
            parse_sql_dump("CREATE TABLE t (a INTEGER PRIMARY KEY);\n"
                           "INSERT INTO t VALUES (1.5);\n");
        },
        "line 2");
    // Text column with a bare number.
    throws_containing(
        [] {
            parse_sql_dump("CREATE TABLE t (a TEXT);\nINSERT INTO t VALUES (3);\n");
        },
        "line 2");
}

TEST_CASE("arity errors name the table and tuple ordinal") {
    throws_containing(
        [] {
            parse_sql_dump("CREATE TABLE t (a INTEGER, b TEXT);\n"
                           "INSERT INTO t VALUES (1, 'x'), (2);\n");
        },
        "t");
    throws_containing(
        [] {
            parse_sql_dump("CREATE TABLE t (a INTEGER, b TEXT);\n"
                           "INSERT INTO t VALUES (1, 'x'), (2);\n");
        },
        "2");
}

TEST_CASE("null literals are accepted in any column") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, b TEXT, c REAL);\n"
        "INSERT INTO t VALUES (1, NULL, null);\n");
    CHECK(is_null(db.tables[0].rows[0][1]));
    CHECK(is_null(db.tables[0].rows[0][2]));
}

TEST_CASE("foreign keys are inferred from <table>_id naming") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE author (id INTEGER PRIMARY KEY, name TEXT);\n"
        "CREATE TABLE book (id INTEGER PRIMARY KEY, author_id INTEGER, title TEXT);\n");
    REQUIRE(db.fk_graph.size() == 1);
    CHECK(db.tables[1].columns[1].fk_table == "author");
}

TEST_CASE("foreign keys are inferred from matching primary-key names") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE molecule (molecule_key INTEGER PRIMARY KEY);\n"
        "CREATE TABLE atom (id INTEGER PRIMARY KEY, molecule_key INTEGER);\n");
    REQUIRE(db.fk_graph.size() == 1);
    CHECK(db.tables[1].columns[1].fk_table == "molecule");
}

TEST_CASE("fk inference skips real columns and can be disabled") {
    RelationalDatabase with = parse_sql_dump(
        "CREATE TABLE a (id INTEGER PRIMARY KEY);\n"
        "CREATE TABLE b (id INTEGER PRIMARY KEY, a_id REAL);\n");
    CHECK(with.fk_graph.empty());

    ParseOptions opts;
    opts.infer_fk_by_naming = false;
    RelationalDatabase off = parse_sql_dump(
        "CREATE TABLE a (id INTEGER PRIMARY KEY);\n"
        "CREATE TABLE b (id INTEGER PRIMARY KEY, a_id INTEGER);\n",
        opts);
    CHECK(off.fk_graph.empty());
}

TEST_CASE("validate drops dangling foreign keys to a fixpoint") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE a (id INTEGER PRIMARY KEY);\n"
        "CREATE TABLE b (id INTEGER PRIMARY KEY, a_id INTEGER);\n"
        "CREATE TABLE c (id INTEGER PRIMARY KEY, b_id INTEGER);\n"
        "INSERT INTO a VALUES (1);\n"
        "INSERT INTO b VALUES (10, 1), (11, 99);\n"  // 11 dangles
        "INSERT INTO c VALUES (100, 10), (101, 11);\n");  // 101 dangles after 11 goes
    ValidationReport report = validate(db);
    CHECK(db.tables[1].n_rows() == 1);
    CHECK(db.tables[2].n_rows() == 1);
    CHECK(report.rows_dropped == 2);
    bool saw_dangling = false;
    for (const ValidationIssue& i : report.issues)
        saw_dangling |= i.kind == ValidationIssue::DanglingFk;
    CHECK(saw_dangling);
}

TEST_CASE("validate drops null and duplicate primary keys") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, b TEXT);\n"
        "INSERT INTO t VALUES (1, 'x'), (NULL, 'y'), (1, 'z');\n");
    ValidationReport report = validate(db);
    CHECK(db.tables[0].n_rows() == 1);
    CHECK(std::get<std::string>(db.tables[0].rows[0][1]) == "x");
    CHECK(report.rows_dropped == 2);
}

TEST_CASE("validate reports empty tables") {
    RelationalDatabase db = parse_sql_dump("CREATE TABLE empty (a INTEGER PRIMARY KEY);\n");
    ValidationReport report = validate(db);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].kind == ValidationIssue::EmptyTable);
    CHECK(report.issues[0].table == "empty");
}

TEST_CASE("designate_target freezes sorted class labels") {
    RelationalDatabase db = parse_sql_dump(kTrainsSql);
    designate_target(db, "trains", "direction");
    REQUIRE(db.class_labels.size() == 2);
    CHECK(db.class_labels[0] == "east");
    CHECK(db.class_labels[1] == "west");
    REQUIRE(db.target.has_value());
    CHECK(db.target->table == "trains");
    int ti = db.target_table_index();
    int ci = db.target_col_index();
    CHECK(db.tables[ti].columns[ci].role == ColumnRole::TargetClass);
}

TEST_CASE("designate_target rejects bad targets") {
    RelationalDatabase db = parse_sql_dump(kTrainsSql);
    throws_containing([&] { designate_target(db, "nope", "direction"); }, "not found");
    throws_containing([&] { designate_target(db, "trains", "nope"); }, "not found");
    throws_containing([&] { designate_target(db, "trains", "id"); }, "key column");
    throws_containing([&] { designate_target(db, "cars", "train_id"); }, "key column");

    RelationalDatabase nulls = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, y TEXT);\n"
        "INSERT INTO t VALUES (1, 'x'), (2, NULL);\n");
    throws_containing([&] { designate_target(nulls, "t", "y"); }, "null");

    RelationalDatabase single = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, y TEXT);\n"
        "INSERT INTO t VALUES (1, 'x'), (2, 'x');\n");
    throws_containing([&] { designate_target(single, "t", "y"); }, "distinct");
}

TEST_CASE("designate_target on an empty table is vacuous") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, y TEXT);\n");
    designate_target(db, "t", "y");
    CHECK(db.class_labels.empty());
}

TEST_CASE("integer target values classify by text form") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, y INTEGER);\n"
        "INSERT INTO t VALUES (1, 10), (2, 2), (3, 10);\n");
    designate_target(db, "t", "y");
    REQUIRE(db.class_labels.size() == 2);
    // Sorted by text: "10" < "2".
    CHECK(db.class_labels[0] == "10");
    CHECK(db.class_labels[1] == "2");
}

TEST_CASE("fk_neighborhood is breadth-first with name tie-breaks") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE hub (id INTEGER PRIMARY KEY);\n"
        "CREATE TABLE zeta (id INTEGER PRIMARY KEY, hub_id INTEGER);\n"
        "CREATE TABLE alpha (id INTEGER PRIMARY KEY, hub_id INTEGER);\n"
        "CREATE TABLE far (id INTEGER PRIMARY KEY, alpha_id INTEGER);\n");
    std::vector<std::string> n1 = fk_neighborhood(db, "hub", 1);
    CHECK(n1 == std::vector<std::string>{"alpha", "zeta"});
    std::vector<std::string> n2 = fk_neighborhood(db, "hub", 2);
    CHECK(n2 == std::vector<std::string>{"alpha", "zeta", "far"});
    CHECK(fk_neighborhood(db, "hub", 0).empty());
}

TEST_CASE("rows_for_instance joins child rows through the index") {
    RelationalDatabase db = parse_sql_dump(kTrainsSql);
    designate_target(db, "trains", "direction");
    std::vector<std::size_t> rows = rows_for_instance(db, "cars", std::int64_t{1}, 2);
    std::sort(rows.begin(), rows.end());
    CHECK(rows == std::vector<std::size_t>{0, 1});
    rows = rows_for_instance(db, "cars", std::int64_t{2}, 2);
    CHECK(rows == std::vector<std::size_t>{2});
}

TEST_CASE("join multiplicity counts one hit per path and witness") {
    // Diamond: c reaches a directly and through b, so an instance joined to
    // the same c row over both paths sees it twice.
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE a (id INTEGER PRIMARY KEY, y TEXT);\n"
        "CREATE TABLE b (id INTEGER PRIMARY KEY, a_id INTEGER);\n"
        "CREATE TABLE c (id INTEGER PRIMARY KEY, a_id INTEGER, b_id INTEGER);\n"
        "INSERT INTO a VALUES (1, 'p'), (2, 'q');\n"
        "INSERT INTO b VALUES (5, 1);\n"
        "INSERT INTO c VALUES (9, 1, 5);\n");
    designate_target(db, "a", "y");
    std::vector<std::size_t> rows = rows_for_instance(db, "c", std::int64_t{1}, 3);
    CHECK(std::count(rows.begin(), rows.end(), 0u) == 2);
    // Instance 2 joins nothing.
    CHECK(rows_for_instance(db, "c", std::int64_t{2}, 3).empty());
}

TEST_CASE("max_order bounds the join depth") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE a (id INTEGER PRIMARY KEY, y TEXT);\n"
        "CREATE TABLE b (id INTEGER PRIMARY KEY, a_id INTEGER);\n"
        "CREATE TABLE c (id INTEGER PRIMARY KEY, b_id INTEGER);\n"
        "INSERT INTO a VALUES (1, 'p'), (2, 'q');\n"
        "INSERT INTO b VALUES (5, 1);\n"
        "INSERT INTO c VALUES (9, 5);\n");
    designate_target(db, "a", "y");
    CHECK(rows_for_instance(db, "c", std::int64_t{1}, 1).empty());
    CHECK(rows_for_instance(db, "c", std::int64_t{1}, 2).size() == 1);
}

TEST_CASE("serialize round-trips structure and values") {
    RelationalDatabase db = parse_sql_dump(kTrainsSql);
    std::string dump = serialize_sql_dump(db);
    RelationalDatabase back = parse_sql_dump(dump);

    REQUIRE(back.tables.size() == db.tables.size());
    for (std::size_t t = 0; t < db.tables.size(); ++t) {
        const Table& x = db.tables[t];
        const Table& y = back.tables[t];
        CHECK(x.name == y.name);
        CHECK(x.pk_col == y.pk_col);
        REQUIRE(x.columns.size() == y.columns.size());
        for (std::size_t c = 0; c < x.columns.size(); ++c) {
            CHECK(x.columns[c].name == y.columns[c].name);
            CHECK(x.columns[c].type == y.columns[c].type);
            CHECK(x.columns[c].fk_table == y.columns[c].fk_table);
        }
        REQUIRE(x.n_rows() == y.n_rows());
        for (std::size_t r = 0; r < x.n_rows(); ++r)
            for (std::size_t c = 0; c < x.columns.size(); ++c)
                CHECK(value_text(x.rows[r][c]) == value_text(y.rows[r][c]));
    }
    REQUIRE(back.fk_graph.size() == db.fk_graph.size());
    CHECK(back.fk_graph[0].child_table == db.fk_graph[0].child_table);
    CHECK(back.fk_graph[0].parent_table == db.fk_graph[0].parent_table);
}

TEST_CASE("serialize batches inserts and keeps doubles exact") {
    std::ostringstream sql;
    sql << "CREATE TABLE big (id INTEGER PRIMARY KEY, x DOUBLE);\n";
    for (int i = 0; i < 1200; ++i)
        sql << "INSERT INTO big VALUES (" << i << ", " << (0.1 + 0.2 * i) << ");\n";
    RelationalDatabase db = parse_sql_dump(sql.str());
    // Force the awkward value in exactly.
    db.tables[0].rows[0][1] = 0.1 + 0.2;

    std::string dump = serialize_sql_dump(db);
    std::size_t inserts = 0;
    for (std::size_t pos = 0; (pos = dump.find("INSERT INTO big", pos)) != std::string::npos;
         ++pos)
        ++inserts;
    CHECK(inserts == 3);  // 500 + 500 + 200

    RelationalDatabase back = parse_sql_dump(dump);
    CHECK(back.tables[0].n_rows() == 1200);
    CHECK(std::get<double>(back.tables[0].rows[0][1]) == 0.1 + 0.2);
}

TEST_CASE("serialize escapes embedded quotes") {
    RelationalDatabase db = parse_sql_dump(
        "CREATE TABLE t (a INTEGER PRIMARY KEY, s TEXT);\n"
        "INSERT INTO t VALUES (1, 'a''b');\n");
    RelationalDatabase back = parse_sql_dump(serialize_sql_dump(db));
    CHECK(std::get<std::string>(back.tables[0].rows[0][1]) == "a'b");
}

}  // TEST_SUITE
