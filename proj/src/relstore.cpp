#include "relprop/relstore.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace relprop {

namespace {

bool ci_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + msg);
}

struct Token {
    enum Kind { End, Ident, Number, String, Punct } kind = End;
    std::string text;
    int line = 1;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    const Token& peek() {
        if (!has_) {
            lex();
            has_ = true;
        }
        return tok_;
    }

    Token next() {
        peek();
        has_ = false;
        return std::move(tok_);
    }

  private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    bool has_ = false;
    Token tok_;

    bool at_end() const { return pos_ >= src_.size(); }
    char cur() const { return src_[pos_]; }
    char ahead(std::size_t k) const {
        return pos_ + k < src_.size() ? src_[pos_ + k] : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip_space_and_comments() {
        while (!at_end()) {
            char c = cur();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '-' && ahead(1) == '-') {
                while (!at_end() && cur() != '\n') advance();
            } else if (c == '/' && ahead(1) == '*') {
                advance();
                advance();
                while (!at_end() && !(cur() == '*' && ahead(1) == '/')) advance();
                if (at_end()) fail(line_, "unterminated block comment");
                advance();
                advance();
            } else {
                break;
            }
        }
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }

    void lex() {
        skip_space_and_comments();
        tok_.text.clear();
        tok_.line = line_;
        if (at_end()) {
            tok_.kind = Token::End;
            return;
        }
        char c = cur();
        if (ident_start(c)) {
            while (!at_end() && ident_char(cur())) {
                tok_.text.push_back(cur());
                advance();
            }
            tok_.kind = Token::Ident;
            return;
        }
        if (c == '`' || c == '"') {
            char quote = c;
            advance();
            while (!at_end() && cur() != quote) {
                tok_.text.push_back(cur());
                advance();
            }
            if (at_end()) fail(tok_.line, "unterminated quoted identifier");
            advance();
            tok_.kind = Token::Ident;
            return;
        }
        if (c == '\'') {
            advance();
            while (!at_end()) {
                if (cur() == '\'') {
                    if (ahead(1) == '\'') {  // '' escapes a quote
                        tok_.text.push_back('\'');
                        advance();
                        advance();
                        continue;
                    }
                    break;
                }
                tok_.text.push_back(cur());
                advance();
            }
            if (at_end()) fail(tok_.line, "unterminated string literal");
            advance();
            tok_.kind = Token::String;
            return;
        }
        bool signed_number = (c == '-' || c == '+') &&
                             (std::isdigit(static_cast<unsigned char>(ahead(1))) || ahead(1) == '.');
        if (std::isdigit(static_cast<unsigned char>(c)) || signed_number ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(ahead(1))))) {
            if (c == '-' || c == '+') {
                tok_.text.push_back(c);
                advance();
            }
            bool seen_exp = false;
            while (!at_end()) {
                char d = cur();
                if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
                    tok_.text.push_back(d);
                    advance();
                } else if ((d == 'e' || d == 'E') && !seen_exp) {
                    seen_exp = true;
                    tok_.text.push_back(d);
                    advance();
                    if (!at_end() && (cur() == '+' || cur() == '-')) {
                        tok_.text.push_back(cur());
                        advance();
                    }
                } else {
                    break;
                }
            }
            tok_.kind = Token::Number;
            return;
        }
        tok_.text.push_back(c);
        advance();
        tok_.kind = Token::Punct;
    }
};

bool is_kw(const Token& t, std::string_view kw) {
    return t.kind == Token::Ident && ci_equal(t.text, kw);
}

bool is_punct(const Token& t, char c) {
    return t.kind == Token::Punct && t.text.size() == 1 && t.text[0] == c;
}

struct PendingFk {
    std::string child_table, child_col, parent_table, parent_col;
    int line;
};

class Parser {
  public:
    Parser(std::string_view text, const ParseOptions& opts) : lx_(text), opts_(opts) {}

    RelationalDatabase run() {
        while (lx_.peek().kind != Token::End) {
            const Token& t = lx_.peek();
            if (is_punct(t, ';')) {
                lx_.next();
            } else if (is_kw(t, "CREATE")) {
                parse_create();
            } else if (is_kw(t, "INSERT")) {
                parse_insert();
            } else {
                skip_statement();  // SET, LOCK TABLES, ... are tolerated
            }
        }
        resolve_fks();
        if (opts_.infer_fk_by_naming) infer_fks();
        return std::move(db_);
    }

  private:
    Lexer lx_;
    ParseOptions opts_;
    RelationalDatabase db_;
    std::vector<PendingFk> pending_;

    void skip_statement() {
        while (lx_.peek().kind != Token::End && !is_punct(lx_.peek(), ';')) lx_.next();
        if (is_punct(lx_.peek(), ';')) lx_.next();
    }

    Token expect_ident(const char* what) {
        Token t = lx_.next();
        if (t.kind != Token::Ident) fail(t.line, std::string("expected ") + what);
        return t;
    }

    void expect_punct(char c) {
        Token t = lx_.next();
        if (!is_punct(t, c)) fail(t.line, std::string("expected '") + c + "'");
    }

    std::string table_name() {
        Token t = expect_ident("table name");
        // Allow schema-qualified names; keep the last component.
        while (is_punct(lx_.peek(), '.')) {
            lx_.next();
            t = expect_ident("table name");
        }
        return t.text;
    }

    static ColumnType map_type(const Token& t) {
        for (const char* k : {"INT", "INTEGER", "BIGINT", "SMALLINT"}) {
            if (ci_equal(t.text, k)) return ColumnType::Integer;
        }
        for (const char* k : {"FLOAT", "REAL", "DOUBLE"}) {
            if (ci_equal(t.text, k)) return ColumnType::Real;
        }
        for (const char* k : {"VARCHAR", "TEXT", "CHAR"}) {
            if (ci_equal(t.text, k)) return ColumnType::Text;
        }
        fail(t.line, "unsupported column type '" + t.text + "'");
    }

    void skip_parens() {  // consumes a balanced ( ... ) group
        expect_punct('(');
        int depth = 1;
        while (depth > 0) {
            Token t = lx_.next();
            if (t.kind == Token::End) fail(t.line, "unbalanced parentheses");
            if (is_punct(t, '(')) ++depth;
            if (is_punct(t, ')')) --depth;
        }
    }

    void parse_create() {
        Token kw = lx_.next();  // CREATE
        if (!is_kw(lx_.peek(), "TABLE")) {
            skip_statement();  // CREATE INDEX and friends
            return;
        }
        lx_.next();
        if (is_kw(lx_.peek(), "IF")) {  // IF NOT EXISTS
            lx_.next();
            lx_.next();
            lx_.next();
        }
        std::string name = table_name();
        if (db_.table_index(name) >= 0) fail(kw.line, "duplicate table '" + name + "'");
        Table table;
        table.name = name;
        std::string pk_name;
        expect_punct('(');
        while (true) {
            Token t = lx_.peek();
            if (t.kind == Token::End) fail(t.line, "unterminated CREATE TABLE");
            if (is_kw(t, "CONSTRAINT")) {  // CONSTRAINT <name> FOREIGN/PRIMARY ...
                lx_.next();
                expect_ident("constraint name");
                t = lx_.peek();
            }
            if (is_kw(t, "PRIMARY")) {
                lx_.next();
                if (!is_kw(lx_.peek(), "KEY")) fail(t.line, "expected KEY after PRIMARY");
                lx_.next();
                expect_punct('(');
                pk_name = expect_ident("column name").text;
                expect_punct(')');
            } else if (is_kw(t, "FOREIGN")) {
                lx_.next();
                if (!is_kw(lx_.peek(), "KEY")) fail(t.line, "expected KEY after FOREIGN");
                lx_.next();
                expect_punct('(');
                std::string col = expect_ident("column name").text;
                expect_punct(')');
                if (!is_kw(lx_.peek(), "REFERENCES"))
                    fail(lx_.peek().line, "expected REFERENCES");
                lx_.next();
                PendingFk fk{name, col, table_name(), "", t.line};
                if (is_punct(lx_.peek(), '(')) {
                    lx_.next();
                    fk.parent_col = expect_ident("column name").text;
                    expect_punct(')');
                }
                pending_.push_back(std::move(fk));
            } else if (is_kw(t, "UNIQUE") || is_kw(t, "KEY") || is_kw(t, "INDEX") ||
                       is_kw(t, "CHECK")) {
                // Skip secondary index / check definitions.
                lx_.next();
                while (!is_punct(lx_.peek(), '(') && lx_.peek().kind != Token::End) lx_.next();
                skip_parens();
            } else {
                parse_column_def(table, pk_name);
            }
            Token sep = lx_.next();
            if (is_punct(sep, ',')) continue;
            if (is_punct(sep, ')')) break;
            fail(sep.line, "expected ',' or ')' in CREATE TABLE");
        }
        // Tolerate trailing table options (ENGINE=..., etc.) up to ';'.
        skip_statement();
        if (!pk_name.empty()) {
            table.pk_col = table.column_index(pk_name);
            if (table.pk_col < 0)
                fail(kw.line, "PRIMARY KEY names unknown column '" + pk_name + "'");
            table.columns[table.pk_col].role = ColumnRole::PrimaryKey;
        }
        db_.tables.push_back(std::move(table));
    }

    void parse_column_def(Table& table, std::string& pk_name) {
        Token name = expect_ident("column name");
        if (table.column_index(name.text) >= 0)
            fail(name.line, "duplicate column '" + name.text + "' in table '" + table.name + "'");
        Token type_tok = expect_ident("column type");
        ColumnSpec col;
        col.name = name.text;
        col.type = map_type(type_tok);
        if (ci_equal(type_tok.text, "DOUBLE") && is_kw(lx_.peek(), "PRECISION")) lx_.next();
        if (is_punct(lx_.peek(), '(')) skip_parens();  // length/precision arguments
        // Remaining modifiers until the definition ends.
        while (!is_punct(lx_.peek(), ',') && !is_punct(lx_.peek(), ')')) {
            Token mod = lx_.next();
            if (mod.kind == Token::End) fail(mod.line, "unterminated column definition");
            if (is_kw(mod, "PRIMARY")) {
                if (!is_kw(lx_.peek(), "KEY")) fail(mod.line, "expected KEY after PRIMARY");
                lx_.next();
                pk_name = col.name;
            } else if (is_kw(mod, "REFERENCES")) {
                PendingFk fk{table.name, col.name, table_name(), "", mod.line};
                if (is_punct(lx_.peek(), '(')) {
                    lx_.next();
                    fk.parent_col = expect_ident("column name").text;
                    expect_punct(')');
                }
                pending_.push_back(std::move(fk));
            } else if (is_punct(mod, '(')) {
                // Argument list of an ignored modifier.
                int depth = 1;
                while (depth > 0) {
                    Token t = lx_.next();
                    if (t.kind == Token::End) fail(t.line, "unbalanced parentheses");
                    if (is_punct(t, '(')) ++depth;
                    if (is_punct(t, ')')) --depth;
                }
            }
            // NOT NULL, DEFAULT <literal>, AUTO_INCREMENT, ... are ignored.
        }
        table.columns.push_back(std::move(col));
    }

    Value parse_literal(const Table& table, std::size_t col_idx, const Token& t) {
        const ColumnSpec& col = table.columns[col_idx];
        if (is_kw(t, "NULL")) return Null{};
        switch (col.type) {
            case ColumnType::Integer: {
                if (t.kind != Token::Number || t.text.find_first_of(".eE") != std::string::npos)
                    fail(t.line, "expected integer literal for column '" + col.name + "'");
                return static_cast<std::int64_t>(std::strtoll(t.text.c_str(), nullptr, 10));
            }
            case ColumnType::Real: {
                if (t.kind != Token::Number)
                    fail(t.line, "expected numeric literal for column '" + col.name + "'");
                return std::strtod(t.text.c_str(), nullptr);
            }
            default: {
                if (t.kind != Token::String)
                    fail(t.line, "expected string literal for column '" + col.name + "'");
                return t.text;
            }
        }
    }

    void parse_insert() {
        Token kw = lx_.next();  // INSERT
        if (!is_kw(lx_.peek(), "INTO")) fail(kw.line, "expected INTO after INSERT");
        lx_.next();
        std::string name = table_name();
        int ti = db_.table_index(name);
        if (ti < 0) fail(kw.line, "INSERT into unknown table '" + name + "'");
        Table& table = db_.tables[ti];

        std::vector<std::size_t> col_map;  // tuple position -> column index
        if (is_punct(lx_.peek(), '(')) {
            lx_.next();
            while (true) {
                Token c = expect_ident("column name");
                int ci = table.column_index(c.text);
                if (ci < 0)
                    fail(c.line, "unknown column '" + c.text + "' in table '" + name + "'");
                col_map.push_back(static_cast<std::size_t>(ci));
                Token sep = lx_.next();
                if (is_punct(sep, ')')) break;
                if (!is_punct(sep, ',')) fail(sep.line, "expected ',' or ')' in column list");
            }
        } else {
            for (std::size_t i = 0; i < table.columns.size(); ++i) col_map.push_back(i);
        }
        if (!is_kw(lx_.peek(), "VALUES")) fail(lx_.peek().line, "expected VALUES");
        lx_.next();

        std::size_t tuple_no = 0;
        while (true) {
            ++tuple_no;
            expect_punct('(');
            std::vector<Value> row(table.columns.size(), Null{});
            std::size_t pos = 0;
            while (true) {
                Token lit = lx_.next();
                if (pos >= col_map.size())
                    fail(lit.line, "row " + std::to_string(tuple_no) + " for table '" + name +
                                       "' has more than " + std::to_string(col_map.size()) +
                                       " values");
                row[col_map[pos]] = parse_literal(table, col_map[pos], lit);
                ++pos;
                Token sep = lx_.next();
                if (is_punct(sep, ')')) break;
                if (!is_punct(sep, ',')) fail(sep.line, "expected ',' or ')' in row");
            }
            if (pos != col_map.size())
                fail(kw.line, "row " + std::to_string(tuple_no) + " for table '" + name +
                                  "' has " + std::to_string(pos) + " values, expected " +
                                  std::to_string(col_map.size()));
            table.rows.push_back(std::move(row));
            Token sep = lx_.next();
            if (is_punct(sep, ';')) break;
            if (!is_punct(sep, ',')) fail(sep.line, "expected ',' or ';' after row");
        }
    }

    void resolve_fks() {
        for (const PendingFk& fk : pending_) {
            int child = db_.table_index(fk.child_table);
            int parent = db_.table_index(fk.parent_table);
            if (parent < 0)
                fail(fk.line, "FOREIGN KEY references unknown table '" + fk.parent_table + "'");
            Table& ct = db_.tables[child];
            const Table& pt = db_.tables[parent];
            int ci = ct.column_index(fk.child_col);
            if (ci < 0)
                fail(fk.line, "FOREIGN KEY names unknown column '" + fk.child_col + "'");
            if (pt.pk_col < 0)
                fail(fk.line, "referenced table '" + pt.name + "' has no primary key");
            if (!fk.parent_col.empty() && !ci_equal(fk.parent_col, pt.columns[pt.pk_col].name))
                fail(fk.line, "FOREIGN KEY must reference the primary key of '" + pt.name + "'");
            add_edge(child, ci, parent);
        }
    }

    void add_edge(int child, int child_col, int parent) {
        for (const FkEdge& e : db_.fk_graph) {
            if (e.child_table == child && e.child_col == child_col) return;
        }
        db_.fk_graph.push_back({child, child_col, parent});
        ColumnSpec& col = db_.tables[child].columns[child_col];
        if (col.role == ColumnRole::Data) col.role = ColumnRole::ForeignKey;
        col.fk_table = db_.tables[parent].name;
    }

    bool has_edge(int child, int child_col) const {
        for (const FkEdge& e : db_.fk_graph) {
            if (e.child_table == child && e.child_col == child_col) return true;
        }
        return false;
    }

    void infer_fks() {
        for (std::size_t t = 0; t < db_.tables.size(); ++t) {
            Table& table = db_.tables[t];
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                if (static_cast<int>(c) == table.pk_col) continue;
                if (has_edge(static_cast<int>(t), static_cast<int>(c))) continue;
                if (table.columns[c].type == ColumnType::Real) continue;
                std::string name = lower(table.columns[c].name);
                int parent = -1;
                if (name.size() > 3 && name.ends_with("_id")) {
                    parent = db_.table_index(name.substr(0, name.size() - 3));
                }
                if (parent < 0) {
                    // A column named exactly like another table's primary key.
                    int match = -1;
                    bool ambiguous = false;
                    for (std::size_t u = 0; u < db_.tables.size(); ++u) {
                        const Table& other = db_.tables[u];
                        if (u == t || other.pk_col < 0) continue;
                        if (ci_equal(other.columns[other.pk_col].name, name)) {
                            if (match >= 0) ambiguous = true;
                            match = static_cast<int>(u);
                        }
                    }
                    if (!ambiguous) parent = match;
                }
                if (parent >= 0 && parent != static_cast<int>(t) &&
                    db_.tables[parent].pk_col >= 0) {
                    add_edge(static_cast<int>(t), static_cast<int>(c), parent);
                }
            }
        }
    }
};

}  // namespace

int Table::column_index(std::string_view col) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (ci_equal(columns[i].name, col)) return static_cast<int>(i);
    }
    return -1;
}

int RelationalDatabase::table_index(std::string_view name) const {
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (ci_equal(tables[i].name, name)) return static_cast<int>(i);
    }
    return -1;
}

const Table* RelationalDatabase::find_table(std::string_view name) const {
    int i = table_index(name);
    return i < 0 ? nullptr : &tables[i];
}

Table* RelationalDatabase::find_table(std::string_view name) {
    int i = table_index(name);
    return i < 0 ? nullptr : &tables[i];
}

int RelationalDatabase::target_table_index() const {
    if (!target) return -1;
    return table_index(target->table);
}

int RelationalDatabase::target_col_index() const {
    if (!target) return -1;
    const Table* t = find_table(target->table);
    return t ? t->column_index(target->attribute) : -1;
}

RelationalDatabase parse_sql_dump(std::string_view text, const ParseOptions& opts) {
    return Parser(text, opts).run();
}

RelationalDatabase parse_sql_file(const std::string& path, const ParseOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sql_dump(ss.str(), opts);
}

namespace {

std::string quote_sql(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

const char* type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Integer: return "INTEGER";
        case ColumnType::Real: return "DOUBLE";
        default: return "TEXT";
    }
}

std::string literal_text(const Value& v) {
    switch (v.index()) {
        case 0: return "NULL";
        case 1: return std::to_string(std::get<std::int64_t>(v));
        case 2: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(v));
            return buf;
        }
        default: return quote_sql(std::get<std::string>(v));
    }
}

}  // namespace

std::string serialize_sql_dump(const RelationalDatabase& db) {
    std::ostringstream out;
    for (const Table& t : db.tables) {
        int ti = db.table_index(t.name);
        std::vector<std::string> defs;
        for (const ColumnSpec& col : t.columns) {
            defs.push_back("  " + col.name + " " + type_name(col.type));
        }
        if (t.pk_col >= 0) {
            defs.push_back("  PRIMARY KEY (" + t.columns[t.pk_col].name + ")");
        }
        for (const FkEdge& e : db.fk_graph) {
            if (e.child_table != ti) continue;
            const Table& parent = db.tables[e.parent_table];
            defs.push_back("  FOREIGN KEY (" + t.columns[e.child_col].name + ") REFERENCES " +
                           parent.name + " (" + parent.columns[parent.pk_col].name + ")");
        }
        out << "CREATE TABLE " << t.name << " (\n";
        for (std::size_t i = 0; i < defs.size(); ++i) {
            out << defs[i] << (i + 1 < defs.size() ? ",\n" : "\n");
        }
        out << ");\n";
        const std::size_t batch = 500;
        for (std::size_t r = 0; r < t.rows.size(); r += batch) {
            out << "INSERT INTO " << t.name << " VALUES\n";
            std::size_t end = std::min(t.rows.size(), r + batch);
            for (std::size_t i = r; i < end; ++i) {
                out << "  (";
                for (std::size_t c = 0; c < t.columns.size(); ++c) {
                    if (c) out << ", ";
                    out << literal_text(t.rows[i][c]);
                }
                out << (i + 1 < end ? "),\n" : ");\n");
            }
        }
        out << "\n";
    }
    return out.str();
}

namespace {

void drop_marked(Table& t, const std::vector<char>& dead) {
    std::vector<std::vector<Value>> rows;
    rows.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (!dead[r]) rows.push_back(std::move(t.rows[r]));
    }
    t.rows = std::move(rows);
}

}  // namespace

ValidationReport validate(RelationalDatabase& db) {
    ValidationReport report;
    // Null or duplicate primary keys first: such rows cannot be joined to.
    for (Table& t : db.tables) {
        if (t.pk_col < 0) continue;
        std::vector<char> dead(t.rows.size(), 0);
        std::unordered_set<std::string> seen;
        seen.reserve(t.rows.size() * 2);
        bool any = false;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const Value& key = t.rows[r][t.pk_col];
            if (is_null(key)) {
                dead[r] = 1;
                any = true;
                report.issues.push_back(
                    {ValidationIssue::NullPrimaryKey, t.name, "null primary key"});
                continue;
            }
            if (!seen.insert(value_text(key)).second) {
                dead[r] = 1;
                any = true;
                report.issues.push_back({ValidationIssue::NullPrimaryKey, t.name,
                                         "duplicate primary key " + value_text(key)});
            }
        }
        if (any) {
            std::size_t before = t.rows.size();
            drop_marked(t, dead);
            report.rows_dropped += before - t.rows.size();
        }
    }
    // Dangling foreign keys, repeated until a fixpoint since dropping a row
    // can orphan children elsewhere.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const FkEdge& e : db.fk_graph) {
            Table& child = db.tables[e.child_table];
            const Table& parent = db.tables[e.parent_table];
            std::unordered_set<std::string> keys;
            keys.reserve(parent.rows.size() * 2);
            for (const auto& row : parent.rows) keys.insert(value_text(row[parent.pk_col]));
            std::vector<char> dead(child.rows.size(), 0);
            std::size_t dropped = 0;
            for (std::size_t r = 0; r < child.rows.size(); ++r) {
                const Value& fk = child.rows[r][e.child_col];
                if (is_null(fk)) continue;
                if (!keys.count(value_text(fk))) {
                    dead[r] = 1;
                    ++dropped;
                }
            }
            if (dropped) {
                report.issues.push_back(
                    {ValidationIssue::DanglingFk, child.name,
                     std::to_string(dropped) + " row(s) with dangling " +
                         child.columns[e.child_col].name + " -> " + parent.name});
                std::size_t before = child.rows.size();
                drop_marked(child, dead);
                report.rows_dropped += before - child.rows.size();
                changed = true;
            }
        }
    }
    for (const Table& t : db.tables) {
        if (t.rows.empty()) {
            report.issues.push_back({ValidationIssue::EmptyTable, t.name, "table has no rows"});
        }
    }
    return report;
}

void designate_target(RelationalDatabase& db, const std::string& table,
                      const std::string& attribute) {
    Table* t = db.find_table(table);
    if (!t) throw std::runtime_error("target table '" + table + "' not found");
    int ci = t->column_index(attribute);
    if (ci < 0)
        throw std::runtime_error("target attribute '" + attribute + "' not found in table '" +
                                 table + "'");
    ColumnRole role = t->columns[ci].role;
    if (role == ColumnRole::PrimaryKey || role == ColumnRole::ForeignKey)
        throw std::runtime_error("target attribute '" + attribute + "' is a key column");
    std::set<std::string> labels;
    for (const auto& row : t->rows) {
        if (is_null(row[ci]))
            throw std::runtime_error("target attribute '" + attribute + "' has null values");
        labels.insert(value_text(row[ci]));
    }
    if (!t->rows.empty() && labels.size() < 2)
        throw std::runtime_error("target attribute '" + attribute +
                                 "' has fewer than two distinct values");
    for (Table& tab : db.tables) {
        for (ColumnSpec& col : tab.columns) {
            if (col.role == ColumnRole::TargetClass) col.role = ColumnRole::Data;
        }
    }
    t->columns[ci].role = ColumnRole::TargetClass;
    db.target = TargetSpec{t->name, t->columns[ci].name};
    db.class_labels.assign(labels.begin(), labels.end());
}

std::vector<std::string> fk_neighborhood(const RelationalDatabase& db, const std::string& table,
                                         int max_order) {
    int start = db.table_index(table);
    if (start < 0) throw std::runtime_error("table '" + table + "' not found");
    std::vector<int> dist(db.tables.size(), -1);
    dist[start] = 0;
    std::deque<int> frontier{start};
    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        if (dist[cur] >= max_order) continue;
        for (const FkEdge& e : db.fk_graph) {
            for (int to : {e.child_table == cur ? e.parent_table : -1,
                           e.parent_table == cur ? e.child_table : -1}) {
                if (to >= 0 && dist[to] < 0) {
                    dist[to] = dist[cur] + 1;
                    frontier.push_back(to);
                }
            }
        }
    }
    std::vector<int> reached;
    for (std::size_t i = 0; i < db.tables.size(); ++i) {
        if (static_cast<int>(i) != start && dist[i] > 0) reached.push_back(static_cast<int>(i));
    }
    std::sort(reached.begin(), reached.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return db.tables[a].name < db.tables[b].name;
    });
    std::vector<std::string> names;
    names.reserve(reached.size());
    for (int i : reached) names.push_back(db.tables[i].name);
    return names;
}

JoinIndex::JoinIndex(const RelationalDatabase& db, int max_order) : db_(&db) {
    if (!db.target) throw std::runtime_error("no target designated");
    target_table_ = db.target_table_index();
    const std::size_t npos = static_cast<std::size_t>(-1);

    child_to_parent_.resize(db.fk_graph.size());
    parent_to_children_.resize(db.fk_graph.size());
    for (std::size_t e = 0; e < db.fk_graph.size(); ++e) {
        const FkEdge& edge = db.fk_graph[e];
        const Table& child = db.tables[edge.child_table];
        const Table& parent = db.tables[edge.parent_table];
        std::unordered_map<std::string, std::size_t> pk_row;
        pk_row.reserve(parent.rows.size() * 2);
        for (std::size_t r = 0; r < parent.rows.size(); ++r) {
            pk_row.emplace(value_text(parent.rows[r][parent.pk_col]), r);
        }
        child_to_parent_[e].assign(child.rows.size(), npos);
        parent_to_children_[e].resize(parent.rows.size());
        for (std::size_t r = 0; r < child.rows.size(); ++r) {
            const Value& fk = child.rows[r][edge.child_col];
            if (is_null(fk)) continue;
            auto it = pk_row.find(value_text(fk));
            if (it == pk_row.end()) continue;  // dangling rows survive only unvalidated
            child_to_parent_[e][r] = it->second;
            parent_to_children_[e][it->second].push_back(r);
        }
    }

    // Enumerate simple paths (no table revisited) of up to max_order hops.
    // Edges are tried in fk_graph order, child->parent before parent->child,
    // so enumeration order is deterministic.
    paths_by_table_.resize(db.tables.size());
    std::vector<char> visited(db.tables.size(), 0);
    visited[target_table_] = 1;
    Path path;
    auto dfs = [&](auto&& self, int cur, int depth) -> void {
        if (depth == max_order) return;
        for (std::size_t e = 0; e < db.fk_graph.size(); ++e) {
            const FkEdge& edge = db.fk_graph[e];
            if (edge.child_table == cur && !visited[edge.parent_table]) {
                visited[edge.parent_table] = 1;
                path.steps.push_back({static_cast<int>(e), true, edge.parent_table});
                paths_by_table_[edge.parent_table].push_back(path);
                self(self, edge.parent_table, depth + 1);
                path.steps.pop_back();
                visited[edge.parent_table] = 0;
            }
            if (edge.parent_table == cur && !visited[edge.child_table]) {
                visited[edge.child_table] = 1;
                path.steps.push_back({static_cast<int>(e), false, edge.child_table});
                paths_by_table_[edge.child_table].push_back(path);
                self(self, edge.child_table, depth + 1);
                path.steps.pop_back();
                visited[edge.child_table] = 0;
            }
        }
    };
    dfs(dfs, target_table_, 0);

    for (const std::string& name :
         fk_neighborhood(db, db.tables[target_table_].name, max_order)) {
        neighborhood_.push_back(db.table_index(name));
    }
}

void JoinIndex::rows_for(std::size_t target_row, int table_idx,
                         std::vector<std::size_t>& out) const {
    for (const Path& p : paths_by_table_[table_idx]) walk(target_row, p, out);
}

void JoinIndex::walk(std::size_t target_row, const Path& path,
                     std::vector<std::size_t>& out) const {
    const std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> frontier{target_row};
    std::vector<std::size_t> next;
    for (const Step& s : path.steps) {
        next.clear();
        if (s.forward) {
            for (std::size_t r : frontier) {
                std::size_t p = child_to_parent_[s.edge][r];
                if (p != npos) next.push_back(p);
            }
        } else {
            for (std::size_t r : frontier) {
                const auto& kids = parent_to_children_[s.edge][r];
                next.insert(next.end(), kids.begin(), kids.end());
            }
        }
        frontier.swap(next);
        if (frontier.empty()) return;
    }
    out.insert(out.end(), frontier.begin(), frontier.end());
}

std::vector<std::size_t> rows_for_instance(const RelationalDatabase& db, const std::string& table,
                                           const Value& instance_key, int max_order) {
    if (!db.target) throw std::runtime_error("no target designated");
    int ti = db.table_index(table);
    if (ti < 0) throw std::runtime_error("table '" + table + "' not found");
    int tt = db.target_table_index();
    const Table& target = db.tables[tt];
    if (target.pk_col < 0) throw std::runtime_error("target table has no primary key");
    std::string key = value_text(instance_key);
    std::size_t row = static_cast<std::size_t>(-1);
    for (std::size_t r = 0; r < target.rows.size(); ++r) {
        if (value_text(target.rows[r][target.pk_col]) == key) {
            row = r;
            break;
        }
    }
    if (row == static_cast<std::size_t>(-1))
        throw std::runtime_error("no instance with key '" + key + "'");
    std::vector<std::size_t> out;
    if (ti == tt) {
        out.push_back(row);
        return out;
    }
    JoinIndex join(db, max_order);
    join.rows_for(row, ti, out);
    return out;
}

}  // namespace relprop
