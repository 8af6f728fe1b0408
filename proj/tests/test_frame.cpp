#include <doctest.h>

#include "provpipe/errors.hpp"
#include "provpipe/frame.hpp"
#include "support/generators.hpp"

using namespace provpipe;

namespace {

Value T(const char* s) { return Value::text(s); }
Value I(std::int64_t v) { return Value::integer(v); }

ProvDataFrame customers3(SourceRegistry& reg) {
    return reg.register_source("c",
                               {{"email", ValueKind::Text}, {"country", ValueKind::Text}},
                               {{T("a@x"), T("DE")}, {T("b@x"), T("FR")}, {T("c@x"), T("DE")}});
}

}  // namespace

TEST_CASE("register_source annotates rows with identity provenance") {
    SourceRegistry reg;
    ProvDataFrame frame = customers3(reg);
    CHECK(frame.n_rows() == 3);
    CHECK(frame.provenance(2).to_string() == "c#2");
    CHECK(frame.column_provenance().at("email") ==
          std::set<ColumnOrigin>{{"c", "email"}});
    CHECK(frame.column_provenance().at("country") ==
          std::set<ColumnOrigin>{{"c", "country"}});

    SUBCASE("zero rows is a valid empty frame") {
        ProvDataFrame empty = reg.register_source("e", {{"x", ValueKind::Int}}, {});
        CHECK(empty.n_rows() == 0);
    }
    SUBCASE("duplicate source name is rejected") {
        CHECK_THROWS_WITH_AS(customers3(reg), doctest::Contains("duplicate source"),
                             ValidationError);
    }
    SUBCASE("schema violations are rejected") {
        CHECK_THROWS_AS(reg.register_source("bad", {{"x", ValueKind::Int}}, {{T("oops")}}),
                        ValidationError);
        CHECK_THROWS_AS(reg.register_source("bad2", {{"x", ValueKind::Int}}, {{I(1), I(2)}}),
                        ValidationError);
    }
    SUBCASE("non-finite floats cannot enter a frame") {
        CHECK_THROWS_AS(Value::real(std::numeric_limits<double>::infinity()), ValidationError);
        CHECK_THROWS_AS(Value::real(std::nan("")), ValidationError);
    }
}

TEST_CASE("filter keeps matching rows with their polynomials") {
    SourceRegistry reg;
    ProvDataFrame frame = customers3(reg);
    std::vector<std::string> cols{"country"};
    ProvDataFrame de = filter(frame, cols,
                              [](std::span<const Value> v) { return v[0].as_text() == "DE"; });
    REQUIRE(de.n_rows() == 2);
    CHECK(de.provenance(0).to_string() == "c#0");
    CHECK(de.provenance(1).to_string() == "c#2");
    CHECK(de.column_provenance() == frame.column_provenance());

    SUBCASE("always-false keeps the schema") {
        ProvDataFrame none =
            filter(frame, cols, [](std::span<const Value>) { return false; });
        CHECK(none.n_rows() == 0);
        CHECK(none.schema() == frame.schema());
    }
    SUBCASE("unknown predicate column") {
        std::vector<std::string> bad{"nope"};
        CHECK_THROWS_AS(filter(frame, bad, [](std::span<const Value>) { return true; }),
                        ValidationError);
    }
    SUBCASE("Null never matches") {
        SourceRegistry reg2;
        ProvDataFrame withnull = reg2.register_source(
            "n", {{"v", ValueKind::Text}}, {{T("x")}, {Value::null()}, {T("x")}});
        std::vector<std::string> vcol{"v"};
        ProvDataFrame kept =
            filter(withnull, vcol, [](std::span<const Value>) { return true; });
        CHECK(kept.n_rows() == 2);  // the Null row is dropped before the predicate
    }
}

TEST_CASE("project_derive unions source-column lineage") {
    SourceRegistry reg;
    ProvDataFrame frame = reg.register_source(
        "mails", {{"email", ValueKind::Text}, {"mail_subject", ValueKind::Text}},
        {{T("a@x"), T("Hello THERE")}});

    std::vector<std::string> src{"mail_subject"};
    ProvDataFrame derived = project_derive(frame, "title", ValueKind::Text, src,
                                           [](std::span<const Value> v) {
                                               std::string s = v[0].as_text();
                                               for (char& c : s) c = static_cast<char>(
                                                   c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
                                               return Value::text(s);
                                           });
    CHECK(derived.row(0)[2].as_text() == "hello there");
    CHECK(derived.column_provenance().at("title") ==
          derived.column_provenance().at("mail_subject"));
    CHECK(derived.provenance(0) == frame.provenance(0));

    SUBCASE("constant columns get empty lineage") {
        ProvDataFrame with_const =
            project_derive(frame, "one", ValueKind::Int, {},
                           [](std::span<const Value>) { return Value::integer(1); });
        CHECK(with_const.column_provenance().at("one").empty());
    }
    SUBCASE("two-source derivation unions both origins") {
        SourceRegistry reg2;
        ProvDataFrame a = reg2.register_source(
            "a", {{"k", ValueKind::Text}, {"x", ValueKind::Int}}, {{T("1"), I(10)}});
        ProvDataFrame b = reg2.register_source(
            "b", {{"k2", ValueKind::Text}, {"y", ValueKind::Int}}, {{T("1"), I(20)}});
        ProvDataFrame joined = join(a, b, "k", "k2");
        std::vector<std::string> xy{"x", "y"};
        ProvDataFrame z = project_derive(joined, "z", ValueKind::Int, xy,
                                         [](std::span<const Value> v) {
                                             return Value::integer(v[0].as_int() +
                                                                   v[1].as_int());
                                         });
        CHECK(z.column_provenance().at("z") ==
              std::set<ColumnOrigin>{{"a", "x"}, {"b", "y"}});
    }
    SUBCASE("wrong result kind is rejected") {
        CHECK_THROWS_AS(project_derive(frame, "bad", ValueKind::Int, src,
                                       [](std::span<const Value>) { return T("nope"); }),
                        ValidationError);
    }
    SUBCASE("overwriting an existing column keeps its position") {
        ProvDataFrame overwritten =
            project_derive(frame, "mail_subject", ValueKind::Int, {},
                           [](std::span<const Value>) { return Value::integer(7); });
        CHECK(overwritten.schema()[1].name == "mail_subject");
        CHECK(overwritten.schema()[1].kind == ValueKind::Int);
        CHECK(overwritten.column_provenance().at("mail_subject").empty());
    }
}

TEST_CASE("keep_columns restricts and reorders") {
    SourceRegistry reg;
    ProvDataFrame frame = customers3(reg);
    std::vector<std::string> cols{"country", "email"};
    ProvDataFrame kept = keep_columns(frame, cols);
    CHECK(kept.schema()[0].name == "country");
    CHECK(kept.schema()[1].name == "email");
    CHECK(kept.n_rows() == 3);
    CHECK(kept.provenance(1) == frame.provenance(1));

    std::vector<std::string> same{"email", "country"};
    CHECK(keep_columns(frame, same) == frame);

    std::vector<std::string> bad{"nope"};
    CHECK_THROWS_AS(keep_columns(frame, bad), ValidationError);
}

TEST_CASE("rename keeps lineage values pointing at base columns") {
    SourceRegistry reg;
    ProvDataFrame frame = customers3(reg);
    ProvDataFrame renamed = rename_column(frame, "email", "address");
    CHECK(renamed.column_provenance().at("address") ==
          std::set<ColumnOrigin>{{"c", "email"}});
    CHECK_THROWS_AS(rename_column(frame, "email", "country"), ValidationError);
    CHECK(rename_column(renamed, "address", "email") == frame);
}

TEST_CASE("join multiplies polynomials and drops the right key") {
    SourceRegistry reg;
    std::vector<Row> left_rows;
    for (int i = 0; i < 4; ++i) {
        left_rows.push_back({T(i == 3 ? "x" : "l"), I(i)});
    }
    std::vector<Row> right_rows;
    for (int i = 0; i < 8; ++i) {
        right_rows.push_back({T(i == 7 ? "x" : "r"), I(100 + i)});
    }
    ProvDataFrame c =
        reg.register_source("c", {{"k", ValueKind::Text}, {"cv", ValueKind::Int}}, left_rows);
    ProvDataFrame m =
        reg.register_source("m", {{"k2", ValueKind::Text}, {"mv", ValueKind::Int}}, right_rows);

    ProvDataFrame joined = join(c, m, "k", "k2");
    // "l" and "r" never meet; only c#3 x m#7 matches on "x".
    auto matches = [&] {
        std::size_t count = 0;
        for (std::size_t i = 0; i < joined.n_rows(); ++i) {
            if (joined.provenance(i).to_string() == "c#3*m#7") ++count;
        }
        return count;
    }();
    CHECK(matches == 1);
    CHECK(joined.schema().size() == 3);  // k, cv, mv
    CHECK_FALSE(joined.has_column("k2"));

    SUBCASE("no matching keys yields an empty frame") {
        SourceRegistry reg2;
        ProvDataFrame a =
            reg2.register_source("a", {{"k", ValueKind::Text}}, {{T("p")}});
        ProvDataFrame b =
            reg2.register_source("b", {{"k2", ValueKind::Text}}, {{T("q")}});
        CHECK(join(a, b, "k", "k2").n_rows() == 0);
    }
    SUBCASE("self-join repeats the factor") {
        SourceRegistry reg2;
        ProvDataFrame s = reg2.register_source(
            "s", {{"k", ValueKind::Text}, {"v", ValueKind::Int}}, {{T("a"), I(0)}, {T("b"), I(1)}});
        ProvDataFrame mirrored = rename_column(rename_column(s, "k", "k_m"), "v", "v_m");
        ProvDataFrame self = join(s, mirrored, "k", "k_m");
        REQUIRE(self.n_rows() == 2);
        CHECK(self.provenance(1).to_string() == "s#1*s#1");
    }
    SUBCASE("Null keys join to nothing") {
        SourceRegistry reg2;
        ProvDataFrame a =
            reg2.register_source("a", {{"k", ValueKind::Text}}, {{Value::null()}});
        ProvDataFrame b =
            reg2.register_source("b", {{"k2", ValueKind::Text}}, {{Value::null()}});
        CHECK(join(a, b, "k", "k2").n_rows() == 0);
    }
    SUBCASE("key kind mismatch and duplicate columns are rejected") {
        SourceRegistry reg2;
        ProvDataFrame a = reg2.register_source(
            "a", {{"k", ValueKind::Text}, {"v", ValueKind::Int}}, {});
        ProvDataFrame b = reg2.register_source(
            "b", {{"k2", ValueKind::Int}, {"w", ValueKind::Int}}, {});
        CHECK_THROWS_AS(join(a, b, "k", "k2"), ValidationError);
        ProvDataFrame c2 = reg2.register_source(
            "c2", {{"k3", ValueKind::Text}, {"v", ValueKind::Int}}, {});
        CHECK_THROWS_AS(join(a, c2, "k", "k3"), ValidationError);
    }
}

TEST_CASE("join row count and factor counts match a nested-loop oracle") {
    testing::Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        SourceRegistry reg;
        auto random_rows = [&](std::size_t n) {
            std::vector<Row> rows;
            for (std::size_t i = 0; i < n; ++i) {
                Row row;
                row.push_back(rng() % 10 == 0
                                  ? Value::null()
                                  : Value::text(std::string(1, 'a' + char(rng() % 4))));
                row.push_back(I(static_cast<std::int64_t>(i)));
                rows.push_back(row);
            }
            return rows;
        };
        std::size_t nl = rng() % 8, nr = rng() % 8;
        std::vector<Row> lrows = random_rows(nl), rrows = random_rows(nr);
        ProvDataFrame l =
            reg.register_source("l", {{"k", ValueKind::Text}, {"lv", ValueKind::Int}}, lrows);
        ProvDataFrame r =
            reg.register_source("r", {{"k2", ValueKind::Text}, {"rv", ValueKind::Int}}, rrows);
        ProvDataFrame joined = join(l, r, "k", "k2");

        std::size_t expected = 0;
        for (const Row& lr : lrows) {
            for (const Row& rr : rrows) {
                if (!lr[0].is_null() && !rr[0].is_null() && lr[0] == rr[0]) ++expected;
            }
        }
        CHECK(joined.n_rows() == expected);
        for (std::size_t i = 0; i < joined.n_rows(); ++i) {
            REQUIRE(joined.provenance(i).monomials().size() == 1);
            CHECK(joined.provenance(i).monomials()[0].factors().size() == 2);
        }

        // Nested join: factor counts add up per contributing pair.
        ProvDataFrame t = reg.register_source(
            "t", {{"k3", ValueKind::Text}, {"tv", ValueKind::Int}},
            {{Value::text("a"), I(0)}, {Value::text("b"), I(1)}});
        ProvDataFrame nested = join(joined, t, "k", "k3");
        for (std::size_t i = 0; i < nested.n_rows(); ++i) {
            REQUIRE(nested.provenance(i).monomials().size() == 1);
            CHECK(nested.provenance(i).monomials()[0].factors().size() == 3);
        }
    }
}

TEST_CASE("union_all concatenates rows and lineage") {
    SourceRegistry reg;
    ProvDataFrame a = reg.register_source("a", {{"v", ValueKind::Int}}, {{I(1)}, {I(2)}});
    ProvDataFrame b =
        reg.register_source("b", {{"v", ValueKind::Int}}, {{I(3)}, {I(4)}, {I(5)}});
    ProvDataFrame u = union_all(a, b);
    CHECK(u.n_rows() == 5);
    CHECK(u.provenance(0).to_string() == "a#0");
    CHECK(u.provenance(4).to_string() == "b#2");
    CHECK(u.column_provenance().at("v") ==
          std::set<ColumnOrigin>{{"a", "v"}, {"b", "v"}});

    // Union with an empty selection of itself is the identity.
    ProvDataFrame none =
        filter(a, std::vector<std::string>{}, [](std::span<const Value>) { return false; });
    CHECK(union_all(a, none) == a);

    ProvDataFrame wrong = reg.register_source("w", {{"v", ValueKind::Float}}, {});
    CHECK_THROWS_AS(union_all(a, wrong), ValidationError);
}

TEST_CASE("explode duplicates rows with verbatim polynomials") {
    SourceRegistry reg;
    ProvDataFrame frame = reg.register_source(
        "m", {{"tags", ValueKind::TextList}, {"v", ValueKind::Int}},
        {{Value::text_list({"a", "b"}), I(0)},
         {Value::text_list({}), I(1)},
         {Value::text_list({"c"}), I(2)}});
    ProvDataFrame exploded = explode(frame, "tags");
    REQUIRE(exploded.n_rows() == 3);
    CHECK(exploded.schema()[0].kind == ValueKind::Text);
    CHECK(exploded.row(0)[0].as_text() == "a");
    CHECK(exploded.row(1)[0].as_text() == "b");
    CHECK(exploded.provenance(0).to_string() == "m#0");
    CHECK(exploded.provenance(1).to_string() == "m#0");
    CHECK(exploded.provenance(2).to_string() == "m#2");

    CHECK_THROWS_AS(explode(frame, "v"), ValidationError);
}

TEST_CASE("rows_touching matches monomial membership") {
    SourceRegistry reg;
    ProvDataFrame c = reg.register_source("c", {{"k", ValueKind::Text}},
                                          {{T("p")}, {T("q")}, {T("q")}, {T("q")}});
    ProvDataFrame m = reg.register_source(
        "m", {{"k2", ValueKind::Text}, {"i", ValueKind::Int}},
        {{T("p"), I(0)}, {T("q"), I(7)}, {T("q"), I(9)}});
    ProvDataFrame joined = join(c, m, "k", "k2");
    // Rows: c#0*m#0, c#1*m#1, c#1*m#2, c#2*m#1, c#2*m#2, c#3*m#1, c#3*m#2

    std::vector<BaseTupleId> ids{{"c", 2}};
    CHECK(rows_touching(joined, ids) == std::vector<std::size_t>{3, 4});

    std::vector<BaseTupleId> none;
    CHECK(rows_touching(joined, none).empty());

    std::vector<BaseTupleId> foreign{{"zz", 0}};
    CHECK(rows_touching(joined, foreign).empty());
}

TEST_CASE("columns_derived_from honors union semantics") {
    SourceRegistry reg;
    ProvDataFrame a = reg.register_source(
        "a", {{"k", ValueKind::Text}, {"x", ValueKind::Int}}, {{T("1"), I(1)}});
    ProvDataFrame b = reg.register_source(
        "b", {{"k2", ValueKind::Text}, {"y", ValueKind::Int}}, {{T("1"), I(2)}});
    ProvDataFrame joined = join(a, b, "k", "k2");
    std::vector<std::string> xy{"x", "y"};
    ProvDataFrame z = project_derive(joined, "z", ValueKind::Int, xy,
                                     [](std::span<const Value> v) {
                                         return Value::integer(v[0].as_int() + v[1].as_int());
                                     });
    CHECK(columns_derived_from(z, "a", "x") == std::set<std::string>{"x", "z"});
    CHECK(columns_derived_from(z, "b", "y") == std::set<std::string>{"y", "z"});
    CHECK(columns_derived_from(z, "a", "nope").empty());
}

TEST_CASE("row-preserving operations never touch polynomials") {
    testing::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        testing::FuzzCase fuzz = testing::make_fuzz_case(1000 + trial);
        ProvDataFrame frame = run_steps(fuzz.sources, fuzz.steps, fuzz.tables);
        if (frame.n_rows() == 0) continue;

        ProvDataFrame renamed = rename_column(frame, frame.schema()[0].name, "zz_renamed");
        REQUIRE(renamed.n_rows() == frame.n_rows());
        ProvDataFrame constant =
            project_derive(renamed, "zz_const", ValueKind::Int, {},
                           [](std::span<const Value>) { return Value::integer(0); });
        REQUIRE(constant.n_rows() == frame.n_rows());
        std::vector<std::string> first{constant.schema()[0].name};
        ProvDataFrame kept = keep_columns(constant, first);
        REQUIRE(kept.n_rows() == frame.n_rows());
        for (std::size_t i = 0; i < frame.n_rows(); ++i) {
            CHECK(kept.provenance(i) == frame.provenance(i));
        }
    }
}

TEST_CASE("operational provenance matches tuple-removal re-execution") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        testing::FuzzCase fuzz = testing::make_fuzz_case(seed);
        std::string verdict = testing::check_provenance_against_removal(fuzz);
        CHECK_MESSAGE(verdict.empty(), "seed ", seed, ": ", verdict);
    }
}

TEST_CASE("cell nulling shares untouched chunks and stays local") {
    SourceRegistry reg;
    std::vector<Row> rows;
    for (int i = 0; i < 200; ++i) {
        rows.push_back({T("t"), I(i)});
    }
    ProvDataFrame frame =
        reg.register_source("s", {{"a", ValueKind::Text}, {"b", ValueKind::Int}}, rows);
    std::vector<std::size_t> null_rows{3, 130};
    std::vector<std::size_t> null_cols{1};
    ProvDataFrame nulled = frame.with_cells_nulled(null_rows, null_cols);
    CHECK(nulled.row(3)[1].is_null());
    CHECK(nulled.row(130)[1].is_null());
    CHECK_FALSE(nulled.row(3)[0].is_null());
    for (std::size_t i = 0; i < frame.n_rows(); ++i) {
        if (i == 3 || i == 130) continue;
        CHECK(nulled.row(i) == frame.row(i));
    }
    // The original frame is untouched.
    CHECK_FALSE(frame.row(3)[1].is_null());

    std::vector<std::size_t> removed{0, 64, 199};
    ProvDataFrame fewer = frame.with_rows_removed(removed);
    CHECK(fewer.n_rows() == 197);
    CHECK(fewer.row(0)[1].as_int() == 1);
    CHECK(fewer.provenance(0).to_string() == "s#1");
}
