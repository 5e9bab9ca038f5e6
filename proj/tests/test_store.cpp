#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <vector>

#include "fixtures.hpp"
#include "xlq/error.hpp"
#include "xlq/store.hpp"

using namespace xlq;

namespace {

Program books_program() {
    return translate(number_tree(parse_xml(fixtures::kBooks)));
}

std::string anns(const FactStore& s, const std::string& pred) {
    std::string out;
    auto it = s.index1().find(pred);
    if (it == s.index1().end()) return out;
    for (auto& a : it->second) {
        if (!out.empty()) out += " ";
        out += "(" + std::to_string(a.pos) + "," + std::to_string(a.group) + ")";
    }
    return out;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("xlq_store_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

TermPtr node_pattern(const std::string& text, VarPool& pool) {
    TermParser p(text, pool);
    return p.parse_term();
}

} // namespace

TEST_CASE("first index annotations match the expected table") {
    Program p = books_program();
    auto store = memory_store(p);
    CHECK(anns(*store, "author") == "(1,0) (2,0) (3,0) (9,8)");
    CHECK(anns(*store, "year") == "(0,0) (8,8)");
    CHECK(anns(*store, "em") == "(6,5) (12,11)");
    CHECK(anns(*store, "unlabeled") == "(5,5) (7,5) (11,11) (13,11)");
    CHECK(anns(*store, "title") == "(4,0) (10,8)");
}

TEST_CASE("second index maps each fact to its group start") {
    Program p = books_program();
    auto store = memory_store(p);
    const std::vector<long>& ix2 = store->index2();
    std::vector<long> expect{0, 0, 0, 0, 0, 5, 5, 5, 8, 8, 8, 11, 11, 11};
    CHECK(ix2 == expect);
}

TEST_CASE("groups follow the record node numbers") {
    Program p = books_program();
    // group [1,1] covers facts 0..4; group [5,1,1] facts 5..7
    for (int i = 0; i <= 4; ++i)
        CHECK(p.facts[static_cast<size_t>(i)].group == std::vector<int>{1, 1});
    for (int i = 5; i <= 7; ++i)
        CHECK(p.facts[static_cast<size_t>(i)].group == std::vector<int>{5, 1, 1});
    for (int i = 8; i <= 10; ++i)
        CHECK(p.facts[static_cast<size_t>(i)].group == std::vector<int>{2, 1});
    for (int i = 11; i <= 13; ++i)
        CHECK(p.facts[static_cast<size_t>(i)].group == std::vector<int>{1, 3, 2, 1});
}

TEST_CASE("write and reopen round trips every fact") {
    Program p = books_program();
    TempDir dir;
    write_store(p, dir.path.string());
    OpenedStore os = open_store(dir.path.string());
    REQUIRE(os.store->fact_count() == 14);
    StoreCounters c;
    for (long i = 0; i < 14; ++i) {
        Fact f = os.store->fact_at(i, c);
        CHECK(print_fact(f) == print_fact(p.facts[static_cast<size_t>(i)]));
        CHECK(f.group == p.facts[static_cast<size_t>(i)].group);
    }
    CHECK(print_rules(os.program) == print_rules(p));
    CHECK(os.program.max_type == p.max_type);
    // registry: terminal entries survive
    const auto* em = os.program.pt("em");
    REQUIRE(em);
    std::set<int> fact_tn;
    for (auto& en : *em)
        if (!en.from_rule) fact_tn.insert(en.tn.begin(), en.tn.end());
    CHECK(fact_tn == std::set<int>{4, 6});
}

TEST_CASE("retrieval follows the first index for unbound nodes") {
    Program p = books_program();
    auto store = memory_store(p);
    EvalContext ec;
    VarPool pool;
    std::vector<std::string> trace;
    ec.trace = [&](const std::string& s) { trace.push_back(s); };
    auto got = store->retrieve(ec, "year", Term::text("2002"),
                               node_pattern("N", pool), 3);
    REQUIRE(got.size() == 1);
    CHECK(got[0].position == 8);
    CHECK(ec.counters.index1_hits == 2); // positions 0 and 8
    CHECK(ec.counters.index2_hits == 0);
    REQUIRE(trace.size() >= 4);
    CHECK(trace[0] == "index1 year pos 0");
    CHECK(trace[1] == "recovered year('2003',[1,1],3). ; fail");
    CHECK(trace[2] == "index1 year pos 8");
    // the successful match caches its group position
    CHECK(ec.group_cache.at({2, 1}) == 8);
}

TEST_CASE("retrieval uses the cached group through the second index") {
    Program p = books_program();
    auto store = memory_store(p);
    EvalContext ec;
    VarPool pool;
    ec.group_cache[{2, 1}] = 8;
    auto got = store->retrieve(ec, "author", Term::text("Buneman"),
                               node_pattern("[V,2,1]", pool), 3);
    REQUIRE(got.size() == 1);
    CHECK(got[0].fact.node == std::vector<int>{1, 2, 1});
    CHECK(ec.counters.index2_hits == 1);
    CHECK(ec.counters.index1_hits == 0);
}

TEST_CASE("uncached group patterns fall back to the first index") {
    Program p = books_program();
    auto store = memory_store(p);
    EvalContext ec;
    VarPool pool;
    auto got = store->retrieve(ec, "author", node_pattern("A", pool),
                               node_pattern("[V,2,1]", pool), 3);
    REQUIRE(got.size() == 1);
    CHECK(ec.counters.index2_hits == 0);
    CHECK(ec.counters.index1_hits == 4); // all author annotations probed
}

TEST_CASE("cache on and off return identical sequences") {
    Program p = books_program();
    auto store = memory_store(p);
    VarPool pool;
    struct Call {
        std::string pred;
        std::string node;
        int type;
    };
    std::vector<Call> calls = {
        {"year", "N", 3},          {"author", "[V,1,1]", 3},
        {"author", "[V,2,1]", 3},  {"unlabeled", "[U,V,2,1]", 6},
        {"em", "[E,1,3,2,1]", 6},  {"title", "[T,W,1]", 3},
        {"unlabeled", "[A,5,1,1]", 4},
    };
    EvalContext on;
    EvalContext off;
    off.use_cache = false;
    // warm the cache the way an evaluation would
    for (auto& c : calls) {
        auto a = store->retrieve(on, c.pred, node_pattern("X", pool),
                                 node_pattern(c.node, pool), c.type);
        auto b = store->retrieve(off, c.pred, node_pattern("Y", pool),
                                 node_pattern(c.node, pool), c.type);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i)
            CHECK(a[i].position == b[i].position);
    }
}

TEST_CASE("linear scan mode returns the same facts") {
    Program p = books_program();
    auto store = memory_store(p);
    VarPool pool;
    EvalContext ix;
    EvalContext lin;
    lin.use_index = false;
    auto a = store->retrieve(ix, "author", node_pattern("A", pool),
                             node_pattern("N", pool), 3);
    auto b = store->retrieve(lin, "author", node_pattern("A", pool),
                             node_pattern("N2", pool), 3);
    REQUIRE(a.size() == 4);
    REQUIRE(b.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(a[i].position == b[i].position);
    CHECK(lin.counters.facts_scanned == 14);
    CHECK(lin.counters.index1_hits == 0);
}

TEST_CASE("fresh context has zero counters") {
    EvalContext ec;
    CHECK(ec.counters.index1_hits == 0);
    CHECK(ec.counters.index2_hits == 0);
    CHECK(ec.counters.facts_scanned == 0);
}

TEST_CASE("corrupt stores are rejected") {
    Program p = books_program();
    TempDir dir;
    write_store(p, dir.path.string());
    // truncate facts.lp but keep the index files
    {
        std::ofstream f(dir.path / "facts.lp", std::ios::trunc);
        f << "year('2003',[1,1],3).\n";
    }
    CHECK_THROWS_AS(
        [&] {
            OpenedStore os = open_store(dir.path.string());
            StoreCounters c;
            os.store->fact_at(13, c);
        }(),
        StoreCorrupt);
    CHECK_THROWS_AS(open_store("/nonexistent/xlq/store"), IoError);
}
