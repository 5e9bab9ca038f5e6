#include <doctest.h>

#include <filesystem>
#include <unistd.h>

#include "fixtures.hpp"
#include "xlq/engine.hpp"
#include "xlq/error.hpp"

using namespace xlq;

namespace {

struct Env {
    Program program;
    std::unique_ptr<FactStore> store;
    std::unique_ptr<Engine> engine;

    explicit Env(const std::string& xml) {
        program = translate(number_tree(parse_xml(xml)));
        store = memory_store(program);
        engine = std::make_unique<Engine>(program, *store);
    }

    EvalResult run(const std::string& q, EvalOptions opt = {}) {
        return engine->evaluate(parse_xpath(q), opt);
    }
    std::string result(const std::string& q, EvalOptions opt = {}) {
        return serialize(run(q, opt).result);
    }
};

} // namespace

TEST_CASE("query (1): title of Suciu's book") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books/book[author=\"Suciu\"]/title") ==
          "<result><title>Data on the Web</title></result>");
}

TEST_CASE("query (2): descendant titles in document order") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books//title") ==
          "<result><title>Data on the Web</title>"
          "<title>XML in Scotland</title></result>");
}

TEST_CASE("authors enumerate in fact order") {
    Env env(fixtures::kBooks);
    EvalResult r = env.run("/books/book/author");
    REQUIRE(r.answers.size() == 4);
    CHECK(print_term(r.answers[0].pattern) == "'Abiteboul'");
    CHECK(print_term(r.answers[0].node) == "[1,1,1]");
    CHECK(print_term(r.answers[1].pattern) == "'Buneman'");
    CHECK(print_term(r.answers[1].node) == "[2,1,1]");
    CHECK(print_term(r.answers[2].pattern) == "'Suciu'");
    CHECK(print_term(r.answers[2].node) == "[3,1,1]");
    CHECK(print_term(r.answers[3].pattern) == "'Buneman'");
    CHECK(print_term(r.answers[3].node) == "[1,2,1]");
    CHECK(serialize(r.result) ==
          "<result><author>Abiteboul</author><author>Buneman</author>"
          "<author>Suciu</author><author>Buneman</author></result>");
}

TEST_CASE("condition-free whole-record query yields eight answers") {
    Env env(fixtures::kBooks);
    EvalResult r = env.run("/books/book");
    REQUIRE(r.answers.size() == 8);
    CHECK(print_term(r.answers[0].pattern) ==
          "booktype('Abiteboul','Data on the Web',reviewtype('A ','fine',[]),"
          "['2003'])");
    CHECK(print_term(r.answers[1].pattern) ==
          "booktype('Abiteboul','Data on the Web',reviewtype(' book.','fine',[]),"
          "['2003'])");
    CHECK(print_term(r.answers[6].pattern) ==
          "booktype('Buneman','XML in Scotland',"
          "reviewtype(emtype('The ','best',[]),[]),['2002'])");
    CHECK(print_term(r.answers[7].pattern) ==
          "booktype('Buneman','XML in Scotland',"
          "reviewtype(emtype(' ever!','best',[]),[]),['2002'])");
    // the merged document equals the input
    REQUIRE(r.answer_doc);
    CHECK(serialize(*r.answer_doc, false) ==
          serialize(parse_xml(fixtures::kBooks)));
}

TEST_CASE("single answer substitution dump") {
    Env env(fixtures::kBooks);
    EvalResult r = env.run("/books/book[author=\"Suciu\"]/title");
    REQUIRE(r.answer_lines.size() == 1);
    CHECK(r.answer_lines[0].find("Title/'Data on the Web'") != std::string::npos);
    CHECK(r.answer_lines[0].find("Node/[1,1]") != std::string::npos);
    CHECK(r.answer_lines[0].find("Review/Review'") != std::string::npos);
    CHECK(r.answer_lines[0].find("Year/Year'") != std::string::npos);
}

TEST_CASE("answer document for the Suciu query omits unused branches") {
    Env env(fixtures::kBooks);
    EvalResult r = env.run("/books/book[author=\"Suciu\"]/title");
    REQUIRE(r.answer_doc);
    CHECK(serialize(*r.answer_doc, false) ==
          "<books><book><author>Suciu</author>"
          "<title>Data on the Web</title></book></books>");
}

TEST_CASE("and-condition over attribute and title") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books/book[@year=2002 and title=\"XML in Scotland\"]/author") ==
          "<result><author>Buneman</author></result>");
    CHECK(env.result("/books/book[@year=2002 and title=\"Data on the Web\"]/author") ==
          "<result/>");
}

TEST_CASE("or-condition unions and deduplicates") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books/book[@year=2002 or title=\"Data on the Web\"]/author") ==
          "<result><author>Abiteboul</author><author>Buneman</author>"
          "<author>Suciu</author><author>Buneman</author></result>");
    CHECK(env.result("/books/book[@year=2002 or @year=2002]/author") ==
          "<result><author>Buneman</author></result>");
}

TEST_CASE("no-match queries produce an empty result") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books/book[author=\"Nobody\"]/title") == "<result/>");
    CHECK(env.result("/nosuch") == "<result/>");
    CHECK(env.result("/books/magazine/title") == "<result/>");
}

TEST_CASE("trailing attribute and text steps") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books/book/@year") ==
          "<result><year>2003</year><year>2002</year></result>");
    CHECK(env.result("/books/book/review/text()") == "<result>A  book.</result>");
    CHECK(env.result("/books/book/author/text()") == "<result/>");
    CHECK(env.result("//@year") ==
          "<result><year>2003</year><year>2002</year></result>");
}

TEST_CASE("conditioned last step returns whole matching records") {
    Env env(fixtures::kBooks);
    CHECK(env.result("/books/book[author=\"Suciu\"]") ==
          "<result><book year=\"2003\"><author>Abiteboul</author>"
          "<author>Buneman</author><author>Suciu</author>"
          "<title>Data on the Web</title>"
          "<review>A <em>fine</em> book.</review></book></result>");
}

TEST_CASE("condition tag equal to the extraction tag") {
    Env env(fixtures::kBooks);
    // every author of books having author Suciu
    CHECK(env.result("/books/book[author=\"Suciu\"]/author") ==
          "<result><author>Abiteboul</author><author>Buneman</author>"
          "<author>Suciu</author></result>");
}

TEST_CASE("nested condition through the author names") {
    Env env(fixtures::kBooksAuthorNames);
    CHECK(env.result("/books/book[author[name=\"Serge\"]]/title") ==
          "<result><title>Data on the Web</title></result>");
    CHECK(env.result("/books/book[author/name]/title") ==
          "<result><title>Data on the Web</title>"
          "<title>XML in Scotland</title></result>");
    CHECK(env.result("/books/book[@year=2002]/author[name=\"Serge\"]") ==
          "<result/>");
    CHECK(env.result("/books/book[@year=2003]/author[name=\"Serge\"]") ==
          "<result><author>Abiteboul<name>Serge</name></author></result>");
}

TEST_CASE("pure existence conditions filter records") {
    Env env(fixtures::kBooksTwoShapes);
    CHECK(env.result("/books/book[review]/title") ==
          "<result><title>Data on the Web</title></result>");
    CHECK(env.result("/books/book[@year]/title") ==
          "<result><title>Data on the Web</title>"
          "<title>XML in Scotland</title></result>");
}

TEST_CASE("descendant expansion evaluates every core query") {
    Env env(fixtures::kBooks);
    CHECK(env.result("//em") ==
          "<result><em>fine</em><em>The <em>best</em> ever!</em>"
          "<em>best</em></result>");
    CHECK(env.result("//book") == env.result("/books/book"));
}

TEST_CASE("the trace records the expected index accesses") {
    Env env(fixtures::kBooks);
    std::vector<std::string> lines;
    EvalOptions opt;
    opt.trace = [&](const std::string& s) { lines.push_back(s); };
    EvalResult r =
        env.run("/books/book[@year=2002 and author=\"Buneman\"]/review", opt);
    REQUIRE(r.answers.size() == 2);

    auto has = [&](const std::string& needle) {
        for (auto& l : lines)
            if (l.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(has("index1 year pos 0"));
    CHECK(has("index1 year pos 8"));
    CHECK(has("index2 author pos 8"));
    CHECK(has("index2 em pos 11"));
    int successes = 0;
    for (auto& l : lines)
        if (l.rfind("success book(", 0) == 0) ++successes;
    CHECK(successes == 2);
    CHECK(r.counters.index2_hits >= 2);
    CHECK(serialize(r.result) ==
          "<result><review><em>The <em>best</em> ever!</em></review></result>");
}

TEST_CASE("file-backed evaluation matches the in-memory store") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() /
                   ("xlq_engine_test_" + std::to_string(::getpid()));
    Program p = translate(number_tree(parse_xml(fixtures::kBooks)));
    write_store(p, dir.string());
    OpenedStore os = open_store(dir.string());
    Engine file_engine(os.program, *os.store);
    auto mem = memory_store(p);
    Engine mem_engine(p, *mem);

    const char* queries[] = {
        "/books/book[author=\"Suciu\"]/title",
        "/books//title",
        "/books/book/author",
        "/books/book",
        "/books/book[@year=2002 and author=\"Buneman\"]/review",
        "/books/book/@year",
        "//em",
    };
    for (const char* q : queries) {
        EvalResult a = file_engine.evaluate(parse_xpath(q), {});
        EvalResult b = mem_engine.evaluate(parse_xpath(q), {});
        CHECK(serialize(a.result) == serialize(b.result));
        REQUIRE(a.answers.size() == b.answers.size());
        for (size_t i = 0; i < a.answers.size(); ++i) {
            CHECK(print_term(a.answers[i].pattern) ==
                  print_term(b.answers[i].pattern));
            CHECK(print_term(a.answers[i].node) == print_term(b.answers[i].node));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("specialization and indexing never change answers") {
    Env env(fixtures::kBooks);
    const char* queries[] = {
        "/books/book[author=\"Suciu\"]/title",
        "/books/book[@year=2002 and author=\"Buneman\"]/review",
        "/books/book/author",
        "/books/book",
        "/books//title",
        "/books/book[@year=2002 or title=\"Data on the Web\"]/author",
    };
    for (const char* q : queries) {
        EvalOptions plain;
        EvalOptions nospec;
        nospec.specialize = false;
        EvalOptions noindex;
        noindex.use_index = false;
        std::string a = env.result(q, plain);
        CHECK(a == env.result(q, nospec));
        CHECK(a == env.result(q, noindex));
    }
}

TEST_CASE("specialization reads fewer facts") {
    Env env(fixtures::kBooks);
    EvalOptions plain;
    EvalOptions nospec;
    nospec.specialize = false;
    EvalResult a = env.run("/books/book[author=\"Suciu\"]/title", plain);
    EvalResult b = env.run("/books/book[author=\"Suciu\"]/title", nospec);
    CHECK(a.counters.facts_scanned < b.counters.facts_scanned);
}

TEST_CASE("small catalog queries") {
    Env env(fixtures::kSmallCatalog);
    CHECK(env.result("/books/book[@year=2002]/title") ==
          "<result><title>Applied XML Programming for Microsoft .NET</title>"
          "</result>");
    CHECK(env.result("/books/book[review=\"Very good\"]/author") ==
          "<result><author>Apt, Krzystof R.</author>"
          "<author english=\"yes\" spanish=\"no\">Leon Sterling</author>"
          "<author>Ehud Shapiro</author></result>");
    CHECK(env.result("/books/book2/title") ==
          "<result><title>XML Bible</title></result>");
    CHECK(env.result("/books/book[author/name]/title") ==
          "<result><title>XML Programming Bible</title></result>");
    CHECK(env.result("/books/book[@year and @pages]/title") ==
          "<result><title>XML Programming Bible</title>"
          "<title>The Art of Prolog</title>"
          "<title>XML Programming Bible</title></result>");
}
