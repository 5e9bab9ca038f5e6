#include <doctest.h>

#include "fixtures.hpp"
#include "xlq/oracle.hpp"

using namespace xlq;

namespace {

XmlTree books() { return parse_xml(fixtures::kBooks); }

std::string answer_text(const std::string& doc, const std::string& query) {
    return serialize(oracle::answer(parse_xml(doc), parse_xpath(query)));
}

} // namespace

TEST_CASE("satisfies on steps and conditions") {
    XmlTree t = books();
    const XmlNode& b1 = t.root.children[0];
    const XmlNode& b2 = t.root.children[1];
    XPathExpr q = parse_xpath("/book[author=\"Suciu\"]");
    CHECK(oracle::satisfies(b1, q.steps[0]));
    CHECK(!oracle::satisfies(b2, q.steps[0]));
    XPathExpr plain = parse_xpath("/book");
    CHECK(oracle::satisfies(b2, plain.steps[0]));
    XPathExpr text = parse_xpath("/a/text()");
    CHECK(!oracle::satisfies(b1, text.steps[1]));
    CHECK(oracle::satisfies(XmlNode::text_node("x"), text.steps[1]));
}

TEST_CASE("subtree of the Suciu query keeps the matching branch whole") {
    auto sub = oracle::subtree(books(),
                               parse_xpath("/books/book[author=\"Suciu\"]/title"));
    REQUIRE(sub);
    CHECK(serialize(*sub) ==
          "<books><book year=\"2003\"><author>Suciu</author>"
          "<title>Data on the Web</title></book></books>");
}

TEST_CASE("subtree of a full-match query is the input") {
    XmlTree t = books();
    auto sub = oracle::subtree(t, parse_xpath("/books/book"));
    REQUIRE(sub);
    CHECK(*sub == t);
}

TEST_CASE("subtree of an unmatched root is empty") {
    CHECK(!oracle::subtree(books(), parse_xpath("/nosuch")));
    CHECK(!oracle::subtree(books(), parse_xpath("/books/nosuch/title")));
}

TEST_CASE("extraction by the rightmost tag") {
    XPathExpr q = parse_xpath("/books/book[author=\"Suciu\"]/title");
    auto sub = oracle::subtree(books(), q);
    auto forest = oracle::extract_answer(sub, q);
    REQUIRE(forest.size() == 1);
    CHECK(serialize(forest[0]) == "<title>Data on the Web</title>");
    CHECK(oracle::extract_answer(std::nullopt, q).empty());
}

TEST_CASE("golden answers") {
    CHECK(answer_text(fixtures::kBooks, "/books/book[author=\"Suciu\"]/title") ==
          "<result><title>Data on the Web</title></result>");
    CHECK(answer_text(fixtures::kBooks, "/books//title") ==
          "<result><title>Data on the Web</title>"
          "<title>XML in Scotland</title></result>");
    CHECK(answer_text(fixtures::kBooks, "/books/book/author") ==
          "<result><author>Abiteboul</author><author>Buneman</author>"
          "<author>Suciu</author><author>Buneman</author></result>");
    CHECK(answer_text(fixtures::kBooks, "/nosuch") == "<result/>");
}

TEST_CASE("attribute and text answers") {
    CHECK(answer_text(fixtures::kBooks, "/books/book/@year") ==
          "<result><year>2003</year><year>2002</year></result>");
    CHECK(answer_text(fixtures::kBooks, "/books/book/review/text()") ==
          "<result>A  book.</result>");
    // terminal elements do not recurse into text()
    CHECK(answer_text(fixtures::kBooks, "/books/book/author/text()") == "<result/>");
    CHECK(answer_text(fixtures::kBooks, "//@year") ==
          "<result><year>2003</year><year>2002</year></result>");
}

TEST_CASE("and, or, attribute conditions") {
    CHECK(answer_text(fixtures::kBooks,
                      "/books/book[@year=2002 and title=\"Data on the Web\"]/author") ==
          "<result/>");
    CHECK(answer_text(fixtures::kBooks,
                      "/books/book[@year=2003 and title=\"Data on the Web\"]/author") ==
          "<result><author>Abiteboul</author><author>Buneman</author>"
          "<author>Suciu</author></result>");
    CHECK(answer_text(fixtures::kBooks,
                      "/books/book[@year=2002 or title=\"Data on the Web\"]/author") ==
          "<result><author>Abiteboul</author><author>Buneman</author>"
          "<author>Suciu</author><author>Buneman</author></result>");
}

TEST_CASE("nested path conditions") {
    CHECK(answer_text(fixtures::kBooksAuthorNames,
                      "/books/book[author[name=\"Serge\"]]/title") ==
          "<result><title>Data on the Web</title></result>");
    CHECK(answer_text(fixtures::kBooksAuthorNames, "/books/book[author/name]/title") ==
          "<result><title>Data on the Web</title>"
          "<title>XML in Scotland</title></result>");
    // pure existence keeps the witness whole in the subtree
    auto sub = oracle::subtree(parse_xml(fixtures::kBooksTwoShapes),
                               parse_xpath("/books/book[review]/title"));
    REQUIRE(sub);
    CHECK(serialize(*sub).find("<review>A <em>fine</em> book.</review>") !=
          std::string::npos);
}

TEST_CASE("wildcard and descendant expansion on the tree") {
    XmlTree t = books();
    auto cores = oracle::expand_on_tree(t, parse_xpath("/books//title"));
    REQUIRE(cores.size() == 1);
    CHECK(print_xpath(cores[0]) == "/books/book/title");

    cores = oracle::expand_on_tree(t, parse_xpath("/books/*/author"));
    REQUIRE(cores.size() == 1);
    CHECK(print_xpath(cores[0]) == "/books/book/author");

    cores = oracle::expand_on_tree(t, parse_xpath("//book"));
    REQUIRE(cores.size() == 1);
    CHECK(print_xpath(cores[0]) == "/books/book");

    cores = oracle::expand_on_tree(t, parse_xpath("//em"));
    REQUIRE(cores.size() == 2);
    CHECK(print_xpath(cores[0]) == "/books/book/review/em");
    CHECK(print_xpath(cores[1]) == "/books/book/review/em/em");
}

TEST_CASE("descendant answers merge nested matches in document order") {
    CHECK(answer_text(fixtures::kBooks, "//em") ==
          "<result><em>fine</em><em>The <em>best</em> ever!</em>"
          "<em>best</em></result>");
}

TEST_CASE("condition-free idempotence") {
    XmlTree t = books();
    const char* qs[] = {"/books/book", "/books/book/title", "/books/book/review"};
    for (const char* s : qs) {
        XPathExpr q = parse_xpath(s);
        auto once = oracle::subtree(t, q);
        REQUIRE(once);
        auto twice = oracle::subtree(*once, q);
        REQUIRE(twice);
        CHECK(*once == *twice);
    }
}
