#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "xlq/error.hpp"
#include "xlq/specialize.hpp"

using namespace xlq;

namespace {

Program books_program() {
    return translate(number_tree(parse_xml(fixtures::kBooks)));
}

std::vector<std::string> rule_texts(const std::vector<SchemaRule>& rules) {
    std::vector<std::string> out;
    for (auto& r : rules) out.push_back(print_rule(r));
    return out;
}

bool has_rule(const std::vector<SchemaRule>& rules, const std::string& text) {
    for (auto& r : rules)
        if (print_rule(r) == text) return true;
    return false;
}

std::vector<std::string> pt_texts(const XPathExpr& q, const Program& p) {
    std::vector<std::string> out;
    for (auto& t : pt_query(q, p)) out.push_back(print_term(t));
    return out;
}

} // namespace

TEST_CASE("free-of-equalities transform") {
    CHECK(print_xpath(fe(parse_xpath("/books/book[author=\"Suciu\"]/title"))) ==
          "/books/book[author]/title");
    CHECK(print_xpath(fe(parse_xpath("/a/b[c=\"1\" and @d=2]/e"))) ==
          "/a/b[c and @d]/e");
    CHECK(print_xpath(fe(parse_xpath("/a/b[c=\"1\" or d=\"2\"]"))) ==
          "/a/b[c or d]");
    CHECK(print_xpath(fe(parse_xpath("/a/text()"))) == "/a/text()");
    CHECK(print_xpath(fe(parse_xpath("/a/b[c[d=\"x\"]]/e"))) == "/a/b[c[d]]/e");
}

TEST_CASE("schema expansion of descendant and wildcard steps") {
    Program p = books_program();
    auto cores = expand(parse_xpath("/books//title"), p);
    REQUIRE(cores.size() == 1);
    CHECK(print_xpath(cores[0]) == "/books/book/title");

    cores = expand(parse_xpath("/books/*/author"), p);
    REQUIRE(cores.size() == 1);
    CHECK(print_xpath(cores[0]) == "/books/book/author");

    cores = expand(parse_xpath("//book"), p);
    REQUIRE(cores.size() == 1);
    CHECK(print_xpath(cores[0]) == "/books/book");

    cores = expand(parse_xpath("//em"), p);
    REQUIRE(cores.size() == 2);
    CHECK(print_xpath(cores[0]) == "/books/book/review/em");
    CHECK(print_xpath(cores[1]) == "/books/book/review/em/em");

    CHECK(expand(parse_xpath("/books//nosuch"), p).empty());
}

TEST_CASE("rule specialization keeps only the needed atoms") {
    Program p = books_program();
    auto rules = specialize_rules(p, parse_xpath("/books/book[author=\"Suciu\"]/title"));
    CHECK(has_rule(rules,
                   "books(bookstype(Book,[]),NodeBooks,1) :- "
                   "book(Book,[NodeBook|NodeBooks],2)."));
    CHECK(has_rule(rules,
                   "book(booktype(Author,Title,Review,[Year]),NodeBook,2) :- "
                   "author(Author,[NodeAuthor|NodeBook],3),"
                   "title(Title,[NodeTitle|NodeBook],3)."));
    CHECK(rules.size() == 2);
}

TEST_CASE("specialization for a whole-subtree answer keeps full rules") {
    Program p = books_program();
    // the trace query: conditions on book, answer subtree rooted at review
    auto rules = specialize_rules(
        p, parse_xpath("/books/book[@year=2002 and author=\"Buneman\"]/review"));
    // book rule reordered: year, author, then the review path atom
    CHECK(has_rule(rules,
                   "book(booktype(Author,Title,Review,[Year]),NodeBook,2) :- "
                   "year(Year,NodeBook,3),author(Author,[NodeAuthor|NodeBook],3),"
                   "review(Review,[NodeReview|NodeBook],3)."));
    // both review rules and the em rule survive unpruned
    CHECK(has_rule(rules,
                   "review(reviewtype(Unlabeled,Em,[]),NodeReview,3) :- "
                   "unlabeled(Unlabeled,[NodeUnlabeled|NodeReview],4),"
                   "em(Em,[NodeEm|NodeReview],4)."));
    CHECK(has_rule(rules,
                   "review(reviewtype(Em,[]),NodeReview,3) :- "
                   "em(Em,[NodeEm|NodeReview],5)."));
    CHECK(has_rule(rules,
                   "em(emtype(Unlabeled,Em,[]),NodeEms,5) :- "
                   "unlabeled(Unlabeled,[NodeUnlabeled|NodeEms],6),"
                   "em(Em,[NodeEm|NodeEms],6)."));
}

TEST_CASE("specialization touching every child leaves the body whole") {
    Program p = books_program();
    auto rules = specialize_rules(p, parse_xpath("/books/book"));
    for (auto& text : rule_texts(rules))
        CHECK(fixtures::kBooksRules.find(text) != std::string::npos);
    CHECK(rules.size() == 5);
}

TEST_CASE("empty specialization is an error") {
    Program p = books_program();
    CHECK_THROWS_AS(specialize_rules(p, parse_xpath("/nosuch/title")),
                    EmptySpecialization);
    CHECK_THROWS_AS(specialize_rules(p, parse_xpath("/books/magazine/title")),
                    EmptySpecialization);
}

TEST_CASE("reordering follows the conditions left to right") {
    Program p = books_program();
    XPathExpr q =
        parse_xpath("/books/book[@year=2002 and title=\"Data on the Web\"]/author");
    std::vector<SchemaRule> rules;
    for (auto& r : p.rules)
        if (r.tag == "book") rules.push_back(r);
    reorder(rules, q);
    REQUIRE(rules.size() == 1);
    CHECK(print_rule(rules[0]) ==
          "book(booktype(Author,Title,Review,[Year]),NodeBook,2) :- "
          "year(Year,NodeBook,3),title(Title,[NodeTitle|NodeBook],3),"
          "author(Author,[NodeAuthor|NodeBook],3),"
          "review(Review,[NodeReview|NodeBook],3).");

    // condition-free queries leave the order unchanged
    std::vector<SchemaRule> plain;
    for (auto& r : p.rules)
        if (r.tag == "book") plain.push_back(r);
    reorder(plain, parse_xpath("/books/book/author"));
    CHECK(print_rule(plain[0]).find("author(Author") <
          print_rule(plain[0]).find("year(Year"));
}

TEST_CASE("query patterns instantiate the equality slots") {
    Program p = books_program();
    auto pats = pt_texts(parse_xpath("/books/book[author=\"Suciu\"]/title"), p);
    REQUIRE(pats.size() == 1);
    CHECK(pats[0] == "booktype('Suciu',Title,Review,[Year])");

    pats = pt_texts(
        parse_xpath("/books/book[@year=2002 and title=\"Data on the Web\"]/author"), p);
    REQUIRE(pats.size() == 1);
    CHECK(pats[0] == "booktype(Author,'Data on the Web',Review,['2002'])");

    pats = pt_texts(
        parse_xpath("/books/book[@year=2002 or title=\"Data on the Web\"]/author"), p);
    REQUIRE(pats.size() == 2);
    CHECK(pats[0] == "booktype(Author,Title,Review,['2002'])");
    CHECK(pats[1] == "booktype(Author,'Data on the Web',Review,[Year])");

    // condition-free queries have no patterns
    CHECK(pt_texts(parse_xpath("/books/book/author"), p).empty());
}

TEST_CASE("goals target the rightmost tag when condition-free") {
    Program p = books_program();
    auto gs = goals(parse_xpath("/books/book/author"), p);
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].pred == "author");
    CHECK(gs[0].type == 3);
    CHECK(gs[0].pattern->kind == Kind::Var);

    gs = goals(parse_xpath("/books/book"), p);
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].pred == "book");
    CHECK(gs[0].type == 2);
}

TEST_CASE("goals target the leftmost conditioned tag") {
    Program p = books_program();
    auto gs = goals(parse_xpath("/books/book[author=\"Suciu\"]/title"), p);
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].pred == "book");
    CHECK(gs[0].type == 2);
    CHECK(print_term(gs[0].pattern) == "booktype('Suciu',Title,Review,[Year])");

    // or-conditions produce one goal per branch
    gs = goals(
        parse_xpath("/books/book[@year=2002 or title=\"Data on the Web\"]/author"), p);
    CHECK(gs.size() == 2);
}

TEST_CASE("nested equalities embed into the parent pattern") {
    Program p = translate(number_tree(parse_xml(fixtures::kBooksAuthorNames)));
    XPathExpr q = parse_xpath("/books/book[@year=2002]/author[name=\"Serge\"]");
    auto pats = pt_texts(q, p);
    REQUIRE(pats.size() == 2);
    // both weakly distinct book shapes contribute a pattern
    CHECK(pats[0] ==
          "booktype(authortype(Unlabeled,'Serge',[]),Title,Review,['2002'])");
    CHECK(pats[1] == "booktype(authortype(Unlabeled,'Serge',[]),Title,['2002'])");

    auto gs = goals(q, p);
    REQUIRE(gs.size() == 2);
    CHECK(gs[0].type == 2);
    CHECK(gs[1].type == 2);

    // specialized author rules keep name and unlabeled, name first
    auto rules = specialize_rules(p, q);
    CHECK(has_rule(rules,
                   "author(authortype(Unlabeled,Name,[]),NodeAuthor,3) :- "
                   "name(Name,[NodeName|NodeAuthor],4),"
                   "unlabeled(Unlabeled,[NodeUnlabeled|NodeAuthor],4)."));
    CHECK(has_rule(rules,
                   "author(authortype(Unlabeled,Name,[]),NodeAuthor,4) :- "
                   "name(Name,[NodeName|NodeAuthor],5),"
                   "unlabeled(Unlabeled,[NodeUnlabeled|NodeAuthor],5)."));
    // two book rules, one per shape, keeping author and year
    int book_rules = 0;
    for (auto& r : rules)
        if (r.tag == "book") ++book_rules;
    CHECK(book_rules == 2);
}

TEST_CASE("patterns lacking a condition slot are skipped") {
    Program p = translate(number_tree(parse_xml(fixtures::kBooksTwoShapes)));
    // only the first book shape has a review child
    auto pats = pt_texts(parse_xpath("/books/book[review=\"x\"]/title"), p);
    REQUIRE(pats.size() == 1);
    CHECK(pats[0] == "booktype(Author,Title,'x',[Year])");
}

TEST_CASE("explain emits the pipeline in a stable format") {
    Program p = books_program();
    std::string out = explain(p, parse_xpath("/books/book[author=\"Suciu\"]/title"));
    CHECK(out.find("query: /books/book[author=\"Suciu\"]/title\n") != std::string::npos);
    CHECK(out.find("fe: /books/book[author]/title\n") != std::string::npos);
    CHECK(out.find("goal: book(booktype('Suciu',Title,Review,[Year]),") !=
          std::string::npos);
    CHECK(out.find("rule: book(booktype(Author,Title,Review,[Year]),NodeBook,2) :- "
                   "author(Author,[NodeAuthor|NodeBook],3),"
                   "title(Title,[NodeTitle|NodeBook],3).") != std::string::npos);
}
