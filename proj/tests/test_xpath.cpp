#include <doctest.h>

#include "xlq/error.hpp"
#include "xlq/xpath.hpp"

using namespace xlq;

TEST_CASE("simple condition query") {
    XPathExpr q = parse_xpath("/books/book[author=\"Suciu\"]/title");
    REQUIRE(q.steps.size() == 3);
    CHECK(q.steps[0].kind == StepKind::Tag);
    CHECK(q.steps[0].name == "books");
    CHECK(q.steps[1].kind == StepKind::TagCond);
    REQUIRE(q.steps[1].cond);
    CHECK(q.steps[1].cond->kind == CondKind::TagEq);
    CHECK(q.steps[1].cond->name == "author");
    CHECK(q.steps[1].cond->value == "Suciu");
    CHECK(q.steps[2].name == "title");
}

TEST_CASE("descendant step") {
    XPathExpr q = parse_xpath("/books//title");
    REQUIRE(q.steps.size() == 2);
    CHECK(q.steps[1].kind == StepKind::DescendantTag);
    CHECK(q.steps[1].name == "title");
    CHECK(!is_core(q));
}

TEST_CASE("and condition with numeric literal") {
    XPathExpr q = parse_xpath("/books/book[@year=2002 and title=\"Data on the Web\"]/author");
    REQUIRE(q.steps.size() == 3);
    const CondPtr& c = q.steps[1].cond;
    REQUIRE(c);
    CHECK(c->kind == CondKind::And);
    CHECK(c->lhs->kind == CondKind::AttrEq);
    CHECK(c->lhs->name == "year");
    CHECK(c->lhs->value == "2002"); // numeric literal kept as text
    CHECK(c->rhs->kind == CondKind::TagEq);
}

TEST_CASE("or condition and precedence") {
    XPathExpr q = parse_xpath("/b/x[a=\"1\" or b=\"2\" and c=\"3\"]");
    const CondPtr& c = q.steps[1].cond;
    REQUIRE(c);
    CHECK(c->kind == CondKind::Or); // and binds tighter
    CHECK(c->rhs->kind == CondKind::And);
}

TEST_CASE("nested path conditions") {
    XPathExpr q = parse_xpath("/books/book[author/name]/title");
    const CondPtr& c = q.steps[1].cond;
    REQUIRE(c);
    CHECK(c->kind == CondKind::Path);
    REQUIRE(c->path.steps.size() == 2);
    CHECK(c->path.steps[0].name == "author");
    CHECK(c->path.steps[1].name == "name");

    XPathExpr q2 = parse_xpath("/books/book[author[name=\"Serge\"]]/title");
    const CondPtr& c2 = q2.steps[1].cond;
    REQUIRE(c2);
    CHECK(c2->kind == CondKind::Path);
    CHECK(c2->path.steps[0].kind == StepKind::TagCond);

    // attribute existence
    XPathExpr q3 = parse_xpath("/books/book[@year and @pages]/title");
    const CondPtr& c3 = q3.steps[1].cond;
    REQUIRE(c3);
    CHECK(c3->kind == CondKind::And);
    CHECK(c3->lhs->kind == CondKind::Path);
    CHECK(c3->lhs->path.steps[0].kind == StepKind::Attr);
}

TEST_CASE("trailing attribute and text steps") {
    XPathExpr q = parse_xpath("/books/book/@year");
    CHECK(q.steps.back().kind == StepKind::Attr);
    CHECK(last_tag_step(q) == 1);
    XPathExpr q2 = parse_xpath("/books/book/text()");
    CHECK(q2.steps.back().kind == StepKind::Text);

    // //@att splits into a descendant-any step plus the attribute step
    XPathExpr q3 = parse_xpath("//@year");
    REQUIRE(q3.steps.size() == 2);
    CHECK(q3.steps[0].kind == StepKind::DescendantTag);
    CHECK(q3.steps[0].name == "*");
    CHECK(q3.steps[1].kind == StepKind::Attr);
}

TEST_CASE("rejected forms") {
    CHECK_THROWS_AS(parse_xpath("/books/*[a=\"1\"]"), UnsupportedFeature);
    CHECK_THROWS_AS(parse_xpath("/books//book[a=\"1\"]"), UnsupportedFeature);
    CHECK_THROWS_AS(parse_xpath("/books/@year/title"), QueryParseError);
    CHECK_THROWS_AS(parse_xpath("books/book"), QueryParseError);
    CHECK_THROWS_AS(parse_xpath("/books/book[author/name=\"x\"]"), QueryParseError);
    CHECK_THROWS_AS(parse_xpath(""), QueryParseError);
}

TEST_CASE("print is a fixed point after one round trip") {
    const char* cases[] = {
        "/books/book[author=\"Suciu\"]/title",
        "/books//title",
        "/books/book[@year=2002 and title=\"Data on the Web\"]/author",
        "/books/book[@year=2002 or title=\"Data on the Web\"]/author",
        "/books/book[author[name=\"Serge\"]]/title",
        "/books/*/author",
        "//book",
        "/books/book/text()",
        "/books/book/@year",
        "/books/book[review]/title",
    };
    for (const char* c : cases) {
        XPathExpr q = parse_xpath(c);
        std::string printed = print_xpath(q);
        XPathExpr again = parse_xpath(printed);
        CHECK(print_xpath(again) == printed);
        CHECK(again == q);
    }
}
