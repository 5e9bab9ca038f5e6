#include <doctest.h>

#include "xlq/term.hpp"

using namespace xlq;

namespace {

TermPtr parse(const std::string& s, VarPool& pool) {
    TermParser p(s, pool);
    return p.parse_term();
}

} // namespace

TEST_CASE("sequence head/tail unification") {
    VarPool pool;
    auto a = parse("[V|T]", pool);
    auto b = parse("[1,2,1]", pool);
    auto u = unify(a, b);
    REQUIRE(u.ok());
    CHECK(print_term(u.subst.apply(a)) == "[1,2,1]");
    const TermPtr& v = a->args[0];
    const TermPtr& t = a->tail;
    CHECK(print_term(u.subst.apply(v)) == "1");
    CHECK(print_term(u.subst.apply(t)) == "[2,1]");
}

TEST_CASE("pattern unification binds both sides") {
    VarPool pool;
    auto a = parse("booktype('Suciu',T,R,[Y])", pool);
    auto b = parse("booktype(A,'Data on the Web',R2,['2003'])", pool);
    auto u = unify(a, b);
    REQUIRE(u.ok());
    CHECK(Term::equal(u.subst.apply(a), u.subst.apply(b)));
    CHECK(print_term(u.subst.apply(b->args[0])) == "'Suciu'");           // A
    CHECK(print_term(u.subst.apply(a->args[1])) == "'Data on the Web'"); // T
    CHECK(print_term(u.subst.apply(a->args[3]->args[0])) == "'2003'");   // Y
}

TEST_CASE("constant clash fails") {
    auto u = unify(Term::text("a"), Term::text("b"));
    CHECK(!u.ok());
    CHECK(u.status == UnifyStatus::Clash);
}

TEST_CASE("occurs check") {
    VarPool pool;
    auto v = parse("X", pool);
    auto t = Term::comp("f", {v});
    auto u = unify(v, t);
    CHECK(!u.ok());
    CHECK(u.status == UnifyStatus::Occurs);
    auto u2 = unify(v, t, /*occurs_check=*/false);
    CHECK(u2.ok());
}

TEST_CASE("apply basics") {
    VarPool pool;
    auto t = parse("[V|T]", pool);
    Subst s;
    s.bind(t->args[0]->var_id, Term::integer(1));
    CHECK(print_term(s.apply(t)) == "[1|T]");
    Subst empty;
    CHECK(Term::equal(empty.apply(t), t));
}

TEST_CASE("composition law") {
    VarPool pool;
    auto pair = parse("p(X,Y)", pool);
    const TermPtr& x = pair->args[0];
    const TermPtr& y = pair->args[1];
    Subst s1, s2;
    s1.bind(x->var_id, y);
    s2.bind(y->var_id, Term::integer(1));
    Subst c = Subst::compose(s1, s2);
    CHECK(print_term(c.apply(x)) == "1");
    CHECK(print_term(s2.apply(s1.apply(x))) == "1");
}

TEST_CASE("unifier symmetry") {
    VarPool pool;
    auto a = parse("f(X,g(Y),'c')", pool);
    auto b = parse("f(g(Z),W,'c')", pool);
    CHECK(unify(a, b).ok() == unify(b, a).ok());
    auto c = parse("f('a')", pool);
    auto d = parse("f('b')", pool);
    CHECK(unify(c, d).ok() == unify(d, c).ok());
}

TEST_CASE("canonical term text round trip") {
    VarPool pool;
    const char* cases[] = {
        "author('Suciu',[3,1,1],3)",
        "booktype(Author,Title,Review,[Year])",
        "review(reviewtype(Em,[]),NodeReview,3)",
        "[1,2|T]",
        "f('a\\'b','line\\nbreak')",
        "'my-tag'('v',[1],2)",
    };
    for (const char* c : cases) {
        auto t = parse(c, pool);
        auto again = parse(print_term(t), pool);
        CHECK(print_term(t) == print_term(again));
    }
}

TEST_CASE("quoting of non-identifier atoms") {
    CHECK(quote_atom("book") == "book");
    CHECK(quote_atom("my-tag") == "'my-tag'");
    CHECK(quote_atom("Title") == "'Title'");
}
