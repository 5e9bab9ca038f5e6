#ifndef XLQ_TESTS_FIXTURES_HPP
#define XLQ_TESTS_FIXTURES_HPP

#include <string>

namespace fixtures {

// The two-book catalog used throughout the unit tests.
inline const std::string kBooks = R"(<books>
<book year="2003">
<author>Abiteboul</author>
<author>Buneman</author>
<author>Suciu</author>
<title>Data on the Web</title>
<review>A <em>fine</em> book.</review>
</book>
<book year="2002">
<author>Buneman</author>
<title>XML in Scotland</title>
<review><em>The <em>best</em> ever!</em></review>
</book>
</books>)";

// Same catalog, second book lacking its review: two weakly distinct book
// shapes.
inline const std::string kBooksTwoShapes = R"(<books>
<book year="2003">
<author>Abiteboul</author>
<title>Data on the Web</title>
<review>A <em>fine</em> book.</review>
</book>
<book year="2002">
<author>Buneman</author>
<title>XML in Scotland</title>
</book>
</books>)";

// Books whose authors mix text and a name element.
inline const std::string kBooksAuthorNames = R"(<books>
<book year="2003">
<author>Abiteboul<name>Serge</name></author>
<title>Data on the Web</title>
<review>A <em>fine</em> book.</review>
</book>
<book year="2002">
<author>Buneman <name>Peter</name></author>
<title>XML in Scotland</title>
</book>
</books>)";

// A small, loosely structured catalog: mixed content everywhere, attribute
// variation, repeated subtags, a terminal book, and book2/review2/name2
// variants.
inline const std::string kSmallCatalog =
    "<books year=\"2006\">A book collection"
    "<book>empty</book>"
    "<book year=\"2003\" pages=\"984\">The first book"
    "<author english=\"yes\" spanish=\"yes\">Benz<name>Brian</name></author>"
    "<author>John Durant</author>"
    "<author>John Durant</author>"
    "<title>XML Programming Bible</title>"
    "<review>Good</review>"
    "</book>"
    "<book year=\"2002\">The second book"
    "<author>Dino Esposito</author>"
    "<title>Applied XML Programming for Microsoft .NET</title>"
    "<review>Good</review>"
    "</book>"
    "<book>The third book"
    "<author>Apt, Krzystof R.</author>"
    "<title>The Logic Programming Paradigm and Prolog</title>"
    "<review>Very good</review>"
    "</book>"
    "<book year=\"1994\" pages=\"560\">The fourth book"
    "<author english=\"yes\" spanish=\"no\">Leon Sterling</author>"
    "<author>Ehud Shapiro</author>"
    "<title>The Art of Prolog</title>"
    "<review>Very good</review>"
    "</book>"
    "<book2 year=\"2001\">The fifth book"
    "<author english=\"yes\">Elliotte Rusty Harold</author>"
    "<title>XML Bible</title>"
    "<review2>Good</review2>"
    "</book2>"
    "<book year=\"2003\" pages=\"984\">The first book"
    "<author english=\"yes\" spanish=\"yes\">Benz<name2>Brian</name2>"
    "<firstname>Brian<lastname>Benz</lastname><others>no more</others></firstname>"
    "</author>"
    "<author>John Durant</author>"
    "<author>John Durant</author>"
    "<title>XML Programming Bible</title>"
    "<review>Very good 2</review>"
    "</book>"
    "</books>";

// Canonical translation of kBooks.
inline const std::string kBooksRules =
    "books(bookstype(Book,[]),NodeBooks,1) :- book(Book,[NodeBook|NodeBooks],2).\n"
    "book(booktype(Author,Title,Review,[Year]),NodeBook,2) :- "
    "author(Author,[NodeAuthor|NodeBook],3),title(Title,[NodeTitle|NodeBook],3),"
    "review(Review,[NodeReview|NodeBook],3),year(Year,NodeBook,3).\n"
    "review(reviewtype(Unlabeled,Em,[]),NodeReview,3) :- "
    "unlabeled(Unlabeled,[NodeUnlabeled|NodeReview],4),em(Em,[NodeEm|NodeReview],4).\n"
    "review(reviewtype(Em,[]),NodeReview,3) :- em(Em,[NodeEm|NodeReview],5).\n"
    "em(emtype(Unlabeled,Em,[]),NodeEms,5) :- "
    "unlabeled(Unlabeled,[NodeUnlabeled|NodeEms],6),em(Em,[NodeEm|NodeEms],6).\n";

inline const std::string kBooksFacts =
    "year('2003',[1,1],3).\n"
    "author('Abiteboul',[1,1,1],3).\n"
    "author('Buneman',[2,1,1],3).\n"
    "author('Suciu',[3,1,1],3).\n"
    "title('Data on the Web',[4,1,1],3).\n"
    "unlabeled('A ',[1,5,1,1],4).\n"
    "em('fine',[2,5,1,1],4).\n"
    "unlabeled(' book.',[3,5,1,1],4).\n"
    "year('2002',[2,1],3).\n"
    "author('Buneman',[1,2,1],3).\n"
    "title('XML in Scotland',[2,2,1],3).\n"
    "unlabeled('The ',[1,1,3,2,1],6).\n"
    "em('best',[2,1,3,2,1],6).\n"
    "unlabeled(' ever!',[3,1,3,2,1],6).\n";

} // namespace fixtures

#endif
