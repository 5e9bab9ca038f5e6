#ifndef XLQ_XPATH_HPP
#define XLQ_XPATH_HPP

#include <memory>
#include <string>
#include <vector>

namespace xlq {

// Step forms: tag, tag[cond], @att, text(), *, //tag.
// @att and text() may only appear as the final step; wildcard and
// descendant steps never carry conditions.
enum class StepKind : uint8_t { Tag, TagCond, Attr, Text, Wildcard, DescendantTag };

struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct Step {
    StepKind kind = StepKind::Tag;
    std::string name; // tag or attribute name
    CondPtr cond;     // TagCond only

    bool is_tag_like() const { return kind == StepKind::Tag || kind == StepKind::TagCond; }
};

struct XPathExpr {
    std::vector<Step> steps;
    bool operator==(const XPathExpr& o) const;
};

enum class CondKind : uint8_t { TagEq, AttrEq, And, Or, Path };

struct Cond {
    CondKind kind;
    std::string name;  // TagEq / AttrEq
    std::string value; // TagEq / AttrEq (text; numeric literals kept as text)
    CondPtr lhs, rhs;  // And / Or
    XPathExpr path;    // Path (relative, rooted at the conditioned element)

    static CondPtr tag_eq(std::string tag, std::string value);
    static CondPtr attr_eq(std::string att, std::string value);
    static CondPtr conj(CondPtr a, CondPtr b);
    static CondPtr disj(CondPtr a, CondPtr b);
    static CondPtr nested(XPathExpr p);
};

bool cond_equal(const CondPtr& a, const CondPtr& b);

XPathExpr parse_xpath(const std::string& query);
std::string print_xpath(const XPathExpr& q);
std::string print_cond(const CondPtr& c);

// True when the query contains no wildcard or descendant steps anywhere,
// conditions included.
bool is_core(const XPathExpr& q);

// Index of the last Tag/TagCond step, or -1 when there is none.
int last_tag_step(const XPathExpr& q);

} // namespace xlq

#endif
