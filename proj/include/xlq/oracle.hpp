#ifndef XLQ_ORACLE_HPP
#define XLQ_ORACLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "xlq/xml.hpp"
#include "xlq/xpath.hpp"

namespace xlq {

// Reference tree semantics, independent of the logic-program evaluation
// path. Deliberately O(tree x query); correctness only.
namespace oracle {

bool satisfies(const XmlNode& x, const Step& step);

// The rooted subtree of `doc` defined by a core query (no wildcard or
// descendant steps). Empty optional when the query selects nothing.
std::optional<XmlTree> subtree(const XmlTree& doc, const XPathExpr& q);

// Same pruning applied to a numbered tree, the original node and type
// numbers preserved.
std::optional<NumberedTree> subtree_numbered(const NumberedTree& doc,
                                             const XPathExpr& q);

// Sequence of answer items in document order: subtrees of `sub` whose tag is
// the query's last tag step; for a trailing @att, the matched elements'
// attribute values wrapped as elements named att; for trailing text(), the
// matched elements' text children.
std::vector<XmlNode> extract_answer(const std::optional<XmlTree>& sub,
                                    const XPathExpr& q);

// Wildcard and descendant steps resolved against the concrete tree: every
// chain of tags present in the document matching the pattern, as core
// queries. Core queries come back as a singleton.
std::vector<XPathExpr> expand_on_tree(const XmlTree& doc, const XPathExpr& q);

// Full evaluation: expand, run every core query, merge answers in document
// order (duplicates collapse), wrap in <result>.
XmlNode answer(const XmlTree& doc, const XPathExpr& q);

XmlNode wrap_result(const std::vector<XmlNode>& forest);

} // namespace oracle

} // namespace xlq

#endif
