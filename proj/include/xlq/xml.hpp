#ifndef XLQ_XML_HPP
#define XLQ_XML_HPP

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace xlq {

// Plain parsed XML: elements with ordered attributes and ordered children,
// plus raw text nodes. Exactly one root element.
struct XmlNode {
    bool is_text = false;
    std::string text; // text-node content
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<XmlNode> children;

    static XmlNode text_node(std::string t) {
        XmlNode n;
        n.is_text = true;
        n.text = std::move(t);
        return n;
    }
    static XmlNode element(std::string tag) {
        XmlNode n;
        n.tag = std::move(tag);
        return n;
    }

    // Terminal: no attributes and every child is a text node.
    bool terminal() const;
    // Concatenated text content of a terminal element.
    std::string value() const;
    const std::string* attr(const std::string& name) const;
    bool operator==(const XmlNode& o) const;
};

struct XmlTree {
    XmlNode root;
    bool operator==(const XmlTree& o) const { return root == o.root; }
};

// One-level structural signature; drives similar / weakly distinct
// classification. Text children of a non-terminal count as tag "unlabeled".
struct Signature {
    std::string tag;
    std::set<std::string> attr_names;
    std::set<std::string> child_tags;
    bool terminal = false;

    bool operator==(const Signature& o) const {
        return tag == o.tag && attr_names == o.attr_names &&
               child_tags == o.child_tags && terminal == o.terminal;
    }
};

Signature signature(const XmlNode& e);

// Node- and type-numbered tree. Text children of non-terminal elements are
// wrapped as `unlabeled` elements carrying their own numbers.
struct NumberedNode {
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<int> path; // document form, root = {1}
    int type = 0;
    int child_type = 0; // type shared by all children (non-terminal only)
    bool terminal = false;
    std::string value; // content of terminal / unlabeled elements
    std::vector<NumberedNode> children;
};

struct NumberedTree {
    NumberedNode root;
};

inline constexpr const char* kUnlabeledTag = "unlabeled";
inline constexpr const char* kNodeNumberAttr = "nodenumber";
inline constexpr const char* kTypeNumberAttr = "typenumber";

XmlTree parse_xml(const std::string& input);
NumberedTree number_tree(const XmlTree& doc);

// Drop numbering, unwrap unlabeled elements back to text nodes.
XmlTree strip_numbering(const NumberedTree& t);

std::string serialize(const XmlTree& t);
std::string serialize(const XmlNode& n);
std::string serialize(const NumberedTree& t, bool with_numbers);

std::string dotted(const std::vector<int>& path);

} // namespace xlq

#endif
