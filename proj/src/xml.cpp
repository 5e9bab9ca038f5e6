#include "xlq/xml.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "xlq/error.hpp"

namespace xlq {

bool XmlNode::terminal() const {
    if (is_text) return false;
    if (!attrs.empty()) return false;
    for (auto& c : children)
        if (!c.is_text) return false;
    return true;
}

std::string XmlNode::value() const {
    std::string v;
    for (auto& c : children)
        if (c.is_text) v += c.text;
    return v;
}

const std::string* XmlNode::attr(const std::string& name) const {
    for (auto& [k, v] : attrs)
        if (k == name) return &v;
    return nullptr;
}

bool XmlNode::operator==(const XmlNode& o) const {
    return is_text == o.is_text && text == o.text && tag == o.tag &&
           attrs == o.attrs && children == o.children;
}

Signature signature(const XmlNode& e) {
    Signature s;
    s.tag = e.tag;
    s.terminal = e.terminal();
    for (auto& [k, v] : e.attrs) s.attr_names.insert(k);
    if (!s.terminal) {
        for (auto& c : e.children)
            s.child_tags.insert(c.is_text ? kUnlabeledTag : c.tag);
    }
    return s;
}

namespace {

class XmlParser {
public:
    explicit XmlParser(const std::string& in) : in_(in) {}

    XmlTree parse() {
        skip_prolog();
        if (pos_ >= in_.size() || in_[pos_] != '<')
            fail("expected root element");
        XmlTree t;
        t.root = element();
        skip_misc();
        if (pos_ < in_.size()) fail("content after root element");
        return t;
    }

private:
    const std::string& in_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) { throw ParseError(pos_, why); }

    bool starts_with(const char* s) const {
        return in_.compare(pos_, strlen_(s), s) == 0;
    }
    static size_t strlen_(const char* s) {
        size_t n = 0;
        while (s[n]) ++n;
        return n;
    }

    void skip_ws() {
        while (pos_ < in_.size() &&
               std::isspace(static_cast<unsigned char>(in_[pos_])))
            ++pos_;
    }

    void skip_comment() {
        // at "<!--"
        size_t end = in_.find("-->", pos_ + 4);
        if (end == std::string::npos) fail("unterminated comment");
        pos_ = end + 3;
    }

    void skip_prolog() {
        skip_ws();
        if (starts_with("<?xml")) {
            size_t end = in_.find("?>", pos_);
            if (end == std::string::npos) fail("unterminated XML declaration");
            pos_ = end + 2;
        }
        skip_misc();
        if (pos_ < in_.size() && starts_with("<!DOCTYPE"))
            fail("DTD declarations are not supported");
    }

    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--"))
                skip_comment();
            else
                return;
        }
    }

    std::string name() {
        size_t start = pos_;
        while (pos_ < in_.size()) {
            char c = in_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                c == '-' || c == '.')
                ++pos_;
            else
                break;
        }
        if (start == pos_) fail("expected a name");
        if (pos_ < in_.size() && in_[pos_] == ':')
            fail("namespaces are not supported");
        char first = in_[start];
        if (!std::isalpha(static_cast<unsigned char>(first)) && first != '_')
            fail("names must start with a letter or underscore");
        return in_.substr(start, pos_ - start);
    }

    std::string decode_entity() {
        // at '&'
        size_t semi = in_.find(';', pos_);
        if (semi == std::string::npos || semi - pos_ > 6) fail("malformed entity");
        std::string e = in_.substr(pos_ + 1, semi - pos_ - 1);
        pos_ = semi + 1;
        if (e == "lt") return "<";
        if (e == "gt") return ">";
        if (e == "amp") return "&";
        if (e == "apos") return "'";
        if (e == "quot") return "\"";
        fail("unsupported entity &" + e + ";");
    }

    std::string attr_value() {
        char q = in_[pos_];
        if (q != '"' && q != '\'') fail("expected quoted attribute value");
        ++pos_;
        std::string v;
        while (pos_ < in_.size() && in_[pos_] != q) {
            char c = in_[pos_];
            if (c == '&')
                v += decode_entity();
            else if (c == '<')
                fail("'<' in attribute value");
            else {
                v += c;
                ++pos_;
            }
        }
        if (pos_ >= in_.size()) fail("unterminated attribute value");
        ++pos_;
        return v;
    }

    XmlNode element() {
        // at '<'
        ++pos_;
        XmlNode e = XmlNode::element(name());
        for (;;) {
            skip_ws();
            if (pos_ >= in_.size()) fail("unterminated start tag");
            char c = in_[pos_];
            if (c == '>') {
                ++pos_;
                content(e);
                return e;
            }
            if (c == '/') {
                ++pos_;
                if (pos_ >= in_.size() || in_[pos_] != '>') fail("malformed empty tag");
                ++pos_;
                return e;
            }
            std::string an = name();
            for (auto& [k, v] : e.attrs)
                if (k == an) fail("duplicate attribute '" + an + "'");
            skip_ws();
            if (pos_ >= in_.size() || in_[pos_] != '=') fail("expected '='");
            ++pos_;
            skip_ws();
            e.attrs.emplace_back(an, attr_value());
        }
    }

    static bool all_space(const std::string& s) {
        for (char c : s)
            if (!std::isspace(static_cast<unsigned char>(c))) return false;
        return true;
    }

    void content(XmlNode& e) {
        std::string text;
        auto flush = [&]() {
            // Whitespace runs between markup carry no content; anything
            // else keeps its spacing exactly.
            if (!text.empty() && !all_space(text))
                e.children.push_back(XmlNode::text_node(text));
            text.clear();
        };
        for (;;) {
            if (pos_ >= in_.size()) fail("unterminated element <" + e.tag + ">");
            char c = in_[pos_];
            if (c == '<') {
                if (starts_with("<!--")) {
                    flush();
                    skip_comment();
                    continue;
                }
                if (starts_with("<![CDATA[")) fail("CDATA sections are not supported");
                if (starts_with("<?")) fail("processing instructions are not supported");
                if (pos_ + 1 < in_.size() && in_[pos_ + 1] == '/') {
                    flush();
                    pos_ += 2;
                    std::string n = name();
                    if (n != e.tag)
                        fail("mismatched end tag </" + n + "> for <" + e.tag + ">");
                    skip_ws();
                    if (pos_ >= in_.size() || in_[pos_] != '>') fail("malformed end tag");
                    ++pos_;
                    return;
                }
                flush();
                e.children.push_back(element());
            } else if (c == '&') {
                text += decode_entity();
            } else {
                text += c;
                ++pos_;
            }
        }
    }
};

} // namespace

XmlTree parse_xml(const std::string& input) { return XmlParser(input).parse(); }

namespace {

struct Numberer {
    // Ordered distinct signatures per (element type, element tag).
    std::map<std::pair<int, std::string>, std::vector<Signature>> seen;

    NumberedNode run(const XmlNode& e, std::vector<int> path, int type) {
        for (auto& [k, v] : e.attrs)
            if (k == kNodeNumberAttr || k == kTypeNumberAttr)
                throw ReservedAttribute(k);
        NumberedNode n;
        n.tag = e.tag;
        n.attrs = e.attrs;
        n.path = std::move(path);
        n.type = type;
        n.terminal = e.terminal();
        if (n.terminal) {
            n.value = e.value();
            return n;
        }
        Signature sig = signature(e);
        auto& sigs = seen[{type, e.tag}];
        size_t idx = 0;
        for (; idx < sigs.size(); ++idx)
            if (sigs[idx] == sig) break;
        if (idx == sigs.size()) sigs.push_back(sig);
        int child_type = type + static_cast<int>(idx) + 1;
        n.child_type = child_type;

        int j = 0;
        for (auto& c : e.children) {
            ++j;
            std::vector<int> cp = n.path;
            cp.push_back(j);
            if (c.is_text) {
                NumberedNode u;
                u.tag = kUnlabeledTag;
                u.path = std::move(cp);
                u.type = child_type;
                u.terminal = true;
                u.value = c.text;
                n.children.push_back(std::move(u));
            } else {
                n.children.push_back(run(c, std::move(cp), child_type));
            }
        }
        return n;
    }
};

} // namespace

NumberedTree number_tree(const XmlTree& doc) {
    NumberedTree t;
    t.root = Numberer{}.run(doc.root, {1}, 1);
    return t;
}

namespace {

XmlNode strip_node(const NumberedNode& n) {
    if (n.tag == kUnlabeledTag) return XmlNode::text_node(n.value);
    XmlNode e = XmlNode::element(n.tag);
    e.attrs = n.attrs;
    if (n.terminal) {
        if (!n.value.empty()) e.children.push_back(XmlNode::text_node(n.value));
        return e;
    }
    for (auto& c : n.children) e.children.push_back(strip_node(c));
    return e;
}

void escape_text(const std::string& s, std::string& out) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
}

void escape_attr(const std::string& s, std::string& out) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
}

void ser_node(const XmlNode& n, std::string& out) {
    if (n.is_text) {
        escape_text(n.text, out);
        return;
    }
    out += '<';
    out += n.tag;
    for (auto& [k, v] : n.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        escape_attr(v, out);
        out += '"';
    }
    if (n.children.empty()) {
        out += "/>";
        return;
    }
    out += '>';
    for (auto& c : n.children) ser_node(c, out);
    out += "</";
    out += n.tag;
    out += '>';
}

void ser_numbered(const NumberedNode& n, bool with_numbers, std::string& out) {
    if (!with_numbers && n.tag == kUnlabeledTag) {
        escape_text(n.value, out);
        return;
    }
    out += '<';
    out += n.tag;
    for (auto& [k, v] : n.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        escape_attr(v, out);
        out += '"';
    }
    if (with_numbers) {
        out += ' ';
        out += kNodeNumberAttr;
        out += "=\"";
        out += dotted(n.path);
        out += "\" ";
        out += kTypeNumberAttr;
        out += "=\"";
        out += std::to_string(n.type);
        out += '"';
    }
    bool empty = n.children.empty() && (!n.terminal || n.value.empty());
    if (empty) {
        out += "/>";
        return;
    }
    out += '>';
    if (n.terminal)
        escape_text(n.value, out);
    else
        for (auto& c : n.children) ser_numbered(c, with_numbers, out);
    out += "</";
    out += n.tag;
    out += '>';
}

} // namespace

XmlTree strip_numbering(const NumberedTree& t) {
    XmlTree x;
    x.root = strip_node(t.root);
    return x;
}

std::string serialize(const XmlNode& n) {
    std::string out;
    ser_node(n, out);
    return out;
}

std::string serialize(const XmlTree& t) { return serialize(t.root); }

std::string serialize(const NumberedTree& t, bool with_numbers) {
    if (!with_numbers) return serialize(strip_numbering(t));
    std::string out;
    ser_numbered(t.root, true, out);
    return out;
}

std::string dotted(const std::vector<int>& path) {
    std::string out;
    for (size_t i = 0; i < path.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(path[i]);
    }
    return out;
}

} // namespace xlq
