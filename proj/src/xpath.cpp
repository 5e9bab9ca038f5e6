#include "xlq/xpath.hpp"

#include <cctype>

#include "xlq/error.hpp"

namespace xlq {

bool XPathExpr::operator==(const XPathExpr& o) const {
    if (steps.size() != o.steps.size()) return false;
    for (size_t i = 0; i < steps.size(); ++i) {
        const Step& a = steps[i];
        const Step& b = o.steps[i];
        if (a.kind != b.kind || a.name != b.name) return false;
        if (!cond_equal(a.cond, b.cond)) return false;
    }
    return true;
}

bool cond_equal(const CondPtr& a, const CondPtr& b) {
    if (!a && !b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case CondKind::TagEq:
    case CondKind::AttrEq: return a->name == b->name && a->value == b->value;
    case CondKind::And:
    case CondKind::Or:
        return cond_equal(a->lhs, b->lhs) && cond_equal(a->rhs, b->rhs);
    case CondKind::Path: return a->path == b->path;
    }
    return false;
}

CondPtr Cond::tag_eq(std::string tag, std::string value) {
    auto c = std::make_shared<Cond>();
    c->kind = CondKind::TagEq;
    c->name = std::move(tag);
    c->value = std::move(value);
    return c;
}

CondPtr Cond::attr_eq(std::string att, std::string value) {
    auto c = std::make_shared<Cond>();
    c->kind = CondKind::AttrEq;
    c->name = std::move(att);
    c->value = std::move(value);
    return c;
}

CondPtr Cond::conj(CondPtr a, CondPtr b) {
    auto c = std::make_shared<Cond>();
    c->kind = CondKind::And;
    c->lhs = std::move(a);
    c->rhs = std::move(b);
    return c;
}

CondPtr Cond::disj(CondPtr a, CondPtr b) {
    auto c = std::make_shared<Cond>();
    c->kind = CondKind::Or;
    c->lhs = std::move(a);
    c->rhs = std::move(b);
    return c;
}

CondPtr Cond::nested(XPathExpr p) {
    auto c = std::make_shared<Cond>();
    c->kind = CondKind::Path;
    c->path = std::move(p);
    return c;
}

namespace {

class QueryParser {
public:
    explicit QueryParser(const std::string& in) : in_(in) {}

    XPathExpr parse() {
        skip_ws();
        XPathExpr q = path(/*absolute=*/true);
        skip_ws();
        if (pos_ < in_.size()) fail("trailing input");
        if (q.steps.empty()) fail("empty query");
        validate(q);
        return q;
    }

private:
    const std::string& in_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) { throw QueryParseError(pos_, why); }

    void skip_ws() {
        while (pos_ < in_.size() &&
               std::isspace(static_cast<unsigned char>(in_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < in_.size() && in_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < in_.size() && in_[pos_] == c;
    }

    std::string name() {
        skip_ws();
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
        return in_.substr(start, pos_ - start);
    }

    std::string value() {
        skip_ws();
        if (pos_ >= in_.size()) fail("expected a value");
        char q = in_[pos_];
        if (q == '\'' || q == '"') {
            ++pos_;
            size_t start = pos_;
            while (pos_ < in_.size() && in_[pos_] != q) ++pos_;
            if (pos_ >= in_.size()) fail("unterminated string literal");
            std::string v = in_.substr(start, pos_ - start);
            ++pos_;
            return v;
        }
        // unquoted numeric literal, compared as text
        size_t start = pos_;
        while (pos_ < in_.size() &&
               (std::isdigit(static_cast<unsigned char>(in_[pos_])) ||
                in_[pos_] == '.' || in_[pos_] == '-'))
            ++pos_;
        if (start == pos_) fail("expected a quoted string or number");
        return in_.substr(start, pos_ - start);
    }

    // `absolute` paths require a leading '/' (or '//'); condition paths are
    // relative and start directly with a step.
    XPathExpr path(bool absolute) {
        XPathExpr q;
        bool first = true;
        for (;;) {
            bool descendant = false;
            if (first && absolute) {
                if (!eat('/')) fail("query must start with '/'");
                if (eat('/')) descendant = true;
            } else if (!first) {
                skip_ws();
                if (pos_ >= in_.size() || in_[pos_] != '/') break;
                ++pos_;
                if (eat('/')) descendant = true;
            }
            if (descendant) {
                // //@att and //text() select at any depth: split into a
                // descendant-any-element step plus the final step.
                skip_ws();
                if (pos_ < in_.size() &&
                    (in_[pos_] == '@' ||
                     (in_.compare(pos_, 5, "text(") == 0))) {
                    Step any;
                    any.kind = StepKind::DescendantTag;
                    any.name = "*";
                    q.steps.push_back(any);
                    descendant = false;
                }
            }
            q.steps.push_back(step(descendant));
            first = false;
        }
        return q;
    }

    Step step(bool descendant) {
        skip_ws();
        if (pos_ >= in_.size()) fail("expected a step");
        Step s;
        char c = in_[pos_];
        if (c == '@') {
            ++pos_;
            s.kind = StepKind::Attr;
            s.name = name();
            return s;
        }
        if (c == '*') {
            ++pos_;
            s.kind = descendant ? StepKind::DescendantTag : StepKind::Wildcard;
            s.name = "*";
            if (peek_is('['))
                throw UnsupportedFeature("condition on a wildcard step");
            return s;
        }
        std::string n = name();
        if (n == "text" && eat('(')) {
            if (!eat(')')) fail("expected ')' after text(");
            s.kind = StepKind::Text;
            return s;
        }
        s.name = n;
        if (descendant) {
            s.kind = StepKind::DescendantTag;
            if (peek_is('['))
                throw UnsupportedFeature("condition on a descendant ('//') step");
            return s;
        }
        if (eat('[')) {
            s.kind = StepKind::TagCond;
            s.cond = cond();
            if (!eat(']')) fail("expected ']'");
        } else {
            s.kind = StepKind::Tag;
        }
        return s;
    }

    CondPtr cond() { return cond_or(); }

    CondPtr cond_or() {
        CondPtr lhs = cond_and();
        for (;;) {
            skip_ws();
            if (in_.compare(pos_, 2, "or") == 0 && boundary(pos_ + 2)) {
                pos_ += 2;
                lhs = Cond::disj(lhs, cond_and());
            } else {
                return lhs;
            }
        }
    }

    CondPtr cond_and() {
        CondPtr lhs = cond_primary();
        for (;;) {
            skip_ws();
            if (in_.compare(pos_, 3, "and") == 0 && boundary(pos_ + 3)) {
                pos_ += 3;
                lhs = Cond::conj(lhs, cond_primary());
            } else {
                return lhs;
            }
        }
    }

    bool boundary(size_t p) const {
        if (p >= in_.size()) return true;
        char c = in_[p];
        return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_');
    }

    CondPtr cond_primary() {
        skip_ws();
        if (pos_ >= in_.size()) fail("expected a condition");
        if (in_[pos_] == '@') {
            ++pos_;
            std::string a = name();
            skip_ws();
            if (eat('='))
                return Cond::attr_eq(a, value());
            // bare attribute existence: a one-step nested path
            XPathExpr p;
            Step s;
            s.kind = StepKind::Attr;
            s.name = a;
            p.steps.push_back(s);
            return Cond::nested(std::move(p));
        }
        // tag=value, or a nested relative path
        size_t mark = pos_;
        XPathExpr p = path(/*absolute=*/false);
        if (p.steps.empty()) fail("expected a condition");
        if (p.steps.size() == 1 && p.steps[0].kind == StepKind::Tag && peek_is('=')) {
            ++pos_;
            return Cond::tag_eq(p.steps[0].name, value());
        }
        if (peek_is('='))
            throw QueryParseError(mark, "'=' is only supported on a single tag or attribute");
        return Cond::nested(std::move(p));
    }

    void validate(const XPathExpr& q) {
        for (size_t i = 0; i < q.steps.size(); ++i) {
            const Step& s = q.steps[i];
            bool last = i + 1 == q.steps.size();
            if ((s.kind == StepKind::Attr || s.kind == StepKind::Text) && !last)
                fail("@attribute and text() may only be the final step");
            if (s.cond) validate_cond(s.cond);
        }
    }

    void validate_cond(const CondPtr& c) {
        switch (c->kind) {
        case CondKind::And:
        case CondKind::Or:
            validate_cond(c->lhs);
            validate_cond(c->rhs);
            break;
        case CondKind::Path: {
            for (size_t i = 0; i < c->path.steps.size(); ++i) {
                const Step& s = c->path.steps[i];
                bool last = i + 1 == c->path.steps.size();
                if ((s.kind == StepKind::Attr || s.kind == StepKind::Text) && !last)
                    fail("@attribute and text() may only be the final step");
                if (s.cond) validate_cond(s.cond);
            }
            break;
        }
        default: break;
        }
    }
};

void print_steps(const XPathExpr& q, std::string& out, bool leading_slash);

void print_cond_rec(const CondPtr& c, std::string& out, bool parent_and) {
    switch (c->kind) {
    case CondKind::TagEq:
        out += c->name;
        out += "=\"";
        out += c->value;
        out += '"';
        break;
    case CondKind::AttrEq:
        out += '@';
        out += c->name;
        out += "=\"";
        out += c->value;
        out += '"';
        break;
    case CondKind::And:
        print_cond_rec(c->lhs, out, true);
        out += " and ";
        print_cond_rec(c->rhs, out, true);
        break;
    case CondKind::Or:
        // canonical form never needs parentheses: and-chains never contain
        // or-children because the parser has no grouping syntax
        (void)parent_and;
        print_cond_rec(c->lhs, out, false);
        out += " or ";
        print_cond_rec(c->rhs, out, false);
        break;
    case CondKind::Path: print_steps(c->path, out, false); break;
    }
}

void print_steps(const XPathExpr& q, std::string& out, bool leading_slash) {
    for (size_t i = 0; i < q.steps.size(); ++i) {
        const Step& s = q.steps[i];
        if (s.kind == StepKind::DescendantTag)
            out += "//";
        else if (leading_slash || i > 0)
            out += '/';
        switch (s.kind) {
        case StepKind::Tag: out += s.name; break;
        case StepKind::TagCond:
            out += s.name;
            out += '[';
            print_cond_rec(s.cond, out, false);
            out += ']';
            break;
        case StepKind::Attr:
            out += '@';
            out += s.name;
            break;
        case StepKind::Text: out += "text()"; break;
        case StepKind::Wildcard: out += '*'; break;
        case StepKind::DescendantTag: out += s.name; break;
        }
    }
}

} // namespace

XPathExpr parse_xpath(const std::string& query) { return QueryParser(query).parse(); }

std::string print_xpath(const XPathExpr& q) {
    std::string out;
    print_steps(q, out, true);
    return out;
}

std::string print_cond(const CondPtr& c) {
    std::string out;
    print_cond_rec(c, out, false);
    return out;
}

bool is_core(const XPathExpr& q) {
    for (const Step& s : q.steps) {
        if (s.kind == StepKind::Wildcard || s.kind == StepKind::DescendantTag)
            return false;
        if (s.cond) {
            // check nested paths recursively
            std::vector<CondPtr> stack{s.cond};
            while (!stack.empty()) {
                CondPtr c = stack.back();
                stack.pop_back();
                switch (c->kind) {
                case CondKind::And:
                case CondKind::Or:
                    stack.push_back(c->lhs);
                    stack.push_back(c->rhs);
                    break;
                case CondKind::Path:
                    if (!is_core(c->path)) return false;
                    break;
                default: break;
                }
            }
        }
    }
    return true;
}

int last_tag_step(const XPathExpr& q) {
    for (int i = static_cast<int>(q.steps.size()) - 1; i >= 0; --i)
        if (q.steps[i].is_tag_like()) return i;
    return -1;
}

} // namespace xlq
