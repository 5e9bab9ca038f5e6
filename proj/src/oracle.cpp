#include "xlq/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace xlq {
namespace oracle {

namespace {

enum Mark : int { kPartial = 1, kWhole = 2 };
using Marks = std::map<std::vector<int>, int>;

void mark(Marks& m, const std::vector<int>& path, int kind) {
    int& slot = m[path];
    slot = std::max(slot, kind);
}

bool cond_holds(const XmlNode& x, const CondPtr& c);
bool subtree_marks(const XmlNode& x, std::vector<int>& path, const XPathExpr& q,
                   size_t i, Marks& m);

// Children witnessing a condition are included in the subtree: equality
// witnesses whole, nested-path witnesses as the nested path's own subtree.
bool witness_marks(const XmlNode& c, std::vector<int>& path, const CondPtr& cond,
                   Marks& m) {
    switch (cond->kind) {
    case CondKind::TagEq:
        if (!c.is_text && c.tag == cond->name && c.terminal() &&
            c.value() == cond->value) {
            mark(m, path, kWhole);
            return true;
        }
        return false;
    case CondKind::AttrEq: return false;
    case CondKind::And:
    case CondKind::Or: {
        bool a = witness_marks(c, path, cond->lhs, m);
        bool b = witness_marks(c, path, cond->rhs, m);
        return a || b;
    }
    case CondKind::Path: return subtree_marks(c, path, cond->path, 0, m);
    }
    return false;
}

bool step_matches(const XmlNode& x, const Step& s) {
    switch (s.kind) {
    case StepKind::Tag: return !x.is_text && x.tag == s.name;
    case StepKind::TagCond:
        return !x.is_text && x.tag == s.name && cond_holds(x, s.cond);
    case StepKind::Attr: return !x.is_text && x.attr(s.name) != nullptr;
    case StepKind::Text: return x.is_text;
    case StepKind::Wildcard: return !x.is_text;
    case StepKind::DescendantTag:
        return !x.is_text && (s.name == "*" || x.tag == s.name);
    }
    return false;
}

bool cond_holds(const XmlNode& x, const CondPtr& c) {
    switch (c->kind) {
    case CondKind::TagEq:
        for (auto& ch : x.children)
            if (!ch.is_text && ch.tag == c->name && ch.terminal() &&
                ch.value() == c->value)
                return true;
        return false;
    case CondKind::AttrEq: {
        const std::string* v = x.attr(c->name);
        return v && *v == c->value;
    }
    case CondKind::And: return cond_holds(x, c->lhs) && cond_holds(x, c->rhs);
    case CondKind::Or: return cond_holds(x, c->lhs) || cond_holds(x, c->rhs);
    case CondKind::Path: {
        Marks scratch;
        std::vector<int> p{0};
        int j = 0;
        for (auto& ch : x.children) {
            ++j;
            p.back() = j;
            if (subtree_marks(ch, p, c->path, 0, scratch)) return true;
        }
        return false;
    }
    }
    return false;
}

bool subtree_marks(const XmlNode& x, std::vector<int>& path, const XPathExpr& q,
                   size_t i, Marks& m) {
    const Step& s = q.steps[i];
    if (x.is_text) {
        if (s.kind == StepKind::Text && i + 1 == q.steps.size()) {
            mark(m, path, kWhole);
            return true;
        }
        return false;
    }
    // a trailing @att step is consumed by its parent element, never by a
    // child in its own right
    if (s.kind == StepKind::Attr) return false;
    if (!step_matches(x, s)) return false;
    if (i + 1 == q.steps.size()) {
        mark(m, path, kWhole);
        return true;
    }
    if (x.terminal()) return false; // terminal elements never recurse

    if (q.steps[i + 1].kind == StepKind::Attr) {
        // the element itself carries the answer attribute
        if (!x.attr(q.steps[i + 1].name)) return false;
        mark(m, path, kPartial);
        if (s.kind == StepKind::TagCond) {
            int j = 0;
            path.push_back(0);
            for (auto& c : x.children) {
                ++j;
                path.back() = j;
                witness_marks(c, path, s.cond, m);
            }
            path.pop_back();
        }
        return true;
    }

    bool any = false;
    int j = 0;
    path.push_back(0);
    for (auto& c : x.children) {
        ++j;
        path.back() = j;
        if (subtree_marks(c, path, q, i + 1, m)) any = true;
        if (s.kind == StepKind::TagCond)
            if (witness_marks(c, path, s.cond, m)) any = true;
    }
    path.pop_back();
    if (any) mark(m, path, kPartial);
    return any;
}

XmlNode materialize(const XmlNode& x, const std::vector<int>& path, const Marks& m,
                    bool inside_whole) {
    auto it = m.find(path);
    int kind = inside_whole ? kWhole : (it == m.end() ? 0 : it->second);
    if (kind == kWhole || x.is_text) return x; // deep copy, whole
    XmlNode out = XmlNode::element(x.tag);
    out.attrs = x.attrs;
    std::vector<int> cp = path;
    cp.push_back(0);
    int j = 0;
    for (auto& c : x.children) {
        ++j;
        cp.back() = j;
        auto cit = m.find(cp);
        if (cit == m.end()) continue;
        out.children.push_back(
            materialize(c, cp, m, cit->second == kWhole));
    }
    return out;
}

struct Item {
    std::vector<int> path; // document order key
    XmlNode node;
};

void collect_matches(const XmlNode& x, const std::vector<int>& path, const Marks& m,
                     bool inside_whole, const XPathExpr& q, int last_tag,
                     std::vector<Item>& out) {
    auto it = m.find(path);
    bool here = inside_whole || it != m.end();
    if (!here || x.is_text) return;
    bool whole = inside_whole || (it != m.end() && it->second == kWhole);

    if (last_tag >= 0 && x.tag == q.steps[static_cast<size_t>(last_tag)].name) {
        const Step& trailing = q.steps.back();
        if (trailing.kind == StepKind::Attr) {
            if (const std::string* v = x.attr(trailing.name)) {
                XmlNode w = XmlNode::element(trailing.name);
                if (!v->empty()) w.children.push_back(XmlNode::text_node(*v));
                out.push_back({path, std::move(w)});
            }
        } else if (trailing.kind == StepKind::Text) {
            std::vector<int> cp = path;
            cp.push_back(0);
            int j = 0;
            for (auto& c : x.children) {
                ++j;
                cp.back() = j;
                if (!c.is_text) continue;
                bool kept = whole || m.count(cp);
                if (kept) out.push_back({cp, c});
            }
        } else {
            out.push_back({path, materialize(x, path, m, whole)});
        }
    }

    std::vector<int> cp = path;
    cp.push_back(0);
    int j = 0;
    for (auto& c : x.children) {
        ++j;
        cp.back() = j;
        if (whole || m.count(cp))
            collect_matches(c, cp, m, whole, q, last_tag, out);
    }
}

} // namespace

bool satisfies(const XmlNode& x, const Step& step) { return step_matches(x, step); }

std::optional<XmlTree> subtree(const XmlTree& doc, const XPathExpr& q) {
    Marks m;
    std::vector<int> path{1};
    if (!subtree_marks(doc.root, path, q, 0, m)) return std::nullopt;
    XmlTree out;
    auto it = m.find(path);
    out.root = materialize(doc.root, path, m, it != m.end() && it->second == kWhole);
    return out;
}

namespace {

std::optional<NumberedNode> prune_numbered(const NumberedNode& n, const Marks& m,
                                           bool inside_whole) {
    auto it = m.find(n.path);
    bool whole = inside_whole || (it != m.end() && it->second == kWhole);
    if (!whole && it == m.end()) return std::nullopt;
    if (whole) return n;
    NumberedNode out = n;
    out.children.clear();
    for (auto& c : n.children)
        if (auto kept = prune_numbered(c, m, false)) out.children.push_back(*kept);
    return out;
}

} // namespace

std::optional<NumberedTree> subtree_numbered(const NumberedTree& doc,
                                             const XPathExpr& q) {
    XmlTree plain = strip_numbering(doc);
    Marks m;
    std::vector<int> path{1};
    if (!subtree_marks(plain.root, path, q, 0, m)) return std::nullopt;
    auto root = prune_numbered(doc.root, m, false);
    if (!root) return std::nullopt;
    NumberedTree out;
    out.root = std::move(*root);
    return out;
}

std::vector<XmlNode> extract_answer(const std::optional<XmlTree>& sub,
                                    const XPathExpr& q) {
    std::vector<XmlNode> out;
    if (!sub) return out;
    int lt = last_tag_step(q);
    // The returned subtree is already pruned; treat everything as kept.
    struct Scan {
        const XPathExpr& q;
        int lt;
        std::vector<XmlNode>& out;
        void run(const XmlNode& x) {
            if (x.is_text) return;
            if (lt >= 0 && x.tag == q.steps[static_cast<size_t>(lt)].name) {
                const Step& trailing = q.steps.back();
                if (trailing.kind == StepKind::Attr) {
                    if (const std::string* v = x.attr(trailing.name)) {
                        XmlNode w = XmlNode::element(trailing.name);
                        if (!v->empty()) w.children.push_back(XmlNode::text_node(*v));
                        out.push_back(std::move(w));
                    }
                } else if (trailing.kind == StepKind::Text) {
                    for (auto& c : x.children)
                        if (c.is_text) out.push_back(c);
                } else {
                    out.push_back(x);
                }
            }
            for (auto& c : x.children) run(c);
        }
    };
    Scan{q, lt, out}.run(sub->root);
    return out;
}

// ---------------------------------------------------------------------------
// Concrete-tree expansion of wildcard and descendant steps

namespace {

struct Expander {
    std::set<std::string> seen;
    std::vector<XPathExpr> out;

    void emit(const XPathExpr& q) {
        std::string key = print_xpath(q);
        if (seen.insert(key).second) out.push_back(q);
    }

    // Expand wildcards inside a condition against the subtree of x.
    // Returns nullopt when a nested path cannot match below x at all.
    std::optional<CondPtr> expand_cond(const XmlNode& x, const CondPtr& c) {
        switch (c->kind) {
        case CondKind::TagEq:
        case CondKind::AttrEq: return c;
        case CondKind::And: {
            auto a = expand_cond(x, c->lhs);
            auto b = expand_cond(x, c->rhs);
            if (!a || !b) return std::nullopt;
            return Cond::conj(*a, *b);
        }
        case CondKind::Or: {
            auto a = expand_cond(x, c->lhs);
            auto b = expand_cond(x, c->rhs);
            if (!a && !b) return std::nullopt;
            if (!a) return b;
            if (!b) return a;
            return Cond::disj(*a, *b);
        }
        case CondKind::Path: {
            if (is_core(c->path)) return c;
            Expander nested;
            int j = 0;
            std::vector<XmlNode const*> kids;
            for (auto& ch : x.children) {
                ++j;
                if (!ch.is_text) nested.match(ch, c->path, 0, {});
            }
            if (nested.out.empty()) return std::nullopt;
            CondPtr acc;
            for (auto& v : nested.out) {
                CondPtr pc = Cond::nested(v);
                acc = acc ? Cond::disj(acc, pc) : pc;
            }
            return acc;
        }
        }
        return std::nullopt;
    }

    void match(const XmlNode& x, const XPathExpr& q, size_t i,
               std::vector<Step> acc) {
        if (x.is_text) return;
        const Step& s = q.steps[i];
        switch (s.kind) {
        case StepKind::Tag:
        case StepKind::TagCond: {
            if (x.tag != s.name) return;
            Step st = s;
            if (s.cond) {
                auto c = expand_cond(x, s.cond);
                if (!c) return;
                st.cond = *c;
            }
            acc.push_back(st);
            proceed(x, q, i, std::move(acc));
            return;
        }
        case StepKind::Wildcard: {
            Step st;
            st.kind = StepKind::Tag;
            st.name = x.tag;
            acc.push_back(st);
            proceed(x, q, i, std::move(acc));
            return;
        }
        case StepKind::DescendantTag: {
            if (s.name == "*" || x.tag == s.name) {
                auto acc2 = acc;
                Step st;
                st.kind = StepKind::Tag;
                st.name = x.tag;
                acc2.push_back(st);
                proceed(x, q, i, std::move(acc2));
            }
            // keep descending: x becomes an anonymous intermediate step
            Step st;
            st.kind = StepKind::Tag;
            st.name = x.tag;
            acc.push_back(st);
            for (auto& c : x.children)
                if (!c.is_text) match(c, q, i, acc);
            return;
        }
        case StepKind::Attr:
        case StepKind::Text: return; // handled in proceed()
        }
    }

    void proceed(const XmlNode& x, const XPathExpr& q, size_t i, std::vector<Step> acc) {
        if (i + 1 == q.steps.size()) {
            XPathExpr e;
            e.steps = std::move(acc);
            emit(e);
            return;
        }
        const Step& next = q.steps[i + 1];
        if (next.kind == StepKind::Attr) {
            if (x.attr(next.name)) {
                acc.push_back(next);
                XPathExpr e;
                e.steps = std::move(acc);
                emit(e);
            }
            return;
        }
        if (next.kind == StepKind::Text) {
            bool has_text = false;
            if (!x.terminal())
                for (auto& c : x.children)
                    if (c.is_text) has_text = true;
            if (has_text) {
                acc.push_back(next);
                XPathExpr e;
                e.steps = std::move(acc);
                emit(e);
            }
            return;
        }
        for (auto& c : x.children)
            if (!c.is_text) match(c, q, i + 1, acc);
    }
};

} // namespace

std::vector<XPathExpr> expand_on_tree(const XmlTree& doc, const XPathExpr& q) {
    if (is_core(q)) return {q};
    Expander ex;
    ex.match(doc.root, q, 0, {});
    std::sort(ex.out.begin(), ex.out.end(),
              [](const XPathExpr& a, const XPathExpr& b) {
                  return print_xpath(a) < print_xpath(b);
              });
    return ex.out;
}

XmlNode wrap_result(const std::vector<XmlNode>& forest) {
    XmlNode r = XmlNode::element("result");
    r.children = forest;
    return r;
}

XmlNode answer(const XmlTree& doc, const XPathExpr& q) {
    std::vector<XPathExpr> cores = expand_on_tree(doc, q);
    Marks union_marks;
    struct Key {
        std::vector<int> path;
        std::string kind;
        bool operator<(const Key& o) const {
            return path != o.path ? path < o.path : kind < o.kind;
        }
    };
    std::map<Key, XmlNode> items;
    std::vector<std::pair<const XPathExpr*, Marks>> runs;
    for (auto& cq : cores) {
        Marks m;
        std::vector<int> path{1};
        if (!subtree_marks(doc.root, path, cq, 0, m)) continue;
        for (auto& [p, k] : m) mark(union_marks, p, k);
        runs.emplace_back(&cq, std::move(m));
    }
    // Re-collect matches under the union of all prunings so shared elements
    // merge their branches.
    for (auto& [cq, m] : runs) {
        std::vector<Item> got;
        std::vector<int> root_path{1};
        collect_matches(doc.root, root_path, union_marks, false, *cq,
                        last_tag_step(*cq), got);
        const Step& trailing = cq->steps.back();
        std::string kind =
            trailing.kind == StepKind::Attr  ? "@" + trailing.name
            : trailing.kind == StepKind::Text ? "text"
                                              : "tag";
        for (auto& it : got)
            items.insert({{it.path, kind}, std::move(it.node)});
        (void)m;
    }
    std::vector<XmlNode> forest;
    forest.reserve(items.size());
    for (auto& [k, n] : items) forest.push_back(n);
    return wrap_result(forest);
}

} // namespace oracle
} // namespace xlq
