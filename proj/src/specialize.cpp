#include "xlq/specialize.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "xlq/error.hpp"

namespace xlq {

// ---------------------------------------------------------------------------
// FE

CondPtr fe_cond(const CondPtr& c) {
    switch (c->kind) {
    case CondKind::TagEq: {
        XPathExpr p;
        Step s;
        s.kind = StepKind::Tag;
        s.name = c->name;
        p.steps.push_back(s);
        return Cond::nested(std::move(p));
    }
    case CondKind::AttrEq: {
        XPathExpr p;
        Step s;
        s.kind = StepKind::Attr;
        s.name = c->name;
        p.steps.push_back(s);
        return Cond::nested(std::move(p));
    }
    case CondKind::And: return Cond::conj(fe_cond(c->lhs), fe_cond(c->rhs));
    case CondKind::Or: return Cond::disj(fe_cond(c->lhs), fe_cond(c->rhs));
    case CondKind::Path: return Cond::nested(fe(c->path));
    }
    return c;
}

XPathExpr fe(const XPathExpr& q) {
    XPathExpr out;
    for (const Step& s : q.steps) {
        Step t = s;
        if (s.cond) t.cond = fe_cond(s.cond);
        out.steps.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schema graph view

namespace {

// A schema position: the rules whose heads can stand at it plus the type
// numbers of terminal facts that can stand at it.
struct Ctx {
    std::string tag;
    std::vector<int> rules; // indices into Program.rules
    std::set<int> fact_types;

    bool empty() const { return rules.empty() && fact_types.empty(); }
    std::set<int> types(const Program& p) const {
        std::set<int> out = fact_types;
        for (int r : rules) out.insert(p.rules[static_cast<size_t>(r)].head_type);
        return out;
    }
};

std::set<int> terminal_types(const Program& p, const std::string& tag) {
    std::set<int> out;
    if (const auto* entries = p.pt(tag))
        for (auto& en : *entries)
            if (!en.from_rule) out.insert(en.tn.begin(), en.tn.end());
    return out;
}

Ctx root_ctx(const Program& p, const std::string& tag) {
    Ctx c;
    c.tag = tag;
    for (size_t i = 0; i < p.rules.size(); ++i)
        if (p.rules[i].head_type == 1 && p.rules[i].tag == tag)
            c.rules.push_back(static_cast<int>(i));
    if (terminal_types(p, tag).count(1)) c.fact_types.insert(1);
    return c;
}

Ctx child_ctx(const Program& p, const Ctx& cur, const std::string& tag) {
    Ctx c;
    c.tag = tag;
    std::set<int> want;
    for (int ri : cur.rules)
        for (auto& a : p.rules[static_cast<size_t>(ri)].body)
            if (!a.is_attr && a.pred == tag) want.insert(a.type);
    std::set<int> seen_rules;
    std::set<int> tt = terminal_types(p, tag);
    for (int t : want) {
        for (size_t i = 0; i < p.rules.size(); ++i)
            if (p.rules[i].tag == tag && p.rules[i].head_type == t &&
                seen_rules.insert(static_cast<int>(i)).second)
                c.rules.push_back(static_cast<int>(i));
        if (tt.count(t)) c.fact_types.insert(t);
    }
    std::sort(c.rules.begin(), c.rules.end());
    return c;
}

std::vector<std::string> child_tags_of(const Program& p, const Ctx& cur) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (int ri : cur.rules)
        for (auto& a : p.rules[static_cast<size_t>(ri)].body)
            if (!a.is_attr && seen.insert(a.pred).second) out.push_back(a.pred);
    return out;
}

bool ctx_has_attr(const Program& p, const Ctx& cur, const std::string& att) {
    for (int ri : cur.rules)
        for (auto& a : p.rules[static_cast<size_t>(ri)].body)
            if (a.is_attr && a.pred == att) return true;
    return false;
}

bool ctx_has_text(const Program& p, const Ctx& cur) {
    for (int ri : cur.rules)
        for (auto& a : p.rules[static_cast<size_t>(ri)].body)
            if (!a.is_attr && a.pred == kUnlabeledTag) return true;
    return false;
}

void reachable_tags(const Program& p, const Ctx& cur, std::set<std::string>& out,
                    std::set<int>& visited_rules) {
    out.insert(cur.tag);
    for (int ri : cur.rules) {
        if (!visited_rules.insert(ri).second) continue;
        for (auto& a : p.rules[static_cast<size_t>(ri)].body) {
            if (a.is_attr) continue;
            Ctx sub = child_ctx(p, Ctx{cur.tag, {ri}, {}}, a.pred);
            reachable_tags(p, sub, out, visited_rules);
        }
    }
}

// ---------------------------------------------------------------------------
// Expansion over the schema graph (mirrors the oracle's tree expansion)

struct SchemaExpander {
    const Program& p;
    std::set<std::string> seen;
    std::vector<XPathExpr> out;

    void emit(XPathExpr q) {
        std::string key = print_xpath(q);
        if (seen.insert(key).second) out.push_back(std::move(q));
    }

    std::optional<CondPtr> expand_cond(const Ctx& cur, const CondPtr& c) {
        switch (c->kind) {
        case CondKind::TagEq:
        case CondKind::AttrEq: return c;
        case CondKind::And: {
            auto a = expand_cond(cur, c->lhs);
            auto b = expand_cond(cur, c->rhs);
            if (!a || !b) return std::nullopt;
            return Cond::conj(*a, *b);
        }
        case CondKind::Or: {
            auto a = expand_cond(cur, c->lhs);
            auto b = expand_cond(cur, c->rhs);
            if (!a && !b) return std::nullopt;
            if (!a) return b;
            if (!b) return a;
            return Cond::disj(*a, *b);
        }
        case CondKind::Path: {
            if (is_core(c->path)) return c;
            SchemaExpander nested{p, {}, {}};
            for (auto& t : child_tags_of(p, cur))
                nested.match(child_ctx(p, cur, t), c->path, 0, {});
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

    void match(const Ctx& cur, const XPathExpr& q, size_t i, std::vector<Step> acc) {
        if (cur.empty()) return;
        const Step& s = q.steps[i];
        switch (s.kind) {
        case StepKind::Tag:
        case StepKind::TagCond: {
            if (cur.tag != s.name) return;
            Step st = s;
            if (s.cond) {
                auto c = expand_cond(cur, s.cond);
                if (!c) return;
                st.cond = *c;
            }
            acc.push_back(st);
            proceed(cur, q, i, std::move(acc));
            return;
        }
        case StepKind::Wildcard: {
            Step st;
            st.kind = StepKind::Tag;
            st.name = cur.tag;
            acc.push_back(st);
            proceed(cur, q, i, std::move(acc));
            return;
        }
        case StepKind::DescendantTag: {
            if (s.name == "*" || cur.tag == s.name) {
                auto acc2 = acc;
                Step st;
                st.kind = StepKind::Tag;
                st.name = cur.tag;
                acc2.push_back(st);
                proceed(cur, q, i, std::move(acc2));
            }
            Step st;
            st.kind = StepKind::Tag;
            st.name = cur.tag;
            acc.push_back(st);
            for (auto& t : child_tags_of(p, cur))
                match(child_ctx(p, cur, t), q, i, acc);
            return;
        }
        case StepKind::Attr:
        case StepKind::Text: return;
        }
    }

    void proceed(const Ctx& cur, const XPathExpr& q, size_t i, std::vector<Step> acc) {
        if (i + 1 == q.steps.size()) {
            XPathExpr e;
            e.steps = std::move(acc);
            emit(std::move(e));
            return;
        }
        const Step& next = q.steps[i + 1];
        if (next.kind == StepKind::Attr) {
            if (ctx_has_attr(p, cur, next.name)) {
                acc.push_back(next);
                XPathExpr e;
                e.steps = std::move(acc);
                emit(std::move(e));
            }
            return;
        }
        if (next.kind == StepKind::Text) {
            if (ctx_has_text(p, cur)) {
                acc.push_back(next);
                XPathExpr e;
                e.steps = std::move(acc);
                emit(std::move(e));
            }
            return;
        }
        for (auto& t : child_tags_of(p, cur))
            match(child_ctx(p, cur, t), q, i + 1, acc);
    }
};

std::string root_tag_of(const Program& p) {
    if (!p.rules.empty()) {
        for (auto& r : p.rules)
            if (r.head_type == 1) return r.tag;
    }
    for (auto& [tag, entries] : p.registry)
        for (auto& en : entries)
            if (!en.from_rule && en.tn.count(1)) return tag;
    return {};
}

} // namespace

std::vector<XPathExpr> expand(const XPathExpr& q, const Program& p) {
    if (is_core(q)) return {q};
    SchemaExpander ex{p, {}, {}};
    std::string root = root_tag_of(p);
    if (!q.steps.empty() && !root.empty()) ex.match(root_ctx(p, root), q, 0, {});
    std::sort(ex.out.begin(), ex.out.end(),
              [](const XPathExpr& a, const XPathExpr& b) {
                  return print_xpath(a) < print_xpath(b);
              });
    return ex.out;
}

// ---------------------------------------------------------------------------
// Or-branch splitting (DNF over every condition in the query)

namespace {

std::vector<XPathExpr> path_variants(const XPathExpr& q);

void cond_variants(const CondPtr& c, std::vector<CondPtr>& out) {
    switch (c->kind) {
    case CondKind::TagEq:
    case CondKind::AttrEq: out.push_back(c); return;
    case CondKind::Or:
        cond_variants(c->lhs, out);
        cond_variants(c->rhs, out);
        return;
    case CondKind::And: {
        std::vector<CondPtr> ls, rs;
        cond_variants(c->lhs, ls);
        cond_variants(c->rhs, rs);
        for (auto& l : ls)
            for (auto& r : rs) out.push_back(Cond::conj(l, r));
        return;
    }
    case CondKind::Path:
        for (auto& v : path_variants(c->path)) out.push_back(Cond::nested(v));
        return;
    }
}

std::vector<XPathExpr> path_variants(const XPathExpr& q) {
    std::vector<XPathExpr> acc{XPathExpr{}};
    for (const Step& s : q.steps) {
        if (!s.cond) {
            for (auto& v : acc) v.steps.push_back(s);
            continue;
        }
        std::vector<CondPtr> cs;
        cond_variants(s.cond, cs);
        std::vector<XPathExpr> next;
        for (auto& v : acc)
            for (auto& c : cs) {
                XPathExpr w = v;
                Step t = s;
                t.cond = c;
                w.steps.push_back(std::move(t));
                next.push_back(std::move(w));
            }
        acc = std::move(next);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Specialized-rule compilation for one and-only variant

// An atom requirement at one position.
struct Requirement {
    enum Kind { Child, Attr, Text } kind = Child;
    std::string name; // child tag or attribute name
    CondPtr nested;   // nested-path condition to compile below (Child only)
};

void cond_requirements(const CondPtr& c, std::vector<Requirement>& out) {
    switch (c->kind) {
    case CondKind::TagEq: out.push_back({Requirement::Child, c->name, nullptr}); return;
    case CondKind::AttrEq: out.push_back({Requirement::Attr, c->name, nullptr}); return;
    case CondKind::And:
    case CondKind::Or: // variants are and-only; Or is defensive
        cond_requirements(c->lhs, out);
        cond_requirements(c->rhs, out);
        return;
    case CondKind::Path: {
        if (c->path.steps.empty()) return;
        const Step& first = c->path.steps[0];
        if (first.kind == StepKind::Attr) {
            out.push_back({Requirement::Attr, first.name, nullptr});
        } else if (first.kind == StepKind::Text) {
            out.push_back({Requirement::Text, kUnlabeledTag, nullptr});
        } else {
            out.push_back({Requirement::Child, first.name, c});
        }
        return;
    }
    }
}

constexpr int kRolePending = -3; // path atom link, resolved by compile_path

struct VariantCompiler {
    const Program& p;
    VarPool pool;
    std::vector<SpecRule> rules;
    int next_role = 0;
    std::map<std::pair<std::string, int>, int> closure_roles;

    explicit VariantCompiler(const Program& prog) : p(prog) {}

    int fresh_role() { return next_role++; }

    static SchemaRule instantiate(const SchemaRule& r, VarPool& pool) {
        std::map<int, TermPtr> ren;
        std::function<TermPtr(const TermPtr&)> go = [&](const TermPtr& t) -> TermPtr {
            switch (t->kind) {
            case Kind::Var: {
                auto it = ren.find(t->var_id);
                if (it == ren.end())
                    it = ren.emplace(t->var_id, Term::var(pool.fresh(), t->sym)).first;
                return it->second;
            }
            case Kind::Text:
            case Kind::Int: return t;
            case Kind::Seq: {
                std::vector<TermPtr> items;
                for (auto& a : t->args) items.push_back(go(a));
                return Term::seq(std::move(items), t->tail ? go(t->tail) : nullptr);
            }
            case Kind::Comp: {
                std::vector<TermPtr> args;
                for (auto& a : t->args) args.push_back(go(a));
                return Term::comp(t->sym, std::move(args));
            }
            }
            return t;
        };
        SchemaRule out = r;
        out.head_pattern = go(r.head_pattern);
        out.head_node = go(r.head_node);
        for (auto& a : out.body) {
            a.value = go(a.value);
            a.node = go(a.node);
        }
        return out;
    }

    // Whole-subtree rules for (tag, head type), unpruned, shared per plan.
    int closure_rule_role(const std::string& tag, int head_type) {
        auto key = std::make_pair(tag, head_type);
        auto it = closure_roles.find(key);
        if (it != closure_roles.end()) return it->second;
        int role = fresh_role();
        closure_roles[key] = role;
        for (size_t i = 0; i < p.rules.size(); ++i) {
            const SchemaRule& r = p.rules[i];
            if (r.tag != tag || r.head_type != head_type) continue;
            SpecRule sr;
            sr.rule = instantiate(r, pool);
            sr.role = role;
            for (auto& a : sr.rule.body) {
                sr.child_roles.push_back(a.is_attr ? kRoleFactsOnly
                                                   : closure_rule_role(a.pred, a.type));
                sr.no_facts.push_back(0);
            }
            rules.push_back(std::move(sr));
        }
        return closure_roles.at(key);
    }

    struct PositionResult {
        int role = kRoleFactsOnly;
        Ctx ctx;
        bool ok = false;
        std::vector<int> emitted; // indices into rules
    };

    bool dead = false;

    // Compile the tag positions of `q` from step i over context `cur`.
    // The final tag position keeps its whole subtree unless the query ends
    // with @att or text().
    std::vector<PositionResult> compile_path(const XPathExpr& q, size_t i, Ctx cur) {
        std::vector<PositionResult> out;
        int lt = last_tag_step(q);
        if (lt < static_cast<int>(i)) {
            dead = true;
            return out;
        }
        for (size_t j = i; j <= static_cast<size_t>(lt); ++j) {
            const Step& s = q.steps[j];
            if (cur.tag != s.name || cur.empty()) {
                dead = true;
                return out;
            }
            PositionResult pr =
                compile_position(q, j, cur, static_cast<int>(j) == lt);
            if (!pr.ok) {
                dead = true;
                out.push_back(std::move(pr));
                return out;
            }
            // wire the previous position's path atoms to this position
            if (!out.empty()) {
                for (int ridx : out.back().emitted) {
                    SpecRule& sr = rules[static_cast<size_t>(ridx)];
                    link_path_atom(sr, s.name, pr.role);
                }
            }
            out.push_back(pr);
            if (static_cast<int>(j) < lt) cur = child_ctx(p, cur, q.steps[j + 1].name);
        }
        return out;
    }

    static void link_path_atom(SpecRule& sr, const std::string& tag, int role) {
        for (size_t bi = 0; bi < sr.rule.body.size(); ++bi)
            if (!sr.rule.body[bi].is_attr && sr.rule.body[bi].pred == tag &&
                sr.child_roles[bi] == kRolePending) {
                sr.child_roles[bi] = role;
                return;
            }
        // merged with a condition atom: link the facts-only atom instead
        for (size_t bi = 0; bi < sr.rule.body.size(); ++bi)
            if (!sr.rule.body[bi].is_attr && sr.rule.body[bi].pred == tag &&
                sr.child_roles[bi] == kRoleFactsOnly) {
                sr.child_roles[bi] = role;
                return;
            }
    }

    PositionResult compile_position(const XPathExpr& q, size_t j, const Ctx& cur,
                                    bool is_last_tag) {
        PositionResult pr;
        pr.ctx = cur;
        const Step& s = q.steps[j];
        bool trailing = is_last_tag && !q.steps.back().is_tag_like();
        bool whole_here = is_last_tag && !trailing;

        std::vector<Requirement> reqs;
        if (s.cond) cond_requirements(s.cond, reqs);

        std::optional<Requirement> path_req;
        if (!is_last_tag) {
            path_req = Requirement{Requirement::Child, q.steps[j + 1].name, nullptr};
        } else if (trailing) {
            if (q.steps.back().kind == StepKind::Attr)
                path_req = Requirement{Requirement::Attr, q.steps.back().name, nullptr};
            else
                path_req = Requirement{Requirement::Text, kUnlabeledTag, nullptr};
        }

        if (whole_here && reqs.empty()) {
            // plain whole subtree: closure rules, resolved per (tag, type)
            for (int ri : cur.rules) {
                const SchemaRule& r = p.rules[static_cast<size_t>(ri)];
                closure_rule_role(r.tag, r.head_type);
            }
            pr.role = kRoleClosure;
            pr.ok = !cur.empty();
            return pr;
        }

        pr.role = fresh_role();
        bool any_rule = false;
        for (int ri : cur.rules) {
            int idx = emit_pruned_rule(ri, reqs, path_req, whole_here, pr.role);
            if (idx >= 0) {
                any_rule = true;
                pr.emitted.push_back(idx);
            }
        }
        bool reqs_text_only = !reqs.empty();
        for (auto& r : reqs)
            if (r.kind != Requirement::Text) reqs_text_only = false;
        bool fact_ok = is_last_tag && !cur.fact_types.empty() && !path_req &&
                       (reqs.empty() || reqs_text_only);
        pr.ok = any_rule || fact_ok;
        return pr;
    }

    // Emit one pruned (and condition-ordered) rule for the position.
    // Returns the rule index, or -1 when a mandatory requirement is missing.
    int emit_pruned_rule(int ri, const std::vector<Requirement>& reqs,
                         const std::optional<Requirement>& path_req, bool whole_here,
                         int role) {
        const SchemaRule& orig = p.rules[static_cast<size_t>(ri)];
        SchemaRule inst = instantiate(orig, pool);

        auto find_atom = [&](bool attr, const std::string& name) -> int {
            for (size_t ai = 0; ai < inst.body.size(); ++ai)
                if (inst.body[ai].is_attr == attr && inst.body[ai].pred == name)
                    return static_cast<int>(ai);
            return -1;
        };

        SpecRule sr;
        sr.role = role;
        sr.rule = inst;
        sr.rule.body.clear();
        sr.child_roles.clear();
        sr.no_facts.clear();
        std::set<std::string> cond_child_tags;
        std::set<std::string> cond_attr_names;

        for (auto& r : reqs) {
            bool attr = r.kind == Requirement::Attr;
            std::string want = r.kind == Requirement::Text ? kUnlabeledTag : r.name;
            int ai = find_atom(attr, want);
            if (ai < 0) return -1;
            int child_role = kRoleFactsOnly;
            bool structural = false;
            if (r.nested) {
                const XPathExpr& np = r.nested->path;
                structural = np.steps.size() > 1 || np.steps[0].cond != nullptr;
                Ctx sub = child_ctx(p, Ctx{inst.tag, {ri}, {}}, want);
                auto nested = compile_nested(np, sub);
                if (!nested.ok) return -1;
                child_role = nested.role;
                if (structural && child_role == kRoleFactsOnly)
                    return -1; // nothing structural can witness the path
            } else if (!attr) {
                // witness children carrying structure resolve whole rules
                const BodyAtom& a = inst.body[static_cast<size_t>(ai)];
                bool has_rules =
                    !child_ctx(p, Ctx{inst.tag, {ri}, {}}, want).rules.empty();
                if (has_rules && r.kind == Requirement::Child)
                    child_role = closure_rule_role(a.pred, a.type);
            }
            sr.rule.body.push_back(inst.body[static_cast<size_t>(ai)]);
            sr.child_roles.push_back(child_role);
            sr.no_facts.push_back(structural ? 1 : 0);
            if (attr)
                cond_attr_names.insert(want);
            else
                cond_child_tags.insert(want);
        }

        if (whole_here) {
            for (auto& a : inst.body) {
                bool already = a.is_attr ? cond_attr_names.count(a.pred) > 0
                                         : cond_child_tags.count(a.pred) > 0;
                if (already) continue;
                sr.rule.body.push_back(a);
                sr.child_roles.push_back(a.is_attr
                                             ? kRoleFactsOnly
                                             : closure_rule_role(a.pred, a.type));
                sr.no_facts.push_back(0);
            }
        } else if (path_req) {
            bool attr = path_req->kind == Requirement::Attr;
            std::string want =
                path_req->kind == Requirement::Text ? kUnlabeledTag : path_req->name;
            int ai = find_atom(attr, want);
            if (ai < 0) return -1;
            const BodyAtom& a = inst.body[static_cast<size_t>(ai)];
            if (attr || path_req->kind == Requirement::Text) {
                if (!(attr ? cond_attr_names.count(want) : cond_child_tags.count(want))) {
                    sr.rule.body.push_back(a);
                    sr.child_roles.push_back(kRoleFactsOnly);
                    sr.no_facts.push_back(0);
                }
            } else {
                bool shares_cond_tag = cond_child_tags.count(want) > 0;
                bool merged_with_nested = false;
                if (shares_cond_tag)
                    for (size_t ci = 0; ci < sr.rule.body.size(); ++ci)
                        if (!sr.rule.body[ci].is_attr && sr.rule.body[ci].pred == want &&
                            sr.child_roles[ci] != kRoleFactsOnly)
                            merged_with_nested = true;
                if (!shares_cond_tag) {
                    BodyAtom atom = a;
                    sr.rule.body.push_back(atom);
                    sr.child_roles.push_back(kRolePending);
                    sr.no_facts.push_back(0);
                } else if (merged_with_nested) {
                    // a nested condition owns the shared atom: the main path
                    // gets its own unconstrained copy
                    BodyAtom atom = a;
                    atom.value = Term::var(pool.fresh(), a.value->sym + "P");
                    atom.node = Term::seq({Term::var(pool.fresh(), "")}, inst.head_node);
                    sr.rule.body.push_back(atom);
                    sr.child_roles.push_back(kRolePending);
                    sr.no_facts.push_back(0);
                }
                // plain equality condition on the path tag: the condition
                // atom doubles as the path atom (linked later)
            }
        }

        if (sr.rule.body.empty()) return -1;
        int idx = static_cast<int>(rules.size());
        rules.push_back(std::move(sr));
        return idx;
    }

    struct NestedResult {
        bool ok = false;
        int role = kRoleFactsOnly;
    };
    std::map<std::string, NestedResult> nested_memo;

    NestedResult compile_nested(const XPathExpr& path, const Ctx& first_ctx) {
        std::string key = print_xpath(path) + "|" + first_ctx.tag;
        for (int r : first_ctx.rules) key += "," + std::to_string(r);
        auto it = nested_memo.find(key);
        if (it != nested_memo.end()) return it->second;

        NestedResult out;
        if (path.steps.empty()) {
            nested_memo[key] = out;
            return out;
        }
        const Step& first = path.steps[0];
        if (!first.is_tag_like()) {
            out.ok = true; // attribute/text existence has no rule component
            nested_memo[key] = out;
            return out;
        }
        bool saved = dead;
        dead = false;
        auto positions = compile_path(path, 0, first_ctx);
        bool failed = dead || positions.empty() || !positions.back().ok;
        dead = saved;
        if (failed) {
            // a single-tag existence can still be witnessed by terminal facts
            if (path.steps.size() == 1 && !first.cond &&
                !first_ctx.fact_types.empty())
                out.ok = true;
            nested_memo[key] = out;
            return out;
        }
        out.ok = true;
        out.role = positions[0].role;
        nested_memo[key] = out;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Pattern instantiation

bool cond_has_equality(const CondPtr& c) {
    switch (c->kind) {
    case CondKind::TagEq:
    case CondKind::AttrEq: return true;
    case CondKind::And:
    case CondKind::Or: return cond_has_equality(c->lhs) || cond_has_equality(c->rhs);
    case CondKind::Path:
        for (auto& s : c->path.steps)
            if (s.cond && cond_has_equality(s.cond)) return true;
        return false;
    }
    return false;
}

bool cond_text_only(const CondPtr& c) {
    switch (c->kind) {
    case CondKind::TagEq:
    case CondKind::AttrEq: return false;
    case CondKind::And:
    case CondKind::Or: return cond_text_only(c->lhs) && cond_text_only(c->rhs);
    case CondKind::Path:
        return c->path.steps.size() == 1 && c->path.steps[0].kind == StepKind::Text;
    }
    return false;
}

int leftmost_cond_step(const XPathExpr& q) {
    for (size_t i = 0; i < q.steps.size(); ++i)
        if (q.steps[i].kind == StepKind::TagCond) return static_cast<int>(i);
    return -1;
}

struct PatternBuilder {
    const Program& p;
    VarPool& pool;

    static std::string capital(const std::string& s) {
        std::string out = s;
        if (!out.empty())
            out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
        return out;
    }

    TermPtr fresh_instance(const RegistryEntry& en) const {
        std::vector<TermPtr> args;
        for (auto& t : en.child_tags)
            args.push_back(Term::var(pool.fresh(), capital(t)));
        if (en.child_tags.empty() && !en.from_rule)
            args.push_back(Term::var(pool.fresh(), "Value"));
        std::vector<TermPtr> avars;
        for (auto& a : en.attr_names)
            avars.push_back(Term::var(pool.fresh(), capital(a)));
        args.push_back(Term::seq(avars));
        return Term::comp(en.pattern->sym, std::move(args));
    }

    static int slot_of(const RegistryEntry& en, const std::string& tag) {
        for (size_t i = 0; i < en.child_tags.size(); ++i)
            if (en.child_tags[i] == tag) return static_cast<int>(i);
        return -1;
    }
    static int attr_of(const RegistryEntry& en, const std::string& att) {
        for (size_t i = 0; i < en.attr_names.size(); ++i)
            if (en.attr_names[i] == att) return static_cast<int>(i);
        return -1;
    }

    static std::optional<TermPtr> bind_arg(const TermPtr& inst, const TermPtr& slot_term,
                                           const TermPtr& value) {
        auto u = unify(slot_term, value);
        if (!u.ok()) return std::nullopt;
        return u.subst.apply(inst);
    }

    std::vector<TermPtr> apply_cond(const RegistryEntry& en, const TermPtr& inst,
                                    const CondPtr& c) const {
        switch (c->kind) {
        case CondKind::TagEq: {
            int slot = slot_of(en, c->name);
            if (slot < 0) return {};
            auto u = bind_arg(inst, inst->args[static_cast<size_t>(slot)],
                              Term::text(c->value));
            return u ? std::vector<TermPtr>{*u} : std::vector<TermPtr>{};
        }
        case CondKind::AttrEq: {
            int a = attr_of(en, c->name);
            if (a < 0) return {};
            const TermPtr& attrs = inst->args.back();
            auto u = bind_arg(inst, attrs->args[static_cast<size_t>(a)],
                              Term::text(c->value));
            return u ? std::vector<TermPtr>{*u} : std::vector<TermPtr>{};
        }
        case CondKind::And: {
            std::vector<TermPtr> out;
            for (auto& l : apply_cond(en, inst, c->lhs))
                for (auto& r : apply_cond(en, l, c->rhs)) out.push_back(r);
            return out;
        }
        case CondKind::Or: {
            std::vector<TermPtr> out = apply_cond(en, inst, c->lhs);
            for (auto& r : apply_cond(en, inst, c->rhs)) out.push_back(r);
            return out;
        }
        case CondKind::Path: {
            if (!cond_has_equality(c)) return {inst};
            const XPathExpr& path = c->path;
            if (path.steps.empty() || !path.steps[0].is_tag_like()) return {inst};
            int slot = slot_of(en, path.steps[0].name);
            if (slot < 0) return {};
            std::vector<TermPtr> out;
            for (auto& np : patterns_for_path(path, 0)) {
                auto u = bind_arg(inst, inst->args[static_cast<size_t>(slot)], np);
                if (u) out.push_back(*u);
            }
            return out;
        }
        }
        return {};
    }

    // Pattern instances for steps[i..]: the tag's patterns with its own
    // condition bound and every deeper conditioned step embedded through the
    // connecting slots.
    std::vector<TermPtr> patterns_for_path(const XPathExpr& q, size_t i) const {
        int r = -1;
        for (int k = static_cast<int>(q.steps.size()) - 1; k >= static_cast<int>(i);
             --k) {
            const Step& s = q.steps[static_cast<size_t>(k)];
            if (s.is_tag_like() && s.cond && cond_has_equality(s.cond)) {
                r = k;
                break;
            }
        }
        const auto* entries = p.pt(q.steps[i].name);
        if (!entries) return {};
        std::vector<TermPtr> out;
        for (auto& en : *entries) {
            std::vector<TermPtr> cur{fresh_instance(en)};
            if (q.steps[i].cond) {
                std::vector<TermPtr> next;
                for (auto& t : cur)
                    for (auto& u : apply_cond(en, t, q.steps[i].cond))
                        next.push_back(u);
                cur = std::move(next);
            }
            if (r > static_cast<int>(i)) {
                if (i + 1 >= q.steps.size() || !q.steps[i + 1].is_tag_like()) {
                    cur.clear();
                } else {
                    int slot = slot_of(en, q.steps[i + 1].name);
                    if (slot < 0) {
                        cur.clear();
                    } else {
                        std::vector<TermPtr> nested = patterns_for_path(q, i + 1);
                        std::vector<TermPtr> next;
                        for (auto& t : cur)
                            for (auto& np : nested) {
                                auto u = bind_arg(
                                    t, t->args[static_cast<size_t>(slot)], np);
                                if (u) next.push_back(*u);
                            }
                        cur = std::move(next);
                    }
                }
            }
            for (auto& t : cur) out.push_back(t);
        }
        return out;
    }
};

} // namespace

std::vector<TermPtr> pt_query(const XPathExpr& core, const Program& p) {
    int gs = leftmost_cond_step(core);
    if (gs < 0) return {};
    bool any_eq = false;
    for (auto& s : core.steps)
        if (s.cond && cond_has_equality(s.cond)) any_eq = true;
    if (!any_eq) return {};
    VarPool pool;
    PatternBuilder pb{p, pool};
    XPathExpr tail;
    tail.steps.assign(core.steps.begin() + gs, core.steps.end());
    while (!tail.steps.empty() && !tail.steps.back().is_tag_like())
        tail.steps.pop_back();
    std::vector<TermPtr> out;
    std::set<std::string> seen;
    for (auto& t : pb.patterns_for_path(tail, 0))
        if (seen.insert(print_term(t)).second) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------------------
// Plan assembly

namespace {

struct UnitBuilder {
    const Program& p;

    // (pred, type) pairs whose parent context is not unique in the schema.
    std::set<std::pair<std::string, int>> ambiguous_pairs() const {
        std::map<std::pair<std::string, int>, std::set<std::pair<std::string, int>>>
            parents;
        for (auto& r : p.rules)
            for (auto& a : r.body)
                parents[{a.pred, a.type}].insert({r.tag, r.head_type});
        std::set<std::pair<std::string, int>> out;
        for (auto& [pair, ps] : parents)
            if (ps.size() > 1) out.insert(pair);
        return out;
    }

    std::optional<PlanUnit> build(const XPathExpr& variant) {
        if (variant.steps.empty()) return std::nullopt;
        int lt = last_tag_step(variant);
        if (lt < 0) return std::nullopt;

        VariantCompiler vc(p);
        Ctx root = root_ctx(p, variant.steps[0].name);
        if (root.empty()) return std::nullopt;
        auto positions = vc.compile_path(variant, 0, root);
        if (vc.dead || positions.size() != static_cast<size_t>(lt) + 1 ||
            !positions.back().ok)
            return std::nullopt;

        PlanUnit unit;
        unit.query = variant;
        unit.rules = std::move(vc.rules);
        unit.closure_roles = std::move(vc.closure_roles);
        for (auto& pr : positions)
            unit.step_contexts.push_back({pr.ctx.tag, pr.ctx.types(p)});
        auto ambiguous = ambiguous_pairs();
        if (!ambiguous.empty()) {
            for (auto& sr : unit.rules) {
                for (auto& a : sr.rule.body)
                    if (ambiguous.count({a.pred, a.type})) unit.validate_answers = true;
            }
            for (auto& g0 : positions)
                for (int t : g0.ctx.types(p))
                    if (ambiguous.count({g0.ctx.tag, t})) unit.validate_answers = true;
        }

        int gs = leftmost_cond_step(variant);
        unit.goal_step = gs >= 0 ? gs : lt;
        const auto& gpos = positions[static_cast<size_t>(unit.goal_step)];
        std::set<int> ctx_types = gpos.ctx.types(p);

        bool any_eq = false;
        bool text_only = true;
        for (auto& s : variant.steps)
            if (s.cond) {
                if (cond_has_equality(s.cond)) any_eq = true;
                if (!cond_text_only(s.cond)) text_only = false;
            }

        const std::string goal_tag = variant.steps[static_cast<size_t>(unit.goal_step)].name;
        const auto* entries = p.pt(goal_tag);
        if (!entries) return std::nullopt;

        VarPool pool;
        std::set<std::string> seen_goals;
        auto add_goal = [&](const TermPtr& pattern, int type) {
            Goal g;
            g.pred = goal_tag;
            g.pattern = pattern;
            g.node = Term::var(pool.fresh(), "Node");
            g.type = type;
            g.role = gpos.role;
            g.rules_only = gs >= 0 && !text_only;
            std::string key = print_term(pattern) + "#" + std::to_string(type);
            if (seen_goals.insert(key).second) unit.goals.push_back(std::move(g));
        };

        if (gs >= 0 && any_eq) {
            for (auto& pat : pt_query(variant, p)) {
                for (int r : p.tn(pat))
                    if (ctx_types.count(r)) add_goal(pat, r);
            }
        } else {
            std::set<int> types;
            for (auto& en : *entries)
                for (int r : en.tn)
                    if (ctx_types.count(r)) types.insert(r);
            for (int r : types) add_goal(Term::var(pool.fresh(), "Pattern"), r);
        }
        if (unit.goals.empty()) return std::nullopt;

        unit.completion = needs_completion(variant, unit, lt);
        return unit;
    }

    bool needs_completion(const XPathExpr& variant, const PlanUnit& unit, int lt) {
        for (auto& g : unit.goals) {
            if (g.pattern->kind == Kind::Var) continue;
            if (unit.goal_step == lt) return true;
            if (bound_slot_collides(g.pattern, variant, unit.goal_step, lt))
                return true;
        }
        return false;
    }

    const RegistryEntry* entry_for(const TermPtr& pattern) const {
        for (auto& [tag, entries] : p.registry)
            for (auto& en : entries)
                if (en.pattern->sym == pattern->sym &&
                    en.pattern->args.size() == pattern->args.size())
                    return &en;
        return nullptr;
    }

    bool bound_slot_collides(const TermPtr& pattern, const XPathExpr& variant,
                             int goal_step, int lt) const {
        const std::string& last_tag = variant.steps[static_cast<size_t>(lt)].name;
        TermPtr cur = pattern;
        for (int j = goal_step + 1; j <= lt; ++j) {
            if (cur->kind != Kind::Comp) break;
            const RegistryEntry* en = entry_for(cur);
            if (!en) break;
            int slot =
                PatternBuilder::slot_of(*en, variant.steps[static_cast<size_t>(j)].name);
            if (slot < 0) break;
            TermPtr v = cur->args[static_cast<size_t>(slot)];
            if (v->kind == Kind::Var) break;
            return true; // the remaining path runs through a bound slot
        }
        return bound_reach(pattern, last_tag);
    }

    bool bound_reach(const TermPtr& pattern, const std::string& last_tag) const {
        if (pattern->kind != Kind::Comp) return false;
        const RegistryEntry* en = entry_for(pattern);
        if (!en) return false;
        for (size_t i = 0; i < en->child_tags.size() && i < pattern->args.size(); ++i) {
            const TermPtr& v = pattern->args[i];
            if (v->kind == Kind::Var) continue;
            const std::string& t = en->child_tags[i];
            if (v->kind == Kind::Comp) {
                if (tag_reaches(t, last_tag)) return true;
                if (bound_reach(v, last_tag)) return true;
            } else if (t == last_tag) {
                return true;
            }
        }
        return false;
    }

    bool tag_reaches(const std::string& from, const std::string& target) const {
        std::set<std::string> out;
        std::set<int> visited;
        for (size_t i = 0; i < p.rules.size(); ++i)
            if (p.rules[i].tag == from)
                reachable_tags(p, Ctx{from, {static_cast<int>(i)}, {}}, out, visited);
        out.insert(from);
        return out.count(target) > 0;
    }
};

} // namespace

QueryPlan plan_query(const Program& p, const XPathExpr& q) {
    QueryPlan plan;
    plan.original = q;
    plan.cores = expand(q, p);
    UnitBuilder ub{p};
    for (auto& core : plan.cores)
        for (auto& variant : path_variants(core))
            if (auto unit = ub.build(variant)) plan.units.push_back(std::move(*unit));
    return plan;
}

std::vector<SchemaRule> specialize_rules(const Program& p, const XPathExpr& core) {
    UnitBuilder ub{p};
    std::vector<SchemaRule> out;
    std::set<std::string> seen;
    bool any = false;
    for (auto& variant : path_variants(core)) {
        auto unit = ub.build(variant);
        if (!unit) continue;
        any = true;
        for (auto& sr : unit->rules) {
            std::string key = print_rule(sr.rule);
            if (seen.insert(key).second) out.push_back(sr.rule);
        }
    }
    if (!any) throw EmptySpecialization(print_xpath(core));
    return out;
}

void reorder(std::vector<SchemaRule>& rules, const XPathExpr& core) {
    std::map<std::string, std::vector<std::pair<std::string, bool>>> cond_order;
    std::function<void(const std::string&, const CondPtr&)> collect =
        [&](const std::string& tag, const CondPtr& c) {
            switch (c->kind) {
            case CondKind::TagEq: cond_order[tag].emplace_back(c->name, false); break;
            case CondKind::AttrEq: cond_order[tag].emplace_back(c->name, true); break;
            case CondKind::And:
            case CondKind::Or:
                collect(tag, c->lhs);
                collect(tag, c->rhs);
                break;
            case CondKind::Path: {
                if (c->path.steps.empty()) break;
                const Step& first = c->path.steps[0];
                if (first.is_tag_like()) {
                    cond_order[tag].emplace_back(first.name, false);
                    for (auto& s : c->path.steps)
                        if (s.cond) collect(s.name, s.cond);
                } else if (first.kind == StepKind::Attr) {
                    cond_order[tag].emplace_back(first.name, true);
                } else {
                    cond_order[tag].emplace_back(kUnlabeledTag, false);
                }
                break;
            }
            }
        };
    for (auto& s : core.steps)
        if (s.cond) collect(s.name, s.cond);

    for (auto& r : rules) {
        auto it = cond_order.find(r.tag);
        if (it == cond_order.end()) continue;
        std::vector<BodyAtom> front, rest;
        std::vector<bool> taken(r.body.size(), false);
        for (auto& [name, is_attr] : it->second) {
            for (size_t i = 0; i < r.body.size(); ++i) {
                if (taken[i]) continue;
                if (r.body[i].pred == name && r.body[i].is_attr == is_attr) {
                    front.push_back(r.body[i]);
                    taken[i] = true;
                    break;
                }
            }
        }
        for (size_t i = 0; i < r.body.size(); ++i)
            if (!taken[i]) rest.push_back(r.body[i]);
        r.body = std::move(front);
        for (auto& a : rest) r.body.push_back(a);
    }
}

std::vector<Goal> goals(const XPathExpr& core, const Program& p) {
    UnitBuilder ub{p};
    std::vector<Goal> out;
    std::set<std::string> seen;
    for (auto& variant : path_variants(core)) {
        auto unit = ub.build(variant);
        if (!unit) continue;
        for (auto& g : unit->goals) {
            std::string key =
                g.pred + "#" + print_term(g.pattern) + "#" + std::to_string(g.type);
            if (seen.insert(key).second) out.push_back(g);
        }
    }
    return out;
}

std::string explain(const Program& p, const XPathExpr& q) {
    std::string out;
    out += "query: " + print_xpath(q) + "\n";
    out += "fe: " + print_xpath(fe(q)) + "\n";
    QueryPlan plan = plan_query(p, q);
    for (auto& c : plan.cores) out += "expansion: " + print_xpath(c) + "\n";
    int vi = 0;
    for (auto& u : plan.units) {
        out += "variant " + std::to_string(++vi) + ": " + print_xpath(u.query) + "\n";
        for (auto& g : u.goals)
            out += "goal: " + g.pred + "(" + print_term(g.pattern) + "," +
                   print_term(g.node) + "," + std::to_string(g.type) + ")\n";
        std::set<std::string> seen;
        for (auto& sr : u.rules) {
            std::string line = print_rule(sr.rule);
            if (seen.insert(line).second) out += "rule: " + line + "\n";
        }
        if (u.completion) out += "completion: yes\n";
    }
    return out;
}

} // namespace xlq
