#include "xlq/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "xlq/error.hpp"

namespace xlq {

namespace {

struct AtomInst {
    std::string pred;
    TermPtr value;
    TermPtr node;
    int type = 0;
    int child_role = kRoleFactsOnly;
    bool rules_only = false;
};

struct Frame {
    std::string tag;
    int head_type = 0;
    TermPtr node_term;
};

struct Solver {
    const std::vector<SpecRule>* rules = nullptr;
    const std::map<std::pair<std::string, int>, int>* closure_roles = nullptr;
    bool any_role = false; // unspecialized evaluation ignores roles
    const FactStore* store = nullptr;
    EvalContext* ec = nullptr;
    int depth_bound = 0;
    VarPool pool;

    Subst subst;
    std::vector<int> trail;
    std::vector<Frame> frames;
    std::vector<UsedFact> used;
    std::function<void(const Subst&, const std::vector<Frame>&,
                       const std::vector<UsedFact>&)>
        on_answer;

    SchemaRule rename(const SchemaRule& r) {
        return renamed_rule(r, pool);
    }

    static SchemaRule renamed_rule(const SchemaRule& r, VarPool& pool) {
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

    bool rule_matches_role(const SpecRule& sr, const AtomInst& atom) const {
        if (sr.rule.tag != atom.pred || sr.rule.head_type != atom.type) return false;
        if (any_role) return true;
        if (atom.child_role == kRoleFactsOnly) return false;
        if (atom.child_role == kRoleClosure) {
            auto it = closure_roles->find({atom.pred, atom.type});
            return it != closure_roles->end() && sr.role == it->second;
        }
        return sr.role == atom.child_role;
    }

    void run(std::vector<AtomInst>& agenda, size_t idx) {
        if (idx == agenda.size()) {
            on_answer(subst, frames, used);
            return;
        }
        if (static_cast<int>(frames.size()) > depth_bound)
            throw EngineInvariantViolation(
                "resolution depth exceeds type bound; type monotonicity broken");

        AtomInst atom = agenda[idx];
        if (ec->trace) {
            TermPtr shown = Term::comp(
                atom.pred, {subst.apply(atom.value), subst.apply(atom.node),
                            Term::integer(atom.type)});
            ec->trace("call " + print_term(shown));
        }

        // rules first, in written order
        if (atom.child_role != kRoleFactsOnly || any_role) {
            for (auto& sr : *rules) {
                if (!rule_matches_role(sr, atom)) continue;
                SchemaRule r = rename(sr.rule);
                size_t mark = trail.size();
                if (unify_ext(atom.value, r.head_pattern, subst, trail) &&
                    unify_ext(atom.node, r.head_node, subst, trail)) {
                    frames.push_back({r.tag, r.head_type, r.head_node});
                    std::vector<AtomInst> body;
                    body.reserve(r.body.size());
                    for (size_t bi = 0; bi < r.body.size(); ++bi) {
                        const BodyAtom& a = r.body[bi];
                        int crole = any_role ? 0
                                   : bi < sr.child_roles.size() ? sr.child_roles[bi]
                                                                : kRoleFactsOnly;
                        bool structural =
                            !any_role && bi < sr.no_facts.size() && sr.no_facts[bi];
                        body.push_back(
                            {a.pred, a.value, a.node, a.type, crole, structural});
                    }
                    // leftmost selection: body atoms run before the rest
                    std::vector<AtomInst> next;
                    next.reserve(agenda.size() - idx - 1 + body.size());
                    for (auto& b : body) next.push_back(b);
                    for (size_t k = idx + 1; k < agenda.size(); ++k)
                        next.push_back(agenda[k]);
                    run(next, 0);
                    frames.pop_back();
                }
                undo_trail(subst, trail, mark);
            }
        }

        if (atom.rules_only) return;

        // facts in file order
        TermPtr want_value = subst.apply(atom.value);
        TermPtr want_node = subst.apply(atom.node);
        auto matches = store->retrieve(*ec, atom.pred, want_value, want_node, atom.type);
        for (auto& rf : matches) {
            size_t mark = trail.size();
            if (unify_ext(atom.value, Term::text(rf.fact.value), subst, trail) &&
                unify_ext(atom.node, Term::seq_of_ints(rf.fact.node), subst, trail)) {
                used.push_back({rf.fact, rf.position});
                run(agenda, idx + 1);
                used.pop_back();
            }
            undo_trail(subst, trail, mark);
        }
    }
};

Assignments frame_assigns(const Subst& s, const std::vector<Frame>& frames) {
    Assignments out;
    for (auto& f : frames) {
        TermPtr n = s.apply(f.node_term);
        if (n->kind != Kind::Seq || n->tail) continue;
        std::vector<int> rev;
        bool ok = true;
        for (auto& c : n->args) {
            if (c->kind != Kind::Int) {
                ok = false;
                break;
            }
            rev.push_back(static_cast<int>(c->num));
        }
        if (!ok) continue;
        out[reversed(rev)] = NodeAssign{f.tag, f.head_type};
    }
    return out;
}

} // namespace

std::vector<EngineAnswer> Engine::solve(const Goal& g, const PlanUnit& unit,
                                        EvalContext& ec) const {
    Solver s;
    s.rules = &unit.rules;
    s.closure_roles = &unit.closure_roles;
    s.any_role = false;
    s.store = &store_;
    s.ec = &ec;
    s.depth_bound = program_.max_type + 1;

    std::vector<EngineAnswer> out;
    s.on_answer = [&](const Subst& subst, const std::vector<Frame>& frames,
                      const std::vector<UsedFact>& used) {
        EngineAnswer a;
        a.pattern = subst.apply(g.pattern);
        a.node = subst.apply(g.node);
        a.facts = used;
        a.assigns = frame_assigns(subst, frames);
        out.push_back(std::move(a));
    };
    std::vector<AtomInst> agenda{
        {g.pred, g.pattern, g.node, g.type, g.role, g.rules_only}};
    s.run(agenda, 0);
    return out;
}

namespace {

// Unspecialized rule view: every original rule, roles ignored.
std::vector<SpecRule> plain_rules(const Program& p) {
    std::vector<SpecRule> out;
    out.reserve(p.rules.size());
    for (auto& r : p.rules) {
        SpecRule sr;
        sr.rule = r;
        sr.role = 0;
        sr.child_roles.assign(r.body.size(), 0);
        out.push_back(std::move(sr));
    }
    return out;
}

// Substitution dump for one answer: one Name/value pair per named variable
// of the goal, unbound ones primed, then the node binding.
std::string answer_line(const TermPtr& goal_pattern, const TermPtr& goal_node,
                        const Subst& s) {
    std::string out;
    std::set<int> seen;
    std::function<void(const TermPtr&)> walk = [&](const TermPtr& t) {
        switch (t->kind) {
        case Kind::Var: {
            if (t->sym.empty() || !seen.insert(t->var_id).second) break;
            TermPtr v = s.apply(t);
            if (!out.empty()) out += " ";
            if (v->kind == Kind::Var)
                out += t->sym + "/" + t->sym + "'";
            else
                out += t->sym + "/" + print_term(v);
            break;
        }
        case Kind::Comp:
        case Kind::Seq:
            for (auto& a : t->args) walk(a);
            if (t->kind == Kind::Seq && t->tail) walk(t->tail);
            break;
        default: break;
        }
    };
    if (goal_pattern->kind == Kind::Var) {
        TermPtr v = s.apply(goal_pattern);
        out += goal_pattern->sym.empty() ? "Pattern" : goal_pattern->sym;
        out += "/";
        out += print_term(v);
    } else {
        walk(goal_pattern);
    }
    TermPtr n = s.apply(goal_node);
    if (!out.empty()) out += " ";
    out += "Node/" + print_term(n);
    return out;
}

struct AtomPool {
    std::map<std::string, RebuildAtom> atoms;
    Assignments assigns;

    void add_fact(const Fact& f) {
        RebuildAtom a{f.pred, Term::text(f.value), f.node, f.type};
        std::string key = print_fact(f);
        atoms.emplace(std::move(key), std::move(a));
    }
    void merge_assigns(const Assignments& in) {
        for (auto& [k, v] : in) assigns.emplace(k, v);
    }
    std::vector<RebuildAtom> list() const {
        std::vector<RebuildAtom> out;
        out.reserve(atoms.size());
        for (auto& [k, a] : atoms) out.push_back(a);
        return out;
    }
};

// When several parent contexts share a (pred, type) pair, a derivation can
// fabricate an ancestor chain that no real record supports: the claimed
// records' stored groups must each fit a rule of the claimed tag.
bool chain_ok(const Program& program, const FactStore& store, const PlanUnit& unit,
              const EngineAnswer& a, EvalContext& ec) {
    if (a.node->kind != Kind::Seq || a.node->tail || !a.node->is_ground()) return true;
    std::vector<int> rev;
    for (auto& c : a.node->args) {
        if (c->kind != Kind::Int) return true;
        rev.push_back(static_cast<int>(c->num));
    }
    std::vector<int> path = reversed(rev);

    std::map<std::vector<int>, NodeAssign> claims;
    for (size_t i = 0; i < unit.step_contexts.size() && i < path.size(); ++i) {
        std::vector<int> p(path.begin(), path.begin() + static_cast<long>(i) + 1);
        claims[p] = NodeAssign{unit.step_contexts[i].tag, 0}; // 0 = any type
    }
    for (auto& [p, na] : a.assigns) {
        auto it = claims.find(p);
        if (it != claims.end() && it->second.tag != na.tag) return false;
        claims[p] = na;
    }

    for (auto& [p, na] : claims) {
        std::vector<const SchemaRule*> cands;
        for (auto& r : program.rules)
            if (r.tag == na.tag && (na.type == 0 || r.head_type == na.type))
                cands.push_back(&r);
        if (cands.empty()) continue; // not a record claim
        std::vector<int> gid(p.rbegin(), p.rend());
        std::vector<Fact> facts = store.group_facts(gid, ec.counters);
        if (facts.empty()) continue; // no stored evidence either way
        bool ok = false;
        for (auto* r : cands) {
            bool all = true;
            for (auto& f : facts) {
                bool matched = false;
                for (auto& atom : r->body) {
                    if (atom.pred != f.pred || atom.type != f.type) continue;
                    bool fact_is_attr = f.node.size() == gid.size();
                    if (atom.is_attr == fact_is_attr) {
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    all = false;
                    break;
                }
            }
            if (all) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

struct NumberedItem {
    std::vector<int> path;
    std::string kind; // "tag", "@name", "text"
    XmlNode node;
    bool operator<(const NumberedItem& o) const {
        if (path != o.path) return path < o.path;
        if (kind != o.kind) return kind < o.kind;
        return false;
    }
};

XmlNode strip_numbered_node(const NumberedNode& n) {
    XmlNode e = XmlNode::element(n.tag);
    e.attrs = n.attrs;
    if (n.terminal) {
        if (!n.value.empty()) e.children.push_back(XmlNode::text_node(n.value));
        return e;
    }
    for (auto& c : n.children) {
        if (c.tag == kUnlabeledTag)
            e.children.push_back(XmlNode::text_node(c.value));
        else
            e.children.push_back(strip_numbered_node(c));
    }
    return e;
}

void collect_numbered(const NumberedNode& n, const XPathExpr& core, int lt,
                      std::vector<NumberedItem>& out) {
    if (n.tag == kUnlabeledTag) return;
    if (lt >= 0 && n.tag == core.steps[static_cast<size_t>(lt)].name) {
        const Step& trailing = core.steps.back();
        if (trailing.kind == StepKind::Attr) {
            for (auto& [k, v] : n.attrs)
                if (k == trailing.name) {
                    XmlNode w = XmlNode::element(k);
                    if (!v.empty()) w.children.push_back(XmlNode::text_node(v));
                    out.push_back({n.path, "@" + k, std::move(w)});
                }
        } else if (trailing.kind == StepKind::Text) {
            for (auto& c : n.children)
                if (c.tag == kUnlabeledTag)
                    out.push_back({c.path, "text", XmlNode::text_node(c.value)});
        } else {
            out.push_back({n.path, "tag", strip_numbered_node(n)});
        }
    }
    for (auto& c : n.children) collect_numbered(c, core, lt, out);
}

} // namespace

std::vector<XmlNode> extract_from_numbered(const NumberedTree& doc,
                                           const XPathExpr& core) {
    std::vector<NumberedItem> items;
    collect_numbered(doc.root, core, last_tag_step(core), items);
    std::sort(items.begin(), items.end());
    std::vector<XmlNode> out;
    out.reserve(items.size());
    for (auto& it : items) out.push_back(std::move(it.node));
    return out;
}

EvalResult Engine::evaluate(const XPathExpr& q, const EvalOptions& opt) const {
    return evaluate_plan(plan_query(program_, q), opt);
}

EvalResult Engine::evaluate_plan(const QueryPlan& plan, const EvalOptions& opt) const {
    EvalResult res;
    EvalContext ec;
    ec.use_index = opt.use_index;
    ec.use_cache = opt.use_cache;
    ec.trace = opt.trace;

    std::vector<SpecRule> unspec;
    if (!opt.specialize) unspec = plain_rules(program_);

    AtomPool pool;
    VarPool vars;

    for (auto& unit : plan.units) {
        auto make_solver = [&](bool plain_mode) {
            Solver s;
            s.rules = plain_mode ? &unspec : &unit.rules;
            s.closure_roles = &unit.closure_roles;
            s.any_role = plain_mode;
            s.store = &store_;
            s.ec = &ec;
            s.depth_bound = program_.max_type + 1;
            return s;
        };

        auto pool_solution = [&](const Goal& g, const TermPtr& node, bool fresh) {
            // collect every fact and frame of the derivations of `g` pinned
            // at `node`, over the specialized rules
            Solver s = make_solver(false);
            s.on_answer = [&](const Subst& subst, const std::vector<Frame>& frames,
                              const std::vector<UsedFact>& used) {
                for (auto& uf : used) pool.add_fact(uf.fact);
                pool.merge_assigns(frame_assigns(subst, frames));
            };
            TermPtr pattern =
                fresh ? Term::var(vars.fresh(), "Whole") : g.pattern;
            std::vector<AtomInst> agenda{
                {g.pred, pattern, node, g.type, g.role, fresh ? false : g.rules_only}};
            s.run(agenda, 0);
        };

        std::set<std::string> completed;
        for (auto& g : unit.goals) {
            Solver s = make_solver(!opt.specialize);
            std::vector<EngineAnswer> got;
            s.on_answer = [&](const Subst& subst, const std::vector<Frame>& frames,
                              const std::vector<UsedFact>& used) {
                EngineAnswer a;
                a.pattern = subst.apply(g.pattern);
                a.node = subst.apply(g.node);
                a.facts = used;
                a.assigns = frame_assigns(subst, frames);
                if (unit.validate_answers &&
                    !chain_ok(program_, store_, unit, a, ec))
                    return;
                res.answer_lines.push_back(answer_line(g.pattern, g.node, subst));
                got.push_back(std::move(a));
            };
            std::vector<AtomInst> agenda{
                {g.pred, g.pattern, g.node, g.type, g.role, g.rules_only}};
            s.run(agenda, 0);

            std::set<std::string> repooled;
            for (auto& a : got) {
                if (ec.trace)
                    ec.trace("success " + g.pred + "(" + print_term(a.pattern) + "," +
                             print_term(a.node) + "," + std::to_string(g.type) + ")");
                if (opt.specialize) {
                    for (auto& uf : a.facts) pool.add_fact(uf.fact);
                    pool.merge_assigns(a.assigns);
                } else if (a.node->is_ground()) {
                    // unspecialized derivations touch atoms the answer
                    // document must not carry; re-derive the footprint
                    // through the specialized rules at the matched node
                    std::string key = print_term(a.node);
                    if (repooled.insert(key).second)
                        pool_solution(g, a.node, /*fresh=*/false);
                }
                res.answers.push_back(a);

                if (unit.completion && a.node->is_ground()) {
                    std::string key = g.pred + print_term(a.node) + "#" +
                                      std::to_string(g.type);
                    if (completed.insert(key).second)
                        pool_solution(g, a.node, /*fresh=*/true);
                }
            }
        }
    }

    res.counters = ec.counters;
    auto atoms = pool.list();
    if (!atoms.empty())
        res.answer_doc = rebuild_doc(program_.rules, atoms, &pool.assigns);

    // extraction: scan the merged answer document once per core query
    std::set<std::string> seen_cores;
    std::vector<NumberedItem> items;
    if (res.answer_doc) {
        for (auto& core : plan.cores) {
            if (!seen_cores.insert(print_xpath(core)).second) continue;
            collect_numbered(res.answer_doc->root, core, last_tag_step(core), items);
        }
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end(),
                            [](const NumberedItem& a, const NumberedItem& b) {
                                return a.path == b.path && a.kind == b.kind;
                            }),
                items.end());
    std::vector<XmlNode> forest;
    forest.reserve(items.size());
    for (auto& it : items) forest.push_back(std::move(it.node));
    res.result = oracle::wrap_result(forest);
    return res;
}

} // namespace xlq
