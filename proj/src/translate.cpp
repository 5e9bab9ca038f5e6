#include "xlq/translate.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <tuple>

#include "xlq/error.hpp"

namespace xlq {

std::vector<int> reversed(std::vector<int> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

namespace {

std::string capitalize(const std::string& s) {
    std::string out = s;
    if (!out.empty() && std::islower(static_cast<unsigned char>(out[0])))
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    if (out.empty() || (!std::isalpha(static_cast<unsigned char>(out[0])) && out[0] != '_'))
        out = "V" + out;
    std::string clean;
    for (char c : out)
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') clean += c;
    return clean.empty() ? "V" : clean;
}

std::string unique_name(std::string base, std::set<std::string>& used) {
    std::string n = std::move(base);
    int i = 2;
    while (used.count(n)) n = n + std::to_string(i++);
    used.insert(n);
    return n;
}

struct Translator {
    Program out;
    VarPool pool;
    // rule dedup: (tag, head type, child type) identifies the signature in
    // its parent context
    std::map<std::tuple<std::string, int, int>, size_t> rule_ids;

    void record(const NumberedNode& e) {
        out.max_type = std::max(out.max_type, e.type);
        if (e.terminal) return; // handled by the parent sweep
        int child_type = e.child_type;
        out.max_type = std::max(out.max_type, child_type);

        make_rule(e, child_type);

        // Attribute facts first, then terminal and unlabeled children in
        // document order; non-terminal children become their own records.
        for (auto& [k, v] : e.attrs) {
            Fact f;
            f.pred = k;
            f.value = v;
            f.node = reversed(e.path);
            f.type = child_type;
            f.group = reversed(e.path);
            out.facts.push_back(std::move(f));
        }
        for (auto& c : e.children) {
            if (!c.terminal) continue;
            Fact f;
            f.pred = c.tag;
            f.value = c.value;
            f.node = reversed(c.path);
            f.type = child_type;
            f.group = reversed(e.path);
            out.facts.push_back(std::move(f));
            register_terminal(c.tag, child_type);
        }
        for (auto& c : e.children)
            if (!c.terminal) record(c);
    }

    void make_rule(const NumberedNode& e, int child_type) {
        auto key = std::make_tuple(e.tag, e.type, child_type);
        if (rule_ids.count(key)) return;

        SchemaRule r;
        r.tag = e.tag;
        r.head_type = e.type;
        r.child_type = child_type;
        for (auto& c : e.children)
            if (std::find(r.child_tags.begin(), r.child_tags.end(), c.tag) ==
                r.child_tags.end())
                r.child_tags.push_back(c.tag);
        for (auto& [k, v] : e.attrs) r.attr_names.push_back(k);

        std::set<std::string> used;
        std::vector<TermPtr> slot_vars;
        std::vector<std::string> child_node_names;
        for (auto& t : r.child_tags) {
            std::string n = unique_name(capitalize(t), used);
            slot_vars.push_back(Term::var(pool.fresh(n), n));
            child_node_names.push_back("Node" + capitalize(t));
        }
        std::vector<TermPtr> attr_vars;
        for (auto& a : r.attr_names) {
            std::string n = unique_name(capitalize(a), used);
            attr_vars.push_back(Term::var(pool.fresh(n), n));
        }
        std::string head_node_name = "Node" + capitalize(e.tag);
        if (std::find(child_node_names.begin(), child_node_names.end(),
                      head_node_name) != child_node_names.end())
            head_node_name += "s";
        r.head_node = Term::var(pool.fresh(head_node_name), head_node_name);

        std::vector<TermPtr> pattern_args = slot_vars;
        pattern_args.push_back(Term::seq(attr_vars));
        r.head_pattern = Term::comp(e.tag + "type", std::move(pattern_args));

        for (size_t i = 0; i < r.child_tags.size(); ++i) {
            BodyAtom a;
            a.pred = r.child_tags[i];
            a.value = slot_vars[i];
            const std::string& nn = child_node_names[i];
            a.node = Term::seq({Term::var(pool.fresh(nn), nn)}, r.head_node);
            a.type = child_type;
            out.max_type = std::max(out.max_type, child_type);
            r.body.push_back(std::move(a));
        }
        for (size_t i = 0; i < r.attr_names.size(); ++i) {
            BodyAtom a;
            a.pred = r.attr_names[i];
            a.value = attr_vars[i];
            a.node = r.head_node;
            a.type = child_type;
            a.is_attr = true;
            r.body.push_back(std::move(a));
        }

        rule_ids[key] = out.rules.size();
        register_pattern(r);
        out.rules.push_back(std::move(r));
    }

    void register_pattern(const SchemaRule& r) {
        auto& entries = out.registry[r.tag];
        for (auto& en : entries) {
            if (en.from_rule && en.child_tags == r.child_tags &&
                en.attr_names == r.attr_names) {
                en.tn.insert(r.head_type);
                return;
            }
        }
        RegistryEntry en;
        en.pattern = r.head_pattern;
        en.child_tags = r.child_tags;
        en.attr_names = r.attr_names;
        en.from_rule = true;
        en.tn.insert(r.head_type);
        entries.push_back(std::move(en));
    }

    void register_terminal(const std::string& tag, int type) {
        auto& entries = out.registry[tag];
        for (auto& en : entries) {
            if (!en.from_rule) {
                en.tn.insert(type);
                return;
            }
        }
        RegistryEntry en;
        std::string n = capitalize(tag);
        en.pattern = Term::comp(tag + "type",
                                {Term::var(pool.fresh(n), n), Term::seq({})});
        en.from_rule = false;
        en.tn.insert(type);
        entries.push_back(std::move(en));
    }
};

} // namespace

Program translate(const NumberedTree& doc) {
    Translator tr;
    if (doc.root.terminal) {
        Fact f;
        f.pred = doc.root.tag;
        f.value = doc.root.value;
        f.node = {1};
        f.type = 1;
        f.group = {1};
        tr.out.facts.push_back(std::move(f));
        tr.register_terminal(doc.root.tag, 1);
    } else {
        tr.record(doc.root);
    }
    return std::move(tr.out);
}

const std::vector<RegistryEntry>* Program::pt(const std::string& tag) const {
    auto it = registry.find(tag);
    return it == registry.end() ? nullptr : &it->second;
}

std::set<int> Program::tn(const TermPtr& pattern) const {
    if (pattern->kind != Kind::Comp) return {};
    for (auto& [tag, entries] : registry) {
        for (auto& en : entries) {
            if (en.pattern->sym != pattern->sym ||
                en.pattern->args.size() != pattern->args.size())
                continue;
            // attribute list length must match as well
            const TermPtr& ea = en.pattern->args.back();
            const TermPtr& pa = pattern->args.back();
            if (pa->kind == Kind::Seq && ea->args.size() != pa->args.size())
                continue;
            if (unify(en.pattern, pattern).ok()) return en.tn;
        }
    }
    return {};
}

namespace {

TermPtr atom_term(const std::string& pred, const TermPtr& value, const TermPtr& node,
                  int type) {
    return Term::comp(pred, {value, node, Term::integer(type)});
}

} // namespace

std::string print_rule(const SchemaRule& r) {
    std::string out = print_term(
        atom_term(r.tag, r.head_pattern, r.head_node, r.head_type));
    out += " :- ";
    for (size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += ",";
        const BodyAtom& a = r.body[i];
        out += print_term(atom_term(a.pred, a.value, a.node, a.type));
    }
    out += ".";
    return out;
}

std::string print_fact(const Fact& f) {
    return print_term(atom_term(f.pred, Term::text(f.value),
                                Term::seq_of_ints(f.node), f.type)) +
           ".";
}

SchemaRule parse_rule(const std::string& line, VarPool& pool) {
    TermParser p(line, pool);
    TermPtr head = p.parse_term_prefix();
    if (head->kind != Kind::Comp || head->args.size() != 3 ||
        head->args[2]->kind != Kind::Int)
        throw XlqError("rule syntax: bad head in " + line);
    p.expect(':');
    p.expect('-');
    std::vector<TermPtr> atoms;
    atoms.push_back(p.parse_term_prefix());
    while (p.try_eat(',')) atoms.push_back(p.parse_term_prefix());
    p.expect('.');
    if (!p.at_end()) throw XlqError("rule syntax: trailing input in " + line);

    SchemaRule r;
    r.tag = head->sym;
    r.head_pattern = head->args[0];
    r.head_node = head->args[1];
    r.head_type = static_cast<int>(head->args[2]->num);
    if (r.head_pattern->kind != Kind::Comp || r.head_pattern->args.empty() ||
        r.head_node->kind != Kind::Var)
        throw XlqError("rule syntax: bad head pattern in " + line);

    for (auto& a : atoms) {
        if (a->kind != Kind::Comp || a->args.size() != 3 ||
            a->args[2]->kind != Kind::Int)
            throw XlqError("rule syntax: bad body atom in " + line);
        BodyAtom b;
        b.pred = a->sym;
        b.value = a->args[0];
        b.node = a->args[1];
        b.type = static_cast<int>(a->args[2]->num);
        b.is_attr = b.node->kind == Kind::Var;
        r.body.push_back(std::move(b));
        if (r.body.back().is_attr)
            r.attr_names.push_back(r.body.back().pred);
        else
            r.child_tags.push_back(r.body.back().pred);
    }
    if (!r.body.empty()) r.child_type = r.body.front().type;
    return r;
}

std::string print_rules(const Program& p) {
    std::string out;
    for (auto& r : p.rules) {
        out += print_rule(r);
        out += "\n";
    }
    return out;
}

std::string print_facts(const Program& p) {
    std::string out;
    for (auto& f : p.facts) {
        out += print_fact(f);
        out += "\n";
    }
    return out;
}

std::string print_registry(const Program& p) {
    std::string out;
    for (auto& [tag, entries] : p.registry) {
        for (auto& en : entries) {
            out += quote_atom(tag);
            out += ": ";
            out += print_term(en.pattern);
            out += " @ {";
            bool first = true;
            for (int t : en.tn) {
                if (!first) out += ",";
                out += std::to_string(t);
                first = false;
            }
            out += "}";
            if (!en.from_rule) out += " terminal";
            out += "\n";
        }
    }
    return out;
}

std::vector<RebuildAtom> facts_as_atoms(const Program& p) {
    std::vector<RebuildAtom> out;
    out.reserve(p.facts.size());
    for (auto& f : p.facts)
        out.push_back({f.pred, Term::text(f.value), f.node, f.type});
    return out;
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace {

struct NodeChoice {
    // rule >= 0: element materialized through rules[rule];
    // rule == -1: terminal element with tag `tag`.
    int rule = -1;
    std::string tag;
    int type = 0;
};

struct AtomOption {
    // Assignment of every prefix this interpretation pins down.
    std::vector<std::pair<std::vector<int>, NodeChoice>> assigns;
    bool as_attr = false;
};

struct RuleIndex {
    const std::vector<SchemaRule>& rules;
    std::map<std::pair<std::string, int>, std::vector<int>> by_head;
    std::map<std::pair<std::string, int>, std::vector<int>> by_child;
    std::map<std::pair<std::string, int>, std::vector<int>> by_attr;

    explicit RuleIndex(const std::vector<SchemaRule>& rs) : rules(rs) {
        for (size_t i = 0; i < rs.size(); ++i) {
            const SchemaRule& r = rs[i];
            by_head[{r.tag, r.head_type}].push_back(static_cast<int>(i));
            for (auto& a : r.body)
                (a.is_attr ? by_attr : by_child)[{a.pred, a.type}].push_back(
                    static_cast<int>(i));
        }
    }

    // Chains of rule indices from a root rule (head type 1) down to `rule`,
    // of exactly `depth` rules.
    std::vector<std::vector<int>> chains_to(int rule, int depth) {
        auto key = std::make_pair(rule, depth);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::vector<std::vector<int>> out;
        if (depth >= 1) {
            if (depth == 1) {
                if (rules[rule].head_type == 1) out.push_back({rule});
            } else {
                const SchemaRule& r = rules[rule];
                auto pit = by_child.find({r.tag, r.head_type});
                if (pit != by_child.end()) {
                    for (int p : pit->second) {
                        for (auto chain : chains_to(p, depth - 1)) {
                            chain.push_back(rule);
                            out.push_back(std::move(chain));
                        }
                    }
                }
            }
        }
        memo_[key] = out;
        return out;
    }

private:
    std::map<std::pair<int, int>, std::vector<std::vector<int>>> memo_;
};

std::vector<int> prefix_of(const std::vector<int>& path, size_t len) {
    return std::vector<int>(path.begin(), path.begin() + len);
}

void chain_assigns(const RuleIndex& ri, const std::vector<int>& chain,
                   const std::vector<int>& path, AtomOption& opt) {
    for (size_t d = 0; d < chain.size(); ++d) {
        NodeChoice c;
        c.rule = chain[d];
        c.tag = ri.rules[chain[d]].tag;
        c.type = ri.rules[chain[d]].head_type;
        opt.assigns.emplace_back(prefix_of(path, d + 1), c);
    }
}

struct NodeBuild {
    std::string tag;
    int type = 0;
    int rule = -1;
    std::map<std::string, std::string> attrs;
    std::optional<std::string> value;
    bool has_element_children = false;
};

struct Builder {
    const RuleIndex& ri;
    std::map<std::vector<int>, NodeBuild> nodes;

    NodeBuild& node_at(const std::vector<int>& path, const std::string& tag, int type,
                       int rule) {
        auto [it, inserted] = nodes.try_emplace(path);
        NodeBuild& n = it->second;
        if (inserted) {
            n.tag = tag;
            n.type = type;
            n.rule = rule;
        } else {
            if (n.tag != tag || n.type != type)
                throw InconsistentAtoms("node " + dotted(path) + " assigned both " +
                                        n.tag + "/" + std::to_string(n.type) + " and " +
                                        tag + "/" + std::to_string(type));
            if (n.rule < 0) n.rule = rule;
        }
        return n;
    }

    void set_value(NodeBuild& n, const std::vector<int>& path, const std::string& v) {
        if (n.value && *n.value != v)
            throw InconsistentAtoms("two values for node " + dotted(path));
        if (n.has_element_children)
            throw InconsistentAtoms("node " + dotted(path) +
                                    " has both a value and element children");
        n.value = v;
    }

    void set_attr(NodeBuild& n, const std::string& name, const std::string& v,
                  const std::vector<int>& path) {
        auto it = n.attrs.find(name);
        if (it != n.attrs.end() && it->second != v)
            throw InconsistentAtoms("attribute " + name + " of node " + dotted(path) +
                                    " assigned two values");
        n.attrs[name] = v;
    }

    // Expand a bound pattern instance below an element. Synthesized children
    // take their slot position as the child index.
    void expand_pattern(const std::vector<int>& path, int rule, const TermPtr& inst) {
        const SchemaRule& r = ri.rules[rule];
        auto u = unify(r.head_pattern, inst);
        if (!u.ok())
            throw InconsistentAtoms("pattern " + print_term(inst) +
                                    " does not match rule for " + r.tag);
        NodeBuild& owner =
            node_at(path, r.tag, r.head_type, rule);
        const Subst& s = u.subst;
        for (size_t i = 0; i < r.child_tags.size(); ++i) {
            TermPtr v = s.apply(r.head_pattern->args[i]);
            if (v->is_var()) continue;
            std::vector<int> cp = path;
            cp.push_back(static_cast<int>(i) + 1);
            if (v->kind == Kind::Text || v->kind == Kind::Int) {
                std::string val =
                    v->kind == Kind::Text ? v->sym : std::to_string(v->num);
                NodeBuild& c = node_at(cp, r.child_tags[i], r.child_type, -1);
                set_value(c, cp, val);
                owner.has_element_children = true;
            } else if (v->kind == Kind::Comp) {
                int crule = find_rule(r.child_tags[i], r.child_type, v);
                expand_pattern(cp, crule, v);
                owner.has_element_children = true;
            }
        }
        TermPtr attrs = s.apply(r.head_pattern->args.back());
        if (attrs->kind == Kind::Seq) {
            for (size_t j = 0; j < attrs->args.size() && j < r.attr_names.size(); ++j) {
                TermPtr v = attrs->args[j];
                if (v->is_var()) continue;
                std::string val =
                    v->kind == Kind::Text ? v->sym : std::to_string(v->num);
                set_attr(owner, r.attr_names[j], val, path);
            }
        }
    }

    int find_rule(const std::string& tag, int type, const TermPtr& inst) const {
        auto it = ri.by_head.find({tag, type});
        if (it == ri.by_head.end())
            throw InconsistentAtoms("no rule for " + tag + "/" + std::to_string(type));
        for (int r : it->second) {
            const SchemaRule& rr = ri.rules[r];
            if (rr.head_pattern->args.size() != inst->args.size()) continue;
            if (inst->args.back()->kind == Kind::Seq &&
                inst->args.back()->args.size() !=
                    rr.head_pattern->args.back()->args.size())
                continue;
            return r;
        }
        throw InconsistentAtoms("no rule for " + tag + "/" + std::to_string(type) +
                                " matching " + print_term(inst));
    }

    NumberedNode materialize(const std::vector<int>& path) {
        const NodeBuild& b = nodes.at(path);
        NumberedNode n;
        n.tag = b.tag;
        n.path = path;
        n.type = b.type;
        if (b.rule >= 0) {
            // attribute order follows the rule
            for (auto& an : ri.rules[b.rule].attr_names) {
                auto it = b.attrs.find(an);
                if (it != b.attrs.end()) n.attrs.emplace_back(an, it->second);
            }
        }
        // children = assigned paths one level below, ordered by index
        std::vector<int> next = path;
        next.push_back(0);
        auto it = nodes.upper_bound(next);
        std::vector<std::vector<int>> kids;
        for (; it != nodes.end(); ++it) {
            const std::vector<int>& p = it->first;
            if (p.size() <= path.size() ||
                !std::equal(path.begin(), path.end(), p.begin()))
                break;
            if (p.size() == path.size() + 1) kids.push_back(p);
        }
        if (b.value) {
            n.terminal = true;
            n.value = *b.value;
            return n;
        }
        for (auto& kp : kids) n.children.push_back(materialize(kp));
        return n;
    }
};

} // namespace

std::optional<NumberedTree> rebuild_doc(const std::vector<SchemaRule>& rules,
                                        const std::vector<RebuildAtom>& atoms,
                                        const Assignments* known) {
    if (atoms.empty()) return std::nullopt;
    RuleIndex ri(rules);

    // Enumerate interpretations per atom.
    struct AtomWork {
        const RebuildAtom* atom;
        std::vector<AtomOption> options;
    };
    std::vector<AtomWork> work;
    work.reserve(atoms.size());
    for (auto& a : atoms) {
        AtomWork w{&a, {}};
        std::vector<int> path = reversed(a.node);
        int depth = static_cast<int>(path.size());
        if (a.term->kind == Kind::Comp) {
            auto it = ri.by_head.find({a.pred, a.type});
            if (it != ri.by_head.end()) {
                for (int r : it->second) {
                    const SchemaRule& rr = ri.rules[r];
                    if (rr.head_pattern->args.size() != a.term->args.size()) continue;
                    for (auto& chain : ri.chains_to(r, depth)) {
                        AtomOption opt;
                        chain_assigns(ri, chain, path, opt);
                        w.options.push_back(std::move(opt));
                    }
                }
            }
        } else {
            // terminal element reading
            if (depth == 1 && rules.empty()) {
                AtomOption opt;
                opt.assigns.emplace_back(path, NodeChoice{-1, a.pred, a.type});
                w.options.push_back(std::move(opt));
            }
            auto it = ri.by_child.find({a.pred, a.type});
            if (it != ri.by_child.end() && depth >= 2) {
                std::set<int> owners(it->second.begin(), it->second.end());
                for (int r : owners) {
                    for (auto& chain : ri.chains_to(r, depth - 1)) {
                        AtomOption opt;
                        chain_assigns(ri, chain, path, opt);
                        opt.assigns.emplace_back(path, NodeChoice{-1, a.pred, a.type});
                        w.options.push_back(std::move(opt));
                    }
                }
            }
            // attribute reading
            auto ia = ri.by_attr.find({a.pred, a.type});
            if (ia != ri.by_attr.end()) {
                std::set<int> owners(ia->second.begin(), ia->second.end());
                for (int r : owners) {
                    for (auto& chain : ri.chains_to(r, depth)) {
                        AtomOption opt;
                        opt.as_attr = true;
                        chain_assigns(ri, chain, path, opt);
                        w.options.push_back(std::move(opt));
                    }
                }
            }
        }
        if (w.options.empty())
            throw InconsistentAtoms("atom " + a.pred + "(" + print_term(a.term) + "," +
                                    print_term(Term::seq_of_ints(a.node)) + "," +
                                    std::to_string(a.type) + ") fits no rule chain");
        work.push_back(std::move(w));
    }

    // Filter options against externally known node assignments.
    if (known) {
        for (auto& w : work) {
            std::vector<AtomOption> keep;
            for (auto& opt : w.options) {
                bool ok = true;
                for (auto& [p, c] : opt.assigns) {
                    auto it = known->find(p);
                    if (it != known->end() &&
                        (it->second.tag != c.tag || it->second.type != c.type)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) keep.push_back(std::move(opt));
            }
            if (keep.empty())
                throw InconsistentAtoms("atom for " + w.atom->pred +
                                        " contradicts known node assignments");
            w.options = std::move(keep);
        }
    }

    // Most-constrained-first backtracking over per-atom interpretations.
    std::sort(work.begin(), work.end(), [](const AtomWork& a, const AtomWork& b) {
        return a.options.size() < b.options.size();
    });

    std::map<std::vector<int>, NodeChoice> chosen;
    std::vector<int> pick(work.size(), -1);
    long budget = 2000000;

    auto compatible = [&](const AtomOption& opt) {
        for (auto& [p, c] : opt.assigns) {
            auto it = chosen.find(p);
            if (it == chosen.end()) continue;
            const NodeChoice& have = it->second;
            if (have.tag != c.tag || have.type != c.type) return false;
            if (have.rule >= 0 && c.rule >= 0 && have.rule != c.rule) return false;
        }
        return true;
    };

    std::function<bool(size_t)> assign = [&](size_t i) -> bool {
        if (i == work.size()) return true;
        for (size_t oi = 0; oi < work[i].options.size(); ++oi) {
            if (--budget < 0)
                throw InconsistentAtoms("reconstruction search budget exhausted");
            const AtomOption& opt = work[i].options[oi];
            if (!compatible(opt)) continue;
            std::vector<std::vector<int>> added;
            std::vector<std::pair<std::vector<int>, NodeChoice>> upgraded;
            for (auto& [p, c] : opt.assigns) {
                auto it = chosen.find(p);
                if (it == chosen.end()) {
                    chosen.emplace(p, c);
                    added.push_back(p);
                } else if (it->second.rule < 0 && c.rule >= 0) {
                    upgraded.emplace_back(p, it->second);
                    it->second = c;
                }
            }
            pick[i] = static_cast<int>(oi);
            if (assign(i + 1)) return true;
            for (auto& p : added) chosen.erase(p);
            for (auto& [p, c] : upgraded) chosen[p] = c;
            pick[i] = -1;
        }
        return false;
    };
    if (!assign(0)) throw InconsistentAtoms("no consistent reading of the atom set");

    // Materialize.
    Builder b{ri, {}};
    for (auto& [p, c] : chosen) b.node_at(p, c.tag, c.type, c.rule);
    for (size_t i = 0; i < work.size(); ++i) {
        const RebuildAtom& a = *work[i].atom;
        const AtomOption& opt = work[i].options[static_cast<size_t>(pick[i])];
        std::vector<int> path = reversed(a.node);
        if (a.term->kind == Kind::Comp) {
            int rule = chosen.at(path).rule;
            b.expand_pattern(path, rule, a.term);
        } else if (opt.as_attr) {
            NodeBuild& owner = b.nodes.at(path);
            std::string val = a.term->kind == Kind::Text ? a.term->sym
                                                         : std::to_string(a.term->num);
            b.set_attr(owner, a.pred, val, path);
        } else {
            NodeBuild& n = b.nodes.at(path);
            std::string val = a.term->kind == Kind::Text ? a.term->sym
                                                         : std::to_string(a.term->num);
            b.set_value(n, path, val);
        }
    }

    // Mark parents that have element children.
    for (auto& [p, n] : b.nodes) {
        if (p.size() <= 1) continue;
        auto parent = prefix_of(p, p.size() - 1);
        auto it = b.nodes.find(parent);
        if (it != b.nodes.end()) {
            if (it->second.value)
                throw InconsistentAtoms("node " + dotted(parent) +
                                        " has both a value and element children");
            it->second.has_element_children = true;
        }
    }

    std::vector<int> root_path{1};
    if (!b.nodes.count(root_path))
        throw InconsistentAtoms("no atom reaches the document root");
    NumberedTree t;
    t.root = b.materialize(root_path);
    return t;
}

} // namespace xlq
