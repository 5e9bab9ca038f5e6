#include "xlq/store.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "xlq/error.hpp"

namespace fs = std::filesystem;

namespace xlq {

namespace {

using RoleSet = std::set<std::pair<std::string, int>>;

struct Roles {
    RoleSet attr;
    RoleSet child;
};

Roles derive_roles(const Program& p) {
    Roles r;
    for (auto& rule : p.rules)
        for (auto& a : rule.body)
            (a.is_attr ? r.attr : r.child).insert({a.pred, a.type});
    if (p.rules.empty())
        for (auto& [tag, entries] : p.registry)
            for (auto& en : entries)
                for (int t : en.tn) r.child.insert({tag, t});
    return r;
}

std::vector<int> derive_group(const Fact& f, const Roles& roles) {
    bool is_attr = roles.attr.count({f.pred, f.type});
    bool is_child = roles.child.count({f.pred, f.type});
    if (is_attr && !is_child) return f.node;
    if (f.node.size() <= 1) return f.node; // root-level fact
    return std::vector<int>(f.node.begin() + 1, f.node.end());
}

Fact parse_fact_line(const std::string& line) {
    VarPool pool;
    TermParser p(line, pool);
    TermPtr t = p.parse_term();
    if (t->kind != Kind::Comp || t->args.size() != 3)
        throw StoreCorrupt("bad fact line: " + line);
    Fact f;
    f.pred = t->sym;
    const TermPtr& v = t->args[0];
    if (v->kind == Kind::Text)
        f.value = v->sym;
    else if (v->kind == Kind::Int)
        f.value = std::to_string(v->num);
    else
        throw StoreCorrupt("fact value must be a constant: " + line);
    const TermPtr& node = t->args[1];
    if (node->kind != Kind::Seq || node->tail)
        throw StoreCorrupt("fact node must be a ground sequence: " + line);
    for (auto& c : node->args) {
        if (c->kind != Kind::Int)
            throw StoreCorrupt("fact node components must be integers: " + line);
        f.node.push_back(static_cast<int>(c->num));
    }
    if (t->args[2]->kind != Kind::Int)
        throw StoreCorrupt("fact type must be an integer: " + line);
    f.type = static_cast<int>(t->args[2]->num);
    return f;
}

} // namespace

IndexData build_indexes(const std::vector<Fact>& facts) {
    IndexData ix;
    ix.index2.resize(facts.size(), 0);
    for (size_t i = 0; i < facts.size(); ++i) {
        auto [it, inserted] =
            ix.groups.try_emplace(facts[i].group, static_cast<long>(i));
        ix.index2[i] = it->second;
        (void)inserted;
    }
    for (size_t i = 0; i < facts.size(); ++i)
        ix.index1[facts[i].pred].push_back(
            {static_cast<long>(i), ix.index2[i]});
    return ix;
}

std::vector<Fact> FactStore::group_facts(const std::vector<int>& group_id,
                                         StoreCounters& c) const {
    std::vector<Fact> out;
    long start = group_start(group_id);
    if (start < 0) return out;
    const std::vector<long>& ix2 = index2();
    long n = fact_count();
    for (long i = start; i < n && ix2[static_cast<size_t>(i)] == start; ++i)
        out.push_back(fact_at(i, c));
    return out;
}

std::string print_index1(const std::map<std::string, std::vector<PosAnnotation>>& ix) {
    std::string out;
    for (auto& [pred, anns] : ix) {
        out += quote_atom(pred);
        out += ":";
        for (auto& a : anns) {
            out += " (";
            out += std::to_string(a.pos);
            out += ",";
            out += std::to_string(a.group);
            out += ")";
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Retrieval (shared between the file-backed and in-memory stores)

namespace {

struct NodeShape {
    enum Mode { Bare, Fixed, Open } mode = Bare;
    std::vector<TermPtr> items; // Fixed / Open
};

NodeShape classify(const TermPtr& node) {
    NodeShape s;
    if (node->kind == Kind::Var) {
        s.mode = NodeShape::Bare;
    } else if (node->kind == Kind::Seq) {
        s.items = node->args;
        s.mode = node->tail ? NodeShape::Open : NodeShape::Fixed;
    } else {
        s.mode = NodeShape::Fixed; // malformed; matches nothing later
    }
    return s;
}

bool ground_int(const TermPtr& t) { return t->kind == Kind::Int; }

std::string group_key(const std::vector<int>& g) {
    return print_term(Term::seq_of_ints(g));
}

} // namespace

std::vector<RetrievedFact> FactStore::retrieve(EvalContext& ec, const std::string& pred,
                                               const TermPtr& value_pattern,
                                               const TermPtr& node_pattern,
                                               int type) const {
    std::vector<RetrievedFact> out;
    auto try_fact = [&](long pos, bool quiet_mismatch) -> void {
        Fact f = fact_at(pos, ec.counters);
        if (f.pred != pred) {
            (void)quiet_mismatch; // other-predicate records never trace
            return;
        }
        bool match = f.type == type;
        if (match) {
            // one joint unification so variables shared between the value
            // and node arguments stay consistent
            auto u = unify(Term::comp("m", {value_pattern, node_pattern}),
                           Term::comp("m", {Term::text(f.value),
                                            Term::seq_of_ints(f.node)}));
            match = u.ok();
        }
        if (!match) {
            if (ec.trace) ec.trace("recovered " + print_fact(f) + " ; fail");
            return;
        }
        if (ec.use_cache) {
            long start = index2()[static_cast<size_t>(pos)];
            ec.group_cache[f.group] = start;
            if (ec.trace)
                ec.trace("recovered " + print_fact(f) + " ; cache " +
                         group_key(f.group) + " -> " + std::to_string(start) +
                         " ; success");
        } else if (ec.trace) {
            ec.trace("recovered " + print_fact(f) + " ; success");
        }
        out.push_back({std::move(f), pos});
    };

    if (!ec.use_index) {
        long n = fact_count();
        for (long i = 0; i < n; ++i) try_fact(i, false);
        return out;
    }

    NodeShape shape = classify(node_pattern);

    // Strategy (a): a ground truncation of the call pattern names the only
    // group(s) that can hold matching facts; scan them through the second
    // index when every needed group is already cached.
    if (ec.use_cache && shape.mode == NodeShape::Fixed && !shape.items.empty()) {
        bool tail_ground = true;
        for (size_t i = 1; i < shape.items.size(); ++i)
            if (!ground_int(shape.items[i])) {
                tail_ground = false;
                break;
            }
        if (tail_ground) {
            bool head_ground = ground_int(shape.items[0]);
            std::vector<int> g_child;
            for (size_t i = 1; i < shape.items.size(); ++i)
                g_child.push_back(static_cast<int>(shape.items[i]->num));
            bool attr_role = attr_preds().count(pred) > 0;

            std::vector<long> starts;
            bool eligible = true;
            auto need = [&](const std::vector<int>& g) {
                auto it = ec.group_cache.find(g);
                if (it == ec.group_cache.end())
                    eligible = false;
                else
                    starts.push_back(it->second);
            };
            need(g_child);
            if (attr_role) {
                if (!head_ground) {
                    eligible = false;
                } else {
                    std::vector<int> g_attr;
                    for (auto& it : shape.items)
                        g_attr.push_back(static_cast<int>(it->num));
                    need(g_attr);
                }
            }
            if (eligible) {
                std::sort(starts.begin(), starts.end());
                starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
                const std::vector<long>& ix2 = index2();
                long n = fact_count();
                for (long m : starts) {
                    if (m < 0 || m >= n)
                        throw StoreCorrupt("group position out of range");
                    ++ec.counters.index2_hits;
                    if (ec.trace)
                        ec.trace("index2 " + pred + " pos " + std::to_string(m));
                    for (long i = m; i < n && ix2[static_cast<size_t>(i)] == m; ++i)
                        try_fact(i, true);
                }
                return out;
            }
        }
    }

    // Strategy (b): first index over the predicate name.
    auto it = index1().find(pred);
    if (it == index1().end()) return out;
    for (auto& ann : it->second) {
        ++ec.counters.index1_hits;
        if (ec.trace) ec.trace("index1 " + pred + " pos " + std::to_string(ann.pos));
        try_fact(ann.pos, false);
    }
    return out;
}

// ---------------------------------------------------------------------------
// In-memory store

namespace {

class MemStore final : public FactStore {
public:
    MemStore(std::vector<Fact> facts, IndexData ix, std::set<std::string> attrs)
        : facts_(std::move(facts)), ix_(std::move(ix)), attrs_(std::move(attrs)) {}

    long fact_count() const override { return static_cast<long>(facts_.size()); }
    Fact fact_at(long pos, StoreCounters& c) const override {
        if (pos < 0 || pos >= fact_count())
            throw StoreCorrupt("fact position out of range");
        ++c.facts_scanned;
        return facts_[static_cast<size_t>(pos)];
    }
    const std::map<std::string, std::vector<PosAnnotation>>& index1() const override {
        return ix_.index1;
    }
    const std::vector<long>& index2() const override { return ix_.index2; }
    const std::set<std::string>& attr_preds() const override { return attrs_; }
    long group_start(const std::vector<int>& gid) const override {
        auto it = ix_.groups.find(gid);
        return it == ix_.groups.end() ? -1 : it->second;
    }

private:
    std::vector<Fact> facts_;
    IndexData ix_;
    std::set<std::string> attrs_;
};

std::set<std::string> attr_pred_names(const Program& p) {
    std::set<std::string> out;
    for (auto& r : p.rules)
        for (auto& a : r.body)
            if (a.is_attr) out.insert(a.pred);
    return out;
}

} // namespace

std::unique_ptr<FactStore> memory_store(const Program& p) {
    return std::make_unique<MemStore>(p.facts, build_indexes(p.facts),
                                      attr_pred_names(p));
}

// ---------------------------------------------------------------------------
// File-backed store

void write_store(const Program& p, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create store directory " + dir);

    auto open_out = [&](const char* name) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) throw IoError(std::string("cannot write ") + name + " in " + dir);
        return f;
    };

    std::vector<long> offsets;
    {
        std::ofstream facts = open_out("facts.lp");
        long off = 0;
        for (auto& f : p.facts) {
            std::string line = print_fact(f);
            line += "\n";
            offsets.push_back(off);
            facts << line;
            off += static_cast<long>(line.size());
        }
    }
    {
        std::ofstream o = open_out("offsets.tab");
        for (size_t i = 0; i < offsets.size(); ++i)
            o << i << " " << offsets[i] << "\n";
    }
    IndexData ix = build_indexes(p.facts);
    {
        std::ofstream o = open_out("index1.tab");
        o << print_index1(ix.index1);
    }
    {
        std::ofstream o = open_out("index2.tab");
        for (size_t i = 0; i < ix.index2.size(); ++i)
            o << i << " " << ix.index2[i] << "\n";
    }
    {
        std::ofstream o = open_out("rules.lp");
        o << print_rules(p);
    }
    {
        std::ofstream o = open_out("registry.tab");
        o << print_registry(p);
    }
}

namespace {

class FileStore final : public FactStore {
public:
    FileStore(std::string path, std::vector<long> offsets, IndexData ix,
              std::set<std::string> attrs, Roles roles)
        : path_(std::move(path)), offsets_(std::move(offsets)), ix_(std::move(ix)),
          attrs_(std::move(attrs)), roles_(std::move(roles)),
          stream_(path_, std::ios::binary) {
        if (!stream_) throw IoError("cannot open " + path_);
    }

    long fact_count() const override { return static_cast<long>(offsets_.size()); }

    Fact fact_at(long pos, StoreCounters& c) const override {
        if (pos < 0 || pos >= fact_count())
            throw StoreCorrupt("fact position out of range");
        ++c.facts_scanned;
        std::lock_guard<std::mutex> lock(mu_);
        stream_.clear();
        stream_.seekg(offsets_[static_cast<size_t>(pos)]);
        std::string line;
        if (!std::getline(stream_, line))
            throw StoreCorrupt("offset table points past end of facts.lp");
        Fact f = parse_fact_line(line);
        f.group = derive_group(f, roles_);
        return f;
    }

    const std::map<std::string, std::vector<PosAnnotation>>& index1() const override {
        return ix_.index1;
    }
    const std::vector<long>& index2() const override { return ix_.index2; }
    const std::set<std::string>& attr_preds() const override { return attrs_; }
    long group_start(const std::vector<int>& gid) const override {
        auto it = ix_.groups.find(gid);
        return it == ix_.groups.end() ? -1 : it->second;
    }

private:
    std::string path_;
    std::vector<long> offsets_;
    IndexData ix_;
    std::set<std::string> attrs_;
    Roles roles_;
    mutable std::ifstream stream_;
    mutable std::mutex mu_;
};

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot open " + p.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) lines.push_back(line);
    return lines;
}

} // namespace

OpenedStore open_store(const std::string& dir) {
    fs::path base(dir);
    if (!fs::exists(base / "facts.lp")) throw IoError("no store at " + dir);

    OpenedStore os;
    VarPool pool;
    for (auto& line : read_lines(base / "rules.lp")) {
        if (line.empty()) continue;
        os.program.rules.push_back(parse_rule(line, pool));
    }

    // Rebuild the registry: rule patterns from the rules, terminal patterns
    // from registry.tab.
    for (auto& r : os.program.rules) {
        auto& entries = os.program.registry[r.tag];
        bool merged = false;
        for (auto& en : entries)
            if (en.from_rule && en.child_tags == r.child_tags &&
                en.attr_names == r.attr_names) {
                en.tn.insert(r.head_type);
                merged = true;
                break;
            }
        if (!merged) {
            RegistryEntry en;
            en.pattern = r.head_pattern;
            en.child_tags = r.child_tags;
            en.attr_names = r.attr_names;
            en.from_rule = true;
            en.tn.insert(r.head_type);
            entries.push_back(std::move(en));
        }
        os.program.max_type =
            std::max({os.program.max_type, r.head_type, r.child_type});
    }
    for (auto& line : read_lines(base / "registry.tab")) {
        if (line.empty()) continue;
        if (line.size() < 9 || line.substr(line.size() - 9) != " terminal") continue;
        size_t colon = line.find(':');
        size_t at = line.find('@');
        if (colon == std::string::npos || at == std::string::npos)
            throw StoreCorrupt("bad registry line: " + line);
        VarPool rp;
        TermParser tp(line.substr(0, colon), rp);
        TermPtr tag_term = tp.parse_term_prefix();
        std::string tag = tag_term->kind == Kind::Text ? tag_term->sym
                                                       : print_term(tag_term);
        TermParser pp(line.substr(colon + 1, at - colon - 1), rp);
        TermPtr pattern = pp.parse_term_prefix();
        size_t lb = line.find('{', at);
        size_t rb = line.find('}', at);
        if (lb == std::string::npos || rb == std::string::npos)
            throw StoreCorrupt("bad registry line: " + line);
        RegistryEntry en;
        en.pattern = pattern;
        en.from_rule = false;
        std::stringstream ss(line.substr(lb + 1, rb - lb - 1));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) {
                int t = std::stoi(tok);
                en.tn.insert(t);
                os.program.max_type = std::max(os.program.max_type, t);
            }
        os.program.registry[tag].push_back(std::move(en));
    }

    std::vector<long> offsets;
    for (auto& line : read_lines(base / "offsets.tab")) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        long i = 0, off = 0;
        if (!(ss >> i >> off)) throw StoreCorrupt("bad offsets line: " + line);
        if (i != static_cast<long>(offsets.size()))
            throw StoreCorrupt("offsets.tab ordinals not dense");
        offsets.push_back(off);
    }

    IndexData ix;
    for (auto& line : read_lines(base / "index2.tab")) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        long i = 0, m = 0;
        if (!(ss >> i >> m)) throw StoreCorrupt("bad index2 line: " + line);
        if (i != static_cast<long>(ix.index2.size()))
            throw StoreCorrupt("index2.tab positions not dense");
        if (m < 0 || m > i) throw StoreCorrupt("index2 group start after member");
        ix.index2.push_back(m);
    }
    if (ix.index2.size() != offsets.size())
        throw StoreCorrupt("index2.tab and offsets.tab disagree on fact count");

    for (auto& line : read_lines(base / "index1.tab")) {
        if (line.empty()) continue;
        size_t colon = line.find(':');
        if (colon == std::string::npos) throw StoreCorrupt("bad index1 line: " + line);
        VarPool rp;
        TermParser tp(line.substr(0, colon), rp);
        TermPtr pred_term = tp.parse_term_prefix();
        std::string pred = pred_term->kind == Kind::Text ? pred_term->sym
                                                         : print_term(pred_term);
        auto& anns = ix.index1[pred];
        const std::string rest = line.substr(colon + 1);
        size_t p = 0;
        while ((p = rest.find('(', p)) != std::string::npos) {
            size_t comma = rest.find(',', p);
            size_t close = rest.find(')', p);
            if (comma == std::string::npos || close == std::string::npos ||
                comma > close)
                throw StoreCorrupt("bad index1 annotation: " + line);
            PosAnnotation a;
            a.pos = std::stol(rest.substr(p + 1, comma - p - 1));
            a.group = std::stol(rest.substr(comma + 1, close - comma - 1));
            if (a.pos < 0 || a.pos >= static_cast<long>(offsets.size()) ||
                a.group < 0 || a.group > a.pos)
                throw StoreCorrupt("index1 annotation out of range: " + line);
            if (ix.index2[static_cast<size_t>(a.pos)] != a.group)
                throw StoreCorrupt("index1/index2 annotation mismatch: " + line);
            anns.push_back(a);
            p = close + 1;
        }
    }

    Roles roles = derive_roles(os.program);
    {
        // one validation pass over the fact file: group boundaries must
        // agree with index2, and offsets must address every record
        auto lines = read_lines(base / "facts.lp");
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
        if (lines.size() != offsets.size())
            throw StoreCorrupt("facts.lp and offsets.tab disagree on fact count");
        for (size_t i = 0; i < lines.size(); ++i) {
            Fact f = parse_fact_line(lines[i]);
            f.group = derive_group(f, roles);
            auto [it, inserted] =
                ix.groups.try_emplace(f.group, static_cast<long>(i));
            if (ix.index2[i] != it->second)
                throw StoreCorrupt("index2 group start disagrees with facts.lp at " +
                                   std::to_string(i));
        }
    }
    os.store = std::make_unique<FileStore>((base / "facts.lp").string(),
                                           std::move(offsets), std::move(ix),
                                           attr_pred_names(os.program),
                                           std::move(roles));
    return os;
}

} // namespace xlq
