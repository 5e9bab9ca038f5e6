#include "xlq/term.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

#include "xlq/error.hpp"

namespace xlq {

TermPtr Term::var(int id, std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::Var;
    t->var_id = id;
    t->sym = std::move(name);
    return t;
}

TermPtr Term::text(std::string value) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::Text;
    t->sym = std::move(value);
    return t;
}

TermPtr Term::integer(long long value) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::Int;
    t->num = value;
    return t;
}

TermPtr Term::seq(std::vector<TermPtr> items, TermPtr tail_var) {
    // Flatten a seq tail eagerly so stored sequences are canonical.
    if (tail_var && tail_var->kind == Kind::Seq) {
        for (auto& it : tail_var->args) items.push_back(it);
        tail_var = tail_var->tail;
    }
    auto t = std::make_shared<Term>();
    t->kind = Kind::Seq;
    t->args = std::move(items);
    t->tail = std::move(tail_var);
    return t;
}

TermPtr Term::seq_of_ints(const std::vector<int>& xs) {
    std::vector<TermPtr> items;
    items.reserve(xs.size());
    for (int x : xs) items.push_back(integer(x));
    return seq(std::move(items));
}

TermPtr Term::comp(std::string functor, std::vector<TermPtr> args) {
    auto t = std::make_shared<Term>();
    t->kind = Kind::Comp;
    t->sym = std::move(functor);
    t->args = std::move(args);
    return t;
}

bool Term::is_ground() const {
    switch (kind) {
    case Kind::Var: return false;
    case Kind::Text:
    case Kind::Int: return true;
    case Kind::Seq:
        if (tail) return false;
        for (auto& a : args)
            if (!a->is_ground()) return false;
        return true;
    case Kind::Comp:
        for (auto& a : args)
            if (!a->is_ground()) return false;
        return true;
    }
    return false;
}

bool Term::equal(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Kind::Var: return a->var_id == b->var_id;
    case Kind::Text: return a->sym == b->sym;
    case Kind::Int: return a->num == b->num;
    case Kind::Seq: {
        if (a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!equal(a->args[i], b->args[i])) return false;
        if (!a->tail && !b->tail) return true;
        if (!a->tail || !b->tail) return false;
        return equal(a->tail, b->tail);
    }
    case Kind::Comp: {
        if (a->sym != b->sym || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!equal(a->args[i], b->args[i])) return false;
        return true;
    }
    }
    return false;
}

TermPtr Subst::lookup(int var_id) const {
    auto it = map_.find(var_id);
    return it == map_.end() ? nullptr : it->second;
}

void Subst::bind(int var_id, TermPtr t) { map_[var_id] = std::move(t); }

void Subst::unbind(int var_id) { map_.erase(var_id); }

TermPtr Subst::walk(TermPtr t) const {
    while (t->kind == Kind::Var) {
        auto b = lookup(t->var_id);
        if (!b) return t;
        t = b;
    }
    return t;
}

TermPtr Subst::apply(const TermPtr& t0) const {
    TermPtr t = walk(t0);
    switch (t->kind) {
    case Kind::Var:
    case Kind::Text:
    case Kind::Int: return t;
    case Kind::Comp: {
        std::vector<TermPtr> args;
        args.reserve(t->args.size());
        bool changed = false;
        for (auto& a : t->args) {
            auto na = apply(a);
            changed |= na.get() != a.get();
            args.push_back(std::move(na));
        }
        return changed ? Term::comp(t->sym, std::move(args)) : t;
    }
    case Kind::Seq: {
        std::vector<TermPtr> items;
        items.reserve(t->args.size());
        bool changed = false;
        for (auto& a : t->args) {
            auto na = apply(a);
            changed |= na.get() != a.get();
            items.push_back(std::move(na));
        }
        TermPtr tail;
        if (t->tail) {
            tail = apply(t->tail);
            changed |= tail.get() != t->tail.get();
            if (tail->kind != Kind::Var) {
                // Tail resolved to a sequence: splice it in.
                if (tail->kind != Kind::Seq) return Term::seq(std::move(items), tail);
                for (auto& it : tail->args) items.push_back(it);
                return Term::seq(std::move(items), tail->tail);
            }
        }
        return changed ? Term::seq(std::move(items), tail) : t;
    }
    }
    return t;
}

Subst Subst::compose(const Subst& s1, const Subst& s2) {
    Subst out;
    for (auto& [v, t] : s1.map_) out.map_[v] = s2.apply(t);
    for (auto& [v, t] : s2.map_)
        if (!out.map_.count(v)) out.map_[v] = t;
    return out;
}

namespace {

bool occurs_in(int var_id, const TermPtr& t0, const Subst& s) {
    TermPtr t = s.walk(t0);
    switch (t->kind) {
    case Kind::Var: return t->var_id == var_id;
    case Kind::Text:
    case Kind::Int: return false;
    case Kind::Comp:
    case Kind::Seq:
        for (auto& a : t->args)
            if (occurs_in(var_id, a, s)) return true;
        return t->tail ? occurs_in(var_id, t->tail, s) : false;
    }
    return false;
}

struct SeqView {
    std::vector<TermPtr> items;
    TermPtr tail; // unbound var or null
};

// Flatten a (possibly chained) sequence under the current bindings.
SeqView norm_seq(const TermPtr& t, const Subst& s) {
    SeqView v;
    TermPtr cur = t;
    for (;;) {
        for (auto& it : cur->args) v.items.push_back(it);
        if (!cur->tail) return v;
        TermPtr tl = s.walk(cur->tail);
        if (tl->kind == Kind::Var) {
            v.tail = tl;
            return v;
        }
        cur = tl; // bound to another seq
    }
}

bool bind_var(const TermPtr& v, const TermPtr& t, Subst& s, std::vector<int>& trail,
              bool occurs_check, UnifyStatus* status) {
    if (t->kind == Kind::Var && t->var_id == v->var_id) return true;
    if (occurs_check && occurs_in(v->var_id, t, s)) {
        if (status) *status = UnifyStatus::Occurs;
        return false;
    }
    s.bind(v->var_id, t);
    trail.push_back(v->var_id);
    return true;
}

} // namespace

bool unify_ext(const TermPtr& a0, const TermPtr& b0, Subst& s, std::vector<int>& trail,
               bool occurs_check, UnifyStatus* status) {
    TermPtr a = s.walk(a0);
    TermPtr b = s.walk(b0);
    if (a->kind == Kind::Var) return bind_var(a, b, s, trail, occurs_check, status);
    if (b->kind == Kind::Var) return bind_var(b, a, s, trail, occurs_check, status);
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Kind::Text: return a->sym == b->sym;
    case Kind::Int: return a->num == b->num;
    case Kind::Comp:
        if (a->sym != b->sym || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!unify_ext(a->args[i], b->args[i], s, trail, occurs_check, status))
                return false;
        return true;
    case Kind::Seq: {
        SeqView va = norm_seq(a, s);
        SeqView vb = norm_seq(b, s);
        size_t n = std::min(va.items.size(), vb.items.size());
        for (size_t i = 0; i < n; ++i)
            if (!unify_ext(va.items[i], vb.items[i], s, trail, occurs_check, status))
                return false;
        if (va.items.size() > n) std::swap(va, vb); // vb now holds the surplus
        std::vector<TermPtr> rest(vb.items.begin() + n, vb.items.end());
        if (!va.tail) {
            if (!rest.empty()) return false;
            if (!vb.tail) return true;
            return unify_ext(vb.tail, Term::seq({}), s, trail, occurs_check, status);
        }
        return unify_ext(va.tail, Term::seq(std::move(rest), vb.tail), s, trail,
                         occurs_check, status);
    }
    default: return false;
    }
}

void undo_trail(Subst& s, std::vector<int>& trail, size_t mark) {
    while (trail.size() > mark) {
        s.unbind(trail.back());
        trail.pop_back();
    }
}

UnifyResult unify(const TermPtr& a, const TermPtr& b, bool occurs_check) {
    UnifyResult r{UnifyStatus::Ok, {}};
    std::vector<int> trail;
    UnifyStatus st = UnifyStatus::Clash;
    if (!unify_ext(a, b, r.subst, trail, occurs_check, &st)) {
        r.status = st;
        r.subst = Subst{};
    }
    return r;
}

int VarPool::next_global() {
    static std::atomic<int> counter{1};
    return counter.fetch_add(1);
}

int VarPool::fresh(const std::string&) { return next_global(); }

std::string quote_atom(const std::string& name) {
    bool plain = !name.empty() && std::islower(static_cast<unsigned char>(name[0]));
    if (plain)
        for (char c : name)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
                plain = false;
                break;
            }
    if (plain) return name;
    std::string out = "'";
    for (char c : name) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\'': out += "\\'"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
        }
    }
    out += "'";
    return out;
}

namespace {

void quote_text(const std::string& v, std::string& out) {
    out += '\'';
    for (char c : v) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\'': out += "\\'"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
        }
    }
    out += '\'';
}

void print_rec(const TermPtr& t, std::string& out) {
    switch (t->kind) {
    case Kind::Var:
        if (!t->sym.empty())
            out += t->sym;
        else {
            out += "_G";
            out += std::to_string(t->var_id);
        }
        break;
    case Kind::Text: quote_text(t->sym, out); break;
    case Kind::Int: out += std::to_string(t->num); break;
    case Kind::Seq:
        out += '[';
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (i) out += ',';
            print_rec(t->args[i], out);
        }
        if (t->tail) {
            out += '|';
            print_rec(t->tail, out);
        }
        out += ']';
        break;
    case Kind::Comp:
        out += quote_atom(t->sym);
        out += '(';
        for (size_t i = 0; i < t->args.size(); ++i) {
            if (i) out += ',';
            print_rec(t->args[i], out);
        }
        out += ')';
        break;
    }
}

} // namespace

std::string print_term(const TermPtr& t) {
    std::string out;
    print_rec(t, out);
    return out;
}

TermParser::TermParser(std::string input, VarPool& pool)
    : in_(std::move(input)), pool_(pool) {}

void TermParser::skip_ws() {
    while (pos_ < in_.size() &&
           std::isspace(static_cast<unsigned char>(in_[pos_])))
        ++pos_;
}

char TermParser::peek() {
    skip_ws();
    if (pos_ >= in_.size()) throw XlqError("term syntax: unexpected end of input");
    return in_[pos_];
}

bool TermParser::at_end() {
    skip_ws();
    return pos_ >= in_.size();
}

void TermParser::expect(char c) {
    if (peek() != c)
        throw XlqError(std::string("term syntax: expected '") + c + "' at offset " +
                       std::to_string(pos_) + " in: " + in_);
    ++pos_;
}

bool TermParser::try_eat(char c) {
    skip_ws();
    if (pos_ < in_.size() && in_[pos_] == c) {
        ++pos_;
        return true;
    }
    return false;
}

std::string TermParser::ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < in_.size()) {
        char c = in_[pos_];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')
            ++pos_;
        else
            break;
    }
    if (start == pos_)
        throw XlqError("term syntax: expected identifier at offset " +
                       std::to_string(start) + " in: " + in_);
    return in_.substr(start, pos_ - start);
}

std::string TermParser::quoted() {
    // opening quote already seen
    ++pos_;
    std::string out;
    while (pos_ < in_.size()) {
        char c = in_[pos_++];
        if (c == '\\' && pos_ < in_.size()) {
            char e = in_[pos_++];
            switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default: out += e;
            }
        } else if (c == '\'') {
            return out;
        } else {
            out += c;
        }
    }
    throw XlqError("term syntax: unterminated quoted text in: " + in_);
}

TermPtr TermParser::term() {
    char c = peek();
    if (c == '\'') {
        std::string v = quoted();
        skip_ws();
        if (pos_ < in_.size() && in_[pos_] == '(') {
            // quoted functor
            ++pos_;
            std::vector<TermPtr> args;
            if (peek() != ')') {
                args.push_back(term());
                while (peek() == ',') {
                    ++pos_;
                    args.push_back(term());
                }
            }
            expect(')');
            return Term::comp(v, std::move(args));
        }
        return Term::text(v);
    }
    if (c == '[') {
        ++pos_;
        std::vector<TermPtr> items;
        TermPtr tail;
        if (peek() != ']') {
            items.push_back(term());
            while (peek() == ',') {
                ++pos_;
                items.push_back(term());
            }
            if (peek() == '|') {
                ++pos_;
                tail = term();
            }
        }
        expect(']');
        return Term::seq(std::move(items), tail);
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
        size_t start = pos_;
        if (c == '-') ++pos_;
        while (pos_ < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_])))
            ++pos_;
        if (pos_ == start + (c == '-' ? 1u : 0u))
            throw XlqError("term syntax: bad number in: " + in_);
        return Term::integer(std::stoll(in_.substr(start, pos_ - start)));
    }
    std::string name = ident();
    bool is_var = std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_';
    skip_ws();
    if (!is_var && pos_ < in_.size() && in_[pos_] == '(') {
        ++pos_;
        std::vector<TermPtr> args;
        if (peek() != ')') {
            args.push_back(term());
            while (peek() == ',') {
                ++pos_;
                args.push_back(term());
            }
        }
        expect(')');
        return Term::comp(name, std::move(args));
    }
    if (is_var) {
        auto it = vars_.find(name);
        if (it == vars_.end())
            it = vars_.emplace(name, pool_.fresh(name)).first;
        return Term::var(it->second, name);
    }
    return Term::text(name); // bare atom constant
}

TermPtr TermParser::parse_term_prefix() { return term(); }

TermPtr TermParser::parse_term() {
    TermPtr t = term();
    skip_ws();
    if (pos_ < in_.size() && in_[pos_] == '.') ++pos_;
    skip_ws();
    if (pos_ < in_.size())
        throw XlqError("term syntax: trailing input at offset " +
                       std::to_string(pos_) + " in: " + in_);
    return t;
}

} // namespace xlq
