#ifndef XLQ_TERM_HPP
#define XLQ_TERM_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace xlq {

// Logic terms are immutable and shared. A term is a variable, a text or
// integer constant, a finite or partial sequence, or a compound term.
enum class Kind : uint8_t { Var, Text, Int, Seq, Comp };

class Term;
using TermPtr = std::shared_ptr<const Term>;

class Term {
public:
    Kind kind;
    int var_id = 0;            // Var
    std::string sym;           // Var display name / Text value / Comp functor
    long long num = 0;         // Int
    std::vector<TermPtr> args; // Seq items / Comp args
    TermPtr tail;              // Seq: open tail variable, or null when closed

    static TermPtr var(int id, std::string name = "");
    static TermPtr text(std::string value);
    static TermPtr integer(long long value);
    static TermPtr seq(std::vector<TermPtr> items, TermPtr tail_var = nullptr);
    static TermPtr seq_of_ints(const std::vector<int>& xs);
    static TermPtr comp(std::string functor, std::vector<TermPtr> args);

    bool is_var() const { return kind == Kind::Var; }
    bool is_const() const { return kind == Kind::Text || kind == Kind::Int; }
    bool is_ground() const;

    // Structural equality (variables compare by id).
    static bool equal(const TermPtr& a, const TermPtr& b);
};

// Finite map variable -> term. Bindings are chased on lookup, so stored
// ranges may themselves contain bound variables until apply() flattens them.
class Subst {
public:
    TermPtr lookup(int var_id) const;
    void bind(int var_id, TermPtr t);
    void unbind(int var_id);

    // Dereference a variable chain one level at a time.
    TermPtr walk(TermPtr t) const;
    // Deep application: every bound variable replaced, unbound preserved.
    TermPtr apply(const TermPtr& t) const;

    bool empty() const { return map_.empty(); }
    size_t size() const { return map_.size(); }
    const std::unordered_map<int, TermPtr>& raw() const { return map_; }

    // apply(compose(s1,s2), t) == apply(s2, apply(s1, t)) for all t.
    static Subst compose(const Subst& s1, const Subst& s2);

private:
    std::unordered_map<int, TermPtr> map_;
};

enum class UnifyStatus : uint8_t { Ok, Clash, Occurs };

struct UnifyResult {
    UnifyStatus status;
    Subst subst;
    bool ok() const { return status == UnifyStatus::Ok; }
};

UnifyResult unify(const TermPtr& a, const TermPtr& b, bool occurs_check = true);

// Engine-facing incremental form: extends `s` in place and appends every
// newly bound variable to `trail` so callers can backtrack with undo_trail.
bool unify_ext(const TermPtr& a, const TermPtr& b, Subst& s,
               std::vector<int>& trail, bool occurs_check = true,
               UnifyStatus* status = nullptr);
void undo_trail(Subst& s, std::vector<int>& trail, size_t mark);

// Allocates fresh variable ids. Ids handed out by distinct pools never
// collide because the pool is seeded from a shared atomic counter.
class VarPool {
public:
    int fresh(const std::string& name = "");

private:
    static int next_global();
};

// Canonical text syntax: functor(arg1,...,argn), sequences [a,b|T],
// single-quoted text constants, bare integers, capitalized variables.
std::string print_term(const TermPtr& t);
std::string quote_atom(const std::string& name);

class TermParser {
public:
    TermParser(std::string input, VarPool& pool);
    TermPtr parse_term();            // consumes one term, then expects end
    TermPtr parse_term_prefix();     // consumes one term, leaves the rest
    size_t pos() const { return pos_; }
    bool at_end();
    void expect(char c);
    bool try_eat(char c);
    const std::unordered_map<std::string, int>& var_ids() const { return vars_; }

private:
    std::string in_;
    size_t pos_ = 0;
    VarPool& pool_;
    std::unordered_map<std::string, int> vars_; // per-parse variable scope

    void skip_ws();
    char peek();
    TermPtr term();
    std::string ident();
    std::string quoted();
};

} // namespace xlq

#endif
