#ifndef XLQ_TRANSLATE_HPP
#define XLQ_TRANSLATE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xlq/term.hpp"
#include "xlq/xml.hpp"

namespace xlq {

// One body atom of a schema rule. Child atoms carry node [Fresh|HeadNode];
// attribute atoms carry the head node variable directly.
struct BodyAtom {
    std::string pred;
    TermPtr value; // head-pattern slot variable
    TermPtr node;
    int type = 0; // shared child type r
    bool is_attr = false;
};

struct SchemaRule {
    std::string tag;
    int head_type = 0;
    TermPtr head_pattern; // tagtype(Child1,...,Childt,[Att1,...,Attn])
    TermPtr head_node;    // node variable
    int child_type = 0;
    std::vector<BodyAtom> body;              // child atoms then attr atoms
    std::vector<std::string> child_tags;     // slot order
    std::vector<std::string> attr_names;     // attribute slot order
};

std::string print_rule(const SchemaRule& r);
SchemaRule parse_rule(const std::string& line, VarPool& pool);

// Ground unit clause. `node` is the reversed node number; `group` is the
// node number of the owning record (node minus its head for child facts,
// node itself for attribute facts).
struct Fact {
    std::string pred;
    std::string value;
    std::vector<int> node;
    int type = 0;
    std::vector<int> group;
};

std::string print_fact(const Fact& f);

// Pattern registry entry: the pattern shape for a tag together with the set
// of type numbers it was assigned during translation.
struct RegistryEntry {
    TermPtr pattern;
    std::vector<std::string> child_tags; // empty for terminal-value patterns
    std::vector<std::string> attr_names;
    bool from_rule = false;
    std::set<int> tn;
};

struct Program {
    std::vector<SchemaRule> rules;
    std::vector<Fact> facts;
    std::map<std::string, std::vector<RegistryEntry>> registry;
    int max_type = 1;

    const std::vector<RegistryEntry>* pt(const std::string& tag) const;
    // TN is invariant under instantiation: matches the entry whose pattern
    // the given term instantiates.
    std::set<int> tn(const TermPtr& pattern) const;
};

Program translate(const NumberedTree& doc);

std::string print_rules(const Program& p);
std::string print_facts(const Program& p);
std::string print_registry(const Program& p);

// Atom handed to document reconstruction: a goal instance or a plain fact.
struct RebuildAtom {
    std::string pred;
    TermPtr term; // value constant or pattern instance (may contain variables)
    std::vector<int> node; // reversed, ground
    int type = 0;
};

// Externally established (path -> tag/type) assignments, e.g. collected from
// engine derivations. Keyed by document-form path.
struct NodeAssign {
    std::string tag;
    int type = 0;
};
using Assignments = std::map<std::vector<int>, NodeAssign>;

// Builds the unique numbered tree whose translation image would contain the
// given atoms. Returns nullopt for an empty atom set.
std::optional<NumberedTree> rebuild_doc(const std::vector<SchemaRule>& rules,
                                        const std::vector<RebuildAtom>& atoms,
                                        const Assignments* known = nullptr);

std::vector<RebuildAtom> facts_as_atoms(const Program& p);

std::vector<int> reversed(std::vector<int> v);

} // namespace xlq

#endif
