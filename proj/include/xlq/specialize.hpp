#ifndef XLQ_SPECIALIZE_HPP
#define XLQ_SPECIALIZE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xlq/term.hpp"
#include "xlq/translate.hpp"
#include "xlq/xpath.hpp"

namespace xlq {

// Goal of a specialized evaluation: pattern is a pattern instance or a fresh
// variable; node is always a fresh variable.
struct Goal {
    std::string pred;
    TermPtr pattern;
    TermPtr node;
    int type = 0;
    int role = -1;       // rule-resolution context, -1 = any rule
    bool rules_only = false;
};

// Specialized rule, tagged with the path/condition position it serves. Body
// atoms resolve rules from their child role; facts resolve by predicate and
// type unless the atom demands structure below the child (no_facts).
struct SpecRule {
    SchemaRule rule;
    int role = -1;
    std::vector<int> child_roles;    // parallel to rule.body, -1 = facts only
    std::vector<uint8_t> no_facts;   // parallel to rule.body
};

// Role values on atoms and goals: >= 0 exact role, kRoleFactsOnly no rules,
// kRoleClosure resolves the whole-subtree rules of the atom's (pred, type).
inline constexpr int kRoleFactsOnly = -1;
inline constexpr int kRoleClosure = -2;

// One evaluable unit: a core query with a single or-branch choice.
struct PlanUnit {
    XPathExpr query;          // variant query (and-only conditions)
    std::vector<SpecRule> rules;
    std::vector<Goal> goals;
    int goal_step = -1;       // step index carrying the goals
    bool completion = false;  // answers must be re-enumerated whole
    std::map<std::pair<std::string, int>, int> closure_roles;
    // Expected (tag, admissible types) per tag step up to the goal.
    struct StepCtx {
        std::string tag;
        std::set<int> types;
    };
    std::vector<StepCtx> step_contexts;
    // True when some (pred, type) pair occurs under several distinct parent
    // contexts: answers must have their ancestor chains validated against
    // the stored groups.
    bool validate_answers = false;
};

struct QueryPlan {
    XPathExpr original;
    std::vector<XPathExpr> cores; // wildcard-free expansions
    std::vector<PlanUnit> units;
};

// Free-of-equalities transform: every =value comparison keeps only the
// existence requirement; structure is otherwise preserved.
XPathExpr fe(const XPathExpr& q);
CondPtr fe_cond(const CondPtr& c);

// Wildcard and descendant steps resolved against the schema-rule graph.
// Empty result = no schema path matches.
std::vector<XPathExpr> expand(const XPathExpr& q, const Program& p);

// Specialized schema rules for a core query, as the plain rule view
// (union over or-branches). Throws EmptySpecialization when FE(q) matches
// no schema path.
std::vector<SchemaRule> specialize_rules(const Program& p, const XPathExpr& core);

// Left-to-right reordering: atoms named by the query's conditions first, in
// condition order, then the remaining atoms in original order.
void reorder(std::vector<SchemaRule>& rules, const XPathExpr& core);

// Query patterns: pattern instances for the leftmost conditioned tag with
// every equality folded in (embedded through the path and nested paths).
std::vector<TermPtr> pt_query(const XPathExpr& core, const Program& p);

// Specialized goals for a core query.
std::vector<Goal> goals(const XPathExpr& core, const Program& p);

// Full planning pipeline: expansion, or-branch splitting, rule
// specialization and reordering, goal generation, completion analysis.
QueryPlan plan_query(const Program& p, const XPathExpr& q);

// Stable textual dump of the whole pipeline for one query.
std::string explain(const Program& p, const XPathExpr& q);

} // namespace xlq

#endif
