#ifndef XLQ_ENGINE_HPP
#define XLQ_ENGINE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xlq/oracle.hpp"
#include "xlq/specialize.hpp"
#include "xlq/store.hpp"
#include "xlq/translate.hpp"
#include "xlq/xpath.hpp"

namespace xlq {

struct UsedFact {
    Fact fact;
    long position = 0;
};

// One solution of a goal: the instantiated goal plus everything the
// derivation touched (facts and the rule frames' node assignments).
struct EngineAnswer {
    TermPtr pattern; // goal pattern under the answer substitution
    TermPtr node;    // ground node term (reversed sequence)
    std::vector<UsedFact> facts;
    Assignments assigns;
};

struct EvalOptions {
    bool specialize = true;
    bool use_index = true;
    bool use_cache = true;
    std::function<void(const std::string&)> trace;
};

struct EvalResult {
    XmlNode result;  // <result> wrapper
    std::optional<NumberedTree> answer_doc;
    std::vector<EngineAnswer> answers; // per goal, solver order
    std::vector<std::string> answer_lines;
    StoreCounters counters;
};

// Top-down resolution over a specialized program and a fact store.
class Engine {
public:
    Engine(const Program& program, const FactStore& store)
        : program_(program), store_(store) {}

    // Depth-first, leftmost-atom, rule-order evaluation of one goal.
    std::vector<EngineAnswer> solve(const Goal& g, const PlanUnit& unit,
                                    EvalContext& ec) const;

    // Full query evaluation: plan, solve, reconstruct, extract.
    EvalResult evaluate(const XPathExpr& q, const EvalOptions& opt) const;
    EvalResult evaluate_plan(const QueryPlan& plan, const EvalOptions& opt) const;

    const Program& program() const { return program_; }

private:
    const Program& program_;
    const FactStore& store_;
};

// Extraction over a reconstructed answer document, dual to the oracle's
// extract_answer (unlabeled children stand for text nodes).
std::vector<XmlNode> extract_from_numbered(const NumberedTree& doc,
                                           const XPathExpr& core);

} // namespace xlq

#endif
