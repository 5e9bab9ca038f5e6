#ifndef XLQ_STORE_HPP
#define XLQ_STORE_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xlq/term.hpp"
#include "xlq/translate.hpp"

namespace xlq {

// pos(n, m): fact at ordinal n, its group starting at ordinal m.
struct PosAnnotation {
    long pos = 0;
    long group = 0;
};

struct StoreCounters {
    long index1_hits = 0;   // first-index position accesses
    long index2_hits = 0;   // group seeks through the second index
    long facts_scanned = 0; // fact records read
    void reset() { *this = StoreCounters{}; }
};

// Per-evaluation state: the group-position cache plus instrumentation.
// Never shared across evaluations.
struct EvalContext {
    std::map<std::vector<int>, long> group_cache; // group id -> group start
    StoreCounters counters;
    bool use_index = true;
    bool use_cache = true;
    std::function<void(const std::string&)> trace; // optional sink
};

struct RetrievedFact {
    Fact fact;
    long position = 0;
};

// Write-once fact storage with the predicate index (first index) and the
// fact-position -> group-start index (second index).
class FactStore {
public:
    virtual ~FactStore() = default;

    virtual long fact_count() const = 0;
    virtual Fact fact_at(long pos, StoreCounters& c) const = 0;
    virtual const std::map<std::string, std::vector<PosAnnotation>>& index1() const = 0;
    virtual const std::vector<long>& index2() const = 0;
    virtual const std::set<std::string>& attr_preds() const = 0;
    // Start position of a group by its identifier, -1 when the store holds
    // no facts for it.
    virtual long group_start(const std::vector<int>& group_id) const = 0;

    // Every fact of one group, in position order.
    std::vector<Fact> group_facts(const std::vector<int>& group_id,
                                  StoreCounters& c) const;

    // All facts matching the call atom pred(value_pattern, node_pattern,
    // type), in ascending file position. `node_pattern` is the partially
    // instantiated node argument (a bare variable for main goals, otherwise
    // a sequence of constants and variables).
    std::vector<RetrievedFact> retrieve(EvalContext& ec, const std::string& pred,
                                        const TermPtr& value_pattern,
                                        const TermPtr& node_pattern, int type) const;
};

// Store directory layout: facts.lp, offsets.tab, index1.tab, index2.tab,
// rules.lp, registry.tab. All UTF-8, '\n' line ends.
void write_store(const Program& p, const std::string& dir);

struct OpenedStore {
    std::unique_ptr<FactStore> store;
    Program program; // rules + registry (facts stay in the store)
};

OpenedStore open_store(const std::string& dir);

// In-memory store over a translated program, same index semantics.
std::unique_ptr<FactStore> memory_store(const Program& p);

// Derived index structures, shared by writer and memory store.
struct IndexData {
    std::map<std::string, std::vector<PosAnnotation>> index1;
    std::vector<long> index2;
    std::map<std::vector<int>, long> groups; // group id -> start position
};
IndexData build_indexes(const std::vector<Fact>& facts);

std::string print_index1(const std::map<std::string, std::vector<PosAnnotation>>& ix);

} // namespace xlq

#endif
