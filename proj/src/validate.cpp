#include "partmr/types.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace partmr {

const DfgNode* Dfg::find(const NodeId& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

std::vector<Violation> validate(const Dfg& dfg) {
    std::vector<Violation> out;

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < dfg.nodes.size(); ++i) {
        auto [it, fresh] = index.emplace(dfg.nodes[i].id, i);
        if (!fresh)
            out.push_back({"unique-node-ids", dfg.nodes[i].id, "node id appears more than once"});
    }

    for (const auto& [from, to] : dfg.edges) {
        if (!index.count(from))
            out.push_back({"edge-endpoints-exist", from, "edge source references no node"});
        if (!index.count(to))
            out.push_back({"edge-endpoints-exist", to, "edge target references no node"});
    }

    // Kahn's algorithm; leftover nodes lie on a cycle.
    std::vector<int> indeg(dfg.nodes.size(), 0);
    std::vector<std::vector<std::size_t>> succ(dfg.nodes.size());
    for (const auto& [from, to] : dfg.edges) {
        auto f = index.find(from);
        auto t = index.find(to);
        if (f == index.end() || t == index.end()) continue;
        ++indeg[t->second];
        succ[f->second].push_back(t->second);
    }
    std::queue<std::size_t> ready;
    for (std::size_t i = 0; i < dfg.nodes.size(); ++i)
        if (indeg[i] == 0) ready.push(i);
    std::size_t removed = 0;
    while (!ready.empty()) {
        std::size_t n = ready.front();
        ready.pop();
        ++removed;
        for (std::size_t s : succ[n])
            if (--indeg[s] == 0) ready.push(s);
    }
    if (removed < dfg.nodes.size()) {
        for (std::size_t i = 0; i < dfg.nodes.size(); ++i)
            if (indeg[i] > 0) {
                out.push_back({"acyclic", dfg.nodes[i].id, "node lies on a dependency cycle"});
                break;  // one representative is enough
            }
    }
    return out;
}

std::vector<Violation> validate(const PartitionPlan& plan, const Dfg& dfg) {
    std::vector<Violation> out;

    if (plan.cuts.empty())
        out.push_back({"partition-count", "cuts", "plan must contain at least one partition"});

    std::unordered_map<std::string, std::size_t> group_of;
    for (std::size_t g = 0; g < plan.cuts.size(); ++g) {
        for (const auto& id : plan.cuts[g]) {
            if (!dfg.find(id)) {
                out.push_back({"group-members-exist", id, "group references no DFG node"});
                continue;
            }
            auto [it, fresh] = group_of.emplace(id, g);
            if (!fresh)
                out.push_back({"groups-disjoint", id, "node assigned to more than one group"});
        }
    }
    for (const auto& n : dfg.nodes)
        if (!group_of.count(n.id))
            out.push_back({"groups-exhaustive", n.id, "node not covered by any group"});

    for (const auto& [from, to] : dfg.edges) {
        auto f = group_of.find(from);
        auto t = group_of.find(to);
        if (f == group_of.end() || t == group_of.end()) continue;
        if (f->second > t->second)
            out.push_back({"group-order-topological", from + "->" + to,
                           "edge flows from a later group to an earlier one"});
    }
    return out;
}

std::vector<Violation> validate(const RateParams& p) {
    std::vector<Violation> out;
    auto nonneg = [&](double v, const char* field) {
        if (!(v >= 0.0) || !std::isfinite(v))
            out.push_back({"rates-nonnegative", field, "must be finite and >= 0"});
    };
    nonneg(p.lambda_bit, "lambda_bit");
    nonneg(p.mu, "mu");
    nonneg(p.lambda_voter, "lambda_voter");
    nonneg(p.alpha_scu, "alpha_scu");
    nonneg(p.alpha_dcu, "alpha_dcu");
    nonneg(p.mission_time, "mission_time");
    if (p.gamma_same) nonneg(*p.gamma_same, "gamma_same");
    if (p.gamma_cross) nonneg(*p.gamma_cross, "gamma_cross");
    if (std::abs(p.alpha_scu + p.alpha_dcu - 1.0) > 1e-12)
        out.push_back({"alpha-partition", "alpha_scu+alpha_dcu", "fractions must sum to 1"});
    return out;
}

}  // namespace partmr
