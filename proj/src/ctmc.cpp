#include "partmr/ctmc.hpp"

#include <algorithm>
#include <stdexcept>

namespace partmr {

const char* to_string(ModelKind kind) {
    return kind == ModelKind::scu_only ? "scu_only" : "combined";
}

std::set<std::string> CtmcModule::alphabet() const {
    std::set<std::string> out;
    for (const auto& t : transitions) out.insert(t.action);
    return out;
}

double CtmcModule::rate_between(int from, int to) const {
    double r = 0.0;
    for (const auto& t : transitions)
        if (t.from == from && t.to == to) r += t.rate;
    return r;
}

std::vector<int> ComposedCtmc::local_states(std::size_t state) const {
    std::vector<int> locals(partitions);
    for (int p = partitions - 1; p >= 0; --p) {
        locals[p] = static_cast<int>(state % 3) + 1;
        state /= 3;
    }
    return locals;
}

std::size_t ComposedCtmc::index_of(const std::vector<int>& locals) const {
    std::size_t k = 0;
    for (int s : locals) k = k * 3 + static_cast<std::size_t>(s - 1);
    return k;
}

double ComposedCtmc::exit_rate(std::size_t state) const {
    double r = 0.0;
    for (std::size_t k = row_ptr[state]; k < row_ptr[state + 1]; ++k)
        if (col[k] != state) r += rate[k];
    return r;
}

void ComposedCtmc::finalize() {
    // Sort provenance by (from, to) and fold parallel edges into one entry.
    std::vector<std::uint32_t> order(transitions.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto& ta = transitions[a];
        const auto& tb = transitions[b];
        if (ta.from != tb.from) return ta.from < tb.from;
        if (ta.to != tb.to) return ta.to < tb.to;
        return a < b;
    });

    row_ptr.assign(state_count + 1, 0);
    col.clear();
    rate.clear();
    std::size_t i = 0;
    for (std::size_t s = 0; s < state_count; ++s) {
        row_ptr[s] = col.size();
        while (i < order.size() && transitions[order[i]].from == s) {
            std::uint32_t to = transitions[order[i]].to;
            double r = 0.0;
            while (i < order.size() && transitions[order[i]].from == s &&
                   transitions[order[i]].to == to) {
                r += transitions[order[i]].rate;
                ++i;
            }
            col.push_back(to);
            rate.push_back(r);
        }
    }
    row_ptr[state_count] = col.size();
    if (i != order.size()) throw std::logic_error("transition with out-of-range source state");
}

}  // namespace partmr
