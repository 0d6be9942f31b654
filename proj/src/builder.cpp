#include "partmr/builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "partmr/errors.hpp"
#include "partmr/ingest.hpp"

namespace partmr {

namespace {

void add(CtmcModule& m, int from, int to, const std::string& action, double rate) {
    m.transitions.push_back({from, to, action, rate});
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "dcu_3_7" -> (3, 7); nullopt for anything else.
std::optional<std::pair<int, int>> parse_cross_action(const std::string& a) {
    if (a.rfind("dcu_", 0) != 0) return std::nullopt;
    auto rest = a.substr(4);
    auto sep = rest.find('_');
    if (sep == std::string::npos) return std::nullopt;
    try {
        int i = std::stoi(rest.substr(0, sep));
        int j = std::stoi(rest.substr(sep + 1));
        return std::make_pair(i, j);
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<PartitionRates> rates_for_model(ModelKind kind,
                                            const std::vector<double>& domain_rates,
                                            const RateParams& params) {
    std::vector<PartitionRates> out;
    out.reserve(domain_rates.size());
    for (double lambda : domain_rates) {
        PartitionRates r = split_rates(lambda, params);
        if (kind == ModelKind::scu_only) {
            r.lambda_scu = lambda;
            r.beta = 0.0;
            r.beta1 = 0.0;
        }
        out.push_back(r);
    }
    return out;
}

CtmcModule build_scu_partition(const std::string& name, double lambda_scu, double scrub_rate) {
    CtmcModule m;
    m.name = name;
    m.kind = ModelKind::scu_only;
    if (lambda_scu > 0.0) {
        add(m, kStateOperational, kStateDegraded, "scu1", 3.0 * lambda_scu);
        add(m, kStateDegraded, kStateFailed, "scu2", 2.0 * lambda_scu);
    }
    if (scrub_rate > 0.0) {
        add(m, kStateOperational, kStateOperational, "perform_scrub", scrub_rate);
        add(m, kStateDegraded, kStateOperational, "perform_scrub", scrub_rate);
        add(m, kStateFailed, kStateOperational, "perform_scrub", scrub_rate);
    }
    return m;
}

CtmcModule build_combined_partition(const std::string& name, double lambda_scu, double beta,
                                    double scrub_rate) {
    CtmcModule m = build_scu_partition(name, lambda_scu, scrub_rate);
    m.kind = ModelKind::combined;
    if (beta > 0.0) {
        add(m, kStateOperational, kStateFailed, "dcu1", 3.0 * beta);
        add(m, kStateDegraded, kStateFailed, "dcu2", 2.0 * beta);
    }
    return m;
}

void add_cross_dcu_actions(std::vector<CtmcModule>& modules,
                           const std::vector<std::pair<int, int>>& pairs,
                           const std::vector<double>& beta1) {
    if (beta1.size() != modules.size())
        throw input_error("cross-partition DCU: need one beta1 per module");
    auto check_index = [&](int i) {
        if (i < 1 || i > static_cast<int>(modules.size()))
            throw input_error("cross-partition DCU: partition index " + std::to_string(i) +
                              " out of range");
    };
    for (auto [i, j] : pairs) {
        check_index(i);
        check_index(j);
        if (i == j) throw input_error("cross-partition DCU: pair must join two partitions");
        if (modules[i - 1].kind != ModelKind::combined ||
            modules[j - 1].kind != ModelKind::combined)
            throw input_error("cross-partition DCU requires combined-model partitions");
        // One action per direction; the named source carries the physical
        // rate, the partner echoes with rate 1 so the product keeps it.
        auto wire = [&](int src, int dst) {
            double b1 = beta1[static_cast<std::size_t>(src) - 1];
            if (b1 <= 0.0) return;
            std::string action = "dcu_" + std::to_string(src) + "_" + std::to_string(dst);
            add(modules[src - 1], kStateOperational, kStateDegraded, action, 3.0 * b1);
            add(modules[src - 1], kStateDegraded, kStateFailed, action, 2.0 * b1);
            add(modules[dst - 1], kStateOperational, kStateDegraded, action, 1.0);
            add(modules[dst - 1], kStateDegraded, kStateFailed, action, 1.0);
        };
        wire(i, j);
        wire(j, i);
    }
}

std::vector<CtmcModule> build_modules(const SystemSpec& spec) {
    const int n = static_cast<int>(spec.partition_rates.size());
    if (n == 0) throw input_error("system spec has no partitions");
    if (spec.scrub_master < 1 || spec.scrub_master > n)
        throw input_error("scrub master index out of range");
    if (!spec.cross_dcu_pairs.empty() && spec.kind != ModelKind::combined)
        throw input_error("cross-partition DCU requires the combined model");

    std::vector<CtmcModule> modules;
    modules.reserve(spec.partition_rates.size());
    for (int i = 1; i <= n; ++i) {
        const auto& r = spec.partition_rates[static_cast<std::size_t>(i) - 1];
        // Scrubbing resets the whole device at once; the master carries mu and
        // everyone else rate 1 so synchronization multiplies to mu.
        double scrub_rate = spec.mu > 0.0 ? (i == spec.scrub_master ? spec.mu : 1.0) : 0.0;
        std::string name = "P" + std::to_string(i);
        CtmcModule m = spec.kind == ModelKind::combined
                           ? build_combined_partition(name, r.lambda_scu, r.beta, scrub_rate)
                           : build_scu_partition(name, r.lambda_scu, scrub_rate);
        // Per-partition actions must not synchronize across partitions.
        for (auto& t : m.transitions)
            if (t.action != "perform_scrub")
                t.action = "p" + std::to_string(i) + "_" + t.action;
        modules.push_back(std::move(m));
    }

    if (!spec.cross_dcu_pairs.empty()) {
        std::vector<double> beta1;
        beta1.reserve(spec.partition_rates.size());
        for (const auto& r : spec.partition_rates) beta1.push_back(r.beta1);
        add_cross_dcu_actions(modules, spec.cross_dcu_pairs, beta1);
    }
    return modules;
}

ComposedCtmc compose(const std::vector<CtmcModule>& modules) {
    if (modules.empty()) throw input_error("compose: no modules");

    // Shared actions must be complete: a scrub in one module means a scrub in
    // every module, and each dcu_i_j action needs both of its endpoints.
    {
        std::map<std::string, std::set<std::size_t>> users;
        for (std::size_t i = 0; i < modules.size(); ++i)
            for (const auto& a : modules[i].alphabet()) users[a].insert(i);
        if (auto it = users.find("perform_scrub"); it != users.end())
            if (it->second.size() != modules.size())
                throw input_error("perform_scrub has no counterpart in some modules");
        for (const auto& [a, who] : users) {
            if (auto pair = parse_cross_action(a)) {
                auto [i, j] = *pair;
                if (i < 1 || j < 1 || i > static_cast<int>(modules.size()) ||
                    j > static_cast<int>(modules.size()) ||
                    !who.count(static_cast<std::size_t>(i) - 1) ||
                    !who.count(static_cast<std::size_t>(j) - 1))
                    throw input_error("action " + a + " has no counterpart rate in partner module");
            }
        }
    }

    struct FlatTransition {
        std::size_t from, to;
        std::string action;
        double rate;
    };
    struct Flat {
        std::size_t n = 1;
        std::vector<FlatTransition> trans;
        std::set<std::string> alphabet;
    };

    Flat acc;  // 1-state identity of the fold
    for (const auto& m : modules) {
        Flat b;
        b.n = 3;
        for (const auto& t : m.transitions) {
            b.trans.push_back({static_cast<std::size_t>(t.from - 1),
                               static_cast<std::size_t>(t.to - 1), t.action, t.rate});
            b.alphabet.insert(t.action);
        }

        std::map<std::string, std::vector<const FlatTransition*>> by_action_a, by_action_b;
        for (const auto& t : acc.trans) by_action_a[t.action].push_back(&t);
        for (const auto& t : b.trans) by_action_b[t.action].push_back(&t);

        Flat next;
        next.n = acc.n * b.n;
        std::set_union(acc.alphabet.begin(), acc.alphabet.end(), b.alphabet.begin(),
                       b.alphabet.end(), std::inserter(next.alphabet, next.alphabet.end()));
        for (const auto& action : next.alphabet) {
            auto ita = by_action_a.find(action);
            auto itb = by_action_b.find(action);
            if (ita != by_action_a.end() && itb != by_action_b.end()) {
                for (const auto* ta : ita->second)
                    for (const auto* tb : itb->second)
                        next.trans.push_back({ta->from * b.n + tb->from, ta->to * b.n + tb->to,
                                              action, ta->rate * tb->rate});
            } else if (ita != by_action_a.end()) {
                for (const auto* ta : ita->second)
                    for (std::size_t sb = 0; sb < b.n; ++sb)
                        next.trans.push_back(
                            {ta->from * b.n + sb, ta->to * b.n + sb, action, ta->rate});
            } else {
                for (const auto* tb : itb->second)
                    for (std::size_t sa = 0; sa < acc.n; ++sa)
                        next.trans.push_back(
                            {sa * b.n + tb->from, sa * b.n + tb->to, action, tb->rate});
            }
        }
        acc = std::move(next);
    }

    ComposedCtmc c;
    c.partitions = static_cast<int>(modules.size());
    c.state_count = acc.n;
    std::unordered_map<std::string, std::uint32_t> action_index;
    c.transitions.reserve(acc.trans.size());
    for (const auto& t : acc.trans) {
        auto [it, inserted] =
            action_index.emplace(t.action, static_cast<std::uint32_t>(c.actions.size()));
        if (inserted) c.actions.push_back(t.action);
        c.transitions.push_back({static_cast<std::uint32_t>(t.from),
                                 static_cast<std::uint32_t>(t.to), it->second, t.rate});
    }
    return c;
}

void label_states(ComposedCtmc& c) {
    c.up.assign(c.state_count, 0);
    for (std::size_t s = 0; s < c.state_count; ++s) {
        bool all_up = true;
        for (int v : c.local_states(s))
            if (v < kStateDegraded) all_up = false;
        c.up[s] = all_up ? 1 : 0;
    }
    c.operational_state = c.state_count - 1;
    c.labeled = true;
}

ComposedCtmc build_system(const SystemSpec& spec) {
    ComposedCtmc c = compose(build_modules(spec));
    label_states(c);
    c.finalize();
    return c;
}

std::string export_prism(const SystemSpec& spec) {
    const int n = static_cast<int>(spec.partition_rates.size());
    if (n == 0) throw input_error("system spec has no partitions");
    std::vector<CtmcModule> modules = build_modules(spec);

    std::string out;
    out += "ctmc\n\n";
    out += "// generated model: " + std::string(to_string(spec.kind)) + ", " +
           std::to_string(n) + (n == 1 ? " partition" : " partitions") + "\n";
    if (spec.mu > 0.0) out += "const double mu = " + fmt17(spec.mu) + ";\n";
    for (int i = 1; i <= n; ++i) {
        const auto& r = spec.partition_rates[static_cast<std::size_t>(i) - 1];
        std::string suffix = "_" + std::to_string(i);
        out += "const double lambda_scu" + suffix + " = " + fmt17(r.lambda_scu) + ";\n";
        if (spec.kind == ModelKind::combined) {
            out += "const double beta" + suffix + " = " + fmt17(r.beta) + ";\n";
            out += "const double beta1" + suffix + " = " + fmt17(r.beta1) + ";\n";
        }
    }
    out += "\n";

    for (int i = 1; i <= n; ++i) {
        const auto& m = modules[static_cast<std::size_t>(i) - 1];
        std::string s = "s" + std::to_string(i);
        std::string suffix = "_" + std::to_string(i);
        std::string prefix = "p" + std::to_string(i) + "_";
        out += "module " + m.name + "\n";
        out += "  " + s + " : [1..3] init 3;\n";
        for (const auto& t : m.transitions) {
            if (t.action == "perform_scrub") continue;  // collapsed below
            std::string rate;
            if (t.action == prefix + "scu1")
                rate = "3*lambda_scu" + suffix;
            else if (t.action == prefix + "scu2")
                rate = "2*lambda_scu" + suffix;
            else if (t.action == prefix + "dcu1")
                rate = "3*beta" + suffix;
            else if (t.action == prefix + "dcu2")
                rate = "2*beta" + suffix;
            else if (auto pair = parse_cross_action(t.action); pair && pair->first == i)
                rate = std::to_string(t.from) + "*beta1" + suffix;
            else
                rate = fmt17(t.rate);  // echo side of a cross action
            out += "  [" + t.action + "] " + s + "=" + std::to_string(t.from) + " -> " + rate +
                   " : (" + s + "'=" + std::to_string(t.to) + ");\n";
        }
        if (spec.mu > 0.0) {
            std::string rate = i == spec.scrub_master ? "mu" : "1";
            out += "  [perform_scrub] " + s + ">=1 -> " + rate + " : (" + s + "'=3);\n";
        }
        out += "endmodule\n\n";
    }

    std::string up_expr, op_expr;
    for (int i = 1; i <= n; ++i) {
        std::string s = "s" + std::to_string(i);
        if (i > 1) {
            up_expr += " & ";
            op_expr += " & ";
        }
        up_expr += "(" + s + ">=2)";
        op_expr += "(" + s + "=3)";
    }
    out += "label \"up\" = " + up_expr + ";\n";
    out += "label \"operational\" = " + op_expr + ";\n";
    out += "label \"down\" = !(" + up_expr + ");\n\n";
    out += "rewards \"up_time\"\n  " + up_expr + " : 1;\nendrewards\n";
    return out;
}

}  // namespace partmr
