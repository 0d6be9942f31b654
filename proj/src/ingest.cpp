#include "partmr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "partmr/errors.hpp"

namespace partmr {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number_prefix(std::string_view s, std::string_view& suffix, std::string_view what) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin)
        throw input_error("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    suffix = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
    return value;
}

double unit_seconds(std::string_view unit, std::string_view full) {
    if (unit == "s" || unit == "sec" || unit == "secs" || unit == "seconds") return 1.0;
    if (unit == "min" || unit == "mins" || unit == "minutes") return 60.0;
    if (unit == "h" || unit == "hr" || unit == "hrs" || unit == "hours") return 3600.0;
    throw input_error("duration '" + std::string(full) +
                      "' needs a unit suffix (s, min or h)");
}

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string(what) + ": " + e.what(), e.byte);
    }
}

ModelKind model_kind_from(const std::string& s) {
    if (s == "scu" || s == "scu_only") return ModelKind::scu_only;
    if (s == "combined") return ModelKind::combined;
    throw input_error("unknown model kind '" + s + "' (expected scu_only or combined)");
}

void throw_first_violation(const std::vector<Violation>& vs, const char* what) {
    if (vs.empty()) return;
    const auto& v = vs.front();
    throw input_error(std::string(what) + ": " + v.invariant + " violated by '" + v.subject +
                      "': " + v.detail);
}

}  // namespace

double parse_duration(std::string_view text) {
    std::string_view s = trim(text);
    std::string_view unit;
    double value = parse_number_prefix(s, unit, "duration");
    double secs = value * unit_seconds(unit, text);
    if (!(secs >= 0.0) || !std::isfinite(secs))
        throw input_error("duration '" + std::string(text) + "' must be finite and >= 0");
    return secs;
}

double parse_rate(std::string_view text) {
    std::string_view s = trim(text);
    std::string_view unit;
    double value = parse_number_prefix(s, unit, "rate");
    if (!unit.empty()) {
        if (unit.front() != '/')
            throw input_error("rate '" + std::string(text) + "': expected '/unit' suffix");
        unit.remove_prefix(1);
        value /= unit_seconds(trim(unit), text);
    }
    if (!std::isfinite(value))
        throw input_error("rate '" + std::string(text) + "' must be finite");
    return value;
}

Dfg parse_dfg(std::string_view text) {
    json j = parse_json(text, "DFG");
    if (!j.is_object() || !j.contains("nodes"))
        throw input_error("DFG: top-level object with a 'nodes' array required");

    Dfg dfg;
    dfg.name = j.value("name", std::string());
    for (const auto& jn : j.at("nodes")) {
        DfgNode n;
        if (!jn.is_object() || !jn.contains("id") || !jn.at("id").is_string())
            throw input_error("DFG: every node needs a string 'id'");
        n.id = jn.at("id").get<std::string>();
        if (!jn.contains("kind") || !jn.at("kind").is_string() ||
            jn.at("kind").get<std::string>().empty())
            throw input_error("DFG: unknown component kind on node '" + n.id + "'");
        n.kind = jn.at("kind").get<std::string>();
        dfg.nodes.push_back(std::move(n));
    }
    if (dfg.nodes.empty()) throw input_error("DFG: empty DFG");

    for (const auto& je : j.value("edges", json::array())) {
        if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string())
            throw input_error("DFG: edges must be [from, to] string pairs");
        dfg.edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
    }

    throw_first_violation(validate(dfg), "DFG");
    return dfg;
}

ComponentLibrary parse_library(std::string_view text) {
    ComponentLibrary lib;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (!header_seen) {
            // Exact header required so a headerless file fails loudly.
            std::string squeezed;
            for (char c : s)
                if (!std::isspace(static_cast<unsigned char>(c))) squeezed += c;
            if (squeezed != "kind,critical_bits")
                throw input_error("library: line " + std::to_string(lineno) +
                                  ": header 'kind,critical_bits' required");
            header_seen = true;
            continue;
        }
        auto comma = s.find(',');
        if (comma == std::string_view::npos)
            throw input_error("library: line " + std::to_string(lineno) + ": expected 'kind,bits'");
        std::string kind{trim(s.substr(0, comma))};
        std::string_view bits_s = trim(s.substr(comma + 1));
        long long bits = 0;
        auto [ptr, ec] = std::from_chars(bits_s.data(), bits_s.data() + bits_s.size(), bits);
        if (ec != std::errc() || ptr != bits_s.data() + bits_s.size() || bits < 0)
            throw input_error("library: line " + std::to_string(lineno) +
                              ": critical_bits must be a nonnegative integer");
        if (kind.empty())
            throw input_error("library: line " + std::to_string(lineno) + ": empty kind");
        if (!lib.critical_bits.emplace(kind, bits).second)
            throw input_error("library: line " + std::to_string(lineno) + ": duplicate kind '" +
                              kind + "'");
    }
    if (!header_seen) throw input_error("library: header 'kind,critical_bits' required");
    return lib;
}

AnalysisConfig parse_config(std::string_view text) {
    json j = parse_json(text, "config");
    if (!j.is_object()) throw input_error("config: top-level object required");
    AnalysisConfig cfg;

    if (j.contains("model")) {
        cfg.model_kinds.clear();
        const auto& jm = j.at("model");
        if (jm.is_string()) {
            cfg.model_kinds.push_back(model_kind_from(jm.get<std::string>()));
        } else if (jm.is_array()) {
            for (const auto& m : jm) cfg.model_kinds.push_back(model_kind_from(m.get<std::string>()));
        } else {
            throw input_error("config: 'model' must be a string or array of strings");
        }
    }
    if (cfg.model_kinds.empty()) throw input_error("config: at least one model kind required");

    if (j.contains("partitions")) {
        const auto& jp = j.at("partitions");
        if (jp.is_number_integer()) {
            cfg.partition_counts = {jp.get<int>()};
        } else if (jp.is_array()) {
            cfg.partition_counts.clear();
            for (const auto& n : jp) cfg.partition_counts.push_back(n.get<int>());
        } else if (jp.is_object() && jp.contains("cuts")) {
            cfg.explicit_cuts = jp.at("cuts").get<std::vector<std::vector<std::string>>>();
            cfg.partition_counts.clear();
        } else {
            throw input_error("config: 'partitions' must be a count, a list of counts, "
                              "or {\"cuts\": [[...], ...]}");
        }
    }
    if (cfg.explicit_cuts.empty()) {
        if (cfg.partition_counts.empty()) throw input_error("config: no partition counts given");
        for (int n : cfg.partition_counts)
            if (n < 1) throw input_error("config: partition count must be >= 1");
    }
    cfg.include_terminal_voter_partition = j.value("include_terminal_voter_partition", false);

    if (!j.contains("scrub_intervals"))
        throw input_error("config: at least one scrub interval required");
    for (const auto& js : j.at("scrub_intervals")) {
        double tau = js.is_string() ? parse_duration(js.get<std::string>())
                                    : js.get<double>();
        if (!(tau > 0.0)) throw input_error("config: scrub intervals must be > 0");
        cfg.scrub_intervals.push_back(tau);
    }
    if (cfg.scrub_intervals.empty())
        throw input_error("config: at least one scrub interval required");

    if (j.contains("mission_time")) {
        const auto& jt = j.at("mission_time");
        cfg.rates.mission_time =
            jt.is_string() ? parse_duration(jt.get<std::string>()) : jt.get<double>();
    }
    cfg.rates.lambda_bit = j.value("lambda_bit", cfg.rates.lambda_bit);
    cfg.rates.alpha_scu = j.value("alpha_scu", cfg.rates.alpha_scu);
    cfg.rates.alpha_dcu = j.value("alpha_dcu", cfg.rates.alpha_dcu);
    if (j.contains("lambda_voter")) {
        const auto& jv = j.at("lambda_voter");
        cfg.rates.lambda_voter =
            jv.is_string() ? parse_rate(jv.get<std::string>()) : jv.get<double>();
    }
    if (j.contains("gamma_same")) {
        const auto& jg = j.at("gamma_same");
        cfg.rates.gamma_same = jg.is_string() ? parse_rate(jg.get<std::string>()) : jg.get<double>();
    }
    if (j.contains("gamma_cross")) {
        const auto& jg = j.at("gamma_cross");
        cfg.rates.gamma_cross = jg.is_string() ? parse_rate(jg.get<std::string>()) : jg.get<double>();
    }

    if (j.contains("outputs")) {
        cfg.outputs = {false, false, false, false};
        for (const auto& jo : j.at("outputs")) {
            std::string o = jo.get<std::string>();
            if (o == "reliability") cfg.outputs.reliability = true;
            else if (o == "availability") cfg.outputs.availability = true;
            else if (o == "steady_state") cfg.outputs.steady_state = true;
            else if (o == "correctness") cfg.outputs.correctness = true;
            else throw input_error("config: unknown output '" + o + "'");
        }
    }
    if (j.contains("reliability_label")) {
        std::string l = j.at("reliability_label").get<std::string>();
        if (l == "operational") cfg.reliability_over_operational = true;
        else if (l == "up") cfg.reliability_over_operational = false;
        else throw input_error("config: reliability_label must be 'up' or 'operational'");
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.sim_trials = j.value("sim_trials", cfg.sim_trials);
    cfg.eps = j.value("eps", cfg.eps);
    if (!(cfg.eps > 0.0)) throw input_error("config: eps must be > 0");

    throw_first_violation(validate(cfg.rates), "config");
    return cfg;
}

double module_rate(const ComponentLibrary& lib, const std::string& kind, double lambda_bit) {
    auto it = lib.critical_bits.find(kind);
    if (it == lib.critical_bits.end())
        throw input_error("component kind '" + kind + "' not in characterization library");
    return lambda_bit * static_cast<double>(it->second);
}

double domain_rate(const std::vector<double>& module_rates, double lambda_voter,
                   int partition_index) {
    double sum = 0.0;
    for (double r : module_rates) sum += r;
    return sum + (partition_index == 1 ? 0.0 : lambda_voter);
}

PartitionRates split_rates(double lambda_domain, const RateParams& params) {
    PartitionRates out;
    out.lambda_scu = params.alpha_scu * lambda_domain;
    if (params.gamma_same || params.gamma_cross) {
        out.beta = params.gamma_same ? 2.0 * *params.gamma_same : 0.0;
        out.beta1 = params.gamma_cross ? 3.0 * *params.gamma_cross : 0.0;
    } else {
        out.beta = params.alpha_dcu * lambda_domain;
        out.beta1 = params.alpha_dcu * lambda_domain;
    }
    return out;
}

PartitionPlan plan_partitions(const Dfg& dfg, int n) {
    const int count = static_cast<int>(dfg.nodes.size());
    if (n < 1 || n > count)
        throw input_error("partition count " + std::to_string(n) + " out of range [1, " +
                          std::to_string(count) + "]");

    // Deterministic topological order: among ready nodes always pick the one
    // that appears first in the input.
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < dfg.nodes.size(); ++i) index.emplace(dfg.nodes[i].id, i);
    std::vector<int> indeg(dfg.nodes.size(), 0);
    std::vector<std::vector<std::size_t>> succ(dfg.nodes.size());
    for (const auto& [from, to] : dfg.edges) {
        ++indeg[index.at(to)];
        succ[index.at(from)].push_back(index.at(to));
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < dfg.nodes.size(); ++i)
        if (indeg[i] == 0) ready.push(i);
    std::vector<std::size_t> order;
    order.reserve(dfg.nodes.size());
    while (!ready.empty()) {
        std::size_t i = ready.top();
        ready.pop();
        order.push_back(i);
        for (std::size_t s : succ[i])
            if (--indeg[s] == 0) ready.push(s);
    }
    if (order.size() != dfg.nodes.size())
        throw input_error("cannot partition a cyclic DFG");

    PartitionPlan plan;
    const int base = count / n;
    const int rem = count % n;
    std::size_t pos = 0;
    for (int g = 0; g < n; ++g) {
        int size = base + (g < rem ? 1 : 0);
        std::vector<NodeId> group;
        group.reserve(size);
        for (int k = 0; k < size; ++k) group.push_back(dfg.nodes[order[pos++]].id);
        plan.cuts.push_back(std::move(group));
    }
    return plan;
}

std::vector<double> partition_domain_rates(const Dfg& dfg, const PartitionPlan& plan,
                                           const ComponentLibrary& lib,
                                           const RateParams& params) {
    std::vector<double> out;
    out.reserve(plan.partition_count());
    for (std::size_t g = 0; g < plan.cuts.size(); ++g) {
        std::vector<double> rates;
        rates.reserve(plan.cuts[g].size());
        for (const auto& id : plan.cuts[g]) {
            const DfgNode* node = dfg.find(id);
            if (!node) throw input_error("plan references unknown node '" + id + "'");
            rates.push_back(module_rate(lib, node->kind, params.lambda_bit));
        }
        out.push_back(domain_rate(rates, params.lambda_voter, static_cast<int>(g) + 1));
    }
    if (plan.include_terminal_voter_partition) {
        // Final output voters: a partition with an empty module sum.
        out.push_back(domain_rate({}, params.lambda_voter,
                                  static_cast<int>(plan.cuts.size()) + 1));
    }
    return out;
}

}  // namespace partmr
