#include "partmr/property.hpp"

#include <cctype>
#include <cstdio>
#include <queue>

#include "partmr/engine.hpp"
#include "partmr/errors.hpp"
#include "partmr/ingest.hpp"

namespace partmr {

namespace {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }
    bool eat(char c) {
        if (!peek(c)) return false;
        ++pos;
        return true;
    }
    void expect(char c, const char* what) {
        if (!eat(c))
            throw parse_error(std::string("expected '") + c + "' " + what, pos);
    }
    // Longest run of identifier characters.
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        return std::string(text.substr(start, pos - start));
    }
    bool eat_word(std::string_view w) {
        skip_ws();
        std::size_t save = pos;
        if (word() == w) return true;
        pos = save;
        return false;
    }
    // Everything up to (not including) one of the stop characters.
    std::string until(std::string_view stops) {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && stops.find(text[pos]) == std::string_view::npos) ++pos;
        std::string out{text.substr(start, pos - start)};
        while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
        return out;
    }
};

StateLabel parse_label(Cursor& c) {
    std::size_t at = c.pos;
    std::string w = c.word();
    if (w == "up") return StateLabel::up;
    if (w == "down") return StateLabel::down;
    if (w == "operational") return StateLabel::operational;
    if (w == "degraded") return StateLabel::degraded;
    if (w == "failed") return StateLabel::failed;
    throw parse_error("unknown state label '" + w +
                          "' (expected up, down, operational, degraded or failed)",
                      at);
}

double parse_time(Cursor& c, std::string_view stops) {
    std::size_t at = c.pos;
    std::string t = c.until(stops);
    try {
        double v = parse_duration(t);
        if (!(v > 0.0)) throw parse_error("time bound must be > 0", at);
        return v;
    } catch (const parse_error&) {
        throw;
    } catch (const input_error& e) {
        throw parse_error(e.what(), at);
    }
}

std::string fmt_time(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17gs", seconds);
    return buf;
}

void reject_threshold(Cursor& c, const char* op) {
    // P>0.9[...] style queries are a different query class; name them.
    if (c.peek('>') || c.peek('<'))
        throw parse_error(std::string(op) +
                              " with a probability threshold is not supported; use =? form",
                          c.pos);
}

}  // namespace

const char* to_string(StateLabel label) {
    switch (label) {
        case StateLabel::up: return "up";
        case StateLabel::down: return "down";
        case StateLabel::operational: return "operational";
        case StateLabel::degraded: return "degraded";
        case StateLabel::failed: return "failed";
    }
    return "?";
}

PropertyQuery parse_property(std::string_view text) {
    Cursor c{text};
    PropertyQuery q;

    if (c.eat_word("forall")) {
        if (!c.eat_word("next"))
            throw parse_error("only 'forall next <label>' is supported", c.pos);
        q.kind = PropertyKind::forall_next;
        q.label = parse_label(c);
    } else if (c.eat_word("P")) {
        reject_threshold(c, "P");
        c.expect('=', "after P");
        c.expect('?', "after P=");
        c.expect('[', "to open the path formula");
        bool is_stay = c.eat_word("G");
        bool is_reach = !is_stay && c.eat_word("F");
        if (is_stay || is_reach) {
            q.kind = is_stay ? PropertyKind::stay : PropertyKind::reach;
            c.expect('[', "to open the time interval");
            std::size_t at = c.pos;
            std::string zero = c.until(",");
            if (zero != "0") throw parse_error("time interval must start at 0", at);
            c.expect(',', "between interval bounds");
            q.time_bound = parse_time(c, "]");
            c.expect(']', "to close the time interval");
            q.label = parse_label(c);
            if (c.eat_word("U"))
                throw parse_error("until operator is not supported", c.pos);
            c.expect(']', "to close the path formula");
        } else if (c.eat_word("X")) {
            throw parse_error("next operator under P=? is not supported", c.pos);
        } else {
            std::size_t at = c.pos;
            // Distinguish `P=?[a U b]` so the message names the construct.
            Cursor probe = c;
            std::string first = probe.word();
            if (!first.empty() && probe.eat_word("U"))
                throw parse_error("unbounded until is not supported", at);
            throw parse_error("expected G[0,T] or F[0,T] path formula", at);
        }
    } else if (c.eat_word("S")) {
        reject_threshold(c, "S");
        c.expect('=', "after S");
        c.expect('?', "after S=");
        c.expect('[', "to open the state formula");
        q.kind = PropertyKind::steady;
        q.label = parse_label(c);
        c.expect(']', "to close the state formula");
    } else if (c.eat_word("R")) {
        c.expect('{', "to open the reward name");
        bool quoted = c.eat('"');
        if (!c.eat_word("up_time"))
            throw parse_error("only the up_time reward is supported", c.pos);
        if (quoted) c.expect('"', "to close the reward name");
        c.expect('}', "to close the reward name");
        c.expect('=', "after the reward name");
        c.expect('?', "after R{...}=");
        c.expect('[', "to open the reward bound");
        if (!c.eat_word("C"))
            throw parse_error("only cumulative reward bounds C<=T are supported", c.pos);
        c.expect('<', "in C<=T");
        c.expect('=', "in C<=T");
        q.kind = PropertyKind::cumulative_reward;
        q.time_bound = parse_time(c, "]");
        c.expect(']', "to close the reward bound");
        c.expect('/', "for the time average");
        if (!c.eat_word("T"))
            throw parse_error("cumulative reward must be averaged as .../T", c.pos);
        q.label = StateLabel::up;
    } else {
        throw parse_error("expected a P=?, S=?, R{up_time}=? or forall query", c.pos);
    }

    if (!c.done()) throw parse_error("unexpected trailing input", c.pos);
    return q;
}

std::string to_string(const PropertyQuery& q) {
    switch (q.kind) {
        case PropertyKind::stay:
            return "P=?[G[0," + fmt_time(q.time_bound) + "] " + to_string(q.label) + "]";
        case PropertyKind::reach:
            return "P=?[F[0," + fmt_time(q.time_bound) + "] " + to_string(q.label) + "]";
        case PropertyKind::steady:
            return "S=?[" + std::string(to_string(q.label)) + "]";
        case PropertyKind::cumulative_reward:
            return "R{up_time}=?[C<=" + fmt_time(q.time_bound) + "]/T";
        case PropertyKind::forall_next:
            return "forall next " + std::string(to_string(q.label));
    }
    return "?";
}

std::vector<std::uint8_t> label_mask(const ComposedCtmc& c, StateLabel label) {
    if (!c.labeled) throw input_error("chain has no state labels; label it first");
    std::vector<std::uint8_t> mask(c.state_count, 0);
    for (std::size_t s = 0; s < c.state_count; ++s) {
        bool up = c.up[s] != 0;
        bool oper = s == c.operational_state;
        switch (label) {
            case StateLabel::up: mask[s] = up; break;
            case StateLabel::down:
            case StateLabel::failed: mask[s] = !up; break;
            case StateLabel::operational: mask[s] = oper; break;
            case StateLabel::degraded: mask[s] = up && !oper; break;
        }
    }
    return mask;
}

double eval_property(const ComposedCtmc& c, const PropertyQuery& q, double eps) {
    std::vector<std::uint8_t> mask = label_mask(c, q.label);
    switch (q.kind) {
        case PropertyKind::stay: {
            ComposedCtmc a = make_absorbing_outside(c, mask);
            std::vector<double> init(c.state_count, 0.0);
            init[c.initial_state()] = 1.0;
            TransientResult tr = transient(a, q.time_bound, init, eps);
            double mass = 0.0;
            for (std::size_t s = 0; s < c.state_count; ++s)
                if (mask[s]) mass += tr.probabilities[s];
            return std::clamp(mass, 0.0, 1.0);
        }
        case PropertyKind::reach: {
            // Reaching the label by T: freeze label states, read their mass.
            std::vector<std::uint8_t> keep(c.state_count);
            for (std::size_t s = 0; s < c.state_count; ++s) keep[s] = !mask[s];
            ComposedCtmc a = make_absorbing_outside(c, keep);
            std::vector<double> init(c.state_count, 0.0);
            init[c.initial_state()] = 1.0;
            TransientResult tr = transient(a, q.time_bound, init, eps);
            double mass = 0.0;
            for (std::size_t s = 0; s < c.state_count; ++s)
                if (mask[s]) mass += tr.probabilities[s];
            return std::clamp(mass, 0.0, 1.0);
        }
        case PropertyKind::steady: {
            std::vector<double> pi = steady_state(c);
            double mass = 0.0;
            for (std::size_t s = 0; s < c.state_count; ++s)
                if (mask[s]) mass += pi[s];
            return std::clamp(mass, 0.0, 1.0);
        }
        case PropertyKind::cumulative_reward:
            return availability(c, q.time_bound, eps);
        case PropertyKind::forall_next: {
            std::vector<std::uint8_t> seen(c.state_count, 0);
            std::queue<std::size_t> frontier;
            frontier.push(c.initial_state());
            seen[c.initial_state()] = 1;
            while (!frontier.empty()) {
                std::size_t s = frontier.front();
                frontier.pop();
                bool ok = false;
                for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx) {
                    if (c.rate[idx] <= 0.0) continue;
                    if (mask[c.col[idx]]) ok = true;
                    if (!seen[c.col[idx]]) {
                        seen[c.col[idx]] = 1;
                        frontier.push(c.col[idx]);
                    }
                }
                if (!ok) return 0.0;
            }
            return 1.0;
        }
    }
    throw input_error("unhandled property kind");
}

}  // namespace partmr
