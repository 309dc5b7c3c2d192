#include "xbar/multicast_sched.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "xbar/errors.hpp"

namespace xbar {

namespace {

void check_fanouts(const FanoutSets& fanouts, int num_outputs) {
    if (num_outputs < 1 || num_outputs > PortSet::max_ports)
        throw ConfigError("multicast schedule: bad output count");
    for (const PortSet& f : fanouts)
        if (!f.subset_of(PortSet::all(num_outputs)))
            throw ConfigError("multicast schedule: fanout references output out of range");
}

// Requesters per output.
std::vector<PortSet> requester_sets(const FanoutSets& fanouts, int num_outputs) {
    std::vector<PortSet> req(num_outputs);
    for (size_t i = 0; i < fanouts.size(); ++i)
        for (int o : fanouts[i]) req[o].insert(static_cast<int>(i));
    return req;
}

// Inputs in round-robin order starting at `from`, active (non-empty
// fanout) ones only.
std::vector<int> rotated_active_inputs(const FanoutSets& fanouts, int from) {
    const int m = static_cast<int>(fanouts.size());
    std::vector<int> order;
    order.reserve(m);
    for (int k = 0; k < m; ++k) {
        const int i = (from + k) % m;
        if (!fanouts[i].empty()) order.push_back(i);
    }
    return order;
}

// Max-cardinality set of pairwise-disjoint fanouts among `order`,
// preferring earlier inputs in `order` on ties. Include-first DFS visits
// candidate sets in lexicographically decreasing order over `order`, so
// the first set found at any given size is the tie-break winner.
struct PackingSearch {
    const FanoutSets& fanouts;
    const std::vector<int>& order;
    std::vector<int> chosen;
    std::vector<int> best;

    void run(size_t pos, PortSet claimed) {
        if (chosen.size() + (order.size() - pos) <= best.size()) return;  // bound
        if (pos == order.size()) {
            if (chosen.size() > best.size()) best = chosen;
            return;
        }
        const int i = order[pos];
        if (!fanouts[i].intersects(claimed)) {
            chosen.push_back(i);
            run(pos + 1, claimed | fanouts[i]);
            chosen.pop_back();
        }
        run(pos + 1, claimed);
    }
};

}  // namespace

Match random_split_schedule(const FanoutSets& fanouts, int num_outputs, std::mt19937_64& rng) {
    check_fanouts(fanouts, num_outputs);
    const auto requesters = requester_sets(fanouts, num_outputs);
    Match m;
    for (int o = 0; o < num_outputs; ++o) {
        const int k = requesters[o].count();
        if (k == 0) continue;
        // multiply-shift keeps the draw deterministic across platforms
        const int pick = static_cast<int>((static_cast<unsigned __int128>(rng()) * k) >> 64);
        int idx = 0;
        for (int i : requesters[o]) {
            if (idx++ == pick) {
                m.add(i, o);
                break;
            }
        }
    }
    return m;
}

Match no_split_schedule(const FanoutSets& fanouts, int num_outputs, int order_pointer) {
    check_fanouts(fanouts, num_outputs);
    const int m_inputs = static_cast<int>(fanouts.size());
    if (m_inputs == 0) return Match();
    if (order_pointer < 0 || order_pointer >= m_inputs)
        throw ConfigError("no_split_schedule: order pointer out of range");

    Match m;
    PortSet claimed;
    for (int i : rotated_active_inputs(fanouts, order_pointer)) {
        if (fanouts[i].intersects(claimed)) continue;  // all-or-nothing
        for (int o : fanouts[i]) m.add(i, o);
        claimed |= fanouts[i];
    }
    return m;
}

Match concentrate_schedule(const FanoutSets& fanouts, int num_outputs, int tie_pointer,
                           bool* exact) {
    check_fanouts(fanouts, num_outputs);
    const int m_inputs = static_cast<int>(fanouts.size());
    if (m_inputs == 0) {
        if (exact) *exact = true;
        return Match();
    }
    if (tie_pointer < 0 || tie_pointer >= m_inputs)
        throw ConfigError("concentrate_schedule: tie pointer out of range");

    // Minimizing the number of inputs left holding residue is the same as
    // fully serving as many inputs as possible, and a set of inputs can be
    // fully served together iff their fanouts are pairwise disjoint.
    std::vector<int> order = rotated_active_inputs(fanouts, tie_pointer);
    std::vector<int> served;
    const bool exact_search = order.size() <= 16;
    if (exact_search) {
        PackingSearch search{fanouts, order, {}, {}};
        search.run(0, PortSet());
        served = search.best;
    } else {
        // Greedy: easiest-to-complete fanouts first, largest last; stable
        // on the rotated order so the tie-break intent survives.
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return fanouts[a].count() < fanouts[b].count();
        });
        PortSet claimed;
        for (int i : order) {
            if (fanouts[i].intersects(claimed)) continue;
            served.push_back(i);
            claimed |= fanouts[i];
        }
    }
    if (exact) *exact = exact_search;

    Match m;
    PortSet claimed;
    for (int i : served) {
        for (int o : fanouts[i]) m.add(i, o);
        claimed |= fanouts[i];
    }
    // Remaining requested outputs keep the match work-conserving; hand
    // each to its first requester in rotated order (the recipients stay
    // partially served either way).
    const auto requesters = requester_sets(fanouts, num_outputs);
    for (int o = 0; o < num_outputs; ++o) {
        if (requesters[o].empty() || claimed.contains(o)) continue;
        for (int k = 0; k < m_inputs; ++k) {
            const int i = (tie_pointer + k) % m_inputs;
            if (requesters[o].contains(i)) {
                m.add(i, o);
                break;
            }
        }
    }
    return m;
}

Match wba_schedule(const FanoutSets& fanouts, const std::vector<int64_t>& hol_age, double w_age,
                   double w_fanout) {
    if (hol_age.size() != fanouts.size())
        throw ConfigError("wba_schedule: age vector dimension mismatch");
    if (w_age < 0 || w_fanout < 0) throw ConfigError("wba_schedule: weights must be >= 0");
    int num_outputs = 0;
    for (const PortSet& f : fanouts)
        for (int o : f) num_outputs = std::max(num_outputs, o + 1);
    check_fanouts(fanouts, std::max(num_outputs, 1));

    std::vector<double> weight(fanouts.size(), 0.0);
    for (size_t i = 0; i < fanouts.size(); ++i)
        weight[i] = w_age * static_cast<double>(hol_age[i]) - w_fanout * fanouts[i].count();

    const auto requesters = requester_sets(fanouts, std::max(num_outputs, 1));
    Match m;
    for (int o = 0; o < num_outputs; ++o) {
        if (requesters[o].empty()) continue;
        int winner = -1;
        for (int i : requesters[o])
            if (winner < 0 || weight[i] > weight[winner]) winner = i;  // ties: lowest index
        m.add(winner, o);
    }
    return m;
}

ResidueReport compute_residue(const FanoutSets& fanouts, const Match& match) {
    ResidueReport report;
    report.residual_copies.assign(fanouts.size(), 0);
    std::vector<int> served(fanouts.size(), 0);
    for (const auto& [i, o] : match.pairs()) {
        if (i < 0 || i >= static_cast<int>(fanouts.size()) || !fanouts[i].contains(o))
            throw ContractViolation("compute_residue: match pair (" + std::to_string(i) + "," +
                                    std::to_string(o) + ") not in fanouts");
        ++served[i];
    }
    for (size_t i = 0; i < fanouts.size(); ++i) {
        report.residual_copies[i] = fanouts[i].count() - served[i];
        if (report.residual_copies[i] > 0) ++report.residue_inputs;
    }
    return report;
}

int brute_force_min_residue(const FanoutSets& fanouts, int num_outputs) {
    check_fanouts(fanouts, num_outputs);
    const auto requesters = requester_sets(fanouts, num_outputs);

    std::vector<int> forced_served(fanouts.size(), 0);
    std::vector<std::vector<int>> contested;  // requester lists per contested output
    for (int o = 0; o < num_outputs; ++o) {
        const int k = requesters[o].count();
        if (k == 1) {
            ++forced_served[requesters[o].first()];
        } else if (k > 1) {
            std::vector<int> reqs;
            for (int i : requesters[o]) reqs.push_back(i);
            contested.push_back(std::move(reqs));
        }
    }
    if (contested.size() > 12)
        throw ConfigError("brute_force_min_residue: more than 12 contested outputs");

    std::vector<int> pick(contested.size(), 0);
    std::vector<int> served(fanouts.size(), 0);
    int best = std::numeric_limits<int>::max();
    while (true) {
        served = forced_served;
        for (size_t c = 0; c < contested.size(); ++c) ++served[contested[c][pick[c]]];
        int residue_inputs = 0;
        for (size_t i = 0; i < fanouts.size(); ++i)
            if (fanouts[i].count() - served[i] > 0) ++residue_inputs;
        best = std::min(best, residue_inputs);

        // odometer over requester choices
        size_t c = 0;
        while (c < contested.size()) {
            if (++pick[c] < static_cast<int>(contested[c].size())) break;
            pick[c++] = 0;
        }
        if (c == contested.size()) break;
    }
    return best;
}

}  // namespace xbar
