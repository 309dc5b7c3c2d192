#include "xbar/unicast_sched.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>

#include "xbar/errors.hpp"

namespace xbar {

namespace {

enum class PointerRule { Islip, Rrm };

void check_dimensions(const BitMatrix& requests, const SchedulerState& state, int max_iters) {
    if (requests.size() != state.size())
        throw ConfigError("schedule: request matrix is " + std::to_string(requests.size()) +
                          " ports but scheduler state is " + std::to_string(state.size()));
    if (max_iters < 1) throw ConfigError("schedule: max_iters must be >= 1");
}

bool any_eligible(const BitMatrix& requests, PortSet free_in, PortSet free_out) {
    for (int i : free_in)
        if (requests.row(i).intersects(free_out)) return true;
    return false;
}

// Shared three-phase iteration loop for iSLIP and RRM. Only unmatched
// ports take part in an iteration; connections made earlier are never
// removed. iterations_used counts iterations that actually ran the three
// phases; a follow-up iteration runs only while eligible requests remain.
ScheduleResult iterate_round_robin(const BitMatrix& requests, SchedulerState& state,
                                   int max_iters, PointerRule rule, IterationTrace* trace) {
    check_dimensions(requests, state, max_iters);
    const int n = requests.size();

    ScheduleResult result;
    PortSet free_in = PortSet::all(n);
    PortSet free_out = PortSet::all(n);

    for (int iter = 1; iter <= max_iters; ++iter) {
        if (iter > 1 && !any_eligible(requests, free_in, free_out)) break;
        result.iterations_used = iter;

        IterationRecord rec;
        if (trace) {
            rec.requests.resize(n);
            for (int i : free_in) rec.requests[i] = requests.row(i) & free_out;
            rec.grants.assign(n, -1);
            rec.accepts.assign(n, -1);
        }

        // Grant phase: each unmatched output picks the next eligible
        // requesting input at or after its pointer.
        std::vector<PortSet> grants_at(n);  // per input: outputs granting it
        for (int o : free_out) {
            const PortSet reqs = requests.col(o) & free_in;
            const auto g = ppe_select(reqs, state.grant_ptr[o], n);
            if (!g) continue;
            grants_at[*g].insert(o);
            if (rule == PointerRule::Rrm) {
                // advance past the granted input whether or not accepted
                if (trace)
                    rec.pointer_updates.push_back({'g', o, state.grant_ptr[o], (*g + 1) % n});
                state.grant_ptr[o] = (*g + 1) % n;
            }
            if (trace) rec.grants[o] = *g;
        }

        // Accept phase: each input with grants picks one.
        int added = 0;
        for (int i : free_in) {
            if (grants_at[i].empty()) continue;
            const int o = *ppe_select(grants_at[i], state.accept_ptr[i], n);
            result.match.add(i, o);
            ++added;
            if (rule == PointerRule::Islip && iter == 1) {
                if (trace) {
                    rec.pointer_updates.push_back({'g', o, state.grant_ptr[o], (i + 1) % n});
                    rec.pointer_updates.push_back({'a', i, state.accept_ptr[i], (o + 1) % n});
                }
                state.grant_ptr[o] = (i + 1) % n;
                state.accept_ptr[i] = (o + 1) % n;
            } else if (rule == PointerRule::Rrm) {
                if (trace)
                    rec.pointer_updates.push_back({'a', i, state.accept_ptr[i], (o + 1) % n});
                state.accept_ptr[i] = (o + 1) % n;
            }
            if (trace) rec.accepts[i] = o;
        }
        for (const auto& [i, o] : result.match.pairs()) {
            free_in.erase(i);
            free_out.erase(o);
        }

        if (trace) trace->push_back(std::move(rec));
        if (added == 0) break;
    }
    return result;
}

void check_weights(const BitMatrix& requests, const WeightMatrix& weights) {
    if (weights.size() != requests.size())
        throw ConfigError("weighted schedule: weight matrix dimension mismatch");
    const int n = requests.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const bool req = requests.get(i, j);
            const int64_t w = weights.at(i, j);
            if (req && w <= 0)
                throw ConfigError("weighted schedule: request (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") has non-positive weight");
            if (!req && w != 0)
                throw ConfigError("weighted schedule: weight (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") without a request");
        }
}

// Candidates of maximum weight within `candidates`; weight of candidate k
// is taken via `weight_of(k)`.
template <typename WeightFn>
PortSet max_weight_ties(PortSet candidates, WeightFn weight_of) {
    int64_t best = std::numeric_limits<int64_t>::min();
    PortSet ties;
    for (int k : candidates) {
        const int64_t w = weight_of(k);
        if (w > best) {
            best = w;
            ties = PortSet::single(k);
        } else if (w == best) {
            ties.insert(k);
        }
    }
    return ties;
}

// Weighted three-phase loop (iLQF / iOCF): identical skeleton, but the
// arbiters first restrict to the maximum-weight candidates and only then
// fall back to the round-robin pointer for the tie-break. Pointer updates
// follow the iSLIP rule.
ScheduleResult iterate_weighted(const BitMatrix& requests, const WeightMatrix& weights,
                                SchedulerState& state, int max_iters, IterationTrace* trace) {
    check_dimensions(requests, state, max_iters);
    check_weights(requests, weights);
    const int n = requests.size();

    ScheduleResult result;
    PortSet free_in = PortSet::all(n);
    PortSet free_out = PortSet::all(n);

    for (int iter = 1; iter <= max_iters; ++iter) {
        if (iter > 1 && !any_eligible(requests, free_in, free_out)) break;
        result.iterations_used = iter;

        IterationRecord rec;
        if (trace) {
            rec.requests.resize(n);
            for (int i : free_in) rec.requests[i] = requests.row(i) & free_out;
            rec.grants.assign(n, -1);
            rec.accepts.assign(n, -1);
        }

        std::vector<PortSet> grants_at(n);
        for (int o : free_out) {
            const PortSet reqs = requests.col(o) & free_in;
            if (reqs.empty()) continue;
            const PortSet ties = max_weight_ties(reqs, [&](int i) { return weights.at(i, o); });
            const int g = *ppe_select(ties, state.grant_ptr[o], n);
            grants_at[g].insert(o);
            if (trace) rec.grants[o] = g;
        }

        int added = 0;
        for (int i : free_in) {
            if (grants_at[i].empty()) continue;
            const PortSet ties =
                max_weight_ties(grants_at[i], [&](int o) { return weights.at(i, o); });
            const int o = *ppe_select(ties, state.accept_ptr[i], n);
            result.match.add(i, o);
            ++added;
            if (iter == 1) {
                if (trace) {
                    rec.pointer_updates.push_back({'g', o, state.grant_ptr[o], (i + 1) % n});
                    rec.pointer_updates.push_back({'a', i, state.accept_ptr[i], (o + 1) % n});
                }
                state.grant_ptr[o] = (i + 1) % n;
                state.accept_ptr[i] = (o + 1) % n;
            }
            if (trace) rec.accepts[i] = o;
        }
        for (const auto& [i, o] : result.match.pairs()) {
            free_in.erase(i);
            free_out.erase(o);
        }

        if (trace) trace->push_back(std::move(rec));
        if (added == 0) break;
    }
    return result;
}

// Kuhn's augmenting-path search from input `i`, outputs scanned ascending.
bool try_augment(const BitMatrix& requests, int i, PortSet& visited_out,
                 std::vector<int>& match_of_output) {
    for (int o : requests.row(i)) {
        if (visited_out.contains(o)) continue;
        visited_out.insert(o);
        if (match_of_output[o] < 0 ||
            try_augment(requests, match_of_output[o], visited_out, match_of_output)) {
            match_of_output[o] = i;
            return true;
        }
    }
    return false;
}

}  // namespace

ScheduleResult islip_schedule(const BitMatrix& requests, SchedulerState& state, int max_iters,
                              IterationTrace* trace) {
    return iterate_round_robin(requests, state, max_iters, PointerRule::Islip, trace);
}

ScheduleResult rrm_schedule(const BitMatrix& requests, SchedulerState& state, int max_iters,
                            IterationTrace* trace) {
    return iterate_round_robin(requests, state, max_iters, PointerRule::Rrm, trace);
}

ScheduleResult ilqf_schedule(const BitMatrix& requests, const WeightMatrix& weights,
                             SchedulerState& state, int max_iters, IterationTrace* trace) {
    return iterate_weighted(requests, weights, state, max_iters, trace);
}

ScheduleResult iocf_schedule(const BitMatrix& requests, const WeightMatrix& weights,
                             SchedulerState& state, int max_iters, IterationTrace* trace) {
    return iterate_weighted(requests, weights, state, max_iters, trace);
}

Match max_size_match(const BitMatrix& requests) {
    const int n = requests.size();
    std::vector<int> match_of_output(n, -1);
    for (int i = 0; i < n; ++i) {
        PortSet visited;
        try_augment(requests, i, visited, match_of_output);
    }
    Match m;
    for (int o = 0; o < n; ++o)
        if (match_of_output[o] >= 0) m.add(match_of_output[o], o);
    return m;
}

// Hungarian algorithm (shortest augmenting paths with potentials) on the
// negated weights; a complete zero-padded cost matrix always has a perfect
// assignment, and dropping zero-weight pairs afterwards leaves a
// maximum-weight matching.
Match max_weight_match(const WeightMatrix& weights) {
    const int n = weights.size();
    if (n == 0) return Match();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (weights.at(i, j) < 0)
                throw ConfigError("max_weight_match: negative weight");

    constexpr int64_t inf = std::numeric_limits<int64_t>::max() / 4;
    // 1-indexed arrays; p[j] = input assigned to output j.
    std::vector<int64_t> u(n + 1, 0), v(n + 1, 0), minv(n + 1, 0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            int64_t delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const int64_t cost = -weights.at(i0 - 1, j - 1);
                const int64_t cur = cost - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    Match m;
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0 && weights.at(p[j] - 1, j - 1) > 0) m.add(p[j] - 1, j - 1);
    return m;
}

Match fifo_hol_schedule(const std::vector<std::optional<int>>& hol_destination,
                        SchedulerState& state) {
    const int n = state.size();
    if (static_cast<int>(hol_destination.size()) != n)
        throw ConfigError("fifo_hol_schedule: HOL vector dimension mismatch");

    std::vector<PortSet> requesters(n);
    for (int i = 0; i < n; ++i) {
        if (!hol_destination[i]) continue;
        const int o = *hol_destination[i];
        if (o < 0 || o >= n) throw ConfigError("fifo_hol_schedule: destination out of range");
        requesters[o].insert(i);
    }

    Match m;
    for (int o = 0; o < n; ++o) {
        const auto g = ppe_select(requesters[o], state.grant_ptr[o], n);
        if (!g) continue;
        // Single-FIFO inputs request exactly one output, so every grant is
        // accepted; the pointer moves past the served input.
        m.add(*g, o);
        state.grant_ptr[o] = (*g + 1) % n;
    }
    return m;
}

}  // namespace xbar
