#ifndef XBAR_UNICAST_SCHED_HPP
#define XBAR_UNICAST_SCHED_HPP

#include <optional>
#include <vector>

#include "xbar/bit_matrix.hpp"
#include "xbar/match.hpp"
#include "xbar/ppe.hpp"

namespace xbar {

// The 2N round-robin pointers of the iterative schedulers: one grant
// pointer per output, one accept pointer per input. Mutated only by the
// schedulers' pointer-update rules.
struct SchedulerState {
    std::vector<int> grant_ptr;
    std::vector<int> accept_ptr;

    explicit SchedulerState(int n) : grant_ptr(n, 0), accept_ptr(n, 0) {}
    int size() const { return static_cast<int>(grant_ptr.size()); }
};

struct PointerUpdate {
    char which;  // 'g' or 'a'
    int index;
    int from;
    int to;
};

// One request/grant/accept round, recorded for auditing and trace output.
struct IterationRecord {
    std::vector<PortSet> requests;  // per input: outputs requested (eligible only)
    std::vector<int> grants;        // per output: granted input, -1 if none
    std::vector<int> accepts;       // per input: accepted output, -1 if none
    std::vector<PointerUpdate> pointer_updates;
};

using IterationTrace = std::vector<IterationRecord>;

struct ScheduleResult {
    Match match;
    int iterations_used = 0;
};

// iSLIP: iterative round-robin matching. Pointers advance past the matched
// partner only when the grant is accepted in the first iteration, which
// desynchronizes the arbiters under load.
ScheduleResult islip_schedule(const BitMatrix& requests, SchedulerState& state,
                              int max_iters, IterationTrace* trace = nullptr);

// Naive round-robin matching: identical structure, but the grant pointer
// advances past the granted input whether or not the grant is accepted and
// the accept pointer advances unconditionally. Kept as the baseline whose
// saturation throughput collapses to about 1 - 1/e.
ScheduleResult rrm_schedule(const BitMatrix& requests, SchedulerState& state,
                            int max_iters = 1, IterationTrace* trace = nullptr);

// Weighted iterative variants: grant and accept arbiters pick the
// maximum-weight candidate, ties broken round-robin from the g/a pointers,
// with iSLIP's pointer-update rule. iLQF feeds queue lengths, iOCF feeds
// HOL waiting times; weights must be positive exactly where a request is.
ScheduleResult ilqf_schedule(const BitMatrix& requests, const WeightMatrix& weights,
                             SchedulerState& state, int max_iters,
                             IterationTrace* trace = nullptr);
ScheduleResult iocf_schedule(const BitMatrix& requests, const WeightMatrix& weights,
                             SchedulerState& state, int max_iters,
                             IterationTrace* trace = nullptr);

// Exact maximum-cardinality matching contained in the request matrix
// (augmenting-path search, deterministic ascending scan order).
Match max_size_match(const BitMatrix& requests);

// Exact maximum-weight matching over non-negative weights; pairs of zero
// weight are never included.
Match max_weight_match(const WeightMatrix& weights);

// FIFO baseline: each input exposes only its single FIFO's HOL
// destination; contested outputs grant round-robin and the grant pointer
// advances past the served input. Inputs always accept.
Match fifo_hol_schedule(const std::vector<std::optional<int>>& hol_destination,
                        SchedulerState& state);

}  // namespace xbar

#endif
