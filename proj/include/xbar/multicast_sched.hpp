#ifndef XBAR_MULTICAST_SCHED_HPP
#define XBAR_MULTICAST_SCHED_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "xbar/match.hpp"
#include "xbar/port_set.hpp"

namespace xbar {

// Per-input set of requested outputs: the multicast HOL cell's unserved
// destinations. An empty set means no multicast HOL cell at that input.
using FanoutSets = std::vector<PortSet>;

// Unserved output copies left behind by a slot's multicast match.
struct ResidueReport {
    std::vector<int> residual_copies;  // per input
    int residue_inputs = 0;            // inputs with residual copies
};

// Fanout splitting with a uniformly random choice of winner per output.
// Work-conserving: every requested output is assigned.
Match random_split_schedule(const FanoutSets& fanouts, int num_outputs, std::mt19937_64& rng);

// No fanout splitting: inputs considered round-robin from `order_pointer`;
// an input wins either its whole fanout or nothing. Not work-conserving.
Match no_split_schedule(const FanoutSets& fanouts, int num_outputs, int order_pointer);

// Work-conserving match that concentrates the residue on the minimum
// number of inputs, ties broken by preferring full service to inputs in
// round-robin order from `tie_pointer`. Exact (pruned set-packing search)
// for up to 16 active inputs, greedy beyond; *exact reports which ran.
Match concentrate_schedule(const FanoutSets& fanouts, int num_outputs, int tie_pointer,
                           bool* exact = nullptr);

// Weight-based policy: each HOL cell weighs age against remaining fanout
// (weight = w_age * age - w_fanout * |fanout|); every contested output
// grants to its highest-weight requester, ties to the lowest input index.
Match wba_schedule(const FanoutSets& fanouts, const std::vector<int64_t>& hol_age, double w_age,
                   double w_fanout);

ResidueReport compute_residue(const FanoutSets& fanouts, const Match& match);

// Oracle: exhaustive enumeration over all work-conserving assignments.
// Refuses instances with more than 12 contested outputs.
int brute_force_min_residue(const FanoutSets& fanouts, int num_outputs);

}  // namespace xbar

#endif
