#ifndef XBAR_VOQ_BANK_HPP
#define XBAR_VOQ_BANK_HPP

#include <cstdint>
#include <deque>
#include <vector>

#include "xbar/bit_matrix.hpp"
#include "xbar/cell.hpp"
#include "xbar/errors.hpp"
#include "xbar/match.hpp"

namespace xbar {

// One delivered copy of a (possibly multicast) cell.
struct Delivery {
    Cell cell;
    int output;
};

// Per-input queueing structure: N x N x C virtual output queues for
// unicast plus a single multicast FIFO per input per class. The HOL
// fanout of each multicast FIFO is stored state, so splitting a fanout
// across slots is explicit and auditable.
class VOQBank {
public:
    VOQBank(int ports, int classes = 1);

    int ports() const { return n_; }
    int classes() const { return c_; }

    void enqueue(const Cell& cell);

    // (i, j) true iff unicast queue [i][j][cls] is non-empty.
    BitMatrix request_matrix(int cls) const;

    // Per input: the not-yet-served destinations of the multicast HOL
    // cell of class `cls` (empty set when the FIFO is empty).
    std::vector<PortSet> hol_fanout_requests(int cls) const;

    // Dequeues the HOL cell of every matched unicast queue. The match must
    // be a valid unicast match over non-empty queues.
    std::vector<Cell> apply_unicast_match(const Match& match, int cls, int64_t now);

    // Serves multicast copies: every matched output must be in the owning
    // input's HOL fanout. When a fanout empties, the HOL cell is dequeued
    // and the next cell (if any) takes its place.
    std::vector<Delivery> apply_multicast_match(const Match& match, int cls, int64_t now);

    // Weights for the weighted schedulers.
    WeightMatrix queue_length_weights(int cls) const;
    WeightMatrix hol_age_weights(int cls, int64_t now) const;  // age = now - arrival + 1

    size_t unicast_len(int i, int j, int cls) const { return uq(i, j, cls).size(); }
    size_t multicast_len(int i, int cls) const { return mq(i, cls).size(); }
    const std::deque<Cell>& unicast_queue(int i, int j, int cls) const { return uq(i, j, cls); }
    const std::deque<Cell>& multicast_queue(int i, int cls) const { return mq(i, cls); }
    PortSet hol_fanout(int i, int cls) const { return hol_fanout_[idx_mc(i, cls)]; }

    // Multicast HOL age in slots, 0 when no HOL cell; used for WBA weights
    // and starvation surveillance.
    int64_t multicast_hol_age(int i, int cls, int64_t now) const;

    size_t input_occupancy(int i) const { return input_occupancy_[i]; }
    size_t total_occupancy() const { return total_occupancy_; }

private:
    std::deque<Cell>& uq(int i, int j, int cls) { return unicast_[idx_uq(i, j, cls)]; }
    const std::deque<Cell>& uq(int i, int j, int cls) const { return unicast_[idx_uq(i, j, cls)]; }
    std::deque<Cell>& mq(int i, int cls) { return multicast_[idx_mc(i, cls)]; }
    const std::deque<Cell>& mq(int i, int cls) const { return multicast_[idx_mc(i, cls)]; }

    size_t idx_uq(int i, int j, int cls) const {
        return (static_cast<size_t>(i) * n_ + j) * c_ + cls;
    }
    size_t idx_mc(int i, int cls) const { return static_cast<size_t>(i) * c_ + cls; }

    void check_class(int cls) const;

    int n_;
    int c_;
    std::vector<std::deque<Cell>> unicast_;    // [i][j][cls]
    std::vector<std::deque<Cell>> multicast_;  // [i][cls]
    std::vector<PortSet> hol_fanout_;          // [i][cls]
    std::vector<size_t> input_occupancy_;
    size_t total_occupancy_ = 0;
};

}  // namespace xbar

#endif
