#ifndef XBAR_CELL_HPP
#define XBAR_CELL_HPP

#include <cstdint>

#include "xbar/port_set.hpp"

namespace xbar {

// A fixed-size packet. Unicast iff it carries exactly one destination.
struct Cell {
    uint64_t id = 0;         // unique arrival sequence number
    int input = 0;           // ingress port, [0, N)
    PortSet destinations;    // non-empty set of egress ports
    int cls = 0;             // priority class, [0, C)
    int64_t arrival_slot = 0;

    bool unicast() const { return destinations.count() == 1; }
    int sole_destination() const { return destinations.first(); }
};

// Discrete simulation time, one tick per fixed-length packet time.
struct SlotClock {
    int64_t slot = 0;
    void advance() { ++slot; }
};

}  // namespace xbar

#endif
