#ifndef XBAR_PPE_HPP
#define XBAR_PPE_HPP

#include <cassert>
#include <optional>

#include "xbar/port_set.hpp"

namespace xbar {

// Programmable priority encoder: the one arbitration primitive behind all
// grant and accept arbiters. Returns the lowest index at or cyclically
// after `pointer` whose request bit is set, or nothing when no bit in
// [0, n) is set. Pure; pointer registers live with the scheduler and are
// only ever updated by its pointer-update rules.
inline std::optional<int> ppe_select(PortSet requests, int pointer, int n) {
    assert(n >= 1 && n <= PortSet::max_ports);
    assert(pointer >= 0 && pointer < n);
    const uint64_t bits = requests.bits() & PortSet::all(n).bits();
    if (bits == 0) return std::nullopt;
    if (const uint64_t at_or_after = bits >> pointer; at_or_after != 0)
        return pointer + std::countr_zero(at_or_after);
    return std::countr_zero(bits);  // wrapped
}

}  // namespace xbar

#endif
