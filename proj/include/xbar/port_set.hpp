#ifndef XBAR_PORT_SET_HPP
#define XBAR_PORT_SET_HPP

#include <bit>
#include <cassert>
#include <cstdint>

namespace xbar {

// Set of port indices in [0, 64), backed by a single word so the
// round-robin arbiters reduce to shift/count-trailing-zero operations.
class PortSet {
public:
    static constexpr int max_ports = 64;

    constexpr PortSet() = default;

    static constexpr PortSet from_bits(uint64_t bits) {
        PortSet s;
        s.bits_ = bits;
        return s;
    }

    // Set containing every port in [0, n).
    static constexpr PortSet all(int n) {
        assert(n >= 0 && n <= max_ports);
        if (n == 0) return PortSet();
        return from_bits(~uint64_t{0} >> (max_ports - n));
    }

    static constexpr PortSet single(int p) {
        PortSet s;
        s.insert(p);
        return s;
    }

    constexpr bool contains(int p) const {
        assert(p >= 0 && p < max_ports);
        return (bits_ >> p) & 1u;
    }
    constexpr void insert(int p) {
        assert(p >= 0 && p < max_ports);
        bits_ |= uint64_t{1} << p;
    }
    constexpr void erase(int p) {
        assert(p >= 0 && p < max_ports);
        bits_ &= ~(uint64_t{1} << p);
    }

    constexpr bool empty() const { return bits_ == 0; }
    constexpr int count() const { return std::popcount(bits_); }
    constexpr uint64_t bits() const { return bits_; }

    // Lowest port in the set; set must be non-empty.
    constexpr int first() const {
        assert(!empty());
        return std::countr_zero(bits_);
    }

    constexpr PortSet operator&(PortSet o) const { return from_bits(bits_ & o.bits_); }
    constexpr PortSet operator|(PortSet o) const { return from_bits(bits_ | o.bits_); }
    constexpr PortSet operator-(PortSet o) const { return from_bits(bits_ & ~o.bits_); }
    constexpr PortSet& operator&=(PortSet o) { bits_ &= o.bits_; return *this; }
    constexpr PortSet& operator|=(PortSet o) { bits_ |= o.bits_; return *this; }
    constexpr bool operator==(const PortSet&) const = default;

    constexpr bool subset_of(PortSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr bool intersects(PortSet o) const { return (bits_ & o.bits_) != 0; }

    // Iterates set members in ascending order.
    class iterator {
    public:
        constexpr explicit iterator(uint64_t rest) : rest_(rest) {}
        constexpr int operator*() const { return std::countr_zero(rest_); }
        constexpr iterator& operator++() {
            rest_ &= rest_ - 1;
            return *this;
        }
        constexpr bool operator!=(const iterator& o) const { return rest_ != o.rest_; }

    private:
        uint64_t rest_;
    };

    constexpr iterator begin() const { return iterator(bits_); }
    constexpr iterator end() const { return iterator(0); }

private:
    uint64_t bits_ = 0;
};

}  // namespace xbar

#endif
