#ifndef XBAR_BIT_MATRIX_HPP
#define XBAR_BIT_MATRIX_HPP

#include <cassert>
#include <cstdint>
#include <vector>

#include "xbar/port_set.hpp"

namespace xbar {

// Square N x N boolean matrix; rows are inputs, columns are outputs.
class BitMatrix {
public:
    explicit BitMatrix(int n) : n_(n), rows_(n) { assert(n >= 0 && n <= PortSet::max_ports); }

    int size() const { return n_; }

    bool get(int i, int j) const { return rows_[i].contains(j); }
    void set(int i, int j, bool v = true) {
        if (v)
            rows_[i].insert(j);
        else
            rows_[i].erase(j);
    }

    PortSet row(int i) const { return rows_[i]; }
    void set_row(int i, PortSet s) { rows_[i] = s; }

    PortSet col(int j) const {
        PortSet c;
        for (int i = 0; i < n_; ++i)
            if (rows_[i].contains(j)) c.insert(i);
        return c;
    }

    bool any() const {
        for (int i = 0; i < n_; ++i)
            if (!rows_[i].empty()) return true;
        return false;
    }

    static BitMatrix identity(int n) {
        BitMatrix m(n);
        for (int i = 0; i < n; ++i) m.set(i, i);
        return m;
    }

    bool operator==(const BitMatrix&) const = default;

private:
    int n_;
    std::vector<PortSet> rows_;
};

// Square N x N integer weights for the weighted schedulers.
class WeightMatrix {
public:
    explicit WeightMatrix(int n) : n_(n), w_(static_cast<size_t>(n) * n, 0) {}

    int size() const { return n_; }
    int64_t at(int i, int j) const { return w_[static_cast<size_t>(i) * n_ + j]; }
    void set(int i, int j, int64_t v) { w_[static_cast<size_t>(i) * n_ + j] = v; }

private:
    int n_;
    std::vector<int64_t> w_;
};

}  // namespace xbar

#endif
