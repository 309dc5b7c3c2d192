#include "xbar/voq_bank.hpp"

#include <string>

namespace xbar {

VOQBank::VOQBank(int ports, int classes) : n_(ports), c_(classes) {
    if (ports < 1 || ports > PortSet::max_ports)
        throw ConfigError("VOQBank: port count must be in [1, " +
                          std::to_string(PortSet::max_ports) + "]");
    if (classes < 1 || classes > 4)
        throw ConfigError("VOQBank: class count must be in [1, 4]");
    unicast_.resize(static_cast<size_t>(n_) * n_ * c_);
    multicast_.resize(static_cast<size_t>(n_) * c_);
    hol_fanout_.resize(static_cast<size_t>(n_) * c_);
    input_occupancy_.assign(n_, 0);
}

void VOQBank::check_class(int cls) const {
    if (cls < 0 || cls >= c_)
        throw ConfigError("VOQBank: class " + std::to_string(cls) + " out of range");
}

void VOQBank::enqueue(const Cell& cell) {
    if (cell.input < 0 || cell.input >= n_)
        throw ConfigError("enqueue: input port " + std::to_string(cell.input) +
                          " out of range");
    check_class(cell.cls);
    if (cell.destinations.empty())
        throw ConfigError("enqueue: cell has no destinations");
    if (!cell.destinations.subset_of(PortSet::all(n_)))
        throw ConfigError("enqueue: destination out of range");

    if (cell.unicast()) {
        uq(cell.input, cell.sole_destination(), cell.cls).push_back(cell);
    } else {
        auto& q = mq(cell.input, cell.cls);
        q.push_back(cell);
        if (q.size() == 1)  // becomes HOL: full destination set pending
            hol_fanout_[idx_mc(cell.input, cell.cls)] = cell.destinations;
    }
    ++input_occupancy_[cell.input];
    ++total_occupancy_;
}

BitMatrix VOQBank::request_matrix(int cls) const {
    check_class(cls);
    BitMatrix m(n_);
    for (int i = 0; i < n_; ++i) {
        PortSet row;
        for (int j = 0; j < n_; ++j)
            if (!uq(i, j, cls).empty()) row.insert(j);
        m.set_row(i, row);
    }
    return m;
}

std::vector<PortSet> VOQBank::hol_fanout_requests(int cls) const {
    check_class(cls);
    std::vector<PortSet> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = hol_fanout_[idx_mc(i, cls)];
    return out;
}

std::vector<Cell> VOQBank::apply_unicast_match(const Match& match, int cls, int64_t now) {
    check_class(cls);
    if (!match.valid(n_, /*unicast=*/true))
        throw ContractViolation("apply_unicast_match: match violates unicast invariants");
    std::vector<Cell> moved;
    moved.reserve(match.size());
    for (const auto& [i, j] : match.pairs()) {
        auto& q = uq(i, j, cls);
        if (q.empty())
            throw ContractViolation("apply_unicast_match: match references empty queue [" +
                                    std::to_string(i) + "][" + std::to_string(j) + "][" +
                                    std::to_string(cls) + "] at slot " + std::to_string(now));
        moved.push_back(q.front());
        q.pop_front();
        --input_occupancy_[i];
        --total_occupancy_;
    }
    return moved;
}

std::vector<Delivery> VOQBank::apply_multicast_match(const Match& match, int cls, int64_t now) {
    check_class(cls);
    std::vector<Delivery> deliveries;
    deliveries.reserve(match.size());
    for (const auto& [i, o] : match.pairs()) {
        PortSet& fanout = hol_fanout_[idx_mc(i, cls)];
        if (!fanout.contains(o))
            throw ContractViolation("apply_multicast_match: output " + std::to_string(o) +
                                    " not in HOL fanout of input " + std::to_string(i) +
                                    " at slot " + std::to_string(now));
        deliveries.push_back(Delivery{mq(i, cls).front(), o});
        fanout.erase(o);
    }
    // Fanouts that drained completely finish service: dequeue the HOL cell
    // and expose the next one.
    for (int i : match.matched_inputs()) {
        PortSet& fanout = hol_fanout_[idx_mc(i, cls)];
        auto& q = mq(i, cls);
        if (fanout.empty() && !q.empty()) {
            q.pop_front();
            --input_occupancy_[i];
            --total_occupancy_;
            if (!q.empty()) fanout = q.front().destinations;
        }
    }
    return deliveries;
}

WeightMatrix VOQBank::queue_length_weights(int cls) const {
    check_class(cls);
    WeightMatrix w(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            w.set(i, j, static_cast<int64_t>(uq(i, j, cls).size()));
    return w;
}

WeightMatrix VOQBank::hol_age_weights(int cls, int64_t now) const {
    check_class(cls);
    WeightMatrix w(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            const auto& q = uq(i, j, cls);
            if (!q.empty()) w.set(i, j, now - q.front().arrival_slot + 1);
        }
    return w;
}

int64_t VOQBank::multicast_hol_age(int i, int cls, int64_t now) const {
    const auto& q = mq(i, cls);
    if (q.empty()) return 0;
    return now - q.front().arrival_slot + 1;
}

}  // namespace xbar
