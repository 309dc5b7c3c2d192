#include "xbar/sim.hpp"

#include <algorithm>
#include <map>

#include "xbar/errors.hpp"

namespace xbar {

PolicySpec parse_policy(const std::string& name) {
    static const std::map<std::string, std::pair<UnicastPolicy, MulticastPolicy>> table = {
        {"islip", {UnicastPolicy::Islip, MulticastPolicy::None}},
        {"rrm", {UnicastPolicy::Rrm, MulticastPolicy::None}},
        {"ilqf", {UnicastPolicy::Ilqf, MulticastPolicy::None}},
        {"iocf", {UnicastPolicy::Iocf, MulticastPolicy::None}},
        {"maxsize", {UnicastPolicy::MaxSize, MulticastPolicy::None}},
        {"lqf", {UnicastPolicy::MwmLqf, MulticastPolicy::None}},
        {"ocf", {UnicastPolicy::MwmOcf, MulticastPolicy::None}},
        {"fifo", {UnicastPolicy::FifoHol, MulticastPolicy::None}},
        {"oq", {UnicastPolicy::OutputQueued, MulticastPolicy::None}},
        {"mc-random", {UnicastPolicy::Islip, MulticastPolicy::Random}},
        {"mc-nosplit", {UnicastPolicy::Islip, MulticastPolicy::NoSplit}},
        {"mc-concentrate", {UnicastPolicy::Islip, MulticastPolicy::Concentrate}},
        {"mc-wba", {UnicastPolicy::Islip, MulticastPolicy::Wba}},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown policy '" + name + "'");
    PolicySpec spec;
    spec.unicast = it->second.first;
    spec.multicast = it->second.second;
    spec.name = name;
    return spec;
}

void SimConfig::validate() const {
    if (n < 2 || n > PortSet::max_ports)
        throw ConfigError("config: N must be in [2, " + std::to_string(PortSet::max_ports) + "]");
    if (classes < 1 || classes > 4) throw ConfigError("config: classes must be in [1, 4]");
    if (speedup < 1) throw ConfigError("config: speedup must be >= 1");
    if (horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (effective_warmup() >= horizon) throw ConfigError("config: warmup must be < horizon");
    if (policy.iterations < 1) throw ConfigError("config: iterations must be >= 1");

    const bool fifo = policy.unicast == UnicastPolicy::FifoHol;
    const bool oq = policy.unicast == UnicastPolicy::OutputQueued;
    if (fifo && classes != 1)
        throw ConfigError("config: the FIFO baseline has a single queue per input (classes=1)");
    if ((fifo || oq) && policy.multicast != MulticastPolicy::None)
        throw ConfigError("config: multicast policies need a VOQ-based unicast policy");
    if (traffic.kind == TrafficKind::MulticastBernoulli && policy.multicast ==
            MulticastPolicy::None && !oq)
        throw ConfigError("config: multicast traffic needs a multicast policy (or oq)");
    if (fifo && traffic.kind == TrafficKind::MulticastBernoulli)
        throw ConfigError("config: the FIFO baseline is unicast-only");
}

Simulator::Simulator(const SimConfig& config)
    : config_(config),
      n_(config.n),
      bank_(config.n, config.classes),
      gen_(config.traffic, config.n, config.classes, derive_seed(config.seed, 0)),
      policy_rng_(derive_seed(config.seed, 1)),
      metrics_(config.n, config.classes, config.horizon, config.effective_warmup()) {
    config_.validate();
    out_queues_.resize(n_);
    if (config_.policy.unicast == UnicastPolicy::FifoHol) fifo_queues_.resize(n_);
    sched_state_.assign(config_.classes, SchedulerState(n_));
    mc_order_ptr_.assign(config_.classes, 0);
    mc_tie_ptr_.assign(config_.classes, 0);
    run_copy_arrivals_.assign(config_.classes, 0);
    run_copy_departures_.assign(config_.classes, 0);
    if (config_.randomize_pointers) {
        std::mt19937_64 prng(derive_seed(config_.seed, 2));
        auto draw = [&] { return static_cast<int>(prng() % static_cast<uint64_t>(n_)); };
        for (auto& st : sched_state_) {
            for (int& g : st.grant_ptr) g = draw();
            for (int& a : st.accept_ptr) a = draw();
        }
    }
}

void Simulator::admit(const Cell& cell, SlotRecord* record) {
    metrics_.on_arrival(cell, now_);
    ++run_cell_arrivals_;
    run_copy_arrivals_[cell.cls] += static_cast<uint64_t>(cell.destinations.count());
    if (record) record->arrivals.push_back(cell);

    switch (config_.policy.unicast) {
        case UnicastPolicy::OutputQueued:
            // ideal switch: every copy lands in its output queue at once
            for (int o : cell.destinations) out_queues_[o].push_back({cell, now_});
            break;
        case UnicastPolicy::FifoHol:
            fifo_queues_[cell.input].push_back(cell);
            break;
        default:
            bank_.enqueue(cell);
            break;
    }
}

void Simulator::top_up_saturation() {
    // Infinite-backlog source: keep every queue the active policy draws
    // from non-empty. Models saturation, not a line-rate arrival process.
    if (config_.policy.unicast == UnicastPolicy::FifoHol) {
        for (int i = 0; i < n_; ++i)
            if (fifo_queues_[i].empty())
                admit(gen_.mint_cell(i, PortSet::single(gen_.random_output()), 0, now_), nullptr);
        return;
    }
    if (config_.policy.multicast != MulticastPolicy::None) {
        for (int cls = 0; cls < config_.classes; ++cls)
            for (int i = 0; i < n_; ++i)
                if (bank_.multicast_len(i, cls) == 0)
                    admit(gen_.mint_cell(i, gen_.random_fanout_set(), cls, now_), nullptr);
        return;
    }
    for (int cls = 0; cls < config_.classes; ++cls)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (bank_.unicast_len(i, j, cls) == 0)
                    admit(gen_.mint_cell(i, PortSet::single(j), cls, now_), nullptr);
}

void Simulator::transfer_to_output(const Cell& cell, int output, SlotRecord* record) {
    out_queues_[output].push_back({cell, now_});
    metrics_.on_transfer(cell.input, output, now_);
    if (record) record->transfers.push_back({cell, output});
}

void Simulator::schedule_multicast_class(int cls, PortSet& free_in, PortSet& free_out,
                                         Match& phase_match, SlotRecord* record) {
    FanoutSets fanouts = bank_.hol_fanout_requests(cls);
    for (int i = 0; i < n_; ++i) {
        if (!free_in.contains(i))
            fanouts[i] = PortSet();
        else
            fanouts[i] &= free_out;
    }

    Match match;
    switch (config_.policy.multicast) {
        case MulticastPolicy::Random:
            match = random_split_schedule(fanouts, n_, policy_rng_);
            break;
        case MulticastPolicy::NoSplit:
            match = no_split_schedule(fanouts, n_, mc_order_ptr_[cls]);
            break;
        case MulticastPolicy::Concentrate: {
            bool exact = true;
            match = concentrate_schedule(fanouts, n_, mc_tie_ptr_[cls], &exact);
            concentrate_exact_ = concentrate_exact_ && exact;
            break;
        }
        case MulticastPolicy::Wba: {
            std::vector<int64_t> ages(n_, 0);
            for (int i = 0; i < n_; ++i)
                if (!fanouts[i].empty()) ages[i] = bank_.multicast_hol_age(i, cls, now_);
            match = wba_schedule(fanouts, ages, config_.policy.wba_age_weight,
                                 config_.policy.wba_fanout_weight);
            break;
        }
        case MulticastPolicy::None:
            return;
    }
    if (match.empty()) return;

    for (const Delivery& d : bank_.apply_multicast_match(match, cls, now_))
        transfer_to_output(d.cell, d.output, record);
    for (const auto& [i, o] : match.pairs()) {
        free_in.erase(i);
        free_out.erase(o);
        phase_match.add(i, o);
    }
}

void Simulator::schedule_unicast_class(int cls, PortSet& free_in, PortSet& free_out,
                                       Match& phase_match, SlotRecord* record, bool want_trace) {
    const UnicastPolicy policy = config_.policy.unicast;

    if (policy == UnicastPolicy::OutputQueued) return;

    if (policy == UnicastPolicy::FifoHol) {
        std::vector<std::optional<int>> hol(n_);
        for (int i : free_in) {
            if (fifo_queues_[i].empty()) continue;
            const int dest = fifo_queues_[i].front().sole_destination();
            if (free_out.contains(dest)) hol[i] = dest;
        }
        const Match match = fifo_hol_schedule(hol, sched_state_[cls]);
        for (const auto& [i, o] : match.pairs()) {
            Cell cell = fifo_queues_[i].front();
            fifo_queues_[i].pop_front();
            transfer_to_output(cell, o, record);
            free_in.erase(i);
            free_out.erase(o);
            phase_match.add(i, o);
        }
        return;
    }

    BitMatrix requests = bank_.request_matrix(cls);
    for (int i = 0; i < n_; ++i) {
        if (!free_in.contains(i))
            requests.set_row(i, PortSet());
        else
            requests.set_row(i, requests.row(i) & free_out);
    }
    if (!requests.any()) return;

    Match match;
    IterationTrace* trace = nullptr;
    if (record && want_trace) trace = &record->trace;
    switch (policy) {
        case UnicastPolicy::Islip: {
            auto r = islip_schedule(requests, sched_state_[cls], config_.policy.iterations, trace);
            metrics_.on_schedule(r.iterations_used);
            if (record) record->iterations_used.push_back(r.iterations_used);
            match = std::move(r.match);
            break;
        }
        case UnicastPolicy::Rrm: {
            auto r = rrm_schedule(requests, sched_state_[cls], config_.policy.iterations, trace);
            metrics_.on_schedule(r.iterations_used);
            if (record) record->iterations_used.push_back(r.iterations_used);
            match = std::move(r.match);
            break;
        }
        case UnicastPolicy::Ilqf:
        case UnicastPolicy::Iocf: {
            WeightMatrix weights = policy == UnicastPolicy::Ilqf
                                       ? bank_.queue_length_weights(cls)
                                       : bank_.hol_age_weights(cls, now_);
            // mask weights to the eligible requests
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    if (!requests.get(i, j)) weights.set(i, j, 0);
            auto r = policy == UnicastPolicy::Ilqf
                         ? ilqf_schedule(requests, weights, sched_state_[cls],
                                         config_.policy.iterations, trace)
                         : iocf_schedule(requests, weights, sched_state_[cls],
                                         config_.policy.iterations, trace);
            metrics_.on_schedule(r.iterations_used);
            if (record) record->iterations_used.push_back(r.iterations_used);
            match = std::move(r.match);
            break;
        }
        case UnicastPolicy::MaxSize:
            match = max_size_match(requests);
            break;
        case UnicastPolicy::MwmLqf:
        case UnicastPolicy::MwmOcf: {
            WeightMatrix weights = policy == UnicastPolicy::MwmLqf
                                       ? bank_.queue_length_weights(cls)
                                       : bank_.hol_age_weights(cls, now_);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    if (!requests.get(i, j)) weights.set(i, j, 0);
            match = max_weight_match(weights);
            break;
        }
        default:
            return;
    }

    if (match.empty()) return;
    for (const Cell& cell : bank_.apply_unicast_match(match, cls, now_))
        transfer_to_output(cell, cell.sole_destination(), record);
    for (const auto& [i, o] : match.pairs()) {
        free_in.erase(i);
        free_out.erase(o);
        phase_match.add(i, o);
    }
}

void Simulator::run_phase(SlotRecord* record, bool want_trace) {
    PortSet free_in = PortSet::all(n_);
    PortSet free_out = PortSet::all(n_);
    Match phase_match;

    // strict priority: class 0 first, leftover ports offered to class 1,
    // and so on; within a class, multicast is scheduled before unicast
    for (int cls = 0; cls < config_.classes; ++cls) {
        if (config_.policy.multicast != MulticastPolicy::None)
            schedule_multicast_class(cls, free_in, free_out, phase_match, record);
        schedule_unicast_class(cls, free_in, free_out, phase_match, record, want_trace);
    }

    // the crossbar setting round-trips through the reverse-path tags
    const CrossbarConfig tags = encode_reverse_tags(phase_match, n_);
    if (!(decode_reverse_tags(tags) == phase_match))
        throw ContractViolation("crossbar tags did not round-trip at slot " +
                                std::to_string(now_));
    if (record) record->phase_matches.push_back(std::move(phase_match));
}

void Simulator::emit_line_departures(SlotRecord* record) {
    for (int o = 0; o < n_; ++o) {
        auto& q = out_queues_[o];
        if (q.empty() || q.front().entered >= now_) continue;  // arrived this slot: waits
        const Cell cell = q.front().cell;
        q.pop_front();
        metrics_.on_departure(cell, o, now_);
        ++run_copy_departures_[cell.cls];
        if (record) record->departures.push_back({cell, o});
    }
}

void Simulator::step(SlotRecord* record, bool want_trace) {
    if (record) {
        *record = SlotRecord{};
        record->slot = now_;
    }

    if (config_.traffic.kind == TrafficKind::Saturate) {
        top_up_saturation();
    } else {
        for (const Cell& cell : gen_.arrivals(now_)) admit(cell, record);
    }

    for (int phase = 0; phase < config_.speedup; ++phase) run_phase(record, want_trace);

    emit_line_departures(record);

    std::vector<uint64_t> port_occ(n_);
    uint64_t total = 0;
    int64_t max_mc_age = 0;
    for (int p = 0; p < n_; ++p) {
        uint64_t occ = bank_.input_occupancy(p) + out_queues_[p].size();
        if (!fifo_queues_.empty()) occ += fifo_queues_[p].size();
        port_occ[p] = occ;
        total += occ;
    }
    if (config_.policy.multicast != MulticastPolicy::None)
        for (int cls = 0; cls < config_.classes; ++cls)
            for (int i = 0; i < n_; ++i)
                max_mc_age = std::max(max_mc_age, bank_.multicast_hol_age(i, cls, now_));
    metrics_.on_slot_end(now_, port_occ, total, max_mc_age);

    // multicast round-robin pointers advance once per slot
    for (int cls = 0; cls < config_.classes; ++cls) {
        mc_order_ptr_[cls] = (mc_order_ptr_[cls] + 1) % n_;
        mc_tie_ptr_[cls] = (mc_tie_ptr_[cls] + 1) % n_;
    }

    ++now_;
}

uint64_t Simulator::resident_cells() const {
    uint64_t total = bank_.total_occupancy();
    for (const auto& q : fifo_queues_) total += q.size();
    for (const auto& q : out_queues_) total += q.size();
    return total;
}

std::vector<uint64_t> Simulator::resident_cells_by_input() const {
    std::vector<uint64_t> by_input(n_, 0);
    for (int i = 0; i < n_; ++i) by_input[i] = bank_.input_occupancy(i);
    for (int i = 0; i < n_; ++i)
        if (!fifo_queues_.empty()) by_input[i] += fifo_queues_[i].size();
    for (const auto& q : out_queues_)
        for (const OutCell& c : q) ++by_input[c.cell.input];
    return by_input;
}

uint64_t Simulator::resident_copies() const {
    uint64_t total = 0;
    for (int cls = 0; cls < config_.classes; ++cls) {
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) total += bank_.unicast_len(i, j, cls);
            const auto& mq = bank_.multicast_queue(i, cls);
            for (size_t k = 0; k < mq.size(); ++k)
                total += k == 0 ? static_cast<uint64_t>(bank_.hol_fanout(i, cls).count())
                                : static_cast<uint64_t>(mq[k].destinations.count());
        }
    }
    for (const auto& q : fifo_queues_) total += q.size();
    for (const auto& q : out_queues_) total += q.size();
    return total;
}

SimResult Simulator::finalize() {
    SimResult result = metrics_.finalize(resident_cells(), resident_copies());
    result.run_cell_arrivals = run_cell_arrivals_;
    result.run_copy_arrivals_per_class = run_copy_arrivals_;
    result.run_copy_departures_per_class = run_copy_departures_;

    result.resident_copies_per_class.assign(config_.classes, 0);
    for (int cls = 0; cls < config_.classes; ++cls) {
        uint64_t total = 0;
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) total += bank_.unicast_len(i, j, cls);
            const auto& mq = bank_.multicast_queue(i, cls);
            for (size_t k = 0; k < mq.size(); ++k)
                total += k == 0 ? static_cast<uint64_t>(bank_.hol_fanout(i, cls).count())
                                : static_cast<uint64_t>(mq[k].destinations.count());
        }
        result.resident_copies_per_class[cls] = total;
    }
    for (const auto& q : fifo_queues_)
        for (const Cell& c : q) ++result.resident_copies_per_class[c.cls];
    for (const auto& q : out_queues_)
        for (const OutCell& c : q) ++result.resident_copies_per_class[c.cell.cls];

    result.concentrate_exact = concentrate_exact_;
    if (!concentrate_exact_)
        result.notes = "concentrate: greedy fallback used (over 16 active inputs)";
    return result;
}

SimResult run(const SimConfig& config) {
    Simulator sim(config);
    for (int64_t t = 0; t < config.horizon; ++t) sim.step();
    return sim.finalize();
}

}  // namespace xbar
