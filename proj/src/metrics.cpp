#include "xbar/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "xbar/errors.hpp"

namespace xbar {

void DelayStats::merge_from(const DelayStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
        *this = o;
        return;
    }
    const double total = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / total;
    mean += delta * static_cast<double>(o.count) / total;
    count += o.count;
    max = std::max(max, o.max);
}

double ThroughputStats::output_rate(int o) const {
    return measured_slots > 0
               ? static_cast<double>(departures_per_output[o]) / static_cast<double>(measured_slots)
               : 0.0;
}

double ThroughputStats::aggregate() const {
    if (measured_slots <= 0 || departures_per_output.empty()) return 0.0;
    uint64_t total = 0;
    for (uint64_t d : departures_per_output) total += d;
    return static_cast<double>(total) /
           (static_cast<double>(measured_slots) * static_cast<double>(departures_per_output.size()));
}

double ThroughputStats::total_departure_rate() const {
    if (measured_slots <= 0) return 0.0;
    uint64_t total = 0;
    for (uint64_t d : departures_per_output) total += d;
    return static_cast<double>(total) / static_cast<double>(measured_slots);
}

void ConvergenceStats::add(int iterations) {
    if (iterations >= static_cast<int>(histogram.size())) histogram.resize(iterations + 1, 0);
    ++histogram[iterations];
    ++invocations;
    max = std::max(max, iterations);
}

void MetricsCollector::RunTracker::add(int64_t slot, int input) {
    if (input == last_input && slot == last_slot + 1) {
        ++run_len;
    } else {
        flush();
        run_len = 1;
    }
    last_slot = slot;
    last_input = input;
}

void MetricsCollector::RunTracker::flush() {
    if (run_len > 0) {
        total += run_len;
        ++runs;
        run_len = 0;
    }
}

MetricsCollector::MetricsCollector(int n, int classes, int64_t horizon, int64_t warmup)
    : n_(n), classes_(classes), horizon_(horizon), warmup_(warmup) {
    if (warmup < 0 || warmup >= horizon) throw ConfigError("metrics: warmup must be < horizon");
    result_.delay_per_class.resize(classes);
    result_.arrivals_per_class.assign(classes, 0);
    result_.departures_per_class.assign(classes, 0);
    result_.throughput.departures_per_output.assign(n, 0);
    result_.throughput.service_matrix.assign(static_cast<size_t>(n) * n, 0);
    result_.peak_port_occupancy.assign(n, 0);
    ingress_runs_.resize(n);
    egress_runs_.resize(n);
    last_service_.assign(static_cast<size_t>(n) * n, -1);
    max_gap_.assign(static_cast<size_t>(n) * n, 0);
    bucket_sum_.assign(10, 0.0);
    bucket_count_.assign(10, 0);
}

void MetricsCollector::on_arrival(const Cell& cell, int64_t slot) {
    if (!measured(slot)) return;
    ++result_.arrivals;
    ++result_.arrivals_per_class[cell.cls];
    for (int o : cell.destinations) ingress_runs_[o].add(slot, cell.input);
}

void MetricsCollector::on_transfer(int input, int output, int64_t slot) {
    const size_t idx = static_cast<size_t>(input) * n_ + output;
    // gap = number of consecutive measured slots the pair went unserved,
    // so "served in every window of W slots" reads as max gap < W
    if (measured(slot)) {
        const int64_t prev = last_service_[idx];
        const int64_t from = prev >= warmup_ ? prev : warmup_ - 1;
        max_gap_[idx] = std::max(max_gap_[idx], slot - from - 1);
        ++result_.throughput.service_matrix[idx];
    }
    last_service_[idx] = slot;
}

void MetricsCollector::on_departure(const Cell& cell, int output, int64_t slot) {
    if (!measured(slot)) return;
    const int64_t delay = slot - cell.arrival_slot;
    result_.delay.add(delay);
    result_.delay_per_class[cell.cls].add(delay);
    ++result_.departures;
    ++result_.departures_per_class[cell.cls];
    ++result_.throughput.departures_per_output[output];
    egress_runs_[output].add(slot, cell.input);
}

void MetricsCollector::on_schedule(int iterations_used) {
    result_.convergence.add(iterations_used);
    total_iterations_ += static_cast<uint64_t>(iterations_used);
}

void MetricsCollector::on_slot_end(int64_t slot, const std::vector<uint64_t>& port_occupancy,
                                   uint64_t total_occupancy, int64_t max_mc_hol_age) {
    if (!measured(slot)) return;
    for (int p = 0; p < n_; ++p)
        result_.peak_port_occupancy[p] = std::max(result_.peak_port_occupancy[p],
                                                  port_occupancy[p]);
    result_.peak_occupancy = std::max(result_.peak_occupancy, total_occupancy);
    result_.max_multicast_hol_age = std::max(result_.max_multicast_hol_age, max_mc_hol_age);

    occupancy_sum_ += static_cast<double>(total_occupancy);
    ++occupancy_samples_;
    const int64_t span = horizon_ - warmup_;
    int bucket = static_cast<int>(((slot - warmup_) * 10) / span);
    bucket = std::clamp(bucket, 0, 9);
    bucket_sum_[bucket] += static_cast<double>(total_occupancy);
    ++bucket_count_[bucket];
}

SimResult MetricsCollector::finalize(uint64_t resident_cells, uint64_t resident_copies) {
    SimResult result = result_;
    result.horizon = horizon_;
    result.warmup = warmup_;
    result.resident_cells = resident_cells;
    result.resident_copies_pending = resident_copies;
    result.throughput.measured_slots = horizon_ - warmup_;

    if (result.convergence.invocations > 0)
        result.convergence.mean = static_cast<double>(total_iterations_) /
                                  static_cast<double>(result.convergence.invocations);

    // burstiness: flush open runs
    uint64_t in_total = 0, in_runs = 0, eg_total = 0, eg_runs = 0;
    for (auto t : ingress_runs_) {
        t.flush();
        in_total += t.total;
        in_runs += t.runs;
    }
    for (auto t : egress_runs_) {
        t.flush();
        eg_total += t.total;
        eg_runs += t.runs;
    }
    if (in_runs > 0)
        result.burstiness.ingress_mean_run = static_cast<double>(in_total) / in_runs;
    if (eg_runs > 0) result.burstiness.egress_mean_run = static_cast<double>(eg_total) / eg_runs;

    // close the unserved stretches against the horizon edge
    result.max_service_gap = -1;
    for (size_t idx = 0; idx < max_gap_.size(); ++idx) {
        if (result_.throughput.service_matrix[idx] == 0) continue;
        const int64_t tail = (horizon_ - 1) - last_service_[idx];
        result.max_service_gap = std::max({result.max_service_gap, max_gap_[idx], tail});
    }

    if (occupancy_samples_ > 0)
        result.mean_occupancy = occupancy_sum_ / static_cast<double>(occupancy_samples_);

    // divergence: last-decile mean occupancy above twice the mid-run mean,
    // with an absolute floor so noise around an empty system never trips
    // it. "mid-run" is the second fifth of the measured window: a queue
    // still growing linearly at the horizon then reads as roughly 3x.
    const double mid = (bucket_count_[2] + bucket_count_[3]) > 0
                           ? (bucket_sum_[2] + bucket_sum_[3]) /
                                 static_cast<double>(bucket_count_[2] + bucket_count_[3])
                           : 0.0;
    const double last = bucket_count_[9] > 0
                            ? bucket_sum_[9] / static_cast<double>(bucket_count_[9])
                            : 0.0;
    result.diverged = last > 2.0 * mid && (last - mid) > 0.5 * n_;

    const int64_t measured_slots = horizon_ - warmup_;
    if (result.delay.count > 0 && result.arrivals > 0 && measured_slots > 0) {
        const double arrival_rate =
            static_cast<double>(result.arrivals) / static_cast<double>(measured_slots);
        const double expected = arrival_rate * result.delay.mean;
        if (expected > 0) result.littles_law_ratio = result.mean_occupancy / expected;
    }
    return result;
}

}  // namespace xbar
