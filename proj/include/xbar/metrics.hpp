#ifndef XBAR_METRICS_HPP
#define XBAR_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xbar/cell.hpp"

namespace xbar {

// Streaming mean/variance/max over departure delays (Welford).
struct DelayStats {
    uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    int64_t max = 0;

    void add(int64_t delay) {
        ++count;
        const double d = static_cast<double>(delay) - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (static_cast<double>(delay) - mean);
        if (delay > max) max = delay;
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    void merge_from(const DelayStats& o);
};

struct ThroughputStats {
    int64_t measured_slots = 0;
    std::vector<uint64_t> departures_per_output;
    std::vector<uint64_t> service_matrix;  // N*N crossbar transfers per (input, output)

    double output_rate(int o) const;
    double aggregate() const;  // cells per slot per port
    // departures / measured slots, summed check value
    double total_departure_rate() const;
    int ports() const { return static_cast<int>(departures_per_output.size()); }
};

struct ConvergenceStats {
    std::vector<uint64_t> histogram;  // index = iterations_used
    uint64_t invocations = 0;
    int max = 0;
    double mean = 0.0;  // filled at finalize

    void add(int iterations);
};

// Surrogate burstiness measure: mean length of runs of consecutive-slot
// cell deliveries from the same input, watched per output at switch
// ingress (arrivals, by destination) and egress (line departures).
struct BurstinessStats {
    double ingress_mean_run = 0.0;
    double egress_mean_run = 0.0;
};

struct SimResult {
    DelayStats delay;
    std::vector<DelayStats> delay_per_class;
    ThroughputStats throughput;
    ConvergenceStats convergence;
    BurstinessStats burstiness;

    uint64_t arrivals = 0;    // cells (a multicast cell counts once)
    uint64_t departures = 0;  // delivered copies leaving on output lines
    std::vector<uint64_t> arrivals_per_class;
    std::vector<uint64_t> departures_per_class;
    uint64_t resident_cells = 0;  // still queued at horizon
    uint64_t resident_copies_pending = 0;

    // whole-run conservation counters (not warmup-filtered)
    uint64_t run_cell_arrivals = 0;
    std::vector<uint64_t> run_copy_arrivals_per_class;
    std::vector<uint64_t> run_copy_departures_per_class;
    std::vector<uint64_t> resident_copies_per_class;

    double mean_occupancy = 0.0;  // cells queued, averaged over measured slots
    std::vector<uint64_t> peak_port_occupancy;  // input + output buffers, per port
    uint64_t peak_occupancy = 0;

    // max gap between successive services of the same (input, output)
    // pair, including the gaps to the measurement window edges
    int64_t max_service_gap = -1;  // -1: no VOQ service observed

    int64_t max_multicast_hol_age = 0;
    bool diverged = false;
    double littles_law_ratio = 0.0;  // mean occupancy / (arrival rate * mean delay)
    bool concentrate_exact = true;   // false if any slot fell back to the greedy

    int64_t horizon = 0;
    int64_t warmup = 0;
    std::string notes;
};

// Accumulates per-event records during a run and folds them into a
// SimResult. Only events at slot >= warmup count, except the service-gap
// tracker which needs the full history of each pair.
class MetricsCollector {
public:
    MetricsCollector(int n, int classes, int64_t horizon, int64_t warmup);

    void on_arrival(const Cell& cell, int64_t slot);
    void on_transfer(int input, int output, int64_t slot);
    void on_departure(const Cell& cell, int output, int64_t slot);
    void on_schedule(int iterations_used);
    void on_slot_end(int64_t slot, const std::vector<uint64_t>& port_occupancy,
                     uint64_t total_occupancy, int64_t max_mc_hol_age);

    // `resident`: cells still queued when the run stopped.
    SimResult finalize(uint64_t resident_cells, uint64_t resident_copies);

private:
    bool measured(int64_t slot) const { return slot >= warmup_; }

    struct RunTracker {
        int64_t last_slot = -2;
        int last_input = -1;
        uint64_t run_len = 0;
        uint64_t total = 0;
        uint64_t runs = 0;

        void add(int64_t slot, int input);
        void flush();
    };

    int n_;
    int classes_;
    int64_t horizon_;
    int64_t warmup_;

    SimResult result_;
    std::vector<RunTracker> ingress_runs_;
    std::vector<RunTracker> egress_runs_;
    std::vector<int64_t> last_service_;  // per (input, output); -1 = never
    std::vector<int64_t> max_gap_;
    uint64_t total_iterations_ = 0;

    // occupancy decile buckets over the measured window (divergence check)
    std::vector<double> bucket_sum_;
    std::vector<uint64_t> bucket_count_;
    double occupancy_sum_ = 0.0;
    uint64_t occupancy_samples_ = 0;
};

}  // namespace xbar

#endif
