#ifndef XBAR_SIM_HPP
#define XBAR_SIM_HPP

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "xbar/metrics.hpp"
#include "xbar/multicast_sched.hpp"
#include "xbar/traffic.hpp"
#include "xbar/unicast_sched.hpp"
#include "xbar/voq_bank.hpp"

namespace xbar {

enum class UnicastPolicy {
    Islip,
    Rrm,
    Ilqf,
    Iocf,
    MaxSize,       // maximum-size matching every slot
    MwmLqf,        // exact maximum-weight matching on queue lengths
    MwmOcf,        // exact maximum-weight matching on HOL ages
    FifoHol,       // single FIFO per input, HOL-blocking baseline
    OutputQueued,  // ideal reference: arrivals go straight to the output queue
};

enum class MulticastPolicy { None, Random, NoSplit, Concentrate, Wba };

struct PolicySpec {
    UnicastPolicy unicast = UnicastPolicy::Islip;
    MulticastPolicy multicast = MulticastPolicy::None;
    int iterations = 1;
    double wba_age_weight = 1.0;
    double wba_fanout_weight = 1.0;
    std::string name = "islip";  // echoed into result files
};

PolicySpec parse_policy(const std::string& name);

struct SimConfig {
    int n = 16;
    int classes = 1;
    PolicySpec policy;
    int speedup = 1;
    int64_t horizon = 100000;
    int64_t warmup = -1;  // -1: horizon / 10
    uint64_t seed = 1;
    TrafficSpec traffic;
    bool randomize_pointers = false;

    int64_t effective_warmup() const { return warmup >= 0 ? warmup : horizon / 10; }
    void validate() const;
};

// Everything that happened in one slot, for auditing and replay checks.
struct SlotRecord {
    struct Departure {
        Cell cell;
        int output;
    };

    int64_t slot = 0;
    std::vector<Cell> arrivals;
    std::vector<Match> phase_matches;  // merged unicast+multicast match per phase
    std::vector<Delivery> transfers;
    std::vector<Departure> departures;
    std::vector<int> iterations_used;  // per iterative-scheduler invocation
    IterationTrace trace;              // filled only when tracing is on
};

// Slot-synchronous switch: arrivals enqueue, the scheduler configures the
// crossbar `speedup` times, transfers land in output queues, and each
// output line emits at most one cell per slot. A cell arriving in slot t
// is schedulable in slot t and can leave the line in slot t+1 at the
// earliest.
class Simulator {
public:
    explicit Simulator(const SimConfig& config);

    // Runs one slot. `record`, when given, receives the slot's events;
    // `want_trace` additionally captures scheduler iteration traces.
    void step(SlotRecord* record = nullptr, bool want_trace = false);

    int64_t now() const { return now_; }
    const SimConfig& config() const { return config_; }
    const VOQBank& bank() const { return bank_; }

    // Remaining work in the system, in cells and in deliverable copies.
    uint64_t resident_cells() const;
    uint64_t resident_copies() const;
    // Queued cells attributed to their ingress port (output queues included).
    std::vector<uint64_t> resident_cells_by_input() const;

    SimResult finalize();

private:
    void top_up_saturation();
    void admit(const Cell& cell, SlotRecord* record);
    void run_phase(SlotRecord* record, bool want_trace);
    void schedule_unicast_class(int cls, PortSet& free_in, PortSet& free_out, Match& phase_match,
                                SlotRecord* record, bool want_trace);
    void schedule_multicast_class(int cls, PortSet& free_in, PortSet& free_out, Match& phase_match,
                                  SlotRecord* record);
    void transfer_to_output(const Cell& cell, int output, SlotRecord* record);
    void emit_line_departures(SlotRecord* record);

    SimConfig config_;
    int n_;
    int64_t now_ = 0;

    VOQBank bank_;
    std::vector<std::deque<Cell>> fifo_queues_;  // FifoHol mode only

    struct OutCell {
        Cell cell;
        int64_t entered;
    };
    std::vector<std::deque<OutCell>> out_queues_;

    TrafficGenerator gen_;
    std::mt19937_64 policy_rng_;

    std::vector<SchedulerState> sched_state_;  // per class
    std::vector<int> mc_order_ptr_;            // per class (no-split)
    std::vector<int> mc_tie_ptr_;              // per class (concentrate)

    MetricsCollector metrics_;
    std::vector<uint64_t> run_copy_arrivals_;    // per class, whole run
    std::vector<uint64_t> run_copy_departures_;  // per class, whole run
    uint64_t run_cell_arrivals_ = 0;
    bool concentrate_exact_ = true;
};

SimResult run(const SimConfig& config);

}  // namespace xbar

#endif
