#ifndef XBAR_TRAFFIC_HPP
#define XBAR_TRAFFIC_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xbar/cell.hpp"

namespace xbar {

enum class TrafficKind {
    BernoulliUniform,    // iid arrivals at rate `load`, destination uniform
    BernoulliMatrix,     // per-(input,output) rates; row sum is the input load
    OnOffBursty,         // geometric on/off bursts, one destination per burst
    MulticastBernoulli,  // multicast arrivals, truncated-geometric fanout
    Saturate,            // infinite backlog: the simulator tops queues up
};

struct TrafficSpec {
    TrafficKind kind = TrafficKind::BernoulliUniform;
    double load = 0.5;                // p, or per-input lambda for multicast
    double mean_burst = 16.0;         // B (OnOffBursty)
    double mean_fanout = 4.0;         // F (MulticastBernoulli)
    std::vector<double> rate_matrix;  // N*N row-major (BernoulliMatrix)

    std::string describe() const;
};

struct Admissibility {
    bool admissible = false;
    double max_row_sum = 0.0;
    double max_col_sum = 0.0;
};

// True iff every row and column sum of the non-negative rate matrix is
// strictly below 1.
Admissibility admissible_check(const std::vector<double>& rate_matrix, int n);

// The offered rate matrix implied by a spec, used for the admissibility
// gate. Multicast specs are expanded to their per-output copy rates
// (load * F / N per entry), so row and column sums both read load * F.
std::vector<double> offered_rate_matrix(const TrafficSpec& spec, int n);

// Reproducible arrival source: same spec + seed gives the same sequence.
// All randomness is drawn through multiply-shift / inversion helpers on a
// mt19937_64 stream so the sequence does not depend on the standard
// library's distribution implementations.
class TrafficGenerator {
public:
    TrafficGenerator(const TrafficSpec& spec, int num_ports, int num_classes, uint64_t seed);

    // At most one cell per input per slot.
    std::vector<Cell> arrivals(int64_t slot);

    // Mints a cell on the shared id sequence; the simulator uses this for
    // saturation top-up so ids stay unique across sources.
    Cell mint_cell(int input, PortSet destinations, int cls, int64_t slot);

    // Saturation top-up helpers drawing on the same stream.
    int random_output();
    PortSet random_fanout_set();

    const TrafficSpec& spec() const { return spec_; }

private:
    double uniform01();
    int uniform_int(int n);  // [0, n)
    int geometric_from(double success_prob);  // support {1, 2, ...}
    int sample_fanout();
    PortSet random_subset(int size);
    int pick_class();
    void solve_fanout_continuation(double mean_fanout);

    TrafficSpec spec_;
    int n_;
    int c_;
    std::mt19937_64 rng_;
    uint64_t next_id_ = 0;

    // on/off state per input
    std::vector<bool> in_burst_;
    std::vector<int> remaining_;  // slots left in the current period
    std::vector<int> burst_dest_;

    // matrix sampling
    std::vector<double> row_load_;

    double fanout_continue_;  // truncated-geometric continuation probability
};

// Derives an independent stream seed from a master seed (splitmix64 step).
uint64_t derive_seed(uint64_t master, uint64_t stream);

}  // namespace xbar

#endif
