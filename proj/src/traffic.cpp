#include "xbar/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xbar/errors.hpp"

namespace xbar {

uint64_t derive_seed(uint64_t master, uint64_t stream) {
    // splitmix64 over the (master, stream) pair
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string TrafficSpec::describe() const {
    switch (kind) {
        case TrafficKind::BernoulliUniform:
            return "uniform:p=" + std::to_string(load);
        case TrafficKind::BernoulliMatrix:
            return "matrix";
        case TrafficKind::OnOffBursty:
            return "bursty:B=" + std::to_string(mean_burst) + ",p=" + std::to_string(load);
        case TrafficKind::MulticastBernoulli:
            return "multicast:F=" + std::to_string(mean_fanout) +
                   ",lambda=" + std::to_string(load);
        case TrafficKind::Saturate:
            return "saturate";
    }
    return "?";
}

Admissibility admissible_check(const std::vector<double>& rate_matrix, int n) {
    if (static_cast<int>(rate_matrix.size()) != n * n)
        throw ConfigError("admissible_check: matrix must be N*N");
    Admissibility a;
    for (int i = 0; i < n; ++i) {
        double row = 0;
        for (int j = 0; j < n; ++j) {
            const double r = rate_matrix[static_cast<size_t>(i) * n + j];
            if (r < 0) throw ConfigError("admissible_check: negative rate");
            row += r;
        }
        a.max_row_sum = std::max(a.max_row_sum, row);
    }
    for (int j = 0; j < n; ++j) {
        double col = 0;
        for (int i = 0; i < n; ++i) col += rate_matrix[static_cast<size_t>(i) * n + j];
        a.max_col_sum = std::max(a.max_col_sum, col);
    }
    a.admissible = a.max_row_sum < 1.0 && a.max_col_sum < 1.0;
    return a;
}

std::vector<double> offered_rate_matrix(const TrafficSpec& spec, int n) {
    std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
    switch (spec.kind) {
        case TrafficKind::BernoulliUniform:
        case TrafficKind::OnOffBursty:
            std::fill(m.begin(), m.end(), spec.load / n);
            break;
        case TrafficKind::BernoulliMatrix:
            if (static_cast<int>(spec.rate_matrix.size()) != n * n)
                throw ConfigError("traffic: rate matrix must have N*N entries");
            m = spec.rate_matrix;
            break;
        case TrafficKind::MulticastBernoulli:
            // per-output copy rates; row and column sums both read load * F
            std::fill(m.begin(), m.end(), spec.load * spec.mean_fanout / n);
            break;
        case TrafficKind::Saturate:
            // infinite backlog offered at (at least) capacity
            std::fill(m.begin(), m.end(), 1.0 / n);
            break;
    }
    return m;
}

TrafficGenerator::TrafficGenerator(const TrafficSpec& spec, int num_ports, int num_classes,
                                   uint64_t seed)
    : spec_(spec), n_(num_ports), c_(num_classes), rng_(seed) {
    if (n_ < 1 || n_ > PortSet::max_ports) throw ConfigError("traffic: bad port count");
    if (c_ < 1 || c_ > 4) throw ConfigError("traffic: bad class count");
    if (spec_.load < 0) throw ConfigError("traffic: negative load");

    switch (spec_.kind) {
        case TrafficKind::BernoulliUniform:
            if (spec_.load > 1.0)
                throw ConfigError("traffic: Bernoulli load is a per-slot probability, max 1.0");
            break;
        case TrafficKind::BernoulliMatrix: {
            if (static_cast<int>(spec_.rate_matrix.size()) != n_ * n_)
                throw ConfigError("traffic: rate matrix must have N*N entries");
            row_load_.assign(n_, 0.0);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    const double r = spec_.rate_matrix[static_cast<size_t>(i) * n_ + j];
                    if (r < 0) throw ConfigError("traffic: negative rate");
                    row_load_[i] += r;
                }
            for (double r : row_load_)
                if (r > 1.0)
                    throw ConfigError("traffic: row rate above 1 cell/slot is unrealizable");
            break;
        }
        case TrafficKind::OnOffBursty:
            if (spec_.mean_burst < 1.0) throw ConfigError("traffic: mean burst must be >= 1");
            if (spec_.load > spec_.mean_burst / (spec_.mean_burst + 1.0))
                throw ConfigError(
                    "traffic: bursty load above B/(B+1) needs an off period shorter than one "
                    "slot");
            // remaining == 0 toggles at the first slot, so this makes every
            // input begin with an off period
            in_burst_.assign(n_, true);
            remaining_.assign(n_, 0);
            burst_dest_.assign(n_, 0);
            break;
        case TrafficKind::MulticastBernoulli: {
            if (spec_.load > 1.0) throw ConfigError("traffic: multicast lambda is a probability");
            if (spec_.mean_fanout < 1.0 || spec_.mean_fanout > n_)
                throw ConfigError("traffic: mean fanout must lie in [1, N]");
            solve_fanout_continuation(spec_.mean_fanout);
            break;
        }
        case TrafficKind::Saturate:
            // nothing arrives here (the simulator tops queues up), but a
            // multicast saturation run still samples fanouts
            solve_fanout_continuation(std::clamp(spec_.mean_fanout, 1.0, double(n_)));
            break;
    }
}

void TrafficGenerator::solve_fanout_continuation(double mean_fanout) {
    // E[min(Geom(r), N)] = (1 - r^N) / (1 - r); bisect on r.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double r = 0.5 * (lo + hi);
        const double mean = r >= 1.0 ? n_ : (1.0 - std::pow(r, n_)) / (1.0 - r);
        (mean < mean_fanout ? lo : hi) = r;
    }
    fanout_continue_ = 0.5 * (lo + hi);
}

double TrafficGenerator::uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

int TrafficGenerator::uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(rng_()) * static_cast<uint64_t>(n)) >>
                            64);
}

int TrafficGenerator::geometric_from(double success_prob) {
    if (success_prob >= 1.0) return 1;
    if (success_prob <= 0.0) return std::numeric_limits<int>::max();
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    const double len = 1.0 + std::floor(std::log(u) / std::log1p(-success_prob));
    return len > 1e9 ? 1000000000 : static_cast<int>(len);
}

int TrafficGenerator::sample_fanout() {
    int k = 1;
    while (k < n_ && uniform01() < fanout_continue_) ++k;
    return k;
}

PortSet TrafficGenerator::random_subset(int size) {
    // partial Fisher-Yates over [0, N)
    int perm[PortSet::max_ports];
    std::iota(perm, perm + n_, 0);
    PortSet s;
    for (int k = 0; k < size; ++k) {
        const int r = k + uniform_int(n_ - k);
        std::swap(perm[k], perm[r]);
        s.insert(perm[k]);
    }
    return s;
}

int TrafficGenerator::pick_class() { return c_ > 1 ? uniform_int(c_) : 0; }

int TrafficGenerator::random_output() { return uniform_int(n_); }

PortSet TrafficGenerator::random_fanout_set() { return random_subset(sample_fanout()); }

Cell TrafficGenerator::mint_cell(int input, PortSet destinations, int cls, int64_t slot) {
    Cell cell;
    cell.id = next_id_++;
    cell.input = input;
    cell.destinations = destinations;
    cell.cls = cls;
    cell.arrival_slot = slot;
    return cell;
}

std::vector<Cell> TrafficGenerator::arrivals(int64_t slot) {
    std::vector<Cell> cells;
    switch (spec_.kind) {
        case TrafficKind::BernoulliUniform:
            for (int i = 0; i < n_; ++i)
                if (uniform01() < spec_.load)
                    cells.push_back(
                        mint_cell(i, PortSet::single(uniform_int(n_)), pick_class(), slot));
            break;

        case TrafficKind::BernoulliMatrix:
            for (int i = 0; i < n_; ++i) {
                if (row_load_[i] <= 0.0) continue;
                if (uniform01() >= row_load_[i]) continue;
                double target = uniform01() * row_load_[i];
                int dest = n_ - 1;
                for (int j = 0; j < n_; ++j) {
                    target -= spec_.rate_matrix[static_cast<size_t>(i) * n_ + j];
                    if (target < 0) {
                        dest = j;
                        break;
                    }
                }
                cells.push_back(mint_cell(i, PortSet::single(dest), pick_class(), slot));
            }
            break;

        case TrafficKind::OnOffBursty: {
            if (spec_.load <= 0.0) break;
            const double b = spec_.mean_burst;
            const double p = spec_.load;
            const double q_on = 1.0 / b;                  // burst length mean B
            const double q_off = p / (b * (1.0 - p));     // off length mean B(1-p)/p
            for (int i = 0; i < n_; ++i) {
                if (remaining_[i] == 0) {
                    in_burst_[i] = !in_burst_[i];
                    remaining_[i] = geometric_from(in_burst_[i] ? q_on : q_off);
                    if (in_burst_[i]) burst_dest_[i] = uniform_int(n_);
                }
                if (in_burst_[i])
                    cells.push_back(
                        mint_cell(i, PortSet::single(burst_dest_[i]), pick_class(), slot));
                --remaining_[i];
            }
            break;
        }

        case TrafficKind::MulticastBernoulli:
            for (int i = 0; i < n_; ++i)
                if (uniform01() < spec_.load)
                    cells.push_back(mint_cell(i, random_subset(sample_fanout()), pick_class(),
                                              slot));
            break;

        case TrafficKind::Saturate:
            break;
    }
    return cells;
}

}  // namespace xbar
