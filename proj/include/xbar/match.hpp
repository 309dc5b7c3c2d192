#ifndef XBAR_MATCH_HPP
#define XBAR_MATCH_HPP

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "xbar/errors.hpp"
#include "xbar/port_set.hpp"

namespace xbar {

// A conflict-free crossbar assignment for one slot. Each output belongs to
// at most one input; in unicast mode each input also appears at most once,
// while a multicast match may fan one input out to several outputs.
class Match {
public:
    Match() { input_of_.fill(-1); }

    void add(int input, int output) {
        if (output < 0 || output >= PortSet::max_ports || input < 0 ||
            input >= PortSet::max_ports)
            throw ContractViolation("Match::add: port index out of range");
        if (outputs_.contains(output))
            throw ContractViolation("Match::add: output " + std::to_string(output) +
                                    " already matched");
        pairs_.emplace_back(input, output);
        inputs_.insert(input);
        outputs_.insert(output);
        input_of_[output] = static_cast<int8_t>(input);
    }

    bool output_matched(int output) const { return outputs_.contains(output); }
    bool input_matched(int input) const { return inputs_.contains(input); }

    // Input feeding `output`, or -1 when the output is idle.
    int input_of(int output) const { return input_of_[output]; }

    PortSet matched_inputs() const { return inputs_; }
    PortSet matched_outputs() const { return outputs_; }

    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    int size() const { return static_cast<int>(pairs_.size()); }
    bool empty() const { return pairs_.empty(); }

    // Outputs matched to `input`.
    PortSet outputs_of(int input) const {
        PortSet s;
        for (const auto& [i, o] : pairs_)
            if (i == input) s.insert(o);
        return s;
    }

    // Type invariants: outputs conflict-free always (enforced by add);
    // unicast mode additionally requires each input at most once.
    bool valid(int n, bool unicast) const {
        for (const auto& [i, o] : pairs_)
            if (i < 0 || i >= n || o < 0 || o >= n) return false;
        if (unicast && inputs_.count() != size()) return false;
        return true;
    }

    bool operator==(const Match& o) const {
        if (outputs_ != o.outputs_) return false;
        for (int out : outputs_)
            if (input_of_[out] != o.input_of_[out]) return false;
        return true;
    }

private:
    std::vector<std::pair<int, int>> pairs_;
    PortSet inputs_;
    PortSet outputs_;
    std::array<int8_t, PortSet::max_ports> input_of_;
};

// Per-output reverse-path self-routing tags: each output is told which
// input will transmit to it, in ceil(log2 N) bits, with a separate idle
// flag so every tag value remains a valid input index.
struct CrossbarConfig {
    int num_ports = 0;
    int tag_bits = 0;
    std::vector<uint8_t> reverse_tag;  // per output: sending input
    std::vector<bool> idle;            // per output: no input assigned
};

inline int reverse_tag_bits(int n) {
    return n <= 1 ? 0 : std::bit_width(static_cast<unsigned>(n - 1));
}

CrossbarConfig encode_reverse_tags(const Match& match, int n);
Match decode_reverse_tags(const CrossbarConfig& config);

}  // namespace xbar

#endif
