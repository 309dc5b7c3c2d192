#include "xbar/match.hpp"

namespace xbar {

CrossbarConfig encode_reverse_tags(const Match& match, int n) {
    CrossbarConfig cfg;
    cfg.num_ports = n;
    cfg.tag_bits = reverse_tag_bits(n);
    cfg.reverse_tag.assign(n, 0);
    cfg.idle.assign(n, true);
    for (const auto& [input, output] : match.pairs()) {
        if (input >= n || output >= n)
            throw ContractViolation("encode_reverse_tags: match exceeds port count");
        cfg.reverse_tag[output] = static_cast<uint8_t>(input);
        cfg.idle[output] = false;
    }
    return cfg;
}

Match decode_reverse_tags(const CrossbarConfig& cfg) {
    Match m;
    for (int o = 0; o < cfg.num_ports; ++o)
        if (!cfg.idle[o]) m.add(cfg.reverse_tag[o], o);
    return m;
}

}  // namespace xbar
