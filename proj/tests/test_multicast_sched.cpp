#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <vector>

#include "xbar/multicast_sched.hpp"

using namespace xbar;

namespace {

PortSet ports(std::initializer_list<int> list) {
    PortSet s;
    for (int p : list) s.insert(p);
    return s;
}

FanoutSets random_fanouts(std::mt19937_64& rng, int inputs, int outputs, int max_fanout) {
    FanoutSets f(inputs);
    const int cap = std::min(max_fanout, outputs);
    for (int i = 0; i < inputs; ++i) {
        const int size = static_cast<int>(rng() % (cap + 1));  // may be empty
        while (f[i].count() < size) f[i].insert(static_cast<int>(rng() % outputs));
    }
    return f;
}

PortSet requested_outputs(const FanoutSets& fanouts) {
    PortSet all;
    for (const PortSet& f : fanouts) all |= f;
    return all;
}

bool work_conserving(const FanoutSets& fanouts, const Match& m) {
    for (int o : requested_outputs(fanouts))
        if (!m.output_matched(o)) return false;
    return true;
}

// All work-conserving assignments of a small instance, by odometer over
// each requested output's requesters.
std::vector<Match> all_work_conserving(const FanoutSets& fanouts, int outputs) {
    std::vector<std::vector<int>> requesters(outputs);
    for (size_t i = 0; i < fanouts.size(); ++i)
        for (int o : fanouts[i]) requesters[o].push_back(static_cast<int>(i));
    std::vector<int> active;
    for (int o = 0; o < outputs; ++o)
        if (!requesters[o].empty()) active.push_back(o);

    std::vector<Match> result;
    std::vector<int> pick(active.size(), 0);
    while (true) {
        Match m;
        for (size_t k = 0; k < active.size(); ++k)
            m.add(requesters[active[k]][pick[k]], active[k]);
        result.push_back(m);
        size_t k = 0;
        while (k < active.size()) {
            if (++pick[k] < static_cast<int>(requesters[active[k]].size())) break;
            pick[k++] = 0;
        }
        if (k == active.size()) break;
    }
    return result;
}

}  // namespace

TEST_CASE("random_split: an uncontested fanout is served completely") {
    std::mt19937_64 rng(1);
    const FanoutSets fanouts = {ports({0, 1, 2})};
    const Match m = random_split_schedule(fanouts, 4, rng);
    CHECK(m.size() == 3);
    for (int o : {0, 1, 2}) CHECK(m.input_of(o) == 0);
}

TEST_CASE("random_split: contested output goes to each requester about half the time") {
    std::mt19937_64 rng(2);
    const FanoutSets fanouts = {ports({1}), ports({1})};
    int wins0 = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t)
        if (random_split_schedule(fanouts, 2, rng).input_of(1) == 0) ++wins0;
    const double freq = static_cast<double>(wins0) / trials;
    CHECK(freq > 0.48);
    CHECK(freq < 0.52);
}

TEST_CASE("random_split: work conservation on random instances") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10000; ++trial) {
        const int inputs = 2 + static_cast<int>(rng() % 6);
        const int outputs = 2 + static_cast<int>(rng() % 6);
        const FanoutSets fanouts = random_fanouts(rng, inputs, outputs, 3);
        const Match m = random_split_schedule(fanouts, outputs, rng);
        CHECK(work_conserving(fanouts, m));
        for (const auto& [i, o] : m.pairs()) CHECK(fanouts[i].contains(o));
    }
}

TEST_CASE("no_split: all-or-nothing from the order pointer") {
    const FanoutSets fanouts = {ports({0, 1}), ports({1})};

    // pointer at 0: input 0 takes both outputs, input 1 is blocked
    const Match at0 = no_split_schedule(fanouts, 2, 0);
    CHECK(at0.size() == 2);
    CHECK(at0.input_of(0) == 0);
    CHECK(at0.input_of(1) == 0);

    // pointer at 1: input 1 takes output 1; input 0 needs both and gets
    // none, so output 0 idles even though it was requested
    const Match at1 = no_split_schedule(fanouts, 2, 1);
    CHECK(at1.size() == 1);
    CHECK(at1.input_of(1) == 1);
    CHECK_FALSE(at1.output_matched(0));
    CHECK_FALSE(work_conserving(fanouts, at1));
}

TEST_CASE("no_split: disjoint fanouts are served fully at any pointer") {
    const FanoutSets fanouts = {ports({0, 1}), ports({2}), ports({3, 4})};
    for (int p = 0; p < 3; ++p) {
        const Match m = no_split_schedule(fanouts, 5, p);
        CHECK(m.size() == 5);
    }
}

TEST_CASE("no_split: an input is served completely or not at all") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10000; ++trial) {
        const int inputs = 2 + static_cast<int>(rng() % 6);
        const int outputs = 2 + static_cast<int>(rng() % 6);
        const FanoutSets fanouts = random_fanouts(rng, inputs, outputs, 3);
        const int pointer = static_cast<int>(rng() % inputs);
        const Match m = no_split_schedule(fanouts, outputs, pointer);
        for (int i = 0; i < inputs; ++i) {
            const int served = m.outputs_of(i).count();
            CHECK((served == 0 || served == fanouts[i].count()));
        }
    }
}

TEST_CASE("concentrate: 2x3 example leaves the residue on one input") {
    const FanoutSets fanouts = {ports({0, 1, 2}), ports({1, 2})};
    const Match m = concentrate_schedule(fanouts, 3, 0);
    CHECK(work_conserving(fanouts, m));
    // input 0 fully served, input 1 keeps both copies
    for (int o : {0, 1, 2}) CHECK(m.input_of(o) == 0);

    const ResidueReport residue = compute_residue(fanouts, m);
    CHECK(residue.residual_copies == std::vector<int>{0, 2});
    CHECK(residue.residue_inputs == 1);

    // splitting the contested outputs would leave residue on both inputs
    Match split;
    split.add(0, 0);
    split.add(0, 1);
    split.add(1, 2);
    CHECK(compute_residue(fanouts, split).residue_inputs == 2);
}

TEST_CASE("concentrate: uncontested fanouts leave no residue") {
    const FanoutSets fanouts = {ports({0}), ports({1, 2})};
    const Match m = concentrate_schedule(fanouts, 3, 0);
    CHECK(compute_residue(fanouts, m).residue_inputs == 0);
}

TEST_CASE("concentrate: round-robin tie-break prefers the pointer input") {
    // symmetric instance: exactly one of the two inputs can be fully served
    const FanoutSets fanouts = {ports({0, 1}), ports({0, 1})};
    CHECK(concentrate_schedule(fanouts, 2, 0).outputs_of(0).count() == 2);
    CHECK(concentrate_schedule(fanouts, 2, 1).outputs_of(1).count() == 2);
}

TEST_CASE("concentrate: 2xN instances reach the brute-force minimum residue") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5000; ++trial) {
        const int outputs = 2 + static_cast<int>(rng() % 7);
        const FanoutSets fanouts = random_fanouts(rng, 2, outputs, 3);
        const int pointer = static_cast<int>(rng() % 2);
        const Match m = concentrate_schedule(fanouts, outputs, pointer);
        CHECK(work_conserving(fanouts, m));
        CHECK(compute_residue(fanouts, m).residue_inputs ==
              brute_force_min_residue(fanouts, outputs));
    }
}

TEST_CASE("concentrate: matches the brute-force minimum on MxN instances too") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 2000; ++trial) {
        const int inputs = 2 + static_cast<int>(rng() % 4);
        const int outputs = 2 + static_cast<int>(rng() % 4);
        const FanoutSets fanouts = random_fanouts(rng, inputs, outputs, 3);
        const Match m = concentrate_schedule(fanouts, outputs, 0);
        CHECK(work_conserving(fanouts, m));
        // the exhaustive assignment enumeration is only feasible when few
        // outputs are contested; skip oversize draws
        int contested = 0;
        std::vector<int> requesters(outputs, 0);
        for (const PortSet& f : fanouts)
            for (int o : f) ++requesters[o];
        for (int o = 0; o < outputs; ++o) contested += requesters[o] > 1;
        if (contested > 12) continue;
        CHECK(compute_residue(fanouts, m).residue_inputs ==
              brute_force_min_residue(fanouts, outputs));
    }
}

TEST_CASE("wba: smaller fanout wins at equal age when fanout is penalized") {
    const FanoutSets fanouts = {ports({0}), ports({0, 1})};
    const std::vector<int64_t> ages = {5, 5};
    const Match m = wba_schedule(fanouts, ages, 1.0, 1.0);
    CHECK(m.input_of(0) == 0);
    CHECK(m.input_of(1) == 1);  // uncontested, still served
    CHECK(work_conserving(fanouts, m));
}

TEST_CASE("wba: zero weights fall back to lowest input index, still work-conserving") {
    const FanoutSets fanouts = {ports({0, 1}), ports({0}), ports({1})};
    const std::vector<int64_t> ages = {3, 9, 27};
    const Match m = wba_schedule(fanouts, ages, 0.0, 0.0);
    CHECK(work_conserving(fanouts, m));
    CHECK(m.input_of(0) == 0);
    CHECK(m.input_of(1) == 0);
}

TEST_CASE("wba: aging never loses an output previously won") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3000; ++trial) {
        const int inputs = 2 + static_cast<int>(rng() % 4);
        const int outputs = 2 + static_cast<int>(rng() % 4);
        const FanoutSets fanouts = random_fanouts(rng, inputs, outputs, 3);
        std::vector<int64_t> ages(inputs);
        for (auto& a : ages) a = 1 + static_cast<int64_t>(rng() % 20);
        const double w_age = 1.0 + static_cast<double>(rng() % 3);
        const double w_fanout = static_cast<double>(rng() % 3);

        const Match before = wba_schedule(fanouts, ages, w_age, w_fanout);
        const int lucky = static_cast<int>(rng() % inputs);
        ages[lucky] += 1 + static_cast<int64_t>(rng() % 5);
        const Match after = wba_schedule(fanouts, ages, w_age, w_fanout);

        for (int o : before.outputs_of(lucky)) CHECK(after.input_of(o) == lucky);
    }
}

TEST_CASE("compute_residue: full service leaves all zeros") {
    const FanoutSets fanouts = {ports({0, 1}), ports({2})};
    Match m;
    m.add(0, 0);
    m.add(0, 1);
    m.add(1, 2);
    const ResidueReport r = compute_residue(fanouts, m);
    CHECK(r.residue_inputs == 0);
    CHECK(r.residual_copies == std::vector<int>{0, 0});
}

TEST_CASE("compute_residue: match outside the fanouts is a contract violation") {
    const FanoutSets fanouts = {ports({0})};
    Match m;
    m.add(0, 1);
    CHECK_THROWS_AS(compute_residue(fanouts, m), ContractViolation);
}

TEST_CASE("residue total is invariant across every work-conserving match") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        const int inputs = 2 + static_cast<int>(rng() % 3);
        const int outputs = 2 + static_cast<int>(rng() % 3);
        const FanoutSets fanouts = random_fanouts(rng, inputs, outputs, 2);

        int total_fanout = 0;
        for (const PortSet& f : fanouts) total_fanout += f.count();
        const int expected_residue = total_fanout - requested_outputs(fanouts).count();

        for (const Match& m : all_work_conserving(fanouts, outputs)) {
            const ResidueReport r = compute_residue(fanouts, m);
            int total = 0;
            for (int c : r.residual_copies) total += c;
            CHECK(total == expected_residue);
        }
    }
}

TEST_CASE("brute_force_min_residue: reference values") {
    CHECK(brute_force_min_residue({ports({0, 1, 2}), ports({1, 2})}, 3) == 1);
    CHECK(brute_force_min_residue({ports({0}), ports({1, 2})}, 3) == 0);
    CHECK(brute_force_min_residue({ports({0, 1, 2})}, 3) == 0);  // single input
    CHECK(brute_force_min_residue({}, 3) == 0);
}

TEST_CASE("brute_force_min_residue: refuses oversized instances") {
    // 13 outputs, each contested by both inputs
    FanoutSets fanouts = {PortSet::all(13), PortSet::all(13)};
    CHECK_THROWS_AS(brute_force_min_residue(fanouts, 13), ConfigError);
}
