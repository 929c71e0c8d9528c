#include <doctest.h>

#include <cmath>

#include "orw/conditioned.hpp"
#include "orw/step_law.hpp"
#include "orw/walk.hpp"

using namespace orw;

namespace {

StepLaw ssrw(int d) {
    std::vector<std::vector<std::pair<long long, double>>> comps(d, {{-1, 0.5}, {1, 0.5}});
    return StepLaw::component_table(comps);
}

bool ordered(const std::vector<long long>& w) {
    for (size_t k = 0; k + 1 < w.size(); ++k)
        if (w[k] >= w[k + 1]) return false;
    return true;
}

}  // namespace

TEST_CASE("closed-form table doubles the gap and is harmonic for the lazy gap walk") {
    const HFunction h = exact_h_table_pm2_walk(64);
    CHECK(h.value_at({0}) == 1.0);
    CHECK(h.value_at({2}) == 4.0);
    CHECK(h.value_at({4}) == 8.0);
    CHECK(h.value_at({6}) == 12.0);
    CHECK(h.sigma_at({4}) == 0.0);
    CHECK_FALSE(h.contains({3}));

    const StepLaw law = ssrw(2);
    for (long long y = 2; y <= 60; y += 2) {
        const Residual r = harmonicity_residual(law, h, {y});
        CHECK(std::abs(r.value) <= 1e-12);
        CHECK(r.sigma == 0.0);
    }
}

TEST_CASE("constant table shows the one-step exit deficit as its residual") {
    HFunction one(1, "constant");
    for (long long y = 0; y <= 8; y += 2) one.set({y}, 1.0, 0.0);
    const StepLaw law = ssrw(2);
    // from gap 2 the walk exits with probability 1/4, so E[h; stay] - h = -1/4
    const Residual r2 = harmonicity_residual(law, one, {2});
    CHECK(r2.value == doctest::Approx(-0.25).epsilon(1e-15));
    const Residual r4 = harmonicity_residual(law, one, {4});
    CHECK(r4.value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("monte-carlo table brackets the closed form within its own noise") {
    const StepLaw law = ssrw(2);
    const HFunction h = mc_h_table_excursion(law, 4, 40000, 100000, 7);
    CHECK(h.value_at({0}) == 1.0);
    CHECK(h.sigma_at({0}) == 0.0);
    // truncation bias pulls the estimate down slightly; allow it plus noise
    const double v2 = h.value_at({2});
    CHECK(v2 > 4.0 - 5 * h.sigma_at({2}) - 0.05);
    CHECK(v2 < 4.0 + 5 * h.sigma_at({2}));
    const double v4 = h.value_at({4});
    CHECK(v4 > 8.0 - 5 * h.sigma_at({4}) - 0.12);
    CHECK(v4 < 8.0 + 5 * h.sigma_at({4}));
    // componentwise monotone, >= 1 everywhere
    double prev = 1.0;
    for (long long y = 1; y <= 4; ++y) {
        const double v = h.value_at({y});
        CHECK(v >= 1.0);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(h.provenance() == "monte-carlo");
}

TEST_CASE("transform rows of an exactly harmonic table are exactly stochastic") {
    const StepLaw law = ssrw(2);
    const HFunction h = exact_h_table_pm2_walk(1024);
    RngStream rng(5, 0);
    HTransformDiag diag;
    std::vector<long long> w = {0, 2};
    for (int n = 0; n < 300; ++n) {
        auto next = h_transform_step(law, h, w, rng, &diag);
        REQUIRE(next.has_value());
        CHECK(diag.row_mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ordered(*next));
        w = *next;
    }
    CHECK(diag.clamp_events == 0);
}

TEST_CASE("transform step rejects tables that are far from harmonic") {
    const StepLaw law = ssrw(2);
    HFunction bad(1, "bad");
    bad.set({0}, 1.0, 0.0);
    bad.set({2}, 1.0, 0.0);
    bad.set({4}, 100.0, 0.0);
    RngStream rng(5, 0);
    CHECK_THROWS_AS(h_transform_step(law, bad, {0, 2}, rng), std::runtime_error);
}

TEST_CASE("transform chains keep the full horizon under the exact table") {
    const StepLaw law = ssrw(2);
    const HFunction h = exact_h_table_pm2_walk(1024);
    RngStream rng(9, 2);
    const ConditionedPath path = sample_h_transform_path(law, h, {0, 2}, 64, rng);
    CHECK(path.killed_at == -1);
    REQUIRE(path.states.size() == 65);
    CHECK(path.states[0] == std::vector<long long>{0, 2});
    for (const auto& s : path.states) CHECK(ordered(s));
    CHECK(path.mode == "h-transform");
}

TEST_CASE("rejection sampler returns ordered prefixes pinned at the start state") {
    const StepLaw law = ssrw(2);
    RngStream rng(11, 3);
    const ConditionedPath path = sample_conditioned_geometric(law, {0, 2}, 0.2, 5, rng);
    REQUIRE(path.states.size() == 6);
    CHECK(path.states[0] == std::vector<long long>{0, 2});
    for (const auto& s : path.states) CHECK(ordered(s));
    CHECK(path.attempts >= 1);
    CHECK(path.mode == "geometric-rejection");
    for (size_t n = 1; n < path.states.size(); ++n) {
        for (size_t k = 0; k < 2; ++k) {
            const long long step = path.states[n][k] - path.states[n - 1][k];
            CHECK(std::llabs(step) == 1);
        }
    }
}

TEST_CASE("rejection sampler validates its inputs") {
    const StepLaw law = ssrw(2);
    RngStream rng(1, 0);
    CHECK_THROWS_AS(sample_conditioned_geometric(law, {2, 0}, 0.2, 3, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_conditioned_geometric(law, {0, 2}, -0.2, 3, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_conditioned_geometric(law, {0, 2}, 0.2, 0, rng),
                    std::invalid_argument);
    // impossible acceptance: huge horizon at a high rate exhausts the budget
    CHECK_THROWS_AS(sample_conditioned_geometric(law, {0, 2}, 3.0, 50, rng, 200),
                    std::runtime_error);
}

TEST_CASE("exact path laws are probability distributions on ordered paths") {
    const StepLaw law = ssrw(2);
    const HFunction h = exact_h_table_pm2_walk(64);
    const auto chain = path_law_h_chain(law, h, {0, 2}, 3);
    double mass = 0.0;
    for (const auto& [key, p] : chain) {
        CHECK(p > 0.0);
        CHECK(key.size() == 6);
        mass += p;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    const auto geo = path_law_geometric(law, {0, 2}, 0.1, 3);
    double gmass = 0.0;
    for (const auto& [key, p] : geo) gmass += p;
    CHECK(gmass == doctest::Approx(1.0).epsilon(1e-12));
    // same support
    CHECK(geo.size() == chain.size());
    for (const auto& [key, p] : chain) CHECK(geo.count(key) == 1);
}

TEST_CASE("geometric path laws drift toward the transform law as killing slows") {
    const StepLaw law = ssrw(2);
    const HFunction h = exact_h_table_pm2_walk(64);
    const auto chain = path_law_h_chain(law, h, {0, 2}, 3);
    double prev = 1.0;
    for (double c : {0.5, 0.2, 0.1, 0.05}) {
        const double tv = total_variation(path_law_geometric(law, {0, 2}, c, 3), chain);
        CHECK(tv < prev);
        prev = tv;
    }
    // the gap between the discounted survival weights and their limit decays
    // like sqrt(c); the exact distance at c = 0.05 sits near 0.06
    CHECK(prev > 0.05);
    CHECK(prev < 0.07);
    const double tv_tiny =
        total_variation(path_law_geometric(law, {0, 2}, 0.002, 3), chain);
    CHECK(tv_tiny < 0.02);
}

TEST_CASE("total variation is a metric on the common key space") {
    std::map<std::vector<long long>, double> a = {{{1}, 0.5}, {{2}, 0.5}};
    std::map<std::vector<long long>, double> b = {{{1}, 0.25}, {{3}, 0.75}};
    CHECK(total_variation(a, a) == 0.0);
    CHECK(total_variation(a, b) == doctest::Approx(0.75));
    CHECK(total_variation(b, a) == doctest::Approx(0.75));
    std::map<std::vector<long long>, double> disjoint = {{{9}, 1.0}};
    CHECK(total_variation(a, disjoint) == doctest::Approx(1.0));
}
