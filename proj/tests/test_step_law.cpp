#include <doctest.h>

#include <cmath>
#include <map>

#include "orw/step_law.hpp"

using namespace orw;

namespace {

StepLaw ssrw(int d) {
    std::vector<std::vector<std::pair<long long, double>>> comps(d, {{-1, 0.5}, {1, 0.5}});
    return StepLaw::component_table(comps);
}

double gap_prob(const StepLaw& law, const std::vector<long long>& dy) {
    for (const auto& g : law.gap_atoms())
        if (g.dy == dy) return g.p;
    return 0.0;
}

}  // namespace

TEST_CASE("two-component symmetric walk convolves to the lazy gap pmf") {
    const StepLaw law = ssrw(2);
    CHECK(law.dimension() == 2);
    CHECK(law.gap_dimension() == 1);
    CHECK(law.atoms().size() == 4);
    CHECK(gap_prob(law, {-2}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(gap_prob(law, {0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gap_prob(law, {2}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(law.drift()[0] == doctest::Approx(0.0));
    CHECK(law.gap_drift()[0] == doctest::Approx(0.0));
    CHECK(law.gap_reach()[0] == 2);
    CHECK(law.has_iid_components());
    CHECK(law.component_pmf().size() == 2);
}

TEST_CASE("three-component biased walk has the convolved nine-atom gap pmf") {
    std::vector<std::vector<std::pair<long long, double>>> comps(3, {{-1, 0.6}, {1, 0.4}});
    const StepLaw law = StepLaw::component_table(comps);
    CHECK(law.drift()[0] == doctest::Approx(-0.2));
    CHECK(law.drift()[2] == doctest::Approx(-0.2));
    CHECK(law.gap_drift()[0] == doctest::Approx(0.0));
    CHECK(law.gap_drift()[1] == doctest::Approx(0.0));
    CHECK(gap_prob(law, {2, -2}) == doctest::Approx(0.6 * 0.4 * 0.6).epsilon(1e-15));
    CHECK(gap_prob(law, {-2, 2}) == doctest::Approx(0.4 * 0.6 * 0.4).epsilon(1e-15));
    double total = 0.0;
    for (const auto& g : law.gap_atoms()) total += g.p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("opposed component drifts produce a negative gap drift") {
    const StepLaw law =
        StepLaw::component_table({{{-1, 0.3}, {1, 0.7}}, {{-1, 0.7}, {1, 0.3}}});
    CHECK(law.gap_drift()[0] == doctest::Approx(-0.8));
    CHECK(gap_prob(law, {-2}) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(gap_prob(law, {0}) == doctest::Approx(0.42).epsilon(1e-15));
    CHECK(gap_prob(law, {2}) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(law.finiteness().some_gap_drift_negative);
    CHECK_FALSE(law.has_iid_components());
    CHECK_THROWS_AS(law.component_pmf(), std::invalid_argument);
}

TEST_CASE("finiteness screen distinguishes the three step-law regimes") {
    CHECK(ssrw(2).finiteness().joint_positive_step);
    const FinitenessScreen s3 = ssrw(3).finiteness();
    CHECK_FALSE(s3.joint_positive_step);
    CHECK_FALSE(s3.some_gap_drift_negative);
    CHECK_FALSE(s3.all_gap_drifts_positive);
    CHECK_FALSE(s3.any());

    const StepLaw pos = StepLaw::component_table({{{-1, 0.5}, {0, 0.4}, {1, 0.1}},
                                                  {{-1, 0.2}, {0, 0.6}, {1, 0.2}},
                                                  {{-1, 0.1}, {0, 0.4}, {1, 0.5}}});
    CHECK(pos.finiteness().all_gap_drifts_positive);
    CHECK(pos.gap_drift()[0] == doctest::Approx(0.4));
    CHECK(pos.gap_drift()[1] == doctest::Approx(0.4));
    CHECK(pos.finiteness().joint_positive_step);
}

TEST_CASE("construction rejects malformed laws") {
    CHECK_THROWS_AS(StepLaw::lattice(1, {{{0}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(StepLaw::lattice(2, {}), std::invalid_argument);
    CHECK_THROWS_AS(StepLaw::lattice(2, {{{1, 1}, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(StepLaw::lattice(2, {{{1}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(StepLaw::lattice(2, {{{1, 1}, -0.5}, {{0, 0}, 1.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(StepLaw::gaussian_iid(2, {0.0, 1.0}, 0.0), std::invalid_argument);
    // a gap component that never moves down (or never up) is degenerate
    CHECK_THROWS_AS(
        StepLaw::lattice(2, {{{0, 1}, 0.5}, {{0, 2}, 0.5}}), std::invalid_argument);
}

TEST_CASE("gaussian law records means as drift and mean gaps as gap drift") {
    const StepLaw law = StepLaw::gaussian_iid(3, {0.0, 0.5, 1.5}, 2.0);
    CHECK_FALSE(law.is_lattice());
    CHECK(law.drift()[1] == doctest::Approx(0.5));
    CHECK(law.gap_drift()[0] == doctest::Approx(0.5));
    CHECK(law.gap_drift()[1] == doctest::Approx(1.0));
    CHECK(law.finiteness().all_gap_drifts_positive);
}

TEST_CASE("json descriptors round-trip for every law kind") {
    const nlohmann::json comp = {
        {"d", 2},
        {"kind", "component-table"},
        {"components", {{{-1, 0.3}, {1, 0.7}}, {{-1, 0.7}, {1, 0.3}}}}};
    const StepLaw a = StepLaw::from_json(comp);
    const StepLaw a2 = StepLaw::from_json(a.to_json());
    CHECK(a2.gap_drift()[0] == a.gap_drift()[0]);
    CHECK(a2.atoms().size() == a.atoms().size());

    const nlohmann::json lat = {
        {"d", 2}, {"kind", "lattice-pmf"}, {"atoms", {{{1, 2}, 0.5}, {{2, 1}, 0.5}}}};
    const StepLaw b = StepLaw::from_json(lat);
    const StepLaw b2 = StepLaw::from_json(b.to_json());
    CHECK(b2.gap_atoms().size() == b.gap_atoms().size());

    const nlohmann::json gauss = {
        {"d", 3}, {"kind", "gaussian-iid"}, {"means", {0.0, 1.0, 2.0}}, {"sigma", 1.5}};
    const StepLaw c = StepLaw::from_json(gauss);
    const StepLaw c2 = StepLaw::from_json(c.to_json());
    CHECK(c2.gap_drift() == c.gap_drift());

    CHECK_THROWS_AS(StepLaw::from_json({{"d", 2}}), std::invalid_argument);
    CHECK_THROWS_AS(StepLaw::from_json({{"d", 2}, {"kind", "nope"}}),
                    std::invalid_argument);
}

TEST_CASE("gap sampler frequencies match the gap pmf") {
    const StepLaw law = ssrw(2);
    RngStream rng(7, 0);
    const long long n = 200000;
    std::map<long long, long long> counts;
    double dy[1];
    for (long long i = 0; i < n; ++i) {
        law.sample_gap_step(rng, dy);
        ++counts[static_cast<long long>(dy[0])];
    }
    for (const auto& g : law.gap_atoms()) {
        const double freq = static_cast<double>(counts[g.dy[0]]) / n;
        const double se = std::sqrt(g.p * (1 - g.p) / n);
        CHECK(std::abs(freq - g.p) < 5 * se);
    }
}

TEST_CASE("walk sampler frequencies match the joint pmf") {
    const StepLaw law = ssrw(2);
    RngStream rng(11, 3);
    const long long n = 100000;
    std::map<std::pair<long long, long long>, long long> counts;
    double dx[2];
    for (long long i = 0; i < n; ++i) {
        law.sample_walk_step(rng, dx);
        ++counts[{static_cast<long long>(dx[0]), static_cast<long long>(dx[1])}];
    }
    for (const auto& a : law.atoms()) {
        const double freq =
            static_cast<double>(counts[{a.dx[0], a.dx[1]}]) / n;
        const double se = std::sqrt(a.p * (1 - a.p) / n);
        CHECK(std::abs(freq - a.p) < 5 * se);
    }
}

TEST_CASE("samplers are reproducible per (seed, stream) pair") {
    const StepLaw law = ssrw(3);
    double a[2], b[2];
    RngStream r1(42, 5), r2(42, 5), r3(42, 6);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        law.sample_gap_step(r1, a);
        law.sample_gap_step(r2, b);
        all_equal = all_equal && a[0] == b[0] && a[1] == b[1];
        law.sample_gap_step(r3, b);
        any_diff = any_diff || a[0] != b[0] || a[1] != b[1];
    }
    CHECK(all_equal);
    CHECK(any_diff);
}
