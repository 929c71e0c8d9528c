#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "orw/harness.hpp"
#include "orw/rng.hpp"

using namespace orw;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json ssrw2_config(const std::string& out_dir) {
    return {
        {"kind", "estimate-h"},
        {"law",
         {{"d", 2},
          {"kind", "component-table"},
          {"components", {{{-1, 0.5}, {1, 0.5}}, {{-1, 0.5}, {1, 0.5}}}}}},
        {"probes", {0, 2}},
        {"c_grid", {0.2, 0.1}},
        {"replicas", 5000},
        {"seed_base", 9},
        {"out_dir", out_dir},
    };
}

}  // namespace

TEST_CASE("synthetic power law fits exactly") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 40; ++i) {
        const double n = 100.0 * std::pow(1.2, i);
        pts.push_back({n, std::pow(n, -1.5)});
    }
    const TailFit fit = tail_exponent_fit(pts, 50.0, 1e6);
    CHECK(std::abs(fit.slope + 1.5) < 1e-9);
    CHECK(fit.slope_se < 1e-9);
    CHECK(fit.ci_low <= fit.slope);
    CHECK(fit.ci_high >= fit.slope);
    CHECK(fit.n_points == 40);

    // rescaling the curve moves the intercept, never the slope
    for (auto& [n, p] : pts) p *= 7.25;
    const TailFit fit2 = tail_exponent_fit(pts, 50.0, 1e6);
    CHECK(std::abs(fit2.slope - fit.slope) < 1e-12);
}

TEST_CASE("fit window validation") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({100.0 + i, 0.5});
    CHECK_THROWS_AS(tail_exponent_fit(pts, 200.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(tail_exponent_fit(pts, 100.0, 105.0), std::invalid_argument);
    pts[5].second = 0.0;
    CHECK_THROWS_AS(tail_exponent_fit(pts, 50.0, 1000.0), std::invalid_argument);
}

TEST_CASE("ks statistic separates distinct samples and accepts identical ones") {
    std::vector<double> a, b, c;
    RngStream rng(3, 1);
    for (int i = 0; i < 4000; ++i) {
        a.push_back(rng.next_unit());
        b.push_back(rng.next_unit());
        c.push_back(0.5 * rng.next_unit());
    }
    const KsResult same = ks_two_sample(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    const KsResult iid = ks_two_sample(a, b);
    CHECK(iid.p_value > 0.001);

    const KsResult far = ks_two_sample(a, c);
    CHECK(far.statistic > 0.4);
    CHECK(far.p_value < 1e-6);

    std::vector<double> lo = {1, 1, 2, 2}, hi = {10, 11, 12, 13};
    CHECK(ks_two_sample(lo, hi).statistic == 1.0);
    CHECK_THROWS_AS(ks_two_sample({}, hi), std::invalid_argument);
}

TEST_CASE("config hash ignores execution-only fields") {
    nlohmann::json doc = ssrw2_config("/tmp/orw_hash_a");
    const ExperimentConfig a = ExperimentConfig::from_json(doc);
    doc["out_dir"] = "/tmp/orw_hash_b";
    doc["threads"] = 7;
    const ExperimentConfig b = ExperimentConfig::from_json(doc);
    CHECK(a.config_hash() == b.config_hash());
    doc["replicas"] = 5001;
    const ExperimentConfig c = ExperimentConfig::from_json(doc);
    CHECK(a.config_hash() != c.config_hash());
}

TEST_CASE("config validation rejects malformed documents") {
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"law", 1}}), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json({{"kind", "nope"}}),
                    std::invalid_argument);
    nlohmann::json doc = ssrw2_config("/tmp/orw_x");
    doc["threads"] = 0;
    CHECK_THROWS_AS(ExperimentConfig::from_json(doc), std::invalid_argument);

    doc = ssrw2_config("/tmp/orw_x");
    doc["c_grid"] = {0.1, 0.2};
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(doc)),
                    std::invalid_argument);
    doc["c_grid"] = {0.2, -0.1};
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(doc)),
                    std::invalid_argument);
    doc = ssrw2_config("/tmp/orw_x");
    doc["probes"] = nlohmann::json::array();
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(doc)),
                    std::invalid_argument);
}

TEST_CASE("estimate experiment writes reproducible files with monotone columns") {
    const std::string dir_a = "/tmp/orw_est_a", dir_b = "/tmp/orw_est_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);

    nlohmann::json doc = ssrw2_config(dir_a);
    REQUIRE(run_experiment(ExperimentConfig::from_json(doc)) == 0);
    doc["out_dir"] = dir_b;
    doc["threads"] = 3;
    REQUIRE(run_experiment(ExperimentConfig::from_json(doc)) == 0);

    const std::string csv = slurp(dir_a + "/estimates.csv");
    CHECK(csv == slurp(dir_b + "/estimates.csv"));
    CHECK(slurp(dir_a + "/summary.json") == slurp(dir_b + "/summary.json"));
    CHECK(csv.rfind("form,y1,c,value,std_error,replicas,censored_fraction,config_hash,seed",
                    0) == 0);

    // per probe: value rises as c falls, capped by the undiscounted row
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    double prev = -1.0;
    std::string prev_probe;
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string form, probe, c, value;
        std::getline(cells, form, ',');
        std::getline(cells, probe, ',');
        std::getline(cells, c, ',');
        std::getline(cells, value, ',');
        if (probe != prev_probe) {
            prev = -1.0;
            prev_probe = probe;
        }
        const double v = std::stod(value);
        CHECK(v >= prev);
        prev = v;
    }

    const nlohmann::json manifest = nlohmann::json::parse(slurp(dir_a + "/manifest.json"));
    CHECK(manifest.at("kind") == "estimate-h");
    CHECK(manifest.at("config_hash") ==
          ExperimentConfig::from_json(doc).config_hash());
}

TEST_CASE("oracle-check experiment passes its battery end to end") {
    const std::string dir = "/tmp/orw_battery";
    std::filesystem::remove_all(dir);
    const ExperimentConfig cfg = ExperimentConfig::from_json(
        {{"kind", "oracle-check"}, {"out_dir", dir}, {"seed_base", 1}});
    CHECK(run_experiment(cfg) == 0);
    const std::string csv = slurp(dir + "/oracle_check.csv");
    CHECK(csv.find(",0,") == std::string::npos);  // no failing row
}
