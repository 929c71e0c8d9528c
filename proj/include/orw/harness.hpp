#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace orw {

// Log-log least-squares fit of a survival curve over a window of n.
struct TailFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double ci_low = 0.0;   // 95% interval
    double ci_high = 0.0;
    long long n_points = 0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

TailFit tail_exponent_fit(const std::vector<std::pair<double, double>>& survival,
                          double window_lo, double window_hi);

// Two-sample Kolmogorov-Smirnov test with the asymptotic significance level;
// with ties (lattice data) the p-value is conservative.
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// One experiment: a law, what to do with it, and where results go.  The
// config hash covers everything except execution parameters (threads,
// out_dir), so reruns across thread counts are byte-identical.
struct ExperimentConfig {
    nlohmann::json doc;
    std::string kind;
    std::string out_dir = ".";
    std::uint64_t seed_base = 1;
    int threads = 1;

    static ExperimentConfig from_json(const nlohmann::json& doc);
    std::string config_hash() const;
};

// Runs the experiment and writes CSV + JSON results under out_dir.
// Returns 0 on success, 2 on validation failure, 3 when an oracle-check
// comparison fails.
int run_experiment(const ExperimentConfig& config);

}  // namespace orw
