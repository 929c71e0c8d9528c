#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orw/step_law.hpp"

namespace orw {

// Monte Carlo estimate of the harmonic candidate with its sampling error and
// censoring diagnostics.  `truncation_bias_bound` is a deterministic cap on
// the downward bias introduced by the horizon, where one is available
// (discounted forms); otherwise censored_fraction is the honest signal.
struct HEstimate {
    double value = 1.0;
    double std_error = 0.0;
    long long replicas = 0;
    long long truncation = 0;
    double censored_fraction = 0.0;
    double truncation_bias_bound = 0.0;
    std::string form;
    bool finiteness_warning = false;
    std::string note;
};

// Discounted ascent-excursion sum 1 + E sum_{n=1}^{J-1} e^{-cn} 1{Z_n < y}.
// On common random numbers (same seed, replicas, truncation) the estimate is
// exactly nonincreasing in c and dominated by estimate_h_excursion, term by
// term in floating point.  truncation = 0 picks ceil(42/c).
HEstimate estimate_h_c(const StepLaw& law, const std::vector<double>& y, double c,
                       long long replicas, long long truncation, std::uint64_t seed,
                       int threads = 1);

// Undiscounted form 1 + E sum_{n=1}^{J-1} 1{Z_n < y}.  truncation = 0 picks 1e5.
HEstimate estimate_h_excursion(const StepLaw& law, const std::vector<double>& y,
                               long long replicas, long long truncation, std::uint64_t seed,
                               int threads = 1);

// Renewal form 1 + sum_m P(R_m < infty, -running_min at R_m < y), where R_m
// are the reset times of the frozen running-minimum skeleton.  Terminates a
// replica as soon as the running minimum kills the indicator for good;
// max_beta_events caps the number of reset events examined per replica.
HEstimate estimate_h_renewal(const StepLaw& law, const std::vector<double>& y,
                             long long replicas, long long max_beta_events,
                             std::uint64_t seed, int threads = 1);

// Exit-mean ratio E_y[tau] / E_0[tau], valid when tau is almost surely
// finite (some gap drift negative); coupled numerator and denominator share
// each replica's increments, so y = 0 returns exactly 1.
HEstimate estimate_h_drift_negative(const StepLaw& law, const std::vector<double>& y,
                                    long long replicas, long long truncation,
                                    std::uint64_t seed, int threads = 1);

// Survival ratio P_y(tau > horizon) / P_0(tau > horizon), valid when all gap
// drifts are positive so both probabilities stabilise; horizon = 0 runs a
// doubling pilot until the ratio flattens.
HEstimate estimate_h_drift_positive(const StepLaw& law, const std::vector<double>& y,
                                    long long replicas, long long horizon,
                                    std::uint64_t seed, int threads = 1);

}  // namespace orw
