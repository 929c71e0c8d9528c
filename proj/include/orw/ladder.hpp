#pragma once

#include <cstdint>
#include <vector>

#include "orw/step_law.hpp"
#include "orw/walk.hpp"

namespace orw {

// Event flags for one step of the gap process.
//
//   ascent  - every component strictly exceeds its running maximum (a common
//             ascent time; the excursion sums run strictly before the first).
//   descent - some component strictly undershoots all of its previous values
//             (union over components of strict descending ladder times).
//   reset   - some component is <= its value at the previous reset time.
//             Reset times are exactly the steps at which the time-reversed
//             path has seen no common ascent, so they index the renewal form
//             of the harmonic sum; between resets the running minimum vector
//             is frozen.
struct LadderEvent {
    long long n = 0;
    bool ascent = false;
    bool descent = false;
    bool reset = false;
    std::vector<int> descent_components;
};

class LadderClock {
  public:
    explicit LadderClock(std::vector<double> start);

    LadderEvent advance(const double* y_next);

    long long steps() const { return n_; }
    const std::vector<long long>& ascent_times() const { return ascent_times_; }
    const std::vector<long long>& descent_times() const { return descent_times_; }
    const std::vector<long long>& reset_times() const { return reset_times_; }
    const std::vector<double>& running_max() const { return run_max_; }
    const std::vector<double>& running_min() const { return run_min_; }

  private:
    int gd_;
    long long n_ = 0;
    std::vector<double> y_;
    std::vector<double> run_max_;   // over steps 0..n
    std::vector<double> run_min_;   // over steps 1..n (start values until first step)
    std::vector<double> strict_min_;  // over steps 0..n, for descent detection
    std::vector<double> reset_ref_;   // component values at the last reset
    std::vector<long long> ascent_times_, descent_times_, reset_times_;
};

// Summary of one excursion of the gap process started at the origin, cut at
// the first common ascent time (exclusive) or at `truncation` steps.
//
// For probe y and rate c
//   indicator_sum[p]     = #{ 1 <= n < J : max-gap deficit at n < y_p }
//   discounted_sum[p][c] = sum of e^{-c n} over the same steps
// where the deficit at n is (running max at n-1) - (position at n), compared
// componentwise and strictly.
struct ExcursionRecord {
    long long first_ascent = -1;  // -1 while censored
    bool censored = false;
    long long steps = 0;
    std::vector<double> indicator_sum;   // [probe]
    std::vector<double> discounted_sum;  // [probe * n_rates + rate]
};

ExcursionRecord run_excursion(const StepLaw& law,
                              const std::vector<std::vector<double>>& probes,
                              const std::vector<double>& c_list, long long truncation,
                              RngStream& rng);

}  // namespace orw
