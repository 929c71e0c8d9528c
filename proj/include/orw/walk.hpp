#pragma once

#include <optional>
#include <vector>

#include "orw/rng.hpp"
#include "orw/step_law.hpp"

namespace orw {

// Adjacent differences x[i+1] - x[i].
std::vector<double> gap_of(const std::vector<double>& x);

// Strictly increasing components; a gap vector y is the image of a chamber
// point iff every entry of y is > 0.
bool in_weyl(const std::vector<double>& x);
bool gaps_positive(const double* y, int gd);

// Trajectory of the gap process started at `start`, with running maxima over
// steps 0..n and running minima over steps 1..n, and the first index n >= 1
// at which some gap component is <= 0 (absent if not seen by the horizon).
struct GapPath {
    int gap_dim = 0;
    std::vector<double> start;
    long long horizon = 0;
    // states[n * gap_dim + k] is component k at step n, n = 0..horizon.
    std::vector<double> states;
    std::vector<double> running_max;  // over steps 0..n
    std::vector<double> running_min;  // over steps 1..n; step-0 row mirrors start
    std::optional<long long> exit_time;
    bool exit_censored() const { return !exit_time.has_value(); }

    const double* state(long long n) const { return &states[n * gap_dim]; }
};

// Simulates `horizon` gap increments (horizon >= 1).  When stop_at_exit is
// set the trajectory ends at the exit index instead of the full horizon.
GapPath simulate_gap_path(const StepLaw& law, const std::vector<double>& start,
                          long long horizon, RngStream& rng, bool stop_at_exit = false);

// First n >= 1 with some gap component <= 0 on a recorded path.
std::optional<long long> exit_time_of(const GapPath& path);

}  // namespace orw
