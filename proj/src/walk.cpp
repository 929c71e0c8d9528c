#include "orw/walk.hpp"

#include <algorithm>
#include <stdexcept>

namespace orw {

std::vector<double> gap_of(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("gap_of needs at least two components");
    std::vector<double> y(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) y[i] = x[i + 1] - x[i];
    return y;
}

bool in_weyl(const std::vector<double>& x) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1])) return false;
    return true;
}

bool gaps_positive(const double* y, int gd) {
    for (int k = 0; k < gd; ++k)
        if (!(y[k] > 0.0)) return false;
    return true;
}

GapPath simulate_gap_path(const StepLaw& law, const std::vector<double>& start,
                          long long horizon, RngStream& rng, bool stop_at_exit) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const int gd = law.gap_dimension();
    if (static_cast<int>(start.size()) != gd)
        throw std::invalid_argument("start dimension mismatch");

    GapPath path;
    path.gap_dim = gd;
    path.start = start;
    path.horizon = horizon;
    path.states.reserve((horizon + 1) * gd);
    path.running_max.reserve((horizon + 1) * gd);
    path.running_min.reserve((horizon + 1) * gd);
    for (int k = 0; k < gd; ++k) {
        path.states.push_back(start[k]);
        path.running_max.push_back(start[k]);
        path.running_min.push_back(start[k]);
    }

    double y[8], step[8];
    for (int k = 0; k < gd; ++k) y[k] = start[k];

    for (long long n = 1; n <= horizon; ++n) {
        law.sample_gap_step(rng, step);
        bool exited = false;
        for (int k = 0; k < gd; ++k) {
            y[k] += step[k];
            path.states.push_back(y[k]);
            const double prev_max = path.running_max[(n - 1) * gd + k];
            path.running_max.push_back(std::max(prev_max, y[k]));
            const double prev_min = n == 1 ? y[k] : path.running_min[(n - 1) * gd + k];
            path.running_min.push_back(std::min(prev_min, y[k]));
            if (!(y[k] > 0.0)) exited = true;
        }
        if (exited && !path.exit_time.has_value()) {
            path.exit_time = n;
            if (stop_at_exit) {
                path.horizon = n;
                break;
            }
        }
    }
    return path;
}

std::optional<long long> exit_time_of(const GapPath& path) {
    for (long long n = 1; n <= path.horizon; ++n)
        if (!gaps_positive(path.state(n), path.gap_dim)) return n;
    return std::nullopt;
}

}  // namespace orw
