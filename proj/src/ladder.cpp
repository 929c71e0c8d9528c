#include "orw/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orw {

LadderClock::LadderClock(std::vector<double> start)
    : gd_(static_cast<int>(start.size())),
      y_(start),
      run_max_(start),
      run_min_(start),
      strict_min_(start),
      reset_ref_(std::move(start)) {
    if (gd_ < 1) throw std::invalid_argument("ladder clock needs at least one component");
}

LadderEvent LadderClock::advance(const double* y_next) {
    ++n_;
    LadderEvent ev;
    ev.n = n_;

    bool ascent = true;
    bool reset = false;
    for (int k = 0; k < gd_; ++k) {
        if (!(y_next[k] > run_max_[k])) ascent = false;
        if (y_next[k] < strict_min_[k]) ev.descent_components.push_back(k);
        if (y_next[k] <= reset_ref_[k]) reset = true;
    }
    ev.ascent = ascent;
    ev.descent = !ev.descent_components.empty();
    ev.reset = reset;

    for (int k = 0; k < gd_; ++k) {
        y_[k] = y_next[k];
        run_max_[k] = std::max(run_max_[k], y_next[k]);
        run_min_[k] = n_ == 1 ? y_next[k] : std::min(run_min_[k], y_next[k]);
        strict_min_[k] = std::min(strict_min_[k], y_next[k]);
    }
    if (reset)
        for (int k = 0; k < gd_; ++k) reset_ref_[k] = y_next[k];

    if (ascent) ascent_times_.push_back(n_);
    if (ev.descent) descent_times_.push_back(n_);
    if (reset) reset_times_.push_back(n_);
    return ev;
}

ExcursionRecord run_excursion(const StepLaw& law,
                              const std::vector<std::vector<double>>& probes,
                              const std::vector<double>& c_list, long long truncation,
                              RngStream& rng) {
    if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
    const int gd = law.gap_dimension();
    for (const auto& p : probes)
        if (static_cast<int>(p.size()) != gd)
            throw std::invalid_argument("probe dimension mismatch");
    const std::size_t P = probes.size(), C = c_list.size();

    ExcursionRecord rec;
    rec.indicator_sum.assign(P, 0.0);
    rec.discounted_sum.assign(P * C, 0.0);

    std::vector<double> f(C), dfac(C, 1.0);
    for (std::size_t c = 0; c < C; ++c) f[c] = std::exp(-c_list[c]);

    double y[8] = {0}, run_max[8] = {0}, z[8], step[8];
    rec.censored = true;
    for (long long n = 1; n <= truncation; ++n) {
        law.sample_gap_step(rng, step);
        bool fire = true;
        for (int k = 0; k < gd; ++k) {
            y[k] += step[k];
            z[k] = run_max[k] - y[k];
            if (!(z[k] < 0.0)) fire = false;
        }
        if (fire) {
            rec.first_ascent = n;
            rec.censored = false;
            rec.steps = n;
            break;
        }
        for (std::size_t c = 0; c < C; ++c) dfac[c] *= f[c];
        for (std::size_t p = 0; p < P; ++p) {
            bool ind = true;
            const double* pr = probes[p].data();
            for (int k = 0; k < gd; ++k)
                if (!(z[k] < pr[k])) {
                    ind = false;
                    break;
                }
            if (ind) {
                rec.indicator_sum[p] += 1.0;
                double* row = &rec.discounted_sum[p * C];
                for (std::size_t c = 0; c < C; ++c) row[c] += dfac[c];
            }
        }
        for (int k = 0; k < gd; ++k) run_max[k] = std::max(run_max[k], y[k]);
        rec.steps = n;
    }
    return rec;
}

}  // namespace orw
