#include "orw/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "orw/rng.hpp"

namespace orw {

namespace {

constexpr long long kChunk = 4096;
constexpr int kMaxGapDim = 8;

void check_probe(const StepLaw& law, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != law.gap_dimension()) {
        throw std::invalid_argument("probe dimension mismatch");
    }
    for (double v : y) {
        if (!(v >= 0.0)) throw std::invalid_argument("probe must be nonnegative");
    }
    if (law.gap_dimension() > kMaxGapDim) {
        throw std::invalid_argument("gap dimension too large for sampler");
    }
}

// Runs fn(begin, end, acc) over [0, replicas) in fixed chunks and merges the
// per-chunk accumulators in chunk order, so results do not depend on the
// thread count.
template <typename Acc, typename Fn>
Acc run_chunks(long long replicas, int threads, Fn fn) {
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    const long long n_chunks = (replicas + kChunk - 1) / kChunk;
    std::vector<Acc> parts(static_cast<size_t>(n_chunks));
    if (threads == 1 || n_chunks == 1) {
        for (long long ci = 0; ci < n_chunks; ++ci) {
            fn(ci * kChunk, std::min(replicas, (ci + 1) * kChunk), parts[ci]);
        }
    } else {
        std::atomic<long long> next{0};
        auto worker = [&] {
            while (true) {
                const long long ci = next.fetch_add(1);
                if (ci >= n_chunks) return;
                fn(ci * kChunk, std::min(replicas, (ci + 1) * kChunk), parts[ci]);
            }
        };
        std::vector<std::thread> pool;
        const int use = static_cast<int>(std::min<long long>(threads, n_chunks));
        pool.reserve(use);
        for (int t = 0; t < use; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    Acc total;
    for (const Acc& p : parts) total.merge(p);
    return total;
}

struct MeanAcc {
    double sum = 0.0, sumsq = 0.0;
    long long n = 0, censored = 0;
    void add(double x, bool cens) {
        sum += x;
        sumsq += x * x;
        ++n;
        censored += cens ? 1 : 0;
    }
    void merge(const MeanAcc& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
        censored += o.censored;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double se() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sumsq - static_cast<double>(n) * m * m) /
                                             static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

// Shared engine for the excursion forms: per replica, walk the gap process
// from the origin, track the running-max deficit, stop at the first common
// strict ascent, and accumulate the (possibly discounted) indicator sum.
HEstimate run_excursion_form(const StepLaw& law, const std::vector<double>& y, double c,
                             long long replicas, long long truncation, std::uint64_t seed,
                             int threads, const char* form) {
    check_probe(law, y);
    const int gd = law.gap_dimension();
    const double q = c > 0.0 ? std::exp(-c) : 1.0;

    auto acc = run_chunks<MeanAcc>(replicas, threads, [&](long long b, long long e,
                                                          MeanAcc& out) {
        double pos[kMaxGapDim], runmax[kMaxGapDim], dy[kMaxGapDim];
        for (long long r = b; r < e; ++r) {
            RngStream rng(seed, static_cast<std::uint64_t>(r));
            for (int k = 0; k < gd; ++k) {
                pos[k] = 0.0;
                runmax[k] = 0.0;
            }
            double s = 0.0, w = 1.0;
            bool censored = true;
            for (long long n = 1; n <= truncation; ++n) {
                law.sample_gap_step(rng, dy);
                w *= q;
                bool fire = true, ind = true;
                for (int k = 0; k < gd; ++k) {
                    pos[k] += dy[k];
                    const double z = runmax[k] - pos[k];
                    if (!(z < 0.0)) fire = false;
                    if (!(z < y[k])) ind = false;
                }
                if (fire) {
                    censored = false;
                    break;
                }
                if (ind) s += w;
                for (int k = 0; k < gd; ++k) runmax[k] = std::max(runmax[k], pos[k]);
            }
            out.add(s, censored);
        }
    });

    HEstimate est;
    est.value = 1.0 + acc.mean();
    est.std_error = acc.se();
    est.replicas = replicas;
    est.truncation = truncation;
    est.censored_fraction =
        static_cast<double>(acc.censored) / static_cast<double>(acc.n);
    est.form = form;
    if (c > 0.0) {
        est.truncation_bias_bound =
            std::pow(q, static_cast<double>(truncation + 1)) / (1.0 - q);
    }
    if (!law.finiteness().any()) {
        est.finiteness_warning = true;
        est.note = "no finiteness condition verified: " + law.finiteness().describe();
    }
    return est;
}

}  // namespace

HEstimate estimate_h_c(const StepLaw& law, const std::vector<double>& y, double c,
                       long long replicas, long long truncation, std::uint64_t seed,
                       int threads) {
    if (!(c > 0.0)) throw std::invalid_argument("killing rate must be > 0");
    if (truncation < 0) throw std::invalid_argument("truncation must be >= 0");
    if (truncation == 0) {
        truncation = static_cast<long long>(std::ceil(42.0 / c));
    }
    HEstimate est = run_excursion_form(law, y, c, replicas, truncation, seed, threads,
                                       "discounted-excursion");
    est.finiteness_warning = false;  // geometric killing keeps the sum finite
    est.note.clear();
    return est;
}

HEstimate estimate_h_excursion(const StepLaw& law, const std::vector<double>& y,
                               long long replicas, long long truncation, std::uint64_t seed,
                               int threads) {
    if (truncation < 0) throw std::invalid_argument("truncation must be >= 0");
    if (truncation == 0) truncation = 100000;
    return run_excursion_form(law, y, 0.0, replicas, truncation, seed, threads, "excursion");
}

HEstimate estimate_h_renewal(const StepLaw& law, const std::vector<double>& y,
                             long long replicas, long long max_beta_events,
                             std::uint64_t seed, int threads) {
    check_probe(law, y);
    if (max_beta_events < 1) throw std::invalid_argument("max_beta_events must be >= 1");
    const int gd = law.gap_dimension();
    const long long step_cap = 1000000;

    auto acc = run_chunks<MeanAcc>(replicas, threads, [&](long long b, long long e,
                                                          MeanAcc& out) {
        double pos[kMaxGapDim], runmin[kMaxGapDim], anchor[kMaxGapDim], dy[kMaxGapDim];
        for (long long r = b; r < e; ++r) {
            RngStream rng(seed, static_cast<std::uint64_t>(r));
            for (int k = 0; k < gd; ++k) {
                pos[k] = 0.0;
                anchor[k] = 0.0;
            }
            double s = 0.0;
            long long events = 0;
            bool censored = true;
            for (long long n = 1; n <= step_cap; ++n) {
                law.sample_gap_step(rng, dy);
                bool dead = false, reset = false;
                for (int k = 0; k < gd; ++k) {
                    pos[k] += dy[k];
                    runmin[k] = (n == 1) ? pos[k] : std::min(runmin[k], pos[k]);
                    // once some component of -min reaches the probe the
                    // indicator can never fire again
                    if (!(-runmin[k] < y[k])) dead = true;
                    if (pos[k] <= anchor[k]) reset = true;
                }
                if (dead) {
                    censored = false;
                    break;
                }
                if (reset) {
                    s += 1.0;
                    for (int k = 0; k < gd; ++k) anchor[k] = pos[k];
                    if (++events >= max_beta_events) break;
                }
            }
            out.add(s, censored);
        }
    });

    HEstimate est;
    est.value = 1.0 + acc.mean();
    est.std_error = acc.se();
    est.replicas = replicas;
    est.truncation = max_beta_events;
    est.censored_fraction =
        static_cast<double>(acc.censored) / static_cast<double>(acc.n);
    est.form = "renewal";
    if (!law.finiteness().any()) {
        est.finiteness_warning = true;
        est.note = "no finiteness condition verified: " + law.finiteness().describe();
    }
    return est;
}

namespace {

struct RatioAcc {
    double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
    long long n = 0, censored = 0;
    void add(double a, double b, bool cens) {
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
        ++n;
        censored += cens ? 1 : 0;
    }
    void merge(const RatioAcc& o) {
        sa += o.sa;
        sb += o.sb;
        saa += o.saa;
        sbb += o.sbb;
        sab += o.sab;
        n += o.n;
        censored += o.censored;
    }
    double ratio() const { return sa / sb; }
    // delta-method standard error for a ratio of coupled means
    double se() const {
        if (n < 2) return 0.0;
        const double m = static_cast<double>(n);
        const double ma = sa / m, mb = sb / m, r = ma / mb;
        const double vaa = std::max(0.0, (saa - m * ma * ma) / (m - 1));
        const double vbb = std::max(0.0, (sbb - m * mb * mb) / (m - 1));
        const double vab = (sab - m * ma * mb) / (m - 1);
        const double v = std::max(0.0, vaa - 2.0 * r * vab + r * r * vbb);
        return std::sqrt(v / m) / mb;
    }
};

}  // namespace

HEstimate estimate_h_drift_negative(const StepLaw& law, const std::vector<double>& y,
                                    long long replicas, long long truncation,
                                    std::uint64_t seed, int threads) {
    check_probe(law, y);
    if (truncation < 0) throw std::invalid_argument("truncation must be >= 0");
    if (truncation == 0) truncation = 10000000;
    bool some_negative = false;
    for (double g : law.gap_drift()) some_negative = some_negative || g < 0.0;
    if (!some_negative) {
        throw std::invalid_argument(
            "exit-mean form needs a gap component with strictly negative drift");
    }
    const int gd = law.gap_dimension();
    const long long cap = truncation;

    auto acc = run_chunks<RatioAcc>(replicas, threads, [&](long long b, long long e,
                                                           RatioAcc& out) {
        double pos[kMaxGapDim], dy[kMaxGapDim];
        for (long long r = b; r < e; ++r) {
            RngStream rng(seed, static_cast<std::uint64_t>(r));
            for (int k = 0; k < gd; ++k) pos[k] = 0.0;
            long long tau0 = 0, tauy = 0;
            // one increment path drives both exit clocks: the y-start path is
            // the 0-start path shifted by y, so tau0 <= tauy always
            for (long long n = 1; n <= cap; ++n) {
                law.sample_gap_step(rng, dy);
                bool alive0 = true, alivey = true;
                for (int k = 0; k < gd; ++k) {
                    pos[k] += dy[k];
                    if (!(pos[k] > 0.0)) alive0 = false;
                    if (!(pos[k] + y[k] > 0.0)) alivey = false;
                }
                if (tau0 == 0 && !alive0) tau0 = n;
                if (!alivey) {
                    tauy = n;
                    break;
                }
            }
            const bool cens = tauy == 0;
            if (tauy == 0) tauy = cap;
            if (tau0 == 0) tau0 = cap;
            out.add(static_cast<double>(tauy), static_cast<double>(tau0), cens);
        }
    });

    HEstimate est;
    est.value = acc.ratio();
    est.std_error = acc.se();
    est.replicas = replicas;
    est.truncation = cap;
    est.censored_fraction =
        static_cast<double>(acc.censored) / static_cast<double>(acc.n);
    est.form = "exit-mean-ratio";
    return est;
}

HEstimate estimate_h_drift_positive(const StepLaw& law, const std::vector<double>& y,
                                    long long replicas, long long horizon,
                                    std::uint64_t seed, int threads) {
    check_probe(law, y);
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    for (double g : law.gap_drift()) {
        if (!(g > 0.0)) {
            throw std::invalid_argument(
                "survival-ratio form needs strictly positive drift in every gap component");
        }
    }
    const int gd = law.gap_dimension();

    auto survival_pass = [&](long long reps, long long hor, std::uint64_t sd) {
        return run_chunks<RatioAcc>(reps, threads, [&](long long b, long long e,
                                                       RatioAcc& out) {
            double pos[kMaxGapDim], dy[kMaxGapDim];
            for (long long r = b; r < e; ++r) {
                RngStream rng(sd, static_cast<std::uint64_t>(r));
                for (int k = 0; k < gd; ++k) pos[k] = 0.0;
                bool alive0 = true, alivey = true;
                for (long long n = 1; n <= hor && alivey; ++n) {
                    law.sample_gap_step(rng, dy);
                    for (int k = 0; k < gd; ++k) {
                        pos[k] += dy[k];
                        if (alive0 && !(pos[k] > 0.0)) alive0 = false;
                        if (!(pos[k] + y[k] > 0.0)) alivey = false;
                    }
                }
                out.add(alivey ? 1.0 : 0.0, alive0 ? 1.0 : 0.0, false);
            }
        });
    };

    std::string note;
    if (horizon == 0) {
        // doubling pilot: stop when the ratio flattens within half a pilot
        // standard error
        const long long pilot_reps = std::min<long long>(replicas, 20000);
        double prev = -1.0;
        long long h = 64;
        for (; h <= 65536; h *= 2) {
            RatioAcc pa = survival_pass(pilot_reps, h, mix64(seed ^ 0x9d2c5680u));
            if (pa.sb <= 0.0) continue;
            const double cur = pa.ratio();
            if (prev > 0.0 && std::abs(cur - prev) <= std::max(0.5 * pa.se(), 1e-4 * cur)) {
                break;
            }
            prev = cur;
        }
        horizon = std::min<long long>(h, 65536);
        note = "pilot horizon " + std::to_string(horizon);
    }

    RatioAcc acc = survival_pass(replicas, horizon, seed);
    HEstimate est;
    est.value = acc.sb > 0.0 ? acc.ratio() : std::numeric_limits<double>::quiet_NaN();
    est.std_error = acc.sb > 0.0 ? acc.se() : 0.0;
    est.replicas = replicas;
    est.truncation = horizon;
    est.censored_fraction = 0.0;
    est.form = "survival-ratio";
    est.note = note;
    if (acc.sb <= 0.0) {
        est.note = (note.empty() ? "" : note + "; ") +
                   "no replica stayed ordered from the origin; survival ratio undefined";
    }
    return est;
}

}  // namespace orw
