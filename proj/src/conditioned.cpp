#include "orw/conditioned.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "orw/oracle.hpp"
#include "orw/walk.hpp"

namespace orw {

namespace {

constexpr int kMaxDim = 8;

std::vector<long long> gaps_of_state(const std::vector<long long>& w) {
    std::vector<long long> g(w.size() - 1);
    for (size_t k = 0; k + 1 < w.size(); ++k) g[k] = w[k + 1] - w[k];
    return g;
}

bool strictly_ordered(const std::vector<long long>& w) {
    for (size_t k = 0; k + 1 < w.size(); ++k) {
        if (w[k] >= w[k + 1]) return false;
    }
    return true;
}

void require_chamber(const std::vector<long long>& w) {
    if (w.size() < 2) throw std::invalid_argument("state needs at least two components");
    if (!strictly_ordered(w)) throw std::invalid_argument("state must be strictly ordered");
}

}  // namespace

HFunction::HFunction(int gap_dim, std::string provenance)
    : gap_dim_(gap_dim), provenance_(std::move(provenance)) {
    if (gap_dim < 1) throw std::invalid_argument("gap dimension must be >= 1");
}

void HFunction::set(const std::vector<long long>& y, double value, double std_error) {
    if (static_cast<int>(y.size()) != gap_dim_) {
        throw std::invalid_argument("probe dimension mismatch");
    }
    table_[y] = {value, std_error};
}

bool HFunction::contains(const std::vector<long long>& y) const {
    return table_.count(y) > 0;
}

double HFunction::value_at(const std::vector<long long>& y) const {
    auto it = table_.find(y);
    if (it == table_.end()) throw std::out_of_range("h table missing requested gap point");
    return it->second.first;
}

double HFunction::sigma_at(const std::vector<long long>& y) const {
    auto it = table_.find(y);
    if (it == table_.end()) throw std::out_of_range("h table missing requested gap point");
    return it->second.second;
}

HFunction exact_h_table_pm2_walk(long long max_gap) {
    if (max_gap < 2) throw std::invalid_argument("max_gap must be >= 2");
    HFunction h(1, "exact-closed-form");
    h.set({0}, 1.0, 0.0);
    for (long long y = 2; y <= max_gap; y += 2) {
        h.set({y}, 2.0 * static_cast<double>(y), 0.0);
    }
    return h;
}

HFunction mc_h_table_excursion(const StepLaw& law, long long box, long long replicas,
                               long long truncation, std::uint64_t seed) {
    if (!law.is_lattice()) throw std::invalid_argument("mc table needs a lattice law");
    const int gd = law.gap_dimension();
    if (gd > 2) throw std::invalid_argument("batched table supports gap dimension <= 2");
    if (box < 1) throw std::invalid_argument("box must be >= 1");
    if (replicas < 2) throw std::invalid_argument("replicas must be >= 2");
    if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");

    // probes live on [1, box]^gd; cell (a, b) accumulates the number of steps
    // whose deficit vector Z has max(floor(Z)+1, 1) = (a, b); Z < y holds iff
    // the cell value is <= y, so a prefix cumulative sum turns the histogram
    // into per-probe counts #{n: Z_n < y componentwise}
    const long long w = box;
    const long long cells = gd == 1 ? w : w * w;
    std::vector<long long> local(static_cast<size_t>(cells));
    std::vector<double> sum(static_cast<size_t>(cells), 0.0);
    std::vector<double> sumsq(static_cast<size_t>(cells), 0.0);

    double pos[kMaxDim], runmax[kMaxDim], dy[kMaxDim];
    for (long long r = 0; r < replicas; ++r) {
        RngStream rng(seed, static_cast<std::uint64_t>(r));
        for (int k = 0; k < gd; ++k) {
            pos[k] = 0.0;
            runmax[k] = 0.0;
        }
        std::fill(local.begin(), local.end(), 0LL);
        for (long long n = 1; n <= truncation; ++n) {
            law.sample_gap_step(rng, dy);
            bool fire = true, inside = true;
            long long cell[2] = {0, 0};
            for (int k = 0; k < gd; ++k) {
                pos[k] += dy[k];
                const double z = runmax[k] - pos[k];
                if (!(z < 0.0)) fire = false;
                // smallest integer probe >= 1 that dominates z strictly
                const long long m = std::max<long long>(
                    static_cast<long long>(std::floor(z)) + 1, 1);
                if (m > w) inside = false;
                cell[k] = m - 1;
            }
            if (fire) break;
            if (inside) {
                const size_t idx = gd == 1
                                       ? static_cast<size_t>(cell[0])
                                       : static_cast<size_t>(cell[0] * w + cell[1]);
                ++local[idx];
            }
            for (int k = 0; k < gd; ++k) runmax[k] = std::max(runmax[k], pos[k]);
        }
        // prefix sums over both axes give counts for every probe at once
        if (gd == 1) {
            for (long long a = 1; a < w; ++a) local[a] += local[a - 1];
        } else {
            for (long long a = 0; a < w; ++a) {
                for (long long b = 1; b < w; ++b) local[a * w + b] += local[a * w + b - 1];
            }
            for (long long a = 1; a < w; ++a) {
                for (long long b = 0; b < w; ++b) local[a * w + b] += local[(a - 1) * w + b];
            }
        }
        for (long long i = 0; i < cells; ++i) {
            const double v = static_cast<double>(local[i]);
            sum[i] += v;
            sumsq[i] += v * v;
        }
    }

    HFunction h(gd, "monte-carlo");
    const double m = static_cast<double>(replicas);
    std::vector<long long> y(gd);
    for (long long i = 0; i < cells; ++i) {
        const double mean = sum[i] / m;
        const double var = std::max(0.0, (sumsq[i] - m * mean * mean) / (m - 1.0));
        if (gd == 1) {
            y[0] = i + 1;
        } else {
            y[0] = i / w + 1;
            y[1] = i % w + 1;
        }
        h.set(y, 1.0 + mean, std::sqrt(var / m));
    }
    std::vector<long long> zero(gd, 0);
    h.set(zero, 1.0, 0.0);
    return h;
}

std::optional<std::vector<long long>> h_transform_step(const StepLaw& law,
                                                       const HFunction& h,
                                                       const std::vector<long long>& w,
                                                       RngStream& rng,
                                                       HTransformDiag* diag) {
    if (!law.is_lattice()) throw std::invalid_argument("h-transform needs a lattice law");
    require_chamber(w);
    if (static_cast<int>(w.size()) != law.dimension()) {
        throw std::invalid_argument("state dimension mismatch");
    }
    const double hw = h.value_at(gaps_of_state(w));

    const auto& atoms = law.atoms();
    double total = 0.0;
    std::vector<double> weights(atoms.size(), 0.0);
    std::vector<long long> z(w.size());
    for (size_t ai = 0; ai < atoms.size(); ++ai) {
        bool ordered = true;
        for (size_t k = 0; k < w.size(); ++k) {
            z[k] = w[k] + atoms[ai].dx[k];
            if (k > 0 && z[k - 1] >= z[k]) ordered = false;
        }
        if (!ordered) continue;
        weights[ai] = atoms[ai].p * h.value_at(gaps_of_state(z)) / hw;
        total += weights[ai];
    }
    if (total > 1.0 + 1e-6) {
        std::ostringstream os;
        os << "h-transform row mass " << total << " exceeds 1 + 1e-6";
        throw std::runtime_error(os.str());
    }
    if (diag) {
        diag->row_mass = total;
        if (total > 1.0) ++diag->clamp_events;
    }
    const double u = rng.next_unit();
    double cum = 0.0;
    for (size_t ai = 0; ai < atoms.size(); ++ai) {
        if (weights[ai] == 0.0) continue;
        cum += weights[ai];
        if (u < cum) {
            for (size_t k = 0; k < w.size(); ++k) z[k] = w[k] + atoms[ai].dx[k];
            return z;
        }
    }
    return std::nullopt;  // killed by the sub-stochastic deficit
}

Residual harmonicity_residual(const StepLaw& law, const HFunction& h,
                              const std::vector<long long>& y) {
    if (!law.is_lattice()) throw std::invalid_argument("residual needs a lattice law");
    if (static_cast<int>(y.size()) != law.gap_dimension()) {
        throw std::invalid_argument("probe dimension mismatch");
    }
    Residual r;
    double var = 0.0;
    std::vector<long long> z(y.size());
    for (const auto& a : law.gap_atoms()) {
        bool inside = true;
        for (size_t k = 0; k < y.size(); ++k) {
            z[k] = y[k] + a.dy[k];
            if (z[k] <= 0) inside = false;
        }
        if (!inside) continue;
        r.value += a.p * h.value_at(z);
        const double s = h.sigma_at(z);
        var += a.p * a.p * s * s;
    }
    r.value -= h.value_at(y);
    const double sy = h.sigma_at(y);
    r.sigma = std::sqrt(var + sy * sy);
    return r;
}

ConditionedPath sample_conditioned_geometric(const StepLaw& law,
                                             const std::vector<long long>& x0, double c,
                                             long long T, RngStream& rng,
                                             long long max_attempts) {
    if (!law.is_lattice()) throw std::invalid_argument("rejection sampler needs a lattice law");
    require_chamber(x0);
    if (static_cast<int>(x0.size()) != law.dimension()) {
        throw std::invalid_argument("state dimension mismatch");
    }
    if (!(c > 0.0)) throw std::invalid_argument("killing rate must be > 0");
    if (T < 1) throw std::invalid_argument("horizon must be >= 1");
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");

    const int d = law.dimension();
    double dx[kMaxDim];
    std::vector<long long> x(x0);
    std::vector<std::vector<long long>> kept;

    for (long long attempt = 1; attempt <= max_attempts; ++attempt) {
        const long long n_kill = rng.next_geometric_rate(c);
        if (n_kill < T) continue;  // cannot cover [0, T]
        x = x0;
        kept.assign(1, x0);
        bool ok = true;
        for (long long n = 1; n <= n_kill && ok; ++n) {
            law.sample_walk_step(rng, dx);
            for (int k = 0; k < d; ++k) x[k] += static_cast<long long>(std::llround(dx[k]));
            if (!strictly_ordered(x)) {
                ok = false;
                break;
            }
            if (n <= T) kept.push_back(x);
        }
        if (!ok) continue;
        ConditionedPath out;
        out.states = std::move(kept);
        out.mode = "geometric-rejection";
        out.attempts = attempt;
        return out;
    }
    std::ostringstream os;
    os << "rejection sampler exceeded " << max_attempts
       << " attempts (observed acceptance rate 0 at c=" << c << ", T=" << T << ")";
    throw std::runtime_error(os.str());
}

ConditionedPath sample_h_transform_path(const StepLaw& law, const HFunction& h,
                                        const std::vector<long long>& x0, long long T,
                                        RngStream& rng) {
    require_chamber(x0);
    if (T < 1) throw std::invalid_argument("horizon must be >= 1");
    ConditionedPath out;
    out.mode = "h-transform";
    out.states.push_back(x0);
    std::vector<long long> w = x0;
    for (long long n = 1; n <= T; ++n) {
        auto next = h_transform_step(law, h, w, rng);
        if (!next) {
            out.killed_at = n;
            return out;
        }
        if (!strictly_ordered(*next)) {
            throw std::logic_error("h-transform chain left the chamber");
        }
        w = *next;
        out.states.push_back(w);
    }
    return out;
}

namespace {

void enumerate_paths(const StepLaw& law, const std::vector<long long>& w, long long depth,
                     long long T, double weight, std::vector<long long>& key,
                     const std::function<double(const std::vector<long long>&)>& terminal,
                     const std::function<double(const std::vector<long long>&,
                                                const std::vector<long long>&)>& factor,
                     std::map<std::vector<long long>, double>& out) {
    if (depth == T) {
        out[key] += weight * terminal(w);
        return;
    }
    std::vector<long long> z(w.size());
    for (const auto& a : law.atoms()) {
        bool ordered = true;
        for (size_t k = 0; k < w.size(); ++k) {
            z[k] = w[k] + a.dx[k];
            if (k > 0 && z[k - 1] >= z[k]) ordered = false;
        }
        if (!ordered) continue;
        const size_t mark = key.size();
        key.insert(key.end(), z.begin(), z.end());
        enumerate_paths(law, z, depth + 1, T, weight * a.p * factor(w, z), key, terminal,
                        factor, out);
        key.resize(mark);
    }
}

}  // namespace

std::map<std::vector<long long>, double> path_law_h_chain(const StepLaw& law,
                                                          const HFunction& h,
                                                          const std::vector<long long>& x0,
                                                          long long T) {
    require_chamber(x0);
    if (T < 1 || std::pow(static_cast<double>(law.atoms().size()),
                          static_cast<double>(T)) > 1e7) {
        throw std::invalid_argument("path horizon out of range for exact enumeration");
    }
    std::map<std::vector<long long>, double> out;
    std::vector<long long> key;
    enumerate_paths(
        law, x0, 0, T, 1.0, key,
        [](const std::vector<long long>&) { return 1.0; },
        [&](const std::vector<long long>& w, const std::vector<long long>& z) {
            return h.value_at(gaps_of_state(z)) / h.value_at(gaps_of_state(w));
        },
        out);
    return out;
}

std::map<std::vector<long long>, double> path_law_geometric(const StepLaw& law,
                                                            const std::vector<long long>& x0,
                                                            double c, long long T,
                                                            long long n_max) {
    require_chamber(x0);
    if (!(c > 0.0)) throw std::invalid_argument("killing rate must be > 0");
    if (T < 1 || std::pow(static_cast<double>(law.atoms().size()),
                          static_cast<double>(T)) > 1e7) {
        throw std::invalid_argument("path horizon out of range for exact enumeration");
    }
    // weight of a surviving length-T prefix: P(N >= T and the remaining N - T
    // steps stay ordered) = e^{-cT} (1 - e^{-c}) * discounted survival sum of
    // the endpoint gap
    std::map<std::vector<long long>, double> tail_cache;
    auto terminal = [&](const std::vector<long long>& w) {
        const std::vector<long long> g = gaps_of_state(w);
        auto it = tail_cache.find(g);
        if (it == tail_cache.end()) {
            const DiscountedSurvival s = discounted_survival_sum(law, g, c, n_max);
            it = tail_cache.emplace(g, 0.5 * (s.lower + s.upper)).first;
        }
        return it->second;
    };
    std::map<std::vector<long long>, double> out;
    std::vector<long long> key;
    enumerate_paths(
        law, x0, 0, T, 1.0, key, terminal,
        [](const std::vector<long long>&, const std::vector<long long>&) { return 1.0; },
        out);
    double total = 0.0;
    for (const auto& [k, v] : out) {
        (void)k;
        total += v;
    }
    if (total <= 0.0) throw std::runtime_error("geometric path law has zero mass");
    for (auto& [k, v] : out) {
        (void)k;
        v /= total;
    }
    return out;
}

double total_variation(const std::map<std::vector<long long>, double>& a,
                       const std::map<std::vector<long long>, double>& b) {
    double tv = 0.0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        tv += std::abs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : b) {
        if (a.find(k) == a.end()) tv += v;
    }
    return 0.5 * tv;
}

}  // namespace orw
