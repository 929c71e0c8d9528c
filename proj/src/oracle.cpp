#include "orw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace orw {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kOverflowTarget = 1e-12;
constexpr long long kMaxCells = 200000000;

Rational rational_from_double(double p) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("atom probability not finite");
    int exp = 0;
    double m = std::frexp(p, &exp);
    // m * 2^exp with m in [0.5, 1); scale mantissa to an exact integer
    long long mant = static_cast<long long>(std::ldexp(m, 53));
    exp -= 53;
    Rational r(mant);
    if (exp >= 0) {
        r *= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), exp);
    } else {
        r /= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), -exp);
    }
    return r;
}

void require_lattice(const StepLaw& law, const char* what) {
    if (!law.is_lattice()) {
        throw std::invalid_argument(std::string(what) + " needs a lattice law");
    }
}

double gap_component_std(const StepLaw& law) {
    const int gd = law.gap_dimension();
    double vmax = 0.0;
    for (int k = 0; k < gd; ++k) {
        double m1 = 0.0, m2 = 0.0;
        for (const auto& a : law.gap_atoms()) {
            m1 += a.p * static_cast<double>(a.dy[k]);
            m2 += a.p * static_cast<double>(a.dy[k]) * static_cast<double>(a.dy[k]);
        }
        vmax = std::max(vmax, m2 - m1 * m1);
    }
    return std::sqrt(std::max(vmax, 1e-12));
}

long long auto_box(const StepLaw& law, const std::vector<long long>& start, long long n) {
    long long smax = 1;
    for (long long v : start) smax = std::max(smax, v);
    long long reach = 1;
    for (long long r : law.gap_reach()) reach = std::max(reach, r);
    const double sigma = gap_component_std(law);
    const double spread = 9.5 * sigma * std::sqrt(static_cast<double>(std::max<long long>(n, 1)));
    long long box = smax + static_cast<long long>(std::ceil(spread)) + 2 * reach + 8;
    return ((box + 63) / 64) * 64;
}

}  // namespace

SurvivalDp::SurvivalDp(const StepLaw& law, const std::vector<long long>& start, long long box)
    : law_(&law), start_(start), gd_(law.gap_dimension()), box_(box) {
    require_lattice(law, "survival recursion");
    if (static_cast<int>(start.size()) != gd_) {
        throw std::invalid_argument("start dimension mismatch");
    }
    if (box_ < 4) throw std::invalid_argument("survival box must be >= 4");
    double cells = 1.0;
    for (int k = 0; k < gd_; ++k) cells *= static_cast<double>(box_);
    if (cells > static_cast<double>(kMaxCells)) {
        throw std::invalid_argument("survival box too large");
    }
    cur_.assign(static_cast<size_t>(cells), 0.0);
    nxt_.assign(static_cast<size_t>(cells), 0.0);
    act_lo_.assign(gd_, box_);
    act_hi_.assign(gd_, -1);
}

double SurvivalDp::mass_defect() const {
    if (n_ == 0) return 0.0;
    double s = 0.0;
    for (double v : cur_) s += v;
    return std::abs(1.0 - (s + overflow_ + absorbed_));
}

void SurvivalDp::first_step() {
    for (const auto& a : law_->gap_atoms()) {
        bool dead = false, over = false;
        for (int k = 0; k < gd_; ++k) {
            const long long v = start_[k] + a.dy[k];
            if (v <= 0) dead = true;
            if (v > box_) over = true;
        }
        if (dead) {
            absorbed_ += a.p;
        } else if (over) {
            overflow_ += a.p;
        } else {
            size_t idx = 0;
            for (int k = 0; k < gd_; ++k) {
                const long long cell = start_[k] + a.dy[k] - 1;
                idx = idx * static_cast<size_t>(box_) + static_cast<size_t>(cell);
                act_lo_[k] = std::min(act_lo_[k], cell);
                act_hi_[k] = std::max(act_hi_[k], cell);
            }
            cur_[idx] += a.p;
        }
    }
    in_box_ = 1.0 - overflow_ - absorbed_;
}

void SurvivalDp::array_step() {
    const double before = in_box_;
    std::fill(nxt_.begin(), nxt_.end(), 0.0);

    std::vector<size_t> stride(gd_);
    stride[gd_ - 1] = 1;
    for (int k = gd_ - 2; k >= 0; --k) {
        stride[k] = stride[k + 1] * static_cast<size_t>(box_);
    }

    double moved_total = 0.0;
    double overflow_inc = 0.0;

    std::vector<long long> lo(gd_), hi(gd_), pos(gd_);
    for (const auto& a : law_->gap_atoms()) {
        long long dyflat = 0;
        bool empty = false;
        for (int k = 0; k < gd_; ++k) {
            // destination value must stay in [1, box]: cell in [-dy, box-1-dy]
            lo[k] = std::max(act_lo_[k], -a.dy[k]);
            hi[k] = std::min(act_hi_[k], box_ - 1 - a.dy[k]);
            if (lo[k] > hi[k]) empty = true;
            dyflat += a.dy[k] * static_cast<long long>(stride[k]);
        }
        if (!empty) {
            // shift-and-add over the source sub-box, inner axis contiguous
            for (int k = 0; k < gd_; ++k) pos[k] = lo[k];
            while (true) {
                size_t base = 0;
                for (int k = 0; k + 1 < gd_; ++k) {
                    base += static_cast<size_t>(pos[k]) * stride[k];
                }
                const long long i0 = lo[gd_ - 1], i1 = hi[gd_ - 1];
                const double* src = cur_.data() + base + static_cast<size_t>(i0);
                double* dst = nxt_.data() + base + static_cast<size_t>(i0) + dyflat;
                double seg = 0.0;
                for (long long i = 0; i <= i1 - i0; ++i) {
                    const double m = a.p * src[i];
                    dst[i] += m;
                    seg += m;
                }
                moved_total += seg;
                int ax = gd_ - 2;
                while (ax >= 0 && ++pos[ax] > hi[ax]) {
                    pos[ax] = lo[ax];
                    --ax;
                }
                if (ax < 0) break;
            }
        }
        // mass stepping over the top in axis j while staying >= 1 everywhere:
        // counted as overflow (corner cells that also drop below zero in a
        // different axis are double-counted into absorbed's complement, which
        // only widens the bracket)
        for (int j = 0; j < gd_; ++j) {
            if (a.dy[j] <= 0) continue;
            std::vector<long long> slo(gd_), shi(gd_);
            bool sempty = false;
            for (int k = 0; k < gd_; ++k) {
                slo[k] = std::max(act_lo_[k], -a.dy[k]);
                shi[k] = act_hi_[k];
                if (k == j) slo[k] = std::max(slo[k], box_ - a.dy[k]);
                if (slo[k] > shi[k]) sempty = true;
            }
            if (sempty) continue;
            for (int k = 0; k < gd_; ++k) pos[k] = slo[k];
            while (true) {
                size_t base = 0;
                for (int k = 0; k + 1 < gd_; ++k) {
                    base += static_cast<size_t>(pos[k]) * stride[k];
                }
                const double* src = cur_.data() + base + static_cast<size_t>(slo[gd_ - 1]);
                double seg = 0.0;
                for (long long i = 0; i <= shi[gd_ - 1] - slo[gd_ - 1]; ++i) seg += src[i];
                overflow_inc += a.p * seg;
                int ax = gd_ - 2;
                while (ax >= 0 && ++pos[ax] > shi[ax]) {
                    pos[ax] = slo[ax];
                    --ax;
                }
                if (ax < 0) break;
            }
        }
    }

    cur_.swap(nxt_);
    in_box_ = moved_total;
    overflow_ += overflow_inc;
    absorbed_ += std::max(before - moved_total - overflow_inc, 0.0);

    long long reach = 0;
    for (long long r : law_->gap_reach()) reach = std::max(reach, r);
    for (int k = 0; k < gd_; ++k) {
        act_lo_[k] = std::max<long long>(0, act_lo_[k] - reach);
        act_hi_[k] = std::min<long long>(box_ - 1, act_hi_[k] + reach);
    }
}

void SurvivalDp::step() {
    if (n_ == 0) {
        first_step();
    } else {
        array_step();
    }
    ++n_;
}

SurvivalResult dp_survival(const StepLaw& law, const std::vector<long long>& y0,
                           long long n, long long box) {
    if (n < 0) throw std::invalid_argument("survival horizon must be >= 0");
    long long b = box > 0 ? box : auto_box(law, y0, n);
    for (int round = 0;; ++round) {
        SurvivalDp dp(law, y0, b);
        for (long long i = 0; i < n; ++i) dp.step();
        SurvivalResult r;
        r.lower = dp.lower();
        r.upper = dp.upper();
        r.overflow_mass = dp.overflow();
        r.absorbed_mass = dp.absorbed();
        r.box = b;
        r.n = n;
        const bool tight = r.overflow_mass <= kOverflowTarget * std::max(r.lower, 1e-300);
        if (box > 0 || tight || round >= 3) return r;
        b *= 2;
    }
}

std::vector<SurvivalPoint> dp_survival_curve(const StepLaw& law,
                                             const std::vector<long long>& y0,
                                             const std::vector<long long>& grid,
                                             long long box) {
    if (grid.empty()) return {};
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if (grid[i] >= grid[i + 1]) throw std::invalid_argument("survival grid must be increasing");
    }
    if (grid.front() < 0) throw std::invalid_argument("survival grid must be nonnegative");
    const long long b = box > 0 ? box : auto_box(law, y0, grid.back());
    SurvivalDp dp(law, y0, b);
    std::vector<SurvivalPoint> out;
    out.reserve(grid.size());
    for (long long target : grid) {
        while (dp.n() < target) dp.step();
        out.push_back({target, dp.lower(), dp.upper()});
    }
    return out;
}

DiscountedSurvival discounted_survival_sum(const StepLaw& law,
                                           const std::vector<long long>& y, double c,
                                           long long n_max, long long box) {
    if (!(c > 0.0)) throw std::invalid_argument("killing rate must be > 0");
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const long long b = box > 0 ? box : auto_box(law, y, n_max);
    SurvivalDp dp(law, y, b);
    const double q = std::exp(-c);
    double w = 1.0;
    DiscountedSurvival out;
    for (long long n = 0;; ++n) {
        out.lower += w * dp.lower();
        out.upper += w * dp.upper();
        if (n == n_max) {
            out.upper += w * q / (1.0 - q) * dp.upper();
            return out;
        }
        dp.step();
        w *= q;
    }
}

HcOracle dp_h_c(const StepLaw& law, const std::vector<long long>& y, double c,
                long long n_max, long long box) {
    std::vector<long long> origin(law.gap_dimension(), 0);
    long long smax = 0;
    for (long long v : y) smax = std::max(smax, v);
    const long long b =
        box > 0 ? box : auto_box(law, std::vector<long long>(y.size(), smax), n_max);
    const DiscountedSurvival num = discounted_survival_sum(law, y, c, n_max, b);
    const DiscountedSurvival den = discounted_survival_sum(law, origin, c, n_max, b);
    HcOracle out;
    out.lower = num.lower / den.upper;
    out.upper = num.upper / std::max(den.lower, 1e-300);
    out.value = 0.5 * (out.lower + out.upper);
    out.tail_bound = std::pow(std::exp(-c), static_cast<double>(n_max)) / (1.0 - std::exp(-c));
    out.n_max = n_max;
    out.box = b;
    return out;
}

double vandermonde(const std::vector<double>& x) {
    double prod = 1.0;
    for (size_t i = 0; i < x.size(); ++i) {
        for (size_t j = i + 1; j < x.size(); ++j) prod *= x[j] - x[i];
    }
    return prod;
}

double det_vandermonde(const std::vector<double>& x) {
    const size_t d = x.size();
    std::vector<double> a(d * d);
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = 0; j < d; ++j) a[i * d + j] = std::pow(x[j], static_cast<double>(i));
    }
    double det = 1.0;
    for (size_t col = 0; col < d; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < d; ++r) {
            if (std::abs(a[r * d + col]) > std::abs(a[piv * d + col])) piv = r;
        }
        if (a[piv * d + col] == 0.0) return 0.0;
        if (piv != col) {
            for (size_t j = 0; j < d; ++j) std::swap(a[piv * d + j], a[col * d + j]);
            det = -det;
        }
        det *= a[col * d + col];
        for (size_t r = col + 1; r < d; ++r) {
            const double f = a[r * d + col] / a[col * d + col];
            for (size_t j = col; j < d; ++j) a[r * d + j] -= f * a[col * d + j];
        }
    }
    return det;
}

double km_ordered_probability(const StepLaw& law, const std::vector<long long>& start,
                              long long n) {
    const auto& pmf = law.component_pmf();
    const int d = law.dimension();
    if (static_cast<int>(start.size()) != d) {
        throw std::invalid_argument("start dimension mismatch");
    }
    for (int k = 0; k + 1 < d; ++k) {
        if (start[k] >= start[k + 1]) {
            throw std::invalid_argument("start must be strictly increasing");
        }
    }
    if (n < 0) throw std::invalid_argument("horizon must be >= 0");
    if (n == 0) return 1.0;

    long long r = 0;
    for (const auto& [dx, p] : pmf) {
        (void)p;
        r = std::max(r, std::llabs(dx));
    }
    // n-fold convolution of the component pmf, offset representation
    const long long half = r * n;
    std::vector<double> conv(2 * half + 1, 0.0);
    conv[half] = 1.0;
    std::vector<double> tmp(conv.size());
    for (long long step = 0; step < n; ++step) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (long long i = 0; i < static_cast<long long>(conv.size()); ++i) {
            if (conv[i] == 0.0) continue;
            for (const auto& [dx, p] : pmf) {
                const long long j = i + dx;
                if (j >= 0 && j < static_cast<long long>(tmp.size())) tmp[j] += conv[i] * p;
            }
        }
        conv.swap(tmp);
    }
    auto q = [&](long long from, long long to) -> double {
        const long long off = to - from + half;
        if (off < 0 || off >= static_cast<long long>(conv.size())) return 0.0;
        return conv[off];
    };

    const long long jlo = *std::min_element(start.begin(), start.end()) - half;
    const long long jhi = *std::max_element(start.begin(), start.end()) + half;
    const long long width = jhi - jlo + 1;

    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end());
    double total = 0.0;
    std::vector<double> layer(width), next(width);
    do {
        int inversions = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                if (perm[i] > perm[j]) ++inversions;
            }
        }
        const double sgn = (inversions % 2 == 0) ? 1.0 : -1.0;
        // ordered sum of prod_l q(start[perm[l]] -> j_l) over j_1 < ... < j_d
        for (long long j = 0; j < width; ++j) layer[j] = q(start[perm[0]], jlo + j);
        for (int l = 1; l < d; ++l) {
            double prefix = 0.0;
            for (long long j = 0; j < width; ++j) {
                next[j] = q(start[perm[l]], jlo + j) * prefix;
                prefix += layer[j];
            }
            layer.swap(next);
        }
        double s = 0.0;
        for (double v : layer) s += v;
        total += sgn * s;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

namespace {

// Expected future indicator count of the deficit chain before the joint
// ascent, solved on the box [0, L]^(d-1) with out-of-box states coupled to
// the running maximum of the solution (a sound over-estimate because any
// outside trajectory re-enters the box before contributing).
struct DeficitBound {
    std::vector<double> g;
    double g_out = 0.0;
    long long box = 0;
    bool converged = false;
};

DeficitBound solve_deficit_bound(const StepLaw& law, const std::vector<long long>& y,
                                 long long L) {
    const int gd = law.gap_dimension();
    const auto& atoms = law.gap_atoms();
    size_t cells = 1;
    for (int k = 0; k < gd; ++k) cells *= static_cast<size_t>(L + 1);
    if (cells > 4000000) throw std::invalid_argument("deficit bound box too large");

    std::vector<size_t> stride(gd);
    stride[gd - 1] = 1;
    for (int k = gd - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<size_t>(L + 1);

    // Per state: base term, in-box transitions, out-of-box mass.
    struct Row {
        double b = 0.0;
        double pout = 0.0;
        std::vector<std::pair<size_t, double>> in;
    };
    std::vector<Row> rows(cells);
    std::vector<long long> s(gd, 0);
    for (size_t idx = 0; idx < cells; ++idx) {
        Row& row = rows[idx];
        for (const auto& a : atoms) {
            bool fire = true, out = false, ind = true;
            size_t tgt = 0;
            for (int k = 0; k < gd; ++k) {
                const long long z = s[k] - a.dy[k];
                if (z >= 0) fire = false;
                if (z >= y[k]) ind = false;
                const long long zp = std::max<long long>(z, 0);
                if (zp > L) out = true;
                tgt = tgt * static_cast<size_t>(L + 1) +
                      static_cast<size_t>(std::min<long long>(zp, L));
            }
            if (fire) continue;
            if (ind) row.b += a.p;
            if (out) {
                row.pout += a.p;
            } else {
                row.in.emplace_back(tgt, a.p);
            }
        }
        int ax = gd - 1;
        while (ax >= 0 && ++s[ax] > L) {
            s[ax] = 0;
            --ax;
        }
    }

    DeficitBound out;
    out.box = L;
    out.g.assign(cells, 0.0);
    double g_out = 0.0;
    for (int outer = 0; outer < 200; ++outer) {
        // Gauss-Seidel on g = b + P_in g + pout * g_out
        double gmax = 0.0;
        for (int sweep = 0; sweep < 200000; ++sweep) {
            double delta = 0.0;
            gmax = 0.0;
            for (size_t i = 0; i < cells; ++i) {
                double v = rows[i].b + rows[i].pout * g_out;
                for (const auto& [j, p] : rows[i].in) v += p * out.g[j];
                delta = std::max(delta, std::abs(v - out.g[i]));
                out.g[i] = v;
                gmax = std::max(gmax, v);
            }
            if (delta <= 1e-13 * (1.0 + gmax)) break;
            if (sweep == 199999) return out;  // converged stays false
        }
        if (gmax > 1e12) return out;  // diverging coupling, no finite bound
        if (std::abs(gmax - g_out) <= 1e-10 * (1.0 + gmax)) {
            out.g_out = gmax;
            out.converged = true;
            return out;
        }
        g_out = gmax;
    }
    return out;
}

}  // namespace

ExcursionBrackets brute_force_h_excursion(const StepLaw& law,
                                          const std::vector<long long>& y, long long depth) {
    require_lattice(law, "excursion enumeration");
    const int gd = law.gap_dimension();
    if (static_cast<int>(y.size()) != gd) throw std::invalid_argument("probe dimension mismatch");
    for (long long v : y) {
        if (v < 0) throw std::invalid_argument("probe must be nonnegative");
    }
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");

    const auto& atoms = law.gap_atoms();
    std::vector<Rational> ap;
    ap.reserve(atoms.size());
    for (const auto& a : atoms) ap.push_back(rational_from_double(a.p));

    // level sets of the deficit chain D_n = running max - current position
    std::map<std::vector<long long>, Rational> level;
    level[std::vector<long long>(gd, 0)] = Rational(1);
    Rational counted(0);
    double work = 0.0;
    for (long long n = 1; n <= depth; ++n) {
        std::map<std::vector<long long>, Rational> next;
        work += static_cast<double>(level.size()) * static_cast<double>(atoms.size());
        if (work > 1e8) throw std::invalid_argument("enumeration budget exceeded");
        for (const auto& [dstate, mass] : level) {
            for (size_t ai = 0; ai < atoms.size(); ++ai) {
                bool fire = true, ind = true;
                std::vector<long long> nd(gd);
                for (int k = 0; k < gd; ++k) {
                    const long long z = dstate[k] - atoms[ai].dy[k];
                    if (z >= 0) fire = false;
                    if (z >= y[k]) ind = false;
                    nd[k] = std::max<long long>(z, 0);
                }
                if (fire) continue;
                const Rational m = mass * ap[ai];
                if (ind) counted += m;
                next[std::move(nd)] += m;
            }
        }
        level.swap(next);
    }

    ExcursionBrackets out;
    out.depth = depth;
    const Rational total = Rational(1) + counted;
    out.lower = static_cast<double>(total);
    {
        std::ostringstream os;
        os << total;
        out.lower_exact = os.str();
    }
    Rational alive(0);
    for (const auto& [dstate, mass] : level) {
        (void)dstate;
        alive += mass;
    }
    out.alive_mass = static_cast<double>(alive);
    if (out.alive_mass == 0.0) {
        out.upper = out.lower;
        out.bound_converged = true;
        return out;
    }

    long long ymax = 0;
    for (long long v : y) ymax = std::max(ymax, v);
    long long reach = 0;
    for (long long r : law.gap_reach()) reach = std::max(reach, r);
    const long long L = ymax + 4 * reach + 8;
    DeficitBound bound = solve_deficit_bound(law, y, L);
    out.bound_converged = bound.converged;
    if (!bound.converged) {
        out.upper = std::numeric_limits<double>::infinity();
        return out;
    }
    double rest = 0.0;
    for (const auto& [dstate, mass] : level) {
        bool in = true;
        size_t idx = 0;
        for (int k = 0; k < gd; ++k) {
            if (dstate[k] > L) in = false;
            idx = idx * static_cast<size_t>(L + 1) +
                  static_cast<size_t>(std::min<long long>(dstate[k], L));
        }
        const double g = in ? bound.g[idx] : bound.g_out;
        rest += static_cast<double>(mass) * g;
    }
    out.upper = out.lower + rest * (1.0 + 1e-9) + 1e-12;
    return out;
}

DualityPair enumerate_duality(const StepLaw& law, const std::vector<long long>& y,
                              long long n) {
    require_lattice(law, "duality enumeration");
    const int gd = law.gap_dimension();
    if (static_cast<int>(y.size()) != gd) throw std::invalid_argument("probe dimension mismatch");
    if (n < 1) throw std::invalid_argument("horizon must be >= 1");
    const auto& atoms = law.gap_atoms();
    double paths = 1.0;
    for (long long i = 0; i < n; ++i) paths *= static_cast<double>(atoms.size());
    if (paths > 2e7) throw std::invalid_argument("enumeration budget exceeded");

    DualityPair out;
    std::vector<long long> pos(gd, 0), runmin(gd, 0), prevmax(gd, 0);
    // depth-first over atom sequences; prevmax tracks max over steps 0..l-1
    struct Frame {
        std::vector<long long> pos, runmin, prevmax;
        size_t next_atom = 0;
    };
    std::vector<Frame> stack;
    stack.push_back({pos, runmin, prevmax, 0});
    std::vector<double> probs;
    probs.push_back(1.0);
    while (!stack.empty()) {
        Frame& f = stack.back();
        const long long lvl = static_cast<long long>(stack.size()) - 1;
        if (lvl == n) {
            bool left = true, right = true;
            for (int k = 0; k < gd; ++k) {
                if (!(f.runmin[k] > -y[k])) left = false;
                if (!(f.prevmax[k] - f.pos[k] < y[k])) right = false;
            }
            if (left) out.left += probs.back();
            if (right) out.right += probs.back();
            stack.pop_back();
            probs.pop_back();
            continue;
        }
        if (f.next_atom == atoms.size()) {
            stack.pop_back();
            probs.pop_back();
            continue;
        }
        const auto& a = atoms[f.next_atom++];
        Frame child;
        child.pos.resize(gd);
        child.runmin.resize(gd);
        child.prevmax.resize(gd);
        for (int k = 0; k < gd; ++k) {
            child.prevmax[k] = std::max(f.prevmax[k], f.pos[k]);
            child.pos[k] = f.pos[k] + a.dy[k];
            child.runmin[k] = (lvl == 0) ? child.pos[k] : std::min(f.runmin[k], child.pos[k]);
        }
        // prevmax for the first step is the start itself
        if (lvl == 0) {
            for (int k = 0; k < gd; ++k) child.prevmax[k] = 0;
        }
        probs.push_back(probs.back() * a.p);
        stack.push_back(std::move(child));
    }
    return out;
}

ExitTimeBounds dp_expected_exit_time(const StepLaw& law, const std::vector<long long>& y0,
                                     long long n_max, long long box) {
    if (n_max < 16) throw std::invalid_argument("n_max must be >= 16");
    const long long b = box > 0 ? box : auto_box(law, y0, n_max);
    SurvivalDp dp(law, y0, b);
    double partial = 0.0;
    std::vector<double> log_n, log_p;
    for (long long n = 0; n <= n_max; ++n) {
        if (n > 0) dp.step();
        partial += dp.lower();
        if (n >= n_max / 2 && dp.lower() > 0.0) {
            log_n.push_back(std::log(static_cast<double>(n)));
            log_p.push_back(std::log(dp.lower()));
        }
    }
    ExitTimeBounds out;
    out.partial = partial;
    out.n_max = n_max;
    // power-law fit over the final stretch gives the tail correction
    if (log_n.size() >= 8) {
        const size_t m = log_n.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < m; ++i) {
            sx += log_n[i];
            sy += log_p[i];
            sxx += log_n[i] * log_n[i];
            sxy += log_n[i] * log_p[i];
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double inter = (sy - slope * sx) / m;
        if (slope < -1.0) {
            const double p = -slope;
            const double amp = std::exp(inter);
            out.tail_estimate =
                amp * std::pow(static_cast<double>(n_max), 1.0 - p) / (p - 1.0);
        } else {
            out.tail_estimate = std::numeric_limits<double>::infinity();
        }
    }
    out.value = out.partial + out.tail_estimate;
    return out;
}

}  // namespace orw
