#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orw/step_law.hpp"

namespace orw {

// Mass accounting for the gap-coordinate survival recursion on the box
// [1, box]^(d-1).  Mass that would step over the top of the box is tracked
// separately: treating it as surviving gives the upper value, treating it as
// exited gives the lower one.
struct SurvivalResult {
    double lower = 0.0;
    double upper = 0.0;
    double overflow_mass = 0.0;
    double absorbed_mass = 0.0;
    long long box = 0;
    long long n = 0;
};

// One row of a survival curve at a requested step index.
struct SurvivalPoint {
    long long n = 0;
    double lower = 0.0;
    double upper = 0.0;
};

// In-place stepper for the survival recursion; survival(0) = 1 regardless of
// the start point (the exit clock only looks at steps >= 1).
class SurvivalDp {
  public:
    SurvivalDp(const StepLaw& law, const std::vector<long long>& start, long long box);
    void step();
    long long n() const { return n_; }
    double in_box() const { return n_ == 0 ? 1.0 : in_box_; }
    double overflow() const { return overflow_; }
    double absorbed() const { return absorbed_; }
    double lower() const { return in_box(); }
    double upper() const { return in_box() + overflow_; }
    double mass_defect() const;  // |in_box + overflow + absorbed - 1|
    long long box() const { return box_; }

  private:
    void first_step();
    void array_step();

    const StepLaw* law_;
    std::vector<long long> start_;
    int gd_;
    long long box_;
    long long n_ = 0;
    double in_box_ = 1.0;
    double overflow_ = 0.0;
    double absorbed_ = 0.0;
    std::vector<double> cur_, nxt_;
    // active per-axis range [lo, hi] of occupied cells, 0-based
    std::vector<long long> act_lo_, act_hi_;
};

// P(exit time > n) from gap start y0, with automatic box sizing when box = 0
// (doubling until overflow < 1e-12 * surviving mass, a few rounds).
SurvivalResult dp_survival(const StepLaw& law, const std::vector<long long>& y0,
                           long long n, long long box = 0);

// Survival curve sampled at the given step indices (ascending).
std::vector<SurvivalPoint> dp_survival_curve(const StepLaw& law,
                                             const std::vector<long long>& y0,
                                             const std::vector<long long>& grid,
                                             long long box = 0);

// Discounted-ratio value of the harmonic candidate at rate c,
//
//   h_c(y) = sum_{n>=0} e^{-cn} P_y(tau > n) / sum_{n>=0} e^{-cn} P_0(tau > n),
//
// evaluated by two survival recursions cut at n_max.  The geometric tail and
// the box overflow are folded into [lower, upper]; `tail_bound` reports the
// worst-case cut term e^{-c n_max} / (1 - e^{-c}).
struct HcOracle {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double tail_bound = 0.0;
    long long n_max = 0;
    long long box = 0;
};

HcOracle dp_h_c(const StepLaw& law, const std::vector<long long>& y, double c,
                long long n_max = 2000, long long box = 0);

// One discounted survival sum sum_{n>=0} e^{-cn} P_y(tau > n), bracketed by
// box overflow and the geometric tail.
struct DiscountedSurvival {
    double lower = 0.0;
    double upper = 0.0;
};

DiscountedSurvival discounted_survival_sum(const StepLaw& law,
                                           const std::vector<long long>& y, double c,
                                           long long n_max = 4000, long long box = 0);

// Exact enumeration of the ascent-excursion sum
//
//   h(y) = 1 + E sum_{n=1}^{J-1} 1{ running-max deficit at n < y }
//
// over paths of at most `depth` steps, with exact rational path weights.
// `lower` counts the terms realised within the horizon; `upper` adds, for
// each path still alive at the horizon, a certified bound on its remaining
// expected count (computed from the deficit-chain linear system).
struct ExcursionBrackets {
    double lower = 0.0;
    double upper = 0.0;
    std::string lower_exact;  // rational literal of the enumerated part
    double alive_mass = 0.0;
    long long depth = 0;
    bool bound_converged = true;
};

ExcursionBrackets brute_force_h_excursion(const StepLaw& law,
                                          const std::vector<long long>& y, long long depth);

// Product form of the alternant; det_vandermonde evaluates the moment
// determinant det(x_j^{i-1}) for cross-checking.
double vandermonde(const std::vector<double>& x);
double det_vandermonde(const std::vector<double>& x);

// P(components stay strictly ordered through step n) for a walk whose d
// components are i.i.d. copies of the given unidimensional pmf, started at
// the strictly increasing integer vector `start`; evaluated with the
// ordered-endpoint determinant formula.  Reflection cancellation assumes an
// order swap forces a collision; for +-1 components that holds only when all
// starting gaps are even (from odd gaps walkers can trade places between
// observation times without sharing a site, and the determinant undercounts).
double km_ordered_probability(const StepLaw& law, const std::vector<long long>& start,
                              long long n);

// Exact path enumeration of both sides of the reversal identity at step n:
//   left  = P(all components of the running minimum over 1..n are > -y)
//   right = P(running-max deficit at n is < y componentwise)
// Both from the origin.  For lattice laws and small n.
struct DualityPair {
    double left = 0.0;
    double right = 0.0;
};

DualityPair enumerate_duality(const StepLaw& law, const std::vector<long long>& y,
                              long long n);

// Mean exit time from gap start y0: 1 + sum_{n>=1} P(tau > n) cut at n_max,
// plus a tail estimate fitted from the final decade of the survival curve.
struct ExitTimeBounds {
    double partial = 0.0;    // exact lower bound (box-lower survival sums)
    double tail_estimate = 0.0;
    double value = 0.0;      // partial + tail_estimate
    long long n_max = 0;
};

ExitTimeBounds dp_expected_exit_time(const StepLaw& law, const std::vector<long long>& y0,
                                     long long n_max, long long box = 0);

}  // namespace orw
