#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orw/rng.hpp"
#include "orw/step_law.hpp"

namespace orw {

// Tabulated harmonic candidate on integer gap vectors, with per-point
// standard errors (zero for exact tables) and a provenance label.
class HFunction {
  public:
    HFunction(int gap_dim, std::string provenance);
    void set(const std::vector<long long>& y, double value, double std_error);
    bool contains(const std::vector<long long>& y) const;
    double value_at(const std::vector<long long>& y) const;
    double sigma_at(const std::vector<long long>& y) const;
    int gap_dimension() const { return gap_dim_; }
    const std::string& provenance() const { return provenance_; }
    size_t size() const { return table_.size(); }
    const std::map<std::vector<long long>, std::pair<double, double>>& table() const {
        return table_;
    }

  private:
    int gap_dim_;
    std::string provenance_;
    std::map<std::vector<long long>, std::pair<double, double>> table_;
};

// Exact table h(0) = 1, h(y) = 2y on even gaps for the {-2:1/4, 0:1/2, +2:1/4}
// gap walk; harmonic on the strict chamber including the boundary point y = 2.
HFunction exact_h_table_pm2_walk(long long max_gap);

// Monte Carlo table of the excursion sum over all integer probes in
// [1, box]^(d-1), built from one batch of shared paths (each path's deficit
// sequence is bucketed once and serves every probe), with per-probe standard
// errors from per-path counts.
HFunction mc_h_table_excursion(const StepLaw& law, long long box, long long replicas,
                               long long truncation, std::uint64_t seed);

// One h-transform move from chamber state w.  Returns the next state, or
// nullopt when the sub-stochastic deficit kills the chain.  The enumerated
// row mass is written to row_mass when given; masses beyond 1 + 1e-6 raise,
// smaller overshoots are clamped and counted in clamp_events.
struct HTransformDiag {
    double row_mass = 0.0;
    long long clamp_events = 0;
};

std::optional<std::vector<long long>> h_transform_step(const StepLaw& law,
                                                       const HFunction& h,
                                                       const std::vector<long long>& w,
                                                       RngStream& rng,
                                                       HTransformDiag* diag = nullptr);

// One-step harmonicity residual at gap point y:
//   E_y[h(Y_1); tau > 1] - h(y)
// with the standard error propagated from the table's noise.
struct Residual {
    double value = 0.0;
    double sigma = 0.0;
};

Residual harmonicity_residual(const StepLaw& law, const HFunction& h,
                              const std::vector<long long>& y);

// Path of the walk in chamber coordinates.
struct ConditionedPath {
    std::vector<std::vector<long long>> states;  // states[0] = x0, length T+1 when accepted
    long long killed_at = -1;                    // h-transform mode only
    std::string mode;
    long long attempts = 0;
};

// Rejection sampler of the geometric-killing conditioning: draws (path, N)
// until the path stays ordered through N and N >= T, then returns the first
// accepted path restricted to [0, T].  Throws after max_attempts with the
// observed acceptance rate in the message.
ConditionedPath sample_conditioned_geometric(const StepLaw& law,
                                             const std::vector<long long>& x0, double c,
                                             long long T, RngStream& rng,
                                             long long max_attempts = 1000000);

// h-transform path of length T from x0 (may be shorter if killed).
ConditionedPath sample_h_transform_path(const StepLaw& law, const HFunction& h,
                                        const std::vector<long long>& x0, long long T,
                                        RngStream& rng);

// Exact distributions over length-T ordered lattice paths, keyed by the
// flattened state sequence, for small T.  The geometric version weights each
// surviving path by the discounted survival sum of its endpoint gap,
// matching what the rejection sampler accepts.
std::map<std::vector<long long>, double> path_law_h_chain(const StepLaw& law,
                                                          const HFunction& h,
                                                          const std::vector<long long>& x0,
                                                          long long T);

std::map<std::vector<long long>, double> path_law_geometric(const StepLaw& law,
                                                            const std::vector<long long>& x0,
                                                            double c, long long T,
                                                            long long n_max = 4000);

// Total variation distance between two distributions on the same key space.
double total_variation(const std::map<std::vector<long long>, double>& a,
                       const std::map<std::vector<long long>, double>& b);

}  // namespace orw
