#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orw/rng.hpp"

#include <json.hpp>

namespace orw {

// One lattice increment of the d-dimensional walk.
struct LatticeAtom {
    std::vector<long long> dx;
    double p = 0.0;
};

// One increment of the gap process (adjacent differences), aggregated over
// walk atoms that yield the same gap move.
struct GapAtom {
    std::vector<long long> dy;
    double p = 0.0;
};

enum class LawKind { LatticePmf, GaussianIid, ComponentTable };

std::string law_kind_name(LawKind k);

// Which integrability condition the law satisfies for the ascent-excursion
// representation.  All flags can be false; estimators then warn and report
// censoring instead of refusing to run.
struct FinitenessScreen {
    bool some_gap_drift_negative = false;
    bool all_gap_drifts_positive = false;
    bool joint_positive_step = false;
    bool any() const {
        return some_gap_drift_negative || all_gap_drifts_positive || joint_positive_step;
    }
    std::string describe() const;
};

// Step distribution of the walk plus everything derived from it that the
// samplers and oracles need: the convolved gap law, drift vectors and the
// sign/degeneracy checks.
class StepLaw {
  public:
    static StepLaw lattice(int d, std::vector<LatticeAtom> atoms);
    static StepLaw component_table(
        const std::vector<std::vector<std::pair<long long, double>>>& per_component);
    static StepLaw gaussian_iid(int d, std::vector<double> means, double sigma);
    static StepLaw from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    int dimension() const { return d_; }
    int gap_dimension() const { return d_ - 1; }
    LawKind kind() const { return kind_; }
    bool is_lattice() const { return kind_ != LawKind::GaussianIid; }

    const std::vector<LatticeAtom>& atoms() const { return atoms_; }
    const std::vector<GapAtom>& gap_atoms() const { return gap_atoms_; }
    const std::vector<double>& drift() const { return drift_; }
    const std::vector<double>& gap_drift() const { return gap_drift_; }
    const FinitenessScreen& finiteness() const { return screen_; }
    std::uint64_t seed_base() const { return seed_base_; }

    // Component pmf for laws built from i.i.d. components; throws otherwise.
    // Used by the ordered-determinant oracle, which is only valid there.
    const std::vector<std::pair<long long, double>>& component_pmf() const;
    bool has_iid_components() const { return !component_pmf_.empty(); }

    // Draws one gap increment into out[0..gap_dimension).
    void sample_gap_step(RngStream& rng, double* out) const;

    // Draws one walk increment into out[0..dimension).
    void sample_walk_step(RngStream& rng, double* out) const;

    // Largest |dy| over gap atoms, per component (lattice only).
    const std::vector<long long>& gap_reach() const { return gap_reach_; }

  private:
    StepLaw() = default;
    void finalize();

    int d_ = 0;
    LawKind kind_ = LawKind::LatticePmf;
    std::vector<LatticeAtom> atoms_;
    std::vector<GapAtom> gap_atoms_;
    std::vector<double> drift_;
    std::vector<double> gap_drift_;
    std::vector<long long> gap_reach_;
    std::vector<std::vector<std::pair<long long, double>>> component_table_;
    std::vector<std::pair<long long, double>> component_pmf_;
    std::vector<double> gauss_means_;
    double gauss_sigma_ = 1.0;
    FinitenessScreen screen_;
    std::uint64_t seed_base_ = 0;

    // Flattened sampler tables.
    std::vector<double> cum_;
    std::vector<double> dy_flat_;
    std::vector<double> wcum_;
    std::vector<double> dx_flat_;
};

}  // namespace orw
