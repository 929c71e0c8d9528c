#include "orw/step_law.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace orw {

namespace {

constexpr double kPmfTol = 1e-12;

void check_dimension(int d) {
    if (d < 2) throw std::invalid_argument("dimension must be >= 2");
}

}  // namespace

std::string law_kind_name(LawKind k) {
    switch (k) {
        case LawKind::LatticePmf: return "lattice-pmf";
        case LawKind::GaussianIid: return "gaussian-iid";
        case LawKind::ComponentTable: return "component-table";
    }
    return "?";
}

std::string FinitenessScreen::describe() const {
    if (some_gap_drift_negative) return "some gap component has negative drift";
    if (all_gap_drifts_positive) return "every gap component has positive drift";
    if (joint_positive_step) return "a jointly positive gap step has positive probability";
    return "no finiteness condition verified";
}

StepLaw StepLaw::lattice(int d, std::vector<LatticeAtom> atoms) {
    check_dimension(d);
    if (atoms.empty()) throw std::invalid_argument("step law needs at least one atom");
    StepLaw law;
    law.d_ = d;
    law.kind_ = LawKind::LatticePmf;
    law.atoms_ = std::move(atoms);
    for (const auto& a : law.atoms_) {
        if (static_cast<int>(a.dx.size()) != d)
            throw std::invalid_argument("atom dimension mismatch");
        if (a.p < 0.0) throw std::invalid_argument("atom probability must be >= 0");
    }
    law.finalize();
    return law;
}

StepLaw StepLaw::component_table(
    const std::vector<std::vector<std::pair<long long, double>>>& per_component) {
    int d = static_cast<int>(per_component.size());
    check_dimension(d);
    std::vector<LatticeAtom> joint;
    joint.push_back({std::vector<long long>{}, 1.0});
    for (const auto& pmf : per_component) {
        if (pmf.empty()) throw std::invalid_argument("empty component pmf");
        double s = 0.0;
        for (const auto& [v, p] : pmf) {
            (void)v;
            if (p < 0.0) throw std::invalid_argument("atom probability must be >= 0");
            s += p;
        }
        if (std::fabs(s - 1.0) > kPmfTol)
            throw std::invalid_argument("step law pmf does not sum to 1");
        std::vector<LatticeAtom> next;
        next.reserve(joint.size() * pmf.size());
        for (const auto& base : joint)
            for (const auto& [v, p] : pmf) {
                LatticeAtom a = base;
                a.dx.push_back(v);
                a.p *= p;
                next.push_back(std::move(a));
            }
        joint = std::move(next);
    }
    StepLaw law;
    law.d_ = d;
    law.kind_ = LawKind::ComponentTable;
    law.atoms_ = std::move(joint);
    law.component_table_ = per_component;
    bool identical = true;
    for (const auto& pmf : per_component)
        if (pmf != per_component.front()) identical = false;
    if (identical) law.component_pmf_ = per_component.front();
    law.finalize();
    return law;
}

StepLaw StepLaw::gaussian_iid(int d, std::vector<double> means, double sigma) {
    check_dimension(d);
    if (means.empty()) means.assign(d, 0.0);
    if (static_cast<int>(means.size()) != d)
        throw std::invalid_argument("means dimension mismatch");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    StepLaw law;
    law.d_ = d;
    law.kind_ = LawKind::GaussianIid;
    law.gauss_means_ = std::move(means);
    law.gauss_sigma_ = sigma;
    law.finalize();
    return law;
}

void StepLaw::finalize() {
    const int gd = d_ - 1;
    if (kind_ == LawKind::GaussianIid) {
        drift_ = gauss_means_;
        gap_drift_.resize(gd);
        for (int k = 0; k < gd; ++k) gap_drift_[k] = gauss_means_[k + 1] - gauss_means_[k];
    } else {
        double total = 0.0;
        for (const auto& a : atoms_) total += a.p;
        if (std::fabs(total - 1.0) > kPmfTol)
            throw std::invalid_argument("step law pmf does not sum to 1");

        drift_.assign(d_, 0.0);
        for (const auto& a : atoms_)
            for (int i = 0; i < d_; ++i) drift_[i] += a.p * static_cast<double>(a.dx[i]);

        std::map<std::vector<long long>, double> agg;
        for (const auto& a : atoms_) {
            if (a.p == 0.0) continue;
            std::vector<long long> dy(gd);
            for (int k = 0; k < gd; ++k) dy[k] = a.dx[k + 1] - a.dx[k];
            agg[dy] += a.p;
        }
        gap_atoms_.clear();
        for (auto& [dy, p] : agg) gap_atoms_.push_back({dy, p});

        gap_drift_.assign(gd, 0.0);
        gap_reach_.assign(gd, 0);
        std::vector<bool> has_pos(gd, false), has_neg(gd, false);
        for (const auto& g : gap_atoms_)
            for (int k = 0; k < gd; ++k) {
                gap_drift_[k] += g.p * static_cast<double>(g.dy[k]);
                gap_reach_[k] = std::max(gap_reach_[k], std::llabs(g.dy[k]));
                if (g.dy[k] > 0) has_pos[k] = true;
                if (g.dy[k] < 0) has_neg[k] = true;
            }
        for (int k = 0; k < gd; ++k)
            if (!has_pos[k] || !has_neg[k])
                throw std::invalid_argument("gap component degenerate at 0");

        cum_.clear();
        dy_flat_.clear();
        double run = 0.0;
        for (const auto& g : gap_atoms_) {
            run += g.p;
            cum_.push_back(run);
            for (int k = 0; k < gd; ++k) dy_flat_.push_back(static_cast<double>(g.dy[k]));
        }
        cum_.back() = 1.0 + 1e-9;

        wcum_.clear();
        dx_flat_.clear();
        run = 0.0;
        for (const auto& a : atoms_) {
            run += a.p;
            wcum_.push_back(run);
            for (int i = 0; i < d_; ++i) dx_flat_.push_back(static_cast<double>(a.dx[i]));
        }
        wcum_.back() = 1.0 + 1e-9;
    }

    screen_ = FinitenessScreen{};
    bool all_pos = true;
    for (int k = 0; k < gd; ++k) {
        if (gap_drift_[k] < -1e-12) screen_.some_gap_drift_negative = true;
        if (!(gap_drift_[k] > 1e-12)) all_pos = false;
    }
    screen_.all_gap_drifts_positive = all_pos;
    if (kind_ == LawKind::GaussianIid) {
        screen_.joint_positive_step = true;
    } else {
        for (const auto& g : gap_atoms_) {
            bool pos = g.p > 0.0;
            for (int k = 0; k < gd; ++k) pos = pos && g.dy[k] > 0;
            if (pos) screen_.joint_positive_step = true;
        }
    }
}

const std::vector<std::pair<long long, double>>& StepLaw::component_pmf() const {
    if (component_pmf_.empty())
        throw std::invalid_argument("law does not have identical independent components");
    return component_pmf_;
}

void StepLaw::sample_gap_step(RngStream& rng, double* out) const {
    const int gd = d_ - 1;
    if (kind_ == LawKind::GaussianIid) {
        double prev = gauss_means_[0] + gauss_sigma_ * rng.next_gaussian();
        for (int k = 0; k < gd; ++k) {
            double cur = gauss_means_[k + 1] + gauss_sigma_ * rng.next_gaussian();
            out[k] = cur - prev;
            prev = cur;
        }
        return;
    }
    const double u = rng.next_unit();
    std::size_t i = 0;
    while (cum_[i] <= u) ++i;
    const double* dy = &dy_flat_[i * gd];
    for (int k = 0; k < gd; ++k) out[k] = dy[k];
}

void StepLaw::sample_walk_step(RngStream& rng, double* out) const {
    if (kind_ == LawKind::GaussianIid) {
        for (int i = 0; i < d_; ++i) {
            out[i] = gauss_means_[i] + gauss_sigma_ * rng.next_gaussian();
        }
        return;
    }
    const double u = rng.next_unit();
    std::size_t i = 0;
    while (wcum_[i] <= u) ++i;
    const double* dx = &dx_flat_[i * static_cast<std::size_t>(d_)];
    for (int k = 0; k < d_; ++k) out[k] = dx[k];
}

StepLaw StepLaw::from_json(const nlohmann::json& doc) {
    if (!doc.contains("d") || !doc.contains("kind"))
        throw std::invalid_argument("law descriptor needs \"d\" and \"kind\"");
    const int d = doc.at("d").get<int>();
    const std::string kind = doc.at("kind").get<std::string>();
    StepLaw law;
    if (kind == "lattice-pmf") {
        std::vector<LatticeAtom> atoms;
        for (const auto& row : doc.at("atoms")) {
            LatticeAtom a;
            a.dx = row.at(0).get<std::vector<long long>>();
            a.p = row.at(1).get<double>();
            atoms.push_back(std::move(a));
        }
        law = StepLaw::lattice(d, std::move(atoms));
    } else if (kind == "component-table") {
        std::vector<std::vector<std::pair<long long, double>>> comps;
        for (const auto& comp : doc.at("components")) {
            std::vector<std::pair<long long, double>> pmf;
            for (const auto& row : comp)
                pmf.emplace_back(row.at(0).get<long long>(), row.at(1).get<double>());
            comps.push_back(std::move(pmf));
        }
        if (static_cast<int>(comps.size()) != d)
            throw std::invalid_argument("component count must equal d");
        law = StepLaw::component_table(comps);
    } else if (kind == "gaussian-iid") {
        std::vector<double> means;
        if (doc.contains("means")) means = doc.at("means").get<std::vector<double>>();
        double sigma = doc.value("sigma", 1.0);
        law = StepLaw::gaussian_iid(d, std::move(means), sigma);
    } else {
        throw std::invalid_argument("unknown law kind: " + kind);
    }
    law.seed_base_ = doc.value("seed_base", 0ULL);
    return law;
}

nlohmann::json StepLaw::to_json() const {
    nlohmann::json doc;
    doc["d"] = d_;
    doc["kind"] = law_kind_name(kind_);
    if (kind_ == LawKind::GaussianIid) {
        doc["means"] = gauss_means_;
        doc["sigma"] = gauss_sigma_;
    } else if (kind_ == LawKind::ComponentTable) {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& pmf : component_table_) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& [v, p] : pmf) rows.push_back({v, p});
            comps.push_back(rows);
        }
        doc["components"] = comps;
    } else {
        nlohmann::json atoms = nlohmann::json::array();
        for (const auto& a : atoms_) atoms.push_back({a.dx, a.p});
        doc["atoms"] = atoms;
    }
    doc["seed_base"] = seed_base_;
    return doc;
}

}  // namespace orw
