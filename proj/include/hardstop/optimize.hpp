#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardstop/contact.hpp"
#include "hardstop/errors.hpp"
#include "hardstop/spaces.hpp"
#include "hardstop/trajectory.hpp"

namespace hardstop {

struct DesignVariable {
    std::string name;
    double lo;
    double hi;
};

enum class TargetRole : std::uint8_t { must_contain, reference };

struct StressTarget {
    std::string name;  // e.g. "fatigue", "yield"
    double sigma_cr;   // MPa
    TargetRole role = TargetRole::must_contain;
};

/// Candidate design -> engagement boundary on a grid at a settlement.
using BoundaryGenerator =
    std::function<RadialBoundaryField(std::span<const double>, const DirectionGrid&, double)>;

/// Stress threshold -> safe boundary on a grid (independent of the design).
using SigmaGenerator = std::function<RadialBoundaryField(const DirectionGrid&, double)>;

struct OptimizationProblem {
    std::vector<DesignVariable> variables;
    BoundaryGenerator hs_generator;
    SigmaGenerator sigma_generator;
    std::vector<StressTarget> targets;
    std::size_t primary_target = 0;
    std::vector<Trajectory> trajectories;  // hard containment constraints
    DirectionGrid grid;                    // verification grid
    std::optional<DirectionGrid> search_grid;
    double penalty_weight = 100.0;
    double delta_z = 0.0;
    std::size_t max_evals = 2000;  // objective evaluations per start
    std::vector<std::uint64_t> seeds;
    std::vector<double> initial;  // optional explicit start point
    double unprotected_cap = 1e-3;
    double step_init_frac = 0.10;
    double step_tol_frac = 1e-3;

    void validate() const {
        if (variables.empty()) throw ValidationError("optimize: no design variables");
        for (const auto& v : variables)
            if (!(v.lo < v.hi) || !std::isfinite(v.lo) || !std::isfinite(v.hi))
                throw ValidationError("optimize: variable '" + v.name + "' has invalid bounds");
        if (!hs_generator || !sigma_generator)
            throw ValidationError("optimize: generators are required");
        if (targets.empty()) throw ValidationError("optimize: no stress targets");
        bool any_must = false;
        for (const auto& t : targets) any_must = any_must || t.role == TargetRole::must_contain;
        if (!any_must) throw ValidationError("optimize: at least one must-contain target required");
        if (primary_target >= targets.size())
            throw ValidationError("optimize: primary target index out of range");
        if (!(penalty_weight > 0.0)) throw ValidationError("optimize: penalty weight must be positive");
        if (!initial.empty() && initial.size() != variables.size())
            throw ValidationError("optimize: initial point dimension mismatch");
    }
};

/// Value used for candidates that violate a hard constraint or cannot be
/// constructed. Finite so comparisons stay total, low enough to never win.
inline constexpr double kRejectedObjective = -1e30;

struct ObjectiveBreakdown {
    double value = kRejectedObjective;
    double phi = 0.0;
    double penalty = 0.0;
    bool geometry_valid = false;
    bool hs_bounded = false;
    bool trajectories_ok = false;
};

namespace detail {

/// Sum of per-ray relative overshoots of the candidate boundary beyond a
/// must-contain stress boundary.
inline double containment_penalty(const RadialBoundaryField& hs, const RadialBoundaryField& sigma) {
    double sum = 0.0;
    for (std::size_t j = 0; j < hs.grid.n_sep; ++j)
        for (std::size_t i = 0; i < hs.grid.n_alpha; ++i) {
            if (sigma.is_unbounded(j, i)) continue;  // nothing to overshoot
            const double rs = sigma.radius(j, i);
            sum += std::max(hs.radius(j, i) - rs, 0.0) / rs;
        }
    return sum;
}

inline ObjectiveBreakdown evaluate_candidate(std::span<const double> vars,
                                             const OptimizationProblem& p, const DirectionGrid& grid,
                                             const std::vector<RadialBoundaryField>& sigma_fields,
                                             double vol_sigma_primary) {
    ObjectiveBreakdown out;
    RadialBoundaryField hs;
    try {
        hs = p.hs_generator(vars, grid, p.delta_z);
    } catch (const ValidationError&) {
        return out;  // invalid geometry
    }
    out.geometry_valid = true;

    for (std::size_t j = 0; j < grid.n_sep; ++j)
        for (std::size_t i = 0; i < grid.n_alpha; ++i)
            if (hs.is_unbounded(j, i)) return out;  // no finite workspace
    out.hs_bounded = true;

    for (const Trajectory& t : p.trajectories)
        if (!trajectory_containment(hs, t).pass) return out;  // hard constraint
    out.trajectories_ok = true;

    out.phi = field_volume(hs) / vol_sigma_primary;
    double pen = 0.0;
    for (std::size_t k = 0; k < p.targets.size(); ++k)
        if (p.targets[k].role == TargetRole::must_contain)
            pen += containment_penalty(hs, sigma_fields[k]);
    out.penalty = pen;
    out.value = out.phi - p.penalty_weight * pen;
    return out;
}

}  // namespace detail

/// Penalty objective at one design point, evaluated on the search grid:
/// the volume fraction against the primary target minus the weighted
/// per-ray overshoot of every must-contain target; hard-rejected (finite,
/// large negative) on invalid geometry, unbounded workspaces or trajectory
/// violations.
inline ObjectiveBreakdown penalty_objective(std::span<const double> vars,
                                            const OptimizationProblem& p) {
    p.validate();
    const DirectionGrid grid = p.search_grid.value_or(p.grid);
    std::vector<RadialBoundaryField> sigma_fields;
    for (const auto& t : p.targets) sigma_fields.push_back(p.sigma_generator(grid, t.sigma_cr));
    const double vol_primary = field_volume(sigma_fields[p.primary_target]);
    return detail::evaluate_candidate(vars, p, grid, sigma_fields, vol_primary);
}

struct StartRecord {
    std::vector<double> start_point;
    std::vector<double> history;  // best objective after each poll round
    double final_value = kRejectedObjective;
};

struct OptimizationResult {
    std::vector<double> best_vars;
    ObjectiveBreakdown best;        // on the search grid
    double recomputed_value = 0.0;  // fresh recomputation of best on the search grid
    std::vector<StartRecord> starts;
    std::size_t evaluations = 0;

    // verification on the full grid
    std::vector<std::pair<std::string, SpaceMetrics>> target_metrics;
    std::vector<ContainmentReport> trajectory_reports;
    bool feasible = false;
};

/// Derivative-free maximization of the penalty objective: coordinate pattern
/// search with multiplicative step shrink, multi-started from the provided
/// initial point and one uniform random point per seed. Deterministic for a
/// fixed problem and seed list. The best design is re-evaluated from scratch
/// on the search grid and verified on the full grid.
inline OptimizationResult optimize(const OptimizationProblem& p) {
    p.validate();
    const DirectionGrid sgrid = p.search_grid.value_or(p.grid);

    std::vector<RadialBoundaryField> sigma_search, sigma_final;
    for (const auto& t : p.targets) {
        sigma_search.push_back(p.sigma_generator(sgrid, t.sigma_cr));
        sigma_final.push_back(p.sigma_generator(p.grid, t.sigma_cr));
    }
    const double vol_primary_search = field_volume(sigma_search[p.primary_target]);

    auto eval = [&](std::span<const double> x) {
        return detail::evaluate_candidate(x, p, sgrid, sigma_search, vol_primary_search);
    };

    std::vector<std::vector<double>> starts;
    if (!p.initial.empty()) starts.push_back(p.initial);
    for (const std::uint64_t seed : p.seeds) {
        std::mt19937_64 gen(seed);
        std::vector<double> x;
        for (const auto& v : p.variables) {
            std::uniform_real_distribution<double> u(v.lo, v.hi);
            x.push_back(u(gen));
        }
        starts.push_back(std::move(x));
    }
    if (starts.empty()) throw ValidationError("optimize: no starts (no initial point and no seeds)");

    OptimizationResult result;
    bool any_valid_geometry = false;

    for (const auto& start : starts) {
        StartRecord rec;
        rec.start_point = start;

        std::vector<double> x = start;
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = std::clamp(x[d], p.variables[d].lo, p.variables[d].hi);

        ObjectiveBreakdown fx = eval(x);
        std::size_t evals = 1;
        any_valid_geometry = any_valid_geometry || fx.geometry_valid;
        rec.history.push_back(fx.value);

        std::vector<double> step(x.size());
        for (std::size_t d = 0; d < x.size(); ++d)
            step[d] = p.step_init_frac * (p.variables[d].hi - p.variables[d].lo);

        while (evals < p.max_evals) {
            double max_frac = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d)
                max_frac = std::max(max_frac, step[d] / (p.variables[d].hi - p.variables[d].lo));
            if (max_frac < p.step_tol_frac) break;

            std::vector<double> best_cand;
            ObjectiveBreakdown best_val;
            for (std::size_t d = 0; d < x.size() && evals < p.max_evals; ++d) {
                for (const double sgn : {+1.0, -1.0}) {
                    std::vector<double> y = x;
                    y[d] = std::clamp(x[d] + sgn * step[d], p.variables[d].lo, p.variables[d].hi);
                    if (y[d] == x[d]) continue;
                    const ObjectiveBreakdown fy = eval(y);
                    ++evals;
                    any_valid_geometry = any_valid_geometry || fy.geometry_valid;
                    if (best_cand.empty() || fy.value > best_val.value) {
                        best_cand = std::move(y);
                        best_val = fy;
                    }
                    if (evals >= p.max_evals) break;
                }
            }
            if (!best_cand.empty() && best_val.value > fx.value) {
                x = best_cand;
                fx = best_val;
            } else {
                for (double& s : step) s *= 0.5;
            }
            rec.history.push_back(fx.value);
        }

        rec.final_value = fx.value;
        result.evaluations += evals;
        if (result.starts.empty() || rec.final_value > result.best.value) {
            result.best_vars = x;
            result.best = fx;
        }
        result.starts.push_back(std::move(rec));
    }

    if (!any_valid_geometry)
        throw ValidationError("optimize: every start point failed geometric validation");

    // re-evaluate the winner from scratch; a pure pipeline must reproduce it
    result.recomputed_value = eval(result.best_vars).value;

    // full-grid verification of the winner
    if (result.best.geometry_valid) {
        const RadialBoundaryField hs_final = p.hs_generator(result.best_vars, p.grid, p.delta_z);
        bool feasible = result.best.value > kRejectedObjective / 2.0;
        for (std::size_t k = 0; k < p.targets.size(); ++k) {
            const SpaceMetrics m = space_metrics(hs_final, sigma_final[k]);
            result.target_metrics.emplace_back(p.targets[k].name, m);
            if (p.targets[k].role == TargetRole::must_contain &&
                m.vol_unprotected / m.vol_sigma > p.unprotected_cap)
                feasible = false;
        }
        for (const Trajectory& t : p.trajectories) {
            result.trajectory_reports.push_back(trajectory_containment(hs_final, t));
            feasible = feasible && result.trajectory_reports.back().pass;
        }
        result.feasible = feasible;
    }
    return result;
}

/// Adjustable parameters of a hard-stop pair, in external units (mm, deg).
struct ProfileParams {
    double d_l = 0.0;
    double d_s = 0.0;
    double r_c = 0.0;
    double theta_o_deg = 0.0;
    std::optional<double> clip_diameter;
};

struct PairParams {
    ProfileParams stage;
    ProfileParams ground;
    double z_ab = 0.0;
    double z_oa = 0.0;
    double z_lo = 0.0;

    HardStopPair build() const {
        TorusCapProfile s(stage.d_l, stage.d_s, stage.r_c, deg_to_rad(stage.theta_o_deg),
                          stage.clip_diameter);
        TorusCapProfile g(ground.d_l, ground.d_s, ground.r_c, deg_to_rad(ground.theta_o_deg),
                          ground.clip_diameter);
        return {std::move(s), std::move(g), z_ab, z_oa, z_lo};
    }
};

/// Resolve a design-variable name to a slot in the pair parameters. Names use
/// external units: lengths in mm, angles in deg.
inline double* pair_variable_slot(PairParams& p, const std::string& name) {
    const auto profile_slot = [](ProfileParams& pr, const std::string& field) -> double* {
        if (field == "d_l") return &pr.d_l;
        if (field == "d_s") return &pr.d_s;
        if (field == "r_c") return &pr.r_c;
        if (field == "theta_o_deg") return &pr.theta_o_deg;
        if (field == "clip_diameter") {
            if (!pr.clip_diameter) pr.clip_diameter = 0.0;
            return &*pr.clip_diameter;
        }
        return nullptr;
    };
    if (name.rfind("stage.", 0) == 0) return profile_slot(p.stage, name.substr(6));
    if (name.rfind("ground.", 0) == 0) return profile_slot(p.ground, name.substr(7));
    if (name == "z_ab") return &p.z_ab;
    if (name == "z_oa") return &p.z_oa;
    return nullptr;
}

/// Boundary generator for torus-cap pairs: applies named design variables on
/// top of a base parameter set and extracts the engagement boundary.
inline BoundaryGenerator make_pair_boundary_generator(PairParams base,
                                                      std::vector<std::string> var_names,
                                                      ContactOptions opt = {}) {
    for (auto& n : var_names) {
        PairParams probe = base;
        if (pair_variable_slot(probe, n) == nullptr)
            throw ValidationError("unknown design variable '" + n + "'");
    }
    return [base, var_names, opt](std::span<const double> vars, const DirectionGrid& grid,
                                  double delta_z) {
        if (vars.size() != var_names.size())
            throw ValidationError("design variable count mismatch");
        PairParams p = base;
        for (std::size_t i = 0; i < vars.size(); ++i) *pair_variable_slot(p, var_names[i]) = vars[i];
        return contact_boundary_field(p.build(), grid, delta_z, opt);
    };
}

}  // namespace hardstop
