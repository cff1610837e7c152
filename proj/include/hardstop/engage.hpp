#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hardstop/errors.hpp"
#include "hardstop/spaces.hpp"
#include "hardstop/stress.hpp"
#include "hardstop/trajectory.hpp"

namespace hardstop {

/// Outcome of one quasi-static trajectory step against the engagement
/// boundary.
struct EngagementRecord {
    TrajectorySample input;
    WorkspaceVector clamped;
    bool engaged = false;
    double margin = 0.0;  // boundary radius minus input radius, scaled units
    double sigma_unclamped = 0.0;
    double sigma_clamped = 0.0;
};

/// Superimpose a Gaussian overload surge on the deflection amplitudes. The
/// multiplier peaks exactly at the sample nearest center_pct; the envelope's
/// full width at 5% of its excess spans width_steps samples.
inline Trajectory apply_surge(const Trajectory& traj, double peak_multiplier, double width_steps,
                              double center_pct) {
    traj.validate();
    if (!(peak_multiplier >= 1.0)) throw ValidationError("apply_surge: peak multiplier must be >= 1");
    if (!(width_steps > 0.0)) throw ValidationError("apply_surge: width must be positive");

    std::size_t center = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const double d = std::abs(traj.samples[i].cycle_pct - center_pct);
        if (d < best) {
            best = d;
            center = i;
        }
    }

    // exp(-(w/2)^2 / (2 s^2)) = 0.05  =>  s = w / (2 sqrt(2 ln 20))
    const double s = width_steps / (2.0 * std::sqrt(2.0 * std::log(20.0)));
    Trajectory out = traj;
    out.label = traj.label + "+surge";
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double x = (double(i) - double(center)) / s;
        const double mult = 1.0 + (peak_multiplier - 1.0) * std::exp(-0.5 * x * x);
        WorkspaceVector& w = out.samples[i].workspace;
        w = WorkspaceVector(w.delta_a * mult, w.theta_a * mult, w.theta_sep);
    }
    return out;
}

/// Largest stress along the boundary, swept over the same interpolated
/// boundary family that clamping projects onto (grid nodes plus sub-cell
/// directions). Directions with unbounded neighbors are skipped.
inline double max_boundary_stress(const RadialBoundaryField& field, const StressModel& model,
                                  std::size_t subdiv = 8) {
    const DirectionGrid& g = field.grid;
    // separation sweep: cell-subdivided when the field resolves the slice
    // coordinate; a single-slice field stands for every separation, so the
    // whole [0, 90 deg] span is scanned against its one set of radii
    std::vector<double> seps;
    if (g.n_sep > 1) {
        for (std::size_t j = 0; j + 1 < g.n_sep; ++j)
            for (std::size_t s = 0; s < subdiv; ++s)
                seps.push_back(g.sep(j) + (g.sep(j + 1) - g.sep(j)) * double(s) / double(subdiv));
    } else {
        for (std::size_t s = 0; s < 2 * subdiv; ++s)
            seps.push_back((kPi / 2.0) * double(s) / double(2 * subdiv));
    }
    seps.push_back(kPi / 2.0);

    double best = 0.0;
    for (const double sep : seps) {
        for (std::size_t i = 0; i < g.n_alpha; ++i) {
            for (std::size_t si = 0; si < subdiv; ++si) {
                const double alpha = g.alpha(i) + g.alpha_weight() * double(si) / double(subdiv);
                const auto b = detail::interpolate_radius(field, alpha, sep);
                if (b.any_unbounded) continue;
                best = std::max(best, eval_stress(model, g.workspace_at(alpha, sep, b.radius)));
            }
        }
    }
    return best;
}

/// Trajectory arm with the hard stop deactivated: no clamping, stress
/// evaluated on the raw motion.
inline std::vector<EngagementRecord> simulate_free(const StressModel& model, const Trajectory& traj) {
    traj.validate();
    std::vector<EngagementRecord> records;
    records.reserve(traj.samples.size());
    for (const TrajectorySample& s : traj.samples) {
        EngagementRecord rec;
        rec.input = s;
        rec.clamped = s.workspace;
        rec.engaged = false;
        rec.margin = std::numeric_limits<double>::infinity();
        rec.sigma_unclamped = rec.sigma_clamped = eval_stress(model, s.workspace);
        records.push_back(rec);
    }
    return records;
}

/// Quasi-static engagement simulation: each sample outside the hard-stop-free
/// region is projected radially back onto the boundary (the motion slides
/// along its own ray), and the stress response is evaluated for both the raw
/// and the clamped motion.
inline std::vector<EngagementRecord> simulate_engagement(const RadialBoundaryField& hs_field,
                                                         const StressModel& model,
                                                         const Trajectory& traj) {
    traj.validate();
    std::vector<EngagementRecord> records;
    records.reserve(traj.samples.size());
    for (std::size_t n = 0; n < traj.samples.size(); ++n) {
        const TrajectorySample& s = traj.samples[n];
        const auto dir = detail::grid_direction(s.workspace, hs_field.grid);
        const auto b = detail::interpolate_radius(hs_field, dir.alpha, dir.sep);

        EngagementRecord rec;
        rec.input = s;
        rec.sigma_unclamped = eval_stress(model, s.workspace);

        if (b.any_unbounded) {
            // without a finite boundary the sample can only pass through
            // untouched; clamping against it would be undefined
            if (std::isfinite(b.min_finite) && dir.radius >= b.min_finite)
                throw NumericError("simulate_engagement: unbounded boundary ray at engaged sample " +
                                   std::to_string(n) + " (cycle " + std::to_string(s.cycle_pct) + "%)");
            rec.clamped = s.workspace;
            rec.engaged = false;
            rec.margin = std::numeric_limits<double>::infinity();
            rec.sigma_clamped = rec.sigma_unclamped;
            records.push_back(rec);
            continue;
        }

        rec.margin = b.radius - dir.radius;
        rec.engaged = dir.radius >= b.radius;  // the boundary itself engages
        if (rec.engaged && dir.radius > 0.0) {
            const double scale = b.radius / dir.radius;
            rec.clamped = WorkspaceVector(s.workspace.delta_a * scale, s.workspace.theta_a * scale,
                                          s.workspace.theta_sep);
        } else {
            rec.clamped = s.workspace;
        }
        rec.sigma_clamped = eval_stress(model, rec.clamped);
        records.push_back(rec);
    }
    return records;
}

}  // namespace hardstop
