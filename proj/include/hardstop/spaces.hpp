#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hardstop/contact.hpp"
#include "hardstop/errors.hpp"
#include "hardstop/trajectory.hpp"

namespace hardstop {

/// Protection metrics of a hard-stop-free space against a safe stress space.
struct SpaceMetrics {
    double vol_hs = 0.0;
    double vol_sigma = 0.0;
    double phi_hs = 0.0;
    double vol_unprotected = 0.0;
    double vol_overprotected = 0.0;
    bool contained = false;
};

namespace detail {

inline std::string ray_name(const DirectionGrid& g, std::size_t j, std::size_t i) {
    return "sep " + std::to_string(rad_to_deg(g.sep(j))) + " deg, alpha " +
           std::to_string(rad_to_deg(g.alpha(i))) + " deg";
}

/// Direction-grid coordinates of a workspace vector: the in-plane polar angle
/// of its canonical signed-plane representative and the acute slice angle.
struct GridDirection {
    double alpha;  // rad in [0, 2pi)
    double sep;    // rad in [0, pi/2]
    double radius; // scaled units
};

inline GridDirection grid_direction(const WorkspaceVector& w, const DirectionGrid& g) {
    const double x = w.delta_a / g.delta_ref;
    const double y = w.theta_a / g.theta_ref;
    GridDirection d;
    d.radius = std::hypot(x, y);
    if (w.theta_sep <= kPi / 2.0) {
        d.sep = w.theta_sep;
        d.alpha = std::atan2(y, x);
    } else {
        d.sep = kPi - w.theta_sep;
        d.alpha = std::atan2(-y, x);
    }
    if (d.alpha < 0.0) d.alpha += 2.0 * kPi;
    return d;
}

struct InterpolatedRadius {
    double radius = 0.0;       // bilinear value over finite corners
    bool any_unbounded = false;
    double min_finite = std::numeric_limits<double>::infinity();
};

/// Bilinear boundary radius at an arbitrary direction; periodic in alpha,
/// clamped to the slice range in sep.
inline InterpolatedRadius interpolate_radius(const RadialBoundaryField& f, double alpha, double sep) {
    const DirectionGrid& g = f.grid;
    const double da = g.alpha_weight();
    double ia = alpha / da;
    ia -= std::floor(ia / double(g.n_alpha)) * double(g.n_alpha);
    const std::size_t i0 = std::size_t(ia) % g.n_alpha;
    const std::size_t i1 = (i0 + 1) % g.n_alpha;
    const double fa = ia - std::floor(ia);

    std::size_t j0 = 0, j1 = 0;
    double fs = 0.0;
    if (g.n_sep > 1) {
        const double step = (kPi / 2.0) / double(g.n_sep - 1);
        double js = std::clamp(sep, 0.0, kPi / 2.0) / step;
        j0 = std::min(std::size_t(js), g.n_sep - 2);
        j1 = j0 + 1;
        fs = std::clamp(js - double(j0), 0.0, 1.0);
    }

    InterpolatedRadius out;
    double acc = 0.0;
    const auto corner = [&](std::size_t j, std::size_t i, double weight) {
        if (weight == 0.0) return;
        if (f.is_unbounded(j, i)) {
            out.any_unbounded = true;
            return;
        }
        out.min_finite = std::min(out.min_finite, f.radius(j, i));
        acc += weight * f.radius(j, i);
    };
    corner(j0, i0, (1 - fa) * (1 - fs));
    corner(j0, i1, fa * (1 - fs));
    if (j1 != j0) {
        corner(j1, i0, (1 - fa) * fs);
        corner(j1, i1, fa * fs);
    }
    out.radius = acc;
    return out;
}

}  // namespace detail

/// Per-slice polar area of the boundary, in squared scaled units.
inline double slice_area(const RadialBoundaryField& f, std::size_t sep_j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.grid.n_alpha; ++i) {
        if (f.is_unbounded(sep_j, i))
            throw NumericError("field volume is infinite: unbounded ray at " +
                               detail::ray_name(f.grid, sep_j, i));
        const double r = f.radius(sep_j, i);
        acc += 0.5 * r * r * f.grid.alpha_weight();
    }
    return acc;
}

/// Scaled volume enclosed by the boundary: per-slice polar areas integrated
/// over the separation-angle coordinate with trapezoidal weights.
inline double field_volume(const RadialBoundaryField& f) {
    double vol = 0.0;
    for (std::size_t j = 0; j < f.grid.n_sep; ++j) vol += f.grid.sep_weight(j) * slice_area(f, j);
    return vol;
}

/// Volume fraction phi = Vol(hs) / Vol(sigma); defined whether or not the
/// hard-stop space is contained.
inline double volume_fraction(const RadialBoundaryField& hs, const RadialBoundaryField& sigma) {
    if (!hs.grid.same_shape(sigma.grid))
        throw ValidationError("volume_fraction: direction grids do not match");
    return field_volume(hs) / field_volume(sigma);
}

/// Unprotected and overprotected volumes from the per-direction radius
/// decomposition.
inline std::pair<double, double> difference_volumes(const RadialBoundaryField& hs,
                                                    const RadialBoundaryField& sigma) {
    if (!hs.grid.same_shape(sigma.grid))
        throw ValidationError("difference_volumes: direction grids do not match");
    double unprotected = 0.0, overprotected = 0.0;
    const DirectionGrid& g = hs.grid;
    for (std::size_t j = 0; j < g.n_sep; ++j) {
        for (std::size_t i = 0; i < g.n_alpha; ++i) {
            if (hs.is_unbounded(j, i) || sigma.is_unbounded(j, i))
                throw NumericError("difference volume is infinite: unbounded ray at " +
                                   detail::ray_name(g, j, i));
            const double rh = hs.radius(j, i), rs = sigma.radius(j, i);
            const double w = 0.5 * g.alpha_weight() * g.sep_weight(j);
            unprotected += w * std::max(rh * rh - rs * rs, 0.0);
            overprotected += w * std::max(rs * rs - rh * rh, 0.0);
        }
    }
    return {unprotected, overprotected};
}

/// Full protection metrics; `contained` allows vol_unprotected up to
/// `containment_tol` of numerical residue.
inline SpaceMetrics space_metrics(const RadialBoundaryField& hs, const RadialBoundaryField& sigma,
                                  double containment_tol = 1e-9) {
    SpaceMetrics m;
    m.vol_hs = field_volume(hs);
    m.vol_sigma = field_volume(sigma);
    m.phi_hs = m.vol_hs / m.vol_sigma;
    const auto [unp, ovp] = difference_volumes(hs, sigma);
    m.vol_unprotected = unp;
    m.vol_overprotected = ovp;
    m.contained = unp <= containment_tol;
    return m;
}

/// Strict membership of a workspace vector in the open region enclosed by the
/// boundary. Directions whose surrounding grid nodes are unbounded count as
/// interior.
inline bool contains_point(const RadialBoundaryField& f, const WorkspaceVector& w) {
    const auto d = detail::grid_direction(w, f.grid);
    const auto b = detail::interpolate_radius(f, d.alpha, d.sep);
    if (b.any_unbounded) return d.radius < b.min_finite || !std::isfinite(b.min_finite);
    return d.radius < b.radius;
}

/// Per-axis motion limits in scaled units; an absent axis is unconstrained.
struct AxisLimits {
    double lo;
    double hi;
};

struct OrthotopeLimits {
    std::optional<AxisLimits> delta;
    std::optional<AxisLimits> theta;
};

/// Radial representation of stacked single-axis limits: on each ray, the
/// radius to the first box face crossed; rays parallel to every face are
/// flagged unbounded.
inline RadialBoundaryField orthotope_field(const OrthotopeLimits& lim, const DirectionGrid& grid,
                                           double delta_z = 0.0) {
    grid.validate();
    for (const auto& ax : {lim.delta, lim.theta})
        if (ax && !(ax->lo < 0.0 && 0.0 < ax->hi))
            throw ValidationError("orthotope_field: limits must straddle zero");
    RadialBoundaryField f(grid, FieldLabel::orthotope, delta_z);
    for (std::size_t i = 0; i < grid.n_alpha; ++i) {
        const auto [dx, dy] = DirectionGrid::direction(grid.alpha(i));
        double r = std::numeric_limits<double>::infinity();
        if (lim.delta && dx != 0.0) r = std::min(r, (dx > 0.0 ? lim.delta->hi : lim.delta->lo) / dx);
        if (lim.theta && dy != 0.0) r = std::min(r, (dy > 0.0 ? lim.theta->hi : lim.theta->lo) / dy);
        const bool unb = !std::isfinite(r);
        for (std::size_t j = 0; j < grid.n_sep; ++j) f.set(j, i, unb ? 0.0 : r, unb);
    }
    return f;
}

struct SampleMargin {
    std::size_t index;
    double cycle_pct;
    double margin;  // boundary radius minus sample radius, scaled units
    bool inside;    // strictly positive margin
};

struct ContainmentReport {
    std::string label;
    std::vector<SampleMargin> samples;
    double min_margin = std::numeric_limits<double>::infinity();
    bool pass = true;

    std::vector<std::size_t> violations() const {
        std::vector<std::size_t> v;
        for (const auto& s : samples)
            if (!s.inside) v.push_back(s.index);
        return v;
    }
};

/// Margin of every trajectory sample against a boundary field; passes only if
/// every sample lies strictly inside.
inline ContainmentReport trajectory_containment(const RadialBoundaryField& f, const Trajectory& traj) {
    traj.validate();
    ContainmentReport rep;
    rep.label = traj.label;
    for (std::size_t n = 0; n < traj.samples.size(); ++n) {
        const TrajectorySample& s = traj.samples[n];
        const auto d = detail::grid_direction(s.workspace, f.grid);
        const auto b = detail::interpolate_radius(f, d.alpha, d.sep);
        double margin;
        if (b.any_unbounded && !std::isfinite(b.min_finite))
            margin = std::numeric_limits<double>::infinity();
        else if (b.any_unbounded)
            margin = b.min_finite - d.radius;
        else
            margin = b.radius - d.radius;
        const bool inside = margin > 0.0;
        rep.samples.push_back({n, s.cycle_pct, margin, inside});
        rep.min_margin = std::min(rep.min_margin, margin);
        rep.pass = rep.pass && inside;
    }
    return rep;
}

/// Re-express a field with both axis scalings multiplied by c; the stored
/// radii shrink by the same factor and every derived volume ratio is
/// preserved exactly.
inline RadialBoundaryField rescale_common(const RadialBoundaryField& f, double c) {
    if (!(c > 0.0)) throw ValidationError("rescale_common: factor must be positive");
    RadialBoundaryField out = f;
    out.grid.delta_ref *= c;
    out.grid.theta_ref *= c;
    for (double& r : out.radii) r /= c;
    return out;
}

}  // namespace hardstop
