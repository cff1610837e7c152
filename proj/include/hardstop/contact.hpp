#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hardstop/errors.hpp"
#include "hardstop/geometry.hpp"

namespace hardstop {

/// Grid of search directions over the protected-motion space: polar angles
/// alpha in [0, 2pi) over the signed deflection plane, crossed with separation
/// angle slices in [0, 90deg]. Slice radii are expressed in scaled units of
/// (delta_ref mm, theta_ref rad) per unit.
struct DirectionGrid {
    std::size_t n_alpha = 72;
    std::size_t n_sep = 4;
    double delta_ref = 1.0;                  // mm per scaled unit
    double theta_ref = kPi / 180.0;          // rad per scaled unit (default 1 deg)

    DirectionGrid() = default;
    DirectionGrid(std::size_t alphas, std::size_t seps, double dref, double tref)
        : n_alpha(alphas), n_sep(seps), delta_ref(dref), theta_ref(tref) {
        validate();
    }

    void validate() const {
        if (n_alpha < 8 || n_alpha % 4 != 0)
            throw ValidationError("DirectionGrid: n_alpha must be >= 8 and a multiple of 4");
        if (n_sep < 1) throw ValidationError("DirectionGrid: n_sep must be >= 1");
        if (!(delta_ref > 0.0) || !(theta_ref > 0.0))
            throw ValidationError("DirectionGrid: axis scalings must be positive");
    }

    double alpha(std::size_t i) const { return 2.0 * kPi * double(i) / double(n_alpha); }

    /// Separation-angle slices span [0, pi/2] inclusively; a single slice sits
    /// at pi/2 (the symmetric plane).
    double sep(std::size_t j) const {
        if (n_sep == 1) return kPi / 2.0;
        return (kPi / 2.0) * double(j) / double(n_sep - 1);
    }

    /// Trapezoidal quadrature weight of slice j over the sep coordinate (rad).
    double sep_weight(std::size_t j) const {
        if (n_sep == 1) return kPi / 2.0;
        const double h = (kPi / 2.0) / double(n_sep - 1);
        return (j == 0 || j + 1 == n_sep) ? h / 2.0 : h;
    }

    double alpha_weight() const { return 2.0 * kPi / double(n_alpha); }

    /// In-plane direction cosines with exact axis snapping, so that rays on a
    /// coordinate axis carry an exactly vanishing cross component.
    static std::array<double, 2> direction(double alpha_rad) {
        double dx = std::cos(alpha_rad);
        double dy = std::sin(alpha_rad);
        if (std::abs(dx) < 1e-15) dx = 0.0;
        if (std::abs(dy) < 1e-15) dy = 0.0;
        return {dx, dy};
    }

    /// Workspace vector at radius k (scaled units) along direction (alpha, sep).
    /// First/third quadrants carry the acute separation angle, second/fourth
    /// its supplement.
    WorkspaceVector workspace_at(double alpha_rad, double sep_rad, double k) const {
        const auto [dx, dy] = direction(alpha_rad);
        const double da = k * std::abs(dx) * delta_ref;
        const double ta = k * std::abs(dy) * theta_ref;
        const double s = (dx * dy >= 0.0) ? sep_rad : kPi - sep_rad;
        return WorkspaceVector(da, ta, s);
    }

    bool same_shape(const DirectionGrid& o) const {
        return n_alpha == o.n_alpha && n_sep == o.n_sep &&
               std::abs(delta_ref - o.delta_ref) < 1e-12 && std::abs(theta_ref - o.theta_ref) < 1e-12;
    }
};

enum class FieldLabel : std::uint8_t { hard_stop, safe_stress, orthotope };

inline std::string to_string(FieldLabel l) {
    switch (l) {
        case FieldLabel::hard_stop: return "hard_stop";
        case FieldLabel::safe_stress: return "safe_stress";
        case FieldLabel::orthotope: return "orthotope";
    }
    return "unknown";
}

/// A ray whose sampled radii were not monotone in the engagement predicate;
/// the reported radius is the smallest crossing found (the safe side).
struct RayWarning {
    std::size_t sep_index;
    std::size_t alpha_index;
};

/// Closed motion-space boundary stored as radii (scaled units) over a
/// direction grid. Radii may individually be flagged unbounded when the
/// boundary predicate never fires within the search range.
struct RadialBoundaryField {
    DirectionGrid grid;
    std::vector<double> radii;           // n_sep * n_alpha, slice-major
    std::vector<std::uint8_t> unbounded; // parallel flags
    double delta_z = 0.0;                // mm settlement the field was computed at
    FieldLabel label = FieldLabel::hard_stop;
    std::vector<RayWarning> warnings;

    RadialBoundaryField() = default;
    RadialBoundaryField(DirectionGrid g, FieldLabel l, double settle)
        : grid(g),
          radii(g.n_sep * g.n_alpha, 0.0),
          unbounded(g.n_sep * g.n_alpha, 0),
          delta_z(settle),
          label(l) {}

    std::size_t index(std::size_t sep_j, std::size_t alpha_i) const {
        return sep_j * grid.n_alpha + alpha_i;
    }
    double radius(std::size_t sep_j, std::size_t alpha_i) const { return radii[index(sep_j, alpha_i)]; }
    bool is_unbounded(std::size_t sep_j, std::size_t alpha_i) const {
        return unbounded[index(sep_j, alpha_i)] != 0;
    }
    void set(std::size_t sep_j, std::size_t alpha_i, double r, bool unb) {
        radii[index(sep_j, alpha_i)] = r;
        unbounded[index(sep_j, alpha_i)] = unb ? 1 : 0;
    }
};

namespace detail {

/// Spatial index over a profile generator polyline in the (r, z) half-plane:
/// an implicit binary tree of bounding boxes, inflated by the polyline's
/// deviation bound so that pruning is valid for the exact curve as well.
class ProfileBvh {
public:
    explicit ProfileBvh(const TorusCapProfile& p) : profile_(&p) {
        const auto tv = p.table();
        r_ = tv.r;
        z_ = tv.z;
        phi_ = tv.phi;
        n_seg_ = r_->size() - 1;
        // deviation of the exact arc from each chord, conservatively doubled
        dev_ = 0.0;
        for (std::size_t k = 0; k < n_seg_; ++k) {
            const double pm = 0.5 * ((*phi_)[k] + (*phi_)[k + 1]);
            const auto [rm, zm] = p.point_at_angle(pm);
            const double cx = 0.5 * ((*r_)[k] + (*r_)[k + 1]);
            const double cz = 0.5 * ((*z_)[k] + (*z_)[k + 1]);
            dev_ = std::max(dev_, std::hypot(rm - cx, zm - cz));
        }
        dev_ = 2.0 * dev_ + 1e-15;
        build_tree();
    }

    double deviation() const { return dev_; }

    /// Distance from (r, z) to the exact generator curve, refined to ~1e-12.
    /// Returns an overestimate clamped at `cutoff` when the true distance
    /// provably exceeds it.
    double distance(double r, double z, double cutoff = 1e300) const {
        double best = cutoff;
        std::size_t best_seg = std::size_t(-1);
        query(r, z, best, best_seg);
        if (best_seg == std::size_t(-1)) return cutoff;
        // collect every segment whose chord distance could hide the true
        // minimizer, then polish each on the exact curve
        segs_.clear();
        collect(r, z, best + dev_ + 1e-15);
        double exact = cutoff;
        for (const std::size_t k : segs_) exact = std::min(exact, refine(r, z, k));
        return exact;
    }

private:
    struct Box {
        double rlo, rhi, zlo, zhi;
    };

    void build_tree() {
        leaves_ = 1;
        while (leaves_ < n_seg_) leaves_ <<= 1;
        boxes_.assign(2 * leaves_, Box{1e300, -1e300, 1e300, -1e300});
        for (std::size_t k = 0; k < n_seg_; ++k) {
            Box b;
            b.rlo = std::min((*r_)[k], (*r_)[k + 1]) - dev_;
            b.rhi = std::max((*r_)[k], (*r_)[k + 1]) + dev_;
            b.zlo = std::min((*z_)[k], (*z_)[k + 1]) - dev_;
            b.zhi = std::max((*z_)[k], (*z_)[k + 1]) + dev_;
            boxes_[leaves_ + k] = b;
        }
        for (std::size_t i = leaves_ - 1; i >= 1; --i) {
            const Box& a = boxes_[2 * i];
            const Box& b = boxes_[2 * i + 1];
            boxes_[i] = {std::min(a.rlo, b.rlo), std::max(a.rhi, b.rhi), std::min(a.zlo, b.zlo),
                         std::max(a.zhi, b.zhi)};
        }
    }

    static double box_distance(const Box& b, double r, double z) {
        const double dr = std::max({0.0, b.rlo - r, r - b.rhi});
        const double dz = std::max({0.0, b.zlo - z, z - b.zhi});
        return std::hypot(dr, dz);
    }

    double chord_distance(std::size_t k, double r, double z) const {
        const double ax = (*r_)[k], az = (*z_)[k];
        const double bx = (*r_)[k + 1], bz = (*z_)[k + 1];
        const double ex = bx - ax, ez = bz - az;
        const double len2 = ex * ex + ez * ez;
        double t = len2 > 0.0 ? ((r - ax) * ex + (z - az) * ez) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return std::hypot(r - (ax + t * ex), z - (az + t * ez));
    }

    void query(double r, double z, double& best, std::size_t& best_seg) const {
        std::size_t stack[64];
        int top = 0;
        stack[top++] = 1;
        while (top > 0) {
            const std::size_t node = stack[--top];
            if (box_distance(boxes_[node], r, z) >= best) continue;
            if (node >= leaves_) {
                const std::size_t k = node - leaves_;
                if (k >= n_seg_) continue;
                const double d = chord_distance(k, r, z);
                if (d < best) {
                    best = d;
                    best_seg = k;
                }
                continue;
            }
            stack[top++] = 2 * node;
            stack[top++] = 2 * node + 1;
        }
    }

    void collect(double r, double z, double thresh) const {
        std::size_t stack[64];
        int top = 0;
        stack[top++] = 1;
        while (top > 0) {
            const std::size_t node = stack[--top];
            if (box_distance(boxes_[node], r, z) > thresh) continue;
            if (node >= leaves_) {
                const std::size_t k = node - leaves_;
                if (k < n_seg_ && chord_distance(k, r, z) <= thresh) segs_.push_back(k);
                continue;
            }
            stack[top++] = 2 * node;
            stack[top++] = 2 * node + 1;
        }
    }

    /// Golden-section polish of the exact curve distance over one segment's
    /// parameter span.
    double refine(double r, double z, std::size_t k) const {
        double a = (*phi_)[k + 1], b = (*phi_)[k];
        if (a > b) std::swap(a, b);
        auto f = [&](double phi) {
            const auto [pr, pz] = profile_->point_at_angle(phi);
            return std::hypot(pr - r, pz - z);
        };
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = f(x2);
            }
        }
        return std::min({f1, f2, f(a), f(b)});
    }

    const TorusCapProfile* profile_;
    const std::vector<double>*r_, *z_, *phi_;
    std::size_t n_seg_ = 0, leaves_ = 0;
    std::vector<Box> boxes_;
    double dev_ = 0.0;
    mutable std::vector<std::size_t> segs_;
};

struct RadialSearchResult {
    double radius = 0.0;
    bool unbounded = false;
    bool warned = false;
};

/// Bridge from the grid/file separation convention to the compose_motion
/// convention. Grid and trajectory separation angles measure between the
/// translation and the tilt heading (the in-plane direction the stage dips
/// toward); the tilt heading is opposite the perpendicular deflection vector
/// that compose_motion positions, so realizing a grid direction as a rigid
/// motion mirrors the separation angle.
inline WorkspaceVector realized_workspace(const WorkspaceVector& w) {
    if (w.delta_a * w.theta_a <= 0.0) return w;
    return WorkspaceVector(w.delta_a, w.theta_a, kPi - w.theta_sep);
}

/// Find the smallest radius at which `past` fires along a ray, assuming
/// past(0) == false. Bisects [0, r_max], then audits evenly spaced radii below
/// the crossing; a firing audit point reveals a non-monotone predicate, in
/// which case the search repeats inside the earlier bracket (conservative,
/// smallest-crossing semantics) and the ray is flagged.
template <typename Pred>
RadialSearchResult radial_boundary_search(Pred&& past, double r_max, double tol, int audit_points = 16) {
    RadialSearchResult res;
    double lo = 0.0, hi = r_max;
    if (!past(r_max)) {
        // no crossing at the range end; audit interior points before
        // declaring the ray unbounded
        double first_fire = -1.0, prev = 0.0;
        for (int i = 1; i <= audit_points; ++i) {
            const double k = r_max * double(i) / double(audit_points + 1);
            if (past(k)) {
                first_fire = k;
                break;
            }
            prev = k;
        }
        if (first_fire < 0.0) {
            res.unbounded = true;
            res.radius = r_max;
            return res;
        }
        res.warned = true;
        lo = prev;
        hi = first_fire;
    }
    for (int round = 0; round < 4; ++round) {
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            (past(mid) ? hi : lo) = mid;
        }
        res.radius = 0.5 * (lo + hi);
        // monotonicity audit below the crossing
        double fire = -1.0, prev = 0.0;
        for (int i = 1; i <= audit_points; ++i) {
            const double k = res.radius * double(i) / double(audit_points + 1);
            if (past(k)) {
                fire = k;
                break;
            }
            prev = k;
        }
        if (fire < 0.0) return res;
        res.warned = true;
        lo = prev;
        hi = fire;
    }
    res.radius = 0.5 * (lo + hi);
    return res;
}

}  // namespace detail

/// Options for contact-space analysis: stage sampling floors and the radial
/// search range/tolerance in scaled units. A nonpositive r_max requests the
/// default of 4x the nominal assembly gap (expressed in delta_ref units).
struct ContactOptions {
    double density_per_mm2 = 64.0;
    std::size_t min_points = 50000;
    double r_max_scaled = 0.0;
    double tol_scaled = 1e-4;
    int audit_points = 16;
};

/// Shortest signed distance from a point to the ground surface of revolution
/// whose ellipse center sits at height ground_z_offset. The magnitude is the
/// true infimum over the surface (refined below 1e-9 mm); the sign is negative
/// exactly when the point lies below the surface height field within its
/// radial support.
inline double point_to_profile_distance(Vec3 pt, const TorusCapProfile& ground,
                                        double ground_z_offset) {
    const detail::ProfileBvh bvh(ground);
    const double r = std::hypot(pt.x, pt.y);
    const double z = pt.z - ground_z_offset;
    const double mag = bvh.distance(r, z);
    return ground.side_at(r, z) < 0 ? -mag : mag;
}

/// Reusable contact analysis context: owns the stage particle sample and the
/// ground distance index for one hard-stop pair.
class ContactAnalysis {
public:
    ContactAnalysis(const HardStopPair& pair, const ContactOptions& opt = {})
        : pair_(pair),
          opt_(opt),
          sample_(sample_stage_surface(pair.stage, opt.density_per_mm2, opt.min_points)),
          bvh_(pair_.ground) {}

    const SurfaceSample& sample() const { return sample_; }
    const HardStopPair& pair() const { return pair_; }

    /// Exact minimum signed clearance between the transformed stage sample and
    /// the ground surface.
    double min_clearance(const SixDofMotion& m) const {
        const Mat3 rot = rodrigues_rotation({m.theta.x, m.theta.y});
        const Vec3 anc = pair_.anchor();
        const double zoff = pair_.ground_z_offset();
        const double dev = bvh_.deviation();

        struct Cand {
            double r, z, mag;
            int side;
        };
        std::vector<Cand> cands;
        double min_ub = 1e300;
        for (const Vec3& p : sample_.points) {
            const Vec3 q = rot.apply(p - anc) + anc + m.delta;
            const double r = std::hypot(q.x, q.y);
            const double z = q.z - zoff;
            const int side = pair_.ground.side_at(r, z);
            const double cutoff = (side > 0) ? min_ub + 2.0 * dev : 1e300;
            if (side > 0 && cutoff <= 0.0) continue;  // cannot undercut a penetration
            const double mag = bvh_.distance(r, z, cutoff);
            if (side > 0 && mag >= cutoff) continue;  // provably not the minimum
            const double ub = double(side) * mag + dev;
            min_ub = std::min(min_ub, ub);
            cands.push_back({r, z, mag, side});
        }
        double best = 1e300;
        for (const Cand& c : cands) {
            if (double(c.side) * c.mag - dev > min_ub) continue;
            best = std::min(best, double(c.side) * bvh_.distance(c.r, c.z));
        }
        return best;
    }

    /// Contact predicate: true when any transformed stage particle lies below
    /// the ground height field within its radial support.
    bool penetrates(const SixDofMotion& m) const {
        const Mat3 rot = rodrigues_rotation({m.theta.x, m.theta.y});
        const Vec3 anc = pair_.anchor();
        const double zoff = pair_.ground_z_offset();
        for (const Vec3& p : sample_.points) {
            const Vec3 q = rot.apply(p - anc) + anc + m.delta;
            if (pair_.ground.side_at(std::hypot(q.x, q.y), q.z - zoff) < 0) return true;
        }
        return false;
    }

    /// Clearance of the undeformed assembly.
    double nominal_clearance() const { return min_clearance(SixDofMotion{}); }

    /// Effective radial search range in scaled units.
    double r_max(const DirectionGrid& grid) const {
        if (opt_.r_max_scaled > 0.0) return opt_.r_max_scaled;
        const double gap = nominal_clearance();
        if (!(gap > 0.0))
            throw ValidationError("contact: nominal assembly clearance is not positive");
        return 4.0 * gap / grid.delta_ref;
    }

    /// Smallest engagement radius along one grid direction, in scaled units.
    detail::RadialSearchResult radius_along_ray(const DirectionGrid& grid, double alpha_rad,
                                                double sep_rad, double azimuth, double delta_z,
                                                double r_max_scaled, double tol_scaled) const {
        if (penetrates(compose_motion(WorkspaceVector{}, azimuth, delta_z)))
            throw ValidationError("contact: zero-clearance at the requested settlement");
        auto past = [&](double k) {
            return penetrates(compose_motion(
                detail::realized_workspace(grid.workspace_at(alpha_rad, sep_rad, k)), azimuth,
                delta_z));
        };
        return detail::radial_boundary_search(past, r_max_scaled, tol_scaled, opt_.audit_points);
    }

    /// Engagement boundary over a full direction grid, with the in-plane
    /// translation azimuth fixed at zero (the pair is rotationally symmetric).
    RadialBoundaryField boundary_field(const DirectionGrid& grid, double delta_z) const {
        grid.validate();
        RadialBoundaryField field(grid, FieldLabel::hard_stop, delta_z);
        if (penetrates(compose_motion(WorkspaceVector{}, 0.0, delta_z)))
            throw ValidationError("contact: zero-clearance at the requested settlement");
        const double rmax = r_max(grid);
        for (std::size_t j = 0; j < grid.n_sep; ++j) {
            for (std::size_t i = 0; i < grid.n_alpha; ++i) {
                auto past = [&](double k) {
                    return penetrates(compose_motion(
                        detail::realized_workspace(grid.workspace_at(grid.alpha(i), grid.sep(j), k)),
                        0.0, delta_z));
                };
                const auto res =
                    detail::radial_boundary_search(past, rmax, opt_.tol_scaled, opt_.audit_points);
                if (!res.unbounded && res.radius <= 1.5 * opt_.tol_scaled)
                    throw ValidationError("contact: zero-clearance design at sep index " +
                                          std::to_string(j) + ", alpha index " + std::to_string(i));
                field.set(j, i, res.radius, res.unbounded);
                if (res.warned) field.warnings.push_back({j, i});
            }
        }
        return field;
    }

private:
    HardStopPair pair_;
    ContactOptions opt_;
    SurfaceSample sample_;
    detail::ProfileBvh bvh_;
};

/// One-shot minimum clearance between the transformed stage sample and the
/// ground surface; positive exactly when the motion is contact-free.
inline double min_clearance(const HardStopPair& pair, const SixDofMotion& m,
                            const SurfaceSample& sample) {
    const detail::ProfileBvh bvh(pair.ground);
    const Mat3 rot = rodrigues_rotation({m.theta.x, m.theta.y});
    const Vec3 anc = pair.anchor();
    const double zoff = pair.ground_z_offset();
    const double dev = bvh.deviation();
    double min_ub = 1e300;
    struct Cand {
        double r, z, mag;
        int side;
    };
    std::vector<Cand> cands;
    for (const Vec3& p : sample.points) {
        const Vec3 q = rot.apply(p - anc) + anc + m.delta;
        const double r = std::hypot(q.x, q.y);
        const double z = q.z - zoff;
        const int side = pair.ground.side_at(r, z);
        const double cutoff = (side > 0) ? min_ub + 2.0 * dev : 1e300;
        if (side > 0 && cutoff <= 0.0) continue;
        const double mag = bvh.distance(r, z, cutoff);
        if (side > 0 && mag >= cutoff) continue;
        const double ub = double(side) * mag + dev;
        min_ub = std::min(min_ub, ub);
        cands.push_back({r, z, mag, side});
    }
    double best = 1e300;
    for (const Cand& c : cands) {
        if (double(c.side) * c.mag - dev > min_ub) continue;
        best = std::min(best, double(c.side) * bvh.distance(c.r, c.z));
    }
    return best;
}

inline detail::RadialSearchResult contact_radius_along_ray(const HardStopPair& pair,
                                                           const DirectionGrid& grid,
                                                           double alpha_rad, double sep_rad,
                                                           double azimuth, double delta_z,
                                                           double r_max_scaled, double tol_scaled,
                                                           const ContactOptions& opt = {}) {
    const ContactAnalysis ctx(pair, opt);
    return ctx.radius_along_ray(grid, alpha_rad, sep_rad, azimuth, delta_z, r_max_scaled, tol_scaled);
}

inline RadialBoundaryField contact_boundary_field(const HardStopPair& pair, const DirectionGrid& grid,
                                                  double delta_z, const ContactOptions& opt = {}) {
    const ContactAnalysis ctx(pair, opt);
    return ctx.boundary_field(grid, delta_z);
}

}  // namespace hardstop
