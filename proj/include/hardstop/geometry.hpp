#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hardstop/errors.hpp"

namespace hardstop {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Row-major 3x3 matrix; just enough linear algebra for rigid rotations.
struct Mat3 {
    std::array<double, 9> a{};

    static Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }

    double operator()(int i, int j) const { return a[3 * i + j]; }
    double& operator()(int i, int j) { return a[3 * i + j]; }

    Vec3 apply(Vec3 v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }

    Mat3 transposed() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = (*this)(j, i);
        return m;
    }

    double det() const {
        return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
               a[2] * (a[3] * a[7] - a[4] * a[6]);
    }
};

inline Mat3 operator*(const Mat3& l, const Mat3& r) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += l(i, k) * r(k, j);
            m(i, j) = s;
        }
    return m;
}

/// Rigid motion of the free stage: in-plane/vertical translation (mm) plus an
/// axis-angle rotation vector (rad). The axial component theta.z is carried as
/// metadata only; contact kinematics ignore it.
struct SixDofMotion {
    Vec3 delta;  // (delta_x, delta_y, delta_z) mm
    Vec3 theta;  // (theta_x, theta_y, theta_z) rad, |theta| < pi
};

/// Protected-motion coordinates: translational deflection magnitude (mm),
/// angular deflection magnitude (rad) and the separation angle (rad) between
/// the in-plane translation and the rotated tilt vector.
struct WorkspaceVector {
    double delta_a = 0.0;    // mm, >= 0
    double theta_a = 0.0;    // rad, >= 0
    double theta_sep = 0.0;  // rad in [0, pi]; canonically 0 when delta_a*theta_a == 0

    WorkspaceVector() = default;

    WorkspaceVector(double delta, double theta, double sep) {
        if (!(std::isfinite(delta) && std::isfinite(theta) && std::isfinite(sep)))
            throw ValidationError("WorkspaceVector: non-finite component");
        if (delta < 0.0 || theta < 0.0)
            throw ValidationError("WorkspaceVector: magnitudes must be nonnegative");
        if (sep < -1e-12 || sep > kPi + 1e-12)
            throw ValidationError("WorkspaceVector: separation angle outside [0, pi]");
        delta_a = delta;
        theta_a = theta;
        theta_sep = (delta * theta > 0.0) ? std::clamp(sep, 0.0, kPi) : 0.0;
    }
};

/// Rotation about the horizontal tilt vector (tilt_x, tilt_y, 0), expanded in
/// closed form with a series fallback for small angles.
inline Mat3 rodrigues_rotation(Vec2 tilt) {
    const double t2 = tilt.x * tilt.x + tilt.y * tilt.y;
    const double t = std::sqrt(t2);
    if (!(t < kPi)) throw ValidationError("rodrigues_rotation: tilt magnitude must be < pi");

    double sa;  // sin(t)/t
    double sb;  // (1 - cos(t))/t^2
    if (t < 1e-8) {
        sa = 1.0 - t2 / 6.0;
        sb = 0.5 - t2 / 24.0;
    } else {
        sa = std::sin(t) / t;
        sb = (1.0 - std::cos(t)) / t2;
    }

    const double kx = tilt.x, ky = tilt.y;
    Mat3 r = Mat3::identity();
    // K = [[0,0,ky],[0,0,-kx],[-ky,kx,0]], K^2 = [[-ky^2, kx*ky, 0],[kx*ky, -kx^2, 0],[0,0,-t^2]]
    r(0, 0) += sb * (-ky * ky);
    r(0, 1) += sb * (kx * ky);
    r(0, 2) += sa * ky;
    r(1, 0) += sb * (kx * ky);
    r(1, 1) += sb * (-kx * kx);
    r(1, 2) += sa * (-kx);
    r(2, 0) += sa * (-ky);
    r(2, 1) += sa * kx;
    r(2, 2) += sb * (-t2);
    return r;
}

/// Right-hand 90 degree rotation of the tilt vector in the xy-plane; aligns
/// with the in-plane translation under pure shear or pure bending.
inline Vec2 perp_deflection(Vec2 tilt) { return {-tilt.y, tilt.x}; }

/// Project a six-DOF motion onto the protected-motion coordinates. delta_z and
/// theta_z are dropped (they are reported separately).
inline WorkspaceVector decompose_motion(const SixDofMotion& m) {
    const Vec2 dxy{m.delta.x, m.delta.y};
    const Vec2 perp = perp_deflection({m.theta.x, m.theta.y});
    const double da = dxy.norm();
    const double ta = perp.norm();
    double sep = 0.0;
    if (da > 0.0 && ta > 0.0) {
        const double c = std::clamp(dot(dxy, perp) / (da * ta), -1.0, 1.0);
        sep = std::acos(c);
    }
    return WorkspaceVector(da, ta, sep);
}

/// Rebuild a six-DOF motion from workspace coordinates. The azimuth fixes the
/// absolute direction of the in-plane translation, which the workspace
/// coordinates do not carry.
inline SixDofMotion compose_motion(const WorkspaceVector& w, double azimuth, double delta_z) {
    SixDofMotion m;
    m.delta = {w.delta_a * std::cos(azimuth), w.delta_a * std::sin(azimuth), delta_z};
    const double perp_angle = azimuth + w.theta_sep;
    const Vec2 perp{w.theta_a * std::cos(perp_angle), w.theta_a * std::sin(perp_angle)};
    // invert perp_deflection: (px, py) = (-ty, tx)
    m.theta = {perp.y, -perp.x, 0.0};
    return m;
}

/// Rigid transform of a stage material point: rotate about the anchor by the
/// tilt components, then translate. theta.z is ignored (surfaces of revolution
/// are insensitive to axial spin).
inline Vec3 transform_stage_point(Vec3 point, const SixDofMotion& m, Vec3 anchor) {
    const Mat3 r = rodrigues_rotation({m.theta.x, m.theta.y});
    return r.apply(point - anchor) + anchor + m.delta;
}

namespace detail {

/// Number of intervals in the cached polyline of a profile generator curve.
inline constexpr std::size_t kProfileTableIntervals = 4096;

/// Largest tolerated radial fold-back, as a fraction of the radial span.
/// Oblique generator curves curl back by a few microns at one rim; profiles
/// folding more than this are not usable as height fields and are rejected.
inline constexpr double kRadialBacktrackTol = 2e-3;

}  // namespace detail

/// Contact surface of revolution: the upper branch of an oblique ellipse in
/// the r-z half-plane, revolved about the z axis. z is measured from the
/// ellipse center. The generator curve is cached as a dense polyline so that
/// radial support, height lookups and closest-point queries are cheap.
class TorusCapProfile {
public:
    TorusCapProfile(double d_long, double d_short, double r_center, double theta_oblique,
                    std::optional<double> clip_diameter = std::nullopt)
        : d_l_(d_long), d_s_(d_short), r_c_(r_center), theta_o_(theta_oblique), clip_(clip_diameter) {
        if (!(d_l_ > 0.0) || !(d_s_ > 0.0))
            throw ValidationError("TorusCapProfile: ellipse axes must be positive");
        if (!(r_c_ > d_l_ / 2.0))
            throw ValidationError("TorusCapProfile: R_C must exceed d_L/2 (positive radius)");
        if (!(std::abs(theta_o_) < deg_to_rad(80.0)))
            throw ValidationError("TorusCapProfile: oblique angle out of range");
        if (clip_ && !(*clip_ > 0.0))
            throw ValidationError("TorusCapProfile: clip diameter must be positive");
        build_table();
    }

    double d_long() const { return d_l_; }
    double d_short() const { return d_s_; }
    double r_center() const { return r_c_; }
    double theta_oblique() const { return theta_o_; }
    std::optional<double> clip_diameter() const { return clip_; }

    double u_min() const { return r_c_ - d_l_ / 2.0; }
    double u_max() const { return r_c_ + d_l_ / 2.0; }

    /// Generator curve point (r, z) at parameter u in [u_min, u_max].
    std::array<double, 2> profile_point(double u) const {
        const double slack = 1e-12 * d_l_;
        if (u < u_min() - slack || u > u_max() + slack)
            throw ValidationError("profile_point: u outside generator range");
        const double w = std::clamp(u - r_c_, -d_l_ / 2.0, d_l_ / 2.0);
        const double q = std::sqrt(std::max(0.0, d_l_ * d_l_ / 4.0 - w * w));
        return point_from_wq(w, q);
    }

    /// Surface point at (u, v): the generator point revolved to azimuth v.
    Vec3 surface_point(double u, double v) const {
        const auto [r, z] = profile_point(u);
        return {r * std::cos(v), r * std::sin(v), z};
    }

    /// Generator point by ellipse angle phi in [0, pi]; phi = pi is the inner
    /// end (u_min), phi = 0 the outer end (u_max). Numerically stable near the
    /// rims where the sqrt form degenerates.
    std::array<double, 2> point_at_angle(double phi) const {
        const double w = (d_l_ / 2.0) * std::cos(phi);
        const double q = (d_l_ / 2.0) * std::sin(phi);
        return point_from_wq(w, q);
    }

    /// Radial extent of the (unclipped) revolved surface.
    double support_min() const { return r_lo_; }
    double support_max() const { return r_hi_; }

    /// Surface height above the ellipse center at radius r. r must lie inside
    /// [support_min, support_max].
    double height_at_radius(double r) const {
        if (r < r_lo_ - 1e-12 || r > r_hi_ + 1e-12)
            throw ValidationError("height_at_radius: radius outside support");
        const std::size_t k = bracket_index(r);
        return refine_height(k, r);
    }

    /// Penetration test in the surface's own (r, z) frame: -1 if the point
    /// lies below the height field within its radial support, +1 if above or
    /// radially outside. Exact except within ~1e-12 of the surface itself.
    int side_at(double r, double z) const {
        if (r < r_lo_ || r > r_hi_) return +1;
        const std::size_t k = bracket_index(r);
        // quick decision from the lerped polyline; the table deviates from the
        // exact curve by well under 1e-5, so only near-surface points need the
        // refined height
        const double zl = lerp_height(k, r);
        if (z > zl + 1e-4) return +1;
        if (z < zl - 1e-4) return -1;
        return z < refine_height(k, r) ? -1 : +1;
    }

    /// Penetration test for a world-space point against the surface placed
    /// with its ellipse center at height z_offset.
    int side_of(Vec3 p, double z_offset) const {
        return side_at(std::hypot(p.x, p.y), p.z - z_offset);
    }

    struct TableView {
        const std::vector<double>* r;
        const std::vector<double>* z;
        const std::vector<double>* phi;
    };
    TableView table() const { return {&tab_r_, &tab_z_, &tab_phi_}; }

private:
    std::array<double, 2> point_from_wq(double w, double q) const {
        const double r = w * std::cos(theta_o_) - (d_s_ / d_l_) * std::tan(theta_o_) * q + r_c_;
        const double z = w * std::sin(theta_o_) + (d_s_ / d_l_) * q;
        return {r, z};
    }

    void build_table() {
        const std::size_t m = detail::kProfileTableIntervals;
        tab_phi_.resize(m + 1);
        tab_r_.resize(m + 1);
        tab_z_.resize(m + 1);
        for (std::size_t k = 0; k <= m; ++k) {
            const double phi = kPi * (1.0 - double(k) / double(m));
            const auto [r, z] = point_at_angle(phi);
            tab_phi_[k] = phi;
            tab_r_[k] = r;
            tab_z_[k] = z;
        }
        r_lo_ = *std::min_element(tab_r_.begin(), tab_r_.end());
        r_hi_ = *std::max_element(tab_r_.begin(), tab_r_.end());
        if (!(r_lo_ > 0.0))
            throw ValidationError("TorusCapProfile: generator curve reaches nonpositive radius");
        if (!(tab_r_.back() > tab_r_.front()))
            throw ValidationError("TorusCapProfile: radial coordinate does not grow outward");

        double backtrack = 0.0;
        rmono_.resize(m + 1);
        double run = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= m; ++k) {
            if (k > 0) backtrack += std::max(0.0, tab_r_[k - 1] - tab_r_[k]);
            run = std::max(run, tab_r_[k]);
            rmono_[k] = run;
        }
        if (backtrack > detail::kRadialBacktrackTol * (r_hi_ - r_lo_))
            throw ValidationError(
                "TorusCapProfile: generator curve folds back radially; not representable as a "
                "height field");
    }

    /// Index k such that the radius r falls between table nodes k-1 and k of
    /// the monotone envelope (k >= 1).
    std::size_t bracket_index(double r) const {
        const auto it = std::lower_bound(rmono_.begin(), rmono_.end(), r);
        std::size_t k = std::size_t(it - rmono_.begin());
        if (k == 0) k = 1;
        if (k >= rmono_.size()) k = rmono_.size() - 1;
        return k;
    }

    double lerp_height(std::size_t k, double r) const {
        const double r0 = tab_r_[k - 1], r1 = tab_r_[k];
        if (std::abs(r1 - r0) < 1e-300) return tab_z_[k];
        const double t = std::clamp((r - r0) / (r1 - r0), 0.0, 1.0);
        return tab_z_[k - 1] + t * (tab_z_[k] - tab_z_[k - 1]);
    }

    /// Bisect the exact generator curve for the height at radius r inside
    /// table bracket k.
    double refine_height(std::size_t k, double r) const {
        double pa = tab_phi_[k - 1], pb = tab_phi_[k];
        double ra = tab_r_[k - 1];
        if ((ra - r) * (tab_r_[k] - r) > 0.0) return lerp_height(k, r);  // fold sliver
        for (int it = 0; it < 60; ++it) {
            const double pm = 0.5 * (pa + pb);
            const auto [rm, zm] = point_at_angle(pm);
            if ((ra - r) * (rm - r) <= 0.0) {
                pb = pm;
            } else {
                pa = pm;
                ra = rm;
            }
            if (std::abs(pb - pa) < 1e-15) return zm;
        }
        return point_at_angle(0.5 * (pa + pb))[1];
    }

    double d_l_, d_s_, r_c_, theta_o_;
    std::optional<double> clip_;
    std::vector<double> tab_phi_, tab_r_, tab_z_, rmono_;
    double r_lo_ = 0.0, r_hi_ = 0.0;
};

/// Stage/ground contact surface pair with their vertical arrangement. All
/// heights are measured with the stage ellipse center at z = 0: the ground
/// ellipse center sits at -z_ab, the rotation anchor at +z_oa, and the load
/// reference point z_lo above the anchor (metadata only).
struct HardStopPair {
    TorusCapProfile stage;
    TorusCapProfile ground;
    double z_ab;  // mm, vertical distance between ellipse centers
    double z_oa;  // mm, anchor height above the stage ellipse center
    double z_lo;  // mm, load reference point height above the anchor

    HardStopPair(TorusCapProfile stage_profile, TorusCapProfile ground_profile, double z_ab_mm,
                 double z_oa_mm, double z_lo_mm = 0.0)
        : stage(std::move(stage_profile)),
          ground(std::move(ground_profile)),
          z_ab(z_ab_mm),
          z_oa(z_oa_mm),
          z_lo(z_lo_mm) {
        if (!std::isfinite(z_ab) || !std::isfinite(z_oa) || !std::isfinite(z_lo))
            throw ValidationError("HardStopPair: non-finite vertical arrangement");
    }

    Vec3 anchor() const { return {0.0, 0.0, z_oa}; }
    double ground_z_offset() const { return -z_ab; }
};

/// Finite particle set covering the (clipped) stage surface in the undeformed
/// configuration.
struct SurfaceSample {
    std::vector<Vec3> points;
    double density = 0.0;  // achieved points per mm^2 of slant area
};

namespace detail {

/// Cumulative arc length of the generator polyline restricted to phi in
/// [phi_outer, pi], ordered inner (phi = pi) to outer.
struct ArcTable {
    std::vector<double> phi;  // descending from pi to phi_outer
    std::vector<double> s;    // cumulative arc length, s[0] = 0
};

inline ArcTable build_arc_table(const TorusCapProfile& p, double phi_outer) {
    ArcTable t;
    const auto tv = p.table();
    const auto& tphi = *tv.phi;
    t.phi.push_back(kPi);
    t.s.push_back(0.0);
    auto prev = p.point_at_angle(kPi);
    for (std::size_t k = 1; k < tphi.size(); ++k) {
        double phi = tphi[k];
        bool last = false;
        if (phi <= phi_outer) {
            phi = phi_outer;
            last = true;
        }
        const auto cur = p.point_at_angle(phi);
        const double ds = std::hypot(cur[0] - prev[0], cur[1] - prev[1]);
        t.phi.push_back(phi);
        t.s.push_back(t.s.back() + ds);
        prev = cur;
        if (last) break;
    }
    return t;
}

inline double arc_to_phi(const ArcTable& t, double s) {
    const auto it = std::lower_bound(t.s.begin(), t.s.end(), s);
    if (it == t.s.begin()) return t.phi.front();
    if (it == t.s.end()) return t.phi.back();
    const std::size_t k = std::size_t(it - t.s.begin());
    const double f = (s - t.s[k - 1]) / (t.s[k] - t.s[k - 1]);
    return t.phi[k - 1] + f * (t.phi[k] - t.phi[k - 1]);
}

}  // namespace detail

/// Sample the stage surface as a deterministic structured grid: generator rows
/// spaced by arc length, each revolved with a point count proportional to its
/// radius, so the areal density floor holds everywhere on the surface. When
/// the profile carries a clip diameter the sample is restricted to radii at or
/// below it, with the outermost row exactly on the clip circle.
inline SurfaceSample sample_stage_surface(const TorusCapProfile& p, double density_per_mm2 = 64.0,
                                          std::size_t min_points = 50000) {
    if (!(density_per_mm2 > 0.0))
        throw ValidationError("sample_stage_surface: density must be positive");

    double phi_outer = 0.0;
    if (p.clip_diameter()) {
        const double r_clip = *p.clip_diameter() / 2.0;
        if (r_clip < p.support_min())
            throw ValidationError("sample_stage_surface: clip removes the entire surface");
        if (r_clip < p.support_max()) {
            // outermost kept angle: walk the monotone envelope for r = r_clip
            double lo = 0.0, hi = kPi;  // r decreases as phi grows
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (p.point_at_angle(mid)[0] > r_clip ? lo : hi) = mid;
            }
            phi_outer = 0.5 * (lo + hi);
        }
    }

    const auto arc = detail::build_arc_table(p, phi_outer);
    const double total_arc = arc.s.back();
    if (!(total_arc > 0.0)) throw ValidationError("sample_stage_surface: degenerate profile");

    double spacing = 1.0 / std::sqrt(density_per_mm2);
    for (int attempt = 0; attempt < 64; ++attempt) {
        SurfaceSample out;
        const std::size_t n_rows = std::max<std::size_t>(2, std::size_t(std::ceil(total_arc / spacing)) + 1);
        const double row_step = total_arc / double(n_rows - 1);
        double area = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            const double s = double(i) * row_step;
            const double phi = detail::arc_to_phi(arc, s);
            const auto [r, z] = p.point_at_angle(phi);
            const double band = (i == 0 || i + 1 == n_rows) ? row_step / 2.0 : row_step;
            area += 2.0 * kPi * r * band;
            const std::size_t n_v = std::max<std::size_t>(8, std::size_t(std::ceil(2.0 * kPi * r / spacing)));
            const double v_off = (i % 2 == 0) ? 0.0 : 0.5;
            for (std::size_t j = 0; j < n_v; ++j) {
                const double v = 2.0 * kPi * (double(j) + v_off) / double(n_v);
                out.points.push_back({r * std::cos(v), r * std::sin(v), z});
            }
        }
        out.density = double(out.points.size()) / area;
        if (out.points.size() >= min_points && out.density >= density_per_mm2) return out;
        // undershoot: tighten the spacing toward both floors and resample
        double shrink = 0.95;
        if (out.points.size() < min_points)
            shrink = std::min(shrink, std::sqrt(double(out.points.size()) / double(min_points)));
        if (out.density < density_per_mm2)
            shrink = std::min(shrink, std::sqrt(out.density / density_per_mm2));
        spacing *= 0.999 * shrink;
    }
    throw NumericError("sample_stage_surface: sampling failed to reach requested density");
}

}  // namespace hardstop
