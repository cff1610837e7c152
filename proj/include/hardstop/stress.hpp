#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "hardstop/contact.hpp"
#include "hardstop/errors.hpp"
#include "hardstop/geometry.hpp"

namespace hardstop {

/// Stress law sigma = R1*delta_a + R2*theta_a in external units (mm, deg).
struct LinearSuperposition {
    double r_delta;  // MPa per mm
    double r_theta;  // MPa per deg

    LinearSuperposition(double rd, double rt) : r_delta(rd), r_theta(rt) {
        if (!(rd > 0.0) || !(rt > 0.0))
            throw ValidationError("LinearSuperposition: coefficients must be positive");
    }
};

/// Stress determined by the scaled radius of the motion vector.
struct RadialStress {
    double r_prime;                  // MPa per scaled unit
    double delta_ref = 1.0;          // mm per unit
    double theta_ref = kPi / 180.0;  // rad per unit

    explicit RadialStress(double rp, double dref = 1.0, double tref = kPi / 180.0)
        : r_prime(rp), delta_ref(dref), theta_ref(tref) {
        if (!(rp > 0.0) || !(dref > 0.0) || !(tref > 0.0))
            throw ValidationError("RadialStress: coefficients must be positive");
    }
};

/// Clamped-root circular beam with prescribed tip translation and tip slope:
/// the cubic deflection shape gives root and tip bending moments
///   M_root = (EI/L^2) (6 d - 2 L s),  M_tip = (EI/L^2) (-6 d + 4 L s)
/// as planar vectors (d = tip translation, s = tip slope vector at the
/// separation angle from d). The reported stress adds the axial term:
///   sigma = F_z/A + max(|M_root|, |M_tip|) * (d/2) / I.
/// Second-order (P-delta) effects and shear stress are not modeled.
struct CantileverBeam {
    double length;       // mm
    double modulus;      // MPa
    double diameter;     // mm
    double axial_force;  // N, tension positive

    CantileverBeam(double l, double e, double d, double fz)
        : length(l), modulus(e), diameter(d), axial_force(fz) {
        if (!(l > 0.0) || !(e > 0.0) || !(d > 0.0))
            throw ValidationError("CantileverBeam: dimensions and modulus must be positive");
    }

    double area() const { return kPi * diameter * diameter / 4.0; }
    double second_moment() const { return kPi * std::pow(diameter, 4) / 64.0; }
};

/// Stress samples on signed deflection planes, one rectangular grid per
/// separation-angle slice; bilinear in-plane, linear across slices.
class TabulatedStress {
public:
    struct Slice {
        double sep;                  // rad, in [0, pi/2]
        std::vector<double> deltas;  // mm, ascending, signed
        std::vector<double> thetas;  // deg, ascending, signed
        std::vector<double> sigma;   // MPa, deltas-major: sigma[di * thetas.size() + ti]

        double value(std::size_t di, std::size_t ti) const { return sigma[di * thetas.size() + ti]; }
    };

    TabulatedStress(std::vector<Slice> slices, double f_z = 0.0, double theta_z_preload = 0.0)
        : slices_(std::move(slices)), f_z_(f_z), theta_z_preload_(theta_z_preload) {
        if (slices_.empty()) throw ValidationError("TabulatedStress: no slices");
        for (std::size_t i = 1; i < slices_.size(); ++i)
            if (!(slices_[i].sep > slices_[i - 1].sep))
                throw ValidationError("TabulatedStress: slices must be strictly ascending in sep");
        for (const Slice& s : slices_) {
            if (s.deltas.size() < 2 || s.thetas.size() < 2)
                throw ValidationError("TabulatedStress: each slice needs at least a 2x2 grid");
            if (s.sigma.size() != s.deltas.size() * s.thetas.size())
                throw ValidationError("TabulatedStress: slice grid is not rectangular");
        }
    }

    double f_z() const { return f_z_; }
    double theta_z_preload() const { return theta_z_preload_; }
    const std::vector<Slice>& slices() const { return slices_; }

    /// Map a workspace vector onto its canonical signed-plane representative:
    /// acute separations land in the first quadrant of their own slice,
    /// obtuse ones in the fourth quadrant of the supplementary slice.
    struct PlanePoint {
        double sep;    // rad in [0, pi/2]
        double delta;  // mm, here always >= 0
        double theta;  // deg, signed
    };
    static PlanePoint plane_point(const WorkspaceVector& w) {
        const double theta_deg = rad_to_deg(w.theta_a);
        if (w.theta_sep <= kPi / 2.0) return {w.theta_sep, w.delta_a, theta_deg};
        return {kPi - w.theta_sep, w.delta_a, -theta_deg};
    }

    /// On-axis vectors carry a canonical zero separation that is immaterial;
    /// serve them from whatever slice range is available.
    PlanePoint usable_plane_point(const WorkspaceVector& w) const {
        PlanePoint p = plane_point(w);
        if (w.delta_a == 0.0 || w.theta_a == 0.0)
            p.sep = std::clamp(p.sep, slices_.front().sep, slices_.back().sep);
        return p;
    }

    bool in_hull(const WorkspaceVector& w) const {
        const PlanePoint p = usable_plane_point(w);
        if (p.sep < slices_.front().sep - 1e-12 || p.sep > slices_.back().sep + 1e-12) return false;
        const auto [j0, j1, t] = slice_bracket(p.sep);
        (void)t;
        return slice_contains(slices_[j0], p) && slice_contains(slices_[j1], p);
    }

    double eval(const WorkspaceVector& w) const {
        const PlanePoint p = usable_plane_point(w);
        if (p.sep < slices_.front().sep - 1e-12 || p.sep > slices_.back().sep + 1e-12)
            throw NumericError("tabulated stress: separation angle outside the data slices");
        const auto [j0, j1, t] = slice_bracket(p.sep);
        const double v0 = bilinear(slices_[j0], p);
        if (j0 == j1) return v0;
        const double v1 = bilinear(slices_[j1], p);
        return v0 + t * (v1 - v0);
    }

private:
    std::tuple<std::size_t, std::size_t, double> slice_bracket(double sep) const {
        if (slices_.size() == 1 || sep <= slices_.front().sep) return {0, 0, 0.0};
        if (sep >= slices_.back().sep) return {slices_.size() - 1, slices_.size() - 1, 0.0};
        std::size_t hi = 1;
        while (slices_[hi].sep < sep) ++hi;
        const std::size_t lo = hi - 1;
        const double t = (sep - slices_[lo].sep) / (slices_[hi].sep - slices_[lo].sep);
        return {lo, hi, t};
    }

    static bool slice_contains(const Slice& s, const PlanePoint& p) {
        const double dspan = s.deltas.back() - s.deltas.front();
        const double tspan = s.thetas.back() - s.thetas.front();
        return p.delta >= s.deltas.front() - 1e-12 * dspan &&
               p.delta <= s.deltas.back() + 1e-12 * dspan &&
               p.theta >= s.thetas.front() - 1e-12 * tspan &&
               p.theta <= s.thetas.back() + 1e-12 * tspan;
    }

    static std::pair<std::size_t, double> axis_locate(const std::vector<double>& ax, double x,
                                                      const char* what) {
        const double span = ax.back() - ax.front();
        if (x < ax.front() - 1e-12 * span || x > ax.back() + 1e-12 * span)
            throw NumericError(std::string("tabulated stress: ") + what + " outside the data hull");
        if (x <= ax.front()) return {0, 0.0};
        if (x >= ax.back()) return {ax.size() - 2, 1.0};
        std::size_t i = 1;
        while (ax[i] < x) ++i;
        return {i - 1, (x - ax[i - 1]) / (ax[i] - ax[i - 1])};
    }

    static double bilinear(const Slice& s, const PlanePoint& p) {
        const auto [di, fd] = axis_locate(s.deltas, p.delta, "translational deflection");
        const auto [ti, ft] = axis_locate(s.thetas, p.theta, "angular deflection");
        const double v00 = s.value(di, ti), v01 = s.value(di, ti + 1);
        const double v10 = s.value(di + 1, ti), v11 = s.value(di + 1, ti + 1);
        return (1 - fd) * ((1 - ft) * v00 + ft * v01) + fd * ((1 - ft) * v10 + ft * v11);
    }

    std::vector<Slice> slices_;
    double f_z_;
    double theta_z_preload_;
};

using StressModel = std::variant<LinearSuperposition, RadialStress, CantileverBeam, TabulatedStress>;

/// Critical stress levels; the fatigue limit guards cyclic life, the yield
/// limit guards one-off overloads.
struct StressThresholds {
    double fatigue_limit = 480.0;  // MPa
    double yield_limit = 880.0;    // MPa

    StressThresholds() = default;
    StressThresholds(double fatigue, double yield) : fatigue_limit(fatigue), yield_limit(yield) {
        if (!(fatigue > 0.0) || fatigue > yield)
            throw ValidationError("StressThresholds: need 0 < fatigue <= yield");
    }
};

/// Maximum internal stress for a protected-motion vector.
inline double eval_stress(const StressModel& model, const WorkspaceVector& w) {
    struct Visitor {
        const WorkspaceVector& w;

        double operator()(const LinearSuperposition& m) const {
            return m.r_delta * w.delta_a + m.r_theta * rad_to_deg(w.theta_a);
        }
        double operator()(const RadialStress& m) const {
            return m.r_prime * std::hypot(w.delta_a / m.delta_ref, w.theta_a / m.theta_ref);
        }
        double operator()(const CantileverBeam& m) const {
            const double c = std::cos(w.theta_sep), s = std::sin(w.theta_sep);
            const Vec2 d{w.delta_a, 0.0};
            const Vec2 slope{w.theta_a * c, w.theta_a * s};
            const double l = m.length;
            const Vec2 root{6.0 * d.x - 2.0 * l * slope.x, -2.0 * l * slope.y};
            const Vec2 tip{-6.0 * d.x + 4.0 * l * slope.x, 4.0 * l * slope.y};
            const double ei_l2 = m.modulus * m.second_moment() / (l * l);
            const double m_max = ei_l2 * std::max(root.norm(), tip.norm());
            return m.axial_force / m.area() + m_max * (m.diameter / 2.0) / m.second_moment();
        }
        double operator()(const TabulatedStress& m) const { return m.eval(w); }
    };
    return std::visit(Visitor{w}, model);
}

/// Whether the model can be evaluated at w (always true for analytic models).
inline bool stress_in_hull(const StressModel& model, const WorkspaceVector& w) {
    if (const auto* t = std::get_if<TabulatedStress>(&model)) return t->in_hull(w);
    return true;
}

/// Smallest radius along a grid direction at which the stress reaches
/// sigma_cr. Tabulated models are searched only within their data hull; a ray
/// that leaves the hull below threshold is reported unbounded rather than
/// extrapolated.
inline detail::RadialSearchResult safe_radius_along_ray(const StressModel& model, double sigma_cr,
                                                        const DirectionGrid& grid, double alpha_rad,
                                                        double sep_rad, double r_max, double tol,
                                                        int audit_points = 16) {
    if (eval_stress(model, WorkspaceVector{}) >= sigma_cr)
        throw ValidationError("stress: base stress at zero motion already reaches the threshold");

    double r_hull = r_max;
    if (!stress_in_hull(model, grid.workspace_at(alpha_rad, sep_rad, r_max))) {
        double lo = 0.0, hi = r_max;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (stress_in_hull(model, grid.workspace_at(alpha_rad, sep_rad, mid)) ? lo : hi) = mid;
        }
        r_hull = lo;
        if (!(r_hull > 0.0))
            throw NumericError("stress: data hull is empty along the requested direction");
    }

    auto past = [&](double k) {
        return eval_stress(model, grid.workspace_at(alpha_rad, sep_rad, k)) >= sigma_cr;
    };
    auto res = detail::radial_boundary_search(past, r_hull, tol, audit_points);
    if (res.unbounded) res.radius = r_hull;
    return res;
}

/// Options for safe-space extraction (scaled units).
struct StressBoundaryOptions {
    double r_max_scaled = 50.0;
    double tol_scaled = 1e-6;
    int audit_points = 16;
};

/// Critical-stress boundary over a full direction grid.
inline RadialBoundaryField safe_boundary_field(const StressModel& model, double sigma_cr,
                                               const DirectionGrid& grid, double delta_z = 0.0,
                                               const StressBoundaryOptions& opt = {}) {
    grid.validate();
    RadialBoundaryField field(grid, FieldLabel::safe_stress, delta_z);
    for (std::size_t j = 0; j < grid.n_sep; ++j) {
        for (std::size_t i = 0; i < grid.n_alpha; ++i) {
            const auto res = safe_radius_along_ray(model, sigma_cr, grid, grid.alpha(i), grid.sep(j),
                                                   opt.r_max_scaled, opt.tol_scaled, opt.audit_points);
            field.set(j, i, res.radius, res.unbounded);
            if (res.warned) field.warnings.push_back({j, i});
        }
    }
    return field;
}

/// Linearized load-to-motion map: a 6x6 compliance matrix applied to
/// (F_x, F_y, F_z, M_x, M_y, M_z), yielding translations (mm) and the
/// axis-angle rotation vector (rad).
struct ComplianceMatrix {
    std::array<double, 36> c{};

    double operator()(int i, int j) const { return c[6 * i + j]; }
    double& operator()(int i, int j) { return c[6 * i + j]; }
};

inline SixDofMotion compliance_map(const ComplianceMatrix& cm, const std::array<double, 6>& load) {
    std::array<double, 6> u{};
    for (int i = 0; i < 6; ++i) {
        double s = 0.0;
        for (int j = 0; j < 6; ++j) s += cm(i, j) * load[j];
        if (!std::isfinite(s)) throw ValidationError("compliance_map: non-finite motion component");
        u[i] = s;
    }
    SixDofMotion m;
    m.delta = {u[0], u[1], u[2]};
    m.theta = {u[3], u[4], u[5]};
    return m;
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t row, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("row " + std::to_string(row) + ": cannot parse " + what + " from '" + s + "'");
    }
}

}  // namespace detail

/// Parse a tabulated stress grid from CSV with the fixed header
/// `sep_deg,delta_signed_mm,theta_signed_deg,sigma_mpa`. Every slice must form
/// a complete rectangular grid; gaps, duplicates and ragged grids are reported
/// with row numbers.
inline TabulatedStress load_tabulated_grid(std::istream& in, const std::string& name = "<stream>",
                                           double f_z = 0.0, double theta_z_preload = 0.0) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(name + ": empty tabulated grid file");
    {
        const auto header = detail::split_csv_row(line);
        const std::vector<std::string> want{"sep_deg", "delta_signed_mm", "theta_signed_deg",
                                            "sigma_mpa"};
        if (std::vector<std::string>(header.begin(), header.end()) != want)
            throw ConfigError(name + ": header must be 'sep_deg,delta_signed_mm,theta_signed_deg,sigma_mpa'");
    }

    struct Key {
        double d, t;
        bool operator<(const Key& o) const { return d < o.d || (d == o.d && t < o.t); }
    };
    std::map<double, std::map<Key, std::pair<double, std::size_t>>> by_sep;  // value, row
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != 4)
            throw ConfigError(name + ": row " + std::to_string(row) + ": expected 4 columns, got " +
                              std::to_string(cells.size()));
        const double sep = detail::parse_double(cells[0], row, "sep_deg");
        const double d = detail::parse_double(cells[1], row, "delta_signed_mm");
        const double t = detail::parse_double(cells[2], row, "theta_signed_deg");
        const double sg = detail::parse_double(cells[3], row, "sigma_mpa");
        if (sep < 0.0 || sep > 90.0)
            throw ConfigError(name + ": row " + std::to_string(row) + ": sep_deg must lie in [0, 90]");
        auto [it, inserted] = by_sep[sep].emplace(Key{d, t}, std::make_pair(sg, row));
        if (!inserted)
            throw ConfigError(name + ": row " + std::to_string(row) + ": duplicate node (sep " +
                              cells[0] + ", delta " + cells[1] + ", theta " + cells[2] +
                              "), first seen at row " + std::to_string(it->second.second));
    }
    if (by_sep.empty()) throw ConfigError(name + ": no data rows");

    std::vector<TabulatedStress::Slice> slices;
    for (auto& [sep, nodes] : by_sep) {
        TabulatedStress::Slice s;
        s.sep = deg_to_rad(sep);
        std::vector<double> ds, ts;
        for (const auto& [k, v] : nodes) {
            if (ds.empty() || ds.back() != k.d) ds.push_back(k.d);
        }
        for (const auto& [k, v] : nodes) {
            if (std::find(ts.begin(), ts.end(), k.t) == ts.end()) ts.push_back(k.t);
        }
        std::sort(ts.begin(), ts.end());
        s.deltas = ds;
        s.thetas = ts;
        s.sigma.resize(ds.size() * ts.size());
        if (nodes.size() != ds.size() * ts.size())
            throw ConfigError(name + ": slice sep=" + std::to_string(sep) + " has " +
                              std::to_string(nodes.size()) + " nodes, expected " +
                              std::to_string(ds.size() * ts.size()) + " for a rectangular grid");
        for (std::size_t di = 0; di < ds.size(); ++di)
            for (std::size_t ti = 0; ti < ts.size(); ++ti) {
                const auto it = nodes.find(Key{ds[di], ts[ti]});
                if (it == nodes.end())
                    throw ConfigError(name + ": slice sep=" + std::to_string(sep) +
                                      " is missing node (delta " + std::to_string(ds[di]) +
                                      ", theta " + std::to_string(ts[ti]) + ")");
                s.sigma[di * ts.size() + ti] = it->second.first;
            }
        slices.push_back(std::move(s));
    }
    return TabulatedStress(std::move(slices), f_z, theta_z_preload);
}

inline TabulatedStress load_tabulated_grid_file(const std::string& path, double f_z = 0.0,
                                                double theta_z_preload = 0.0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated grid file: " + path);
    return load_tabulated_grid(in, path, f_z, theta_z_preload);
}

}  // namespace hardstop
