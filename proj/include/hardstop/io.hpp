#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardstop/contact.hpp"
#include "hardstop/engage.hpp"
#include "hardstop/errors.hpp"
#include "hardstop/spaces.hpp"
#include "hardstop/stress.hpp"
#include "hardstop/trajectory.hpp"

namespace hardstop {

/// All emitted numerics use a fixed nine-significant-digit format so that
/// repeated runs are byte-identical.
inline std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Round through the nine-digit wire format; applied to numbers destined for
/// JSON reports.
inline double round_sig9(double v) {
    return std::strtod(format_sig9(v).c_str(), nullptr);
}

inline nlohmann::json grid_to_json(const DirectionGrid& g) {
    return {{"n_alpha", g.n_alpha},
            {"n_sep", g.n_sep},
            {"delta_ref_mm", round_sig9(g.delta_ref)},
            {"theta_ref_deg", round_sig9(rad_to_deg(g.theta_ref))}};
}

// --- boundary fields ---------------------------------------------------------

inline void write_boundary_csv(std::ostream& out, const RadialBoundaryField& f) {
    out << "sep_deg,alpha_deg,radius_scaled,unbounded_flag\n";
    for (std::size_t j = 0; j < f.grid.n_sep; ++j)
        for (std::size_t i = 0; i < f.grid.n_alpha; ++i) {
            out << format_sig9(rad_to_deg(f.grid.sep(j))) << ','
                << format_sig9(rad_to_deg(f.grid.alpha(i))) << ',';
            if (f.is_unbounded(j, i))
                out << "inf,1\n";
            else
                out << format_sig9(f.radius(j, i)) << ",0\n";
        }
}

/// Rebuild a field from its CSV rows; the grid (including axis scalings,
/// which the CSV does not carry) must be supplied and must match the row
/// layout.
inline RadialBoundaryField read_boundary_csv(std::istream& in, const DirectionGrid& grid,
                                             FieldLabel label, double delta_z = 0.0,
                                             const std::string& name = "<stream>") {
    std::string line;
    if (!std::getline(in, line) ||
        detail::split_csv_row(line) !=
            std::vector<std::string>{"sep_deg", "alpha_deg", "radius_scaled", "unbounded_flag"})
        throw ConfigError(name + ": bad boundary CSV header");
    RadialBoundaryField f(grid, label, delta_z);
    std::size_t row = 1, n = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != 4)
            throw ConfigError(name + ": row " + std::to_string(row) + ": expected 4 columns");
        if (n >= grid.n_sep * grid.n_alpha)
            throw ConfigError(name + ": more rows than grid directions");
        const std::size_t j = n / grid.n_alpha, i = n % grid.n_alpha;
        const double sep = detail::parse_double(cells[0], row, "sep_deg");
        const double alpha = detail::parse_double(cells[1], row, "alpha_deg");
        if (std::abs(sep - rad_to_deg(grid.sep(j))) > 1e-6 ||
            std::abs(alpha - rad_to_deg(grid.alpha(i))) > 1e-6)
            throw ConfigError(name + ": row " + std::to_string(row) + ": direction does not match grid");
        const bool unb = cells[3] == "1";
        f.set(j, i, unb ? 0.0 : detail::parse_double(cells[2], row, "radius_scaled"), unb);
        ++n;
    }
    if (n != grid.n_sep * grid.n_alpha)
        throw ConfigError(name + ": fewer rows than grid directions");
    return f;
}

// --- stress heatmaps ---------------------------------------------------------

/// Signed-plane stress samples for one separation slice, in the same column
/// layout the tabulated ingestion reads.
inline void write_heatmap_csv(std::ostream& out, const StressModel& model, double slice_deg,
                              double delta_max_mm, double theta_max_deg, std::size_t resolution) {
    if (resolution < 2 || !(delta_max_mm > 0.0) || !(theta_max_deg > 0.0))
        throw ValidationError("heatmap: need resolution >= 2 and positive extents");
    out << "sep_deg,delta_signed_mm,theta_signed_deg,sigma_mpa\n";
    for (std::size_t a = 0; a < resolution; ++a) {
        const double d = -delta_max_mm + 2.0 * delta_max_mm * double(a) / double(resolution - 1);
        for (std::size_t b = 0; b < resolution; ++b) {
            const double t = -theta_max_deg + 2.0 * theta_max_deg * double(b) / double(resolution - 1);
            const double sep_eff = (d * t >= 0.0) ? slice_deg : 180.0 - slice_deg;
            const WorkspaceVector w(std::abs(d), deg_to_rad(std::abs(t)), deg_to_rad(sep_eff));
            double sigma;
            if (stress_in_hull(model, w)) {
                sigma = eval_stress(model, w);
                out << format_sig9(slice_deg) << ',' << format_sig9(d) << ',' << format_sig9(t) << ','
                    << format_sig9(sigma) << '\n';
            } else {
                out << format_sig9(slice_deg) << ',' << format_sig9(d) << ',' << format_sig9(t)
                    << ",nan\n";
            }
        }
    }
}

// --- trajectories ------------------------------------------------------------

/// Trajectory CSV: `cycle_pct,delta_a_mm,theta_a_deg,theta_sep_deg` with
/// optional trailing `delta_z_mm` and `fz_n` columns declared in the header.
inline Trajectory read_trajectory_csv(std::istream& in, const std::string& label,
                                      const std::string& name = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(name + ": empty trajectory file");
    const auto header = detail::split_csv_row(line);
    const std::vector<std::string> base{"cycle_pct", "delta_a_mm", "theta_a_deg", "theta_sep_deg"};
    if (header.size() < 4 || !std::equal(base.begin(), base.end(), header.begin()))
        throw ConfigError(name +
                          ": header must start with 'cycle_pct,delta_a_mm,theta_a_deg,theta_sep_deg'");
    int col_dz = -1, col_fz = -1;
    for (std::size_t c = 4; c < header.size(); ++c) {
        if (header[c] == "delta_z_mm" && col_dz < 0)
            col_dz = int(c);
        else if (header[c] == "fz_n" && col_fz < 0)
            col_fz = int(c);
        else
            throw ConfigError(name + ": unknown trajectory column '" + header[c] + "'");
    }

    Trajectory traj;
    traj.label = label;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != header.size())
            throw ConfigError(name + ": row " + std::to_string(row) + ": expected " +
                              std::to_string(header.size()) + " columns");
        TrajectorySample s;
        s.cycle_pct = detail::parse_double(cells[0], row, "cycle_pct");
        try {
            s.workspace = WorkspaceVector(detail::parse_double(cells[1], row, "delta_a_mm"),
                                          deg_to_rad(detail::parse_double(cells[2], row, "theta_a_deg")),
                                          deg_to_rad(detail::parse_double(cells[3], row, "theta_sep_deg")));
        } catch (const ValidationError& e) {
            throw ConfigError(name + ": row " + std::to_string(row) + ": " + e.what());
        }
        if (col_dz >= 0) s.delta_z = detail::parse_double(cells[col_dz], row, "delta_z_mm");
        if (col_fz >= 0) s.f_z = detail::parse_double(cells[col_fz], row, "fz_n");
        traj.samples.push_back(s);
    }
    try {
        traj.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(name + ": " + e.what());
    }
    return traj;
}

inline Trajectory read_trajectory_file(const std::string& path, const std::string& label) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trajectory file: " + path);
    return read_trajectory_csv(in, label, path);
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const bool has_dz = std::any_of(traj.samples.begin(), traj.samples.end(),
                                    [](const TrajectorySample& s) { return s.delta_z.has_value(); });
    const bool has_fz = std::any_of(traj.samples.begin(), traj.samples.end(),
                                    [](const TrajectorySample& s) { return s.f_z.has_value(); });
    out << "cycle_pct,delta_a_mm,theta_a_deg,theta_sep_deg";
    if (has_dz) out << ",delta_z_mm";
    if (has_fz) out << ",fz_n";
    out << '\n';
    for (const TrajectorySample& s : traj.samples) {
        out << format_sig9(s.cycle_pct) << ',' << format_sig9(s.workspace.delta_a) << ','
            << format_sig9(rad_to_deg(s.workspace.theta_a)) << ','
            << format_sig9(rad_to_deg(s.workspace.theta_sep));
        if (has_dz) out << ',' << format_sig9(s.delta_z.value_or(0.0));
        if (has_fz) out << ',' << format_sig9(s.f_z.value_or(0.0));
        out << '\n';
    }
}

// --- reports -----------------------------------------------------------------

inline void write_engagement_csv(std::ostream& out, const std::vector<EngagementRecord>& records) {
    out << "cycle_pct,delta_a_in_mm,theta_a_in_deg,theta_sep_deg,delta_a_clamped_mm,"
           "theta_a_clamped_deg,engaged,margin_scaled,sigma_unclamped_mpa,sigma_clamped_mpa\n";
    for (const EngagementRecord& r : records) {
        out << format_sig9(r.input.cycle_pct) << ',' << format_sig9(r.input.workspace.delta_a) << ','
            << format_sig9(rad_to_deg(r.input.workspace.theta_a)) << ','
            << format_sig9(rad_to_deg(r.input.workspace.theta_sep)) << ','
            << format_sig9(r.clamped.delta_a) << ',' << format_sig9(rad_to_deg(r.clamped.theta_a))
            << ',' << (r.engaged ? 1 : 0) << ','
            << (std::isfinite(r.margin) ? format_sig9(r.margin) : std::string("inf")) << ','
            << format_sig9(r.sigma_unclamped) << ',' << format_sig9(r.sigma_clamped) << '\n';
    }
}

inline nlohmann::json metrics_to_json(const SpaceMetrics& m, const DirectionGrid& grid) {
    return {{"vol_hs", round_sig9(m.vol_hs)},
            {"vol_sigma", round_sig9(m.vol_sigma)},
            {"phi_hs", round_sig9(m.phi_hs)},
            {"vol_unprotected", round_sig9(m.vol_unprotected)},
            {"vol_overprotected", round_sig9(m.vol_overprotected)},
            {"contained", m.contained},
            {"grid", grid_to_json(grid)}};
}

inline nlohmann::json containment_to_json(const ContainmentReport& rep) {
    nlohmann::json samples = nlohmann::json::array();
    for (const SampleMargin& s : rep.samples)
        samples.push_back({{"index", s.index},
                           {"cycle_pct", round_sig9(s.cycle_pct)},
                           {"margin_scaled", std::isfinite(s.margin) ? nlohmann::json(round_sig9(s.margin))
                                                                     : nlohmann::json("inf")},
                           {"inside", s.inside}});
    return {{"label", rep.label},
            {"pass", rep.pass},
            {"min_margin_scaled", std::isfinite(rep.min_margin)
                                      ? nlohmann::json(round_sig9(rep.min_margin))
                                      : nlohmann::json("inf")},
            {"samples", samples}};
}

}  // namespace hardstop
