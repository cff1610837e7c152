#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardstop/contact.hpp"
#include "hardstop/errors.hpp"
#include "hardstop/io.hpp"
#include "hardstop/optimize.hpp"
#include "hardstop/stress.hpp"

namespace hardstop {

/// Which analytic or tabulated stress law a run uses.
enum class StressKind : std::uint8_t { linear_superposition, radial, cantilever_beam, tabulated };

struct StressConfig {
    StressKind kind = StressKind::radial;
    // linear_superposition
    double r_delta_mpa_per_mm = 0.0;
    double r_theta_mpa_per_deg = 0.0;
    // radial
    double r_prime_mpa_per_unit = 0.0;
    // cantilever_beam
    double length_mm = 0.0;
    double modulus_mpa = 0.0;
    double diameter_mm = 0.0;
    double axial_force_n = 0.0;
    // tabulated
    std::string fatigue_csv;
    std::string yield_csv;  // optional; fatigue grid serves both when empty
    double tab_f_z_n = 0.0;
    double tab_theta_z_deg = 0.0;

    StressThresholds thresholds;
};

struct StressMapConfig {
    std::vector<double> slices_deg{0.0, 30.0, 60.0, 90.0};
    double delta_max_mm = 0.0;
    double theta_max_deg = 0.0;
    std::size_t resolution = 101;
};

struct SurgeConfig {
    double peak_multiplier = 3.0;
    double width_steps = 13.0;
    std::optional<double> center_pct;  // defaults to the normal arm's peak-stress step
};

struct SimulationConfig {
    std::string trajectory;  // label of an entry in trajectories
    SurgeConfig surge;
};

struct OptimizationConfig {
    std::vector<DesignVariable> variables;  // bounds in external units (mm, deg)
    double penalty_weight = 100.0;
    std::size_t max_evals = 2000;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::optional<std::size_t> search_n_alpha;
    std::optional<std::size_t> search_n_sep;
    double unprotected_cap = 1e-3;
    bool include_yield_target = false;
};

struct TrajectoryRef {
    std::string label;
    std::string path;
};

/// Fully resolved run configuration. All external values are mm / deg / MPa /
/// N; conversion to internal radians happens exactly once, here.
struct RunConfig {
    std::optional<PairParams> geometry;
    double sampling_density = 64.0;
    std::size_t sampling_min_points = 50000;
    std::size_t n_alpha = 72;
    std::size_t n_sep = 4;
    double delta_ref_mm = 1.0;
    double theta_ref_deg = 1.0;
    double delta_z_mm = 0.0;
    double contact_r_max_scaled = 0.0;  // <= 0: auto
    double contact_tol_scaled = 1e-4;
    int contact_audit_points = 16;
    double stress_r_max_scaled = 50.0;
    double stress_tol_scaled = 1e-6;
    std::optional<StressConfig> stress;
    std::vector<TrajectoryRef> trajectories;
    std::optional<StressMapConfig> stress_map;
    std::optional<OptimizationConfig> optimization;
    std::optional<SimulationConfig> simulation;
    std::string output_dir = "out";

    DirectionGrid grid() const {
        return DirectionGrid(n_alpha, n_sep, delta_ref_mm, deg_to_rad(theta_ref_deg));
    }
    ContactOptions contact_options() const {
        return {sampling_density, sampling_min_points, contact_r_max_scaled, contact_tol_scaled,
                contact_audit_points};
    }
    StressBoundaryOptions stress_options() const {
        return {stress_r_max_scaled, stress_tol_scaled, contact_audit_points};
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(path + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

template <typename T>
T require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing required key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

inline ProfileParams parse_profile(const json& j, const std::string& path, bool allow_clip) {
    check_keys(j, path, {"d_l_mm", "d_s_mm", "r_c_mm", "theta_o_deg", "clip_diameter_mm"});
    ProfileParams p;
    p.d_l = require<double>(j, path, "d_l_mm");
    p.d_s = require<double>(j, path, "d_s_mm");
    p.r_c = require<double>(j, path, "r_c_mm");
    p.theta_o_deg = get_or<double>(j, path, "theta_o_deg", 0.0);
    if (j.contains("clip_diameter_mm")) {
        if (!allow_clip) throw ConfigError(path + ": clip_diameter_mm applies to the stage only");
        p.clip_diameter = require<double>(j, path, "clip_diameter_mm");
    }
    return p;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::get_or;
    using detail::require;

    check_keys(j, "config",
               {"schema_version", "geometry", "sampling", "grid", "delta_z_mm", "contact", "stress",
                "trajectories", "stress_map", "optimization", "simulation", "output_dir"});
    const int version = require<int>(j, "config", "schema_version");
    if (version != 1) throw ConfigError("config: unsupported schema_version " + std::to_string(version));

    RunConfig cfg;

    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        check_keys(g, "geometry", {"stage", "ground", "z_ab_mm", "z_oa_mm", "z_lo_mm"});
        PairParams p;
        p.stage = detail::parse_profile(require<nlohmann::json>(g, "geometry", "stage"),
                                        "geometry.stage", true);
        p.ground = detail::parse_profile(require<nlohmann::json>(g, "geometry", "ground"),
                                         "geometry.ground", false);
        p.z_ab = require<double>(g, "geometry", "z_ab_mm");
        p.z_oa = require<double>(g, "geometry", "z_oa_mm");
        p.z_lo = get_or<double>(g, "geometry", "z_lo_mm", 0.0);
        cfg.geometry = p;
    }

    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        check_keys(s, "sampling", {"density_per_mm2", "min_points"});
        cfg.sampling_density = get_or<double>(s, "sampling", "density_per_mm2", 64.0);
        cfg.sampling_min_points = get_or<std::size_t>(s, "sampling", "min_points", 50000);
    }

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "grid", {"n_alpha", "n_sep", "delta_ref_mm", "theta_ref_deg"});
        cfg.n_alpha = get_or<std::size_t>(g, "grid", "n_alpha", 72);
        cfg.n_sep = get_or<std::size_t>(g, "grid", "n_sep", 4);
        cfg.delta_ref_mm = get_or<double>(g, "grid", "delta_ref_mm", 1.0);
        cfg.theta_ref_deg = get_or<double>(g, "grid", "theta_ref_deg", 1.0);
    }

    cfg.delta_z_mm = get_or<double>(j, "config", "delta_z_mm", 0.0);

    if (j.contains("contact")) {
        const auto& c = j.at("contact");
        check_keys(c, "contact", {"r_max_scaled", "tol_scaled", "audit_points"});
        cfg.contact_r_max_scaled = get_or<double>(c, "contact", "r_max_scaled", 0.0);
        cfg.contact_tol_scaled = get_or<double>(c, "contact", "tol_scaled", 1e-4);
        cfg.contact_audit_points = get_or<int>(c, "contact", "audit_points", 16);
    }

    if (j.contains("stress")) {
        const auto& s = j.at("stress");
        check_keys(s, "stress",
                   {"model", "r_delta_mpa_per_mm", "r_theta_mpa_per_deg", "r_prime_mpa_per_unit",
                    "length_mm", "modulus_mpa", "diameter_mm", "axial_force_n", "fatigue_csv",
                    "yield_csv", "f_z_n", "theta_z_deg", "thresholds", "r_max_scaled", "tol_scaled"});
        StressConfig sc;
        const std::string kind = require<std::string>(s, "stress", "model");
        if (kind == "linear_superposition") {
            sc.kind = StressKind::linear_superposition;
            sc.r_delta_mpa_per_mm = require<double>(s, "stress", "r_delta_mpa_per_mm");
            sc.r_theta_mpa_per_deg = require<double>(s, "stress", "r_theta_mpa_per_deg");
        } else if (kind == "radial") {
            sc.kind = StressKind::radial;
            sc.r_prime_mpa_per_unit = require<double>(s, "stress", "r_prime_mpa_per_unit");
        } else if (kind == "cantilever_beam") {
            sc.kind = StressKind::cantilever_beam;
            sc.length_mm = require<double>(s, "stress", "length_mm");
            sc.modulus_mpa = require<double>(s, "stress", "modulus_mpa");
            sc.diameter_mm = require<double>(s, "stress", "diameter_mm");
            sc.axial_force_n = get_or<double>(s, "stress", "axial_force_n", 0.0);
        } else if (kind == "tabulated") {
            sc.kind = StressKind::tabulated;
            sc.fatigue_csv = require<std::string>(s, "stress", "fatigue_csv");
            sc.yield_csv = get_or<std::string>(s, "stress", "yield_csv", "");
            sc.tab_f_z_n = get_or<double>(s, "stress", "f_z_n", 0.0);
            sc.tab_theta_z_deg = get_or<double>(s, "stress", "theta_z_deg", 0.0);
        } else {
            throw ConfigError("stress.model: unknown model '" + kind + "'");
        }
        if (s.contains("thresholds")) {
            const auto& t = s.at("thresholds");
            check_keys(t, "stress.thresholds", {"fatigue_mpa", "yield_mpa"});
            sc.thresholds = StressThresholds(get_or<double>(t, "stress.thresholds", "fatigue_mpa", 480.0),
                                             get_or<double>(t, "stress.thresholds", "yield_mpa", 880.0));
        }
        cfg.stress_r_max_scaled = get_or<double>(s, "stress", "r_max_scaled", 50.0);
        cfg.stress_tol_scaled = get_or<double>(s, "stress", "tol_scaled", 1e-6);
        cfg.stress = sc;
    }

    if (j.contains("trajectories")) {
        const auto& arr = j.at("trajectories");
        if (!arr.is_array()) throw ConfigError("trajectories: expected an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string path = "trajectories[" + std::to_string(k) + "]";
            check_keys(arr[k], path, {"label", "path"});
            cfg.trajectories.push_back(
                {require<std::string>(arr[k], path, "label"), require<std::string>(arr[k], path, "path")});
        }
    }

    if (j.contains("stress_map")) {
        const auto& m = j.at("stress_map");
        check_keys(m, "stress_map", {"slices_deg", "delta_max_mm", "theta_max_deg", "resolution"});
        StressMapConfig mc;
        mc.slices_deg = get_or<std::vector<double>>(m, "stress_map", "slices_deg",
                                                    std::vector<double>{0.0, 30.0, 60.0, 90.0});
        mc.delta_max_mm = require<double>(m, "stress_map", "delta_max_mm");
        mc.theta_max_deg = require<double>(m, "stress_map", "theta_max_deg");
        mc.resolution = get_or<std::size_t>(m, "stress_map", "resolution", 101);
        for (double s : mc.slices_deg)
            if (s < 0.0 || s > 90.0)
                throw ConfigError("stress_map.slices_deg: slices must lie in [0, 90]");
        cfg.stress_map = mc;
    }

    if (j.contains("optimization")) {
        const auto& o = j.at("optimization");
        check_keys(o, "optimization",
                   {"variables", "penalty_weight", "max_evals", "seeds", "search_n_alpha",
                    "search_n_sep", "unprotected_cap", "include_yield_target"});
        OptimizationConfig oc;
        const auto& vars = o.at("variables");
        if (!vars.is_array() || vars.empty())
            throw ConfigError("optimization.variables: expected a non-empty array");
        for (std::size_t k = 0; k < vars.size(); ++k) {
            const std::string path = "optimization.variables[" + std::to_string(k) + "]";
            check_keys(vars[k], path, {"name", "lo", "hi"});
            oc.variables.push_back({require<std::string>(vars[k], path, "name"),
                                    require<double>(vars[k], path, "lo"),
                                    require<double>(vars[k], path, "hi")});
        }
        oc.penalty_weight = get_or<double>(o, "optimization", "penalty_weight", 100.0);
        oc.max_evals = get_or<std::size_t>(o, "optimization", "max_evals", 2000);
        oc.seeds = get_or<std::vector<std::uint64_t>>(o, "optimization", "seeds", {1, 2, 3});
        if (o.contains("search_n_alpha"))
            oc.search_n_alpha = require<std::size_t>(o, "optimization", "search_n_alpha");
        if (o.contains("search_n_sep"))
            oc.search_n_sep = require<std::size_t>(o, "optimization", "search_n_sep");
        oc.unprotected_cap = get_or<double>(o, "optimization", "unprotected_cap", 1e-3);
        oc.include_yield_target = get_or<bool>(o, "optimization", "include_yield_target", false);
        cfg.optimization = oc;
    }

    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        check_keys(s, "simulation", {"trajectory", "surge"});
        SimulationConfig sim;
        sim.trajectory = require<std::string>(s, "simulation", "trajectory");
        if (s.contains("surge")) {
            const auto& g = s.at("surge");
            check_keys(g, "simulation.surge", {"peak_multiplier", "width_steps", "center_pct"});
            sim.surge.peak_multiplier = get_or<double>(g, "simulation.surge", "peak_multiplier", 3.0);
            sim.surge.width_steps = get_or<double>(g, "simulation.surge", "width_steps", 13.0);
            if (g.contains("center_pct"))
                sim.surge.center_pct = require<double>(g, "simulation.surge", "center_pct");
        }
        cfg.simulation = sim;
    }

    cfg.output_dir = get_or<std::string>(j, "config", "output_dir", "out");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": JSON parse error: " + e.what());
    }
    return parse_run_config(j);
}

/// Serialize the effective configuration (after defaults) for the output
/// directory echo.
inline nlohmann::json effective_config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = 1;
    if (cfg.geometry) {
        const PairParams& p = *cfg.geometry;
        nlohmann::json stage{{"d_l_mm", p.stage.d_l},
                             {"d_s_mm", p.stage.d_s},
                             {"r_c_mm", p.stage.r_c},
                             {"theta_o_deg", p.stage.theta_o_deg}};
        if (p.stage.clip_diameter) stage["clip_diameter_mm"] = *p.stage.clip_diameter;
        j["geometry"] = {{"stage", stage},
                         {"ground",
                          {{"d_l_mm", p.ground.d_l},
                           {"d_s_mm", p.ground.d_s},
                           {"r_c_mm", p.ground.r_c},
                           {"theta_o_deg", p.ground.theta_o_deg}}},
                         {"z_ab_mm", p.z_ab},
                         {"z_oa_mm", p.z_oa},
                         {"z_lo_mm", p.z_lo}};
    }
    j["sampling"] = {{"density_per_mm2", cfg.sampling_density}, {"min_points", cfg.sampling_min_points}};
    j["grid"] = {{"n_alpha", cfg.n_alpha},
                 {"n_sep", cfg.n_sep},
                 {"delta_ref_mm", cfg.delta_ref_mm},
                 {"theta_ref_deg", cfg.theta_ref_deg}};
    j["delta_z_mm"] = cfg.delta_z_mm;
    j["contact"] = {{"r_max_scaled", cfg.contact_r_max_scaled},
                    {"tol_scaled", cfg.contact_tol_scaled},
                    {"audit_points", cfg.contact_audit_points}};
    if (cfg.stress) {
        const StressConfig& s = *cfg.stress;
        nlohmann::json js;
        switch (s.kind) {
            case StressKind::linear_superposition:
                js["model"] = "linear_superposition";
                js["r_delta_mpa_per_mm"] = s.r_delta_mpa_per_mm;
                js["r_theta_mpa_per_deg"] = s.r_theta_mpa_per_deg;
                break;
            case StressKind::radial:
                js["model"] = "radial";
                js["r_prime_mpa_per_unit"] = s.r_prime_mpa_per_unit;
                break;
            case StressKind::cantilever_beam:
                js["model"] = "cantilever_beam";
                js["length_mm"] = s.length_mm;
                js["modulus_mpa"] = s.modulus_mpa;
                js["diameter_mm"] = s.diameter_mm;
                js["axial_force_n"] = s.axial_force_n;
                break;
            case StressKind::tabulated:
                js["model"] = "tabulated";
                js["fatigue_csv"] = s.fatigue_csv;
                if (!s.yield_csv.empty()) js["yield_csv"] = s.yield_csv;
                js["f_z_n"] = s.tab_f_z_n;
                js["theta_z_deg"] = s.tab_theta_z_deg;
                break;
        }
        js["thresholds"] = {{"fatigue_mpa", s.thresholds.fatigue_limit},
                            {"yield_mpa", s.thresholds.yield_limit}};
        js["r_max_scaled"] = cfg.stress_r_max_scaled;
        js["tol_scaled"] = cfg.stress_tol_scaled;
        j["stress"] = js;
    }
    if (!cfg.trajectories.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : cfg.trajectories) arr.push_back({{"label", t.label}, {"path", t.path}});
        j["trajectories"] = arr;
    }
    if (cfg.stress_map) {
        j["stress_map"] = {{"slices_deg", cfg.stress_map->slices_deg},
                           {"delta_max_mm", cfg.stress_map->delta_max_mm},
                           {"theta_max_deg", cfg.stress_map->theta_max_deg},
                           {"resolution", cfg.stress_map->resolution}};
    }
    if (cfg.optimization) {
        const OptimizationConfig& o = *cfg.optimization;
        nlohmann::json vars = nlohmann::json::array();
        for (const auto& v : o.variables)
            vars.push_back({{"name", v.name}, {"lo", v.lo}, {"hi", v.hi}});
        nlohmann::json jo{{"variables", vars},
                          {"penalty_weight", o.penalty_weight},
                          {"max_evals", o.max_evals},
                          {"seeds", o.seeds},
                          {"unprotected_cap", o.unprotected_cap},
                          {"include_yield_target", o.include_yield_target}};
        if (o.search_n_alpha) jo["search_n_alpha"] = *o.search_n_alpha;
        if (o.search_n_sep) jo["search_n_sep"] = *o.search_n_sep;
        j["optimization"] = jo;
    }
    if (cfg.simulation) {
        nlohmann::json js{{"trajectory", cfg.simulation->trajectory},
                          {"surge",
                           {{"peak_multiplier", cfg.simulation->surge.peak_multiplier},
                            {"width_steps", cfg.simulation->surge.width_steps}}}};
        if (cfg.simulation->surge.center_pct) js["surge"]["center_pct"] = *cfg.simulation->surge.center_pct;
        j["simulation"] = js;
    }
    j["output_dir"] = cfg.output_dir;
    return j;
}

/// Build the configured stress model; tabulated grids are loaded from disk.
/// When `yield_variant` is set and a separate yield grid is configured, that
/// grid is returned instead (the two-threshold split of principal vs yield
/// stress data).
inline StressModel build_stress_model(const StressConfig& s, bool yield_variant = false) {
    switch (s.kind) {
        case StressKind::linear_superposition:
            return LinearSuperposition(s.r_delta_mpa_per_mm, s.r_theta_mpa_per_deg);
        case StressKind::radial:
            return RadialStress(s.r_prime_mpa_per_unit);
        case StressKind::cantilever_beam:
            return CantileverBeam(s.length_mm, s.modulus_mpa, s.diameter_mm, s.axial_force_n);
        case StressKind::tabulated: {
            const std::string& path =
                (yield_variant && !s.yield_csv.empty()) ? s.yield_csv : s.fatigue_csv;
            return load_tabulated_grid_file(path, s.tab_f_z_n, deg_to_rad(s.tab_theta_z_deg));
        }
    }
    throw ConfigError("stress: unknown model kind");
}

}  // namespace hardstop
