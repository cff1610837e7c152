#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardstop/hardstop.hpp"

namespace fs = std::filesystem;
using namespace hardstop;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::optional<std::size_t> grid_alpha;
    std::optional<std::size_t> grid_sep;
    std::optional<std::uint64_t> seed;
};

RunConfig load_config(const CliOverrides& o) {
    RunConfig cfg = load_run_config(o.config_path);
    if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
    if (o.grid_alpha) cfg.n_alpha = *o.grid_alpha;
    if (o.grid_sep) cfg.n_sep = *o.grid_sep;
    if (o.seed && cfg.optimization) cfg.optimization->seeds = {*o.seed};
    cfg.grid().validate();
    return cfg;
}

fs::path prepare_output(const RunConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    std::ofstream echo(dir / "effective_config.json", std::ios::binary);
    echo << effective_config_json(cfg).dump(2) << '\n';
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw NumericError("cannot write output file: " + p.string());
    out << content;
    std::cout << "wrote " << p.string() << "\n";
}

template <typename Fn>
void write_stream(const fs::path& p, Fn&& fn) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw NumericError("cannot write output file: " + p.string());
    fn(out);
    std::cout << "wrote " << p.string() << "\n";
}

const PairParams& require_geometry(const RunConfig& cfg) {
    if (!cfg.geometry) throw ConfigError("this command requires a 'geometry' block");
    return *cfg.geometry;
}

const StressConfig& require_stress(const RunConfig& cfg) {
    if (!cfg.stress) throw ConfigError("this command requires a 'stress' block");
    return *cfg.stress;
}

std::vector<Trajectory> load_trajectories(const RunConfig& cfg) {
    std::vector<Trajectory> out;
    for (const TrajectoryRef& ref : cfg.trajectories)
        out.push_back(read_trajectory_file(ref.path, ref.label));
    return out;
}

void report_warnings(const RadialBoundaryField& f, const std::string& what) {
    if (f.warnings.empty()) return;
    std::cerr << "warning: " << f.warnings.size() << " non-convex ray(s) in the " << what
              << " boundary (smallest crossing kept):";
    for (const RayWarning& w : f.warnings)
        std::cerr << " (sep " << format_sig9(rad_to_deg(f.grid.sep(w.sep_index))) << " deg, alpha "
                  << format_sig9(rad_to_deg(f.grid.alpha(w.alpha_index))) << " deg)";
    std::cerr << "\n";
}

std::string slice_file_tag(double slice_deg) {
    std::string tag = format_sig9(slice_deg);
    for (char& c : tag)
        if (c == '.') c = 'p';
    return tag;
}

int cmd_boundary(const CliOverrides& o) {
    const RunConfig cfg = load_config(o);
    const fs::path dir = prepare_output(cfg);
    const HardStopPair pair = require_geometry(cfg).build();
    const RadialBoundaryField hs = contact_boundary_field(pair, cfg.grid(), cfg.delta_z_mm,
                                                          cfg.contact_options());
    report_warnings(hs, "engagement");
    write_stream(dir / "boundary_hs.csv", [&](std::ostream& out) { write_boundary_csv(out, hs); });
    return 0;
}

int cmd_stress_map(const CliOverrides& o) {
    const RunConfig cfg = load_config(o);
    if (!cfg.stress_map) throw ConfigError("stress-map requires a 'stress_map' block");
    const fs::path dir = prepare_output(cfg);
    const StressModel model = build_stress_model(require_stress(cfg));
    for (const double s : cfg.stress_map->slices_deg) {
        write_stream(dir / ("stress_map_sep" + slice_file_tag(s) + ".csv"), [&](std::ostream& out) {
            write_heatmap_csv(out, model, s, cfg.stress_map->delta_max_mm,
                              cfg.stress_map->theta_max_deg, cfg.stress_map->resolution);
        });
    }
    return 0;
}

int cmd_evaluate(const CliOverrides& o) {
    const RunConfig cfg = load_config(o);
    const fs::path dir = prepare_output(cfg);
    const StressConfig& sc = require_stress(cfg);
    const HardStopPair pair = require_geometry(cfg).build();
    const DirectionGrid grid = cfg.grid();

    const RadialBoundaryField hs =
        contact_boundary_field(pair, grid, cfg.delta_z_mm, cfg.contact_options());
    report_warnings(hs, "engagement");
    write_stream(dir / "boundary_hs.csv", [&](std::ostream& out) { write_boundary_csv(out, hs); });

    const std::map<std::string, std::pair<StressModel, double>> thresholds{
        {"fatigue", {build_stress_model(sc, false), sc.thresholds.fatigue_limit}},
        {"yield", {build_stress_model(sc, true), sc.thresholds.yield_limit}}};

    for (const auto& [tname, entry] : thresholds) {
        const auto& [model, sigma_cr] = entry;
        const RadialBoundaryField sigma =
            safe_boundary_field(model, sigma_cr, grid, cfg.delta_z_mm, cfg.stress_options());
        report_warnings(sigma, tname + " safe");
        write_stream(dir / ("boundary_sigma_" + tname + ".csv"),
                     [&](std::ostream& out) { write_boundary_csv(out, sigma); });
        const SpaceMetrics metrics = space_metrics(hs, sigma);
        write_file(dir / ("metrics_" + tname + ".json"),
                   metrics_to_json(metrics, grid).dump(2) + "\n");
    }

    for (const Trajectory& traj : load_trajectories(cfg)) {
        const ContainmentReport rep = trajectory_containment(hs, traj);
        write_file(dir / ("containment_" + traj.label + ".json"),
                   containment_to_json(rep).dump(2) + "\n");
    }
    return 0;
}

int cmd_optimize(const CliOverrides& o) {
    const RunConfig cfg = load_config(o);
    if (!cfg.optimization) throw ConfigError("optimize requires an 'optimization' block");
    const fs::path dir = prepare_output(cfg);
    const StressConfig& sc = require_stress(cfg);
    const PairParams base = require_geometry(cfg);
    const OptimizationConfig& oc = *cfg.optimization;

    OptimizationProblem prob;
    prob.variables = oc.variables;
    std::vector<std::string> names;
    for (const auto& v : oc.variables) names.push_back(v.name);
    prob.hs_generator = make_pair_boundary_generator(base, names, cfg.contact_options());

    const StressModel fatigue_model = build_stress_model(sc, false);
    const StressModel yield_model = build_stress_model(sc, true);
    const StressBoundaryOptions sopt = cfg.stress_options();
    prob.sigma_generator = [&](const DirectionGrid& grid, double sigma_cr) {
        const StressModel& m =
            (sigma_cr == sc.thresholds.yield_limit && oc.include_yield_target) ? yield_model
                                                                               : fatigue_model;
        return safe_boundary_field(m, sigma_cr, grid, cfg.delta_z_mm, sopt);
    };
    prob.targets = {{"fatigue", sc.thresholds.fatigue_limit, TargetRole::must_contain}};
    if (oc.include_yield_target)
        prob.targets.push_back({"yield", sc.thresholds.yield_limit, TargetRole::must_contain});
    prob.primary_target = 0;
    prob.trajectories = load_trajectories(cfg);
    prob.grid = cfg.grid();
    if (oc.search_n_alpha || oc.search_n_sep)
        prob.search_grid = DirectionGrid(oc.search_n_alpha.value_or(cfg.n_alpha),
                                         oc.search_n_sep.value_or(cfg.n_sep), cfg.delta_ref_mm,
                                         deg_to_rad(cfg.theta_ref_deg));
    prob.penalty_weight = oc.penalty_weight;
    prob.delta_z = cfg.delta_z_mm;
    prob.max_evals = oc.max_evals;
    prob.seeds = oc.seeds;
    prob.unprotected_cap = oc.unprotected_cap;
    std::vector<double> initial;
    {
        PairParams probe = base;
        for (const auto& n : names) initial.push_back(*pair_variable_slot(probe, n));
    }
    prob.initial = initial;

    const OptimizationResult res = optimize(prob);

    nlohmann::json jvars;
    PairParams best = base;
    for (std::size_t i = 0; i < names.size(); ++i) {
        jvars[names[i]] = round_sig9(res.best_vars[i]);
        *pair_variable_slot(best, names[i]) = res.best_vars[i];
    }
    nlohmann::json jmetrics;
    for (const auto& [tname, m] : res.target_metrics)
        jmetrics[tname] = metrics_to_json(m, prob.grid);
    nlohmann::json jtraj = nlohmann::json::array();
    for (const ContainmentReport& rep : res.trajectory_reports)
        jtraj.push_back(containment_to_json(rep));
    nlohmann::json jstarts = nlohmann::json::array();
    for (const StartRecord& s : res.starts) {
        nlohmann::json h = nlohmann::json::array();
        for (double v : s.history) h.push_back(round_sig9(v));
        jstarts.push_back({{"start", s.start_point}, {"history", h}, {"final", round_sig9(s.final_value)}});
    }
    const nlohmann::json result{{"best_variables", jvars},
                                {"objective", round_sig9(res.best.value)},
                                {"phi_hs", round_sig9(res.best.phi)},
                                {"penalty", round_sig9(res.best.penalty)},
                                {"recomputed_objective", round_sig9(res.recomputed_value)},
                                {"evaluations", res.evaluations},
                                {"feasible", res.feasible},
                                {"target_metrics", jmetrics},
                                {"trajectory_reports", jtraj},
                                {"starts", jstarts}};
    write_file(dir / "optimize_result.json", result.dump(2) + "\n");

    std::ostringstream geo;
    geo << "optimized hard-stop geometry (mm, deg)\n\n";
    geo << "stage hard stop\n";
    geo << "  d_l_mm          = " << format_sig9(best.stage.d_l) << "\n";
    geo << "  d_s_mm          = " << format_sig9(best.stage.d_s) << "\n";
    geo << "  r_c_mm          = " << format_sig9(best.stage.r_c) << "\n";
    geo << "  theta_o_deg     = " << format_sig9(best.stage.theta_o_deg) << "\n";
    if (best.stage.clip_diameter)
        geo << "  clip_diameter_mm = " << format_sig9(*best.stage.clip_diameter) << "\n";
    geo << "ground hard stop\n";
    geo << "  d_l_mm          = " << format_sig9(best.ground.d_l) << "\n";
    geo << "  d_s_mm          = " << format_sig9(best.ground.d_s) << "\n";
    geo << "  r_c_mm          = " << format_sig9(best.ground.r_c) << "\n";
    geo << "  theta_o_deg     = " << format_sig9(best.ground.theta_o_deg) << "\n";
    geo << "vertical relations\n";
    geo << "  z_ab_mm         = " << format_sig9(best.z_ab) << "\n";
    geo << "  z_oa_mm         = " << format_sig9(best.z_oa) << "\n";
    geo << "  z_lo_mm         = " << format_sig9(best.z_lo) << "\n";
    write_file(dir / "optimized_geometry.txt", geo.str());
    return 0;
}

int cmd_simulate(const CliOverrides& o) {
    const RunConfig cfg = load_config(o);
    if (!cfg.simulation) throw ConfigError("simulate requires a 'simulation' block");
    const fs::path dir = prepare_output(cfg);
    const StressConfig& sc = require_stress(cfg);
    const HardStopPair pair = require_geometry(cfg).build();
    const DirectionGrid grid = cfg.grid();
    const StressModel model = build_stress_model(sc, false);

    Trajectory traj;
    bool found = false;
    for (const TrajectoryRef& ref : cfg.trajectories) {
        if (ref.label == cfg.simulation->trajectory) {
            traj = read_trajectory_file(ref.path, ref.label);
            found = true;
            break;
        }
    }
    if (!found)
        throw ConfigError("simulation.trajectory '" + cfg.simulation->trajectory +
                          "' not found among trajectories");

    const RadialBoundaryField hs =
        contact_boundary_field(pair, grid, cfg.delta_z_mm, cfg.contact_options());
    report_warnings(hs, "engagement");

    const auto normal = simulate_engagement(hs, model, traj);

    double center = cfg.simulation->surge.center_pct.value_or(-1.0);
    if (center < 0.0) {
        double peak = -1e300;
        for (const EngagementRecord& r : normal)
            if (r.sigma_unclamped > peak) {
                peak = r.sigma_unclamped;
                center = r.input.cycle_pct;
            }
    }

    const Trajectory surged = apply_surge(traj, cfg.simulation->surge.peak_multiplier,
                                          cfg.simulation->surge.width_steps, center);
    const auto no_stop = simulate_free(model, surged);
    const auto with_stop = simulate_engagement(hs, model, surged);

    write_stream(dir / "engagement_normal.csv",
                 [&](std::ostream& out) { write_engagement_csv(out, normal); });
    write_stream(dir / "engagement_surge_nostop.csv",
                 [&](std::ostream& out) { write_engagement_csv(out, no_stop); });
    write_stream(dir / "engagement_surge_stop.csv",
                 [&](std::ostream& out) { write_engagement_csv(out, with_stop); });

    const auto arm_summary = [](const std::vector<EngagementRecord>& recs) {
        double peak = -1e300, peak_pct = 0.0;
        std::size_t engaged = 0;
        double first_pct = -1.0, last_pct = -1.0;
        for (const EngagementRecord& r : recs) {
            if (r.sigma_clamped > peak) {
                peak = r.sigma_clamped;
                peak_pct = r.input.cycle_pct;
            }
            if (r.engaged) {
                ++engaged;
                if (first_pct < 0.0) first_pct = r.input.cycle_pct;
                last_pct = r.input.cycle_pct;
            }
        }
        nlohmann::json j{{"peak_sigma_mpa", round_sig9(peak)},
                         {"peak_cycle_pct", round_sig9(peak_pct)},
                         {"engaged_samples", engaged}};
        if (engaged > 0) {
            j["engage_cycle_pct"] = round_sig9(first_pct);
            j["disengage_cycle_pct"] = round_sig9(last_pct);
        }
        return j;
    };

    const nlohmann::json summary{{"trajectory", traj.label},
                                 {"surge_center_pct", round_sig9(center)},
                                 {"surge_peak_multiplier", cfg.simulation->surge.peak_multiplier},
                                 {"surge_width_steps", cfg.simulation->surge.width_steps},
                                 {"normal", arm_summary(normal)},
                                 {"surge_nostop", arm_summary(no_stop)},
                                 {"surge_stop", arm_summary(with_stop)},
                                 {"max_boundary_sigma_mpa", round_sig9(max_boundary_stress(hs, model))},
                                 {"fatigue_limit_mpa", sc.thresholds.fatigue_limit},
                                 {"yield_limit_mpa", sc.thresholds.yield_limit}};
    write_file(dir / "simulate_summary.json", summary.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"design-synthesis toolkit for multi-DOF mechanical hard stops"};
    app.require_subcommand(1);

    CliOverrides o;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", o.out_dir, "output directory (overrides config)");
        sub->add_option("--grid-alpha", o.grid_alpha, "override grid n_alpha");
        sub->add_option("--grid-sep", o.grid_sep, "override grid n_sep");
        sub->add_option("--seed", o.seed, "replace the optimization seed list");
    };

    CLI::App* boundary = app.add_subcommand("boundary", "extract the engagement boundary");
    CLI::App* stress_map = app.add_subcommand("stress-map", "export stress heatmap planes");
    CLI::App* evaluate = app.add_subcommand("evaluate", "boundaries, metrics and containment");
    CLI::App* optimize_cmd = app.add_subcommand("optimize", "optimize hard-stop parameters");
    CLI::App* simulate = app.add_subcommand("simulate", "surge-overload engagement simulation");
    for (CLI::App* sub : {boundary, stress_map, evaluate, optimize_cmd, simulate}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (boundary->parsed()) return cmd_boundary(o);
        if (stress_map->parsed()) return cmd_stress_map(o);
        if (evaluate->parsed()) return cmd_evaluate(o);
        if (optimize_cmd->parsed()) return cmd_optimize(o);
        if (simulate->parsed()) return cmd_simulate(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
