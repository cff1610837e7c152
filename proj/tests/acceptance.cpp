// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hardstop/hardstop.hpp"

using namespace hardstop;

namespace {

struct Failure : std::runtime_error {
    explicit Failure(const std::string& msg) : std::runtime_error(msg) {}
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Mat3 matrix_exp_oracle(Vec2 tilt) {
    Mat3 k;
    k.a = {0, 0, tilt.y, 0, 0, -tilt.x, -tilt.y, tilt.x, 0};
    Mat3 result = Mat3::identity();
    Mat3 term = Mat3::identity();
    for (int n = 1; n <= 40; ++n) {
        Mat3 next = term * k;
        for (auto& v : next.a) v /= double(n);
        term = next;
        for (int i = 0; i < 9; ++i) result.a[i] += term.a[i];
    }
    return result;
}

HardStopPair demo_pair() {
    TorusCapProfile stage(11.4, 4.0, 10.18, deg_to_rad(-0.2), 29.1);
    TorusCapProfile ground(11.4, 4.0, 12.129, deg_to_rad(-9.0));
    return {std::move(stage), std::move(ground), 0.6645, 2.0, 9.0};
}

RadialBoundaryField diamond_field(const DirectionGrid& g, double r1, double r2, double sigma_cr) {
    RadialBoundaryField f(g, FieldLabel::safe_stress, 0.0);
    for (std::size_t j = 0; j < g.n_sep; ++j)
        for (std::size_t i = 0; i < g.n_alpha; ++i) {
            const auto [dx, dy] = DirectionGrid::direction(g.alpha(i));
            f.set(j, i, sigma_cr / (r1 * std::abs(dx) + r2 * std::abs(dy)), false);
        }
    return f;
}

// --- criterion 1: diamond safe space reproduced within 1e-4, under 1 s -------

void criterion_diamond() {
    const auto t0 = std::chrono::steady_clock::now();
    const DirectionGrid grid(360, 1, 1.0, deg_to_rad(1.0));
    const StressModel lin = LinearSuperposition(100.0, 50.0);
    const RadialBoundaryField f = safe_boundary_field(lin, 480.0, grid, 0.0, {30.0, 1e-7, 8});
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_alpha; ++i) {
        require(!f.is_unbounded(0, i), "diamond ray came back unbounded");
        const auto [dx, dy] = DirectionGrid::direction(grid.alpha(i));
        const double want = 480.0 / (100.0 * std::abs(dx) + 50.0 * std::abs(dy));
        worst = std::max(worst, std::abs(f.radius(0, i) - want));
    }
    require(worst <= 1e-4, "max deviation " + fmt(worst) + " > 1e-4 scaled units");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 1.0, "runtime " + fmt(secs) + "s exceeds 1s");
}

// --- criterion 2: inscribed-rectangle bound 0.5 +/- 0.01, under 10 s ---------

void criterion_orthotope_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    const DirectionGrid grid(360, 1, 1.0, deg_to_rad(1.0));
    const double a = 480.0 / 100.0, b = 480.0 / 50.0;
    const RadialBoundaryField diamond = diamond_field(grid, 100.0, 50.0, 480.0);

    double best_phi = 0.0;
    for (int wi = 1; wi <= 80; ++wi) {
        for (int hi = 1; hi <= 80; ++hi) {
            const double w = a * double(wi) / 81.0, h = b * double(hi) / 81.0;
            OrthotopeLimits lim;
            lim.delta = AxisLimits{-w, w};
            lim.theta = AxisLimits{-h, h};
            const RadialBoundaryField rect = orthotope_field(lim, grid);
            bool contained = true;
            for (std::size_t i = 0; i < grid.n_alpha && contained; ++i)
                contained = rect.radius(0, i) <= diamond.radius(0, i);
            if (!contained) continue;
            best_phi = std::max(best_phi, volume_fraction(rect, diamond));
        }
    }
    require(std::abs(best_phi - 0.5) <= 0.01,
            "max inscribed fraction " + fmt(best_phi) + " not within 0.5 +/- 0.01");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 10.0, "runtime " + fmt(secs) + "s exceeds 10s");
}

// --- criterion 3: tilt rotation against the exponential-series oracle --------

void criterion_rodrigues() {
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> u(-2.2, 2.2);
    int tested = 0;
    while (tested < 1000) {
        const Vec2 tilt{u(gen), u(gen)};
        if (!(tilt.norm() < kPi)) continue;
        ++tested;
        const Mat3 r = rodrigues_rotation(tilt);
        const Mat3 e = matrix_exp_oracle(tilt);
        for (int i = 0; i < 9; ++i)
            require(std::abs(r.a[i] - e.a[i]) <= 1e-12, "rotation deviates from the series oracle");
        const Mat3 rtr = r.transposed() * r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                require(std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12, "R^T R != I");
        require(std::abs(r.det() - 1.0) <= 1e-12, "det(R) != 1");
    }
}

// --- criterion 4: clearance sign vs dense resampling; bisection brackets -----

void criterion_contact_oracle() {
    const HardStopPair pair = demo_pair();
    const SurfaceSample sample = sample_stage_surface(pair.stage);  // >= 5e4 points
    const SurfaceSample dense = sample_stage_surface(pair.stage, 640.0, 500000);

    std::mt19937_64 gen(103);
    std::uniform_real_distribution<double> um(0.0, 1.5), us(0.0, kPi), ua(0.0, 2.0 * kPi),
        uz(-0.3, 0.0);
    int contacts = 0, frees = 0;
    for (int n = 0; n < 100; ++n) {
        const WorkspaceVector w(um(gen), deg_to_rad(um(gen)), us(gen));
        const SixDofMotion m = compose_motion(w, ua(gen), uz(gen));
        const bool got = min_clearance(pair, m, sample) <= 0.0;

        const Mat3 rot = rodrigues_rotation({m.theta.x, m.theta.y});
        bool oracle = false;
        for (const Vec3& p : dense.points) {
            const Vec3 q = rot.apply(p - pair.anchor()) + pair.anchor() + m.delta;
            if (pair.ground.side_of(q, pair.ground_z_offset()) < 0) {
                oracle = true;
                break;
            }
        }
        require(got == oracle, "sign disagreement with the dense resampling at motion " +
                                   std::to_string(n));
        (oracle ? contacts : frees) += 1;
    }
    require(contacts >= 10 && frees >= 10,
            "degenerate motion mix (contacts " + std::to_string(contacts) + ")");

    // bisection bracket contract on a spread of rays
    const ContactAnalysis ctx(pair, ContactOptions{64.0, 50000, 8.0, 1e-4, 16});
    const DirectionGrid grid;
    for (const double alpha_deg : {0.0, 30.0, 60.0, 90.0, 135.0, 210.0, 300.0}) {
        const double alpha = deg_to_rad(alpha_deg), sep = deg_to_rad(30.0);
        const auto res = ctx.radius_along_ray(grid, alpha, sep, 0.0, -0.1, 8.0, 1e-4);
        require(!res.unbounded, "ray unexpectedly unbounded");
        auto past = [&](double k) {
            return ctx.penetrates(
                compose_motion(detail::realized_workspace(grid.workspace_at(alpha, sep, k)), 0.0, -0.1));
        };
        require(!past(0.99 * res.radius), "contact below 0.99 r* at alpha " + fmt(alpha_deg));
        require(past(1.01 * res.radius), "no contact at 1.01 r* at alpha " + fmt(alpha_deg));
    }
}

// --- criterion 5: aligned-quadrant tilt allowance exceeds pure tilt ----------

void criterion_boundary_skew() {
    const auto t0 = std::chrono::steady_clock::now();
    const HardStopPair pair = demo_pair();
    ContactOptions opt;
    opt.r_max_scaled = 8.0;  // the default grid, an explicit search range
    const RadialBoundaryField f = contact_boundary_field(pair, DirectionGrid(), 0.0, opt);

    const DirectionGrid& g = f.grid;
    double theta_pure = -1.0, theta_q1 = -1.0;
    for (std::size_t i = 0; i < g.n_alpha; ++i) {
        if (f.is_unbounded(0, i)) continue;
        const WorkspaceVector w = g.workspace_at(g.alpha(i), g.sep(0), f.radius(0, i));
        const double alpha_deg = rad_to_deg(g.alpha(i));
        if (std::abs(alpha_deg - 90.0) < 1e-9)
            theta_pure = w.theta_a;
        else if (alpha_deg > 0.0 && alpha_deg < 90.0)
            theta_q1 = std::max(theta_q1, w.theta_a);
    }
    require(theta_pure > 0.0, "pure-tilt ray missing or unbounded");
    require(theta_q1 > 0.0, "no bounded rays in the aligned quadrant");
    require(theta_q1 > theta_pure, "aligned-quadrant max tilt " + fmt(rad_to_deg(theta_q1)) +
                                       " deg does not exceed pure tilt " +
                                       fmt(rad_to_deg(theta_pure)) + " deg");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 120.0, "runtime " + fmt(secs) + "s exceeds 2 minutes");
}

// --- criterion 6: beam stress is never lower in the opposed pairing ----------

void criterion_beam_skew() {
    const StressModel beam = CantileverBeam(50.0, 104800.0, 5.0, 2000.0);
    std::mt19937_64 gen(107);
    std::uniform_real_distribution<double> u(1e-5, 3.0);
    for (int n = 0; n < 1000; ++n) {
        const double d = u(gen), t = u(gen);
        const double aligned = eval_stress(beam, WorkspaceVector(d, deg_to_rad(t), 0.0));
        const double opposed = eval_stress(beam, WorkspaceVector(d, deg_to_rad(t), kPi));
        require(aligned <= opposed + 1e-12, "aligned pairing exceeded the opposed one");
    }
}

// --- criterion 7: metrics consistency ----------------------------------------

void criterion_metrics() {
    // additivity with a shared overlap term
    const DirectionGrid g(360, 4, 1.0, deg_to_rad(1.0));
    const RadialBoundaryField sigma = diamond_field(g, 100.0, 50.0, 480.0);
    OrthotopeLimits lim;
    lim.delta = AxisLimits{-3.0, 3.0};
    lim.theta = AxisLimits{-6.5, 6.5};
    const RadialBoundaryField hs = orthotope_field(lim, g);  // pokes out of the diamond

    double overlap = 0.0;
    for (std::size_t j = 0; j < g.n_sep; ++j)
        for (std::size_t i = 0; i < g.n_alpha; ++i) {
            const double m = std::min(hs.radius(j, i), sigma.radius(j, i));
            overlap += 0.5 * m * m * g.alpha_weight() * g.sep_weight(j);
        }
    const auto [unp, ovp] = difference_volumes(hs, sigma);
    require(unp > 0.0 && ovp > 0.0, "test fields should overlap partially");
    require(std::abs(field_volume(hs) - (overlap + unp)) <= 1e-9,
            "hs volume additivity violated");
    require(std::abs(field_volume(sigma) - (overlap + ovp)) <= 1e-9,
            "sigma volume additivity violated");

    // common axis rescaling leaves the fraction unchanged
    const double phi = volume_fraction(hs, sigma);
    for (const double c : {0.2, 3.0, 11.0}) {
        const double phi_c = volume_fraction(rescale_common(hs, c), rescale_common(sigma, c));
        require(std::abs(phi_c - phi) <= 1e-6 * phi, "fraction drifted under common rescaling");
    }

    // grid doubling moves volumes by less than one percent
    const StressModel lin = LinearSuperposition(100.0, 50.0);
    const DirectionGrid g2(720, 8, 1.0, deg_to_rad(1.0));
    const double v1 = field_volume(safe_boundary_field(lin, 480.0, g, 0.0, {30.0, 1e-7, 4}));
    const double v2 = field_volume(safe_boundary_field(lin, 480.0, g2, 0.0, {30.0, 1e-7, 4}));
    require(std::abs(v2 - v1) / v1 < 0.01, "volume moved " + fmt(100.0 * std::abs(v2 - v1) / v1) +
                                               "% under grid doubling");

    OrthotopeLimits box;
    box.delta = AxisLimits{-1.5, 1.5};
    box.theta = AxisLimits{-2.0, 2.0};
    const double b1 = field_volume(orthotope_field(box, g));
    const double b2 = field_volume(orthotope_field(box, g2));
    require(std::abs(b2 - b1) / b1 < 0.01, "box volume unstable under grid doubling");
}

// --- criterion 8: tabulated grids reproduce their generators within 0.5% -----

std::string model_to_csv(const StressModel& model, const std::vector<double>& seps_deg, double span,
                         double step) {
    std::ostringstream out;
    out << "sep_deg,delta_signed_mm,theta_signed_deg,sigma_mpa\n";
    char buf[160];
    for (const double sep : seps_deg) {
        for (double d = -span; d <= span + 1e-9; d += step) {
            for (double t = -span; t <= span + 1e-9; t += step) {
                const double sep_eff = (d * t >= 0.0) ? sep : 180.0 - sep;
                const double sigma =
                    eval_stress(model, WorkspaceVector(std::abs(d), deg_to_rad(std::abs(t)),
                                                       deg_to_rad(sep_eff)));
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", sep, d, t, sigma);
                out << buf;
            }
        }
    }
    return out.str();
}

void criterion_tabulated_roundtrip() {
    std::mt19937_64 gen(109);

    {
        const StressModel radial = RadialStress(100.0);
        std::istringstream in(model_to_csv(radial, {0.0, 90.0}, 5.0, 0.1));
        const StressModel tab = load_tabulated_grid(in, "radial");
        std::uniform_real_distribution<double> ur(1.0, 4.5), ua(0.0, kPi / 2.0), us(0.0, kPi);
        for (int n = 0; n < 300; ++n) {
            const double r = ur(gen), a = ua(gen);
            const WorkspaceVector w(r * std::cos(a), deg_to_rad(r * std::sin(a)), us(gen));
            const double got = eval_stress(tab, w), want = eval_stress(radial, w);
            require(std::abs(got - want) <= 0.005 * std::abs(want),
                    "radial round-trip error " + fmt(100.0 * std::abs(got - want) / want) + "%");
        }
    }
    {
        const StressModel beam = CantileverBeam(100.0, 1.0e4, 4.0, 3000.0);
        std::vector<double> seps;
        for (double s = 0.0; s <= 90.0 + 1e-9; s += 5.0) seps.push_back(s);
        std::istringstream in(model_to_csv(beam, seps, 3.0, 0.1));
        const StressModel tab = load_tabulated_grid(in, "beam");
        std::uniform_real_distribution<double> um(0.0, 2.05), us(0.0, kPi);
        for (int n = 0; n < 300; ++n) {
            const WorkspaceVector w(um(gen), deg_to_rad(um(gen)), us(gen));
            const double got = eval_stress(tab, w), want = eval_stress(beam, w);
            require(std::abs(got - want) <= 0.005 * std::abs(want),
                    "beam round-trip error " + fmt(100.0 * std::abs(got - want) / want) + "%");
        }
    }
}

// --- criterion 9: optimizer sanity --------------------------------------------

OptimizationProblem toy_problem() {
    OptimizationProblem p;
    p.variables = {{"half_width", 0.1, 4.7}};
    p.hs_generator = [](std::span<const double> vars, const DirectionGrid& grid, double dz) {
        if (!(vars[0] > 0.0)) throw ValidationError("half width must be positive");
        OrthotopeLimits lim;
        lim.delta = AxisLimits{-vars[0], vars[0]};
        lim.theta = AxisLimits{-2.0 * vars[0], 2.0 * vars[0]};
        return orthotope_field(lim, grid, dz);
    };
    p.sigma_generator = [](const DirectionGrid& grid, double sigma_cr) {
        return diamond_field(grid, 100.0, 50.0, sigma_cr);
    };
    p.targets = {{"fatigue", 480.0, TargetRole::must_contain}};
    p.grid = DirectionGrid(360, 1, 1.0, deg_to_rad(1.0));
    p.penalty_weight = 50.0;
    p.max_evals = 400;
    p.initial = {1.0};
    p.seeds = {7, 21};
    return p;
}

void criterion_optimizer() {
    const OptimizationProblem p = toy_problem();
    const OptimizationResult res = optimize(p);

    double best_val = kRejectedObjective;
    for (int i = 0; i <= 2000; ++i) {
        const double w = 0.1 + (4.7 - 0.1) * double(i) / 2000.0;
        best_val = std::max(best_val, penalty_objective(std::vector<double>{w}, p).value);
    }
    require(std::abs(res.best.value - best_val) <= 0.02 * std::abs(best_val),
            "optimizer value " + fmt(res.best.value) + " vs brute force " + fmt(best_val));

    require(std::abs(res.recomputed_value - res.best.value) <= 1e-6,
            "recomputed objective drifted from the cached value");

    const OptimizationResult res2 = optimize(p);
    require(res.best_vars.size() == res2.best_vars.size() &&
                std::memcmp(res.best_vars.data(), res2.best_vars.data(),
                            res.best_vars.size() * sizeof(double)) == 0,
            "parameters not bit-identical across reruns");
}

// --- criterion 10: surge engagement protocol, under 30 s ---------------------

void criterion_engagement() {
    const auto t0 = std::chrono::steady_clock::now();
    const double sigma_cr = 480.0;
    const StressModel beam = CantileverBeam(50.0, 104800.0, 5.0, 2000.0);
    const DirectionGrid grid(72, 4, 1.0, deg_to_rad(1.0));
    const RadialBoundaryField sigma = safe_boundary_field(beam, sigma_cr, grid, 0.0, {500.0, 1e-7, 8});

    RadialBoundaryField hs = sigma;  // strictly inside the safe space
    hs.label = FieldLabel::hard_stop;
    for (double& r : hs.radii) r *= 0.8;

    // synthetic activity: 61 steps riding at 75% of the local boundary radius
    Trajectory traj;
    traj.label = "synthetic";
    for (int i = 0; i < 61; ++i) {
        const double t = double(i) / 60.0;
        const double alpha = deg_to_rad(20.0 + 320.0 * t);
        const double sep = deg_to_rad(90.0 + 75.0 * std::sin(2.0 * kPi * t));
        const auto dir = detail::grid_direction(
            grid.workspace_at(alpha, std::min(sep, kPi - sep), 1.0), grid);
        const auto b = detail::interpolate_radius(hs, dir.alpha, dir.sep);
        require(!b.any_unbounded, "synthetic boundary direction unbounded");
        traj.samples.push_back({100.0 * t,
                                grid.workspace_at(alpha, std::min(sep, kPi - sep), 0.75 * b.radius),
                                std::nullopt, std::nullopt});
    }

    const auto normal = simulate_engagement(hs, beam, traj);
    double center = 0.0, peak = -1e300;
    for (const auto& r : normal) {
        require(!r.engaged, "normal arm must stay contact free");
        if (r.sigma_unclamped > peak) {
            peak = r.sigma_unclamped;
            center = r.input.cycle_pct;
        }
    }

    const Trajectory surged = apply_surge(traj, 3.0, 13.0, center);
    const auto no_stop = simulate_free(beam, surged);
    const auto with_stop = simulate_engagement(hs, beam, surged);

    double peak_no_stop = 0.0, peak_with_stop = 0.0;
    for (const auto& r : no_stop) peak_no_stop = std::max(peak_no_stop, r.sigma_unclamped);
    for (const auto& r : with_stop) peak_with_stop = std::max(peak_with_stop, r.sigma_clamped);

    require(peak_no_stop > sigma_cr, "unprotected surge peak " + fmt(peak_no_stop) +
                                         " MPa does not exceed the threshold");
    const double cap = max_boundary_stress(hs, beam, 16);
    require(peak_with_stop <= cap + 1e-6, "protected peak " + fmt(peak_with_stop) +
                                              " MPa exceeds the boundary cap " + fmt(cap));

    require(!with_stop.front().engaged && !with_stop.back().engaged,
            "surge arm must be free at the cycle ends");
    int transitions = 0;
    double first_engaged = -1.0, last_engaged = -1.0;
    for (std::size_t i = 0; i < with_stop.size(); ++i) {
        if (with_stop[i].engaged) {
            if (first_engaged < 0.0) first_engaged = with_stop[i].input.cycle_pct;
            last_engaged = with_stop[i].input.cycle_pct;
        }
        if (i > 0 && with_stop[i].engaged != with_stop[i - 1].engaged) ++transitions;
    }
    require(transitions == 2, "engagement interval is not contiguous");
    require(first_engaged < center && center < last_engaged,
            "engage/disengage do not straddle the surge peak");

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 30.0, "runtime " + fmt(secs) + "s exceeds 30s");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "diamond safe space matches the closed form", criterion_diamond},
        {2, "inscribed rectangle fraction is 0.5 +/- 0.01", criterion_orthotope_bound},
        {3, "tilt rotation matches the exponential oracle", criterion_rodrigues},
        {4, "clearance sign matches dense resampling; brackets hold", criterion_contact_oracle},
        {5, "aligned-quadrant tilt allowance exceeds pure tilt", criterion_boundary_skew},
        {6, "beam stress: aligned pairing never exceeds opposed", criterion_beam_skew},
        {7, "volume additivity, rescaling invariance, grid stability", criterion_metrics},
        {8, "tabulated grids reproduce their generators within 0.5%", criterion_tabulated_roundtrip},
        {9, "optimizer meets brute force, reproducible and deterministic", criterion_optimizer},
        {10, "surge engagement: capped, contiguous, straddles the peak", criterion_engagement},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run();
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("PASS  criterion %2d: %s (%.2fs)\n", c.id, c.name, secs);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL  criterion %2d: %s -- %s\n", c.id, c.name, e.what());
        }
        std::fflush(stdout);
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
