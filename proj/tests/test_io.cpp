#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "hardstop/io.hpp"
#include "helpers.hpp"

using namespace hardstop;
using Catch::Approx;

TEST_CASE("nine-significant-digit formatting") {
    CHECK(format_sig9(1.0) == "1");
    CHECK(format_sig9(0.1) == "0.1");
    CHECK(format_sig9(123456789.123) == "123456789");
    CHECK(format_sig9(-2.5e-7) == "-2.5e-07");
    CHECK(round_sig9(1.0 / 3.0) == Approx(0.333333333).margin(1e-12));
}

TEST_CASE("boundary field CSV round trip") {
    const DirectionGrid g(16, 3, 1.0, deg_to_rad(1.0));
    RadialBoundaryField f(g, FieldLabel::hard_stop, -0.1);
    auto gen = testutil::rng(71);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (std::size_t j = 0; j < g.n_sep; ++j)
        for (std::size_t i = 0; i < g.n_alpha; ++i) {
            if (j == 1 && i == 7)
                f.set(j, i, 0.0, true);
            else
                f.set(j, i, round_sig9(u(gen)), false);
        }

    std::ostringstream out;
    write_boundary_csv(out, f);
    std::istringstream in(out.str());
    const RadialBoundaryField back = read_boundary_csv(in, g, FieldLabel::hard_stop, -0.1);

    for (std::size_t j = 0; j < g.n_sep; ++j)
        for (std::size_t i = 0; i < g.n_alpha; ++i) {
            REQUIRE(back.is_unbounded(j, i) == f.is_unbounded(j, i));
            if (!f.is_unbounded(j, i)) REQUIRE(back.radius(j, i) == f.radius(j, i));
        }
}

TEST_CASE("boundary CSV rejects malformed input") {
    const DirectionGrid g(8, 1, 1.0, deg_to_rad(1.0));
    {
        std::istringstream in("nope\n");
        CHECK_THROWS_AS(read_boundary_csv(in, g, FieldLabel::hard_stop), ConfigError);
    }
    {
        // row directions must match the grid
        std::istringstream in(
            "sep_deg,alpha_deg,radius_scaled,unbounded_flag\n"
            "90,5,1.0,0\n");
        CHECK_THROWS_AS(read_boundary_csv(in, g, FieldLabel::hard_stop), ConfigError);
    }
    {
        std::istringstream in("sep_deg,alpha_deg,radius_scaled,unbounded_flag\n90,0,1.0,0\n");
        CHECK_THROWS_AS(read_boundary_csv(in, g, FieldLabel::hard_stop), ConfigError);  // short
    }
}

TEST_CASE("heatmap export is re-ingestible and honors the quadrant convention") {
    std::ostringstream out;
    const StressModel lin = LinearSuperposition(100.0, 50.0);
    write_heatmap_csv(out, lin, 30.0, 2.0, 2.0, 41);
    std::istringstream in(out.str());
    const TabulatedStress tab = load_tabulated_grid(in, "heatmap.csv");
    const StressModel tabm = tab;

    // node agreement with the generating model (linear model: sep-independent)
    auto gen = testutil::rng(73);
    std::uniform_real_distribution<double> u(0.0, 1.9);
    for (int n = 0; n < 100; ++n) {
        const WorkspaceVector w(u(gen), deg_to_rad(u(gen)), deg_to_rad(30.0));
        REQUIRE(eval_stress(tabm, w) == Approx(eval_stress(lin, w)).epsilon(1e-6));
    }

    // iso-stress contours of the superposition law are diamonds: points with
    // equal r1*|d| + r2*|t| carry equal stress
    const double c = 100.0 * 1.2 + 50.0 * 0.6;
    for (const auto& [d, t] : std::vector<std::pair<double, double>>{
             {1.2, 0.6}, {0.9, 1.2}, {1.5, 0.0}, {0.5, 2.0}}) {
        REQUIRE(100.0 * d + 50.0 * t == Approx(c));
        REQUIRE(eval_stress(tabm, WorkspaceVector(d, deg_to_rad(t), deg_to_rad(30.0))) ==
                Approx(c).epsilon(1e-6));
    }
}

TEST_CASE("radial heatmaps are rotationally symmetric") {
    std::ostringstream out;
    write_heatmap_csv(out, StressModel(RadialStress(100.0)), 0.0, 3.0, 3.0, 61);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);  // header
    std::map<std::pair<double, double>, double> cells;
    while (std::getline(in, line)) {
        const auto c = detail::split_csv_row(line);
        cells[{std::stod(c[1]), std::stod(c[2])}] = std::stod(c[3]);
    }
    // value depends only on the scaled radius; compare mirrored/transposed cells
    for (const auto& [key, sigma] : cells) {
        REQUIRE(cells.at({-key.first, key.second}) == Approx(sigma).margin(1e-9));
        REQUIRE(cells.at({key.second, key.first}) == Approx(sigma).margin(1e-9));
    }
}

TEST_CASE("beam heatmaps are heavier in the mixed quadrants") {
    std::ostringstream out;
    const StressModel beam = CantileverBeam(50.0, 104800.0, 5.0, 2000.0);
    write_heatmap_csv(out, beam, 0.0, 2.0, 2.0, 41);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::map<std::pair<double, double>, double> cells;
    while (std::getline(in, line)) {
        const auto c = detail::split_csv_row(line);
        cells[{std::stod(c[1]), std::stod(c[2])}] = std::stod(c[3]);
    }
    for (const auto& [key, sigma] : cells) {
        const auto& [d, t] = key;
        if (d <= 0.0 || t <= 0.0) continue;
        REQUIRE(cells.at({-d, t}) >= sigma - 1e-9);  // Q2 vs Q1
        REQUIRE(cells.at({d, -t}) >= sigma - 1e-9);  // Q4 vs Q1
    }
}

TEST_CASE("trajectory CSV round trip with optional columns") {
    Trajectory t;
    t.label = "demo";
    for (int i = 0; i < 5; ++i) {
        TrajectorySample s;
        s.cycle_pct = 25.0 * i;
        s.workspace = WorkspaceVector(0.1 * i, deg_to_rad(0.05 * i), deg_to_rad(30.0 * i));
        s.delta_z = -0.05 * i;
        s.f_z = 1000.0 + 100.0 * i;
        t.samples.push_back(s);
    }
    std::ostringstream out;
    write_trajectory_csv(out, t);
    std::istringstream in(out.str());
    const Trajectory back = read_trajectory_csv(in, "demo");
    REQUIRE(back.samples.size() == t.samples.size());
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        REQUIRE(back.samples[i].cycle_pct == t.samples[i].cycle_pct);
        REQUIRE(back.samples[i].workspace.delta_a == Approx(t.samples[i].workspace.delta_a));
        REQUIRE(back.samples[i].workspace.theta_sep ==
                Approx(t.samples[i].workspace.theta_sep).margin(1e-12));
        REQUIRE(back.samples[i].delta_z.value() == Approx(t.samples[i].delta_z.value()));
        REQUIRE(back.samples[i].f_z.value() == Approx(t.samples[i].f_z.value()));
    }
}

TEST_CASE("trajectory CSV errors") {
    {
        std::istringstream in("wrong,header\n");
        CHECK_THROWS_AS(read_trajectory_csv(in, "x"), ConfigError);
    }
    {
        std::istringstream in(
            "cycle_pct,delta_a_mm,theta_a_deg,theta_sep_deg,bogus\n0,0,0,0,0\n");
        CHECK_THROWS_AS(read_trajectory_csv(in, "x"), ConfigError);
    }
    {
        std::istringstream in("cycle_pct,delta_a_mm,theta_a_deg,theta_sep_deg\n0,0,0,0\n0,0,0,0\n");
        CHECK_THROWS_AS(read_trajectory_csv(in, "x"), ConfigError);  // non-increasing
    }
    {
        std::istringstream in("cycle_pct,delta_a_mm,theta_a_deg,theta_sep_deg\n0,-1,0,0\n");
        CHECK_THROWS_AS(read_trajectory_csv(in, "x"), ConfigError);  // negative magnitude
    }
}

TEST_CASE("engagement CSV layout") {
    const DirectionGrid g(8, 1, 1.0, deg_to_rad(1.0));
    RadialBoundaryField f(g, FieldLabel::hard_stop, 0.0);
    for (std::size_t i = 0; i < g.n_alpha; ++i) f.set(0, i, 1.0, false);
    Trajectory t;
    t.label = "x";
    t.samples.push_back({0.0, WorkspaceVector(2.0, 0.0, 0.0), std::nullopt, std::nullopt});
    const auto recs = simulate_engagement(f, StressModel(RadialStress(100.0)), t);

    std::ostringstream out;
    write_engagement_csv(out, recs);
    std::istringstream in(out.str());
    std::string header, row;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "cycle_pct,delta_a_in_mm,theta_a_in_deg,theta_sep_deg,delta_a_clamped_mm,"
          "theta_a_clamped_deg,engaged,margin_scaled,sigma_unclamped_mpa,sigma_clamped_mpa");
    REQUIRE(std::getline(in, row));
    const auto cells = detail::split_csv_row(row);
    CHECK(cells[1] == "2");
    CHECK(cells[4] == "1");  // clamped to the unit boundary
    CHECK(cells[6] == "1");  // engaged
}

TEST_CASE("metrics and containment JSON reports") {
    const DirectionGrid g(8, 1, 1.0, deg_to_rad(1.0));
    RadialBoundaryField hs(g, FieldLabel::hard_stop, 0.0), sig(g, FieldLabel::safe_stress, 0.0);
    for (std::size_t i = 0; i < g.n_alpha; ++i) {
        hs.set(0, i, 1.0, false);
        sig.set(0, i, 2.0, false);
    }
    const auto j = metrics_to_json(space_metrics(hs, sig), g);
    CHECK(j.at("phi_hs").get<double>() == Approx(0.25));
    CHECK(j.at("contained").get<bool>());
    CHECK(j.at("grid").at("n_alpha").get<int>() == 8);
    CHECK(j.at("vol_unprotected").get<double>() == 0.0);

    // identical spaces report a unit fraction
    const auto jid = metrics_to_json(space_metrics(sig, sig), g);
    CHECK(jid.at("phi_hs").get<double>() == 1.0);

    Trajectory t;
    t.label = "walk";
    t.samples.push_back({0.0, WorkspaceVector(0.5, 0.0, 0.0), std::nullopt, std::nullopt});
    t.samples.push_back({50.0, WorkspaceVector(3.0, 0.0, 0.0), std::nullopt, std::nullopt});
    const auto rep = containment_to_json(trajectory_containment(hs, t));
    CHECK_FALSE(rep.at("pass").get<bool>());
    CHECK(rep.at("samples").size() == 2);
    CHECK(rep.at("samples")[1].at("inside").get<bool>() == false);
}
