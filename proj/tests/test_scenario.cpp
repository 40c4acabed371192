#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "iptm/scenario.hpp"

using namespace iptm;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {
const std::string kConfigDir = IPTM_CONFIG_DIR;

fs::path temp_dir() {
    fs::path d = fs::temp_directory_path() / "iptm_test_scenario";
    fs::create_directories(d);
    return d;
}
}  // namespace

TEST_CASE("traction power") {
    LongitudinalParams vp;
    vp.mass = 2500.0;
    vp.cd_a = 2.0;
    vp.c_rr = 0.01;
    vp.air_density = 1.2;
    vp.eta_drive = 0.9;
    CHECK(scenario::traction_power(0.0, 0.0, vp) == 0.0);
    CHECK(scenario::traction_power(15.0, 0.0, vp) == Approx(8587.5).margin(1.0));
    // heavy braking clips to zero
    CHECK(scenario::traction_power(15.0, -5.0, vp) == 0.0);
    CHECK_THROWS_AS(scenario::traction_power(-1.0, 0.0, vp), ValidationError);
}

TEST_CASE("traction power is monotone in speed at zero accel") {
    LongitudinalParams vp;
    double last = 0.0;
    for (double v = 0.0; v <= 30.0; v += 0.5) {
        double p = scenario::traction_power(v, 0.0, vp);
        CHECK(p >= last);
        last = p;
    }
}

TEST_CASE("nominal scenario loads with the documented defaults") {
    scenario::Scenario s = scenario::load_scenario(kConfigDir + "/nominal.toml");
    CHECK(s.params.ambient_temp == 38.0);
    CHECK(s.initial_soc == 0.3);
    CHECK(s.soc_targ == 0.6);
    CHECK(s.limits.p_chg_max == 80000.0);
    CHECK(s.budget_t_chg == 1800.0);
    CHECK(s.limits.t_bat_min == 15.0);
    CHECK(s.limits.t_bat_max == 35.0);
    CHECK(s.limits.t_cab_min == 23.0);
    CHECK(s.limits.t_cab_max == 25.0);
    CHECK(s.params.cooling.q_bat_max == Approx(0.83 * s.params.cooling.q_total_max));
    CHECK(s.params.cooling.q_cab_max == Approx(0.83 * s.params.cooling.q_total_max));
    CHECK(s.cycle.duration() > 0.0);
    CHECK(s.arrival_time >= s.cycle.duration());
}

TEST_CASE("scenario validation names the broken field") {
    fs::path dir = temp_dir();
    scenario::Scenario s = scenario::load_scenario(kConfigDir + "/nominal.toml");

    SECTION("soc bounds inverted") {
        scenario::Scenario bad = s;
        bad.limits.soc_min = 0.9;
        bad.limits.soc_max = 0.2;
        fs::path p = dir / "bad_soc.toml";
        scenario::save_scenario(bad, p.string(), "bad_soc_cycle.csv");
        CHECK_THROWS_WITH(scenario::load_scenario(p.string()),
                          Catch::Matchers::ContainsSubstring("soc_min"));
    }

    SECTION("initial soc above target rejected") {
        scenario::Scenario bad = s;
        bad.initial_soc = 0.7;
        CHECK_THROWS_WITH(bad.validate(), Catch::Matchers::ContainsSubstring("soc_target"));
    }

    SECTION("missing file") {
        CHECK_THROWS_AS(scenario::load_scenario((dir / "nope.toml").string()),
                        scenario::ParseErrorFile);
    }
}

TEST_CASE("scenario round-trips through save/load") {
    fs::path dir = temp_dir();
    scenario::Scenario s = scenario::load_scenario(kConfigDir + "/nominal.toml");
    fs::path p = dir / "roundtrip.toml";
    scenario::save_scenario(s, p.string(), "roundtrip_cycle.csv");
    scenario::Scenario t = scenario::load_scenario(p.string());
    CHECK(t.params.battery.charge_capacity == Approx(s.params.battery.charge_capacity));
    CHECK(t.params.cabin.convection_conductance == Approx(s.params.cabin.convection_conductance));
    CHECK(t.alpha == Approx(s.alpha));
    CHECK(t.arrival_time == Approx(s.arrival_time));
    CHECK(t.limits.comfort_margin == Approx(s.limits.comfort_margin));
    REQUIRE(t.cycle.time_s.size() == s.cycle.time_s.size());
    for (size_t i = 0; i < t.cycle.time_s.size(); i += 37) {
        CHECK(t.cycle.time_s[i] == Approx(s.cycle.time_s[i]));
        CHECK(t.cycle.speed_mps[i] == Approx(s.cycle.speed_mps[i]).margin(1e-4));
    }
}

TEST_CASE("charging-only scenario (empty cycle) is valid") {
    scenario::Scenario s = scenario::load_scenario(kConfigDir + "/nominal.toml");
    s.cycle = {};
    s.arrival_time = 0.0;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("drive cycle csv rejects malformed input") {
    fs::path dir = temp_dir();
    fs::path p = dir / "bad_cycle.csv";
    {
        std::ofstream out(p);
        out << "speed,time\n1,2\n";
    }
    CHECK_THROWS_AS(scenario::load_cycle_csv(p.string()), scenario::ParseErrorFile);
    {
        std::ofstream out(p);
        out << "time_s,speed_mps\n0,1\n0,2\n";  // non-increasing time
    }
    CHECK_THROWS_AS(scenario::load_cycle_csv(p.string()), ValidationError);
}

TEST_CASE("case presets map to the published weight pairings") {
    using scenario::CaseId;
    auto i = scenario::CasePreset::make(CaseId::I);
    CHECK(i.preview == mpc::PreviewKind::AccuratePreview);
    CHECK(i.beta1 == 1e11);
    CHECK(i.beta2 == 1e10);
    CHECK(i.hard_budget);

    auto iia = scenario::CasePreset::make(CaseId::IIa);
    CHECK(iia.preview == mpc::PreviewKind::NoChargePreview);
    CHECK(iia.beta2 == 1e10);
    CHECK_FALSE(iia.hard_budget);
    CHECK(scenario::CasePreset::make(CaseId::IIb).beta2 == 1e5);
    CHECK(scenario::CasePreset::make(CaseId::IIc).beta2 == 1e3);

    auto iii = scenario::CasePreset::make(CaseId::III);
    CHECK(iii.schedule == mpc::ScheduleKind::SocAware);
    CHECK(iii.beta0 == 10.0);
    CHECK(iii.b == 10.0);

    scenario::Scenario s = scenario::load_scenario(kConfigDir + "/nominal.toml");
    for (CaseId id : {CaseId::I, CaseId::IIa, CaseId::IIb, CaseId::IIc, CaseId::III})
        CHECK_NOTHROW(scenario::make_run_setup(s, scenario::CasePreset::make(id)));

    CHECK_THROWS_AS(scenario::parse_case("IV"), ValidationError);
    CHECK(scenario::parse_case("IIb") == CaseId::IIb);
}

TEST_CASE("calibrate_alpha on a fast scenario") {
    // shrink the problem so each closed loop takes well under a second
    scenario::Scenario s = scenario::load_scenario(kConfigDir + "/nominal.toml");
    s.cycle = {};
    s.arrival_time = 0.0;
    s.params.battery.charge_capacity = 86400.0;  // 24 Ah
    s.params.battery.thermal_mass = 50.0;
    s.budget_t_chg = 600.0;
    s.n2 = 8;
    s.dt2_max = 120.0;
    s.dt_ctrl_charge = 30.0;

    SECTION("budget-bound regime meets the target at the bracket midpoint") {
        double alpha = scenario::calibrate_alpha(s, 600.0);
        double t = scenario::closed_loop_t_chg_s(s, alpha);
        CHECK(std::abs(t - 600.0) / 600.0 < 0.01);
    }

    SECTION("physically impossible target fails the bracket") {
        CHECK_THROWS_AS(scenario::calibrate_alpha(s, 10.0), BracketFailure);
    }
}
