#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "iptm/models.hpp"

using namespace iptm;
using Catch::Approx;

namespace {
BatteryParams test_battery() {
    BatteryParams b;
    b.open_circuit_voltage = 360.0;
    b.internal_resistance = 0.1;
    b.charge_capacity = 180000.0;
    b.thermal_mass = 100.0;
    b.specific_heat = 1000.0;
    b.ambient_exchange_coeff = 5.0;
    return b;
}
}  // namespace

TEST_CASE("battery_power composition") {
    CoolingParams cool;
    cool.cop = 2.0;

    PowerInputs zero;
    CHECK(models::battery_power(zero, cool, false) == 0.0);
    CHECK(models::battery_power(zero, cool, true) == 0.0);

    PowerInputs chg;
    chg.p_charge = 50000.0;
    chg.p_aux_base = 500.0;
    chg.q_bat_cool = 3000.0;
    chg.q_cab_cool = 1000.0;
    CHECK(models::battery_power(chg, cool, true) == Approx(-47500.0));

    PowerInputs drv;
    drv.p_traction = 20000.0;
    drv.p_aux_base = 500.0;
    CHECK(models::battery_power(drv, cool, false) == Approx(20500.0));
}

TEST_CASE("battery_current and soc_rate closed form") {
    BatteryParams b = test_battery();

    CHECK(models::battery_current(0.0, b) == 0.0);
    CHECK(models::soc_rate(0.0, b) == 0.0);

    // discharge at 36 kW: I = (360 - sqrt(360^2 - 4*0.1*36000)) / 0.2
    double i_dis = (360.0 - std::sqrt(115200.0)) / 0.2;
    CHECK(models::battery_current(36000.0, b) == Approx(i_dis).epsilon(1e-12));
    CHECK(i_dis == Approx(102.9437).margin(1e-3));
    CHECK(models::soc_rate(36000.0, b) == Approx(-i_dis / 180000.0).epsilon(1e-12));
    CHECK(models::soc_rate(36000.0, b) == Approx(-5.719e-4).margin(1e-6));

    // charge at 36 kW: I = (360 - sqrt(360^2 + 4*0.1*36000)) / 0.2
    double i_chg = (360.0 - std::sqrt(144000.0)) / 0.2;
    CHECK(models::battery_current(-36000.0, b) == Approx(i_chg).epsilon(1e-12));
    CHECK(i_chg == Approx(-97.3659).margin(1e-3));
    // power balance check of the root: U*I - I^2*R == p_bat
    CHECK(360.0 * i_chg - i_chg * i_chg * 0.1 == Approx(-36000.0).margin(1e-6));
    CHECK(models::soc_rate(-36000.0, b) == Approx(5.4092e-4).margin(1e-7));

    CHECK_THROWS_AS(models::battery_current(b.max_deliverable_power() * 1.01, b),
                    DiscriminantNegative);
}

TEST_CASE("soc_rate is -I/C exactly and strictly decreasing in p_bat") {
    BatteryParams b = test_battery();
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> power(-80000.0, 80000.0);
    for (int k = 0; k < 1000; ++k) {
        double p = power(rng);
        CHECK(models::soc_rate(p, b) == -models::battery_current(p, b) / b.charge_capacity);
        double h = 10.0;
        CHECK(models::soc_rate(p + h, b) < models::soc_rate(p, b));
    }
}

TEST_CASE("battery heat generation") {
    BatteryParams b = test_battery();
    b.internal_resistance = 0.05;
    CHECK(models::battery_heat_gen(0.0, b) == 0.0);
    CHECK(models::battery_heat_gen(100.0, b) == Approx(500.0));
    CHECK(models::battery_heat_gen(-100.0, b) == Approx(500.0));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> cur(-300.0, 300.0);
    for (int k = 0; k < 200; ++k) {
        double i = cur(rng);
        CHECK(models::battery_heat_gen(i, b) >= 0.0);
        CHECK(models::battery_heat_gen(i, b) == models::battery_heat_gen(-i, b));
    }
}

TEST_CASE("battery ambient exchange sign") {
    BatteryParams b = test_battery();
    CHECK(models::battery_ambient_exchange(30.0, 30.0, b) == 0.0);
    CHECK(models::battery_ambient_exchange(30.0, 38.0, b) == Approx(40.0));
    CHECK(models::battery_ambient_exchange(40.0, 38.0, b) == Approx(-10.0));
}

TEST_CASE("battery temperature rate") {
    BatteryParams b = test_battery();  // m*c = 1e5 J/K
    CHECK(models::battery_temp_rate(0.0, 0.0, 0.0, b) == 0.0);
    CHECK(models::battery_temp_rate(500.0, 40.0, 2540.0, b) == Approx(-0.02));
    CHECK(models::battery_temp_rate(500.0, 40.0, 0.0, b) == Approx(5.4e-3));
}

TEST_CASE("cabin temperature rate") {
    CabinParams c;
    c.thermal_mass = 40.0;
    c.specific_heat = 1000.0;  // m*c = 4e4
    c.convection_conductance = 50.0;
    c.solar_load = 300.0;
    c.ventilation_load = 100.0;
    c.metabolic_load_per_occupant = 100.0;
    c.occupant_count = 1;
    CHECK(models::cabin_temp_rate(24.0, 38.0, 1200.0, c) == Approx(0.0).margin(1e-15));
    CHECK(models::cabin_temp_rate(24.0, 38.0, 2000.0, c) == Approx(-0.02));

    CabinParams quiet;
    quiet.solar_load = 0.0;
    quiet.ventilation_load = 0.0;
    quiet.occupant_count = 0;
    CHECK(models::cabin_temp_rate(38.0, 38.0, 0.0, quiet) == 0.0);
}

TEST_CASE("euler_step fixed point and arithmetic") {
    VehicleParams p;
    p.battery = test_battery();
    p.ambient_temp = 30.0;  // equals t_bat and t_cab below
    p.cabin.solar_load = 0.0;
    p.cabin.ventilation_load = 0.0;
    p.cabin.occupant_count = 0;
    p.p_aux_base = 0.0;

    VehicleState x{0.5, 30.0, 30.0, 100.0};
    PowerInputs u;  // all zero
    VehicleState next = models::euler_step(x, u, 60.0, p, false);
    CHECK(next.soc == Approx(0.5));
    CHECK(next.t_bat == Approx(30.0));
    CHECK(next.t_cab == Approx(30.0));
    CHECK(next.clock == Approx(160.0));

    // one Euler step on the soc equation alone: 0.3 + 5.07e-4 * 10
    CHECK(0.3 + 5.07e-4 * 10.0 == Approx(0.30507));

    CHECK_THROWS_AS(models::euler_step(x, u, 0.0, p, false), ValidationError);
}

TEST_CASE("uncooled battery with hot ambient never cools") {
    VehicleParams p;
    p.battery = test_battery();
    p.ambient_temp = 38.0;
    VehicleState x{0.5, 30.0, 24.0, 0.0};
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> power(5000.0, 40000.0);
    for (int k = 0; k < 200; ++k) {
        PowerInputs u;
        u.p_traction = power(rng);
        VehicleState n = models::euler_step(x, u, 5.0, p, false);
        CHECK(n.t_bat >= x.t_bat);
        x = n;
        if (x.t_bat > 37.9) break;
    }
}

TEST_CASE("euler convergence is first order on the constant-load cabin") {
    // pure convection cabin: dT/dt = k (T_amb - T) / mc, analytic solution
    CabinParams c;
    c.thermal_mass = 40.0;
    c.specific_heat = 1000.0;
    c.convection_conductance = 200.0;
    c.solar_load = 0.0;
    c.ventilation_load = 0.0;
    c.occupant_count = 0;
    double t_amb = 38.0, t0 = 24.0, horizon = 600.0;
    double tau = c.heat_capacity() / c.convection_conductance;
    double exact = t_amb + (t0 - t_amb) * std::exp(-horizon / tau);

    auto integrate = [&](double dt) {
        double t = t0;
        int steps = static_cast<int>(horizon / dt);
        for (int k = 0; k < steps; ++k) t += models::cabin_temp_rate(t, t_amb, 0.0, c) * dt;
        return t;
    };
    double err_coarse = std::abs(integrate(10.0) - exact);
    double err_fine = std::abs(integrate(5.0) - exact);
    double ratio = err_coarse / err_fine;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
}

TEST_CASE("rk4 step beats euler on the cabin subcase") {
    VehicleParams p;
    p.battery = test_battery();
    p.ambient_temp = 38.0;
    p.cabin.solar_load = 0.0;
    p.cabin.ventilation_load = 0.0;
    p.cabin.occupant_count = 0;
    p.p_aux_base = 0.0;
    VehicleState x{0.5, 30.0, 24.0, 0.0};
    PowerInputs u;
    double tau = p.cabin.heat_capacity() / p.cabin.convection_conductance;
    double exact = 38.0 + (24.0 - 38.0) * std::exp(-60.0 / tau);
    VehicleState e = models::euler_step(x, u, 60.0, p, false);
    VehicleState r = models::rk4_step(x, u, 60.0, p, false);
    CHECK(std::abs(r.t_cab - exact) < std::abs(e.t_cab - exact));
}
