#pragma once

// Continuous-time right-hand sides for the three coupled states (SOC,
// battery temperature, cabin temperature) and the one-step integrators the
// controller and the plant share. All functions are pure.

#include <cmath>

#include "iptm/types.hpp"

namespace iptm::models {

/// Net electric power drawn from the battery terminal. Positive discharges,
/// negative charges. Cooling effort loads the battery through the COP.
inline double battery_power(const PowerInputs& in, const CoolingParams& cooling, bool charging) {
    double p_aux = in.p_aux_base + (in.q_bat_cool + in.q_cab_cool) / cooling.cop;
    return charging ? -in.p_charge + p_aux : in.p_traction + p_aux;
}

/// Battery current from the equivalent-circuit model: the physical root of
/// R I^2 - U I + P = 0. Positive while discharging.
inline double battery_current(double p_bat, const BatteryParams& bp) {
    double u = bp.open_circuit_voltage;
    double r = bp.internal_resistance;
    double disc = u * u - 4.0 * r * p_bat;
    if (disc < 0.0) throw DiscriminantNegative(p_bat);
    return (u - std::sqrt(disc)) / (2.0 * r);
}

/// d(SOC)/dt in 1/s. Identically -battery_current/charge_capacity.
inline double soc_rate(double p_bat, const BatteryParams& bp) {
    return -battery_current(p_bat, bp) / bp.charge_capacity;
}

/// Irreversible I^2 R heating, W. Symmetric in the sign of the current.
inline double battery_heat_gen(double i_bat, const BatteryParams& bp) {
    return i_bat * i_bat * bp.internal_resistance;
}

/// Battery<->ambient exchange, W. Positive means heat flows into the pack.
inline double battery_ambient_exchange(double t_bat, double t_amb, const BatteryParams& bp) {
    return bp.ambient_exchange_coeff * (t_amb - t_bat);
}

/// d(T_bat)/dt in K/s. Ambient exchange enters as an inflow (+).
inline double battery_temp_rate(double q_gen, double q_amb, double q_cool,
                                const BatteryParams& bp) {
    return (q_gen + q_amb - q_cool) / bp.heat_capacity();
}

/// d(T_cab)/dt in K/s from solar, convective, ventilation and metabolic
/// loads minus active cooling.
inline double cabin_temp_rate(double t_cab, double t_amb, double q_cool, const CabinParams& cp) {
    double q_cov = cp.convection_conductance * (t_amb - t_cab);
    double q_met = cp.occupant_count * cp.metabolic_load_per_occupant;
    return (cp.solar_load + q_cov + cp.ventilation_load + q_met - q_cool) / cp.heat_capacity();
}

struct StateRates {
    double d_soc = 0.0;
    double d_t_bat = 0.0;
    double d_t_cab = 0.0;
};

/// All three rates at once. `charging` selects the battery-power composition.
inline StateRates state_rates(const VehicleState& x, const PowerInputs& in,
                              const VehicleParams& p, bool charging) {
    double p_bat = battery_power(in, p.cooling, charging);
    double i_bat = battery_current(p_bat, p.battery);
    StateRates r;
    r.d_soc = -i_bat / p.battery.charge_capacity;
    double q_gen = battery_heat_gen(i_bat, p.battery);
    double q_amb = battery_ambient_exchange(x.t_bat, p.ambient_temp, p.battery);
    r.d_t_bat = battery_temp_rate(q_gen, q_amb, in.q_bat_cool, p.battery);
    r.d_t_cab = cabin_temp_rate(x.t_cab, p.ambient_temp, in.q_cab_cool, p.cabin);
    return r;
}

/// Forward-Euler update, the discretization the MPC constraints use.
inline VehicleState euler_step(const VehicleState& x, const PowerInputs& in, double dt,
                               const VehicleParams& p, bool charging) {
    if (dt <= 0.0) throw ValidationError("euler_step: dt must be > 0");
    StateRates r = state_rates(x, in, p, charging);
    VehicleState next = x;
    next.soc += r.d_soc * dt;
    next.t_bat += r.d_t_bat * dt;
    next.t_cab += r.d_t_cab * dt;
    next.clock += dt;
    return next;
}

/// Classic RK4 step with inputs held constant. Optional plant integrator
/// for model-mismatch studies; the MPC always uses euler_step.
inline VehicleState rk4_step(const VehicleState& x, const PowerInputs& in, double dt,
                             const VehicleParams& p, bool charging) {
    if (dt <= 0.0) throw ValidationError("rk4_step: dt must be > 0");
    auto eval = [&](const VehicleState& s) { return state_rates(s, in, p, charging); };
    auto advance = [&](const VehicleState& s, const StateRates& r, double h) {
        VehicleState out = s;
        out.soc = x.soc + r.d_soc * h;
        out.t_bat = x.t_bat + r.d_t_bat * h;
        out.t_cab = x.t_cab + r.d_t_cab * h;
        return out;
    };
    StateRates k1 = eval(x);
    StateRates k2 = eval(advance(x, k1, dt / 2));
    StateRates k3 = eval(advance(x, k2, dt / 2));
    StateRates k4 = eval(advance(x, k3, dt));
    VehicleState next = x;
    next.soc += dt / 6.0 * (k1.d_soc + 2 * k2.d_soc + 2 * k3.d_soc + k4.d_soc);
    next.t_bat += dt / 6.0 * (k1.d_t_bat + 2 * k2.d_t_bat + 2 * k3.d_t_bat + k4.d_t_bat);
    next.t_cab += dt / 6.0 * (k1.d_t_cab + 2 * k2.d_t_cab + 2 * k3.d_t_cab + k4.d_t_cab);
    next.clock += dt;
    return next;
}

// ---------------------------------------------------------------------------
// First derivatives used by the transcription's analytic gradients.

struct RateJacobians {
    // d(rate)/d(p_bat) column, chain-ruled into controls by the caller.
    double dsoc_dpbat = 0.0;
    double dtbat_dpbat = 0.0;
    // direct state coupling
    double dtbat_dtbat = 0.0;
    double dtcab_dtcab = 0.0;
    // direct cooling terms
    double dtbat_dqbat = 0.0;
    double dtcab_dqcab = 0.0;
    // battery power composition
    double dpbat_dqbat = 0.0;
    double dpbat_dqcab = 0.0;
    double dpbat_dpchg = 0.0;
};

inline RateJacobians rate_jacobians(const VehicleState& x, const PowerInputs& in,
                                    const VehicleParams& p, bool charging) {
    (void)x;
    double u = p.battery.open_circuit_voltage;
    double r = p.battery.internal_resistance;
    double p_bat = battery_power(in, p.cooling, charging);
    double disc = u * u - 4.0 * r * p_bat;
    if (disc < 0.0) throw DiscriminantNegative(p_bat);
    double s = std::sqrt(disc);
    double i_bat = (u - s) / (2.0 * r);
    double di_dp = 1.0 / s;  // d(i_bat)/d(p_bat)

    RateJacobians j;
    j.dsoc_dpbat = -di_dp / p.battery.charge_capacity;
    j.dtbat_dpbat = 2.0 * i_bat * r * di_dp / p.battery.heat_capacity();
    j.dtbat_dtbat = -p.battery.ambient_exchange_coeff / p.battery.heat_capacity();
    j.dtcab_dtcab = -p.cabin.convection_conductance / p.cabin.heat_capacity();
    j.dtbat_dqbat = -1.0 / p.battery.heat_capacity();
    j.dtcab_dqcab = -1.0 / p.cabin.heat_capacity();
    j.dpbat_dqbat = 1.0 / p.cooling.cop;
    j.dpbat_dqcab = 1.0 / p.cooling.cop;
    j.dpbat_dpchg = charging ? -1.0 : 0.0;
    return j;
}

}  // namespace iptm::models
