#pragma once

// Core value types shared across the stack. Everything here is a plain
// immutable-by-convention aggregate; SI units throughout (W, J/K, s),
// temperatures in degrees Celsius, SOC as a fraction.

#include <cmath>
#include <stdexcept>
#include <string>

namespace iptm {

// ---------------------------------------------------------------------------
// Errors

struct DiscriminantNegative : std::runtime_error {
    explicit DiscriminantNegative(double p_bat)
        : std::runtime_error("battery power " + std::to_string(p_bat) +
                             " W exceeds the deliverable limit U_oc^2/(4 R_int)") {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TargetNotReached : std::runtime_error {
    explicit TargetNotReached(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct InfeasibleBounds : std::runtime_error {
    explicit InfeasibleBounds(const std::string& msg) : std::runtime_error(msg) {}
};

struct BracketFailure : std::runtime_error {
    explicit BracketFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct WrongScheduleKind : std::logic_error {
    explicit WrongScheduleKind(const std::string& msg) : std::logic_error(msg) {}
};

// ---------------------------------------------------------------------------
// Physical parameter blocks

/// Equivalent-circuit battery: SOC dynamics via open-circuit voltage and
/// internal resistance, thermal dynamics as a lumped mass.
struct BatteryParams {
    double open_circuit_voltage = 360.0;   // V
    double internal_resistance = 0.1;      // ohm
    double charge_capacity = 180000.0;     // coulombs (electric capacity)
    double thermal_mass = 100.0;           // kg
    double specific_heat = 1000.0;         // J/(kg K)
    double ambient_exchange_coeff = 5.0;   // W/K

    double heat_capacity() const { return thermal_mass * specific_heat; }  // J/K

    /// Largest discharge power the pack can deliver (discriminant root).
    double max_deliverable_power() const {
        return open_circuit_voltage * open_circuit_voltage / (4.0 * internal_resistance);
    }

    void validate() const {
        if (open_circuit_voltage <= 0 || internal_resistance <= 0 || charge_capacity <= 0 ||
            thermal_mass <= 0 || specific_heat <= 0 || ambient_exchange_coeff <= 0)
            throw ValidationError("battery: all parameters must be strictly positive");
    }
};

/// Lumped cabin thermal mass plus its constant heat loads.
struct CabinParams {
    double thermal_mass = 40.0;                 // kg
    double specific_heat = 1000.0;              // J/(kg K)
    double convection_conductance = 180.0;      // W/K, parameterizes Q_cov
    double solar_load = 600.0;                  // W
    double ventilation_load = 250.0;            // W
    double metabolic_load_per_occupant = 100.0; // W
    int occupant_count = 2;

    double heat_capacity() const { return thermal_mass * specific_heat; }  // J/K

    void validate() const {
        if (thermal_mass <= 0 || specific_heat <= 0 || convection_conductance <= 0)
            throw ValidationError("cabin: masses, heats, conductance must be strictly positive");
        if (solar_load < 0 || ventilation_load < 0 || metabolic_load_per_occupant < 0)
            throw ValidationError("cabin: loads must be nonnegative");
        if (occupant_count < 0) throw ValidationError("cabin: occupant_count must be >= 0");
    }
};

/// Shared cooling system: one heat-rejection budget split between battery
/// and cabin loops, each with its own cap.
struct CoolingParams {
    double cop = 2.0;            // dimensionless
    double q_total_max = 12000;  // W
    double q_bat_max = 9960;     // W
    double q_cab_max = 9960;     // W

    void validate() const {
        if (cop <= 0) throw ValidationError("cooling: cop must be > 0");
        if (q_bat_max <= 0 || q_bat_max > q_total_max)
            throw ValidationError("cooling: require 0 < q_bat_max <= q_total_max");
        if (q_cab_max <= 0 || q_cab_max > q_total_max)
            throw ValidationError("cooling: require 0 < q_cab_max <= q_total_max");
    }
};

/// Longitudinal vehicle model used only to turn a speed trace into a
/// traction-power demand.
struct LongitudinalParams {
    double mass = 3500.0;       // kg
    double cd_a = 3.0;          // m^2, drag coefficient times frontal area
    double c_rr = 0.012;        // rolling resistance coefficient
    double air_density = 1.2;   // kg/m^3
    double eta_drive = 0.9;     // driveline efficiency
    double gravity = 9.81;      // m/s^2

    void validate() const {
        if (mass <= 0 || cd_a <= 0 || c_rr < 0 || air_density <= 0 || eta_drive <= 0 ||
            eta_drive > 1.0)
            throw ValidationError("vehicle: implausible longitudinal parameters");
    }
};

/// Everything physical bundled together.
struct VehicleParams {
    BatteryParams battery;
    CabinParams cabin;
    CoolingParams cooling;
    LongitudinalParams vehicle;
    double ambient_temp = 38.0;  // deg C
    double p_aux_base = 500.0;   // W, non-HVAC auxiliary load

    void validate() const {
        battery.validate();
        cabin.validate();
        cooling.validate();
        vehicle.validate();
        if (p_aux_base < 0) throw ValidationError("p_aux_base must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// State and inputs

/// Integrated vehicle state: the three coupled states plus scenario clock.
struct VehicleState {
    double soc = 0.0;    // fraction in [0, 1]
    double t_bat = 0.0;  // deg C
    double t_cab = 0.0;  // deg C
    double clock = 0.0;  // s since scenario start

    void validate() const {
        if (soc < 0.0 || soc > 1.0) throw ValidationError("state: soc outside [0, 1]");
        if (!std::isfinite(t_bat) || !std::isfinite(t_cab))
            throw ValidationError("state: non-finite temperature");
        if (clock < 0.0) throw ValidationError("state: negative clock");
    }
};

/// Control + exogenous inputs over one interval. p_charge is a magnitude
/// (power delivered by the charger); the discharge/charge sign convention
/// lives in battery_power().
struct PowerInputs {
    double q_bat_cool = 0.0;   // W, >= 0
    double q_cab_cool = 0.0;   // W, >= 0
    double p_charge = 0.0;     // W, >= 0
    double p_traction = 0.0;   // W, exogenous
    double p_aux_base = 0.0;   // W
};

enum class Phase { Driving, Waiting, Charging, Done };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Driving: return "driving";
        case Phase::Waiting: return "waiting";
        case Phase::Charging: return "charging";
        case Phase::Done: return "done";
    }
    return "?";
}

}  // namespace iptm
