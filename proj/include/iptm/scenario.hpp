#pragma once

// Scenario ingestion and the five case-study presets: TOML config with
// field-level validation, drive-cycle CSV to traction power, and the alpha
// calibration utility.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iptm/mpc.hpp"
#include "iptm/toml.hpp"
#include "iptm/types.hpp"

namespace iptm::scenario {

struct ParseErrorFile : std::runtime_error {
    explicit ParseErrorFile(const std::string& msg) : std::runtime_error(msg) {}
};

struct DriveCycle {
    std::vector<double> time_s;
    std::vector<double> speed_mps;

    double duration() const { return time_s.empty() ? 0.0 : time_s.back(); }

    void validate() const {
        if (time_s.size() != speed_mps.size())
            throw ValidationError("drive cycle: column length mismatch");
        for (size_t i = 1; i < time_s.size(); ++i)
            if (time_s[i] <= time_s[i - 1])
                throw ValidationError("drive cycle: time must be strictly increasing");
        for (double v : speed_mps)
            if (v < 0) throw ValidationError("drive cycle: negative speed");
    }
};

enum class CaseId { I, IIa, IIb, IIc, III };

inline const char* case_name(CaseId id) {
    switch (id) {
        case CaseId::I: return "I";
        case CaseId::IIa: return "IIa";
        case CaseId::IIb: return "IIb";
        case CaseId::IIc: return "IIc";
        case CaseId::III: return "III";
    }
    return "?";
}

inline CaseId parse_case(const std::string& s) {
    if (s == "I") return CaseId::I;
    if (s == "IIa") return CaseId::IIa;
    if (s == "IIb") return CaseId::IIb;
    if (s == "IIc") return CaseId::IIc;
    if (s == "III") return CaseId::III;
    throw ValidationError("unknown case id '" + s + "' (expected I, IIa, IIb, IIc or III)");
}

struct Scenario {
    int schema_version = 1;
    VehicleParams params;
    double initial_soc = 0.3;
    double initial_t_bat = 32.0;
    double initial_t_cab = 24.0;
    double soc_targ = 0.6;
    double budget_t_chg = 1800.0;
    double arrival_time = 1200.0;
    transcription::OcpLimits limits;
    DriveCycle cycle;  // may be empty (charging-only scenario)
    // controller knobs
    double dt1 = 30.0;
    int n2 = 20;
    double dt2_max = 180.0;
    double dt_ctrl_drive = 30.0;
    double dt_ctrl_charge = 10.0;
    double plant_dt = 1.0;
    double alpha = 1e-2;
    double beta1 = 1e11;

    void validate() const {
        params.validate();
        limits.validate();
        cycle.validate();
        if (initial_soc < limits.soc_min || initial_soc > limits.soc_max)
            throw ValidationError("scenario: initial_soc outside soc bounds");
        if (soc_targ <= initial_soc)
            throw ValidationError("scenario: soc_target must exceed initial_soc");
        if (soc_targ > limits.soc_max)
            throw ValidationError("scenario: soc_target above soc_max");
        if (budget_t_chg <= 0) throw ValidationError("scenario: budget_t_chg_s must be > 0");
        if (arrival_time < cycle.duration() - 1e-9)
            throw ValidationError("scenario: arrival_time_s must not precede the drive cycle end");
        if (initial_t_bat < limits.t_bat_min || initial_t_bat > limits.t_bat_max)
            throw ValidationError("scenario: initial_t_bat_c outside battery bounds");
        if (initial_t_cab < limits.t_cab_min || initial_t_cab > limits.t_cab_max)
            throw ValidationError("scenario: initial_t_cab_c outside cabin bounds");
    }
};

// ---------------------------------------------------------------------------
// Longitudinal model

/// Road-load plus inertial traction power; regenerative braking clipped
/// to zero.
inline double traction_power(double speed, double accel, const LongitudinalParams& vp) {
    if (speed < 0) throw ValidationError("traction_power: negative speed");
    double force = 0.5 * vp.air_density * vp.cd_a * speed * speed +
                   vp.c_rr * vp.mass * vp.gravity + vp.mass * accel;
    return std::max(0.0, force * speed / vp.eta_drive);
}

/// Sample the cycle into a ZOH traction-power profile.
inline mpc::TractionProfile traction_profile(const DriveCycle& cycle,
                                             const LongitudinalParams& vp) {
    mpc::TractionProfile prof;
    size_t n = cycle.time_s.size();
    prof.time_s.reserve(n);
    prof.power_w.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        double accel = 0.0;
        if (i + 1 < n)
            accel = (cycle.speed_mps[i + 1] - cycle.speed_mps[i]) /
                    (cycle.time_s[i + 1] - cycle.time_s[i]);
        prof.time_s.push_back(cycle.time_s[i]);
        prof.power_w.push_back(traction_power(cycle.speed_mps[i], accel, vp));
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Drive-cycle CSV ("time_s,speed_mps", header required)

inline DriveCycle load_cycle_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseErrorFile("cannot open drive cycle '" + path + "'");
    DriveCycle c;
    std::string line;
    if (!std::getline(in, line)) throw ParseErrorFile("empty drive cycle '" + path + "'");
    if (line.find("time_s") == std::string::npos || line.find("speed_mps") == std::string::npos)
        throw ParseErrorFile("drive cycle '" + path + "': header 'time_s,speed_mps' required");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string t, v;
        if (!std::getline(row, t, ',') || !std::getline(row, v))
            throw ParseErrorFile("drive cycle '" + path + "': bad row at line " +
                                 std::to_string(lineno));
        try {
            c.time_s.push_back(std::stod(t));
            c.speed_mps.push_back(std::stod(v));
        } catch (const std::exception&) {
            throw ParseErrorFile("drive cycle '" + path + "': non-numeric row at line " +
                                 std::to_string(lineno));
        }
    }
    c.validate();
    return c;
}

inline void save_cycle_csv(const DriveCycle& c, const std::string& path) {
    std::ofstream out(path);
    out << "time_s,speed_mps\n";
    char buf[64];
    for (size_t i = 0; i < c.time_s.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.4f\n", c.time_s[i], c.speed_mps[i]);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Scenario TOML

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseErrorFile("cannot open scenario '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    toml::Document doc;
    try {
        doc = toml::parse(buffer.str());
    } catch (const toml::ParseError& e) {
        throw ParseErrorFile("scenario '" + path + "': " + e.what());
    }

    Scenario s;
    try {
        s.schema_version = static_cast<int>(doc.get_integer_or("schema_version", 1));

        s.params.ambient_temp = doc.get_number("scenario.ambient_temp_c");
        s.initial_soc = doc.get_number("scenario.initial_soc");
        s.initial_t_bat = doc.get_number("scenario.initial_t_bat_c");
        s.initial_t_cab = doc.get_number("scenario.initial_t_cab_c");
        s.soc_targ = doc.get_number("scenario.soc_target");
        s.budget_t_chg = doc.get_number("scenario.budget_t_chg_s");
        s.arrival_time = doc.get_number("scenario.arrival_time_s");

        auto& b = s.params.battery;
        b.open_circuit_voltage = doc.get_number("battery.u_oc_v");
        b.internal_resistance = doc.get_number("battery.r_int_ohm");
        b.charge_capacity = doc.get_number("battery.capacity_c");
        b.thermal_mass = doc.get_number("battery.thermal_mass_kg");
        b.specific_heat = doc.get_number("battery.specific_heat_j_per_kgk");
        b.ambient_exchange_coeff = doc.get_number("battery.ambient_exchange_w_per_k");

        auto& c = s.params.cabin;
        c.thermal_mass = doc.get_number("cabin.thermal_mass_kg");
        c.specific_heat = doc.get_number("cabin.specific_heat_j_per_kgk");
        c.convection_conductance = doc.get_number("cabin.convection_w_per_k");
        c.solar_load = doc.get_number("cabin.solar_w");
        c.ventilation_load = doc.get_number("cabin.ventilation_w");
        c.metabolic_load_per_occupant = doc.get_number("cabin.metabolic_w_per_occupant");
        c.occupant_count = static_cast<int>(doc.get_integer("cabin.occupants"));

        auto& k = s.params.cooling;
        k.cop = doc.get_number("cooling.cop");
        k.q_total_max = doc.get_number("cooling.q_total_max_w");
        k.q_bat_max = doc.get_number_or("cooling.q_bat_max_w", 0.83 * k.q_total_max);
        k.q_cab_max = doc.get_number_or("cooling.q_cab_max_w", 0.83 * k.q_total_max);

        auto& v = s.params.vehicle;
        v.mass = doc.get_number("vehicle.mass_kg");
        v.cd_a = doc.get_number("vehicle.cd_a_m2");
        v.c_rr = doc.get_number("vehicle.c_rr");
        v.air_density = doc.get_number_or("vehicle.air_density_kg_m3", 1.2);
        v.eta_drive = doc.get_number("vehicle.eta_drive");
        s.params.p_aux_base = doc.get_number("vehicle.p_aux_base_w");

        auto& lim = s.limits;
        lim.soc_min = doc.get_number("bounds.soc_min");
        lim.soc_max = doc.get_number("bounds.soc_max");
        lim.t_bat_min = doc.get_number("bounds.t_bat_min_c");
        lim.t_bat_max = doc.get_number("bounds.t_bat_max_c");
        lim.t_cab_min = doc.get_number("bounds.t_cab_min_c");
        lim.t_cab_max = doc.get_number("bounds.t_cab_max_c");
        lim.p_chg_max = doc.get_number("bounds.p_chg_max_w");
        lim.comfort_margin = doc.get_number_or("bounds.comfort_margin_c", 0.01);

        s.dt1 = doc.get_number_or("mpc.dt1_s", 30.0);
        s.n2 = static_cast<int>(doc.get_integer_or("mpc.n2", 20));
        s.dt2_max = doc.get_number_or("mpc.dt2_max_s", 180.0);
        s.dt_ctrl_drive = doc.get_number_or("mpc.dt_ctrl_drive_s", 30.0);
        s.dt_ctrl_charge = doc.get_number_or("mpc.dt_ctrl_charge_s", 10.0);
        s.plant_dt = doc.get_number_or("mpc.plant_dt_s", 1.0);
        s.alpha = doc.get_number_or("mpc.alpha", 1e-2);
        s.beta1 = doc.get_number_or("mpc.beta1", 1e11);

        if (doc.contains("drive.cycle_csv")) {
            std::filesystem::path cyc = doc.get_string("drive.cycle_csv");
            if (cyc.is_relative()) cyc = std::filesystem::path(path).parent_path() / cyc;
            s.cycle = load_cycle_csv(cyc.string());
        }
    } catch (const toml::ParseError& e) {
        throw ParseErrorFile("scenario '" + path + "': " + e.what());
    }

    s.validate();
    return s;
}

inline void save_scenario(const Scenario& s, const std::string& path,
                          const std::string& cycle_csv_name = "") {
    toml::Document doc;
    doc.set("schema_version", static_cast<int64_t>(s.schema_version));
    doc.set("scenario.ambient_temp_c", s.params.ambient_temp);
    doc.set("scenario.initial_soc", s.initial_soc);
    doc.set("scenario.initial_t_bat_c", s.initial_t_bat);
    doc.set("scenario.initial_t_cab_c", s.initial_t_cab);
    doc.set("scenario.soc_target", s.soc_targ);
    doc.set("scenario.budget_t_chg_s", s.budget_t_chg);
    doc.set("scenario.arrival_time_s", s.arrival_time);
    doc.set("battery.u_oc_v", s.params.battery.open_circuit_voltage);
    doc.set("battery.r_int_ohm", s.params.battery.internal_resistance);
    doc.set("battery.capacity_c", s.params.battery.charge_capacity);
    doc.set("battery.thermal_mass_kg", s.params.battery.thermal_mass);
    doc.set("battery.specific_heat_j_per_kgk", s.params.battery.specific_heat);
    doc.set("battery.ambient_exchange_w_per_k", s.params.battery.ambient_exchange_coeff);
    doc.set("cabin.thermal_mass_kg", s.params.cabin.thermal_mass);
    doc.set("cabin.specific_heat_j_per_kgk", s.params.cabin.specific_heat);
    doc.set("cabin.convection_w_per_k", s.params.cabin.convection_conductance);
    doc.set("cabin.solar_w", s.params.cabin.solar_load);
    doc.set("cabin.ventilation_w", s.params.cabin.ventilation_load);
    doc.set("cabin.metabolic_w_per_occupant", s.params.cabin.metabolic_load_per_occupant);
    doc.set("cabin.occupants", static_cast<int64_t>(s.params.cabin.occupant_count));
    doc.set("cooling.cop", s.params.cooling.cop);
    doc.set("cooling.q_total_max_w", s.params.cooling.q_total_max);
    doc.set("cooling.q_bat_max_w", s.params.cooling.q_bat_max);
    doc.set("cooling.q_cab_max_w", s.params.cooling.q_cab_max);
    doc.set("vehicle.mass_kg", s.params.vehicle.mass);
    doc.set("vehicle.cd_a_m2", s.params.vehicle.cd_a);
    doc.set("vehicle.c_rr", s.params.vehicle.c_rr);
    doc.set("vehicle.air_density_kg_m3", s.params.vehicle.air_density);
    doc.set("vehicle.eta_drive", s.params.vehicle.eta_drive);
    doc.set("vehicle.p_aux_base_w", s.params.p_aux_base);
    doc.set("bounds.soc_min", s.limits.soc_min);
    doc.set("bounds.soc_max", s.limits.soc_max);
    doc.set("bounds.t_bat_min_c", s.limits.t_bat_min);
    doc.set("bounds.t_bat_max_c", s.limits.t_bat_max);
    doc.set("bounds.t_cab_min_c", s.limits.t_cab_min);
    doc.set("bounds.t_cab_max_c", s.limits.t_cab_max);
    doc.set("bounds.p_chg_max_w", s.limits.p_chg_max);
    doc.set("bounds.comfort_margin_c", s.limits.comfort_margin);
    doc.set("mpc.dt1_s", s.dt1);
    doc.set("mpc.n2", static_cast<int64_t>(s.n2));
    doc.set("mpc.dt2_max_s", s.dt2_max);
    doc.set("mpc.dt_ctrl_drive_s", s.dt_ctrl_drive);
    doc.set("mpc.dt_ctrl_charge_s", s.dt_ctrl_charge);
    doc.set("mpc.plant_dt_s", s.plant_dt);
    doc.set("mpc.alpha", s.alpha);
    doc.set("mpc.beta1", s.beta1);
    if (!s.cycle.time_s.empty()) {
        std::string name = cycle_csv_name.empty() ? "cycle.csv" : cycle_csv_name;
        doc.set("drive.cycle_csv", name);
        std::filesystem::path cyc = std::filesystem::path(path).parent_path() / name;
        save_cycle_csv(s.cycle, cyc.string());
    }
    std::ofstream out(path);
    if (!out) throw ParseErrorFile("cannot write scenario '" + path + "'");
    out << toml::serialize(doc);
}

// ---------------------------------------------------------------------------
// Case presets (Table-I pairings plus the SOC-aware Case III)

struct CasePreset {
    CaseId id = CaseId::I;
    mpc::PreviewKind preview = mpc::PreviewKind::AccuratePreview;
    mpc::ScheduleKind schedule = mpc::ScheduleKind::Constant;
    double beta1 = 1e11;
    double beta2 = 1e10;  // Constant schedule value
    double beta0 = 10.0;  // SocAware parameters
    double b = 10.0;
    bool hard_budget = false;

    static CasePreset make(CaseId id) {
        CasePreset p;
        p.id = id;
        switch (id) {
            case CaseId::I:
                p.preview = mpc::PreviewKind::AccuratePreview;
                p.beta2 = 1e10;
                p.hard_budget = true;
                break;
            case CaseId::IIa:
                p.preview = mpc::PreviewKind::NoChargePreview;
                p.beta2 = 1e10;
                break;
            case CaseId::IIb:
                p.preview = mpc::PreviewKind::NoChargePreview;
                p.beta2 = 1e5;
                break;
            case CaseId::IIc:
                p.preview = mpc::PreviewKind::NoChargePreview;
                p.beta2 = 1e3;
                break;
            case CaseId::III:
                p.preview = mpc::PreviewKind::NoChargePreview;
                p.schedule = mpc::ScheduleKind::SocAware;
                break;
        }
        return p;
    }
};

/// Assemble everything run_closed_loop needs for one case on one scenario.
inline mpc::RunSetup make_run_setup(const Scenario& s, const CasePreset& preset,
                                    std::optional<double> beta2_override = std::nullopt) {
    mpc::RunSetup setup;
    setup.params = s.params;
    setup.initial_state = {s.initial_soc, s.initial_t_bat, s.initial_t_cab, 0.0};

    setup.preview.kind = preset.preview;
    setup.preview.arrival_time = s.arrival_time;
    setup.preview.traction = traction_profile(s.cycle, s.params.vehicle);

    setup.schedule.kind = preset.schedule;
    setup.schedule.beta1 = preset.beta1 > 0 ? preset.beta1 : s.beta1;
    setup.schedule.beta2_const = beta2_override.value_or(preset.beta2);
    setup.schedule.beta0 = preset.beta0;
    setup.schedule.b = preset.b;
    setup.schedule.soc_min = s.initial_soc;
    setup.schedule.soc_targ = s.soc_targ;

    auto& cfg = setup.config;
    cfg.dt1 = s.dt1;
    cfg.n2 = s.n2;
    cfg.dt2_max = s.dt2_max;
    cfg.dt_ctrl_drive = s.dt_ctrl_drive;
    cfg.dt_ctrl_charge = s.dt_ctrl_charge;
    cfg.plant_dt = s.plant_dt;
    cfg.alpha = s.alpha;
    cfg.soc_targ = s.soc_targ;
    cfg.limits = s.limits;
    if (preset.hard_budget) cfg.budget_t_chg = s.budget_t_chg;
    return setup;
}

// ---------------------------------------------------------------------------
// Alpha calibration (bisection over a log-spaced bracket)

inline double closed_loop_t_chg_s(const Scenario& s, double alpha) {
    Scenario tmp = s;
    tmp.alpha = alpha;
    mpc::RunSetup setup = make_run_setup(tmp, CasePreset::make(CaseId::I));
    mpc::RunResult r = mpc::run_closed_loop(setup);
    if (!r.metrics.t_chg_min) throw TargetNotReached("calibrate_alpha: target SOC not reached");
    return *r.metrics.t_chg_min * 60.0;
}

/// Bisect alpha in [1e-8, 1e4] (log space) until the Case-I closed-loop
/// charging time is within 1 % of target_t_chg seconds.
inline double calibrate_alpha(const Scenario& s, double target_t_chg,
                              int max_evals = 24) {
    const double lo = 1e-8, hi = 1e4;
    const double rel_tol = 0.01;
    auto within = [&](double t) { return std::abs(t - target_t_chg) / target_t_chg < rel_tol; };

    double mid = std::sqrt(lo * hi);
    double t_mid = closed_loop_t_chg_s(s, mid);
    if (within(t_mid)) return mid;  // early exit: target already met at bracket midpoint

    // t_chg is nonincreasing in alpha; find a sign change of (t - target)
    double t_lo = closed_loop_t_chg_s(s, lo);
    if (within(t_lo)) return lo;
    double t_hi = closed_loop_t_chg_s(s, hi);
    if (within(t_hi)) return hi;
    double a = lo, b = hi, t_a = t_lo, t_b = t_hi;
    if ((t_a - target_t_chg) * (t_b - target_t_chg) > 0)
        throw BracketFailure("calibrate_alpha: no alpha in [1e-8, 1e4] reaches the target");
    for (int it = 0; it < max_evals; ++it) {
        double m = std::sqrt(a * b);
        double t_m = closed_loop_t_chg_s(s, m);
        if (within(t_m)) return m;
        if ((t_a - target_t_chg) * (t_m - target_t_chg) <= 0) {
            b = m;
            t_b = t_m;
        } else {
            a = m;
            t_a = t_m;
        }
    }
    throw BracketFailure("calibrate_alpha: bisection did not converge");
}

}  // namespace iptm::scenario
