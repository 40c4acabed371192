#pragma once

// Fine-step closed-loop plant simulation between controller updates, the
// trajectory log, and the run metrics derived from it.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "iptm/models.hpp"
#include "iptm/types.hpp"

namespace iptm::plant {

/// One log row: state at `clock`, the inputs applied over the following
/// interval, the weights active at that re-plan, and the phase tag.
struct LogSample {
    double clock = 0.0;
    VehicleState state;
    PowerInputs inputs;
    double beta1 = 0.0;
    double beta2 = 0.0;
    Phase phase = Phase::Driving;
};

struct TrajectoryLog {
    std::vector<LogSample> samples;

    bool empty() const { return samples.empty(); }
    const LogSample& back() const { return samples.back(); }

    void append(const LogSample& s) {
        if (!samples.empty() && s.clock <= samples.back().clock)
            throw ValidationError("trajectory log: clock must be strictly increasing");
        samples.push_back(s);
    }

    /// Phase blocks must appear contiguously in driving -> waiting ->
    /// charging -> done order (any block may be empty).
    void check_phase_order() const {
        int last = -1;
        for (const auto& s : samples) {
            int p = static_cast<int>(s.phase);
            if (p < last)
                throw ValidationError("trajectory log: phase order violated at t=" +
                                      std::to_string(s.clock));
            last = p;
        }
    }
};

struct Metrics {
    std::optional<double> t_chg_min;  // defined only if target SOC reached
    double cv_c_sec = 0.0;
    double t_cab_final_c = 0.0;
    double cooling_energy_j = 0.0;
    double peak_t_bat_c = 0.0;
    std::string status = "converged";
};

enum class Integrator { Euler, Rk4 };

/// Hold `inputs` constant and integrate for `duration` at plant_dt (final
/// partial step allowed). Appends exactly ceil(duration/plant_dt) samples.
/// If `stop_soc` is set, integration stops at the first step whose state
/// reaches it (keeps terminal-SOC overshoot within one plant step).
inline VehicleState simulate_interval(VehicleState state, const PowerInputs& inputs,
                                      double duration, double plant_dt, const VehicleParams& p,
                                      bool charging, Phase phase, double beta1, double beta2,
                                      TrajectoryLog& log,
                                      std::optional<double> stop_soc = std::nullopt,
                                      Integrator integrator = Integrator::Euler) {
    if (duration <= 0.0) throw ValidationError("simulate_interval: duration must be > 0");
    if (plant_dt <= 0.0) throw ValidationError("simulate_interval: plant_dt must be > 0");
    if (plant_dt > duration)
        throw ValidationError("simulate_interval: plant_dt must not exceed duration");
    double remaining = duration;
    while (remaining > 1e-12) {
        double dt = std::min(plant_dt, remaining);
        state = integrator == Integrator::Euler ? models::euler_step(state, inputs, dt, p, charging)
                                                : models::rk4_step(state, inputs, dt, p, charging);
        remaining -= dt;
        log.append({state.clock, state, inputs, beta1, beta2, phase});
        if (stop_soc && state.soc >= *stop_soc) break;
    }
    return state;
}

/// Accumulated cabin over-temperature, rectangle rule over the whole log.
inline double accumulate_cv(const TrajectoryLog& log, double t_cab_max) {
    if (log.empty()) throw ValidationError("accumulate_cv: empty log");
    double cv = 0.0;
    for (size_t k = 0; k + 1 < log.samples.size(); ++k) {
        double dt = log.samples[k + 1].clock - log.samples[k].clock;
        cv += std::max(0.0, log.samples[k].state.t_cab - t_cab_max) * dt;
    }
    return cv;
}

/// Minutes from the first charging-phase sample to the first sample at or
/// above the target SOC.
inline double charging_time_min(const TrajectoryLog& log, double soc_targ) {
    const LogSample* start = nullptr;
    for (const auto& s : log.samples) {
        if (s.phase == Phase::Charging || s.phase == Phase::Done) {
            start = &s;
            break;
        }
    }
    if (!start) throw TargetNotReached("charging_time: no charging phase in log");
    if (start->state.soc >= soc_targ) return 0.0;
    for (const auto& s : log.samples) {
        if (s.clock >= start->clock && s.state.soc >= soc_targ)
            return (s.clock - start->clock) / 60.0;
    }
    throw TargetNotReached("charging_time: run ended below target SOC");
}

/// Electrical energy spent on cooling, J (rectangle rule).
inline double cooling_energy_j(const TrajectoryLog& log, double cop) {
    double e = 0.0;
    for (size_t k = 0; k + 1 < log.samples.size(); ++k) {
        double dt = log.samples[k + 1].clock - log.samples[k].clock;
        e += (log.samples[k].inputs.q_bat_cool + log.samples[k].inputs.q_cab_cool) / cop * dt;
    }
    return e;
}

inline Metrics compute_metrics(const TrajectoryLog& log, double soc_targ, double t_cab_max,
                               double cop) {
    Metrics m;
    m.cv_c_sec = accumulate_cv(log, t_cab_max);
    m.cooling_energy_j = cooling_energy_j(log, cop);
    m.t_cab_final_c = log.back().state.t_cab;
    m.peak_t_bat_c = log.samples.front().state.t_bat;
    for (const auto& s : log.samples) m.peak_t_bat_c = std::max(m.peak_t_bat_c, s.state.t_bat);
    try {
        m.t_chg_min = charging_time_min(log, soc_targ);
    } catch (const TargetNotReached&) {
        m.status = "target_not_reached";
    }
    return m;
}

/// Fixed-order CSV serialization of the log (one row per sample).
inline std::string to_csv(const TrajectoryLog& log) {
    std::string out = "clock_s,soc,t_bat_c,t_cab_c,q_bat_w,q_cab_w,p_chg_w,p_trac_w,beta1,beta2,phase\n";
    char buf[320];
    for (const auto& s : log.samples) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.9f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6g,%.6g,%s\n",
                      s.clock, s.state.soc, s.state.t_bat, s.state.t_cab, s.inputs.q_bat_cool,
                      s.inputs.q_cab_cool, s.inputs.p_charge, s.inputs.p_traction, s.beta1,
                      s.beta2, phase_name(s.phase));
        out += buf;
    }
    return out;
}

}  // namespace iptm::plant
