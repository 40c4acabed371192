#pragma once

// The receding/shrinking-horizon controller: builds the horizon from clock
// and preview, applies the weight schedule, solves, applies the first-step
// controls to the plant, and repeats until the target SOC is reached.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "iptm/plant.hpp"
#include "iptm/solver.hpp"
#include "iptm/transcription.hpp"
#include "iptm/warm_start.hpp"

namespace iptm::mpc {

struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Preview and weight schedule

/// Exogenous traction-power demand over the driving phase, zero-order-hold
/// between grid points and zero past the end (waiting at the charger).
struct TractionProfile {
    std::vector<double> time_s;   // strictly increasing
    std::vector<double> power_w;  // same length

    double end_time() const { return time_s.empty() ? 0.0 : time_s.back(); }

    double at(double t) const {
        if (time_s.empty() || t < time_s.front() || t >= time_s.back()) return 0.0;
        auto it = std::upper_bound(time_s.begin(), time_s.end(), t);
        size_t idx = static_cast<size_t>(it - time_s.begin()) - 1;
        return power_w[idx];
    }
};

enum class PreviewKind { AccuratePreview, NoChargePreview };

/// AccuratePreview exposes the charging phase to the optimizer from t=0;
/// NoChargePreview hides it until the vehicle has arrived.
struct PreviewModel {
    PreviewKind kind = PreviewKind::AccuratePreview;
    double arrival_time = 0.0;  // s; includes any waiting at the charger
    TractionProfile traction;
};

enum class ScheduleKind { Constant, SocAware };

struct WeightSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double beta1 = 1e11;
    double beta2_const = 1e10;
    // SocAware parameters
    double beta0 = 10.0;
    double b = 10.0;
    double soc_min = 0.3;
    double soc_targ = 0.6;

    void validate() const {
        if (beta1 < 0) throw ValidationError("schedule: beta1 must be nonnegative");
        if (kind == ScheduleKind::SocAware) {
            if (soc_targ <= soc_min)
                throw ValidationError("schedule: SocAware requires soc_targ > soc_min");
            if (beta0 <= 0) throw ValidationError("schedule: beta0 must be > 0");
        }
    }
};

/// Exponential SOC-aware cabin weight: beta0 at the charge-start SOC rising
/// to beta0*10^b at the target.
inline double beta2_of_soc(double soc, const WeightSchedule& ws) {
    if (ws.kind != ScheduleKind::SocAware)
        throw WrongScheduleKind("beta2_of_soc: schedule is not SOC-aware");
    double s = std::clamp(soc, ws.soc_min, ws.soc_targ);
    return ws.beta0 * std::pow(10.0, ws.b * (s - ws.soc_min) / (ws.soc_targ - ws.soc_min));
}

inline double schedule_beta2(double soc, const WeightSchedule& ws) {
    return ws.kind == ScheduleKind::Constant ? ws.beta2_const : beta2_of_soc(soc, ws);
}

// ---------------------------------------------------------------------------
// Controller configuration

struct MpcConfig {
    double dt1 = 30.0;
    int n2 = 20;
    double dt2_max = 180.0;
    double dt_ctrl_drive = 30.0;
    double dt_ctrl_charge = 10.0;
    double plant_dt = 1.0;
    double alpha = 1e-2;
    std::optional<double> budget_t_chg;  // hard budget on predicted charging time
    double soc_targ = 0.6;
    transcription::OcpLimits limits;
    solver::SolverOptions solver_opts;
    double safety_horizon_s = 4.0 * 3600.0;
    plant::Integrator plant_integrator = plant::Integrator::Euler;

    void validate() const {
        if (dt1 <= 0 || dt2_max <= 0 || n2 < 1) throw ValidationError("mpc: bad sampling setup");
        if (dt_ctrl_drive <= 0 || dt_ctrl_charge <= 0 || plant_dt <= 0)
            throw ValidationError("mpc: control/plant periods must be > 0");
        limits.validate();
    }
};

// ---------------------------------------------------------------------------
// Horizon construction (Fig.-1 phase logic)

inline transcription::HorizonSpec make_horizon(double clock, const PreviewModel& preview,
                                               const MpcConfig& cfg) {
    transcription::HorizonSpec spec;
    spec.dt1 = cfg.dt1;
    spec.n2 = cfg.n2;
    spec.dt2_max = cfg.dt2_max;
    spec.soc_targ = cfg.soc_targ;
    double remaining = preview.arrival_time - clock;
    if (remaining > 1e-9) {
        spec.n1 = static_cast<int>(std::ceil(remaining / cfg.dt1 - 1e-12));
        spec.traction_preview.resize(spec.n1);
        for (int i = 0; i < spec.n1; ++i)
            spec.traction_preview[i] = preview.traction.at(clock + i * cfg.dt1);
        spec.charging_in_horizon = preview.kind == PreviewKind::AccuratePreview;
    } else {
        spec.n1 = 0;
        spec.charging_in_horizon = true;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// One MPC step

struct PlanResult {
    PowerInputs first_step;
    std::optional<double> predicted_t_chg;  // s
    solver::Solution solution;
    std::shared_ptr<transcription::NlpProblem> problem;  // kept for warm starts
    double beta1 = 0.0;
    double beta2 = 0.0;
};

inline PlanResult plan(const VehicleState& state, double clock, const PreviewModel& preview,
                       const WeightSchedule& schedule, const VehicleParams& vp,
                       const MpcConfig& cfg, const PlanResult* warm = nullptr) {
    transcription::HorizonSpec spec = make_horizon(clock, preview, cfg);

    transcription::Weights w;
    w.alpha = cfg.alpha;
    w.beta1 = schedule.beta1;
    w.beta2 = schedule_beta2(state.soc, schedule);
    if (cfg.budget_t_chg && spec.charging_in_horizon) {
        double elapsed_charging = std::max(0.0, clock - preview.arrival_time);
        double remaining = *cfg.budget_t_chg - elapsed_charging;
        // near depletion the terminal equality takes over; a sub-minute
        // residual budget would only manufacture infeasibility
        if (remaining > 60.0) w.budget_t_chg = remaining;
    }

    auto problem = std::make_shared<transcription::NlpProblem>(
        spec, state, transcription::ProblemParams{vp, cfg.limits}, w);

    Eigen::VectorXd z0;
    if (warm && warm->problem) {
        try {
            z0 = solver::warm_start(warm->solution, *warm->problem, *problem);
        } catch (const DimensionMismatch&) {
            z0 = problem->initial_guess();
        }
    } else {
        z0 = problem->initial_guess();
    }

    solver::Solution sol = solver::solve(*problem, z0, cfg.solver_opts);
    if (sol.status == solver::SolveStatus::Infeasible ||
        sol.status == solver::SolveStatus::EvaluationError) {
        throw SolverFailure(std::string("mpc plan at t=") + std::to_string(clock) +
                            " failed: " + solver::status_name(sol.status));
    }

    const auto& L = problem->layout();
    PlanResult r;
    r.first_step.q_bat_cool = sol.z[L.q_bat];
    r.first_step.q_cab_cool = sol.z[L.q_cab];
    r.first_step.p_charge = (spec.n1 == 0 && spec.charging_in_horizon) ? sol.z[L.p_chg] : 0.0;
    r.first_step.p_traction = spec.n1 > 0 ? spec.traction_preview[0] : 0.0;
    r.first_step.p_aux_base = vp.p_aux_base;
    if (spec.charging_in_horizon) r.predicted_t_chg = problem->predicted_t_chg(sol.z);
    r.solution = std::move(sol);
    r.problem = problem;
    r.beta1 = w.beta1;
    r.beta2 = w.beta2;
    return r;
}

// ---------------------------------------------------------------------------
// Closed loop

/// Everything a closed-loop run needs, assembled by the scenario layer.
struct RunSetup {
    VehicleParams params;
    VehicleState initial_state;  // clock = 0
    PreviewModel preview;
    WeightSchedule schedule;
    MpcConfig config;
};

struct RunResult {
    plant::TrajectoryLog log;
    plant::Metrics metrics;
    long total_solves = 0;
    long total_inner_iters = 0;
};

inline RunResult run_closed_loop(const RunSetup& setup) {
    setup.config.validate();
    setup.schedule.validate();
    setup.params.validate();
    const MpcConfig& cfg = setup.config;
    const double targ = cfg.soc_targ;
    const double drive_end = setup.preview.traction.end_time();
    const double arrival = setup.preview.arrival_time;
    if (arrival < drive_end - 1e-9)
        throw ValidationError("run: arrival_time precedes the end of the drive cycle");

    RunResult out;
    VehicleState state = setup.initial_state;
    state.clock = 0.0;

    if (state.soc >= targ) {
        out.log.append({0.0, state, PowerInputs{}, setup.schedule.beta1,
                        schedule_beta2(state.soc, setup.schedule), Phase::Done});
        // zero-length run: charging target already met
        out.metrics.t_chg_min = 0.0;
        out.metrics.t_cab_final_c = state.t_cab;
        out.metrics.peak_t_bat_c = state.t_bat;
        return out;
    }

    VehicleParams plant_params_occupied = setup.params;
    VehicleParams plant_params_empty = setup.params;
    plant_params_empty.cabin.occupant_count = 0;

    PlanResult prev;
    bool have_prev = false;
    while (state.clock < cfg.safety_horizon_s && state.soc < targ) {
        Phase phase = state.clock < drive_end - 1e-9
                          ? Phase::Driving
                          : (state.clock < arrival - 1e-9 ? Phase::Waiting : Phase::Charging);
        PlanResult step = plan(state, state.clock, setup.preview, setup.schedule, setup.params,
                               cfg, have_prev ? &prev : nullptr);
        out.total_solves++;
        out.total_inner_iters += step.solution.inner_iters;

        double dt_ctrl = phase == Phase::Charging ? cfg.dt_ctrl_charge : cfg.dt_ctrl_drive;
        double duration = dt_ctrl;
        if (phase == Phase::Driving) duration = std::min(duration, drive_end - state.clock);
        if (phase != Phase::Charging) duration = std::min(duration, arrival - state.clock);
        duration = std::max(duration, cfg.plant_dt);

        if (out.log.empty())
            out.log.append({state.clock, state, step.first_step, step.beta1, step.beta2, phase});

        bool charging = phase == Phase::Charging;
        const VehicleParams& pp = charging ? plant_params_empty : plant_params_occupied;
        state = plant::simulate_interval(state, step.first_step, duration, cfg.plant_dt, pp,
                                         charging, phase, step.beta1, step.beta2, out.log, targ,
                                         cfg.plant_integrator);
        prev = std::move(step);
        have_prev = true;
    }

    if (!out.log.empty() && state.soc >= targ) out.log.samples.back().phase = Phase::Done;
    out.log.check_phase_order();
    out.metrics = plant::compute_metrics(out.log, targ, cfg.limits.t_cab_max,
                                         setup.params.cooling.cop);
    return out;
}

}  // namespace iptm::mpc
