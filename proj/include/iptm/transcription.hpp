#pragma once

// Direct (simultaneous) transcription of the finite-horizon problem: states
// at every knot and controls at every sample are decision variables, with
// forward-Euler defects as equality constraints. The charging phase uses
// free per-sample step lengths so the terminal SOC condition can be imposed
// without knowing the charging duration in advance.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "iptm/models.hpp"
#include "iptm/nlp.hpp"
#include "iptm/types.hpp"

namespace iptm::transcription {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Phase structure of one solve. n1 driving samples at fixed dt1, then
/// (when charging_in_horizon) n2 charging samples whose step lengths are
/// decision variables in [0, dt2_max].
struct HorizonSpec {
    int n1 = 0;
    double dt1 = 30.0;
    int n2 = 20;
    double dt2_max = 180.0;
    std::vector<double> traction_preview;  // length n1, W
    double soc_targ = 0.6;
    bool charging_in_horizon = true;

    int num_samples() const { return n1 + (charging_in_horizon ? n2 : 0); }

    void validate() const {
        if (n1 < 0) throw ValidationError("horizon: n1 must be >= 0");
        if (dt1 <= 0) throw ValidationError("horizon: dt1 must be > 0");
        if (charging_in_horizon && (n2 < 1 || dt2_max <= 0))
            throw ValidationError("horizon: charging phase needs n2 >= 1 and dt2_max > 0");
        if (static_cast<int>(traction_preview.size()) != n1)
            throw ValidationError("horizon: traction preview length must equal n1");
        if (num_samples() < 1) throw ValidationError("horizon: empty horizon");
    }
};

struct Weights {
    double alpha = 1e-2;   // charging step-length penalty
    double beta1 = 1e11;   // battery temperature slack
    double beta2 = 1e10;   // cabin temperature slack
    std::optional<double> budget_t_chg;  // hard bound on sum(dt2), s

    void validate() const {
        if (alpha < 0 || beta1 < 0 || beta2 < 0)
            throw ValidationError("weights must be nonnegative");
        if (budget_t_chg && *budget_t_chg <= 0)
            throw ValidationError("budget_t_chg must be > 0 when set");
    }
};

/// State/control operating limits. Upper temperature bounds are soft (one
/// shared slack each); comfort_margin tightens them inside the controller
/// to absorb plant re-discretization drift.
struct OcpLimits {
    double soc_min = 0.05;
    double soc_max = 0.95;
    double t_bat_min = 15.0;
    double t_bat_max = 35.0;
    double t_cab_min = 23.0;
    double t_cab_max = 25.0;
    double p_chg_max = 80000.0;
    double comfort_margin = 0.01;

    void validate() const {
        if (soc_min >= soc_max) throw InfeasibleBounds("limits: soc_min >= soc_max");
        if (t_bat_min >= t_bat_max) throw InfeasibleBounds("limits: t_bat_min >= t_bat_max");
        if (t_cab_min >= t_cab_max) throw InfeasibleBounds("limits: t_cab_min >= t_cab_max");
        if (p_chg_max <= 0) throw InfeasibleBounds("limits: p_chg_max must be > 0");
        if (comfort_margin < 0) throw ValidationError("limits: comfort margin must be >= 0");
    }
};

struct ProblemParams {
    VehicleParams vehicle;
    OcpLimits limits;
};

/// Decision-vector layout. Slices partition [0, дim) exactly:
/// [q_bat | q_cab | p_chg | dt2 | soc knots | t_bat knots | t_cab knots | eps1 eps2]
struct Layout {
    int n_samples = 0;  // n1 + n2 (or n1 alone without charging)
    int n_charge = 0;   // number of charging samples
    int q_bat = 0, q_cab = 0, p_chg = 0, dt2 = 0;
    int soc = 0, t_bat = 0, t_cab = 0, eps1 = 0, eps2 = 0;
    int dim = 0;

    static Layout build(int n_samples, int n_charge) {
        Layout l;
        l.n_samples = n_samples;
        l.n_charge = n_charge;
        l.q_bat = 0;
        l.q_cab = l.q_bat + n_samples;
        l.p_chg = l.q_cab + n_samples;
        l.dt2 = l.p_chg + n_charge;
        l.soc = l.dt2 + n_charge;
        l.t_bat = l.soc + (n_samples + 1);
        l.t_cab = l.t_bat + (n_samples + 1);
        l.eps1 = l.t_cab + (n_samples + 1);
        l.eps2 = l.eps1 + 1;
        l.dim = l.eps2 + 1;
        return l;
    }
};

class NlpProblem final : public NlpBase {
  public:
    NlpProblem(HorizonSpec spec, VehicleState x0, ProblemParams params, Weights weights)
        : spec_(std::move(spec)), x0_(x0), params_(std::move(params)), weights_(weights) {
        spec_.validate();
        weights_.validate();
        params_.limits.validate();
        params_.vehicle.validate();
        layout_ = Layout::build(spec_.num_samples(), spec_.charging_in_horizon ? spec_.n2 : 0);
        // Charging samples assume the cabin is unoccupied.
        params_driving_ = params_.vehicle;
        params_charging_ = params_.vehicle;
        params_charging_.cabin.occupant_count = 0;
        check_power_envelope();
        build_bounds();
        m_eq_ = 3 * layout_.n_samples + (spec_.charging_in_horizon ? 1 : 0);
        budget_row_ = spec_.charging_in_horizon && weights_.budget_t_chg.has_value();
        m_ineq_ = 2 * layout_.n_samples + layout_.n_samples + (budget_row_ ? 1 : 0);
    }

    // --- NlpBase -----------------------------------------------------------
    using NlpBase::eq_jacobian;
    using NlpBase::eq_residuals;
    using NlpBase::ineq_jacobian;
    using NlpBase::ineq_residuals;
    using NlpBase::objective_grad;

    int num_vars() const override { return layout_.dim; }
    int num_eq() const override { return m_eq_; }
    int num_ineq() const override { return m_ineq_; }
    const VectorXd& lower_bounds() const override { return lb_; }
    const VectorXd& upper_bounds() const override { return ub_; }

    VectorXd var_scale() const override {
        const Layout& L = layout_;
        VectorXd s = VectorXd::Ones(L.dim);
        for (int i = 0; i < L.n_samples; ++i) {
            s[L.q_bat + i] = params_.vehicle.cooling.q_total_max;
            s[L.q_cab + i] = params_.vehicle.cooling.q_total_max;
        }
        for (int i = 0; i < L.n_charge; ++i) {
            s[L.p_chg + i] = params_.limits.p_chg_max;
            s[L.dt2 + i] = spec_.dt2_max;
        }
        for (int k = 0; k <= L.n_samples; ++k) {
            s[L.soc + k] = 1.0;
            s[L.t_bat + k] = 10.0;
            s[L.t_cab + k] = 10.0;
        }
        // Keep the slack-penalty curvature O(1) regardless of beta.
        s[L.eps1] = 1.0 / std::sqrt(std::max(1.0, weights_.beta1));
        s[L.eps2] = 1.0 / std::sqrt(std::max(1.0, weights_.beta2));
        return s;
    }

    VectorXd eq_scale() const override {
        VectorXd s = VectorXd::Ones(m_eq_);
        for (int i = 0; i < layout_.n_samples; ++i) s[3 * i] = 0.1;  // SOC defects
        if (spec_.charging_in_horizon) s[m_eq_ - 1] = 0.1;           // terminal SOC
        return s;
    }

    VectorXd ineq_scale() const override {
        VectorXd s = VectorXd::Ones(m_ineq_);
        int base = 2 * layout_.n_samples;
        for (int i = 0; i < layout_.n_samples; ++i)
            s[base + i] = params_.vehicle.cooling.q_total_max;  // split rows in W
        if (budget_row_) s[m_ineq_ - 1] = std::max(1.0, *weights_.budget_t_chg);
        return s;
    }

    double objective(const VectorXd& z) const override {
        const Layout& L = layout_;
        double cop = params_.vehicle.cooling.cop;
        double cost = 0.0;
        for (int i = 0; i < L.n_samples; ++i) {
            double qb = z[L.q_bat + i];
            double qc = z[L.q_cab + i];
            double dt = sample_dt(z, i);
            cost += (qb * qb + qc * qc) / cop * dt;
            if (is_charging_sample(i)) {
                double dt2 = z[L.dt2 + charge_index(i)];
                cost += weights_.alpha * dt2 * dt2;
            }
        }
        cost += weights_.beta1 * z[L.eps1] * z[L.eps1];
        cost += weights_.beta2 * z[L.eps2] * z[L.eps2];
        return cost;
    }

    void objective_grad(const VectorXd& z, VectorXd& grad) const override {
        const Layout& L = layout_;
        double cop = params_.vehicle.cooling.cop;
        grad.setZero(L.dim);
        for (int i = 0; i < L.n_samples; ++i) {
            double qb = z[L.q_bat + i];
            double qc = z[L.q_cab + i];
            double dt = sample_dt(z, i);
            grad[L.q_bat + i] = 2.0 * qb / cop * dt;
            grad[L.q_cab + i] = 2.0 * qc / cop * dt;
            if (is_charging_sample(i)) {
                int c = charge_index(i);
                grad[L.dt2 + c] += (qb * qb + qc * qc) / cop + 2.0 * weights_.alpha * z[L.dt2 + c];
            }
        }
        grad[L.eps1] = 2.0 * weights_.beta1 * z[L.eps1];
        grad[L.eps2] = 2.0 * weights_.beta2 * z[L.eps2];
    }

    void eq_residuals(const VectorXd& z, VectorXd& c) const override {
        const Layout& L = layout_;
        c.resize(m_eq_);
        for (int i = 0; i < L.n_samples; ++i) {
            models::StateRates f = sample_rates(z, i);
            double dt = sample_dt(z, i);
            c[3 * i + 0] = z[L.soc + i + 1] - z[L.soc + i] - f.d_soc * dt;
            c[3 * i + 1] = z[L.t_bat + i + 1] - z[L.t_bat + i] - f.d_t_bat * dt;
            c[3 * i + 2] = z[L.t_cab + i + 1] - z[L.t_cab + i] - f.d_t_cab * dt;
        }
        if (spec_.charging_in_horizon)
            c[m_eq_ - 1] = z[L.soc + L.n_samples] - spec_.soc_targ;
    }

    void ineq_residuals(const VectorXd& z, VectorXd& g) const override {
        const Layout& L = layout_;
        const OcpLimits& lim = params_.limits;
        g.resize(m_ineq_);
        double tb_max = lim.t_bat_max - lim.comfort_margin;
        double tc_max = lim.t_cab_max - lim.comfort_margin;
        for (int k = 1; k <= L.n_samples; ++k) {
            g[2 * (k - 1) + 0] = z[L.t_bat + k] - tb_max - z[L.eps1];
            g[2 * (k - 1) + 1] = z[L.t_cab + k] - tc_max - z[L.eps2];
        }
        int base = 2 * L.n_samples;
        for (int i = 0; i < L.n_samples; ++i)
            g[base + i] = z[L.q_bat + i] + z[L.q_cab + i] - params_.vehicle.cooling.q_total_max;
        if (budget_row_) {
            double total = 0.0;
            for (int i = 0; i < L.n_charge; ++i) total += z[L.dt2 + i];
            g[m_ineq_ - 1] = total - *weights_.budget_t_chg;
        }
    }

    void eq_jacobian(const VectorXd& z, MatrixXd& jac) const override {
        const Layout& L = layout_;
        jac.setZero(m_eq_, L.dim);
        for (int i = 0; i < L.n_samples; ++i) {
            bool chg = is_charging_sample(i);
            VehicleState x = knot_state(z, i);
            PowerInputs u = sample_inputs(z, i);
            const VehicleParams& vp = chg ? params_charging_ : params_driving_;
            models::RateJacobians dj = models::rate_jacobians(x, u, vp, chg);
            models::StateRates f = models::state_rates(x, u, vp, chg);
            double dt = sample_dt(z, i);
            int rs = 3 * i;

            // soc defect row
            jac(rs, L.soc + i + 1) = 1.0;
            jac(rs, L.soc + i) = -1.0;
            jac(rs, L.q_bat + i) = -dt * dj.dsoc_dpbat * dj.dpbat_dqbat;
            jac(rs, L.q_cab + i) = -dt * dj.dsoc_dpbat * dj.dpbat_dqcab;
            if (chg) jac(rs, L.p_chg + charge_index(i)) = -dt * dj.dsoc_dpbat * dj.dpbat_dpchg;

            // t_bat defect row
            jac(rs + 1, L.t_bat + i + 1) = 1.0;
            jac(rs + 1, L.t_bat + i) = -1.0 - dt * dj.dtbat_dtbat;
            jac(rs + 1, L.q_bat + i) =
                -dt * (dj.dtbat_dpbat * dj.dpbat_dqbat + dj.dtbat_dqbat);
            jac(rs + 1, L.q_cab + i) = -dt * dj.dtbat_dpbat * dj.dpbat_dqcab;
            if (chg) jac(rs + 1, L.p_chg + charge_index(i)) = -dt * dj.dtbat_dpbat * dj.dpbat_dpchg;

            // t_cab defect row
            jac(rs + 2, L.t_cab + i + 1) = 1.0;
            jac(rs + 2, L.t_cab + i) = -1.0 - dt * dj.dtcab_dtcab;
            jac(rs + 2, L.q_cab + i) = -dt * dj.dtcab_dqcab;

            if (chg) {
                int c = charge_index(i);
                jac(rs, L.dt2 + c) = -f.d_soc;
                jac(rs + 1, L.dt2 + c) = -f.d_t_bat;
                jac(rs + 2, L.dt2 + c) = -f.d_t_cab;
            }
        }
        if (spec_.charging_in_horizon) jac(m_eq_ - 1, L.soc + L.n_samples) = 1.0;
    }

    void ineq_jacobian(const VectorXd& z, MatrixXd& jac) const override {
        (void)z;
        const Layout& L = layout_;
        jac.setZero(m_ineq_, L.dim);
        for (int k = 1; k <= L.n_samples; ++k) {
            jac(2 * (k - 1) + 0, L.t_bat + k) = 1.0;
            jac(2 * (k - 1) + 0, L.eps1) = -1.0;
            jac(2 * (k - 1) + 1, L.t_cab + k) = 1.0;
            jac(2 * (k - 1) + 1, L.eps2) = -1.0;
        }
        int base = 2 * L.n_samples;
        for (int i = 0; i < L.n_samples; ++i) {
            jac(base + i, L.q_bat + i) = 1.0;
            jac(base + i, L.q_cab + i) = 1.0;
        }
        if (budget_row_)
            for (int i = 0; i < L.n_charge; ++i) jac(m_ineq_ - 1, L.dt2 + i) = 1.0;
    }

    // --- problem-specific helpers -------------------------------------------

    const Layout& layout() const { return layout_; }
    const HorizonSpec& spec() const { return spec_; }
    const Weights& weights() const { return weights_; }
    const ProblemParams& params() const { return params_; }
    const VehicleState& initial_state() const { return x0_; }

    bool is_charging_sample(int i) const { return i >= spec_.n1; }
    int charge_index(int i) const { return i - spec_.n1; }

    double sample_dt(const VectorXd& z, int i) const {
        return is_charging_sample(i) ? z[layout_.dt2 + charge_index(i)] : spec_.dt1;
    }

    VehicleState knot_state(const VectorXd& z, int k) const {
        VehicleState x;
        x.soc = z[layout_.soc + k];
        x.t_bat = z[layout_.t_bat + k];
        x.t_cab = z[layout_.t_cab + k];
        x.clock = 0.0;
        return x;
    }

    PowerInputs sample_inputs(const VectorXd& z, int i) const {
        PowerInputs u;
        u.q_bat_cool = z[layout_.q_bat + i];
        u.q_cab_cool = z[layout_.q_cab + i];
        u.p_charge = is_charging_sample(i) ? z[layout_.p_chg + charge_index(i)] : 0.0;
        u.p_traction = is_charging_sample(i) ? 0.0 : spec_.traction_preview[i];
        u.p_aux_base = params_.vehicle.p_aux_base;
        return u;
    }

    models::StateRates sample_rates(const VectorXd& z, int i) const {
        bool chg = is_charging_sample(i);
        return models::state_rates(knot_state(z, i), sample_inputs(z, i),
                                   chg ? params_charging_ : params_driving_, chg);
    }

    /// Overwrite the state slices with a forward rollout from x0 under the
    /// controls already in z. Defect residuals vanish on the result.
    VectorXd rollout_states(VectorXd z) const {
        const Layout& L = layout_;
        z[L.soc] = x0_.soc;
        z[L.t_bat] = x0_.t_bat;
        z[L.t_cab] = x0_.t_cab;
        for (int i = 0; i < L.n_samples; ++i) {
            models::StateRates f = sample_rates(z, i);
            double dt = sample_dt(z, i);
            z[L.soc + i + 1] = z[L.soc + i] + f.d_soc * dt;
            z[L.t_bat + i + 1] = z[L.t_bat + i] + f.d_t_bat * dt;
            z[L.t_cab + i + 1] = z[L.t_cab + i] + f.d_t_cab * dt;
        }
        return z;
    }

    /// Cold-start point: controls at mid-bounds, charging steps at
    /// budget/n2 (dt2_max/2 without a budget), states by rollout, slacks 0.
    VectorXd initial_guess() const {
        const Layout& L = layout_;
        VectorXd z = VectorXd::Zero(L.dim);
        for (int i = 0; i < L.n_samples; ++i) {
            z[L.q_bat + i] = 0.5 * std::min(params_.vehicle.cooling.q_bat_max,
                                            params_.vehicle.cooling.q_total_max);
            z[L.q_cab + i] = 0.5 * std::min(params_.vehicle.cooling.q_cab_max,
                                            params_.vehicle.cooling.q_total_max);
        }
        double dt2_init = weights_.budget_t_chg ? *weights_.budget_t_chg / std::max(1, spec_.n2)
                                                : 0.5 * spec_.dt2_max;
        dt2_init = std::min(dt2_init, spec_.dt2_max);
        for (int i = 0; i < L.n_charge; ++i) {
            z[L.p_chg + i] = 0.5 * params_.limits.p_chg_max;
            z[L.dt2 + i] = dt2_init;
        }
        z = rollout_states(z);
        // clip states into their boxes so the first iterate is in-bounds
        for (int j = 0; j < L.dim; ++j) z[j] = std::clamp(z[j], lb_[j], ub_[j]);
        return z;
    }

    /// Charging time implied by a decision vector.
    double predicted_t_chg(const VectorXd& z) const {
        double total = 0.0;
        for (int i = 0; i < layout_.n_charge; ++i) total += z[layout_.dt2 + i];
        return total;
    }

  private:
    void check_power_envelope() {
        // Largest discharge power reachable inside the box bounds must keep
        // the SOC-dynamics discriminant nonnegative.
        double traction_peak = 0.0;
        for (double p : spec_.traction_preview) traction_peak = std::max(traction_peak, p);
        double aux_peak = params_.vehicle.p_aux_base +
                          params_.vehicle.cooling.q_total_max / params_.vehicle.cooling.cop;
        double p_peak = traction_peak + aux_peak;
        if (p_peak > params_.vehicle.battery.max_deliverable_power())
            throw InfeasibleBounds(
                "power envelope: peak discharge " + std::to_string(p_peak) +
                " W exceeds the deliverable limit " +
                std::to_string(params_.vehicle.battery.max_deliverable_power()) + " W");
    }

    void build_bounds() {
        const Layout& L = layout_;
        const OcpLimits& lim = params_.limits;
        const CoolingParams& cool = params_.vehicle.cooling;
        double inf = std::numeric_limits<double>::infinity();
        lb_ = VectorXd::Constant(L.dim, -inf);
        ub_ = VectorXd::Constant(L.dim, inf);
        for (int i = 0; i < L.n_samples; ++i) {
            lb_[L.q_bat + i] = 0.0;
            ub_[L.q_bat + i] = std::min(cool.q_bat_max, cool.q_total_max);
            lb_[L.q_cab + i] = 0.0;
            ub_[L.q_cab + i] = std::min(cool.q_cab_max, cool.q_total_max);
        }
        for (int i = 0; i < L.n_charge; ++i) {
            lb_[L.p_chg + i] = 0.0;
            ub_[L.p_chg + i] = lim.p_chg_max;
            lb_[L.dt2 + i] = 0.0;
            ub_[L.dt2 + i] = spec_.dt2_max;
        }
        for (int k = 0; k <= L.n_samples; ++k) {
            lb_[L.soc + k] = lim.soc_min;
            ub_[L.soc + k] = lim.soc_max;
            lb_[L.t_bat + k] = lim.t_bat_min;
            lb_[L.t_cab + k] = lim.t_cab_min;
            // upper temperature bounds are soft (slack variables)
        }
        // knot 0 carries the measured state
        lb_[L.soc] = ub_[L.soc] = x0_.soc;
        lb_[L.t_bat] = ub_[L.t_bat] = x0_.t_bat;
        lb_[L.t_cab] = ub_[L.t_cab] = x0_.t_cab;
        lb_[L.eps1] = 0.0;
        lb_[L.eps2] = 0.0;
    }

    HorizonSpec spec_;
    VehicleState x0_;
    ProblemParams params_;
    Weights weights_;
    VehicleParams params_driving_;
    VehicleParams params_charging_;
    Layout layout_;
    VectorXd lb_, ub_;
    int m_eq_ = 0;
    int m_ineq_ = 0;
    bool budget_row_ = false;
};

}  // namespace iptm::transcription
