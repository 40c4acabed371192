#pragma once

// Receding-horizon warm start: map the previous solve's decision vector
// onto the next problem by dropping elapsed driving samples, keeping the
// charging-phase variables, and re-rolling the state knots from the new
// initial condition so the Euler defects start consistent.

#include <Eigen/Dense>

#include "iptm/solver.hpp"
#include "iptm/transcription.hpp"

namespace iptm::solver {

inline Eigen::VectorXd warm_start(const Solution& prev, const transcription::NlpProblem& old_p,
                                  const transcription::NlpProblem& new_p) {
    using transcription::Layout;
    const auto& os = old_p.spec();
    const auto& ns = new_p.spec();
    const Layout& ol = old_p.layout();
    const Layout& nl = new_p.layout();
    if (prev.z.size() != ol.dim)
        throw DimensionMismatch("warm_start: previous solution does not match the old problem");
    if (os.charging_in_horizon != ns.charging_in_horizon || (ns.charging_in_horizon && os.n2 != ns.n2))
        throw DimensionMismatch("warm_start: horizon specs are incompatible");
    int shift = os.n1 - ns.n1;
    if (shift < 0) throw DimensionMismatch("warm_start: driving horizon grew");

    // identical specs and identical anchor state: hand back unchanged
    if (shift == 0 && old_p.initial_state().soc == new_p.initial_state().soc &&
        old_p.initial_state().t_bat == new_p.initial_state().t_bat &&
        old_p.initial_state().t_cab == new_p.initial_state().t_cab) {
        bool same_budget = old_p.weights().budget_t_chg == new_p.weights().budget_t_chg;
        if (same_budget) return prev.z;
    }

    Eigen::VectorXd z = Eigen::VectorXd::Zero(nl.dim);
    for (int i = 0; i < nl.n_samples; ++i) {
        int j = i < ns.n1 ? i + shift : (i - ns.n1) + os.n1;  // old sample index
        z[nl.q_bat + i] = prev.z[ol.q_bat + j];
        z[nl.q_cab + i] = prev.z[ol.q_cab + j];
    }
    for (int c = 0; c < nl.n_charge; ++c) {
        z[nl.p_chg + c] = prev.z[ol.p_chg + c];
        z[nl.dt2 + c] = prev.z[ol.dt2 + c];
    }
    z[nl.eps1] = prev.z[ol.eps1];
    z[nl.eps2] = prev.z[ol.eps2];

    // shrink the predicted charging time into the remaining budget
    if (new_p.weights().budget_t_chg && nl.n_charge > 0) {
        double total = 0.0;
        for (int c = 0; c < nl.n_charge; ++c) total += z[nl.dt2 + c];
        double budget = *new_p.weights().budget_t_chg;
        if (total > budget && total > 0.0) {
            double k = budget / total;
            for (int c = 0; c < nl.n_charge; ++c) z[nl.dt2 + c] *= k;
        }
    }

    z = new_p.rollout_states(z);
    const auto& lb = new_p.lower_bounds();
    const auto& ub = new_p.upper_bounds();
    for (int j = 0; j < nl.dim; ++j) z[j] = std::min(std::max(z[j], lb[j]), ub[j]);
    return z;
}

}  // namespace iptm::solver
